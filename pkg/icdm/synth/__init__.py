from icdm.synth.dina import generate

__all__ = ["generate"]
