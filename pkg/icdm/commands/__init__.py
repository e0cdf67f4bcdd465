from icdm.commands.data import dump_graph, split, stats, synth
from icdm.commands.model import bench, evaluate, infer, train

COMMANDS = [stats, synth, split, train, evaluate, infer, bench, dump_graph]
