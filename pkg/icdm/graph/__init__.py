from icdm.graph.adjacency import Adjacency
from icdm.graph.bipartite import BipartiteGraph
from icdm.graph.scg import StudentCenteredGraph, build_involvement, build_scg, neighbors

__all__ = [
    "Adjacency",
    "BipartiteGraph",
    "StudentCenteredGraph",
    "build_involvement",
    "build_scg",
    "neighbors",
]
