from __future__ import annotations

from functools import cached_property
from typing import Tuple

import numpy as np
from scipy import sparse


class Adjacency:
    """
    Compressed sparse adjacency from one node class to another.

    Neighbor lists are sorted by index; iteration costs O(nnz).
    """

    def __init__(self, matrix: sparse.csr_array):
        csr = sparse.csr_array(matrix, dtype=np.int8)
        csr.sum_duplicates()
        csr.eliminate_zeros()
        csr.sort_indices()
        self.shape: Tuple[int, int] = (int(csr.shape[0]), int(csr.shape[1]))
        self.indptr = csr.indptr.astype(np.int64)
        self.indices = csr.indices.astype(np.int64)

    @classmethod
    def from_pairs(cls, sources: np.ndarray, targets: np.ndarray, n_sources: int, n_targets: int) -> Adjacency:
        sources = np.asarray(sources, dtype=np.int64)
        targets = np.asarray(targets, dtype=np.int64)
        matrix = sparse.csr_array(
            (np.ones(len(sources), dtype=np.int8), (sources, targets)),
            shape=(n_sources, n_targets),
        )
        return cls(matrix)

    @property
    def n_sources(self) -> int:
        return self.shape[0]

    @property
    def n_targets(self) -> int:
        return self.shape[1]

    @property
    def nnz(self) -> int:
        return len(self.indices)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    def expand(self, nodes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Flatten the neighbor lists of ``nodes``.

        Returns:
            (segments, neighbors): ``segments[i]`` is the position in ``nodes``
            of the node owning edge i, ``neighbors[i]`` its target index.
        """
        nodes = np.asarray(nodes, dtype=np.int64)
        starts = self.indptr[nodes]
        counts = self.indptr[nodes + 1] - starts
        total = int(counts.sum())
        segments = np.repeat(np.arange(len(nodes), dtype=np.int64), counts)
        offsets = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
        return segments, self.indices[np.repeat(starts, counts) + offsets]

    def neighbor_union(self, nodes: np.ndarray) -> np.ndarray:
        """Sorted unique neighbors of ``nodes``."""
        _, neighbors = self.expand(nodes)
        return np.unique(neighbors)

    def transpose(self) -> Adjacency:
        return Adjacency(self.matrix().T.tocsr())

    def matrix(self) -> sparse.csr_array:
        return sparse.csr_array(
            (np.ones(self.nnz, dtype=np.int8), self.indices, self.indptr),
            shape=self.shape,
        )

    def pairs(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.repeat(np.arange(self.n_sources, dtype=np.int64), self.degrees), self.indices.copy()
