"""Inter-atomic distance matrix from graph geodesics.

Distances are unweighted shortest-path hop counts scaled by a nominal bond
length, not 3D conformer coordinates.  This keeps the matrix deterministic
and dependency-free while preserving the bond topology that drives both the
kernel features and ring-detecting persistence; it is a deliberate
substitution for an embedder and is documented as such in the README.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedError, DomainError, ShapeError
from .molgraph import MolecularGraph

__all__ = ["DistanceMatrix", "geodesic_distances", "DEFAULT_BOND_LENGTH"]

DEFAULT_BOND_LENGTH = 1.5  # Å, nominal C-C single bond


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric non-negative distance matrix with zero diagonal."""

    n: int
    d: np.ndarray  # (n, n) float64

    def __post_init__(self):
        if self.d.shape != (self.n, self.n):
            raise ShapeError(f"matrix shape {self.d.shape} != ({self.n}, {self.n})")


def geodesic_distances(
    g: MolecularGraph, bond_length_scale: float = DEFAULT_BOND_LENGTH
) -> DistanceMatrix:
    """Distance matrix d(i,j) = scale x BFS hop count between atoms."""
    if bond_length_scale <= 0:
        raise DomainError(f"bond_length_scale must be positive, got {bond_length_scale}")
    n = g.n_atoms
    hops = np.full((n, n), -1, dtype=np.int64)
    for src in range(n):
        hops[src, src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v, _ in g.adjacency[u]:
                if hops[src, v] == -1:
                    hops[src, v] = hops[src, u] + 1
                    queue.append(v)
    if np.any(hops < 0):
        raise DisconnectedError("unreachable atom pair in distance computation")
    return DistanceMatrix(n, hops.astype(np.float64) * bond_length_scale)
