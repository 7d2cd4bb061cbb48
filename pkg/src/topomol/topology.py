"""Vietoris-Rips persistent homology, Betti counts and persistence images.

H0 comes from union-find over distance-sorted edges with the elder rule
(ties broken toward the component holding the lower vertex index).  H1
comes from column reduction of the triangle boundary matrix over Z/2,
stored as Python integer bitsets over edge positions; the reduction pairing
lemma guarantees every surviving low lands on a cycle-creating edge.
Zero-persistence pairs are discarded everywhere, which also makes the
diagram independent of how ties in the filtration order are broken.

Persistence images rasterize (birth, persistence) points with a
linearly-persistence-weighted Gaussian per point, one grid for H0 and one
for H1, concatenated into a fixed-length vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .metric import DistanceMatrix

__all__ = [
    "PersistencePair",
    "PersistenceDiagram",
    "ImageConfig",
    "PersistenceImage",
    "TopologySummary",
    "rips_persistence",
    "betti_at",
    "persistence_image",
    "topology_summary",
    "DEFAULT_MAX_FILTRATION",
]

DEFAULT_MAX_FILTRATION = 6.0  # Å; rings up to 8 atoms die well below this


@dataclass(frozen=True)
class PersistencePair:
    dim: int
    birth: float
    death: float  # math.inf for classes that never die

    def __post_init__(self):
        if self.birth > self.death:
            raise ValueError(f"birth {self.birth} after death {self.death}")

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class PersistenceDiagram:
    pairs: tuple[PersistencePair, ...]

    def by_dim(self, dim: int) -> tuple[PersistencePair, ...]:
        return tuple(p for p in self.pairs if p.dim == dim)


@dataclass(frozen=True)
class ImageConfig:
    rows: int = 10
    cols: int = 10
    birth_range: tuple[float, float] = (0.0, DEFAULT_MAX_FILTRATION)
    pers_range: tuple[float, float] = (0.0, DEFAULT_MAX_FILTRATION)
    sigma: float = 0.5

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError(f"image resolution {self.rows}x{self.cols} degenerate")
        if self.birth_range[1] <= self.birth_range[0]:
            raise ConfigError(f"degenerate birth range {self.birth_range}")
        if self.pers_range[1] <= self.pers_range[0]:
            raise ConfigError(f"degenerate persistence range {self.pers_range}")
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class PersistenceImage:
    """Two row-major grids (H0 then H1) flattened into one vector."""

    resolution: tuple[int, int]
    values: np.ndarray  # length rows*cols*2


@dataclass(frozen=True)
class TopologySummary:
    betti0: int
    betti1: int
    diagram: PersistenceDiagram


class _UnionFind:
    """Union-find keeping, per root, the minimum vertex index it contains;
    merges let the component with the smaller minimum survive."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.min_vertex = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the components of a and b; returns False if already one."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.min_vertex[rb] < self.min_vertex[ra]:
            ra, rb = rb, ra
        # ra survives (elder / lower-vertex rule); rb's class dies here.
        self.parent[rb] = ra
        self.min_vertex[ra] = min(self.min_vertex[ra], self.min_vertex[rb])
        return True


def rips_persistence(
    dm: DistanceMatrix | np.ndarray,
    max_dim: int = 1,
    max_filtration: float = DEFAULT_MAX_FILTRATION,
) -> PersistenceDiagram:
    """Persistence diagram of the Rips filtration of a finite metric space.

    H0 uses every edge regardless of max_filtration so the component
    structure is exact; the H1 complex (edges and triangles) is truncated at
    max_filtration, and classes alive past it get death = infinity.
    """
    if max_filtration <= 0:
        raise DomainError(f"max_filtration must be positive, got {max_filtration}")
    if max_dim not in (0, 1):
        raise DomainError(f"max_dim must be 0 or 1, got {max_dim}")
    d = dm.d if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=np.float64)
    n = d.shape[0]
    pairs: list[PersistencePair] = []
    if n == 1:
        pairs.append(PersistencePair(0, 0.0, math.inf))
        return PersistenceDiagram(tuple(pairs))

    iu, ju = np.triu_indices(n, 1)
    w = d[iu, ju]
    order = np.lexsort((ju, iu, w))
    uf = _UnionFind(n)
    # Cycle-creating ("positive") edges inside the truncated complex, in
    # filtration order; these birth the H1 classes.
    positive_edges: list[tuple[float, int, int]] = []
    kept_pos: dict[tuple[int, int], int] = {}
    kept_w: list[float] = []
    for idx in order:
        i, j, dist = int(iu[idx]), int(ju[idx]), float(w[idx])
        in_complex = dist <= max_filtration
        if in_complex:
            kept_pos[(i, j)] = len(kept_w)
            kept_w.append(dist)
        if uf.union(i, j):
            if dist > 0.0:
                pairs.append(PersistencePair(0, 0.0, dist))
        elif in_complex:
            positive_edges.append((dist, i, j))
    roots = {uf.find(v) for v in range(n)}
    for _ in roots:
        pairs.append(PersistencePair(0, 0.0, math.inf))

    if max_dim >= 1:
        pairs.extend(
            _h1_pairs(d, n, max_filtration, kept_pos, kept_w, positive_edges)
        )
    ordered = sorted(pairs, key=lambda p: (p.dim, p.birth, p.death))
    return PersistenceDiagram(tuple(ordered))


def _h1_pairs(
    d: np.ndarray,
    n: int,
    max_filtration: float,
    kept_pos: dict[tuple[int, int], int],
    kept_w: list[float],
    positive_edges: list[tuple[float, int, int]],
) -> list[PersistencePair]:
    if not positive_edges:
        return []
    within = (d <= max_filtration) & ~np.eye(n, dtype=bool)
    # All i < j < k with the three edges inside the complex, via one
    # broadcast over the n^3 incidence tensor (n is small for molecules).
    tri_mask = within[:, :, None] & within[:, None, :] & within[None, :, :]
    ti, tj, tk = np.nonzero(tri_mask)
    keep = (ti < tj) & (tj < tk)
    ti, tj, tk = ti[keep], tj[keep], tk[keep]
    filt = np.maximum(np.maximum(d[ti, tj], d[ti, tk]), d[tj, tk])
    # Edge -> bit position as a dense matrix so column bitsets come from
    # three array lookups instead of dict probes per triangle.
    posmat = np.zeros((n, n), dtype=np.int64)
    for (i, j), pos in kept_pos.items():
        posmat[i, j] = pos
        posmat[j, i] = pos
    order = np.argsort(filt, kind="stable")
    p_ij = posmat[ti, tj][order].tolist()
    p_ik = posmat[ti, tk][order].tolist()
    p_jk = posmat[tj, tk][order].tolist()
    filts = filt[order].tolist()

    owner: dict[int, int] = {}  # low edge position -> reduced column bitset
    killed: dict[int, float] = {}  # positive edge position -> death filtration
    for a, b, c, f in zip(p_ij, p_ik, p_jk, filts):
        col = (1 << a) | (1 << b) | (1 << c)
        low = -1
        while col:
            low = col.bit_length() - 1
            prev = owner.get(low)
            if prev is None:
                break
            col ^= prev
        if col:
            owner[low] = col
            killed[low] = f

    out: list[PersistencePair] = []
    for dist, i, j in positive_edges:
        pos = kept_pos[(i, j)]
        death = killed.get(pos, math.inf)
        if death > dist:
            out.append(PersistencePair(1, dist, death))
    return out


def betti_at(diagram: PersistenceDiagram, t: float) -> tuple[int, int]:
    """Counts of classes alive at scale t (birth <= t < death) per dimension."""
    if t < 0:
        raise DomainError(f"scale must be non-negative, got {t}")
    b0 = b1 = 0
    for p in diagram.pairs:
        if p.birth <= t < p.death:
            if p.dim == 0:
                b0 += 1
            else:
                b1 += 1
    return b0, b1


def topology_summary(
    diagram: PersistenceDiagram, t_star: float
) -> TopologySummary:
    b0, b1 = betti_at(diagram, t_star)
    return TopologySummary(b0, b1, diagram)


def persistence_image(
    diagram: PersistenceDiagram,
    cfg: ImageConfig,
    max_filtration: float = DEFAULT_MAX_FILTRATION,
) -> PersistenceImage:
    """Gaussian-smoothed raster of (birth, persistence) points.

    Infinite deaths are clipped to max_filtration before computing
    persistence.  Each point deposits a normalized 2D Gaussian scaled by
    min(persistence / persistence_upper, 1), sampled at cell centers and
    multiplied by cell area; grids are row-major with persistence varying
    over rows and birth over columns, H0 grid first.
    """
    b_lo, b_hi = cfg.birth_range
    p_lo, p_hi = cfg.pers_range
    cell_w = (b_hi - b_lo) / cfg.cols
    cell_h = (p_hi - p_lo) / cfg.rows
    col_centers = b_lo + (np.arange(cfg.cols) + 0.5) * cell_w
    row_centers = p_lo + (np.arange(cfg.rows) + 0.5) * cell_h
    norm = 1.0 / (2.0 * math.pi * cfg.sigma**2)
    area = cell_w * cell_h

    grids = []
    for dim in (0, 1):
        grid = np.zeros((cfg.rows, cfg.cols), dtype=np.float64)
        for p in diagram.by_dim(dim):
            death = min(p.death, max_filtration)
            pers = death - p.birth
            if pers <= 0:
                continue
            weight = min(pers / p_hi, 1.0) if p_hi > 0 else 1.0
            gx = np.exp(-((col_centers - p.birth) ** 2) / (2.0 * cfg.sigma**2))
            gy = np.exp(-((row_centers - pers) ** 2) / (2.0 * cfg.sigma**2))
            grid += weight * norm * area * np.outer(gy, gx)
        grids.append(grid.ravel())
    return PersistenceImage((cfg.rows, cfg.cols), np.concatenate(grids))
