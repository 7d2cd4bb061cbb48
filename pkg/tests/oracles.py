"""Independent reference implementations used to cross-check the package.

Deliberately written with different algorithms than the library: persistence
via full boundary-matrix reduction over every simplex, and the graph kernel
features via a scalar double loop.  Slow but obviously correct.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from topomol.molgraph import MolecularGraph
from topomol.mwcg import MwcgConfig, atom_type_codes


def brute_force_persistence(
    d: np.ndarray, max_filtration: float = math.inf
) -> list[tuple[int, float, float]]:
    """Persistence pairs (dim, birth, death) of the Rips filtration by
    textbook column reduction of the full boundary matrix.

    Simplices up to triangles, ordered by (filtration, dimension, vertices);
    zero-persistence pairs are dropped.  Death is math.inf for classes that
    survive the whole (truncated) filtration.
    """
    n = d.shape[0]
    simplices: list[tuple[float, int, tuple[int, ...]]] = [
        (0.0, 0, (i,)) for i in range(n)
    ]
    for i, j in combinations(range(n), 2):
        w = float(d[i, j])
        if w <= max_filtration:
            simplices.append((w, 1, (i, j)))
    for i, j, k in combinations(range(n), 3):
        w = float(max(d[i, j], d[i, k], d[j, k]))
        if w <= max_filtration:
            simplices.append((w, 2, (i, j, k)))
    simplices.sort()
    position = {verts: pos for pos, (_, _, verts) in enumerate(simplices)}

    # Boundary columns as bitsets over simplex positions.
    columns: list[int] = []
    for _, dim, verts in simplices:
        col = 0
        if dim > 0:
            for face in combinations(verts, dim):
                col |= 1 << position[face]
        columns.append(col)

    low_owner: dict[int, int] = {}
    death_of: dict[int, float] = {}  # position of killed simplex -> death filt
    positive: list[int] = []
    for pos, col in enumerate(columns):
        while col:
            low = col.bit_length() - 1
            if low not in low_owner:
                break
            col ^= columns[low_owner[low]]
        if col:
            low_owner[col.bit_length() - 1] = pos
            death_of[col.bit_length() - 1] = simplices[pos][0]
        else:
            positive.append(pos)

    pairs: list[tuple[int, float, float]] = []
    for pos in positive:
        birth, dim, _ = simplices[pos]
        if dim > 1:
            continue
        death = death_of.get(pos, math.inf)
        if death > birth:
            pairs.append((dim, birth, death))
    pairs.sort(key=lambda p: (p[0], p[1], p[2]))
    return pairs


def mwcg_reference(
    g: MolecularGraph, d: np.ndarray, cfg: MwcgConfig
) -> np.ndarray:
    """Scalar double-loop version of the kernel features.

    Accumulates per-atom kernel weights in ascending partner index with
    np.float64 arithmetic so that, for small molecules, the result is
    bit-identical to the vectorized implementation.
    """
    n = g.n_atoms
    codes = atom_type_codes(g, cfg)
    bonded = {(b.i, b.j) for b in g.bonds} | {(b.j, b.i) for b in g.bonds}
    out = []
    for ta, tb in cfg.pairs:
        for eta in cfg.scales:
            mu = [np.float64(0.0) for _ in range(n)]
            cnt = [0] * n
            for i in range(n):
                if codes[i] != ta and codes[i] != tb:
                    continue
                # When i is typed ta it collects from tb partners and vice
                # versa; for ta == tb those coincide.
                partner = tb if codes[i] == ta else ta
                if codes[i] == ta == tb:
                    partner = ta
                for j in range(n):
                    if j == i or codes[j] != partner:
                        continue
                    if (i, j) in bonded:
                        continue
                    dij = np.float64(d[i, j])
                    if dij > cfg.cutoff:
                        continue
                    mu[i] = mu[i] + np.exp(-((dij / eta) ** cfg.kappa))
                    cnt[i] += 1
            total = np.float64(0.0)
            for i in range(n):
                total = total + mu[i]
            n_contrib = sum(1 for c in cnt if c > 0)
            mean = total / np.float64(n_contrib) if n_contrib else np.float64(0.0)
            mx = max((mu[i] for i in range(n) if cnt[i] > 0), default=np.float64(0.0))
            out.extend([float(total), float(mean), float(mx)])
    return np.array(out, dtype=np.float64)
