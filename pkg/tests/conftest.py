"""Shared fixtures: corpus loading, random molecule generation, isomorphism."""

from __future__ import annotations

import importlib.resources

import numpy as np
import pytest

from topomol.elements import adjusted_valence
from topomol.molgraph import Atom, Bond, MolecularGraph


def load_sample_corpus() -> list[str]:
    text = (
        importlib.resources.files("topomol.data").joinpath("sample.smi").read_text()
    )
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


@pytest.fixture(scope="session")
def sample_corpus() -> list[str]:
    return load_sample_corpus()


def random_molecule(
    rng: np.random.Generator,
    n_atoms: int | None = None,
    elements: tuple[str, ...] = ("C", "N", "O"),
    n_ring_closures: int = 0,
    min_ring_size: int = 3,
) -> MolecularGraph:
    """Random connected molecule built atom by atom, independent of the
    environment module's action machinery.

    Grows a tree by attaching each new atom to a previous one that still has
    free valence, then closes `n_ring_closures` extra bonds between
    non-adjacent atoms (best effort; skipped when no legal pair remains).
    """
    if n_atoms is None:
        n_atoms = int(rng.integers(2, 14))
    symbols = [str(rng.choice(elements)) for _ in range(n_atoms)]
    capacity = [adjusted_valence(s, 0) for s in symbols]
    used = [0] * n_atoms
    bonds: list[Bond] = []
    adjacency: list[set[int]] = [set() for _ in range(n_atoms)]
    for i in range(1, n_atoms):
        hosts = [j for j in range(i) if used[j] < capacity[j]]
        if not hosts:
            # Every earlier atom is saturated; shrink the molecule here.
            symbols = symbols[:i]
            capacity = capacity[:i]
            used = used[:i]
            adjacency = adjacency[:i]
            n_atoms = i
            break
        j = int(hosts[rng.integers(len(hosts))])
        order = 1
        if capacity[i] > 1 and capacity[j] - used[j] > 1 and rng.random() < 0.15:
            order = 2
        bonds.append(Bond(i, j, order))
        used[i] += order
        used[j] += order
        adjacency[i].add(j)
        adjacency[j].add(i)

    def hop(a: int, b: int) -> int:
        seen = {a}
        frontier = [a]
        steps = 0
        while frontier:
            steps += 1
            nxt = []
            for x in frontier:
                for y in adjacency[x]:
                    if y == b:
                        return steps
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return -1

    for _ in range(n_ring_closures):
        candidates = [
            (a, b)
            for a in range(n_atoms)
            for b in range(a + 1, n_atoms)
            if used[a] < capacity[a]
            and used[b] < capacity[b]
            and b not in adjacency[a]
            and hop(a, b) + 1 >= min_ring_size
        ]
        if not candidates:
            break
        a, b = candidates[int(rng.integers(len(candidates)))]
        bonds.append(Bond(a, b, 1))
        used[a] += 1
        used[b] += 1
        adjacency[a].add(b)
        adjacency[b].add(a)

    atoms = [Atom(i, symbols[i]) for i in range(n_atoms)]
    return MolecularGraph(atoms, bonds)


def shuffle_atoms(g: MolecularGraph, rng: np.random.Generator) -> MolecularGraph:
    """Same molecule with atom indices permuted; labels and orders preserved."""
    perm = rng.permutation(g.n_atoms)
    inv = np.empty(g.n_atoms, dtype=int)
    inv[perm] = np.arange(g.n_atoms)
    atoms = [
        Atom(int(inv[a.index]), a.symbol, a.formal_charge, a.explicit_h)
        for a in g.atoms
    ]
    atoms.sort(key=lambda a: a.index)
    bonds = [Bond(int(inv[b.i]), int(inv[b.j]), b.order) for b in g.bonds]
    return MolecularGraph(atoms, bonds)


def to_networkx(g: MolecularGraph):
    import networkx as nx

    gx = nx.Graph()
    for a in g.atoms:
        gx.add_node(
            a.index,
            symbol=a.symbol,
            charge=a.formal_charge,
            total_h=g.total_h(a.index),
        )
    for b in g.bonds:
        gx.add_edge(b.i, b.j, order=b.order)
    return gx


def isomorphic(g1: MolecularGraph, g2: MolecularGraph) -> bool:
    """Attribute-preserving graph isomorphism via networkx VF2."""
    import networkx as nx

    def node_match(a, b):
        return (
            a["symbol"] == b["symbol"]
            and a["charge"] == b["charge"]
            and a["total_h"] == b["total_h"]
        )

    def edge_match(a, b):
        return a["order"] == b["order"]

    return nx.is_isomorphic(
        to_networkx(g1), to_networkx(g2), node_match=node_match, edge_match=edge_match
    )
