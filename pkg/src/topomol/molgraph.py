"""Molecular graph: atoms, bonds, valence checking, rings, atom typing.

A :class:`MolecularGraph` is the single source of chemical truth for the
package.  It is immutable after construction and always kekulized,
valence-valid and connected; every other module consumes it read-only.
Editing (the MDP) happens by building a new graph from modified atom and
bond lists.

Aromaticity is perceived from the kekulized structure (alternating bond
pattern plus a 4n+2 electron count over small rings) rather than carried
over from input text, so that every derived feature is a pure function of
the graph and survives write/parse round trips.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .elements import ELEMENTS, adjusted_valence
from .errors import DisconnectedError, ValenceError

__all__ = [
    "Atom",
    "Bond",
    "MolecularGraph",
    "SybylType",
    "implicit_hydrogens",
    "sybyl_type",
    "SYBYL_VOCABULARY",
]

# Longest simple ring tracked for ring-size statistics; basis cycles that
# would exceed this are counted as oversized rings.
CYCLE_LEN_CAP = 12
# Longest ring considered for aromaticity perception.
AROMATIC_RING_CAP = 8

# Valence electrons per neutral atom, for lone-pair counting in perception.
_VALENCE_ELECTRONS = {
    "B": 3, "C": 4, "N": 5, "O": 6, "F": 7,
    "P": 5, "S": 6, "Cl": 7, "Br": 7, "I": 7,
}


@dataclass(frozen=True)
class Atom:
    """One heavy atom: element symbol, formal charge, explicit H count."""

    index: int
    symbol: str
    formal_charge: int = 0
    explicit_h: int = 0

    def __post_init__(self):
        if self.symbol not in ELEMENTS:
            raise ValueError(f"unsupported element {self.symbol!r}")
        if self.formal_charge not in (-1, 0, 1):
            raise ValenceError(f"charge {self.formal_charge:+d} outside supported range")
        if self.explicit_h < 0:
            raise ValueError("negative explicit hydrogen count")


@dataclass(frozen=True)
class Bond:
    """Undirected bond between two atom indices with integer order 1..3."""

    i: int
    j: int
    order: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("bond endpoints must be distinct")
        if self.order not in (1, 2, 3):
            raise ValueError(f"bond order {self.order} outside 1..3")
        if self.i > self.j:
            lo, hi = self.j, self.i
            object.__setattr__(self, "i", lo)
            object.__setattr__(self, "j", hi)

    @property
    def key(self) -> tuple[int, int]:
        return (self.i, self.j) if self.i < self.j else (self.j, self.i)


class MolecularGraph:
    """Immutable, kekulized, valence-valid, connected molecular graph.

    Construction validates every invariant and raises ``ValenceError`` or
    ``DisconnectedError`` on violation.  Derived structure (rings,
    aromaticity, SYBYL types) is computed lazily and cached.
    """

    def __init__(self, atoms: list[Atom], bonds: list[Bond]):
        n = len(atoms)
        if n == 0:
            raise ValueError("empty molecule")
        atoms = [
            a if a.index == k else Atom(k, a.symbol, a.formal_charge, a.explicit_h)
            for k, a in enumerate(atoms)
        ]
        order_map: dict[tuple[int, int], int] = {}
        for b in bonds:
            lo, hi = (b.i, b.j) if b.i < b.j else (b.j, b.i)
            if hi >= n or lo < 0:
                raise ValueError(f"bond ({b.i},{b.j}) out of range")
            if (lo, hi) in order_map:
                raise ValueError(f"duplicate bond ({lo},{hi})")
            order_map[(lo, hi)] = b.order
        self.atoms: tuple[Atom, ...] = tuple(atoms)
        self.bonds: tuple[Bond, ...] = tuple(
            Bond(i, j, o) for (i, j), o in sorted(order_map.items())
        )
        self._order_map = order_map

        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for (i, j), o in order_map.items():
            adj[i].append((j, o))
            adj[j].append((i, o))
        self.adjacency: tuple[tuple[tuple[int, int], ...], ...] = tuple(
            tuple(sorted(nbrs)) for nbrs in adj
        )

        self.implicit_h: tuple[int, ...] = tuple(
            self._implicit_h_for(a) for a in self.atoms
        )
        self._check_connected()

    # ------------------------------------------------------------------
    # basic accessors

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    def bond_order(self, i: int, j: int) -> int:
        """Order of the bond between i and j, or 0 if not bonded."""
        key = (i, j) if i < j else (j, i)
        return self._order_map.get(key, 0)

    def has_bond(self, i: int, j: int) -> bool:
        return self.bond_order(i, j) > 0

    def neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, _ in self.adjacency[i])

    def degree(self, i: int) -> int:
        """Heavy-atom degree (bond count, not valence)."""
        return len(self.adjacency[i])

    def bond_order_sum(self, i: int) -> int:
        return sum(o for _, o in self.adjacency[i])

    def total_h(self, i: int) -> int:
        return self.atoms[i].explicit_h + self.implicit_h[i]

    def free_valence(self, i: int) -> int:
        """Hydrogen slots replaceable by new bonds (= implicit H count)."""
        return self.implicit_h[i]

    @property
    def circuit_rank(self) -> int:
        """Number of independent cycles, |E| - |V| + 1 for a connected graph."""
        return self.n_bonds - self.n_atoms + 1

    # ------------------------------------------------------------------
    # validation

    def _implicit_h_for(self, a: Atom) -> int:
        cap = adjusted_valence(a.symbol, a.formal_charge)
        used = sum(o for (i, j), o in self._order_map.items() if a.index in (i, j))
        h = cap - used - a.explicit_h
        if h < 0:
            raise ValenceError(
                f"atom {a.index} ({a.symbol}{a.formal_charge:+d}) exceeds valence "
                f"{cap} (bonds {used}, explicit H {a.explicit_h})"
            )
        return h

    def _check_connected(self):
        n = self.n_atoms
        seen = [False] * n
        queue = deque([0])
        seen[0] = True
        count = 1
        while queue:
            u = queue.popleft()
            for v, _ in self.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    queue.append(v)
        if count != n:
            raise DisconnectedError(f"graph has {n - count} unreachable atom(s)")

    # ------------------------------------------------------------------
    # ring structure

    @cached_property
    def bridge_bonds(self) -> frozenset[tuple[int, int]]:
        """Bonds whose removal disconnects the graph (Tarjan low-links)."""
        n = self.n_atoms
        disc = [-1] * n
        low = [0] * n
        bridges: set[tuple[int, int]] = set()
        timer = 0
        # Iterative DFS; parent edge tracked to skip the immediate back edge.
        stack: list[tuple[int, int, int]] = [(0, -1, 0)]
        while stack:
            u, parent, ni = stack.pop()
            if ni == 0:
                disc[u] = low[u] = timer
                timer += 1
            nbrs = self.adjacency[u]
            if ni < len(nbrs):
                stack.append((u, parent, ni + 1))
                v = nbrs[ni][0]
                if v == parent:
                    continue
                if disc[v] == -1:
                    stack.append((v, u, 0))
                else:
                    low[u] = min(low[u], disc[v])
            elif parent != -1:
                low[parent] = min(low[parent], low[u])
                if low[u] > disc[parent]:
                    bridges.add((min(u, parent), max(u, parent)))
        return frozenset(bridges)

    @cached_property
    def ring_atoms(self) -> frozenset[int]:
        """Atoms incident to at least one non-bridge bond (i.e. on a cycle)."""
        out: set[int] = set()
        for (i, j) in self._order_map:
            if (i, j) not in self.bridge_bonds:
                out.add(i)
                out.add(j)
        return frozenset(out)

    def in_ring(self, i: int) -> bool:
        return i in self.ring_atoms

    @cached_property
    def simple_cycles(self) -> tuple[tuple[int, ...], ...]:
        """All simple cycles up to CYCLE_LEN_CAP atoms, found by bounded DFS.

        Each cycle starts at its minimum atom index; duplicates are removed
        by edge set.  Molecules are sparse so this stays small.
        """
        cycles: list[tuple[int, ...]] = []
        seen_edges: set[frozenset[tuple[int, int]]] = set()
        plain_adj = [self.neighbors(i) for i in range(self.n_atoms)]
        for start in range(self.n_atoms):
            if start not in self.ring_atoms:
                continue
            stack: list[tuple[int, tuple[int, ...]]] = [(start, (start,))]
            while stack:
                node, path = stack.pop()
                for nbr in plain_adj[node]:
                    if nbr == start and len(path) >= 3:
                        edges = frozenset(
                            (min(a, b), max(a, b))
                            for a, b in zip(path, path[1:] + (start,))
                        )
                        if edges not in seen_edges:
                            seen_edges.add(edges)
                            cycles.append(path)
                    elif nbr > start and nbr not in path and len(path) < CYCLE_LEN_CAP:
                        stack.append((nbr, path + (nbr,)))
        return tuple(cycles)

    @cached_property
    def ring_sizes(self) -> tuple[int, ...]:
        """Sizes of a minimum cycle basis, one entry per independent cycle.

        Candidates are the bounded simple cycles sorted by size; a greedy
        GF(2) independence pass over edge-space picks the basis.  Any basis
        slot not fillable within CYCLE_LEN_CAP is reported as an oversized
        ring of CYCLE_LEN_CAP + 1.  The size multiset is a graph invariant
        (minimum-weight matroid bases share their weight sequence).
        """
        rank_needed = self.circuit_rank
        if rank_needed == 0:
            return ()
        edge_index = {e: k for k, e in enumerate(sorted(self._order_map))}
        # XOR basis over edge-space bitmasks, keyed by highest set bit.
        basis: dict[int, int] = {}
        sizes: list[int] = []
        candidates = sorted(self.simple_cycles, key=lambda c: (len(c), c))
        for cyc in candidates:
            mask = 0
            for a, b in zip(cyc, cyc[1:] + (cyc[0],)):
                mask |= 1 << edge_index[(min(a, b), max(a, b))]
            while mask:
                high = mask.bit_length() - 1
                if high not in basis:
                    basis[high] = mask
                    sizes.append(len(cyc))
                    break
                mask ^= basis[high]
            if len(sizes) == rank_needed:
                break
        while len(sizes) < rank_needed:
            sizes.append(CYCLE_LEN_CAP + 1)
        return tuple(sorted(sizes))

    # ------------------------------------------------------------------
    # aromaticity perception

    def _pi_electrons(self, i: int) -> int | None:
        """Electrons atom i donates to a ring pi system, or None if it
        cannot sit in an aromatic ring.

        An atom with (exactly one) double bond to another ring atom gives 1;
        a saturated atom with a lone pair gives 2; boron's empty orbital
        gives 0; anything else (triple bonds, exocyclic doubles to chain
        atoms, saturated carbon) blocks aromaticity.
        """
        a = self.atoms[i]
        doubles = [j for j, o in self.adjacency[i] if o == 2]
        if any(o == 3 for _, o in self.adjacency[i]) or len(doubles) > 1:
            return None
        if doubles:
            return 1 if doubles[0] in self.ring_atoms else None
        lone_pairs = (
            _VALENCE_ELECTRONS[a.symbol]
            - a.formal_charge
            - self.bond_order_sum(i)
            - self.total_h(i)
        ) // 2
        if lone_pairs >= 1:
            return 2
        if a.symbol == "B":
            return 0
        return None

    @cached_property
    def aromatic_atoms(self) -> frozenset[int]:
        """Atoms in at least one ring satisfying the 4n+2 electron rule."""
        out: set[int] = set()
        pi: dict[int, int | None] = {}
        for cyc in self.simple_cycles:
            if len(cyc) > AROMATIC_RING_CAP:
                continue
            total = 0
            ok = True
            for i in cyc:
                if i not in pi:
                    pi[i] = self._pi_electrons(i)
                if pi[i] is None:
                    ok = False
                    break
                total += pi[i]
            if ok and total % 4 == 2:
                out.update(cyc)
        return frozenset(out)

    def is_aromatic(self, i: int) -> bool:
        return i in self.aromatic_atoms

    # ------------------------------------------------------------------
    # convenience

    def hop_distance(self, i: int, j: int) -> int:
        """Unweighted shortest-path length in bonds between two atoms."""
        if i == j:
            return 0
        dist = {i: 0}
        queue = deque([i])
        while queue:
            u = queue.popleft()
            for v, _ in self.adjacency[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    if v == j:
                        return dist[v]
                    queue.append(v)
        raise DisconnectedError(f"no path between atoms {i} and {j}")

    def __repr__(self):
        return f"MolecularGraph(n_atoms={self.n_atoms}, n_bonds={self.n_bonds})"


def implicit_hydrogens(g: MolecularGraph, atom_index: int) -> int:
    """Implicit hydrogen count of one atom (valence cap minus bonds and
    explicit H); construction has already rejected negative values."""
    return g.implicit_h[atom_index]


# ----------------------------------------------------------------------
# SYBYL atom typing

@dataclass(frozen=True)
class SybylType:
    code: str


# Fixed vocabulary defining the sybyl-mode feature layout; mirrored in
# data/sybyl_types.csv.
SYBYL_VOCABULARY: tuple[str, ...] = (
    "C.1", "C.2", "C.3", "C.ar",
    "N.1", "N.2", "N.3", "N.4", "N.am", "N.ar",
    "O.2", "O.3", "O.co2",
    "P.3",
    "S.2", "S.3",
    "B", "F", "Cl", "Br", "I",
)


def _is_amide_nitrogen(g: MolecularGraph, i: int) -> bool:
    for j, o in g.adjacency[i]:
        if o == 1 and g.atoms[j].symbol == "C":
            if any(g.atoms[k].symbol == "O" and ok == 2 for k, ok in g.adjacency[j]):
                return True
    return False


def _is_carboxylate_oxygen(g: MolecularGraph, i: int) -> bool:
    """O in a -C(=O)O(-) or phosphate-like group (either oxygen)."""
    for j, _ in g.adjacency[i]:
        if g.atoms[j].symbol not in ("C", "P"):
            continue
        o_nbrs = [(k, ok) for k, ok in g.adjacency[j] if g.atoms[k].symbol == "O"]
        if len(o_nbrs) < 2:
            continue
        has_double = any(ok == 2 for _, ok in o_nbrs)
        has_anion = any(g.atoms[k].formal_charge == -1 for k, _ in o_nbrs)
        if has_double and has_anion:
            return True
    return False


def sybyl_type(g: MolecularGraph, atom_index: int) -> SybylType:
    """Deterministic SYBYL code from element, bonding pattern and
    aromaticity of the kekulized graph."""
    a = g.atoms[atom_index]
    sym = a.symbol
    orders = [o for _, o in g.adjacency[atom_index]]
    has_triple = 3 in orders
    n_double = orders.count(2)

    if sym == "C":
        if g.is_aromatic(atom_index):
            return SybylType("C.ar")
        if has_triple or n_double >= 2:
            return SybylType("C.1")
        if n_double == 1:
            return SybylType("C.2")
        return SybylType("C.3")
    if sym == "N":
        if g.is_aromatic(atom_index):
            return SybylType("N.ar")
        if has_triple or n_double >= 2:
            return SybylType("N.1")
        if n_double == 1:
            return SybylType("N.2")
        if _is_amide_nitrogen(g, atom_index):
            return SybylType("N.am")
        if a.formal_charge > 0:
            return SybylType("N.4")
        return SybylType("N.3")
    if sym == "O":
        if _is_carboxylate_oxygen(g, atom_index):
            return SybylType("O.co2")
        if n_double >= 1:
            return SybylType("O.2")
        return SybylType("O.3")
    if sym == "S":
        return SybylType("S.2" if n_double >= 1 else "S.3")
    if sym == "P":
        return SybylType("P.3")
    # Halogens and boron map to bare element codes.
    return SybylType(sym)
