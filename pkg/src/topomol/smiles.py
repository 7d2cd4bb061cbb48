"""SMILES reading and canonical writing.

The dialect covers the organic subset (B C N O P S F Cl Br I and their
aromatic lowercase forms), bracket atoms with hydrogen counts and formal
charges, bond symbols ``- = #``, branches, and ring closures including
``%nn``.  Stereochemistry, isotopes and wildcards are rejected outright;
dots are rejected because every graph must be a single connected molecule.

Aromatic input is kekulized at parse time by a perfect matching over the
atoms that still need one double bond; molecules whose aromatic system
admits no such matching raise ``KekulizationError``.  Output is always
kekulized, with canonical atom ordering from iterative neighborhood
refinement so that any atom-permuted copy of a graph writes the same
string.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .elements import AROMATIC_SYMBOLS, ORGANIC_SUBSET, adjusted_valence
from .errors import KekulizationError, SmilesSyntaxError, ValenceError
from .molgraph import Atom, Bond, MolecularGraph

__all__ = ["parse_smiles", "write_smiles", "canonical_ranks"]

_TWO_LETTER = ("Cl", "Br")
_BOND_ORDER = {"-": 1, "=": 2, "#": 3}

# Sentinel order for bonds whose order is decided by kekulization.
_AROMATIC = 0


@dataclass
class _RawAtom:
    symbol: str
    aromatic: bool
    charge: int = 0
    explicit_h: int = 0
    bracket: bool = False


@dataclass
class _RawBond:
    i: int
    j: int
    order: int  # 1..3 or _AROMATIC


@dataclass
class _RingSlot:
    atom: int
    order: int | None
    pos: int


def _syntax(msg: str, text: str, pos: int) -> SmilesSyntaxError:
    return SmilesSyntaxError(f"{msg} at position {pos}: {text!r}")


def _parse_bracket(text: str, start: int) -> tuple[_RawAtom, int]:
    """Parse a bracket atom starting at the '['; returns (atom, end index)."""
    end = text.find("]", start)
    if end == -1:
        raise _syntax("unterminated bracket atom", text, start)
    body = text[start + 1:end]
    pos = 0
    if pos < len(body) and body[pos].isdigit():
        raise _syntax("isotope labels are not supported", text, start)
    symbol = None
    for cand in _TWO_LETTER:
        if body[pos:pos + 2] == cand:
            symbol = cand
            pos += 2
            break
    if symbol is None and pos < len(body) and body[pos].isalpha():
        symbol = body[pos]
        pos += 1
    if symbol is None:
        raise _syntax("missing element in bracket atom", text, start)
    aromatic = symbol[0].islower()
    symbol_uc = symbol[0].upper() + symbol[1:]
    if symbol_uc not in ORGANIC_SUBSET:
        raise _syntax(f"unsupported element {symbol!r}", text, start)
    if aromatic and symbol not in AROMATIC_SYMBOLS:
        raise _syntax(f"element {symbol_uc} cannot be aromatic", text, start)
    if pos < len(body) and body[pos] == "@":
        raise _syntax("stereochemistry is not supported", text, start)
    h_count = 0
    if pos < len(body) and body[pos] == "H":
        pos += 1
        digits = ""
        while pos < len(body) and body[pos].isdigit():
            digits += body[pos]
            pos += 1
        h_count = int(digits) if digits else 1
    charge = 0
    if pos < len(body) and body[pos] in "+-":
        sign = 1 if body[pos] == "+" else -1
        pos += 1
        if pos < len(body) and body[pos].isdigit():
            digits = ""
            while pos < len(body) and body[pos].isdigit():
                digits += body[pos]
                pos += 1
            charge = sign * int(digits)
        else:
            charge = sign
            while pos < len(body) and body[pos] == body[pos - 1]:
                charge += sign
                pos += 1
    if pos != len(body):
        raise _syntax(f"unparsed bracket content {body[pos:]!r}", text, start)
    if not -1 <= charge <= 1:
        raise ValenceError(f"charge {charge:+d} outside supported range in {text!r}")
    return _RawAtom(symbol_uc, aromatic, charge, h_count, bracket=True), end + 1


def parse_smiles(text: str) -> MolecularGraph:
    """Parse a SMILES string into a kekulized, validated molecular graph."""
    if not text or text.strip() != text or not text.strip():
        raise SmilesSyntaxError(f"empty or whitespace-padded SMILES {text!r}")
    atoms: list[_RawAtom] = []
    bonds: list[_RawBond] = []
    prev: int | None = None
    pending_order: int | None = None
    pending_pos = 0
    branch_stack: list[int] = []
    rings: dict[int, _RingSlot] = {}

    def add_bond(i: int, j: int, order: int | None, pos: int):
        if i == j:
            raise _syntax("self bond", text, pos)
        if order is None:
            order = _AROMATIC if atoms[i].aromatic and atoms[j].aromatic else 1
        if any((b.i, b.j) in ((i, j), (j, i)) for b in bonds):
            raise _syntax(f"duplicate bond between atoms {i} and {j}", text, pos)
        bonds.append(_RawBond(i, j, order))

    def close_ring(num: int, pos: int):
        nonlocal pending_order
        if prev is None:
            raise _syntax("ring closure before any atom", text, pos)
        if num in rings:
            slot = rings.pop(num)
            order = slot.order
            if pending_order is not None:
                if order is not None and order != pending_order:
                    raise _syntax(
                        f"conflicting orders for ring closure {num}", text, pos
                    )
                order = pending_order
            add_bond(slot.atom, prev, order, pos)
        else:
            rings[num] = _RingSlot(prev, pending_order, pos)
        pending_order = None

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            atom, i = _parse_bracket(text, i)
        elif text[i:i + 2] in _TWO_LETTER:
            atom, i = _RawAtom(text[i:i + 2], False), i + 2
        elif ch.upper() in ORGANIC_SUBSET and (ch.isupper() or ch in AROMATIC_SYMBOLS):
            atom, i = _RawAtom(ch.upper(), ch.islower()), i + 1
        elif ch in _BOND_ORDER:
            if pending_order is not None:
                raise _syntax("consecutive bond symbols", text, i)
            pending_order = _BOND_ORDER[ch]
            pending_pos = i
            i += 1
            continue
        elif ch == "(":
            if prev is None:
                raise _syntax("branch before any atom", text, i)
            branch_stack.append(prev)
            i += 1
            continue
        elif ch == ")":
            if not branch_stack:
                raise _syntax("unmatched closing parenthesis", text, i)
            if pending_order is not None:
                raise _syntax("dangling bond symbol", text, pending_pos)
            prev = branch_stack.pop()
            i += 1
            continue
        elif ch.isdigit():
            close_ring(int(ch), i)
            i += 1
            continue
        elif ch == "%":
            if i + 2 >= n or not text[i + 1:i + 3].isdigit():
                raise _syntax("malformed %nn ring closure", text, i)
            close_ring(int(text[i + 1:i + 3]), i)
            i += 3
            continue
        elif ch == ".":
            raise _syntax("dot-separated fragments are not supported", text, i)
        elif ch in "/\\":
            raise _syntax("stereochemistry is not supported", text, i)
        elif ch == ":":
            raise _syntax(
                "explicit aromatic bonds are not supported; use lowercase atoms",
                text, i,
            )
        elif ch == "*":
            raise _syntax("wildcard atoms are not supported", text, i)
        else:
            raise _syntax(f"unexpected character {ch!r}", text, i)
        # An atom token was consumed; bond it to the previous atom.
        atoms.append(atom)
        idx = len(atoms) - 1
        if prev is not None:
            add_bond(prev, idx, pending_order, i - 1)
        elif pending_order is not None:
            raise _syntax("bond symbol before first atom", text, pending_pos)
        pending_order = None
        prev = idx

    if not atoms:
        raise SmilesSyntaxError(f"no atoms in SMILES {text!r}")
    if branch_stack:
        raise SmilesSyntaxError(f"unclosed branch in {text!r}")
    if pending_order is not None:
        raise SmilesSyntaxError(f"dangling bond symbol in {text!r}")
    if rings:
        nums = sorted(rings)
        raise SmilesSyntaxError(f"unclosed ring closure(s) {nums} in {text!r}")

    _kekulize(atoms, bonds, text)
    return MolecularGraph(
        [Atom(k, a.symbol, a.charge, a.explicit_h) for k, a in enumerate(atoms)],
        [Bond(b.i, b.j, b.order) for b in bonds],
    )


# ----------------------------------------------------------------------
# kekulization

def _kekulize(atoms: list[_RawAtom], bonds: list[_RawBond], text: str):
    """Resolve aromatic bonds to alternating single/double orders in place.

    Each aromatic atom with free valence after counting its sigma bonds and
    written hydrogens must receive exactly one double bond; atoms already at
    capacity (pyrrole [nH], furan o) contribute a lone pair instead.  A
    perfect matching over the needy atoms within the aromatic bond subgraph
    fixes the double bonds; no matching means the input is not a valid
    aromatic system.
    """
    aromatic_ids = [k for k, a in enumerate(atoms) if a.aromatic]
    if not aromatic_ids:
        if any(b.order == _AROMATIC for b in bonds):
            raise KekulizationError(f"internal aromatic bond state for {text!r}")
        return
    sigma = [0] * len(atoms)
    for b in bonds:
        o = 1 if b.order == _AROMATIC else b.order
        sigma[b.i] += o
        sigma[b.j] += o
    needers: set[int] = set()
    for k in aromatic_ids:
        a = atoms[k]
        cap = adjusted_valence(a.symbol, a.charge)
        free = cap - sigma[k] - a.explicit_h
        if free < 0:
            raise ValenceError(
                f"aromatic atom {k} ({a.symbol}) exceeds valence in {text!r}"
            )
        if free >= 1:
            needers.add(k)
    adj: dict[int, list[int]] = {k: [] for k in needers}
    aromatic_bonds: dict[tuple[int, int], _RawBond] = {}
    for b in bonds:
        if b.order == _AROMATIC:
            aromatic_bonds[(b.i, b.j)] = b
            if b.i in needers and b.j in needers:
                adj[b.i].append(b.j)
                adj[b.j].append(b.i)
    matching = _perfect_matching(needers, adj)
    if matching is None:
        raise KekulizationError(
            f"no alternating single/double assignment for aromatic system in {text!r}"
        )
    for b in aromatic_bonds.values():
        if matching.get(b.i) == b.j:
            b.order = 2
        else:
            b.order = 1


def _perfect_matching(
    nodes: set[int], adj: dict[int, list[int]]
) -> dict[int, int] | None:
    """Perfect matching on a small general graph by fail-first backtracking.

    Chemical aromatic systems are sparse (degree <= 3), so picking the most
    constrained atom first keeps the search effectively linear.
    """
    if len(nodes) % 2:
        return None

    def solve(unmatched: frozenset[int]) -> dict[int, int] | None:
        if not unmatched:
            return {}
        u = min(
            unmatched,
            key=lambda x: (sum(1 for v in adj[x] if v in unmatched), x),
        )
        candidates = [v for v in adj[u] if v in unmatched]
        if not candidates:
            return None
        for v in candidates:
            rest = solve(unmatched - {u, v})
            if rest is not None:
                rest[u] = v
                rest[v] = u
                return rest
        return None

    return solve(frozenset(nodes))


# ----------------------------------------------------------------------
# canonical writing

def canonical_ranks(g: MolecularGraph) -> tuple[int, ...]:
    """Atom ranks from iterative neighborhood refinement.

    Starts from (element, degree, charge, total H) and repeatedly
    re-partitions by sorted neighbor ranks until the partition stops
    splitting.  Atoms left tied are structurally interchangeable for any
    molecule this package handles, so downstream index tie-breaks do not
    change the emitted string.
    """
    n = g.n_atoms
    invariants: list = [
        (g.atoms[i].symbol, g.degree(i), g.atoms[i].formal_charge, g.total_h(i))
        for i in range(n)
    ]
    ranks = _dense_ranks(invariants)
    n_classes = len(set(ranks))
    while True:
        refined = [
            (ranks[i], tuple(sorted((ranks[j], g.bond_order(i, j)) for j in g.neighbors(i))))
            for i in range(n)
        ]
        new_ranks = _dense_ranks(refined)
        new_classes = len(set(new_ranks))
        if new_classes == n_classes:
            return tuple(new_ranks)
        ranks, n_classes = new_ranks, new_classes


def _dense_ranks(keys: list) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


@dataclass
class _Writer:
    g: MolecularGraph
    ranks: tuple[int, ...]
    children: dict[int, list[int]] = field(default_factory=dict)
    back_edges: dict[int, list[int]] = field(default_factory=dict)
    digits: dict[tuple[int, int], int] = field(default_factory=dict)
    free_digits: list[int] = field(default_factory=list)
    next_digit: int = 1

    def build_tree(self, start: int):
        g, ranks = self.g, self.ranks
        visited = {start}
        visit_order = {start: 0}
        self.children = {start: []}
        self.back_edges = {start: []}
        stack = [(start, iter(sorted(g.neighbors(start), key=lambda v: (ranks[v], v))))]
        used_edges: set[tuple[int, int]] = set()
        while stack:
            u, it = stack[-1]
            advanced = False
            for v in it:
                key = (min(u, v), max(u, v))
                if key in used_edges:
                    continue
                used_edges.add(key)
                if v in visited:
                    # Ring bond; both endpoints will print the same digit.
                    self.back_edges[v].append(u)
                    self.back_edges[u].append(v)
                else:
                    visited.add(v)
                    visit_order[v] = len(visit_order)
                    self.children[u].append(v)
                    self.children[v] = []
                    self.back_edges[v] = []
                    stack.append(
                        (v, iter(sorted(g.neighbors(v), key=lambda w: (ranks[w], w))))
                    )
                    advanced = True
                    break
            if not advanced:
                stack.pop()
        self._visit_order = visit_order

    def _digit_token(self, u: int, v: int) -> str:
        key = (min(u, v), max(u, v))
        if key in self.digits:
            d = self.digits.pop(key)
            self.free_digits.append(d)
            token = ""
        else:
            if self.free_digits:
                d = min(self.free_digits)
                self.free_digits.remove(d)
            else:
                d = self.next_digit
                self.next_digit += 1
            self.digits[key] = d
            order = self.g.bond_order(u, v)
            token = {2: "=", 3: "#"}.get(order, "")
        return token + (str(d) if d < 10 else f"%{d:02d}")

    def _atom_token(self, u: int) -> str:
        a = self.g.atoms[u]
        if a.formal_charge == 0:
            return a.symbol
        h = self.g.total_h(u)
        h_part = "" if h == 0 else ("H" if h == 1 else f"H{h}")
        sign = "+" if a.formal_charge > 0 else "-"
        return f"[{a.symbol}{h_part}{sign}]"

    def emit(self, root: int) -> str:
        out: list[str] = []
        stack: list[tuple[str, int | None]] = [("atom", root)]
        while stack:
            kind, u = stack.pop()
            if kind == "text":
                out.append(u)  # type: ignore[arg-type]
                continue
            out.append(self._atom_token(u))
            for v in sorted(self.back_edges[u], key=lambda w: self._visit_order[w]):
                out.append(self._digit_token(u, v))
            kids = self.children[u]
            follow: list[tuple[str, int | None]] = []
            for k, v in enumerate(kids):
                bond = {2: "=", 3: "#"}.get(self.g.bond_order(u, v), "")
                if k < len(kids) - 1:
                    follow.append(("text", "("))
                    follow.append(("text", bond))
                    follow.append(("atom", v))
                    follow.append(("text", ")"))
                else:
                    follow.append(("text", bond))
                    follow.append(("atom", v))
            stack.extend(reversed(follow))
        return "".join(out)


def write_smiles(g: MolecularGraph) -> str:
    """Canonical kekulized SMILES for a graph.

    The start atom and traversal order are fixed by refinement ranks, so any
    permutation of the same molecule produces the identical string, and
    parsing it back yields an isomorphic graph.  Graphs are immutable, so
    the string is memoized on the instance; episode code uses it as a cache
    key on every step.
    """
    memo = getattr(g, "_canonical_smiles", None)
    if memo is not None:
        return memo
    ranks = canonical_ranks(g)
    start = min(range(g.n_atoms), key=lambda i: (ranks[i], i))
    w = _Writer(g, ranks)
    w.build_tree(start)
    out = w.emit(start)
    g._canonical_smiles = out
    return out
