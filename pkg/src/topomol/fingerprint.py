"""Circular hashed fingerprints and Tanimoto similarity.

Atom environments are hashed with 64-bit FNV-1a over deterministic strings,
iterated outward like a Morgan fingerprint: the radius-0 invariant encodes
(element, degree, charge, total H, ring membership), and each round mixes
an atom's invariant with its sorted (bond order, neighbor invariant) list.
Every invariant from every round sets one bit modulo the table size.  The
scheme is self-defined and frozen by golden-file tests rather than
compatible with any toolkit's ECFP bits.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LengthMismatch
from .molgraph import MolecularGraph

__all__ = ["Fingerprint", "morgan_fingerprint", "tanimoto"]

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x00000100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class Fingerprint:
    """Fixed-length binary fingerprint stored as an int bitmask."""

    nbits: int
    bits: int
    radius: int

    def __post_init__(self):
        if self.nbits < 1 or self.nbits & (self.nbits - 1):
            raise ValueError(f"nbits must be a power of two, got {self.nbits}")
        if self.bits < 0 or self.bits >> self.nbits:
            raise ValueError("bit mask outside fingerprint length")

    @property
    def popcount(self) -> int:
        return self.bits.bit_count()

    def on_bits(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.nbits) if (self.bits >> i) & 1)

    def to_hex(self) -> str:
        return f"{self.bits:0{self.nbits // 4}x}"

    @classmethod
    def from_hex(cls, text: str, radius: int = 0) -> "Fingerprint":
        return cls(len(text) * 4, int(text, 16), radius)


def atom_invariants(g: MolecularGraph, radius: int) -> list[list[int]]:
    """Per-round atom invariants; round r is entry r of the outer list."""
    n = g.n_atoms
    current = [
        _fnv1a(
            f"{g.atoms[i].symbol}|{g.degree(i)}|{g.atoms[i].formal_charge}"
            f"|{g.total_h(i)}|{int(g.in_ring(i))}".encode()
        )
        for i in range(n)
    ]
    rounds = [list(current)]
    for _ in range(radius):
        nxt = []
        for i in range(n):
            env = sorted((g.bond_order(i, j), current[j]) for j in g.neighbors(i))
            blob = f"{current[i]:016x}" + "".join(
                f"|{o}:{inv:016x}" for o, inv in env
            )
            nxt.append(_fnv1a(blob.encode()))
        current = nxt
        rounds.append(list(current))
    return rounds


def morgan_fingerprint(
    g: MolecularGraph, radius: int = 2, nbits: int = 1024
) -> Fingerprint:
    """Hash every atom invariant from every round into an nbits-wide mask."""
    bits = 0
    for round_invs in atom_invariants(g, radius):
        for inv in round_invs:
            bits |= 1 << (inv % nbits)
    return Fingerprint(nbits, bits, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|intersection| / |union| of on-bits; 1.0 when both are empty."""
    if a.nbits != b.nbits:
        raise LengthMismatch(f"fingerprint lengths differ: {a.nbits} vs {b.nbits}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union
