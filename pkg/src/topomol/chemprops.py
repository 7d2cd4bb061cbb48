"""Scalar molecular properties: logP estimate, synthetic-accessibility
proxy, penalized logP, molecular weight.

The logP model is atom-additive over a small bundled contribution table
keyed by (element, aromatic context, heteroatom-neighbor bucket) plus a
per-hydrogen term.  The SA proxy is a closed-form complexity count.  Both
are deliberately self-contained stand-ins for the external predictors the
literature uses, so only orderings and improvements are meaningful, never
absolute magnitudes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .elements import ELEMENTS, HYDROGEN_MASS
from .errors import UnclassifiedAtom
from .molgraph import MolecularGraph

__all__ = [
    "PropertyReport",
    "logp_estimate",
    "sa_proxy",
    "penalized_logp",
    "mol_weight",
    "property_report",
]


@dataclass(frozen=True)
class PropertyReport:
    logp: float
    sa: float
    penalized_logp: float
    mol_weight: float


@lru_cache(maxsize=1)
def _contribution_table() -> dict[str, float]:
    table: dict[str, float] = {}
    path = resources.files("topomol.data").joinpath("logp_contributions.csv")
    with path.open("r", encoding="utf-8") as fh:
        for row in csv.reader(line for line in fh if not line.startswith("#")):
            if not row or row[0] == "key":
                continue
            table[row[0]] = float(row[1])
    return table


def _atom_key(g: MolecularGraph, i: int) -> str:
    sym = g.atoms[i].symbol
    context = "arom" if g.is_aromatic(i) else "aliph"
    hetero = sum(1 for j in g.neighbors(i) if g.atoms[j].symbol != "C")
    bucket = "2+" if hetero >= 2 else str(hetero)
    return f"{sym}|{context}|{bucket}"


def logp_estimate(g: MolecularGraph) -> float:
    """Sum of per-atom table contributions plus one term per hydrogen."""
    table = _contribution_table()
    total = 0.0
    for i in range(g.n_atoms):
        key = _atom_key(g, i)
        if key not in table:
            raise UnclassifiedAtom(f"no logP contribution for atom class {key!r}")
        total += table[key]
        total += g.total_h(i) * table["H"]
    return total


def sa_proxy(g: MolecularGraph) -> float:
    """Synthetic-accessibility proxy: grows with size, cycles, crowded
    centers, and unusual ring sizes; always positive for real molecules."""
    crowded = sum(1 for i in range(g.n_atoms) if g.degree(i) >= 4)
    odd_rings = sum(1 for s in g.ring_sizes if s > 7 or s < 5)
    return (
        0.05 * g.n_atoms
        + 0.5 * g.circuit_rank
        + 0.25 * crowded
        + 1.0 * odd_rings
    )


def penalized_logp(g: MolecularGraph) -> float:
    return logp_estimate(g) - sa_proxy(g)


def mol_weight(g: MolecularGraph) -> float:
    """Molecular weight in amu including implicit and explicit hydrogens."""
    total = 0.0
    for i, a in enumerate(g.atoms):
        total += ELEMENTS[a.symbol].atomic_mass
        total += g.total_h(i) * HYDROGEN_MASS
    return total


def property_report(g: MolecularGraph) -> PropertyReport:
    lp = logp_estimate(g)
    sa = sa_proxy(g)
    return PropertyReport(lp, sa, lp - sa, mol_weight(g))
