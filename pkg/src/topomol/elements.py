"""Element data for the closed organic subset handled by the package.

Only B, C, N, O, P, S and the halogens are supported; anything else is a
parse error upstream.  Valences are the single default values used for
implicit-hydrogen assignment (no hypervalent states), adjusted for formal
charge by :func:`adjusted_valence`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValenceError

__all__ = ["Element", "ELEMENTS", "ORGANIC_SUBSET", "adjusted_valence"]


@dataclass(frozen=True)
class Element:
    symbol: str
    default_valence: int
    atomic_mass: float


ELEMENTS: dict[str, Element] = {
    e.symbol: e
    for e in [
        Element("B", 3, 10.81),
        Element("C", 4, 12.011),
        Element("N", 3, 14.007),
        Element("O", 2, 15.999),
        Element("F", 1, 18.998),
        Element("P", 3, 30.974),
        Element("S", 2, 32.06),
        Element("Cl", 1, 35.45),
        Element("Br", 1, 79.904),
        Element("I", 1, 126.904),
    ]
}

# Symbols writable without brackets; identical to the supported set here.
ORGANIC_SUBSET = frozenset(ELEMENTS)

# Elements that may carry lowercase aromatic symbols in input.
AROMATIC_SYMBOLS = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}

HYDROGEN_MASS = 1.008


def adjusted_valence(symbol: str, charge: int) -> int:
    """Permitted valence of an element at a given formal charge.

    A protonated nitrogen gains a bond, an alkoxide oxygen loses one;
    carbon loses a bond for either charge sign, boron gains one when
    negative.  Charges outside {-1, 0, +1} are rejected upstream.
    """
    base = ELEMENTS[symbol].default_valence
    if charge == 0:
        return base
    if symbol == "C":
        v = base - abs(charge)
    elif symbol == "B":
        v = base - charge
    else:
        # N, P, O, S and halogens: cations gain a bond, anions lose one.
        v = base + charge
    if v < 0:
        raise ValenceError(f"{symbol} with charge {charge:+d} has no valid valence")
    return v
