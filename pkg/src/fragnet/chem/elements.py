"""Element tables for the supported SMILES subset.

The parser accepts the common organic elements plus a handful of
monoatomic ions that show up in salt forms of drug-like molecules.
Anything else is rejected rather than guessed at.
"""

from __future__ import annotations

# symbol -> atomic number
SYMBOL_TO_NUM = {
    "H": 1, "Li": 3, "B": 5, "C": 6, "N": 7, "O": 8, "F": 9,
    "Na": 11, "P": 15, "S": 16, "Cl": 17, "K": 19, "Ca": 20,
    "Br": 35, "I": 53,
}
NUM_TO_SYMBOL = {v: k for k, v in SYMBOL_TO_NUM.items()}

# wildcard attachment point (written [*]); only valid inside fragment notation
WILDCARD = 0

# elements that may be written without brackets
ORGANIC_SUBSET = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}

# lowercase forms allowed in aromatic rings
AROMATIC_OK = {"B", "C", "N", "O", "P", "S"}

# metals accepted only as monoatomic bracket ions with their usual charge
METAL_CHARGES = {"Na": (1,), "K": (1,), "Li": (1,), "Ca": (1, 2)}

# allowed total valences for the neutral element
_NEUTRAL_VALENCES = {
    "H": (1,),
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}


def allowed_valences(element: int, charge: int) -> tuple[int, ...]:
    """Valence states an atom of `element` with `charge` may occupy.

    Returns an empty tuple when the element/charge combination is outside
    the supported subset.
    """
    sym = NUM_TO_SYMBOL.get(element)
    if sym is None:
        return ()
    if sym in METAL_CHARGES:
        return (0,) if charge in METAL_CHARGES[sym] else ()
    base = _NEUTRAL_VALENCES.get(sym)
    if base is None:
        return ()
    if charge == 0:
        return base
    if abs(charge) != 1:
        return ()
    if sym in ("F", "Cl", "Br", "I"):
        return (0,) if charge == -1 else ()
    if sym == "H":
        return (0,)
    if sym in ("N", "P"):
        return (4,) if charge == 1 else (2,)
    if sym in ("O", "S"):
        return (3,) if charge == 1 else (1,)
    if sym == "C":
        return (3,)
    if sym == "B":
        return (4,) if charge == -1 else ()
    return ()


def max_valence(element: int, charge: int) -> int:
    vals = allowed_valences(element, charge)
    return max(vals) if vals else 0
