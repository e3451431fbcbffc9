"""SMILES reader for the supported organic subset.

Accepts the common organic elements (written bare or bracketed), the salt
ions Na+/K+/Li+/Ca2+/halide anions, ring closures incl. %nn, branches,
dot-separated components, directional bonds and tetrahedral markers.
Isotopes, wildcards outside fragment notation and anything beyond the
element subset are rejected with :class:`UnsupportedFeatureError`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .elements import (
    AROMATIC_OK,
    METAL_CHARGES,
    ORGANIC_SUBSET,
    SYMBOL_TO_NUM,
    WILDCARD,
    allowed_valences,
)
from .errors import SmilesSyntaxError, UnsupportedFeatureError
from .molecule import (
    Atom,
    Bond,
    BondDirection,
    BondOrder,
    Chirality,
    Molecule,
)
from . import perception

_BRACKET_RE = re.compile(
    r"^(?P<isotope>\d+)?"
    r"(?P<symbol>\*|[A-Z][a-z]?|[bcnops])"
    r"(?P<chiral>@@?)?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>[+-]\d+|\++|-+)?"
    r"(?::(?P<map>\d+))?$"
)

# two-letter element symbols we recognise but do not support outside brackets
_KNOWN_TWO_LETTER = {
    "Cl", "Br", "Si", "Se", "Sn", "Sb", "Te", "As", "Al", "Zn", "Mg", "Fe",
    "Cu", "Mn", "Ni", "Co", "Pb", "Ag", "Au", "Cd", "Cr", "Hg", "Pt", "Li",
    "Na", "Ca",
}

_BOND_TOKENS = {
    "-": (BondOrder.SINGLE, BondDirection.NONE),
    "=": (BondOrder.DOUBLE, BondDirection.NONE),
    "#": (BondOrder.TRIPLE, BondDirection.NONE),
    "/": (BondOrder.SINGLE, BondDirection.UP),
    "\\": (BondOrder.SINGLE, BondDirection.DOWN),
}

_RING_PLACEHOLDER_BASE = -1000


@dataclass
class _Pending:
    order: BondOrder | None = None
    direction: BondDirection = BondDirection.NONE
    colon: bool = False


@dataclass
class ParseInfo:
    """Parse-time facts consumed by perception."""

    aromatic_input: list[bool] = field(default_factory=list)
    default_bonds: set[int] = field(default_factory=set)
    colon_bonds: set[int] = field(default_factory=set)


def parse_smiles(text: str, allow_wildcard: bool = False) -> Molecule:
    """Parse SMILES text into a fully perceived :class:`Molecule`."""
    mol, info = _parse_structure(text, allow_wildcard)
    perception.perceive(mol, info)
    return mol


def _parse_structure(text: str, allow_wildcard: bool) -> tuple[Molecule, ParseInfo]:
    if not isinstance(text, str) or not text.strip():
        raise SmilesSyntaxError("empty SMILES string")
    text = text.strip()
    mol = Molecule(source_smiles=text)
    info = ParseInfo()

    prev: int | None = None
    branch_stack: list[int] = []
    pending: _Pending | None = None
    dangling_dot = False
    # ring number -> (atom index, pending bond at open time)
    ring_open: dict[int, tuple[int, _Pending | None]] = {}

    def add_atom(atom: Atom, aromatic: bool, chiral_order: list[int] | None) -> int:
        nonlocal prev, pending, dangling_dot
        dangling_dot = False
        idx = len(mol.atoms)
        mol.atoms.append(atom)
        info.aromatic_input.append(aromatic)
        if chiral_order is not None:
            order = [] if prev is None else [prev]
            order.extend(chiral_order)
            mol.chiral_order[idx] = order
        if prev is not None:
            _add_bond(prev, idx, pending)
        prev = idx
        pending = None
        return idx

    def _add_bond(a: int, b: int, pend: _Pending | None,
                  record_chiral: bool = True) -> int:
        if a == b:
            raise SmilesSyntaxError("bond from an atom to itself")
        if mol.bond_between(a, b) is not None:
            raise SmilesSyntaxError(f"duplicate bond between atoms {a} and {b}")
        order = pend.order if pend and pend.order else BondOrder.SINGLE
        direction = pend.direction if pend else BondDirection.NONE
        bond = Bond(a, b, order=order, direction=direction, kekule_order=order)
        bi = len(mol.bonds)
        mol.bonds.append(bond)
        mol.invalidate_caches()
        if pend is None or pend.order is None:
            if pend is not None and pend.colon:
                info.colon_bonds.add(bi)
            else:
                info.default_bonds.add(bi)
        # the new atom records its predecessor at creation; the existing
        # endpoint sees the new neighbour now
        if record_chiral and a in mol.chiral_order:
            mol.chiral_order[a].append(b)
        return bi

    def close_ring(num: int, atom: int, close_pending: _Pending | None) -> None:
        open_atom, open_pending = ring_open.pop(num)
        if open_atom == atom:
            raise SmilesSyntaxError(f"ring closure {num} bonds atom {atom} to itself")
        o_order = open_pending.order if open_pending else None
        c_order = close_pending.order if close_pending else None
        if o_order and c_order and o_order != c_order:
            raise SmilesSyntaxError(f"conflicting bond orders on ring closure {num}")
        order = o_order or c_order
        direction = BondDirection.NONE
        if open_pending and open_pending.direction is not BondDirection.NONE:
            direction = open_pending.direction
        if close_pending and close_pending.direction is not BondDirection.NONE:
            flipped = (BondDirection.DOWN
                       if close_pending.direction is BondDirection.UP
                       else BondDirection.UP)
            if direction is not BondDirection.NONE and direction is not flipped:
                direction = BondDirection.NONE  # inconsistent; degrade
            else:
                direction = flipped
        colon = bool((open_pending and open_pending.colon)
                     or (close_pending and close_pending.colon))
        pend = _Pending(order=order, direction=direction, colon=colon)
        _add_bond(open_atom, atom, pend, record_chiral=False)
        # patch the reserved slot in the opening atom's chiral order
        if open_atom in mol.chiral_order:
            slots = mol.chiral_order[open_atom]
            sentinel = _RING_PLACEHOLDER_BASE - num
            for k, v in enumerate(slots):
                if v == sentinel:
                    slots[k] = atom
                    break
        if atom in mol.chiral_order:
            mol.chiral_order[atom].append(open_atom)

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]

        if ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch opened before any atom")
            if pending is not None:
                raise SmilesSyntaxError("bond symbol before '('")
            branch_stack.append(prev)
            i += 1
            continue

        if ch == ")":
            if pending is not None:
                raise SmilesSyntaxError("dangling bond before ')'")
            if not branch_stack:
                raise SmilesSyntaxError("unmatched ')'")
            prev = branch_stack.pop()
            i += 1
            continue

        if ch == ".":
            if branch_stack:
                raise SmilesSyntaxError("'.' inside a branch")
            if pending is not None:
                raise SmilesSyntaxError("bond symbol before '.'")
            if prev is None:
                raise SmilesSyntaxError("'.' without a preceding atom")
            prev = None
            dangling_dot = True
            i += 1
            continue

        if ch in _BOND_TOKENS or ch == ":":
            if pending is not None:
                raise SmilesSyntaxError("two bond symbols in a row")
            if ch == ":":
                pending = _Pending(colon=True)
            else:
                order, direction = _BOND_TOKENS[ch]
                pending = _Pending(order=order, direction=direction)
            i += 1
            continue

        if ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesSyntaxError("ring closure before any atom")
            if ch == "%":
                if i + 2 >= n or not text[i + 1: i + 3].isdigit():
                    raise SmilesSyntaxError("'%' needs two digits")
                num = int(text[i + 1: i + 3])
                i += 3
            else:
                num = int(ch)
                i += 1
            if num in ring_open:
                close_ring(num, prev, pending)
            else:
                ring_open[num] = (prev, pending)
                if prev in mol.chiral_order:
                    mol.chiral_order[prev].append(_RING_PLACEHOLDER_BASE - num)
            pending = None
            continue

        if ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise SmilesSyntaxError("unclosed '['")
            atom, aromatic, chiral_extra = _parse_bracket(
                text[i + 1: end], allow_wildcard)
            add_atom(atom, aromatic, chiral_extra)
            i = end + 1
            continue

        if ch == "]":
            raise SmilesSyntaxError("unmatched ']'")

        if ch == "*":
            if not allow_wildcard:
                raise UnsupportedFeatureError(
                    "wildcard atoms are only valid in fragment notation")
            add_atom(Atom(element=WILDCARD, bracketed=True), False, None)
            i += 1
            continue

        # organic-subset atom tokens
        two = text[i: i + 2]
        if two in ("Cl", "Br"):
            add_atom(Atom(element=SYMBOL_TO_NUM[two]), False, None)
            i += 2
            continue
        if two in _KNOWN_TWO_LETTER:
            raise UnsupportedFeatureError(f"element {two} is not supported")
        if ch in "BCNOPSFI":
            add_atom(Atom(element=SYMBOL_TO_NUM[ch]), False, None)
            i += 1
            continue
        if ch in "bcnops":
            add_atom(Atom(element=SYMBOL_TO_NUM[ch.upper()]), True, None)
            i += 1
            continue
        if ch.isalpha() or ch == "@":
            raise UnsupportedFeatureError(
                f"atom token {ch!r} outside the supported subset at position {i}")
        raise SmilesSyntaxError(f"unexpected character {ch!r} at position {i}")

    if branch_stack:
        raise SmilesSyntaxError("unclosed '('")
    if ring_open:
        raise SmilesSyntaxError(
            f"unclosed ring closure(s): {sorted(ring_open)}")
    if pending is not None:
        raise SmilesSyntaxError("dangling bond at end of input")
    if dangling_dot:
        raise SmilesSyntaxError("trailing '.'")

    return mol, info


def _parse_bracket(body: str, allow_wildcard: bool) -> tuple[Atom, bool, list[int] | None]:
    m = _BRACKET_RE.match(body)
    if m is None:
        raise SmilesSyntaxError(f"malformed bracket atom [{body}]")
    if m.group("isotope"):
        raise UnsupportedFeatureError(f"isotope label in [{body}] is not supported")

    sym = m.group("symbol")
    if sym == "*":
        if not allow_wildcard:
            raise UnsupportedFeatureError(
                "wildcard atoms are only valid in fragment notation")
        return Atom(element=WILDCARD, bracketed=True), False, None

    aromatic = sym.islower()
    sym_u = sym.capitalize() if aromatic else sym
    if aromatic and sym_u not in AROMATIC_OK:
        raise SmilesSyntaxError(f"element {sym_u} cannot be aromatic")
    if sym_u not in SYMBOL_TO_NUM:
        raise UnsupportedFeatureError(f"element {sym_u} is not supported")
    element = SYMBOL_TO_NUM[sym_u]

    hcount = 0
    if m.group("hcount"):
        digits = m.group("hcount")[1:]
        hcount = int(digits) if digits else 1

    charge = 0
    raw = m.group("charge")
    if raw:
        if raw[0] in "+-" and len(raw) > 1 and raw[1].isdigit():
            charge = int(raw)
        else:
            charge = len(raw) if raw[0] == "+" else -len(raw)

    if sym_u in METAL_CHARGES and charge not in METAL_CHARGES[sym_u]:
        raise UnsupportedFeatureError(
            f"{sym_u} is only supported as its usual cation")
    if not allowed_valences(element, charge):
        raise UnsupportedFeatureError(
            f"charge {charge:+d} on {sym_u} is not supported")

    chirality = Chirality.NONE
    chiral_extra: list[int] | None = None
    if m.group("chiral"):
        chirality = Chirality.CW if m.group("chiral") == "@@" else Chirality.CCW
        chiral_extra = [-1] * min(hcount, 1)

    atom = Atom(
        element=element,
        formal_charge=charge,
        explicit_h=hcount,
        chirality=chirality,
        bracketed=True,
    )
    return atom, aromatic, chiral_extra
