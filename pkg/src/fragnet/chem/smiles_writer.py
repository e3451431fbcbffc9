"""SMILES output with canonical atom ranking.

Ranking is Morgan-style iterative refinement with recursive tie-breaking
(smallest resulting string wins), so two labelings of the same graph
serialize identically. Used for scaffold identity, fragment grouping and
round-trip testing.
"""

from __future__ import annotations

import logging

from .elements import ORGANIC_SUBSET, WILDCARD, allowed_valences
from .molecule import (
    BondDirection,
    BondOrder,
    BondStereo,
    Chirality,
    Molecule,
)

logger = logging.getLogger(__name__)

_ORDER_KEY = {
    BondOrder.SINGLE: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 4,
}

_TIE_BRANCH_CAP = 16


def write_smiles(mol: Molecule, include_stereo: bool = True) -> str:
    """Canonical SMILES for `mol` (empty molecules give an empty string)."""
    if mol.n_atoms == 0:
        return ""
    ranks = _refine(mol, _initial_ranks(mol))
    return _canonical_string(mol, ranks, include_stereo, depth=0)


canonical_smiles = write_smiles


def _initial_ranks(mol: Molecule) -> list[int]:
    keys = []
    for i, atom in enumerate(mol.atoms):
        keys.append((
            atom.element,
            atom.formal_charge,
            atom.total_h,
            atom.is_aromatic,
            len(mol.bond_indices_of(i)),
            atom.radical_electrons,
        ))
    return _dense(keys)


def _dense(keys: list) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    while True:
        keys = []
        for i in range(mol.n_atoms):
            nbrs = sorted(
                (_ORDER_KEY[mol.bonds[b].order], ranks[mol.bonds[b].other(i)])
                for b in mol.bond_indices_of(i))
            keys.append((ranks[i], tuple(nbrs)))
        new = _dense(keys)
        if new == ranks:
            return ranks
        ranks = new


def _first_tied_class(ranks: list[int]) -> list[int] | None:
    by_rank: dict[int, list[int]] = {}
    for i, r in enumerate(ranks):
        by_rank.setdefault(r, []).append(i)
    for r in sorted(by_rank):
        if len(by_rank[r]) > 1:
            return by_rank[r]
    return None


def _bump(mol: Molecule, ranks: list[int], atom: int) -> list[int]:
    keys = [(r, 1 if i == atom else 2) for i, r in enumerate(ranks)]
    return _refine(mol, _dense(keys))


def _canonical_string(mol: Molecule, ranks: list[int],
                      include_stereo: bool, depth: int) -> str:
    tied = _first_tied_class(ranks)
    if tied is None:
        return _emit(mol, ranks, include_stereo)
    if len(tied) > _TIE_BRANCH_CAP or depth > 8:
        logger.warning("canonical tie-break cap hit; falling back to index order")
        return _canonical_string(mol, _bump(mol, ranks, tied[0]),
                                 include_stereo, depth + 1)
    return min(
        _canonical_string(mol, _bump(mol, ranks, a), include_stereo, depth + 1)
        for a in tied)


def _bare_emittable(mol: Molecule, idx: int, include_stereo: bool) -> bool:
    atom = mol.atoms[idx]
    if atom.element == WILDCARD:
        return False
    sym = atom.symbol
    if sym not in ORGANIC_SUBSET:
        return False
    if atom.formal_charge != 0 or atom.radical_electrons != 0:
        return False
    if include_stereo and atom.chirality is not Chirality.NONE \
            and idx in mol.chiral_order:
        return False
    if atom.is_aromatic:
        # aromatic N/P carrying hydrogens must pin them ([nH])
        return not (atom.element in (7, 15) and atom.total_h > 0)
    bonded = 0
    for bi in mol.bond_indices_of(idx):
        bond = mol.bonds[bi]
        order = bond.kekule_order if bond.order is BondOrder.AROMATIC else bond.order
        bonded += order.value
    fitting = [v for v in allowed_valences(atom.element, 0) if v >= bonded]
    return bool(fitting) and (min(fitting) - bonded) == atom.total_h


def _charge_text(charge: int) -> str:
    if charge == 0:
        return ""
    sign = "+" if charge > 0 else "-"
    return sign if abs(charge) == 1 else f"{sign}{abs(charge)}"


def _parity(perm_from: list[int], perm_to: list[int]) -> int:
    """+1 for even, -1 for odd permutation mapping one order to the other."""
    pos = {v: k for k, v in enumerate(perm_to)}
    seq = [pos[v] for v in perm_from]
    swaps = 0
    for i in range(len(seq)):
        while seq[i] != i:
            j = seq[i]
            seq[i], seq[j] = seq[j], seq[i]
            swaps += 1
    return -1 if swaps % 2 else 1


def _assign_stereo_marks(mol: Molecule,
                         ranks: list[int]) -> dict[int, BondDirection]:
    """Choose directional marks (stored a1->a2) expressing double-bond stereo.

    Substituents are picked by canonical rank so the same molecule always
    gets the same marks regardless of input atom order.
    """
    marks: dict[int, BondDirection] = {}

    def outward(bi: int, end: int) -> BondDirection:
        d = marks[bi]
        if mol.bonds[bi].a1 == end:
            return d
        return BondDirection.DOWN if d is BondDirection.UP else BondDirection.UP

    def set_outward(bi: int, end: int, d: BondDirection) -> None:
        if mol.bonds[bi].a1 != end:
            d = BondDirection.DOWN if d is BondDirection.UP else BondDirection.UP
        marks[bi] = d

    stereo_bonds = sorted(
        (bi for bi, b in enumerate(mol.bonds)
         if b.order is BondOrder.DOUBLE and b.stereo is not BondStereo.NONE),
        key=lambda bi: sorted((ranks[mol.bonds[bi].a1], ranks[mol.bonds[bi].a2])))
    for sbi in stereo_bonds:
        bond = mol.bonds[sbi]
        sides = []
        for end in (bond.a1, bond.a2):
            cands = sorted(
                (bi for bi in mol.bond_indices_of(end)
                 if mol.bonds[bi] is not bond
                 and mol.bonds[bi].order is BondOrder.SINGLE),
                key=lambda bi: ranks[mol.bonds[bi].other(end)])
            if not cands:
                sides = None
                break
            assigned = [bi for bi in cands if bi in marks]
            sides.append((assigned[0] if assigned else cands[0], end))
        if sides is None:
            logger.warning("cannot express double-bond stereo; substituent missing")
            continue
        (b1, e1), (b2, e2) = sides
        out1 = outward(b1, e1) if b1 in marks else BondDirection.UP
        if b1 not in marks:
            set_outward(b1, e1, out1)
        want2 = out1 if bond.stereo is BondStereo.Z else (
            BondDirection.DOWN if out1 is BondDirection.UP else BondDirection.UP)
        if b2 in marks:
            if outward(b2, e2) is not want2:
                logger.warning("conflicting stereo marks; dropping one bond's stereo")
            continue
        set_outward(b2, e2, want2)
    return marks


def _flip_slashes(text: str) -> str:
    return text.translate(str.maketrans("/\\", "\\/"))


def _emit(mol: Molecule, ranks: list[int], include_stereo: bool) -> str:
    marks = _assign_stereo_marks(mol, ranks) if include_stereo else {}

    # first pass: classify bonds into DFS tree edges and ring-closure edges
    visited = [False] * mol.n_atoms
    tree_children: dict[int, list[tuple[int, int]]] = {}
    back_edges: set[int] = set()

    def classify(idx: int, parent_bond: int | None) -> None:
        visited[idx] = True
        children = []
        for bi in sorted(mol.bond_indices_of(idx),
                         key=lambda b: ranks[mol.bonds[b].other(idx)]):
            if bi == parent_bond or bi in back_edges:
                continue
            nb = mol.bonds[bi].other(idx)
            if visited[nb]:
                back_edges.add(bi)
            else:
                children.append((nb, bi))
                classify(nb, bi)
        tree_children[idx] = children

    def bond_symbol(bi: int, from_atom: int) -> str:
        bond = mol.bonds[bi]
        if bond.order is BondOrder.DOUBLE:
            return "="
        if bond.order is BondOrder.TRIPLE:
            return "#"
        if bond.order is BondOrder.AROMATIC:
            return ""
        if bi in marks:
            d = marks[bi]
            if bond.a1 != from_atom:
                d = BondDirection.DOWN if d is BondDirection.UP else BondDirection.UP
            return "/" if d is BondDirection.UP else "\\"
        # explicit single between two aromatic ring atoms avoids re-reading
        # the bond as an aromatic candidate
        if (bond.in_ring and mol.atoms[bond.a1].is_aromatic
                and mol.atoms[bond.a2].is_aromatic):
            return "-"
        return ""

    def atom_text(idx: int, parent: int | None,
                  ring_partners: list[int], children: list[int]) -> str:
        atom = mol.atoms[idx]
        if _bare_emittable(mol, idx, include_stereo):
            sym = atom.symbol
            return sym.lower() if atom.is_aromatic else sym
        if atom.element == WILDCARD:
            return "[*]"
        sym = atom.symbol.lower() if atom.is_aromatic else atom.symbol
        chiral = ""
        if include_stereo and atom.chirality is not Chirality.NONE \
                and idx in mol.chiral_order:
            emitted: list[int] = [] if parent is None else [parent]
            if atom.total_h > 0:
                emitted.append(-1)
            emitted.extend(ring_partners)
            emitted.extend(children)
            stored = mol.chiral_order[idx]
            if sorted(stored) == sorted(emitted):
                par = _parity(stored, emitted)
                cw = atom.chirality is Chirality.CW
                if par < 0:
                    cw = not cw
                chiral = "@@" if cw else "@"
            else:
                logger.warning("dropping unassignable chirality on atom %d", idx)
        h = atom.total_h
        htext = "" if h == 0 else ("H" if h == 1 else f"H{h}")
        return f"[{sym}{chiral}{htext}{_charge_text(atom.formal_charge)}]"

    closure_digit: dict[int, int] = {}  # bond index -> digit
    free_digits = list(range(99, 0, -1))
    pieces: list[str] = []

    def emit(idx: int, parent_bond: int | None) -> None:
        parent = (mol.bonds[parent_bond].other(idx)
                  if parent_bond is not None else None)
        ring_here = [bi for bi in sorted(
            mol.bond_indices_of(idx),
            key=lambda b: ranks[mol.bonds[b].other(idx)]) if bi in back_edges]
        children = tree_children[idx]
        pieces.append(atom_text(
            idx, parent,
            [mol.bonds[bi].other(idx) for bi in ring_here],
            [nb for nb, _ in children]))
        for bi in ring_here:
            if bi in closure_digit:
                digit = closure_digit.pop(bi)
                free_digits.append(digit)
                free_digits.sort(reverse=True)
            else:
                digit = free_digits.pop()
                closure_digit[bi] = digit
            pieces.append(bond_symbol(bi, idx) + _digit_text(digit))
        for k, (nb, bi) in enumerate(children):
            last = k == len(children) - 1
            if not last:
                pieces.append("(")
            pieces.append(bond_symbol(bi, idx))
            emit(nb, bi)
            if not last:
                pieces.append(")")

    components = mol.connected_components()
    texts = []
    for comp in components:
        # start on a terminal heavy atom when one exists; reads better and
        # stays label-independent (element, degree and rank are invariants)
        start = min(comp, key=lambda i: (
            mol.atoms[i].element == WILDCARD,
            len(mol.bond_indices_of(i)),
            ranks[i]))
        classify(start, None)
        pieces = []
        emit(start, None)
        text = "".join(pieces)
        # flipping every directional mark preserves the stereochemistry;
        # normalise so the first mark is always '/'
        for ch in text:
            if ch == "\\":
                text = _flip_slashes(text)
                break
            if ch == "/":
                break
        texts.append(text)
    texts.sort()
    return ".".join(texts)


def _digit_text(digit: int) -> str:
    return str(digit) if digit < 10 else f"%{digit:02d}"
