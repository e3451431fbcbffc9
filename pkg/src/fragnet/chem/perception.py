"""Chemical perception applied after structural parsing.

Order matters: rings first, then kekulization of input-aromatic systems
(which makes every bond order concrete), hydrogens/valence checks, ring
aromaticity, hybridization, conjugation and finally double-bond stereo.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from .elements import WILDCARD, allowed_valences
from .errors import SmilesSyntaxError, ValenceError
from .molecule import (
    Atom,
    BondDirection,
    BondOrder,
    BondStereo,
    Hybridization,
    Molecule,
)
from .rings import assign_ring_flags

if TYPE_CHECKING:  # pragma: no cover
    from .parser import ParseInfo

logger = logging.getLogger(__name__)

_SP2_CAPABLE = {5, 6, 7, 8, 15, 16}  # B C N O P S


def perceive(mol: Molecule, info: "ParseInfo") -> None:
    assign_ring_flags(mol)
    candidates = _aromatic_candidate_bonds(mol, info)
    _kekulize(mol, info, candidates)
    assign_hydrogens(mol)
    perceive_aromaticity(mol)
    perceive_hybridization(mol)
    perceive_conjugation(mol)
    resolve_bond_stereo(mol)
    mol.components = mol.connected_components()


def _aromatic_candidate_bonds(mol: Molecule, info: "ParseInfo") -> set[int]:
    """Bonds whose final order is decided by kekulization."""
    for idx, flagged in enumerate(info.aromatic_input):
        if flagged and not mol.atoms[idx].in_ring:
            raise SmilesSyntaxError(
                f"atom {idx} written aromatic but not in a ring")
    candidates: set[int] = set()
    for bi in info.colon_bonds:
        bond = mol.bonds[bi]
        if not bond.in_ring:
            raise SmilesSyntaxError("':' bond outside of a ring")
        candidates.add(bi)
    for bi in info.default_bonds:
        bond = mol.bonds[bi]
        if (bond.in_ring
                and info.aromatic_input[bond.a1]
                and info.aromatic_input[bond.a2]):
            candidates.add(bi)
    return candidates


def _needs_double(mol: Molecule, idx: int, info: "ParseInfo") -> bool:
    """Whether kekulization must give this atom one more bond of order two.

    An atom takes a double bond exactly when its current explicit valence
    falls short of the smallest valence state the element/charge allows.
    This covers pyridine vs. pyrrole nitrogens ([nH] pins the hydrogen),
    exocyclic carbonyls (already satisfied) and hypervalent cases such as
    aromatic N-oxides written n=O (3 -> 5 promotion).
    """
    atom = mol.atoms[idx]
    if not info.aromatic_input[idx]:
        return False
    current = atom.explicit_h
    for bi in mol.bond_indices_of(idx):
        current += mol.bonds[bi].order.value
    fitting = [v for v in allowed_valences(atom.element, atom.formal_charge)
               if v >= current]
    if not fitting:
        return False  # the valence check reports this later
    return min(fitting) - current >= 1


def _kekulize(mol: Molecule, info: "ParseInfo", candidates: set[int]) -> None:
    if not candidates:
        return
    needs = {i for i in range(mol.n_atoms) if _needs_double(mol, i, info)}
    # adjacency restricted to candidate bonds between atoms that need a double
    adj: dict[int, list[tuple[int, int]]] = {a: [] for a in needs}
    for bi in candidates:
        bond = mol.bonds[bi]
        if bond.a1 in needs and bond.a2 in needs:
            adj[bond.a1].append((bond.a2, bi))
            adj[bond.a2].append((bond.a1, bi))

    matched: dict[int, int] = {}  # atom -> bond index of its double bond

    def backtrack(remaining: list[int]) -> bool:
        if not remaining:
            return True
        remaining = sorted(remaining, key=lambda a: len(
            [1 for nb, _ in adj[a] if nb not in matched]))
        atom = remaining[0]
        if atom in matched:
            return backtrack(remaining[1:])
        for nb, bi in adj[atom]:
            if nb in matched:
                continue
            matched[atom] = bi
            matched[nb] = bi
            rest = [a for a in remaining[1:] if a != nb]
            if backtrack(rest):
                return True
            del matched[atom]
            del matched[nb]
        return False

    if not backtrack(sorted(needs)):
        raise SmilesSyntaxError(
            "cannot kekulize the aromatic system as written")
    double_bonds = set(matched.values())
    for bi in candidates:
        bond = mol.bonds[bi]
        order = BondOrder.DOUBLE if bi in double_bonds else BondOrder.SINGLE
        bond.order = order
        bond.kekule_order = order


def assign_hydrogens(mol: Molecule) -> None:
    """Fill implicit hydrogen counts and detect valence violations."""
    for idx, atom in enumerate(mol.atoms):
        if atom.element == WILDCARD:
            atom.implicit_h = 0
            atom.implicit_valence = 0
            continue
        bonded = 0
        for bi in mol.bond_indices_of(idx):
            order = mol.bonds[bi].order
            if order is BondOrder.AROMATIC:
                raise AssertionError("aromatic order before perception")
            bonded += order.value
        allowed = allowed_valences(atom.element, atom.formal_charge)
        if not allowed:
            raise ValenceError(
                f"atom {idx} ({atom.symbol}{atom.formal_charge:+d}) outside "
                "the supported valence table")
        total_explicit = bonded + atom.explicit_h
        fitting = [v for v in allowed if v >= total_explicit]
        if not fitting:
            raise ValenceError(
                f"atom {idx} ({atom.symbol}) has bonded valence "
                f"{total_explicit}, max allowed {max(allowed)}")
        if atom.bracketed:
            atom.implicit_h = 0
            atom.radical_electrons = min(fitting) - total_explicit
        else:
            atom.implicit_h = min(fitting) - bonded
            atom.radical_electrons = 0
        atom.implicit_valence = atom.implicit_h


def _ring_systems(mol: Molecule) -> list[list[int]]:
    """Group SSSR ring indices into fused systems (sharing a bond)."""
    ring_bonds: list[set[int]] = []
    for ring in mol.rings:
        bonds = set()
        n = len(ring)
        for i in range(n):
            bonds.add(mol.bond_between(ring[i], ring[(i + 1) % n]))
        ring_bonds.append(bonds)
    parent = list(range(len(mol.rings)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(len(mol.rings)):
        for j in range(i + 1, len(mol.rings)):
            if ring_bonds[i] & ring_bonds[j]:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(mol.rings)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _pi_count(mol: Molecule, atom_set: set[int]) -> int | None:
    """Pi electrons contributed inside `atom_set`, or None if not a pi system."""
    total = 0
    for idx in atom_set:
        atom = mol.atoms[idx]
        if atom.element not in _SP2_CAPABLE:
            return None
        sigma = len(mol.bond_indices_of(idx)) + atom.total_h
        if sigma > 3:
            return None
        double_partners = []
        for bi in mol.bond_indices_of(idx):
            bond = mol.bonds[bi]
            if bond.order is BondOrder.TRIPLE:
                return None
            if bond.order in (BondOrder.DOUBLE, BondOrder.AROMATIC):
                double_partners.append(bond.other(idx))
        if double_partners:
            # a double bond into the evaluated set, or into any ring of a
            # fused system, leaves one electron in this ring's pi count
            # regardless of which kekule assignment the parser picked; a
            # double bond to an acyclic atom (e.g. quinone =O) keeps its
            # electrons outside the ring
            if any(p in atom_set or mol.atoms[p].in_ring
                   for p in double_partners):
                total += 1
        elif atom.formal_charge > 0:
            total += 0
        elif atom.formal_charge < 0:
            total += 2
        elif atom.element == 6:
            return None  # saturated carbon breaks the pi system
        elif atom.element == 5:
            total += 0
        else:
            total += 2  # heteroatom lone pair
    return total


def perceive_aromaticity(mol: Molecule) -> None:
    """Hueckel-style perception over SSSR rings and fused unions."""
    passing_sets: list[set[int]] = []
    for ring in mol.rings:
        s = set(ring)
        pi = _pi_count(mol, s)
        if pi is not None and pi >= 2 and pi % 4 == 2:
            passing_sets.append(s)
    for system in _ring_systems(mol):
        if len(system) < 2:
            continue
        s: set[int] = set()
        for ri in system:
            s.update(mol.rings[ri])
        pi = _pi_count(mol, s)
        if pi is not None and pi >= 2 and pi % 4 == 2:
            passing_sets.append(s)
    for s in passing_sets:
        for idx in s:
            mol.atoms[idx].is_aromatic = True
        for bi, bond in enumerate(mol.bonds):
            if bond.in_ring and bond.a1 in s and bond.a2 in s:
                if bond.order is not BondOrder.AROMATIC:
                    bond.kekule_order = bond.order
                    bond.order = BondOrder.AROMATIC


def perceive_hybridization(mol: Molecule) -> None:
    for idx, atom in enumerate(mol.atoms):
        bond_ids = mol.bond_indices_of(idx)
        if not bond_ids or atom.element == WILDCARD:
            atom.hybridization = Hybridization.OTHER
            continue
        doubles = triples = 0
        aromatic = atom.is_aromatic
        for bi in bond_ids:
            order = mol.bonds[bi].order
            if order is BondOrder.DOUBLE:
                doubles += 1
            elif order is BondOrder.TRIPLE:
                triples += 1
            elif order is BondOrder.AROMATIC:
                aromatic = True
        sigma = len(bond_ids) + atom.total_h
        if sigma >= 4:
            atom.hybridization = Hybridization.SP3
        elif aromatic:
            atom.hybridization = Hybridization.SP2
        elif triples >= 1 or doubles >= 2:
            atom.hybridization = Hybridization.SP if sigma <= 2 else Hybridization.SP2
        elif doubles == 1:
            atom.hybridization = Hybridization.SP2
        else:
            atom.hybridization = Hybridization.SP3


def perceive_conjugation(mol: Molecule) -> None:
    multiple = (BondOrder.DOUBLE, BondOrder.TRIPLE, BondOrder.AROMATIC)
    for bi, bond in enumerate(mol.bonds):
        if bond.order is BondOrder.AROMATIC:
            bond.is_conjugated = True
            continue
        conj = False
        for shared in (bond.a1, bond.a2):
            if mol.atoms[shared].hybridization not in (
                    Hybridization.SP, Hybridization.SP2):
                continue
            for other_bi in mol.bond_indices_of(shared):
                if other_bi != bi and mol.bonds[other_bi].order in multiple:
                    conj = True
                    break
            if conj:
                break
        bond.is_conjugated = conj


def resolve_bond_stereo(mol: Molecule) -> None:
    """Derive E/Z for double bonds from directional single bonds.

    The assignment is relative to the marked substituents, not CIP
    priorities; unresolvable markings degrade to NONE with a warning.
    """
    for bond in mol.bonds:
        if bond.order is not BondOrder.DOUBLE:
            continue
        # terminal double bonds (C=O, C=CH2 ends) carry no stereo
        if (len(mol.bond_indices_of(bond.a1)) < 2
                or len(mol.bond_indices_of(bond.a2)) < 2):
            bond.stereo = BondStereo.NONE
            continue
        chars = []
        for end in (bond.a1, bond.a2):
            outwards = []
            for bi in mol.bond_indices_of(end):
                nb_bond = mol.bonds[bi]
                if nb_bond is bond or nb_bond.direction is BondDirection.NONE:
                    continue
                # normalise so the direction reads outward from `end`
                outward = nb_bond.direction
                if nb_bond.a2 == end:
                    outward = (BondDirection.DOWN
                               if outward is BondDirection.UP
                               else BondDirection.UP)
                outwards.append(outward)
            # two marks on one end must disagree (they sit on opposite sides)
            if len(outwards) == 2 and outwards[0] is outwards[1]:
                logger.warning(
                    "conflicting stereo marks around a double bond in %s; "
                    "dropping", mol.source_smiles)
                outwards = []
            chars.append(outwards[0] if outwards else None)
        if chars[0] is None or chars[1] is None:
            if chars[0] is not None or chars[1] is not None:
                logger.warning(
                    "stereo marks on only one side of a double bond in %s; "
                    "dropping", mol.source_smiles)
            bond.stereo = BondStereo.NONE
        else:
            bond.stereo = (BondStereo.Z if chars[0] is chars[1]
                           else BondStereo.E)
