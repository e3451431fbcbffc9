"""Extract perceived sub-molecules (for fragments and scaffolds)."""

from __future__ import annotations

from .elements import WILDCARD
from .molecule import Atom, Bond, BondOrder, Chirality, Molecule
from . import perception
from .parser import ParseInfo


def extract_submolecule(mol: Molecule, atom_indices: set[int],
                        attachments: list[int] | None = None) -> Molecule:
    """Induced subgraph over `atom_indices`, re-perceived from kekule orders.

    `attachments` lists member atoms that lost a bond to the outside; each
    entry gains one wildcard neighbour so the atom's hydrogen count and
    valence are preserved (fragment semantics). Without attachments the
    freed valence turns into hydrogens (scaffold semantics). Stereo markers
    are dropped; sub-molecule identity ignores them.
    """
    index_map: dict[int, int] = {}
    sub = Molecule(source_smiles="")
    for old in sorted(atom_indices):
        a = mol.atoms[old]
        index_map[old] = len(sub.atoms)
        sub.atoms.append(Atom(
            element=a.element,
            formal_charge=a.formal_charge,
            explicit_h=a.explicit_h,
            bracketed=a.bracketed,
            chirality=Chirality.NONE,
        ))
    for bond in mol.bonds:
        if bond.a1 in atom_indices and bond.a2 in atom_indices:
            order = (bond.kekule_order if bond.order is BondOrder.AROMATIC
                     else bond.order)
            sub.bonds.append(Bond(index_map[bond.a1], index_map[bond.a2],
                                  order=order, kekule_order=order))
    for inside in attachments or []:
        star = len(sub.atoms)
        sub.atoms.append(Atom(element=WILDCARD, bracketed=True))
        sub.bonds.append(Bond(index_map[inside], star))
    sub.invalidate_caches()
    info = ParseInfo(aromatic_input=[False] * len(sub.atoms))
    perception.perceive(sub, info)
    return sub
