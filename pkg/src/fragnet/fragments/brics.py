"""Retrosynthetic-style fragmentation with typed fragment connections.

Cleaves acyclic single bonds at chemically recognisable environments
(rule table shipped as data), partitions the atoms into fragments, and
connects fragments with REGULAR edges (at cleaved bonds), SELF edges
(components that stay whole) and VIRTUAL edges (across non-covalently
bound components, all-to-all, so message passing can reach every part of
a salt or complex).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources

from ..chem import BondOrder, Hybridization, Molecule, extract_submolecule
from ..chem.smiles_writer import canonical_smiles


class ConnectionKind(enum.Enum):
    REGULAR = "regular"
    VIRTUAL = "virtual"
    SELF = "self"


@dataclass
class Connection:
    frag_a: int
    frag_b: int
    kind: ConnectionKind
    via_bond: int | None = None  # bond index, present iff kind is REGULAR


@dataclass
class FragmentDecomposition:
    fragments: list[set[int]]
    connections: list[Connection]
    frag_smiles: list[str]
    cleaved_bonds: list[int] = field(default_factory=list)

    @property
    def n_fragments(self) -> int:
        return len(self.fragments)

    def fragment_of_atom(self, atom_idx: int) -> int:
        for fi, atoms in enumerate(self.fragments):
            if atom_idx in atoms:
                return fi
        raise KeyError(atom_idx)


# ---------------------------------------------------------------------------
# endpoint environment predicates

def _carbonyl_carbon(mol: Molecule, idx: int, other: int) -> bool:
    atom = mol.atoms[idx]
    if atom.element != 6 or atom.in_ring:
        return False
    return any(
        mol.bonds[bi].order is BondOrder.DOUBLE
        and mol.atoms[mol.bonds[bi].other(idx)].element == 8
        for bi in mol.bond_indices_of(idx))


def _sulfonyl_sulfur(mol: Molecule, idx: int, other: int) -> bool:
    atom = mol.atoms[idx]
    if atom.element != 16 or atom.in_ring:
        return False
    doubles_to_o = sum(
        1 for bi in mol.bond_indices_of(idx)
        if mol.bonds[bi].order is BondOrder.DOUBLE
        and mol.atoms[mol.bonds[bi].other(idx)].element == 8)
    return doubles_to_o >= 1


def _amine_nitrogen(mol: Molecule, idx: int, other: int) -> bool:
    atom = mol.atoms[idx]
    if atom.element != 7 or atom.in_ring:
        return False
    # imine / nitrile / nitro nitrogens are not cut points
    return all(mol.bonds[bi].order is BondOrder.SINGLE
               for bi in mol.bond_indices_of(idx))


def _ether_oxygen(mol: Molecule, idx: int, other: int) -> bool:
    atom = mol.atoms[idx]
    return (atom.element == 8 and not atom.in_ring
            and mol.heavy_degree(idx) == 2)


def _hydroxyl_oxygen(mol: Molecule, idx: int, other: int) -> bool:
    atom = mol.atoms[idx]
    return (atom.element == 8 and not atom.in_ring
            and mol.heavy_degree(idx) == 1 and atom.formal_charge == 0)


def _sp3_carbon(mol: Molecule, idx: int, other: int) -> bool:
    atom = mol.atoms[idx]
    return (atom.element == 6 and not atom.in_ring
            and atom.hybridization is Hybridization.SP3)


def _thio_sulfur(mol: Molecule, idx: int, other: int) -> bool:
    atom = mol.atoms[idx]
    if atom.element != 16 or atom.in_ring or mol.heavy_degree(idx) != 2:
        return False
    return all(mol.bonds[bi].order is BondOrder.SINGLE
               for bi in mol.bond_indices_of(idx))


def _ring_atom(mol: Molecule, idx: int, other: int) -> bool:
    return mol.atoms[idx].in_ring


def _chain_substituent(mol: Molecule, idx: int, other: int) -> bool:
    atom = mol.atoms[idx]
    return not atom.in_ring and atom.element in (6, 7, 8, 16)


ENVIRONMENTS = {
    "carbonyl_carbon": _carbonyl_carbon,
    "sulfonyl_sulfur": _sulfonyl_sulfur,
    "amine_nitrogen": _amine_nitrogen,
    "ether_oxygen": _ether_oxygen,
    "hydroxyl_oxygen": _hydroxyl_oxygen,
    "sp3_carbon": _sp3_carbon,
    "thio_sulfur": _thio_sulfur,
    "ring_atom": _ring_atom,
    "chain_substituent": _chain_substituent,
}


@dataclass
class CleavageRule:
    name: str
    left: tuple[str, ...]
    right: tuple[str, ...]

    def matches(self, mol: Molecule, a: int, b: int) -> bool:
        def side(envs: tuple[str, ...], i: int, j: int) -> bool:
            return any(ENVIRONMENTS[e](mol, i, j) for e in envs)
        return ((side(self.left, a, b) and side(self.right, b, a))
                or (side(self.left, b, a) and side(self.right, a, b)))


def load_rules(path: str | None = None) -> list[CleavageRule]:
    """Read the cleavage rule table (defaults to the file shipped with the package)."""
    if path is None:
        text = (resources.files("fragnet.fragments") / "data" /
                "cleavage_rules.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    rules = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, left, right = (part.strip() for part in line.split("|"))
        left_envs = tuple(e.strip() for e in left.split(";"))
        right_envs = tuple(e.strip() for e in right.split(";"))
        for env in left_envs + right_envs:
            if env not in ENVIRONMENTS:
                raise ValueError(f"rule {name}: unknown environment {env!r}")
        rules.append(CleavageRule(name, left_envs, right_envs))
    return rules


_DEFAULT_RULES: list[CleavageRule] | None = None


def default_rules() -> list[CleavageRule]:
    global _DEFAULT_RULES
    if _DEFAULT_RULES is None:
        _DEFAULT_RULES = load_rules()
    return _DEFAULT_RULES


def cleavable_bonds(mol: Molecule,
                    rules: list[CleavageRule] | None = None) -> list[int]:
    """Bond indices the rule table marks for cleavage."""
    rules = rules if rules is not None else default_rules()
    out = []
    for bi, bond in enumerate(mol.bonds):
        if bond.order is not BondOrder.SINGLE or bond.in_ring:
            continue
        a1, a2 = mol.atoms[bond.a1], mol.atoms[bond.a2]
        if a1.element in (0, 1) or a2.element in (0, 1):
            continue
        # charged terminal atoms (carboxylate O-, alkoxide O-, halide-like
        # ends) stay attached; charged atoms inside a chain may still be
        # split out, matching how ionic centres become their own fragments
        for end, other in ((bond.a1, bond.a2), (bond.a2, bond.a1)):
            if mol.atoms[end].formal_charge != 0 and mol.heavy_degree(end) <= 1:
                break
        else:
            if any(rule.matches(mol, bond.a1, bond.a2) for rule in rules):
                out.append(bi)
    return out


def fragment_brics(mol: Molecule,
                   rules: list[CleavageRule] | None = None) -> FragmentDecomposition:
    """Decompose `mol` into fragments with typed connections."""
    cut = set(cleavable_bonds(mol, rules))

    # union-find over the kept bonds
    parent = list(range(mol.n_atoms))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for bi, bond in enumerate(mol.bonds):
        if bi not in cut:
            parent[find(bond.a1)] = find(bond.a2)

    roots: dict[int, int] = {}
    fragments: list[set[int]] = []
    for atom in range(mol.n_atoms):
        root = find(atom)
        if root not in roots:
            roots[root] = len(fragments)
            fragments.append(set())
        fragments[roots[root]].add(atom)
    # order fragments by smallest member for determinism
    order = sorted(range(len(fragments)), key=lambda fi: min(fragments[fi]))
    fragments = [fragments[old] for old in order]
    frag_of = {}
    for fi, atoms in enumerate(fragments):
        for a in atoms:
            frag_of[a] = fi

    connections: list[Connection] = []
    for bi in sorted(cut):
        bond = mol.bonds[bi]
        connections.append(Connection(
            frag_of[bond.a1], frag_of[bond.a2], ConnectionKind.REGULAR, bi))

    # one SELF connection per component that did not split
    comp_frags: list[set[int]] = []
    for comp in mol.components:
        frags_here = {frag_of[a] for a in comp}
        comp_frags.append(frags_here)
        if len(frags_here) == 1:
            fi = next(iter(frags_here))
            connections.append(Connection(fi, fi, ConnectionKind.SELF))

    # VIRTUAL connections across components: every fragment of one to every
    # fragment of the other
    for i in range(len(comp_frags)):
        for j in range(i + 1, len(comp_frags)):
            for fa in sorted(comp_frags[i]):
                for fb in sorted(comp_frags[j]):
                    connections.append(
                        Connection(fa, fb, ConnectionKind.VIRTUAL))

    frag_smiles = []
    for atoms in fragments:
        attachments = []
        for bi in cut:
            bond = mol.bonds[bi]
            if bond.a1 in atoms:
                attachments.append(bond.a1)
            if bond.a2 in atoms:
                attachments.append(bond.a2)
        sub = extract_submolecule(mol, atoms, attachments)
        frag_smiles.append(canonical_smiles(sub))

    return FragmentDecomposition(fragments, connections, frag_smiles, sorted(cut))
