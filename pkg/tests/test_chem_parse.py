"""Parser and perception behaviour, including the full-corpus round trip."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fragnet.chem import (
    BondOrder,
    Hybridization,
    Molecule,
    SmilesSyntaxError,
    UnsupportedFeatureError,
    ValenceError,
    canonical_ring_info,
    canonical_smiles,
    parse_smiles,
)
from fragnet.chem.elements import allowed_valences
from fragnet.chem.molecule import Atom, Bond
from fragnet.chem.parser import ParseInfo
from fragnet.chem import perception

FIG2_SALT = "CC[NH+](CCCl)CCOc1cccc2ccccc12.[Cl-]"


def perceived_features(mol: Molecule):
    atoms = sorted((a.element, a.formal_charge, a.total_h, a.is_aromatic,
                    a.in_ring, a.hybridization.value, a.radical_electrons)
                   for a in mol.atoms)
    bonds = sorted((b.order.value, b.is_conjugated, b.in_ring, b.stereo.value)
                   for b in mol.bonds)
    return atoms, bonds


class TestBasicParsing:
    def test_methane(self):
        mol = parse_smiles("C")
        assert mol.n_atoms == 1
        assert mol.atoms[0].element == 6
        assert mol.atoms[0].implicit_h == 4

    def test_benzene(self):
        mol = parse_smiles("c1ccccc1")
        assert mol.n_atoms == 6
        assert all(a.is_aromatic and a.in_ring for a in mol.atoms)
        assert all(a.implicit_h == 1 for a in mol.atoms)

    def test_salt_components_and_charges(self):
        mol = parse_smiles(FIG2_SALT)
        assert len(mol.components) == 2
        charges = sorted(a.formal_charge for a in mol.atoms
                         if a.formal_charge != 0)
        assert charges == [-1, 1]
        assert mol.atoms[2].element == 7 and mol.atoms[2].formal_charge == 1
        assert mol.atoms[19].element == 17 and mol.atoms[19].formal_charge == -1

    def test_atom_count_equals_atom_tokens(self):
        assert parse_smiles("CC(C)C(=O)O").n_atoms == 6

    def test_bond_count_explicit_plus_ring_closures(self):
        mol = parse_smiles("C1CCCCC1")  # 5 explicit chained + 1 ring closure
        assert mol.n_bonds == 6

    def test_determinism(self):
        a = parse_smiles(FIG2_SALT)
        b = parse_smiles(FIG2_SALT)
        assert perceived_features(a) == perceived_features(b)
        assert canonical_smiles(a) == canonical_smiles(b)

    def test_explicit_hydrogen_atom(self):
        mol = parse_smiles("[H]O[H]")
        assert mol.n_atoms == 3
        assert mol.atoms[1].implicit_h == 0


class TestErrors:
    @pytest.mark.parametrize("smi", [
        "", "C1CC", "C(C", "CC)", "C=", "C==C", "%1C", "C..C", "c1ccccc1C)",
        "cc",
    ])
    def test_syntax_errors(self, smi):
        with pytest.raises(SmilesSyntaxError):
            parse_smiles(smi)

    @pytest.mark.parametrize("smi", [
        "C(C)(C)(C)(C)C", "[CH5]", "O=C(=O)(=O)C", "[Cl-]C",
    ])
    def test_valence_errors(self, smi):
        with pytest.raises(ValenceError):
            parse_smiles(smi)

    @pytest.mark.parametrize("smi", [
        "[13CH4]", "*C", "[*]C", "[Si](C)(C)C", "[Na]", "[Fe+2]", "[Se]",
        "[N+3]",
    ])
    def test_unsupported_features(self, smi):
        with pytest.raises(UnsupportedFeatureError):
            parse_smiles(smi)

    def test_wildcard_allowed_in_fragment_notation(self):
        mol = parse_smiles("N[*]", allow_wildcard=True)
        assert mol.atoms[1].element == 0
        assert mol.atoms[0].implicit_h == 2


class TestRings:
    def test_acyclic_has_no_rings(self):
        assert canonical_ring_info(parse_smiles("CCO")) == []

    def test_cyclopropane(self):
        rings = canonical_ring_info(parse_smiles("C1CC1"))
        assert len(rings) == 1 and len(rings[0]) == 3

    def test_naphthalene_against_cycle_enumeration(self):
        # independent oracle: enumerate every simple cycle by DFS and keep
        # the two smallest; they must be 6-rings sharing exactly two atoms
        mol = parse_smiles("c1cccc2ccccc12")
        adj = {i: set(mol.neighbors(i)) for i in range(mol.n_atoms)}

        cycles = set()

        def dfs(start, current, path):
            for nxt in sorted(adj[current]):
                if nxt == start and len(path) >= 3:
                    cycles.add(frozenset(path))
                elif nxt not in path and nxt > start:
                    dfs(start, nxt, path + [nxt])

        for s in range(mol.n_atoms):
            dfs(s, s, [s])
        smallest = sorted(cycles, key=len)[:2]
        assert all(len(c) == 6 for c in smallest)

        rings = canonical_ring_info(mol)
        assert len(rings) == 2
        assert {frozenset(r) for r in rings} == set(smallest)
        shared = set(rings[0]) & set(rings[1])
        assert len(shared) == 2
        assert all(mol.atoms[i].in_ring for i in range(mol.n_atoms))

    def test_ring_flags_consistent_with_membership(self):
        mol = parse_smiles("CC1CCCCC1")
        in_ring = {a for ring in mol.rings for a in ring}
        for i, atom in enumerate(mol.atoms):
            assert atom.in_ring == (i in in_ring)


class TestPerception:
    def test_hybridization_examples(self):
        mol = parse_smiles("CC#N")
        assert mol.atoms[1].hybridization is Hybridization.SP
        mol = parse_smiles("C=C")
        assert mol.atoms[0].hybridization is Hybridization.SP2
        mol = parse_smiles("CC")
        assert mol.atoms[0].hybridization is Hybridization.SP3

    def test_conjugation_rule(self):
        mol = parse_smiles("C=CC=C")
        # middle single bond touches a double through sp2 atoms
        middle = mol.bond_between(1, 2)
        assert mol.bonds[middle].is_conjugated
        iso = parse_smiles("C=CCCC=C")
        lone = iso.bond_between(2, 3)
        assert not iso.bonds[lone].is_conjugated

    def test_stereo_markers(self):
        from fragnet.chem import BondStereo
        trans = parse_smiles("F/C=C/F")
        cis = parse_smiles("F/C=C\\F")
        t_bond = next(b for b in trans.bonds if b.order is BondOrder.DOUBLE)
        c_bond = next(b for b in cis.bonds if b.order is BondOrder.DOUBLE)
        assert t_bond.stereo is BondStereo.E
        assert c_bond.stereo is BondStereo.Z

    def test_chirality_markers(self):
        from fragnet.chem import Chirality
        mol = parse_smiles("N[C@@H](C)C(=O)O")
        assert mol.atoms[1].chirality is Chirality.CW

    def test_valence_invariant_neutral_atoms(self, esol_smiles):
        for smi in esol_smiles[:150]:
            mol = parse_smiles(smi)
            for i, atom in enumerate(mol.atoms):
                if atom.formal_charge != 0 or atom.is_aromatic:
                    continue
                bonded = sum(mol.bonds[b].order.valence
                             for b in mol.bond_indices_of(i))
                total = bonded + atom.total_h
                assert total in allowed_valences(atom.element, 0), (smi, i)


class TestCorpus:
    def test_every_esol_smiles_parses(self, esol_smiles):
        assert len(esol_smiles) == 1128
        for smi in esol_smiles:
            parse_smiles(smi)  # raises on failure

    def test_corpus_roundtrip_sample(self, esol_smiles):
        for smi in esol_smiles[::8]:
            mol = parse_smiles(smi)
            out = canonical_smiles(mol)
            again = parse_smiles(out)
            assert canonical_smiles(again) == out, smi
            assert perceived_features(mol) == perceived_features(again), smi


# ---------------------------------------------------------------------------
# property test: any chemically valid random graph must serialize and
# re-parse into an identically perceived molecule

_ELEMENT_POOL = [(6, 4), (6, 4), (6, 4), (7, 3), (8, 2), (16, 2), (9, 1),
                 (17, 1)]


@st.composite
def random_molecules(draw) -> Molecule:
    n = draw(st.integers(min_value=1, max_value=10))
    picks = [draw(st.sampled_from(_ELEMENT_POOL)) for _ in range(n)]
    mol = Molecule(source_smiles="<generated>")
    remaining = []
    for element, val in picks:
        mol.atoms.append(Atom(element=element))
        remaining.append(val)
    # spanning tree
    for i in range(1, n):
        parents = [p for p in range(i) if remaining[p] >= 1]
        if not parents:
            break
        p = draw(st.sampled_from(parents))
        double = (remaining[p] >= 2 and remaining[i] >= 2
                  and draw(st.booleans()))
        order = BondOrder.DOUBLE if double else BondOrder.SINGLE
        mol.bonds.append(Bond(p, i, order=order, kekule_order=order))
        cost = order.value
        remaining[p] -= cost
        remaining[i] -= cost
    # optional ring closure
    if n >= 4 and draw(st.booleans()):
        mol.invalidate_caches()
        candidates = [
            (a, b) for a in range(n) for b in range(a + 2, n)
            if remaining[a] >= 1 and remaining[b] >= 1
            and mol.bond_between(a, b) is None]
        if candidates:
            a, b = draw(st.sampled_from(candidates))
            mol.bonds.append(Bond(a, b))
            remaining[a] -= 1
            remaining[b] -= 1
    mol.invalidate_caches()
    perception.perceive(mol, ParseInfo(aromatic_input=[False] * n))
    return mol


@given(random_molecules())
@settings(max_examples=120, deadline=None)
def test_generated_molecule_roundtrip(mol):
    text = canonical_smiles(mol)
    again = parse_smiles(text)
    assert canonical_smiles(again) == text
    assert perceived_features(again) == perceived_features(mol)
