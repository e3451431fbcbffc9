"""Fragmentation, connections, scaffolds and splits."""

import numpy as np
import pytest

from fragnet.chem import canonical_smiles, parse_smiles
from fragnet.fragments import (
    ConnectionKind,
    DatasetTooSmall,
    cleavable_bonds,
    default_rules,
    fragment_brics,
    load_rules,
    murcko_scaffold,
    scaffold_key,
    scaffold_split,
)

FIG2_SALT = "CC[NH+](CCCl)CCOc1cccc2ccccc12.[Cl-]"


def frag_graph_connected(decomp) -> bool:
    adj = {i: set() for i in range(decomp.n_fragments)}
    for c in decomp.connections:
        adj[c.frag_a].add(c.frag_b)
        adj[c.frag_b].add(c.frag_a)
    seen, stack = {0}, [0]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == decomp.n_fragments


class TestFragmentation:
    def test_ethane_single_fragment_self_connection(self):
        d = fragment_brics(parse_smiles("CC"))
        assert d.fragments == [{0, 1}]
        assert len(d.connections) == 1
        assert d.connections[0].kind is ConnectionKind.SELF
        assert d.connections[0].frag_a == d.connections[0].frag_b == 0

    def test_salt_decomposition(self):
        mol = parse_smiles(FIG2_SALT)
        d = fragment_brics(mol)
        assert d.n_fragments >= 5
        assert "[Cl-]" in d.frag_smiles
        # the fused two-ring system stays one fragment
        ring_frag = max(d.fragments, key=len)
        assert len(ring_frag) == 10
        assert all(mol.atoms[a].is_aromatic for a in ring_frag)
        # every cation-side fragment gets a VIRTUAL edge to the anion
        anion = d.frag_smiles.index("[Cl-]")
        cation_frags = {fi for fi in range(d.n_fragments) if fi != anion}
        virtual_pairs = {
            (c.frag_a, c.frag_b) for c in d.connections
            if c.kind is ConnectionKind.VIRTUAL}
        for fi in cation_frags:
            assert (fi, anion) in virtual_pairs or (anion, fi) in virtual_pairs
        # the positively charged nitrogen separates into its own fragment
        n_idx = next(i for i, a in enumerate(mol.atoms)
                     if a.element == 7 and a.formal_charge == 1)
        assert {n_idx} in d.fragments

    def test_ester_hand_enumerated_fixture(self):
        # applying the rule table by hand to CCOC(=O)c1ccccc1:
        #   C1-O2  cleaved by ether_alkyl (ether O + sp3 C)
        #   O2-C3  cleaved by acyl (carbonyl C + ether O)
        #   C3-C5  cleaved by ring_substituent (ring atom + chain C)
        #   C0-C1  kept (no rule matches plain sp3 C-C)
        mol = parse_smiles("CCOC(=O)c1ccccc1")
        cuts = cleavable_bonds(mol)
        cut_pairs = {frozenset((mol.bonds[b].a1, mol.bonds[b].a2))
                     for b in cuts}
        assert cut_pairs == {frozenset((1, 2)), frozenset((2, 3)),
                             frozenset((3, 5))}
        d = fragment_brics(mol)
        assert d.fragments == [{0, 1}, {2}, {3, 4}, {5, 6, 7, 8, 9, 10}]
        regular = [c for c in d.connections
                   if c.kind is ConnectionKind.REGULAR]
        assert len(regular) == 3

    def test_charged_terminal_not_cleaved(self):
        # carboxylate oxygen stays attached to its carbon
        mol = parse_smiles("CCC(=O)[O-].[Na+]")
        d = fragment_brics(mol)
        o_minus = next(i for i, a in enumerate(mol.atoms)
                       if a.element == 8 and a.formal_charge == -1)
        frag = next(f for f in d.fragments if o_minus in f)
        assert len(frag) > 1

    def test_partition_and_connectivity_fuzz(self, esol_smiles):
        for smi in esol_smiles[::5]:
            mol = parse_smiles(smi)
            d = fragment_brics(mol)
            union = set().union(*d.fragments)
            assert union == set(range(mol.n_atoms))
            assert sum(len(f) for f in d.fragments) == mol.n_atoms
            assert frag_graph_connected(d), smi

    def test_multi_component_connected_via_virtual(self):
        d = fragment_brics(parse_smiles("CCOC(=O)CC.[Na+].[Cl-]"))
        assert frag_graph_connected(d)
        kinds = {c.kind for c in d.connections}
        assert ConnectionKind.VIRTUAL in kinds

    def test_reassembly_preserves_structure(self, esol_smiles):
        # fragment-internal bonds plus cleaved bonds must reproduce the
        # molecule's bond set exactly
        for smi in esol_smiles[:80]:
            mol = parse_smiles(smi)
            d = fragment_brics(mol)
            frag_of = {}
            for fi, atoms in enumerate(d.fragments):
                for a in atoms:
                    frag_of[a] = fi
            internal = {bi for bi, b in enumerate(mol.bonds)
                        if frag_of[b.a1] == frag_of[b.a2]}
            assert internal | set(d.cleaved_bonds) == set(range(mol.n_bonds))
            assert internal & set(d.cleaved_bonds) == set()

    def test_rule_file_loads_and_rejects_unknown_envs(self, tmp_path):
        rules = default_rules()
        assert len(rules) >= 5
        bad = tmp_path / "rules.txt"
        bad.write_text("x | carbonyl_carbon | made_up_env\n")
        with pytest.raises(ValueError):
            load_rules(str(bad))


class TestMurcko:
    def test_acyclic_gives_empty_scaffold(self):
        assert murcko_scaffold(parse_smiles("CCCC")).n_atoms == 0
        assert scaffold_key(parse_smiles("CCCC")) == ""

    def test_pure_ring_is_its_own_scaffold(self):
        mol = parse_smiles("c1ccccc1")
        assert scaffold_key(mol) == canonical_smiles(mol)

    def test_side_chains_removed(self):
        assert scaffold_key(parse_smiles("CCc1ccccc1O")) == \
            scaffold_key(parse_smiles("c1ccccc1"))

    def test_linker_retained(self):
        scaffold = murcko_scaffold(parse_smiles("c1ccccc1CCc1ccccc1"))
        assert scaffold.n_atoms == 14

    def test_label_independent_identity(self):
        a = scaffold_key(parse_smiles("CCc1ccc(O)cc1"))
        b = scaffold_key(parse_smiles("Oc1ccc(CC)cc1"))
        assert a == b


class TestScaffoldSplit:
    def test_single_group_too_small(self):
        mols = [parse_smiles("Cc1ccccc1")] * 10
        with pytest.raises(DatasetTooSmall):
            scaffold_split(mols, (0.8, 0.1, 0.1))

    def test_three_distinct_scaffolds(self):
        mols = [parse_smiles(s) for s in
                ("c1ccccc1", "C1CCCCC1", "c1ccncc1")]
        train, valid, test = scaffold_split(mols, (1 / 3, 1 / 3, 1 / 3))
        assert sorted(len(s) for s in (train, valid, test)) == [1, 1, 1]

    def test_no_scaffold_spans_two_splits(self, esol_smiles):
        mols = [parse_smiles(s) for s in esol_smiles[:240]]
        train, valid, test = scaffold_split(mols, (0.8, 0.1, 0.1))
        keys = [scaffold_key(m) for m in mols]
        sets = [{keys[i] for i in part} for part in (train, valid, test)]
        assert not (sets[0] & sets[1])
        assert not (sets[0] & sets[2])
        assert not (sets[1] & sets[2])
        assert sorted(train + valid + test) == list(range(240))

    def test_fraction_validation(self):
        mols = [parse_smiles("C"), parse_smiles("CC")]
        with pytest.raises(ValueError):
            scaffold_split(mols, (0.5, 0.5, 0.5))
        with pytest.raises(ValueError):
            scaffold_split(mols, (1.0, 0.0, 0.0))
