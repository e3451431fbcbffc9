"""Murcko-style scaffolds and leakage-free scaffold splitting."""

from __future__ import annotations

from ..chem import Molecule, extract_submolecule
from ..chem.smiles_writer import canonical_smiles


class DatasetTooSmall(ValueError):
    """A requested split fraction would receive no molecules."""


def murcko_scaffold(mol: Molecule) -> Molecule:
    """Ring systems plus linkers, found by pruning terminal atoms.

    Degree-one non-ring atoms are deleted repeatedly until none remain;
    acyclic molecules therefore reduce to an empty molecule (the empty
    scaffold sentinel, which serializes to "").
    """
    keep = set(range(mol.n_atoms))
    degree = {i: len(mol.bond_indices_of(i)) for i in keep}
    changed = True
    while changed:
        changed = False
        for idx in sorted(keep):
            if mol.atoms[idx].in_ring or degree[idx] > 1:
                continue
            keep.discard(idx)
            changed = True
            for nb in mol.neighbors(idx):
                if nb in keep:
                    degree[nb] -= 1
    if not keep:
        return Molecule(source_smiles="")
    return extract_submolecule(mol, keep)


def scaffold_key(mol: Molecule) -> str:
    """Canonical scaffold identity string (stereo-insensitive)."""
    return canonical_smiles(murcko_scaffold(mol), include_stereo=False)


def scaffold_split(
    dataset: list[Molecule],
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> tuple[list[int], list[int], list[int]]:
    """Group molecules by scaffold and fill train, then valid, then test.

    Groups are taken in descending size order; a whole group lands in one
    split, so no scaffold ever spans two splits.
    """
    if min(fractions) <= 0:
        raise ValueError("fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    groups: dict[str, list[int]] = {}
    for i, mol in enumerate(dataset):
        groups.setdefault(scaffold_key(mol), []).append(i)
    ordered = sorted(groups.values(), key=lambda g: (-len(g), g[0]))

    n = len(dataset)
    train_cut = fractions[0] * n
    valid_cut = (fractions[0] + fractions[1]) * n
    train: list[int] = []
    valid: list[int] = []
    test: list[int] = []
    for group in ordered:
        if len(train) + len(group) <= train_cut:
            train.extend(group)
        elif len(train) + len(valid) + len(group) <= valid_cut:
            valid.extend(group)
        else:
            test.extend(group)
    if not train or not valid or not test:
        raise DatasetTooSmall(
            f"split sizes {len(train)}/{len(valid)}/{len(test)} include an "
            "empty part; need more scaffold groups")
    return train, valid, test
