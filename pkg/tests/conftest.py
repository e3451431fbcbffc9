import copy
from pathlib import Path

import numpy as np
import pytest

from fragnet.chem import Molecule

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
ESOL_CSV = DATA_DIR / "esol.csv"


def permute_molecule(mol: Molecule, perm: np.ndarray) -> Molecule:
    """Relabel atoms by `perm` (new index = perm[old index])."""
    out = copy.deepcopy(mol)
    order = np.argsort(perm)  # old index listed at its new position
    out.atoms = [copy.deepcopy(mol.atoms[int(o)]) for o in order]
    for bond in out.bonds:
        bond.a1 = int(perm[bond.a1])
        bond.a2 = int(perm[bond.a2])
    out.components = [{int(perm[a]) for a in comp} for comp in mol.components]
    out.rings = [tuple(int(perm[a]) for a in ring) for ring in mol.rings]
    out.chiral_order = {
        int(perm[a]): [v if v < 0 else int(perm[v]) for v in order_list]
        for a, order_list in mol.chiral_order.items()}
    out.invalidate_caches()
    return out


@pytest.fixture(scope="session")
def esol_smiles() -> list[str]:
    import csv
    with open(ESOL_CSV) as fh:
        return [row["smiles"].strip() for row in csv.DictReader(fh)]
