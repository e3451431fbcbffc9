"""SMILES parsing and molecular perception."""

from .elements import SYMBOL_TO_NUM, NUM_TO_SYMBOL, WILDCARD
from .errors import (
    SmilesError,
    SmilesSyntaxError,
    UnsupportedFeatureError,
    ValenceError,
)
from .molecule import (
    Atom,
    Bond,
    BondOrder,
    BondStereo,
    Chirality,
    Hybridization,
    Molecule,
)
from .parser import parse_smiles
from .rings import sssr
from .smiles_writer import canonical_smiles, write_smiles
from .subgraph import extract_submolecule


def canonical_ring_info(mol: Molecule) -> list[tuple[int, ...]]:
    """Smallest set of smallest rings, as ordered atom-index cycles."""
    return list(mol.rings)


__all__ = [
    "Atom", "Bond", "BondOrder", "BondStereo", "Chirality", "Hybridization",
    "Molecule", "SmilesError", "SmilesSyntaxError", "UnsupportedFeatureError",
    "ValenceError", "parse_smiles", "canonical_smiles", "write_smiles",
    "canonical_ring_info", "extract_submolecule", "sssr",
    "SYMBOL_TO_NUM", "NUM_TO_SYMBOL", "WILDCARD",
]
