"""Fragmentation, fragment connections and scaffold utilities."""

from .brics import (
    CleavageRule,
    Connection,
    ConnectionKind,
    FragmentDecomposition,
    cleavable_bonds,
    default_rules,
    fragment_brics,
    load_rules,
)
from .scaffold import DatasetTooSmall, murcko_scaffold, scaffold_key, scaffold_split

__all__ = [
    "CleavageRule", "Connection", "ConnectionKind", "FragmentDecomposition",
    "cleavable_bonds", "default_rules", "fragment_brics", "load_rules",
    "DatasetTooSmall", "murcko_scaffold", "scaffold_key", "scaffold_split",
]
