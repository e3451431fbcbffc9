"""Molecular graph types produced by the SMILES parser."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .elements import NUM_TO_SYMBOL


class Hybridization(enum.Enum):
    SP = "sp"
    SP2 = "sp2"
    SP3 = "sp3"
    OTHER = "other"


class Chirality(enum.Enum):
    NONE = "none"
    CW = "cw"
    CCW = "ccw"


class BondOrder(enum.Enum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> float:
        """Contribution of this bond to an atom's bonded valence."""
        return 1.5 if self is BondOrder.AROMATIC else float(self.value)


class BondStereo(enum.Enum):
    NONE = "none"
    E = "e"
    Z = "z"


class BondDirection(enum.Enum):
    """Directional single-bond marker (``/`` or ``\\``) as written."""

    NONE = "none"
    UP = "up"
    DOWN = "down"


@dataclass
class Atom:
    element: int
    formal_charge: int = 0
    explicit_h: int = 0
    implicit_h: int = 0
    is_aromatic: bool = False
    in_ring: bool = False
    hybridization: Hybridization = Hybridization.OTHER
    implicit_valence: int = 0
    radical_electrons: int = 0
    chirality: Chirality = Chirality.NONE
    # True if the atom came from a bracket expression; brackets pin the
    # hydrogen count, so no implicit hydrogens are ever added.
    bracketed: bool = False

    @property
    def symbol(self) -> str:
        return NUM_TO_SYMBOL.get(self.element, "*")

    @property
    def total_h(self) -> int:
        return self.explicit_h + self.implicit_h


@dataclass
class Bond:
    a1: int
    a2: int
    order: BondOrder = BondOrder.SINGLE
    is_conjugated: bool = False
    in_ring: bool = False
    stereo: BondStereo = BondStereo.NONE
    # Kekule order is retained when the perceived order becomes AROMATIC so
    # substructures can be re-perceived after atoms are deleted.
    kekule_order: BondOrder = BondOrder.SINGLE
    direction: BondDirection = BondDirection.NONE

    def other(self, atom_idx: int) -> int:
        if atom_idx == self.a1:
            return self.a2
        if atom_idx == self.a2:
            return self.a1
        raise ValueError(f"atom {atom_idx} not on bond ({self.a1},{self.a2})")


@dataclass
class Molecule:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)
    components: list[set[int]] = field(default_factory=list)
    source_smiles: str = ""
    rings: list[tuple[int, ...]] = field(default_factory=list)
    # neighbour order per chiral atom as encountered in the input text;
    # -1 stands for the implicit-or-bracket hydrogen slot
    chiral_order: dict[int, list[int]] = field(default_factory=dict)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    def bond_indices_of(self, atom_idx: int) -> list[int]:
        return self._adjacency()[atom_idx]

    def neighbors(self, atom_idx: int) -> list[int]:
        return [self.bonds[b].other(atom_idx) for b in self.bond_indices_of(atom_idx)]

    def bond_between(self, a: int, b: int) -> int | None:
        for bi in self.bond_indices_of(a):
            if self.bonds[bi].other(a) == b:
                return bi
        return None

    def heavy_degree(self, atom_idx: int) -> int:
        return sum(1 for b in self.bond_indices_of(atom_idx)
                   if self.atoms[self.bonds[b].other(atom_idx)].element != 1)

    def _adjacency(self) -> list[list[int]]:
        adj = getattr(self, "_adj_cache", None)
        if adj is None or len(adj) != len(self.atoms):
            adj = [[] for _ in self.atoms]
            for i, bond in enumerate(self.bonds):
                adj[bond.a1].append(i)
                adj[bond.a2].append(i)
            self._adj_cache = adj
        return adj

    def invalidate_caches(self) -> None:
        self._adj_cache = None

    def connected_components(self) -> list[set[int]]:
        """Recompute connected components from the bond list."""
        seen = [False] * len(self.atoms)
        out: list[set[int]] = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            comp = {start}
            seen[start] = True
            queue = [start]
            while queue:
                cur = queue.pop()
                for nb in self.neighbors(cur):
                    if not seen[nb]:
                        seen[nb] = True
                        comp.add(nb)
                        queue.append(nb)
            out.append(comp)
        return out
