"""Smallest-set-of-smallest-rings perception.

Candidate cycles are the shortest cycles through each bond; a greedy pass
keeps the smallest candidates that are independent over GF(2) until the
cyclomatic number is reached. Rings come back as ordered atom tuples.
"""

from __future__ import annotations

from collections import deque

from .molecule import Molecule


def _shortest_cycle_through(mol: Molecule, bond_idx: int) -> tuple[int, ...] | None:
    """Shortest cycle containing bond `bond_idx`, as an ordered atom tuple."""
    bond = mol.bonds[bond_idx]
    start, goal = bond.a1, bond.a2
    # BFS from start to goal avoiding the bond itself
    prev: dict[int, int] = {start: -1}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            break
        for bi in mol.bond_indices_of(cur):
            if bi == bond_idx:
                continue
            nb = mol.bonds[bi].other(cur)
            if nb not in prev:
                prev[nb] = cur
                queue.append(nb)
    if goal not in prev:
        return None
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    return tuple(reversed(path))


def _edge_mask(mol: Molecule, cycle: tuple[int, ...]) -> int:
    mask = 0
    n = len(cycle)
    for i in range(n):
        bi = mol.bond_between(cycle[i], cycle[(i + 1) % n])
        if bi is None:
            raise AssertionError("cycle is not closed")
        mask |= 1 << bi
    return mask


def sssr(mol: Molecule) -> list[tuple[int, ...]]:
    """Return a smallest set of smallest rings, deterministically ordered."""
    n_components = len(mol.connected_components())
    target = mol.n_bonds - mol.n_atoms + n_components
    if target <= 0:
        return []

    candidates: list[tuple[int, tuple[int, ...], int]] = []
    seen_masks: set[int] = set()
    for bi in range(mol.n_bonds):
        cycle = _shortest_cycle_through(mol, bi)
        if cycle is None:
            continue
        mask = _edge_mask(mol, cycle)
        if mask in seen_masks:
            continue
        seen_masks.add(mask)
        candidates.append((len(cycle), cycle, mask))
    candidates.sort(key=lambda c: (c[0], tuple(sorted(c[1]))))

    chosen: list[tuple[int, ...]] = []
    basis: dict[int, int] = {}  # leading bit -> reduced vector
    for _, cycle, mask in candidates:
        reduced = mask
        while reduced:
            lead = reduced.bit_length() - 1
            if lead not in basis:
                basis[lead] = reduced
                chosen.append(cycle)
                break
            reduced ^= basis[lead]
        if len(chosen) == target:
            break
    return chosen


def assign_ring_flags(mol: Molecule) -> None:
    """Populate `mol.rings` and the atom/bond `in_ring` flags."""
    mol.rings = sssr(mol)
    ring_atoms: set[int] = set()
    ring_bonds: set[int] = set()
    for ring in mol.rings:
        n = len(ring)
        for i in range(n):
            ring_atoms.add(ring[i])
            bi = mol.bond_between(ring[i], ring[(i + 1) % n])
            ring_bonds.add(bi)
    # SSSR can leave some cycle bonds outside the chosen basis (e.g. the
    # shared wall of a fused pair is always inside); sweep every bond whose
    # endpoints complete a cycle without it.
    for bi, bond in enumerate(mol.bonds):
        if bi in ring_bonds:
            continue
        if _in_some_cycle(mol, bi):
            ring_bonds.add(bi)
            ring_atoms.add(bond.a1)
            ring_atoms.add(bond.a2)
    for i, atom in enumerate(mol.atoms):
        atom.in_ring = i in ring_atoms
    for bi, bond in enumerate(mol.bonds):
        bond.in_ring = bi in ring_bonds


def _in_some_cycle(mol: Molecule, bond_idx: int) -> bool:
    return _shortest_cycle_through(mol, bond_idx) is not None
