"""Deterministic 2D depiction coordinates.

Rings are placed as regular polygons (fused rings mirrored across the
shared edge, spiro/bridged rings pivoted around a shared atom); acyclic
neighbourhoods fan out into the widest angular gap with a zig-zag bias;
ring systems met mid-chain are anchored where the chain reaches them.
A light overlap-relaxation pass nudges only non-ring atoms, and finished
components are packed side by side with a margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chem import Hybridization, Molecule


@dataclass
class LayoutResult:
    coords: list[tuple[float, float]]
    bonds: list[dict]  # {a1, a2, order}

    def to_json_dict(self) -> dict:
        return {
            "coords": [[round(x, 6), round(y, 6)] for x, y in self.coords],
            "bonds": self.bonds,
        }


def _polygon_radius(k: int) -> float:
    return 0.5 / math.sin(math.pi / k)


def _ring_center(ring, pos) -> np.ndarray:
    return np.mean([pos[a] for a in ring if a in pos], axis=0)


def _place_first_ring(ring: tuple[int, ...], pos: dict[int, np.ndarray],
                      origin: np.ndarray) -> None:
    k = len(ring)
    r = _polygon_radius(k)
    for i, atom in enumerate(ring):
        ang = math.pi / 2 + 2 * math.pi * i / k
        pos[atom] = origin + np.array([r * math.cos(ang), r * math.sin(ang)])


def _place_fused_ring(ring: tuple[int, ...], pos: dict[int, np.ndarray],
                      other_center: np.ndarray) -> bool:
    """Place a ring with two adjacent atoms already positioned."""
    k = len(ring)
    placed_pairs = [
        (i, (i + 1) % k) for i in range(k)
        if ring[i] in pos and ring[(i + 1) % k] in pos]
    if not placed_pairs:
        return False
    i, j = placed_pairs[0]
    a, b = ring[i], ring[j]
    pa, pb = pos[a], pos[b]
    edge = pb - pa
    edge_len = float(np.linalg.norm(edge))
    if edge_len < 1e-9:
        return False
    mid = (pa + pb) / 2
    normal = np.array([-edge[1], edge[0]]) / edge_len
    apothem = 0.5 / math.tan(math.pi / k) * edge_len
    c1 = mid + normal * apothem
    c2 = mid - normal * apothem
    center = c1 if np.linalg.norm(c1 - other_center) >= np.linalg.norm(
        c2 - other_center) else c2
    r = float(np.linalg.norm(pa - center))
    ang_b = math.atan2(*(pb - center)[::-1])
    ang_a = math.atan2(*(pa - center)[::-1])
    step = 2 * math.pi / k
    diff = (ang_b - ang_a) % (2 * math.pi)
    signed = step if abs(diff - step) < abs(diff - (2 * math.pi - step)) else -step
    order = ring[j:] + ring[:j]  # starts at b
    ang = ang_b
    for atom in order[1:]:
        ang += signed
        if atom not in pos:
            pos[atom] = center + r * np.array([math.cos(ang), math.sin(ang)])
    return True


def _place_attached_ring(mol: Molecule, ring: tuple[int, ...], anchor: int,
                         pos: dict[int, np.ndarray]) -> None:
    """Place a polygon touching existing geometry only at `anchor`."""
    k = len(ring)
    r = _polygon_radius(k)
    direction = _free_direction(mol, anchor, pos)
    center = pos[anchor] + direction * r
    ang0 = math.atan2(*(pos[anchor] - center)[::-1])
    idx = ring.index(anchor)
    order = ring[idx:] + ring[:idx]
    for i, atom in enumerate(order):
        if atom not in pos:
            ang = ang0 + 2 * math.pi * i / k
            pos[atom] = center + r * np.array([math.cos(ang), math.sin(ang)])


def _free_direction(mol: Molecule, atom: int,
                    pos: dict[int, np.ndarray]) -> np.ndarray:
    angles = sorted(
        math.atan2(*(pos[nb] - pos[atom])[::-1]) % (2 * math.pi)
        for nb in mol.neighbors(atom) if nb in pos)
    if not angles:
        return np.array([1.0, 0.0])
    if len(angles) == 1:
        ang = angles[0] + math.pi
    else:
        gaps = [(angles[(i + 1) % len(angles)] - angles[i]) % (2 * math.pi)
                for i in range(len(angles))]
        gi = max(range(len(gaps)), key=lambda i: (gaps[i], -i))
        ang = angles[gi] + gaps[gi] / 2
    return np.array([math.cos(ang), math.sin(ang)])


def _ring_systems(rings: list[tuple[int, ...]]) -> list[list[int]]:
    """Group ring indices into systems sharing at least one atom."""
    parent = list(range(len(rings)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(len(rings)):
        for j in range(i + 1, len(rings)):
            if set(rings[i]) & set(rings[j]):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(rings)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _place_system(mol: Molecule, rings: list[tuple[int, ...]],
                  system: list[int], pos: dict[int, np.ndarray],
                  anchor: int | None, origin: np.ndarray) -> list[int]:
    """Place one fused/spiro ring system; returns newly placed atoms."""
    before = set(pos)
    remaining = list(system)
    if anchor is None:
        first = remaining.pop(0)
        _place_first_ring(rings[first], pos, origin)
    else:
        first = next(ri for ri in remaining if anchor in rings[ri])
        remaining.remove(first)
        _place_attached_ring(mol, rings[first], anchor, pos)
    while remaining:
        progressed = False
        for ri in list(remaining):
            ring = rings[ri]
            placed_atoms = [a for a in ring if a in pos]
            if not placed_atoms:
                continue
            # reference point on the far side: already-placed atoms that are
            # not part of this ring (the neighbouring ring's body)
            outside = [a for a in pos if a not in ring]
            reference = (_ring_center_or(outside, pos) if outside
                         else pos[placed_atoms[0]] + np.array([0.1, 0.1]))
            done = _place_fused_ring(ring, pos, reference)
            if not done:
                _place_attached_ring(mol, ring, placed_atoms[0], pos)
            remaining.remove(ri)
            progressed = True
        if not progressed:
            # disconnected leftovers (cannot normally happen inside a system)
            ri = remaining.pop(0)
            _place_first_ring(rings[ri], pos, origin + np.array([3.0, 0.0]))
    return sorted(set(pos) - before)


def _ring_center_or(atoms: list[int], pos: dict[int, np.ndarray]) -> np.ndarray:
    return np.mean([pos[a] for a in atoms], axis=0)


def layout_2d(mol: Molecule) -> LayoutResult:
    """Depiction coordinates; deterministic for a given molecule."""
    if mol.n_atoms == 0:
        return LayoutResult([], [])
    rings = list(mol.rings)
    systems = _ring_systems(rings)
    system_of_atom: dict[int, int] = {}
    for si, system in enumerate(systems):
        for ri in system:
            for a in rings[ri]:
                system_of_atom.setdefault(a, si)
    placed_system = [False] * len(systems)

    pos: dict[int, np.ndarray] = {}
    offset_x = 0.0
    for comp in mol.components:
        frontier: list[int] = []
        ring_atoms = sorted(a for a in comp if a in system_of_atom)
        if ring_atoms:
            si = system_of_atom[ring_atoms[0]]
            newly = _place_system(mol, rings, systems[si], pos, None,
                                  np.array([0.0, 0.0]))
            placed_system[si] = True
            frontier = newly
        else:
            seed = min(comp)
            pos[seed] = np.array([0.0, 0.0])
            frontier = [seed]

        zig = 1.0
        while frontier:
            nxt: list[int] = []
            for atom in frontier:
                for nb in sorted(mol.neighbors(atom)):
                    if nb in pos:
                        continue
                    placed_nbrs = [p for p in mol.neighbors(atom) if p in pos]
                    if (len(placed_nbrs) == 1 and mol.atoms[atom].hybridization
                            is not Hybridization.SP):
                        prev = pos[placed_nbrs[0]]
                        base = math.atan2(*(pos[atom] - prev)[::-1])
                        ang = base + zig * math.pi / 3
                        zig = -zig
                        direction = np.array([math.cos(ang), math.sin(ang)])
                    else:
                        direction = _free_direction(mol, atom, pos)
                    pos[nb] = pos[atom] + direction
                    nxt.append(nb)
                    si = system_of_atom.get(nb)
                    if si is not None and not placed_system[si]:
                        newly = _place_system(mol, rings, systems[si], pos,
                                              nb, pos[nb])
                        placed_system[si] = True
                        nxt.extend(a for a in newly if a != nb)
            frontier = sorted(set(nxt))

        _separate_ring_systems(mol, rings, systems, system_of_atom, comp, pos)
        _relax_overlaps(mol, comp, pos)
        _final_nudge(comp, pos)
        xs = [pos[a][0] for a in comp]
        ys = [pos[a][1] for a in comp]
        shift = np.array([offset_x - min(xs), -min(ys)])
        for a in comp:
            pos[a] = pos[a] + shift
        offset_x += (max(xs) - min(xs)) + 2.0

    coords = [(float(pos[i][0]), float(pos[i][1])) for i in range(mol.n_atoms)]
    bonds = [{"a1": b.a1, "a2": b.a2, "order": b.order.name.lower()}
             for b in mol.bonds]
    return LayoutResult(coords, bonds)


def _separate_ring_systems(mol: Molecule, rings, systems, system_of_atom,
                           comp: set[int], pos: dict[int, np.ndarray]) -> None:
    """Rigidly translate overlapping ring systems apart (polygons intact)."""
    local = [si for si in range(len(systems))
             if any(a in comp for ri in systems[si] for a in rings[ri])]
    atoms_of = {si: sorted({a for ri in systems[si] for a in rings[ri]})
                for si in local}
    for _ in range(20):
        moved = False
        for x in range(len(local)):
            for y in range(x + 1, len(local)):
                sa, sb = local[x], local[y]
                min_d = min(
                    float(np.linalg.norm(pos[i] - pos[j]))
                    for i in atoms_of[sa] for j in atoms_of[sb])
                if min_d >= 0.6:
                    continue
                ca = _ring_center_or(atoms_of[sa], pos)
                cb = _ring_center_or(atoms_of[sb], pos)
                delta = cb - ca
                norm = float(np.linalg.norm(delta))
                direction = (delta / norm if norm > 1e-9
                             else np.array([1.0, 0.0]))
                shift = direction * (0.6 - min_d + 0.2)
                for a in atoms_of[sb]:
                    pos[a] = pos[a] + shift
                moved = True
        if not moved:
            break


def _final_nudge(comp: set[int], pos: dict[int, np.ndarray]) -> None:
    """Last-resort guarantee that no two atoms coincide exactly."""
    atoms = sorted(comp)
    golden = math.pi * (3 - math.sqrt(5))
    for _ in range(10):
        clean = True
        for i in atoms:
            for j in atoms:
                if j <= i:
                    continue
                if float(np.linalg.norm(pos[i] - pos[j])) < 1e-6:
                    ang = golden * j
                    pos[j] = pos[j] + 0.31 * np.array(
                        [math.cos(ang), math.sin(ang)])
                    clean = False
        if clean:
            return


def _relax_overlaps(mol: Molecule, comp: set[int],
                    pos: dict[int, np.ndarray]) -> None:
    """Push apart non-bonded atoms that landed too close (non-ring only)."""
    atoms = sorted(comp)
    bonded = {(b.a1, b.a2) for b in mol.bonds} | {(b.a2, b.a1) for b in mol.bonds}
    for _ in range(30):
        moved = False
        for i in atoms:
            for j in atoms:
                if j <= i or (i, j) in bonded:
                    continue
                delta = pos[j] - pos[i]
                dist = float(np.linalg.norm(delta))
                if dist >= 0.7:
                    continue
                if dist < 1e-9:
                    delta = np.array([1.0, 0.0])
                    dist = 1.0
                push = max((0.7 - dist) / 2, 0.05)
                direction = delta / max(dist, 1e-9)
                for k, sign in ((i, -1.0), (j, 1.0)):
                    if not mol.atoms[k].in_ring:
                        pos[k] = pos[k] + sign * push * direction
                        moved = True
        if not moved:
            break
