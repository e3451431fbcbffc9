"""The four featurized graphs: atoms, bonds, fragments, fragment connections.

Atom graph
    nodes = atoms, edges = both directions of every covalent bond plus one
    self-edge per atom. Self-edges map to a zero edge-feature sentinel.
Bond graph
    nodes = bonds, edges join bonds sharing exactly one atom (both
    directions, no self-edges). Edge features encode the idealized angle
    at the shared atom.
Fragment graph
    nodes = fragments; every connection (regular/virtual/self) becomes an
    edge; edge features come from the connection graph's learned nodes.
Connection graph
    nodes = connections, edges join connections sharing a fragment.

Everything is deterministic given the molecule and decomposition, and all
edges are stored directed so attention coefficients are per direction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .chem import BondOrder, BondStereo, Hybridization, Molecule
from .chem.molecule import Atom, Bond
from .fragments import ConnectionKind, FragmentDecomposition

_HYBRID_ORDER = [Hybridization.SP, Hybridization.SP2, Hybridization.SP3,
                 Hybridization.OTHER]
_BOND_ORDERS = [BondOrder.SINGLE, BondOrder.DOUBLE, BondOrder.TRIPLE,
                BondOrder.AROMATIC]
_STEREO = [BondStereo.NONE, BondStereo.E, BondStereo.Z]
_CONN_KINDS = [ConnectionKind.REGULAR, ConnectionKind.VIRTUAL,
               ConnectionKind.SELF]

# shared-atom geometry buckets: (label, angle degrees, cosine)
_ANGLE_BUCKETS = {
    Hybridization.SP: (0, -1.0),
    Hybridization.SP2: (1, -0.5),
    Hybridization.SP3: (2, -1.0 / 3.0),
    Hybridization.OTHER: (3, 0.0),
}


@dataclass(frozen=True)
class FeatureConfig:
    """Widths and vocabularies of the featurizers."""

    elements: tuple[int, ...] = (1, 3, 5, 6, 7, 8, 9, 11, 15, 16, 17, 19, 20, 35, 53)
    valence_cap: int = 6
    charge_min: int = -2
    charge_max: int = 2
    radical_cap: int = 2
    hcount_cap: int = 4

    @property
    def atom_width(self) -> int:
        return (len(self.elements) + 1) + (self.valence_cap + 1) \
            + (self.charge_max - self.charge_min + 1) + (self.radical_cap + 1) \
            + len(_HYBRID_ORDER) + 1 + 1 + (self.hcount_cap + 1) + 3

    @property
    def bond_width(self) -> int:
        return len(_BOND_ORDERS) + 1 + 1 + len(_STEREO)

    @property
    def angle_width(self) -> int:
        return len(_ANGLE_BUCKETS) + 1

    @property
    def conn_width(self) -> int:
        return len(_CONN_KINDS) + self.bond_width

    def to_dict(self) -> dict:
        return {
            "elements": list(self.elements),
            "valence_cap": self.valence_cap,
            "charge_min": self.charge_min,
            "charge_max": self.charge_max,
            "radical_cap": self.radical_cap,
            "hcount_cap": self.hcount_cap,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        return cls(
            elements=tuple(d["elements"]),
            valence_cap=d["valence_cap"],
            charge_min=d["charge_min"],
            charge_max=d["charge_max"],
            radical_cap=d["radical_cap"],
            hcount_cap=d["hcount_cap"],
        )


def _one_hot(size: int, idx: int) -> np.ndarray:
    v = np.zeros(size)
    v[idx] = 1.0
    return v


def _capped(value: int, cap: int) -> np.ndarray:
    return _one_hot(cap + 1, min(value, cap))


def featurize_atom(atom: Atom, cfg: FeatureConfig) -> np.ndarray:
    try:
        el = cfg.elements.index(atom.element)
    except ValueError:
        el = len(cfg.elements)  # unknown bucket (wildcards in fragments)
    charge = min(max(atom.formal_charge, cfg.charge_min), cfg.charge_max)
    chir = {"none": 0, "cw": 1, "ccw": 2}[atom.chirality.value]
    return np.concatenate([
        _one_hot(len(cfg.elements) + 1, el),
        _capped(atom.implicit_valence, cfg.valence_cap),
        _one_hot(cfg.charge_max - cfg.charge_min + 1, charge - cfg.charge_min),
        _capped(atom.radical_electrons, cfg.radical_cap),
        _one_hot(len(_HYBRID_ORDER), _HYBRID_ORDER.index(atom.hybridization)),
        [1.0 if atom.is_aromatic else 0.0],
        [1.0 if atom.in_ring else 0.0],
        _capped(atom.total_h, cfg.hcount_cap),
        _one_hot(3, chir),
    ])


def featurize_bond(bond: Bond, cfg: FeatureConfig) -> np.ndarray:
    return np.concatenate([
        _one_hot(len(_BOND_ORDERS), _BOND_ORDERS.index(bond.order)),
        [1.0 if bond.is_conjugated else 0.0],
        [1.0 if bond.in_ring else 0.0],
        _one_hot(len(_STEREO), _STEREO.index(bond.stereo)),
    ])


def idealized_angle_features(shared_atom: Atom, cfg: FeatureConfig) -> np.ndarray:
    """Angle encoding for two bonds meeting at `shared_atom`.

    One-hot over {180, 120, 109.5, other} picked from the shared atom's
    hybridization (aromatic atoms count as 120), plus cos(angle).
    """
    hyb = shared_atom.hybridization
    if shared_atom.is_aromatic:
        hyb = Hybridization.SP2
    bucket, cos = _ANGLE_BUCKETS[hyb]
    return np.concatenate([_one_hot(len(_ANGLE_BUCKETS), bucket), [cos]])


def featurize_connection(conn_kind: ConnectionKind, cleaved_bond: Bond | None,
                         cfg: FeatureConfig) -> np.ndarray:
    kind = _one_hot(len(_CONN_KINDS), _CONN_KINDS.index(conn_kind))
    if cleaved_bond is not None:
        bond_part = featurize_bond(cleaved_bond, cfg)
    else:
        bond_part = np.zeros(cfg.bond_width)
    return np.concatenate([kind, bond_part])


@dataclass
class HierGraphs:
    """The four graphs plus the index maps tying levels together."""

    # atom graph
    atom_nodes: np.ndarray           # [n_atoms, d_atom]
    atom_edge_dst: np.ndarray        # receiving atom per directed edge
    atom_edge_src: np.ndarray        # sending atom per directed edge
    atom_edge_bond: np.ndarray       # bond-graph node per edge, -1 for self
    # bond graph
    bond_nodes: np.ndarray           # [n_bonds, d_bond]
    bond_edge_dst: np.ndarray
    bond_edge_src: np.ndarray
    bond_edge_feats: np.ndarray      # [m, d_angle]
    # fragment graph
    atom_frag_id: np.ndarray         # fragment id per atom
    n_frags: int
    frag_edge_dst: np.ndarray
    frag_edge_src: np.ndarray
    frag_edge_conn: np.ndarray       # connection-graph node per edge
    # connection graph
    conn_nodes: np.ndarray           # [n_conns, d_conn]
    conn_edge_dst: np.ndarray
    conn_edge_src: np.ndarray
    # provenance (kept for explanations and the UI)
    mol: Molecule = None
    decomp: FragmentDecomposition = None
    config: FeatureConfig = field(default_factory=FeatureConfig)

    @property
    def n_atoms(self) -> int:
        return self.atom_nodes.shape[0]

    @property
    def n_bonds(self) -> int:
        return self.bond_nodes.shape[0]

    @property
    def n_conns(self) -> int:
        return self.conn_nodes.shape[0]


def build_hier_graphs(mol: Molecule, decomp: FragmentDecomposition,
                      config: FeatureConfig | None = None) -> HierGraphs:
    cfg = config or FeatureConfig()
    n_atoms, n_bonds = mol.n_atoms, mol.n_bonds

    atom_nodes = (np.stack([featurize_atom(a, cfg) for a in mol.atoms])
                  if n_atoms else np.zeros((0, cfg.atom_width)))
    bond_nodes = (np.stack([featurize_bond(b, cfg) for b in mol.bonds])
                  if n_bonds else np.zeros((0, cfg.bond_width)))

    # atom graph: two directed edges per bond, then one self-edge per atom
    a_dst, a_src, a_bond = [], [], []
    for bi, bond in enumerate(mol.bonds):
        a_dst += [bond.a1, bond.a2]
        a_src += [bond.a2, bond.a1]
        a_bond += [bi, bi]
    for i in range(n_atoms):
        a_dst.append(i)
        a_src.append(i)
        a_bond.append(-1)

    # bond graph: edges between bonds sharing exactly one atom
    b_dst, b_src, b_feats = [], [], []
    for atom_idx in range(n_atoms):
        incident = mol.bond_indices_of(atom_idx)
        for x in range(len(incident)):
            for y in range(x + 1, len(incident)):
                bi, bj = incident[x], incident[y]
                feat = idealized_angle_features(mol.atoms[atom_idx], cfg)
                b_dst += [bi, bj]
                b_src += [bj, bi]
                b_feats += [feat, feat]

    # connection graph nodes
    conns = decomp.connections
    conn_rows = []
    for c in conns:
        bond = mol.bonds[c.via_bond] if c.via_bond is not None else None
        conn_rows.append(featurize_connection(c.kind, bond, cfg))
    conn_nodes = (np.stack(conn_rows) if conn_rows
                  else np.zeros((0, cfg.conn_width)))

    # fragment graph: each connection contributes directed edges
    f_dst, f_src, f_conn = [], [], []
    for ci, c in enumerate(conns):
        if c.kind is ConnectionKind.SELF:
            f_dst.append(c.frag_a)
            f_src.append(c.frag_a)
            f_conn.append(ci)
        else:
            f_dst += [c.frag_a, c.frag_b]
            f_src += [c.frag_b, c.frag_a]
            f_conn += [ci, ci]

    # connection graph edges: connections sharing a fragment
    c_dst, c_src = [], []
    frags_of_conn = [
        {c.frag_a, c.frag_b} for c in conns]
    for i in range(len(conns)):
        for j in range(i + 1, len(conns)):
            if frags_of_conn[i] & frags_of_conn[j]:
                c_dst += [i, j]
                c_src += [j, i]

    atom_frag_id = np.zeros(n_atoms, dtype=np.int64)
    for fi, atoms in enumerate(decomp.fragments):
        for a in atoms:
            atom_frag_id[a] = fi

    def arr(x):
        return np.asarray(x, dtype=np.int64)

    return HierGraphs(
        atom_nodes=atom_nodes,
        atom_edge_dst=arr(a_dst), atom_edge_src=arr(a_src),
        atom_edge_bond=arr(a_bond),
        bond_nodes=bond_nodes,
        bond_edge_dst=arr(b_dst), bond_edge_src=arr(b_src),
        bond_edge_feats=(np.stack(b_feats) if b_feats
                         else np.zeros((0, cfg.angle_width))),
        atom_frag_id=atom_frag_id,
        n_frags=decomp.n_fragments,
        frag_edge_dst=arr(f_dst), frag_edge_src=arr(f_src),
        frag_edge_conn=arr(f_conn),
        conn_nodes=conn_nodes,
        conn_edge_dst=arr(c_dst), conn_edge_src=arr(c_src),
        mol=mol, decomp=decomp, config=cfg,
    )


def hiergraphs_to_json(g: HierGraphs) -> str:
    """Debug dump of all four graphs as one JSON document."""
    doc = {
        "atom_graph": {
            "node_features": g.atom_nodes.tolist(),
            "edges": [[int(d), int(s)] for d, s in
                      zip(g.atom_edge_dst, g.atom_edge_src)],
            "edge_to_bond_node": g.atom_edge_bond.tolist(),
        },
        "bond_graph": {
            "node_features": g.bond_nodes.tolist(),
            "edges": [[int(d), int(s)] for d, s in
                      zip(g.bond_edge_dst, g.bond_edge_src)],
            "edge_features": g.bond_edge_feats.tolist(),
        },
        "fragment_graph": {
            "n_nodes": g.n_frags,
            "atom_to_fragment": g.atom_frag_id.tolist(),
            "edges": [[int(d), int(s)] for d, s in
                      zip(g.frag_edge_dst, g.frag_edge_src)],
            "edge_to_connection_node": g.frag_edge_conn.tolist(),
        },
        "connection_graph": {
            "node_features": g.conn_nodes.tolist(),
            "edges": [[int(d), int(s)] for d, s in
                      zip(g.conn_edge_dst, g.conn_edge_src)],
        },
    }
    return json.dumps(doc, sort_keys=True)
