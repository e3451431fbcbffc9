"""Hierarchical graph-attention model over the four molecular graphs.

Message passing runs bond graph -> atom graph -> (connection graph,
fragment graph): updated bond-node features become the atom graph's edge
features, summed atom features initialize fragment nodes, and the
connection graph's learned node features become the fragment graph's edge
features. The molecule representation is the concatenation of the summed
atom features and summed fragment features, fed to a linear head.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .hiergraph import FeatureConfig, HierGraphs

STACKS = ("bond", "atom", "conn", "frag")


@dataclass
class ModelConfig:
    hidden_dim: int = 128
    layers_per_graph: int = 2
    heads: int = 4
    leaky_slope: float = 0.2
    n_tasks: int = 1
    task: str = "regression"  # or "binary_multitask"
    # how explanations reduce per-edge attention to node scores
    attention_reduction: str = "sender_mean"  # sender_mean | receiver_mean | sender_max
    attention_layers: str = "all"  # all | last

    def to_dict(self) -> dict:
        return {
            "hidden_dim": self.hidden_dim,
            "layers_per_graph": self.layers_per_graph,
            "heads": self.heads,
            "leaky_slope": self.leaky_slope,
            "n_tasks": self.n_tasks,
            "task": self.task,
            "attention_reduction": self.attention_reduction,
            "attention_layers": self.attention_layers,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**{k: d[k] for k in cls().to_dict() if k in d})


@dataclass
class ForwardTrace:
    prediction: ad.Tensor            # [1, n_tasks], tracked when a tape is used
    penultimate: np.ndarray          # [2 * hidden]
    alphas: dict[str, list[list[np.ndarray]]]  # stack -> [layer][head] -> [m]

    @property
    def prediction_value(self) -> np.ndarray:
        return np.array(self.prediction.data).reshape(-1)


def _stack_dims(cfg: ModelConfig, fcfg: FeatureConfig) -> dict[str, list[tuple[int, int | None]]]:
    """(input dim, edge-feature dim or None) per layer of each stack."""
    h = cfg.hidden_dim
    dims: dict[str, list[tuple[int, int | None]]] = {}
    for stack in STACKS:
        first_in = {
            "bond": fcfg.bond_width,
            "atom": fcfg.atom_width,
            "conn": fcfg.conn_width,
            "frag": h,
        }[stack]
        edge_dim = {
            "bond": fcfg.angle_width,
            "atom": h,
            "conn": None,
            "frag": h,
        }[stack]
        dims[stack] = [
            (first_in if layer == 0 else h, edge_dim)
            for layer in range(cfg.layers_per_graph)
        ]
    return dims


def init_params(cfg: ModelConfig, fcfg: FeatureConfig,
                seed: int = 0) -> dict[str, np.ndarray]:
    """Glorot-initialized parameter arrays.

    Heads are stored block-stacked: W and We hold the per-head matrices
    side by side ([d_in, heads*hidden]); the attention vector is split into
    its destination/source/edge thirds, each head-blocked, so the forward
    pass needs no per-head slicing.
    """
    rng = ad.SplitMix64(seed)
    params: dict[str, np.ndarray] = {}
    h = cfg.hidden_dim
    for stack, layers in _stack_dims(cfg, fcfg).items():
        for li, (d_in, d_edge) in enumerate(layers):
            base = f"{stack}.{li}"
            params[f"{base}.W"] = np.concatenate(
                [rng.glorot(d_in, h) for _ in range(cfg.heads)], axis=1)
            if d_edge is not None:
                params[f"{base}.We"] = np.concatenate(
                    [rng.glorot(d_edge, h) for _ in range(cfg.heads)], axis=1)
            a_dim = 2 * h + (h if d_edge is not None else 0)
            for part in ("a_dst", "a_src") + (("a_e",) if d_edge is not None else ()):
                params[f"{base}.{part}"] = np.concatenate(
                    [rng.glorot(a_dim, 1, (h, 1)) for _ in range(cfg.heads)],
                    axis=0)
    params["head.W"] = rng.glorot(2 * h, cfg.n_tasks, (2 * h, cfg.n_tasks))
    params["head.b"] = np.zeros((1, cfg.n_tasks))
    return params


def gat_layer(nodes: ad.Tensor, edge_dst: np.ndarray, edge_src: np.ndarray,
              edge_feats: ad.Tensor | None,
              layer_params: dict[str, ad.Tensor], heads: int,
              leaky_slope: float) -> tuple[ad.Tensor, list[np.ndarray]]:
    """One multi-head attention layer; heads are averaged.

    `layer_params` holds head-blocked arrays (W/We: [d_in, heads*d];
    a_dst/a_src/a_e: [heads*d, 1]) so projections and gathers run once for
    all heads. Nodes with no in-edges bypass attention and output their own
    projected features. Returns the new node features and the per-head
    attention coefficients over the directed edges.
    """
    n = nodes.data.shape[0]
    m = edge_dst.shape[0]

    wh_all = ad.matmul(nodes, layer_params["W"])  # [n, H*d]
    if m == 0:
        return ad.mean_heads(wh_all, heads), [np.zeros(0)] * heads

    indeg = np.bincount(edge_dst, minlength=n)
    deg0 = indeg == 0
    # nodes with in-edges get contiguous segment ids so the softmax never
    # sees an empty segment
    if deg0.any():
        compact = np.cumsum(~deg0) - 1
        seg_ids = compact[edge_dst]
        n_seg = int((~deg0).sum())
    else:
        seg_ids = edge_dst
        n_seg = n

    wh_dst = ad.row_gather(wh_all, edge_dst)
    wh_src = ad.row_gather(wh_all, edge_src)
    logits = ad.add(
        ad.per_head_scores(wh_dst, layer_params["a_dst"], heads),
        ad.per_head_scores(wh_src, layer_params["a_src"], heads))
    if edge_feats is not None:
        e_all = ad.matmul(edge_feats, layer_params["We"])
        logits = ad.add(logits,
                        ad.per_head_scores(e_all, layer_params["a_e"], heads))

    alpha = ad.softmax_by_segment(
        ad.leaky_relu(logits, leaky_slope), seg_ids, n_seg)  # [m, H]
    messages = ad.head_scale(wh_src, alpha, heads)
    agg = ad.segment_sum(messages, edge_dst, n)
    if deg0.any():
        bypass_mask = ad.constant(deg0.astype(np.float64).reshape(n, 1))
        agg = ad.add(agg, ad.mul(bypass_mask, wh_all))
    out = ad.mean_heads(agg, heads)
    alphas = [alpha.data[:, h].copy() for h in range(heads)]
    return out, alphas


def forward(graphs: HierGraphs, params: dict[str, np.ndarray],
            cfg: ModelConfig, tape: ad.Tape | None = None,
            atom_feature_mask: np.ndarray | None = None,
            bond_feature_mask: np.ndarray | None = None,
            dropout: float = 0.0,
            dropout_rng: np.random.Generator | None = None) -> ForwardTrace:
    """Full forward pass. Masks zero out initial node features per level.

    `dropout` (training only) drops hidden node features between layers and
    the penultimate vector, with inverted scaling; the caller provides the
    generator so runs stay reproducible.
    """
    h = cfg.hidden_dim

    def leaf(name: str) -> ad.Tensor:
        if tape is None:
            return ad.constant(params[name])
        return tape.leaf(params[name], name=name)

    def maybe_drop(x: ad.Tensor) -> ad.Tensor:
        if dropout <= 0.0 or dropout_rng is None:
            return x
        keep = (dropout_rng.random(x.data.shape) >= dropout).astype(np.float64)
        return ad.mul(x, ad.constant(keep / (1.0 - dropout)))

    def stack_params(stack: str, layer: int,
                     with_edges: bool) -> dict[str, ad.Tensor]:
        base = f"{stack}.{layer}"
        lp = {"W": leaf(f"{base}.W"), "a_dst": leaf(f"{base}.a_dst"),
              "a_src": leaf(f"{base}.a_src")}
        if with_edges:
            lp["We"] = leaf(f"{base}.We")
            lp["a_e"] = leaf(f"{base}.a_e")
        return lp

    alphas: dict[str, list[list[np.ndarray]]] = {s: [] for s in STACKS}

    def run_stack(stack: str, nodes: ad.Tensor, edge_dst, edge_src,
                  edge_feats: ad.Tensor | None) -> ad.Tensor:
        cur = nodes
        for li in range(cfg.layers_per_graph):
            lp = stack_params(stack, li, edge_feats is not None)
            cur, layer_alphas = gat_layer(
                cur, edge_dst, edge_src, edge_feats, lp, cfg.heads,
                cfg.leaky_slope)
            alphas[stack].append(layer_alphas)
            if li < cfg.layers_per_graph - 1:
                cur = maybe_drop(ad.elu(cur))
        return cur

    # bond graph first
    bond_in = graphs.bond_nodes
    if bond_feature_mask is not None:
        bond_in = bond_in * np.asarray(
            bond_feature_mask, dtype=np.float64).reshape(-1, 1)
    bond_h = run_stack("bond", ad.constant(bond_in),
                       graphs.bond_edge_dst, graphs.bond_edge_src,
                       ad.constant(graphs.bond_edge_feats)
                       if len(graphs.bond_edge_dst) else None)

    # updated bond features become atom-graph edge features; self-edges get
    # a zero vector of the same width
    zero_row = ad.constant(np.zeros((1, h)))
    bond_rows = ad.concat([bond_h, zero_row], axis=0)
    edge_idx = np.where(graphs.atom_edge_bond < 0,
                        graphs.n_bonds, graphs.atom_edge_bond)
    atom_edge_feats = ad.row_gather(bond_rows, edge_idx)

    atom_in = graphs.atom_nodes
    if atom_feature_mask is not None:
        atom_in = atom_in * np.asarray(
            atom_feature_mask, dtype=np.float64).reshape(-1, 1)
    atom_h = run_stack("atom", ad.constant(atom_in),
                       graphs.atom_edge_dst, graphs.atom_edge_src,
                       atom_edge_feats)

    n_atoms = graphs.n_atoms
    rep_atoms = ad.segment_sum(atom_h, np.zeros(n_atoms, dtype=np.int64), 1)

    # fragment nodes start as the sum of their atoms' features
    frag_init = ad.segment_sum(atom_h, graphs.atom_frag_id, graphs.n_frags)

    conn_h = run_stack("conn", ad.constant(graphs.conn_nodes),
                       graphs.conn_edge_dst, graphs.conn_edge_src, None)

    frag_edge_feats = (ad.row_gather(conn_h, graphs.frag_edge_conn)
                       if len(graphs.frag_edge_dst) else None)
    frag_h = run_stack("frag", frag_init,
                       graphs.frag_edge_dst, graphs.frag_edge_src,
                       frag_edge_feats)

    rep_frags = ad.segment_sum(
        frag_h, np.zeros(graphs.n_frags, dtype=np.int64), 1)

    penult = ad.concat([rep_atoms, rep_frags], axis=1)
    pred = ad.add(ad.matmul(maybe_drop(penult), leaf("head.W")),
                  leaf("head.b"))
    return ForwardTrace(prediction=pred,
                        penultimate=penult.data.reshape(-1).copy(),
                        alphas=alphas)


def strip_virtual_edges(graphs: HierGraphs) -> HierGraphs:
    """Copy of the graphs with VIRTUAL fragment-graph edges removed."""
    from dataclasses import replace
    from .fragments import ConnectionKind

    keep = np.array([
        graphs.decomp.connections[ci].kind is not ConnectionKind.VIRTUAL
        for ci in graphs.frag_edge_conn], dtype=bool)
    return replace(
        graphs,
        frag_edge_dst=graphs.frag_edge_dst[keep],
        frag_edge_src=graphs.frag_edge_src[keep],
        frag_edge_conn=graphs.frag_edge_conn[keep],
    )
