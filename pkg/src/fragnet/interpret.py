"""Attention-weight extraction, fragment contribution scores, aggregate
substructure statistics and embedding export."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .chem import Molecule, parse_smiles
from .fragments import ConnectionKind, FragmentDecomposition, fragment_brics
from .hiergraph import HierGraphs, build_hier_graphs
from .model import forward
from .training import Checkpoint, Dataset, TaskKind


class EmptySelection(ValueError):
    """An error filter admitted no molecules."""


@dataclass
class Explanation:
    smiles: str
    prediction: float
    atom_weights: np.ndarray       # [n_atoms], min-max scaled to [0, 1]
    bond_weights: np.ndarray       # [n_bonds], min-max scaled to [0, 1]
    frag_weights: np.ndarray       # [n_frags], unscaled
    conn_weights: np.ndarray       # [n_conns], unscaled
    frag_contributions: np.ndarray  # [n_frags], in target units
    embedding: np.ndarray          # penultimate activations
    frag_smiles: list[str]
    atoms_in_fragments: list[list[int]]
    connections: list[dict]        # frag_a, frag_b, kind, weight
    bonds: list[tuple[int, int]]

    def to_json_dict(self) -> dict:
        return {
            "smiles": self.smiles,
            "prediction": self.prediction,
            "atom_weights": self.atom_weights.tolist(),
            "bond_weights": self.bond_weights.tolist(),
            "bonds": [list(b) for b in self.bonds],
            "fragment_weights": self.frag_weights.tolist(),
            "connection_weights": self.conn_weights.tolist(),
            "fragment_contributions": self.frag_contributions.tolist(),
            "embedding": self.embedding.tolist(),
            "atoms_in_fragments": [
                {"fragment": fi, "smiles": self.frag_smiles[fi],
                 "atoms": atoms}
                for fi, atoms in enumerate(self.atoms_in_fragments)],
            "connections": self.connections,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


@dataclass
class FragmentStats:
    frag_smiles: str
    mean_error: float
    mean_weight: float
    mean_contribution: float
    pct_in_low_error: float
    pct_in_high_error: float
    count: int

    @property
    def exclusively_high_error(self) -> bool:
        return self.pct_in_low_error == 0.0 and self.pct_in_high_error > 0.0


def _node_attention_scores(alphas_per_layer: list[list[np.ndarray]],
                           edge_dst: np.ndarray, edge_src: np.ndarray,
                           n_nodes: int, exclude_self: bool,
                           reduction: str, layers: str) -> np.ndarray:
    """Reduce per-edge attention coefficients to one score per node.

    The default credits each node with the mean attention it earns as the
    message sender, self-edges excluded, averaged over layers and heads.
    Alternative reductions stay selectable for research comparisons.
    """
    use = (np.ones(len(edge_dst), dtype=bool) if not exclude_self
           else edge_dst != edge_src)
    anchor = edge_src if reduction.startswith("sender") else edge_dst
    chosen = alphas_per_layer if layers == "all" else alphas_per_layer[-1:]
    sums = np.zeros(n_nodes)
    counts = np.zeros(n_nodes)
    maxes = np.zeros(n_nodes)
    for layer in chosen:
        for alpha in layer:
            if len(alpha) == 0:
                continue
            np.add.at(sums, anchor[use], alpha[use])
            np.add.at(counts, anchor[use], 1.0)
            np.maximum.at(maxes, anchor[use], alpha[use])
    if reduction.endswith("max"):
        return maxes
    with np.errstate(invalid="ignore"):
        out = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    return out


def _min_max_scale(x: np.ndarray) -> np.ndarray:
    if len(x) < 2:
        return np.zeros_like(x)
    lo, hi = x.min(), x.max()
    if hi - lo < 1e-15:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def mask_fragment(graphs: HierGraphs, frag_id: int,
                  checkpoint: Checkpoint) -> float:
    """Contribution of one fragment: unmasked minus masked prediction.

    Masking zeroes the fragment's atom features and its internal bonds'
    bond-graph features; topology is untouched. The result is reported in
    de-standardized target units (the standardizer's offset cancels in the
    difference, so only the scale applies).
    """
    atoms = graphs.decomp.fragments[frag_id]
    return float(mask_atoms(graphs, atoms, checkpoint)[0])


def mask_atoms(graphs: HierGraphs, atoms: set[int],
               checkpoint: Checkpoint) -> np.ndarray:
    atom_mask = np.ones(graphs.n_atoms)
    for a in atoms:
        atom_mask[a] = 0.0
    bond_mask = np.ones(graphs.n_bonds)
    for bi, bond in enumerate(graphs.mol.bonds):
        if bond.a1 in atoms and bond.a2 in atoms:
            bond_mask[bi] = 0.0
    base = forward(graphs, checkpoint.params,
                   checkpoint.model_config).prediction_value
    masked = forward(graphs, checkpoint.params, checkpoint.model_config,
                     atom_feature_mask=atom_mask,
                     bond_feature_mask=bond_mask).prediction_value
    diff = base - masked
    if checkpoint.task is TaskKind.REGRESSION:
        diff = diff * checkpoint.standardizer.std
    return diff


def explain(smiles: str, checkpoint: Checkpoint) -> Explanation:
    """Four-level attention weights plus per-fragment contributions."""
    mol = parse_smiles(smiles)
    decomp = fragment_brics(mol)
    graphs = build_hier_graphs(mol, decomp, checkpoint.feature_config)
    trace = forward(graphs, checkpoint.params, checkpoint.model_config)

    cfg = checkpoint.model_config
    reduction = cfg.attention_reduction
    layers = cfg.attention_layers

    atom_raw = _node_attention_scores(
        trace.alphas["atom"], graphs.atom_edge_dst, graphs.atom_edge_src,
        graphs.n_atoms, True, reduction, layers)
    bond_raw = _node_attention_scores(
        trace.alphas["bond"], graphs.bond_edge_dst, graphs.bond_edge_src,
        graphs.n_bonds, True, reduction, layers)
    frag_raw = _node_attention_scores(
        trace.alphas["frag"], graphs.frag_edge_dst, graphs.frag_edge_src,
        graphs.n_frags, True, reduction, layers)
    conn_raw = _node_attention_scores(
        trace.alphas["conn"], graphs.conn_edge_dst, graphs.conn_edge_src,
        graphs.n_conns, True, reduction, layers)

    contributions = np.array([
        mask_fragment(graphs, fi, checkpoint)
        for fi in range(graphs.n_frags)])

    raw_pred = trace.prediction_value
    pred = (checkpoint.standardizer.inverse(raw_pred)[0]
            if checkpoint.task is TaskKind.REGRESSION else raw_pred[0])

    connections = [
        {"frag_a": c.frag_a, "frag_b": c.frag_b, "kind": c.kind.value,
         "weight": float(conn_raw[ci])}
        for ci, c in enumerate(decomp.connections)]

    return Explanation(
        smiles=smiles,
        prediction=float(pred),
        atom_weights=_min_max_scale(atom_raw),
        bond_weights=_min_max_scale(bond_raw),
        frag_weights=frag_raw,
        conn_weights=conn_raw,
        frag_contributions=contributions,
        embedding=trace.penultimate,
        frag_smiles=list(decomp.frag_smiles),
        atoms_in_fragments=[sorted(a) for a in decomp.fragments],
        connections=connections,
        bonds=[(b.a1, b.a2) for b in mol.bonds],
    )


# ---------------------------------------------------------------------------
# structural fragment tests used by the aggregate reports

def fragment_contains_benzene_ring(frag: Molecule) -> bool:
    """Six-membered all-carbon aromatic ring inside the fragment."""
    for ring in frag.rings:
        if len(ring) == 6 and all(
                frag.atoms[a].element == 6 and frag.atoms[a].is_aromatic
                for a in ring):
            return True
    return False


def fragment_is_single_heteroatom(frag: Molecule, element: int) -> bool:
    """One heavy atom of `element` carrying exactly one attachment point."""
    heavy = [a for a in frag.atoms if a.element not in (0, 1)]
    stars = [a for a in frag.atoms if a.element == 0]
    return (len(heavy) == 1 and heavy[0].element == element
            and len(stars) == 1)


def aggregate_substructures(checkpoint: Checkpoint, dataset: Dataset,
                            error_threshold_low: float = 0.1,
                            top_error_fraction: float = 0.2,
                            indices: list[int] | None = None,
                            explanations: dict[int, Explanation] | None = None,
                            ) -> list[FragmentStats]:
    """Fragment statistics over low-error vs high-error predictions.

    High-error molecules are the top `top_error_fraction` by absolute
    error; low-error molecules sit under `error_threshold_low`. For every
    fragment present in the high-error group the table reports the mean
    error / attention weight / contribution over those molecules plus the
    percentage of each group's molecules containing the fragment.
    """
    idx = list(range(len(dataset))) if indices is None else list(indices)
    if not idx:
        raise EmptySelection("no molecules to aggregate")
    explanations = explanations if explanations is not None else {}
    errors: dict[int, float] = {}
    for i in idx:
        rec = dataset.records[i]
        if i not in explanations:
            explanations[i] = explain(rec.smiles, checkpoint)
        errors[i] = abs(explanations[i].prediction - float(rec.targets[0]))

    low = [i for i in idx if errors[i] < error_threshold_low]
    n_high = max(1, int(round(top_error_fraction * len(idx))))
    high = sorted(idx, key=lambda i: -errors[i])[:n_high]
    if not low:
        raise EmptySelection(
            f"no molecule has error below {error_threshold_low}")

    def frag_presence(i: int) -> set[str]:
        return set(explanations[i].frag_smiles)

    low_presence = {i: frag_presence(i) for i in low}
    high_presence = {i: frag_presence(i) for i in high}

    stats: dict[str, dict] = {}
    for i in high:
        exp = explanations[i]
        for fi, smi in enumerate(exp.frag_smiles):
            entry = stats.setdefault(smi, {
                "errors": [], "weights": [], "contribs": []})
            entry["errors"].append(errors[i])
            entry["weights"].append(float(exp.frag_weights[fi]))
            entry["contribs"].append(float(exp.frag_contributions[fi]))

    out = []
    for smi, entry in stats.items():
        pct_low = 100.0 * sum(smi in low_presence[i] for i in low) / len(low)
        pct_high = 100.0 * sum(smi in high_presence[i] for i in high) / len(high)
        out.append(FragmentStats(
            frag_smiles=smi,
            mean_error=float(np.mean(entry["errors"])),
            mean_weight=float(np.mean(entry["weights"])),
            mean_contribution=float(np.mean(entry["contribs"])),
            pct_in_low_error=pct_low,
            pct_in_high_error=pct_high,
            count=len(entry["errors"]),
        ))
    out.sort(key=lambda s: -s.mean_error)
    return out


def write_fragment_stats_csv(stats: list[FragmentStats], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fragment", "error", "weight", "contribution",
                         "pct_in_low_error", "pct_in_high_error",
                         "exclusively_high_error"])
        for s in stats:
            writer.writerow([
                s.frag_smiles, f"{s.mean_error:.4f}", f"{s.mean_weight:.4f}",
                f"{s.mean_contribution:.4f}", f"{s.pct_in_low_error:.2f}",
                f"{s.pct_in_high_error:.2f}",
                "yes" if s.exclusively_high_error else "no"])


def export_embeddings(checkpoint: Checkpoint, dataset: Dataset,
                      out_path: str, indices: list[int] | None = None) -> int:
    """CSV of smiles, target, prediction, e_0..e_{d-1}; returns row count."""
    idx = list(range(len(dataset))) if indices is None else list(indices)
    n_written = 0
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        first = True
        for i in idx:
            rec = dataset.records[i]
            mol = parse_smiles(rec.smiles)
            graphs = build_hier_graphs(mol, fragment_brics(mol),
                                       checkpoint.feature_config)
            trace = forward(graphs, checkpoint.params, checkpoint.model_config)
            pred = trace.prediction_value
            if checkpoint.task is TaskKind.REGRESSION:
                pred = checkpoint.standardizer.inverse(pred)
            emb = trace.penultimate
            if first:
                writer.writerow(["smiles", "target", "prediction",
                                 *[f"e_{k}" for k in range(len(emb))]])
                first = False
            writer.writerow([rec.smiles, float(rec.targets[0]),
                             float(pred[0]), *[f"{v:.8g}" for v in emb]])
            n_written += 1
    return n_written
