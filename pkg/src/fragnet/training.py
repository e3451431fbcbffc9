"""Dataset ingestion, training loop, metrics and checkpoint persistence."""

from __future__ import annotations

import base64
import csv
import enum
import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .chem import Molecule, parse_smiles
from .chem.errors import SmilesError
from .fragments import fragment_brics, scaffold_split
from .hiergraph import FeatureConfig, HierGraphs, build_hier_graphs
from .model import ForwardTrace, ModelConfig, forward, init_params

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class TaskKind(enum.Enum):
    REGRESSION = "regression"
    BINARY_MULTITASK = "binary_multitask"


class MissingColumn(ValueError):
    pass


class EmptyDataset(ValueError):
    pass


class TaskMismatch(ValueError):
    pass


@dataclass
class Record:
    smiles: str
    targets: np.ndarray
    mask: np.ndarray  # 1 where the label exists


@dataclass
class Dataset:
    records: list[Record]
    task: TaskKind
    name: str = ""

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n_tasks(self) -> int:
        return len(self.records[0].targets) if self.records else 0

    def targets_matrix(self) -> np.ndarray:
        return np.stack([r.targets for r in self.records])


def load_csv(path: str, smiles_col: str, target_cols: list[str],
             task: TaskKind = TaskKind.REGRESSION, name: str = "") -> Dataset:
    """Read a CSV into a Dataset, dropping rows whose SMILES do not parse.

    Missing labels are masked in multitask sets; a regression row with a
    missing target is dropped.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in [smiles_col, *target_cols]:
            if col not in header:
                raise MissingColumn(f"column {col!r} not in {path}")
        records: list[Record] = []
        for lineno, row in enumerate(reader, start=2):
            smiles = (row[smiles_col] or "").strip()
            try:
                parse_smiles(smiles)
            except SmilesError as err:
                logger.warning("dropping row %d (%s): %s", lineno, smiles, err)
                continue
            targets = np.zeros(len(target_cols))
            mask = np.ones(len(target_cols))
            bad = False
            for i, col in enumerate(target_cols):
                raw = (row[col] or "").strip()
                if raw == "":
                    if task is TaskKind.REGRESSION:
                        logger.warning("dropping row %d: missing %s", lineno, col)
                        bad = True
                        break
                    mask[i] = 0.0
                else:
                    targets[i] = float(raw)
            if not bad:
                records.append(Record(smiles, targets, mask))
    if not records:
        raise EmptyDataset(f"no usable rows in {path}")
    return Dataset(records, task, name or path)


@dataclass
class TrainConfig:
    """Training settings; the JSON config file uses these exact keys."""

    hidden_dim: int = 128
    layers_per_graph: int = 2
    heads: int = 4
    lr: float = 1e-3
    batch_size: int = 32
    epochs: int = 300
    patience: int = 30
    seed: int = 0
    dropout: float = 0.1
    weight_decay: float = 1e-4
    split: dict = field(default_factory=lambda: {
        "kind": "scaffold", "fractions": [0.8, 0.1, 0.1]})

    def to_dict(self) -> dict:
        return {
            "hidden_dim": self.hidden_dim,
            "layers_per_graph": self.layers_per_graph,
            "heads": self.heads,
            "lr": self.lr,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "patience": self.patience,
            "seed": self.seed,
            "dropout": self.dropout,
            "weight_decay": self.weight_decay,
            "split": self.split,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        cfg = cls()
        for key in cfg.to_dict():
            if key in d:
                setattr(cfg, key, d[key])
        return cfg

    @classmethod
    def from_json_file(cls, path: str) -> "TrainConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def model_config(self, n_tasks: int, task: TaskKind) -> ModelConfig:
        return ModelConfig(
            hidden_dim=self.hidden_dim,
            layers_per_graph=self.layers_per_graph,
            heads=self.heads,
            n_tasks=n_tasks,
            task=task.value,
        )


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, targets: np.ndarray) -> "Standardizer":
        std = targets.std(axis=0)
        std = np.where(std < 1e-12, 1.0, std)
        return cls(mean=targets.mean(axis=0), std=std)

    @classmethod
    def identity(cls, n_tasks: int) -> "Standardizer":
        return cls(mean=np.zeros(n_tasks), std=np.ones(n_tasks))

    def transform(self, y: np.ndarray) -> np.ndarray:
        return (y - self.mean) / self.std

    def inverse(self, z: np.ndarray) -> np.ndarray:
        return z * self.std + self.mean


@dataclass
class Checkpoint:
    version: int
    task: TaskKind
    model_config: ModelConfig
    feature_config: FeatureConfig
    params: dict[str, np.ndarray]
    standardizer: Standardizer
    metadata: dict

    def predict_graphs(self, graphs: HierGraphs,
                       destandardize: bool = True, **kwargs) -> np.ndarray:
        trace = forward(graphs, self.params, self.model_config, **kwargs)
        raw = trace.prediction_value
        if destandardize and self.task is TaskKind.REGRESSION:
            return self.standardizer.inverse(raw)
        return raw

    def predict_smiles(self, smiles: str, destandardize: bool = True) -> np.ndarray:
        mol = parse_smiles(smiles)
        graphs = build_hier_graphs(mol, fragment_brics(mol),
                                   self.feature_config)
        return self.predict_graphs(graphs, destandardize=destandardize)

    def trace_smiles(self, smiles: str) -> tuple[HierGraphs, ForwardTrace]:
        mol = parse_smiles(smiles)
        graphs = build_hier_graphs(mol, fragment_brics(mol),
                                   self.feature_config)
        return graphs, forward(graphs, self.params, self.model_config)


def _encode_array(arr: np.ndarray) -> dict:
    return {
        "shape": list(arr.shape),
        "data": base64.b64encode(
            np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii"),
    }


def _decode_array(spec: dict) -> np.ndarray:
    raw = base64.b64decode(spec["data"])
    return np.frombuffer(raw, dtype="<f8").reshape(spec["shape"]).copy()


def save_checkpoint(ckpt: Checkpoint, path: str) -> None:
    doc = {
        "version": ckpt.version,
        "task": ckpt.task.value,
        "model_config": ckpt.model_config.to_dict(),
        "feature_config": ckpt.feature_config.to_dict(),
        "params": {k: _encode_array(v) for k, v in sorted(ckpt.params.items())},
        "standardizer": {
            "mean": ckpt.standardizer.mean.tolist(),
            "std": ckpt.standardizer.std.tolist(),
        },
        "metadata": ckpt.metadata,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))


def load_checkpoint(path: str) -> Checkpoint:
    with open(path) as fh:
        doc = json.load(fh)
    return Checkpoint(
        version=doc["version"],
        task=TaskKind(doc["task"]),
        model_config=ModelConfig.from_dict(doc["model_config"]),
        feature_config=FeatureConfig.from_dict(doc["feature_config"]),
        params={k: _decode_array(v) for k, v in doc["params"].items()},
        standardizer=Standardizer(
            mean=np.asarray(doc["standardizer"]["mean"], dtype=np.float64),
            std=np.asarray(doc["standardizer"]["std"], dtype=np.float64)),
        metadata=doc["metadata"],
    )


# ---------------------------------------------------------------------------
# metrics

def rmse(pred: np.ndarray, truth: np.ndarray) -> float:
    return float(np.sqrt(((np.asarray(pred) - np.asarray(truth)) ** 2).mean()))


def auc_score(scores: np.ndarray, labels: np.ndarray) -> float:
    """Rank-statistic AUC with midrank tie handling."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels > 0.5
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum = ranks[pos].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def evaluate(checkpoint: Checkpoint, dataset: Dataset,
             indices: list[int] | None = None,
             graphs_cache: dict[int, HierGraphs] | None = None) -> dict:
    """Deterministic metrics: per-task RMSE or AUC-ROC plus the mean."""
    if checkpoint.task is not dataset.task:
        raise TaskMismatch(
            f"checkpoint task {checkpoint.task.value} vs dataset "
            f"{dataset.task.value}")
    idx = list(range(len(dataset))) if indices is None else list(indices)
    preds = np.zeros((len(idx), dataset.n_tasks))
    for row, i in enumerate(idx):
        graphs = None if graphs_cache is None else graphs_cache.get(i)
        if graphs is None:
            mol = parse_smiles(dataset.records[i].smiles)
            graphs = build_hier_graphs(mol, fragment_brics(mol),
                                       checkpoint.feature_config)
            if graphs_cache is not None:
                graphs_cache[i] = graphs
        preds[row] = checkpoint.predict_graphs(graphs)
    truth = np.stack([dataset.records[i].targets for i in idx])
    masks = np.stack([dataset.records[i].mask for i in idx])

    if dataset.task is TaskKind.REGRESSION:
        per_task = [rmse(preds[:, t], truth[:, t])
                    for t in range(dataset.n_tasks)]
        return {"per_task_rmse": per_task,
                "rmse": float(np.mean(per_task))}
    per_task = []
    for t in range(dataset.n_tasks):
        use = masks[:, t] > 0
        per_task.append(auc_score(preds[use, t], truth[use, t]))
    return {"per_task_auc": per_task, "auc": float(np.mean(per_task))}


# ---------------------------------------------------------------------------
# training loop

def make_split(dataset: Dataset, config: TrainConfig) -> tuple[list[int], list[int], list[int]]:
    kind = config.split.get("kind", "scaffold")
    fractions = tuple(config.split.get("fractions", (0.8, 0.1, 0.1)))
    if kind == "scaffold":
        mols = [parse_smiles(r.smiles) for r in dataset.records]
        return scaffold_split(mols, fractions)
    if kind == "random":
        rng = np.random.default_rng(config.seed)
        perm = rng.permutation(len(dataset))
        n_train = int(round(fractions[0] * len(dataset)))
        n_valid = int(round(fractions[1] * len(dataset)))
        return (perm[:n_train].tolist(),
                perm[n_train:n_train + n_valid].tolist(),
                perm[n_train + n_valid:].tolist())
    raise ValueError(f"unknown split kind {kind!r}")


def train_model(dataset: Dataset,
                split: tuple[list[int], list[int], list[int]],
                config: TrainConfig,
                seed: int | None = None,
                feature_config: FeatureConfig | None = None,
                log_every: int = 10) -> tuple[Checkpoint, list[dict]]:
    """Train on the split's train part with early stopping on the valid part.

    Returns the checkpoint (best-validation parameters) and the metric
    history (one dict per epoch: epoch, train_loss, valid_metric).
    """
    seed = config.seed if seed is None else seed
    fcfg = feature_config or FeatureConfig()
    train_idx, valid_idx, _ = split
    mcfg = config.model_config(dataset.n_tasks, dataset.task)
    params = init_params(mcfg, fcfg, seed=seed)

    if dataset.task is TaskKind.REGRESSION:
        train_targets = np.stack(
            [dataset.records[i].targets for i in train_idx])
        standardizer = Standardizer.fit(train_targets)
    else:
        standardizer = Standardizer.identity(dataset.n_tasks)

    graphs: dict[int, HierGraphs] = {}
    for i in set(train_idx) | set(valid_idx):
        mol = parse_smiles(dataset.records[i].smiles)
        graphs[i] = build_hier_graphs(mol, fragment_brics(mol), fcfg)

    dropout_rng = np.random.default_rng(seed + 0x5eed)

    def loss_for(i: int, tape: ad.Tape | None) -> ad.Tensor:
        rec = dataset.records[i]
        trace = forward(graphs[i], params, mcfg, tape=tape,
                        dropout=config.dropout, dropout_rng=dropout_rng)
        if dataset.task is TaskKind.REGRESSION:
            target = ad.constant(
                standardizer.transform(rec.targets).reshape(1, -1))
            return ad.mse_loss(trace.prediction, target)
        target = ad.constant(rec.targets.reshape(1, -1))
        return ad.bce_with_logits_loss(trace.prediction, target,
                                       rec.mask.reshape(1, -1))

    state = ad.adam_init(params)
    no_decay = frozenset(k for k in params if k.endswith(".b"))
    shuffle_rng = np.random.default_rng(seed)
    history: list[dict] = []
    best_metric = np.inf
    best_params = {k: v.copy() for k, v in params.items()}
    best_epoch = 0
    start = time.time()

    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(train_idx)
        epoch_loss = 0.0
        for b0 in range(0, len(order), config.batch_size):
            batch = order[b0:b0 + config.batch_size]
            grad_acc: dict[str, np.ndarray] = {}
            for i in batch:
                tape = ad.Tape()
                loss = loss_for(int(i), tape)
                epoch_loss += float(loss.data)
                tape.backward(loss)
                for name, g in tape.grads_by_name().items():
                    if name in grad_acc:
                        grad_acc[name] = grad_acc[name] + g
                    else:
                        grad_acc[name] = g
            scale = 1.0 / len(batch)
            grads = {k: v * scale for k, v in grad_acc.items()}
            ad.adam_step(params, grads, state, lr=config.lr,
                         weight_decay=config.weight_decay, no_decay=no_decay)
        train_loss = epoch_loss / len(order)

        valid_metric = _validation_metric(
            dataset, valid_idx, graphs, params, mcfg, standardizer)
        history.append({"epoch": epoch, "train_loss": train_loss,
                        "valid_metric": valid_metric})
        if valid_metric < best_metric - 1e-12:
            best_metric = valid_metric
            best_params = {k: v.copy() for k, v in params.items()}
            best_epoch = epoch
        if log_every and epoch % log_every == 0:
            logger.info("epoch %d: train_loss %.4f valid %.4f (best %.4f @%d)",
                        epoch, train_loss, valid_metric, best_metric, best_epoch)
        if epoch - best_epoch >= config.patience:
            logger.info("early stop at epoch %d (no improvement since %d)",
                        epoch, best_epoch)
            break

    ckpt = Checkpoint(
        version=CHECKPOINT_VERSION,
        task=dataset.task,
        model_config=mcfg,
        feature_config=fcfg,
        params=best_params,
        standardizer=standardizer,
        metadata={
            "dataset": dataset.name,
            "seed": seed,
            "epochs_run": history[-1]["epoch"] if history else 0,
            "best_epoch": best_epoch,
            "best_valid_metric": best_metric,
            "train_config": config.to_dict(),
            "wall_time_s": round(time.time() - start, 2),
        },
    )
    return ckpt, history


def _validation_metric(dataset, valid_idx, graphs, params, mcfg,
                       standardizer) -> float:
    """Lower-is-better validation score (RMSE, or 1 - mean AUC)."""
    preds = np.zeros((len(valid_idx), dataset.n_tasks))
    for row, i in enumerate(valid_idx):
        trace = forward(graphs[i], params, mcfg)
        preds[row] = trace.prediction_value
    truth = np.stack([dataset.records[i].targets for i in valid_idx])
    if dataset.task is TaskKind.REGRESSION:
        return rmse(standardizer.inverse(preds), truth)
    masks = np.stack([dataset.records[i].mask for i in valid_idx])
    aucs = []
    for t in range(dataset.n_tasks):
        use = masks[:, t] > 0
        labels = truth[use, t]
        if labels.min() > 0.5 or labels.max() < 0.5:
            continue  # one-class validation task; skip
        aucs.append(auc_score(preds[use, t], labels))
    return 1.0 - float(np.mean(aucs)) if aucs else 1.0


def write_history_csv(history: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["epoch", "train_loss", "valid_metric"])
        writer.writeheader()
        writer.writerows(history)
