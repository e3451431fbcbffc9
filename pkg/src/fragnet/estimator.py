"""Scikit-learn style estimators over the graph-attention model.

`FragNetRegressor` / `FragNetClassifier` take sequences of SMILES strings
as X, so they compose with sklearn pipelines, grid search and metrics.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .chem import parse_smiles
from .chem.errors import SmilesError
from .training import (
    Dataset,
    Record,
    TaskKind,
    TrainConfig,
    train_model,
)


def _validate_smiles_input(X) -> list[str]:
    if isinstance(X, str):
        raise ValueError("X must be a sequence of SMILES strings, not one string")
    out = []
    for i, smi in enumerate(X):
        if not isinstance(smi, str) or not smi.strip():
            raise ValueError(f"X[{i}] is not a SMILES string")
        try:
            parse_smiles(smi)
        except SmilesError as err:
            raise ValueError(f"X[{i}] ({smi!r}) failed to parse: {err}") from err
        out.append(smi.strip())
    return out


class _FragNetBase(BaseEstimator):
    def __init__(self, hidden_dim=128, layers_per_graph=2, heads=4,
                 lr=1e-3, batch_size=32, epochs=300, patience=30,
                 dropout=0.1, weight_decay=1e-4,
                 validation_fraction=0.1, seed=0):
        self.hidden_dim = hidden_dim
        self.layers_per_graph = layers_per_graph
        self.heads = heads
        self.lr = lr
        self.batch_size = batch_size
        self.epochs = epochs
        self.patience = patience
        self.dropout = dropout
        self.weight_decay = weight_decay
        self.validation_fraction = validation_fraction
        self.seed = seed

    _task = TaskKind.REGRESSION

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            hidden_dim=self.hidden_dim,
            layers_per_graph=self.layers_per_graph,
            heads=self.heads,
            lr=self.lr,
            batch_size=self.batch_size,
            epochs=self.epochs,
            patience=self.patience,
            dropout=self.dropout,
            weight_decay=self.weight_decay,
            seed=self.seed,
        )

    def fit(self, X, y):
        smiles = _validate_smiles_input(X)
        y = np.asarray(y, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None]
        if len(smiles) != len(y):
            raise ValueError(f"X has {len(smiles)} rows, y has {len(y)}")
        if len(smiles) < 5:
            raise ValueError("need at least 5 molecules to fit")
        records = [Record(s, y[i].copy(), np.isfinite(y[i]).astype(float))
                   for i, s in enumerate(smiles)]
        dataset = Dataset(records, self._task, name="fit")

        rng = np.random.default_rng(self.seed)
        perm = rng.permutation(len(records))
        n_valid = max(1, int(round(self.validation_fraction * len(records))))
        valid_idx = perm[:n_valid].tolist()
        train_idx = perm[n_valid:].tolist()

        ckpt, history = train_model(
            dataset, (train_idx, valid_idx, []), self._train_config())
        self.checkpoint_ = ckpt
        self.history_ = history
        self.n_tasks_ = y.shape[1]
        return self

    def _raw_predict(self, X) -> np.ndarray:
        check_is_fitted(self, "checkpoint_")
        smiles = _validate_smiles_input(X)
        return np.stack([self.checkpoint_.predict_smiles(s) for s in smiles])


class FragNetRegressor(_FragNetBase, RegressorMixin):
    """Molecular property regressor on SMILES input."""

    _task = TaskKind.REGRESSION

    def predict(self, X) -> np.ndarray:
        out = self._raw_predict(X)
        return out[:, 0] if self.n_tasks_ == 1 else out


class FragNetClassifier(_FragNetBase, ClassifierMixin):
    """Binary (optionally multi-task) classifier on SMILES input."""

    _task = TaskKind.BINARY_MULTITASK

    def fit(self, X, y):
        y = np.asarray(y, dtype=np.float64)
        labels = np.unique(y[np.isfinite(y)])
        if not np.isin(labels, (0.0, 1.0)).all():
            raise ValueError("labels must be 0/1")
        super().fit(X, y)
        self.classes_ = np.array([0.0, 1.0])
        return self

    def decision_function(self, X) -> np.ndarray:
        out = self._raw_predict(X)
        return out[:, 0] if self.n_tasks_ == 1 else out

    def predict_proba(self, X) -> np.ndarray:
        logits = self.decision_function(X)
        p = 1.0 / (1.0 + np.exp(-logits))
        if p.ndim == 1:
            return np.stack([1 - p, p], axis=1)
        return p

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(float)
