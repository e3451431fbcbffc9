"""Hierarchical graph-attention molecular property prediction with
atom, bond, fragment and fragment-connection level interpretability."""

from .chem import parse_smiles
from .estimator import FragNetClassifier, FragNetRegressor
from .fragments import fragment_brics, murcko_scaffold, scaffold_split
from .hiergraph import FeatureConfig, build_hier_graphs
from .interpret import explain
from .model import ModelConfig, forward, init_params
from .training import (
    TrainConfig,
    evaluate,
    load_checkpoint,
    load_csv,
    save_checkpoint,
    train_model,
)

__version__ = "0.1.0"

__all__ = [
    "parse_smiles", "fragment_brics", "murcko_scaffold", "scaffold_split",
    "build_hier_graphs", "FeatureConfig", "ModelConfig", "forward",
    "init_params", "TrainConfig", "train_model", "evaluate", "load_csv",
    "load_checkpoint", "save_checkpoint", "explain",
    "FragNetRegressor", "FragNetClassifier", "__version__",
]
