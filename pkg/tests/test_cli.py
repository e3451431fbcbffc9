"""End-to-end CLI coverage using a tiny dataset and checkpoint."""

import json

import numpy as np
import pytest

from fragnet.cli import main
from fragnet.hiergraph import FeatureConfig
from fragnet.model import ModelConfig, init_params
from fragnet.training import (
    Checkpoint,
    Standardizer,
    TaskKind,
    save_checkpoint,
)

TINY_CSV = """smiles,sol
CCO,-0.1
CCCO,-0.4
CCCCO,-0.9
CC(C)O,-0.2
CCN,0.1
CCCN,-0.3
c1ccccc1,-1.5
Cc1ccccc1,-1.9
CCc1ccccc1,-2.4
OCC(O)CO,1.2
CC(=O)O,0.5
CCC(=O)O,0.2
CCOC(=O)C,-0.6
CCCCCC,-3.1
CCCCCCO,-1.4
CCOCC,-0.8
"""


@pytest.fixture(scope="module")
def tiny_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "tiny.csv"
    path.write_text(TINY_CSV)
    return str(path)


@pytest.fixture(scope="module")
def tiny_checkpoint(tmp_path_factory):
    mcfg = ModelConfig(hidden_dim=8, layers_per_graph=1, heads=2)
    fcfg = FeatureConfig()
    ckpt = Checkpoint(
        version=1, task=TaskKind.REGRESSION, model_config=mcfg,
        feature_config=fcfg, params=init_params(mcfg, fcfg, seed=2),
        standardizer=Standardizer(np.array([-0.9]), np.array([1.1])),
        metadata={"note": "test fixture"})
    path = tmp_path_factory.mktemp("ckpt") / "tiny.json"
    save_checkpoint(ckpt, str(path))
    return str(path)


class TestCliBasics:
    def test_usage_error_exit_code(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["predict", "--smiles", "CCO"])  # missing --checkpoint
        assert exc.value.code == 1

    def test_unknown_verb(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_predict_prints_single_value(self, tiny_checkpoint, capsys):
        rc = main(["predict", "--checkpoint", tiny_checkpoint,
                   "--smiles", "CCO"])
        assert rc == 0
        out = capsys.readouterr().out.strip()
        float(out)  # one parseable number

    def test_predict_bad_smiles_is_data_error(self, tiny_checkpoint, capsys):
        rc = main(["predict", "--checkpoint", tiny_checkpoint,
                   "--smiles", "C1CC"])
        assert rc == 2

    def test_missing_checkpoint_is_data_error(self, capsys):
        rc = main(["predict", "--checkpoint", "/nonexistent.json",
                   "--smiles", "CCO"])
        assert rc == 2

    def test_explain_writes_schema_file(self, tiny_checkpoint, tmp_path, capsys):
        out = tmp_path / "exp.json"
        rc = main(["explain", "--checkpoint", tiny_checkpoint,
                   "--smiles", "CCOC(=O)c1ccccc1", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        for key in ("atom_weights", "bond_weights", "fragment_weights",
                    "connection_weights", "fragment_contributions",
                    "atoms_in_fragments", "connections", "prediction"):
            assert key in doc

    def test_evaluate(self, tiny_checkpoint, tiny_csv, capsys):
        rc = main(["evaluate", "--checkpoint", tiny_checkpoint,
                   "--data", tiny_csv, "--target-cols", "sol"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert "rmse" in doc

    def test_embed(self, tiny_checkpoint, tiny_csv, tmp_path, capsys):
        out = tmp_path / "emb.csv"
        rc = main(["embed", "--checkpoint", tiny_checkpoint,
                   "--data", tiny_csv, "--target-cols", "sol",
                   "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 17  # header + 16 rows

    def test_aggregate(self, tiny_checkpoint, tiny_csv, tmp_path, capsys):
        out = tmp_path / "stats.csv"
        rc = main(["aggregate", "--checkpoint", tiny_checkpoint,
                   "--data", tiny_csv, "--target-cols", "sol",
                   "--low-error", "1e9", "--out", str(out)])
        assert rc == 0
        header = out.read_text().splitlines()[0]
        assert header.split(",") == [
            "fragment", "error", "weight", "contribution",
            "pct_in_low_error", "pct_in_high_error", "exclusively_high_error"]

    def test_aggregate_empty_selection_is_data_error(
            self, tiny_checkpoint, tiny_csv, tmp_path):
        rc = main(["aggregate", "--checkpoint", tiny_checkpoint,
                   "--data", tiny_csv, "--target-cols", "sol",
                   "--low-error", "0", "--out", str(tmp_path / "s.csv")])
        assert rc == 2


class TestCliTrain:
    def test_train_end_to_end(self, tiny_csv, tmp_path, capsys):
        cfg = {"hidden_dim": 8, "layers_per_graph": 1, "heads": 2,
               "lr": 0.005, "batch_size": 4, "epochs": 3, "patience": 5,
               "seed": 0, "split": {"kind": "random",
                                    "fractions": [0.7, 0.15, 0.15]}}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        ckpt_path = tmp_path / "model.json"
        hist_path = tmp_path / "hist.csv"
        rc = main(["train", "--data", tiny_csv, "--config", str(cfg_path),
                   "--out", str(ckpt_path), "--target-cols", "sol",
                   "--metrics-csv", str(hist_path)])
        assert rc == 0
        assert ckpt_path.exists() and hist_path.exists()
        doc = json.loads(capsys.readouterr().out)
        assert "test_metrics" in doc
        hist_lines = hist_path.read_text().splitlines()
        assert hist_lines[0] == "epoch,train_loss,valid_metric"
        assert len(hist_lines) == 4
        from fragnet.training import load_checkpoint
        ckpt = load_checkpoint(str(ckpt_path))
        assert np.isfinite(ckpt.predict_smiles("CCO")).all()

    def test_train_missing_column_is_data_error(self, tiny_csv, tmp_path):
        rc = main(["train", "--data", tiny_csv, "--out",
                   str(tmp_path / "m.json"), "--target-cols", "nope"])
        assert rc == 2
