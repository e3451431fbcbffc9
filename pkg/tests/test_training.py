"""Dataset loading, metrics, checkpoint round-trips, determinism, and a
small overfit run."""

import json

import numpy as np
import pytest

from fragnet.hiergraph import FeatureConfig
from fragnet.training import (
    Checkpoint,
    Dataset,
    EmptyDataset,
    MissingColumn,
    Record,
    Standardizer,
    TaskKind,
    TrainConfig,
    auc_score,
    evaluate,
    load_checkpoint,
    load_csv,
    make_split,
    rmse,
    save_checkpoint,
    train_model,
)


def write_csv(path, rows, header="smiles,sol"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return str(path)


class TestLoadCsv:
    def test_esol_record_count(self):
        from conftest import ESOL_CSV
        ds = load_csv(str(ESOL_CSV), "smiles",
                      ["measured log solubility in mols per litre"])
        assert len(ds) == 1128

    def test_bad_smiles_dropped(self, tmp_path, caplog):
        path = write_csv(tmp_path / "d.csv",
                         ["CCO,1.0", "C1CC,2.0", "CC,0.5"])
        with caplog.at_level("WARNING"):
            ds = load_csv(path, "smiles", ["sol"])
        assert len(ds) == 2
        assert any("dropping row" in r.message for r in caplog.records)

    def test_missing_column(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["CCO,1.0"])
        with pytest.raises(MissingColumn):
            load_csv(path, "smiles", ["nope"])

    def test_empty_dataset(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["C1CC,1.0"])
        with pytest.raises(EmptyDataset):
            load_csv(path, "smiles", ["sol"])

    def test_multitask_masks(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["CCO,1,", "CC,,0"],
                         header="smiles,t1,t2")
        ds = load_csv(path, "smiles", ["t1", "t2"],
                      task=TaskKind.BINARY_MULTITASK)
        assert np.array_equal(ds.records[0].mask, [1, 0])
        assert np.array_equal(ds.records[1].mask, [0, 1])


class TestMetrics:
    def test_perfect_rmse(self):
        assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_constant_auc_is_half(self):
        assert auc_score(np.zeros(10), np.array([0, 1] * 5)) == pytest.approx(0.5)

    def test_auc_hand_fixture(self):
        # derived oracle: count concordant pairs by hand for 6 points
        # scores: 0.9 0.8 0.7 0.6 0.5 0.4 ; labels: 1 0 1 1 0 0
        # positive scores {0.9, 0.7, 0.6}, negative {0.8, 0.5, 0.4}
        # pairs won: 0.9 beats all 3; 0.7 beats 2; 0.6 beats 2 -> 7 of 9
        scores = np.array([0.9, 0.8, 0.7, 0.6, 0.5, 0.4])
        labels = np.array([1, 0, 1, 1, 0, 0])
        assert auc_score(scores, labels) == pytest.approx(7 / 9)

    def test_auc_needs_both_classes(self):
        with pytest.raises(ValueError):
            auc_score(np.array([0.1, 0.2]), np.array([1, 1]))


class TestStandardizer:
    def test_roundtrip_identity(self):
        y = np.random.default_rng(0).normal(3.0, 2.5, (40, 1))
        st = Standardizer.fit(y)
        assert np.abs(st.inverse(st.transform(y)) - y).max() < 1e-12
        z = st.transform(y)
        assert abs(z.mean()) < 1e-12 and abs(z.std() - 1) < 1e-12


def tiny_dataset(n=12) -> Dataset:
    smis = ["CCO", "CCCO", "CCCCO", "CC(C)O", "CCN", "CCCN",
            "c1ccccc1", "Cc1ccccc1", "CCc1ccccc1", "OCC(O)CO",
            "CC(=O)O", "CCC(=O)O"]
    rng = np.random.default_rng(7)
    records = [Record(s, np.array([float(i) / 3 + rng.normal(0, 0.05)]),
                      np.ones(1)) for i, s in enumerate(smis[:n])]
    return Dataset(records, TaskKind.REGRESSION, "tiny")


def quick_config(**kw) -> TrainConfig:
    base = dict(hidden_dim=8, layers_per_graph=1, heads=2, lr=5e-3,
                batch_size=4, epochs=8, patience=8, seed=1,
                split={"kind": "random", "fractions": [0.7, 0.15, 0.15]})
    base.update(kw)
    return TrainConfig.from_dict(base)


class TestTraining:
    def test_deterministic_history(self):
        ds = tiny_dataset()
        cfg = quick_config()
        split = make_split(ds, cfg)
        _, h1 = train_model(ds, split, cfg)
        _, h2 = train_model(ds, split, cfg)
        assert h1 == h2

    def test_checkpoint_roundtrip_bit_exact(self, tmp_path):
        ds = tiny_dataset()
        cfg = quick_config(epochs=2)
        ckpt, _ = train_model(ds, make_split(ds, cfg), cfg)
        p1 = tmp_path / "a.json"
        p2 = tmp_path / "b.json"
        save_checkpoint(ckpt, str(p1))
        ckpt2 = load_checkpoint(str(p1))
        save_checkpoint(ckpt2, str(p2))
        assert p1.read_bytes() == p2.read_bytes()
        for smi in ["CCO", "c1ccccc1", "CC(=O)O"]:
            a = ckpt.predict_smiles(smi)
            b = ckpt2.predict_smiles(smi)
            assert np.array_equal(a, b)

    def test_evaluate_regression(self):
        ds = tiny_dataset()
        cfg = quick_config(epochs=2)
        ckpt, _ = train_model(ds, make_split(ds, cfg), cfg)
        metrics = evaluate(ckpt, ds)
        assert "rmse" in metrics and np.isfinite(metrics["rmse"])

    def test_task_mismatch(self):
        ds = tiny_dataset()
        cfg = quick_config(epochs=1)
        ckpt, _ = train_model(ds, make_split(ds, cfg), cfg)
        clf_ds = Dataset(ds.records, TaskKind.BINARY_MULTITASK, "x")
        from fragnet.training import TaskMismatch
        with pytest.raises(TaskMismatch):
            evaluate(ckpt, clf_ds)

    def test_config_json_keys(self, tmp_path):
        doc = {"hidden_dim": 16, "layers_per_graph": 1, "heads": 2,
               "lr": 0.01, "batch_size": 8, "epochs": 5, "patience": 3,
               "seed": 42, "split": {"kind": "random",
                                     "fractions": [0.6, 0.2, 0.2]}}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        cfg = TrainConfig.from_json_file(str(path))
        out = cfg.to_dict()
        assert all(out[k] == v for k, v in doc.items())

    def test_classification_training_runs(self):
        smis = ["CCO", "CCCO", "c1ccccc1", "Cc1ccccc1", "CCN", "CCCN",
                "CCCC", "CCCCC"]
        rng = np.random.default_rng(0)
        records = [Record(s, np.array([float(i % 2)]), np.ones(1))
                   for i, s in enumerate(smis)]
        ds = Dataset(records, TaskKind.BINARY_MULTITASK, "clf")
        cfg = quick_config(epochs=3)
        ckpt, hist = train_model(ds, make_split(ds, cfg), cfg)
        assert ckpt.task is TaskKind.BINARY_MULTITASK
        metrics = evaluate(ckpt, ds)
        assert 0.0 <= metrics["auc"] <= 1.0
