"""Scikit-learn API conformance of the estimator wrappers."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fragnet.estimator import FragNetClassifier, FragNetRegressor

SMILES = ["CCO", "CCCO", "CCCCO", "CC(C)O", "CCN", "CCCN",
          "c1ccccc1", "Cc1ccccc1", "CCc1ccccc1", "OCC(O)CO",
          "CC(=O)O", "CCC(=O)O", "CCCC", "CCCCC", "CCOCC", "CCOC(=O)C"]


def small_regressor(**kw):
    base = dict(hidden_dim=8, layers_per_graph=1, heads=2, lr=5e-3,
                batch_size=4, epochs=4, patience=6, dropout=0.0,
                weight_decay=0.0, seed=0)
    base.update(kw)
    return FragNetRegressor(**base)


class TestSklearnApi:
    def test_get_set_params_roundtrip(self):
        est = small_regressor()
        params = est.get_params()
        assert params["hidden_dim"] == 8
        est2 = clone(est)
        assert est2.get_params() == params
        est2.set_params(heads=4)
        assert est2.get_params()["heads"] == 4

    def test_fit_predict_shapes(self):
        y = np.linspace(-2, 2, len(SMILES))
        est = small_regressor().fit(SMILES, y)
        preds = est.predict(SMILES[:5])
        assert preds.shape == (5,)
        assert np.isfinite(preds).all()

    def test_not_fitted_raises(self):
        with pytest.raises(NotFittedError):
            small_regressor().predict(["CCO"])

    def test_rejects_bad_inputs(self):
        est = small_regressor()
        with pytest.raises(ValueError):
            est.fit("CCO", [1.0])
        with pytest.raises(ValueError):
            est.fit(["C1CC"] * 6, np.zeros(6))
        with pytest.raises(ValueError):
            est.fit(SMILES, np.zeros(3))

    def test_score_runs(self):
        y = np.linspace(-2, 2, len(SMILES))
        est = small_regressor().fit(SMILES, y)
        assert np.isfinite(est.score(SMILES, y))

    def test_deterministic_given_seed(self):
        y = np.linspace(-2, 2, len(SMILES))
        p1 = small_regressor(seed=7).fit(SMILES, y).predict(SMILES[:3])
        p2 = small_regressor(seed=7).fit(SMILES, y).predict(SMILES[:3])
        assert np.array_equal(p1, p2)


class TestClassifier:
    def test_predict_proba(self):
        y = np.array([0, 1] * 8)
        clf = FragNetClassifier(hidden_dim=8, layers_per_graph=1, heads=2,
                                lr=5e-3, batch_size=4, epochs=3, patience=5,
                                dropout=0.0, weight_decay=0.0, seed=0)
        clf.fit(SMILES, y)
        proba = clf.predict_proba(SMILES[:4])
        assert proba.shape == (4, 2)
        assert np.allclose(proba.sum(axis=1), 1.0)
        preds = clf.predict(SMILES[:4])
        assert set(np.unique(preds)) <= {0.0, 1.0}

    def test_rejects_non_binary_labels(self):
        clf = FragNetClassifier(epochs=1)
        with pytest.raises(ValueError):
            clf.fit(SMILES, np.arange(len(SMILES)))
