import json

import numpy as np
import pytest

from proxsim.domain import TrainingSet
from proxsim.gp import GPHyperparameters, fit_gp
from proxsim.linear import fit_linear
from proxsim.serialize import load_model, model_to_dict, save_model


def test_gp_roundtrip_refits_cholesky(tmp_path, unit_domain_2d):
    rng = np.random.default_rng(2)
    X = rng.random((15, 2))
    y = np.sin(4 * X[:, 0]) * np.cos(3 * X[:, 1])
    ts = TrainingSet(unit_domain_2d, X, y[:, None])
    model = fit_gp(ts, GPHyperparameters(np.array([0.4, 0.6]), 1.0, 0.01), optimize=False)
    path = tmp_path / "gp.json"
    save_model(model, path)

    doc = json.loads(path.read_text())
    assert doc["kind"] == "gp"
    assert "L" not in doc and "cholesky" not in json.dumps(doc).lower()

    back = load_model(path)
    Xt = rng.random((20, 2))
    np.testing.assert_allclose(model.predict_arrays(Xt)[0], back.predict_arrays(Xt)[0], rtol=1e-12)
    np.testing.assert_allclose(model.predict_arrays(Xt)[1], back.predict_arrays(Xt)[1], rtol=1e-12)


def test_linear_roundtrip(tmp_path, unit_domain_2d):
    rng = np.random.default_rng(3)
    X = rng.random((30, 2))
    y = 1.0 + 2.0 * X[:, 0] - 0.5 * X[:, 1]
    ts = TrainingSet(unit_domain_2d, X, y[:, None])
    model = fit_linear(ts)
    path = tmp_path / "lin.json"
    save_model(model, path)
    doc = json.loads(path.read_text())
    assert doc["kind"] == "linear"
    back = load_model(path)
    np.testing.assert_allclose(back.beta0, model.beta0)
    np.testing.assert_allclose(back.beta, model.beta)
    Xt = rng.random((5, 2))
    np.testing.assert_allclose(model.predict_arrays(Xt)[0], back.predict_arrays(Xt)[0])


def test_unknown_kind_rejected(tmp_path, unit_domain_2d):
    with pytest.raises(TypeError):
        model_to_dict(object())
