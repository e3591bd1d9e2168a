import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from spinscatter import PeakRefiner, TransmissionTransformer, solve_scattering
from spinscatter.sweep import resolve_model

KONDO = {"family": "kondo", "s": 0.5, "J": -0.5}


def test_transformer_matches_engine():
    est = TransmissionTransformer(model=KONDO, quantities=("T_i", "T_plus", "p2_bar"), theta_tilde=())
    K = np.geomspace(1e-3, 1.0, 7).reshape(-1, 1)
    out = est.fit(K).transform(K)
    assert out.shape == (7, 6)
    names = list(est.get_feature_names_out())
    assert names == ["K_over_t", "open_i", "open_plus", "T_i", "T_plus", "p2_bar"]
    model = resolve_model(KONDO, 2, 100.0)
    for row, k in zip(out, K.ravel()):
        o = solve_scattering(model, k)
        assert row[3] == pytest.approx(o.T[0]) and row[4] == pytest.approx(o.T[1])


def test_transformer_params_and_clone():
    est = TransmissionTransformer(model="MnPc", N=3)
    assert est.get_params()["N"] == 3
    est2 = clone(est).set_params(N=4)
    assert est2.N == 4 and est.N == 3


def test_transformer_not_fitted():
    with pytest.raises(NotFittedError):
        TransmissionTransformer().transform([[1.0]])


def test_transformer_accepts_1d_input():
    est = TransmissionTransformer(model=KONDO).fit()
    assert est.transform([0.01, 0.1]).shape[0] == 2


def test_peak_refiner():
    grid = np.geomspace(1e-5, 10.0, 200)
    est = PeakRefiner(model=KONDO, quantity="T_plus").fit(grid)
    assert est.peak_.value == pytest.approx(0.222, abs=0.01)
    assert est.predict([est.peak_.K_i])[0] == pytest.approx(est.peak_.value)
    with pytest.raises(ValueError):
        PeakRefiner(model=KONDO).fit([1.0, 2.0])
