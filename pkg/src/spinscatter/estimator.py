"""Thin scikit-learn style wrappers over the functional core.

The estimators carry no learned state beyond a validated model, so ``fit``
only resolves and checks the model description.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .sweep import evaluate_point, output_columns, refine_from_grid, resolve_model
from .validation import check_energies


class TransmissionTransformer(TransformerMixin, BaseEstimator):
    """Map a column of kinetic energies K_i (meV) to scattering quantities."""

    def __init__(self, model="MnPc", N=2, t=100.0, quantities=("T_i", "T_plus", "T_minus", "p2_bar"),
                 theta_tilde=(0.0, np.pi / 2, np.pi)):
        self.model = model
        self.N = N
        self.t = t
        self.quantities = quantities
        self.theta_tilde = theta_tilde

    def fit(self, X=None, y=None):
        self.model_ = resolve_model(self.model, self.N, self.t)
        self.feature_names_out_ = np.array(
            output_columns(list(self.quantities), list(self.theta_tilde))[1:], dtype=object
        )
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        energies = check_energies(X)
        rows = [
            evaluate_point(self.model_, K, list(self.quantities), list(self.theta_tilde))[1:]
            for K in energies
        ]
        return np.asarray(rows, dtype=float).reshape(len(energies), -1)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_out_")
        return self.feature_names_out_


class PeakRefiner(BaseEstimator):
    """Locate the maximum of one quantity over a K_i grid, then refine it.

    After ``fit(X)`` the result is in ``peak_``; ``predict`` returns the
    quantity evaluated at new energies.
    """

    def __init__(self, model="MnPc", N=2, t=100.0, quantity="p2_bar", tol=1e-6):
        self.model = model
        self.N = N
        self.t = t
        self.quantity = quantity
        self.tol = tol

    def fit(self, X, y=None):
        energies = check_energies(X)
        if energies.size < 3:
            raise ValueError("peak refinement needs at least three grid points")
        self.model_ = resolve_model(self.model, self.N, self.t)
        values = self.predict(energies)
        self.peak_ = refine_from_grid(self.quantity, self.model_, energies, values, self.tol)
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        energies = check_energies(X)
        return np.array([evaluate_point(self.model_, K, [self.quantity])[-1] for K in energies], dtype=float)
