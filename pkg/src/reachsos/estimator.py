"""Estimator-style front end, so reachability analysis composes like a model.

ReachableSetEstimator follows the scikit-learn protocol: hyperparameters in
__init__ (inspectable via get_params / set_params), a fit step that performs
the relaxation solve, and decision_function / predict for querying the
certified outer approximation at state-space points.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .assembly import solve_dual
from .sets import ReachProblem


def check_points(X, n_vars: int) -> np.ndarray:
    """Validate a point array: float, finite, shape (m, n_vars)."""
    pts = np.asarray(X, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != n_vars:
        raise ValueError(f"expected points of shape (m, {n_vars}), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain NaN or infinity")
    return pts


class ReachableSetEstimator(BaseEstimator):
    """Certified outer approximation of a reachable set as a point classifier.

    Parameters
    ----------
    order : even relaxation degree 2r of the certificate polynomials.
    horizon : occupation-mass bound T (ignored when u_zero is set).
    u_zero : pin the mass multiplier to zero (infinite-horizon level set).
    backend : solver backend name.
    feastol, gaptol, max_iter : solver stopping parameters.

    After fit, `certificate_` holds the dual certificate, `u_` and
    `objective_` its scalar diagnostics.  decision_function returns the
    margin v(x) + u*T, nonnegative on every state reachable within the
    horizon; predict thresholds it at zero.
    """

    def __init__(
        self,
        order: int = 6,
        horizon: int = 100,
        u_zero: bool = False,
        backend: str = "interior_point",
        feastol: float = 1e-8,
        gaptol: float = 1e-8,
        max_iter: int = 200,
    ):
        self.order = order
        self.horizon = horizon
        self.u_zero = u_zero
        self.backend = backend
        self.feastol = feastol
        self.gaptol = gaptol
        self.max_iter = max_iter

    def fit(self, problem: ReachProblem, y=None):
        """Solve the relaxation for the given reachability problem."""
        from dataclasses import replace

        problem = replace(problem, horizon=self.horizon, u_zero=self.u_zero)
        outcome = solve_dual(
            problem,
            self.order,
            backend=self.backend,
            feastol=self.feastol,
            gaptol=self.gaptol,
            max_iter=self.max_iter,
        )
        self.problem_ = problem
        self.outcome_ = outcome
        self.certificate_ = outcome.certificate
        self.u_ = outcome.certificate.u
        self.objective_ = outcome.objective
        self.n_features_in_ = problem.n_vars
        return self

    def _require_fitted(self):
        if not hasattr(self, "certificate_"):
            raise NotFittedError(
                "this ReachableSetEstimator is not fitted yet; call fit first"
            )

    def decision_function(self, X) -> np.ndarray:
        """Margin v(x) + u*T; >= 0 on the certified outer approximation."""
        self._require_fitted()
        pts = check_points(X, self.n_features_in_)
        return self.certificate_.margin(pts)

    def predict(self, X) -> np.ndarray:
        """True where a point lies in the certified outer approximation."""
        return self.decision_function(X) >= 0.0

    def score(self, X, y) -> float:
        """Fraction of points whose predicted membership matches y."""
        pred = self.predict(X)
        y = np.asarray(y, dtype=bool).ravel()
        if y.shape != pred.shape:
            raise ValueError(f"y has shape {y.shape}, expected {pred.shape}")
        return float(np.mean(pred == y))
