"""scikit-learn style front ends.

``fit`` runs the solver and stores results in trailing-underscore attributes;
``predict`` evaluates the fitted wave at points ``x``.  There is no training
data: ``X`` and ``y`` are accepted and ignored by ``fit`` so the objects slot
into tooling that expects the estimator protocol (``get_params``, ``clone``).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .continuation import ContinuationConfig, solve_at_height, solve_at_speed, trace_branch
from .spectral import DispersionModel
from .steady import DEFAULT_MAX_ITER, DEFAULT_TOL


def _as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim <= 1:
        return check_array(X.reshape(-1, 1)).ravel()
    X = check_array(X)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single column of x positions, got shape {X.shape}")
    return X.ravel()


class TravelingWave(BaseEstimator):
    """Steady wave at a prescribed speed ``mu`` or waveheight ``height``.

    Exactly one of ``mu`` and ``height`` must be set.  The wave is found on
    the arm continued from small amplitude on a fixed ``n_points`` grid.

    Fitted attributes: ``profile_``, ``report_``, ``mu_``, ``height_`` and
    ``coef_`` (orthonormal cosine coefficients).
    """

    def __init__(self, model="whitham", k=1, n_points=64, mu=None, height=None,
                 tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        self.model = model
        self.k = k
        self.n_points = n_points
        self.mu = mu
        self.height = height
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X=None, y=None):
        if (self.mu is None) == (self.height is None):
            raise ValueError("set exactly one of mu and height")
        model = DispersionModel.coerce(self.model)
        cfg = ContinuationConfig(k=self.k, n_initial=self.n_points, n_max=self.n_points,
                                 tol=self.tol, max_iter=self.max_iter)
        if self.mu is not None:
            profile, report = solve_at_speed(model, self.mu, self.n_points, self.k, cfg)
        else:
            profile, report = solve_at_height(model, self.height, self.n_points, self.k, cfg)
        self.profile_ = profile
        self.report_ = report
        self.mu_ = profile.mu
        self.height_ = profile.height
        self.coef_ = np.array(profile.spectrum.coeffs)
        return self

    def predict(self, X):
        """Wave elevation at the positions in ``X`` (1-D or a single column)."""
        check_is_fitted(self, "profile_")
        return self.profile_(_as_points(X))


class BranchTracer(BaseEstimator):
    """Continuation of a bifurcation branch; ``fit`` stores ``branch_``.

    ``predict`` maps heights to speeds by linear interpolation along the
    branch.  Height increases strictly from point to point, so this is well
    defined on both sides of the turning point.
    """

    def __init__(self, model="whitham", k=1, n_initial=64, eps0=0.01, mu_step=2e-3,
                 height_step=1e-2, height_max=0.6, switch_threshold=0.5,
                 tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, n_max=1024, verify=True):
        self.model = model
        self.k = k
        self.n_initial = n_initial
        self.eps0 = eps0
        self.mu_step = mu_step
        self.height_step = height_step
        self.height_max = height_max
        self.switch_threshold = switch_threshold
        self.tol = tol
        self.max_iter = max_iter
        self.n_max = n_max
        self.verify = verify

    def fit(self, X=None, y=None):
        cfg = ContinuationConfig(
            k=self.k, n_initial=self.n_initial, eps0=self.eps0, mu_step=self.mu_step,
            height_step=self.height_step, height_max=self.height_max,
            switch_threshold=self.switch_threshold, tol=self.tol, max_iter=self.max_iter,
            n_max=max(self.n_max, self.n_initial), verify=self.verify)
        self.branch_ = trace_branch(self.model, cfg)
        self.mus_ = self.branch_.mus
        self.heights_ = self.branch_.heights
        self.turning_point_index_ = self.branch_.turning_point_index
        return self

    def predict(self, X):
        """Speed at the heights in ``X``; NaN outside the traced range."""
        check_is_fitted(self, "branch_")
        h = _as_points(X)
        return np.interp(h, self.heights_, self.mus_, left=np.nan, right=np.nan)
