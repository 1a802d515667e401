"""Collocation residual, Jacobian and Newton solvers for steady waves.

The steady equation is enforced at the midpoint collocation nodes in the form

    Whitham:  -mu phi + phi**2 + K phi = 0
    KdV:      -mu phi + L(mu) (phi + phi**2) = 0

where ``K`` is the Whitham operator and ``L(mu)`` the nonlocal (inverted)
KdV operator.  The quadratic term is taken pointwise at the nodes.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .spectral import (
    CosineSpectrum,
    DispersionModel,
    _cosine_table,
    cosine_analysis,
    cosine_synthesis,
    cosine_weights,
    operator_matrix,
    operator_mu_derivative,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 50


class SingularJacobianError(np.linalg.LinAlgError):
    """The Newton linear system could not be solved."""


@dataclass(frozen=True)
class SolverReport:
    converged: bool
    iterations: int
    residual_norms: tuple[float, ...]
    condition_estimate: float | None = None

    @property
    def residual_norm(self) -> float:
        return self.residual_norms[-1] if self.residual_norms else float("nan")


@dataclass(frozen=True)
class WaveProfile:
    """An even 2π-periodic wave with ``k`` crests per period, moving at speed ``mu``."""

    model: DispersionModel
    spectrum: CosineSpectrum
    mu: float
    k: int = 1
    report: SolverReport | None = field(default=None, compare=False)

    @classmethod
    def from_values(cls, values, mu, model, k=1, report=None) -> "WaveProfile":
        return cls(DispersionModel.coerce(model), cosine_analysis(values), float(mu), int(k), report)

    @property
    def n_points(self) -> int:
        return self.spectrum.n_modes

    @property
    def values(self) -> np.ndarray:
        return cosine_synthesis(self.spectrum)

    @property
    def height(self) -> float:
        return waveheight(self)

    def __call__(self, x):
        return cosine_synthesis(self.spectrum, x)

    def resampled(self, n: int) -> "WaveProfile":
        """The same wave on an ``n``-point grid (cosine spectrum zero-padded or cut)."""
        return WaveProfile(self.model, self.spectrum.padded(n), self.mu, self.k, self.report)


def residual(values, mu, model=DispersionModel.WHITHAM) -> np.ndarray:
    model = DispersionModel.coerce(model)
    phi = np.asarray(values, dtype=float)
    op = operator_matrix(model, phi.size, mu)
    if model is DispersionModel.WHITHAM:
        return -mu * phi + phi**2 + op @ phi
    return -mu * phi + op @ (phi + phi**2)


def jacobian(values, mu, model=DispersionModel.WHITHAM) -> np.ndarray:
    """Derivative of :func:`residual` with respect to the nodal values."""
    model = DispersionModel.coerce(model)
    phi = np.asarray(values, dtype=float)
    op = operator_matrix(model, phi.size, mu)
    if model is DispersionModel.WHITHAM:
        jac = op.copy()
        jac[np.diag_indices_from(jac)] += -mu + 2.0 * phi
        return jac
    jac = op * (1.0 + 2.0 * phi)[None, :]
    jac[np.diag_indices_from(jac)] -= mu
    return jac


def residual_mu_derivative(values, mu, model=DispersionModel.WHITHAM) -> np.ndarray:
    model = DispersionModel.coerce(model)
    phi = np.asarray(values, dtype=float)
    if model is DispersionModel.WHITHAM:
        return -phi
    return -phi + operator_mu_derivative(model, phi.size, mu) @ (phi + phi**2)


def height_functional(n: int, k: int = 1) -> np.ndarray:
    """Row vector ``r`` with ``r @ values == phi(0) - phi(pi/k)``."""
    l = np.arange(n)
    return (cosine_weights(n) ** 2 * (1.0 - np.cos(l * np.pi / k))) @ _cosine_table(n)


def waveheight(profile: WaveProfile) -> float:
    """Crest-to-trough height ``phi(0) - phi(pi/k)``."""
    crest, trough = cosine_synthesis(profile.spectrum, np.array([0.0, np.pi / profile.k]))
    return float(crest - trough)


def galilean_shift(values, mu, gamma):
    """Map ``(phi, mu)`` to ``(phi + gamma, mu + 2 gamma)``.

    Returns the shifted values, the shifted speed and the integration constant
    ``gamma (1 - mu - gamma)`` picked up by the Whitham residual.
    """
    values = np.asarray(values, dtype=float)
    return values + gamma, mu + 2.0 * gamma, gamma * (1.0 - mu - gamma)


def _lu_solve(matrix, rhs):
    anorm = np.linalg.norm(matrix, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            lu, piv = scipy.linalg.lu_factor(matrix, check_finite=False)
        except (scipy.linalg.LinAlgWarning, ValueError) as exc:
            raise SingularJacobianError(str(exc)) from exc
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or not np.isfinite(rcond) or rcond < np.finfo(float).eps:
        raise SingularJacobianError(f"Jacobian is numerically singular (rcond={rcond:.3e})")
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False), 1.0 / rcond


def _newton(fun, x0, tol, max_iter, line_search):
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x = np.array(x0, dtype=float)
    r, jac = fun(x)
    norms = [float(np.max(np.abs(r)))]
    cond = None
    iterations = 0
    while norms[-1] > tol and iterations < max_iter:
        if not np.all(np.isfinite(r)):
            break
        dx, cond = _lu_solve(jac, r)
        step = 1.0
        while True:
            trial = x - step * dx
            r_trial, jac_trial = fun(trial)
            norm_trial = float(np.max(np.abs(r_trial)))
            if not line_search or norm_trial < norms[-1] or step < 1e-4:
                break
            step *= 0.5
        x, r, jac = trial, r_trial, jac_trial
        norms.append(norm_trial)
        iterations += 1
    converged = norms[-1] <= tol
    return x, SolverReport(converged, iterations, tuple(norms), cond)


def newton_fixed_speed(initial, mu, model=DispersionModel.WHITHAM, tol=DEFAULT_TOL,
                       max_iter=DEFAULT_MAX_ITER, k=1, line_search=False):
    """Solve the collocation system at fixed speed ``mu``.

    Non-convergence is reported through ``report.converged``; a singular
    Jacobian raises :class:`SingularJacobianError`.
    """
    model = DispersionModel.coerce(model)
    if mu <= 0:
        raise ValueError(f"speed must be positive, got {mu}")

    def fun(phi):
        return residual(phi, mu, model), jacobian(phi, mu, model)

    phi, report = _newton(fun, initial, tol, max_iter, line_search)
    logger.debug("fixed-speed Newton mu=%.6f: %d iterations, residual %.2e",
                 mu, report.iterations, report.residual_norm)
    return WaveProfile.from_values(phi, mu, model, k, report), report


def newton_fixed_height(initial, mu0, target_height, model=DispersionModel.WHITHAM,
                        tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, k=1, line_search=False):
    """Solve for ``(phi, mu)`` with the crest-to-trough height pinned.

    The height constraint is linear in the nodal values, so it enters the
    bordered Jacobian as a constant row.
    """
    model = DispersionModel.coerce(model)
    if target_height <= 0:
        raise ValueError(f"target height must be positive, got {target_height}")
    initial = np.asarray(initial, dtype=float)
    n = initial.size
    row = height_functional(n, k)

    def fun(z):
        phi, mu = z[:n], z[n]
        out = np.empty(n + 1)
        jac = np.zeros((n + 1, n + 1))
        if not mu > 0:
            out[:] = np.nan
            return out, jac
        out[:n] = residual(phi, mu, model)
        out[n] = row @ phi - target_height
        jac[:n, :n] = jacobian(phi, mu, model)
        jac[:n, n] = residual_mu_derivative(phi, mu, model)
        jac[n, :n] = row
        return out, jac

    z, report = _newton(fun, np.append(initial, mu0), tol, max_iter, line_search)
    logger.debug("fixed-height Newton h=%.6f: mu=%.8f after %d iterations",
                 target_height, z[n], report.iterations)
    return WaveProfile.from_values(z[:n], z[n], model, k, report), report
