"""Cosine transforms, dispersion symbols and the discrete nonlocal operators.

Even 2π-periodic functions are represented on the half-period midpoint grid

    x_n = π (2n - 1) / (2N),   n = 1, ..., N

by N orthonormal cosine coefficients ``Phi(l)``, ``l = 0, ..., N-1``, with
weights ``w(0) = sqrt(1/N)`` and ``w(l) = sqrt(2/N)`` otherwise.  The pair
:func:`cosine_analysis` / :func:`cosine_synthesis` is an exact orthogonal
change of basis on the grid (a scaled DCT-II / DCT-III).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class InvalidGridError(ValueError):
    """Raised for grids too small to carry a cosine expansion."""


class MissingParameterError(ValueError):
    """Raised when a speed-dependent symbol is evaluated without a speed."""


class DispersionModel(str, enum.Enum):
    WHITHAM = "whitham"
    KDV = "kdv"

    @property
    def speed_dependent(self) -> bool:
        return self is DispersionModel.KDV

    @classmethod
    def coerce(cls, value) -> "DispersionModel":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown dispersion model {value!r}; expected 'whitham' or 'kdv'") from None


def symbol(model, k, mu=None):
    """Fourier multiplier of the nonlocal operator at wavenumber(s) ``k``.

    Whitham: ``sqrt(tanh(k)/k)`` (equal to 1 at k = 0).
    KdV (nonlocal form): ``1 / (1 + k**2 / (6 mu))``, needs ``mu > 0``.
    """
    model = DispersionModel.coerce(model)
    k = np.abs(np.asarray(k, dtype=float))
    if model is DispersionModel.WHITHAM:
        out = np.ones_like(k)
        nz = k > 0
        out[nz] = np.sqrt(np.tanh(k[nz]) / k[nz])
    else:
        if mu is None:
            raise MissingParameterError("the KdV symbol depends on the speed; pass mu")
        if mu <= 0:
            raise ValueError(f"the KdV symbol requires mu > 0, got {mu}")
        out = 1.0 / (1.0 + k**2 / (6.0 * mu))
    return out if out.ndim else float(out)


def symbol_mu_derivative(model, k, mu=None):
    """d(symbol)/d(mu); identically zero for Whitham."""
    model = DispersionModel.coerce(model)
    k = np.abs(np.asarray(k, dtype=float))
    if model is DispersionModel.WHITHAM:
        out = np.zeros_like(k)
    else:
        if mu is None:
            raise MissingParameterError("the KdV symbol depends on the speed; pass mu")
        s = 1.0 / (1.0 + k**2 / (6.0 * mu))
        out = s**2 * k**2 / (6.0 * mu**2)
    return out if out.ndim else float(out)


def collocation_grid(n: int) -> np.ndarray:
    if n < 1:
        raise InvalidGridError(f"grid needs at least one point, got {n}")
    return np.pi * (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)


def cosine_weights(n: int) -> np.ndarray:
    w = np.full(n, np.sqrt(2.0 / n))
    w[0] = np.sqrt(1.0 / n)
    return w


@lru_cache(maxsize=32)
def _cosine_table(n: int) -> np.ndarray:
    # table[l, j] = cos(l x_j); read-only because it is shared through the cache
    table = np.cos(np.outer(np.arange(n), collocation_grid(n)))
    table.flags.writeable = False
    return table


@dataclass(frozen=True)
class CosineSpectrum:
    """Orthonormal cosine coefficients of an even 2π-periodic function."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise InvalidGridError("cosine spectrum must be a non-empty 1-D array")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    @property
    def amplitudes(self) -> np.ndarray:
        """Plain cosine-series amplitudes a_l, so that f(x) = sum a_l cos(l x)."""
        return cosine_weights(self.n_modes) * self.coeffs

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "CosineSpectrum":
        a = np.asarray(amplitudes, dtype=float)
        return cls(a / cosine_weights(a.size))

    def padded(self, n: int) -> "CosineSpectrum":
        """Same function expressed with ``n`` modes (zero-pad or truncate)."""
        a = np.zeros(n)
        m = min(n, self.n_modes)
        a[:m] = self.amplitudes[:m]
        return CosineSpectrum.from_amplitudes(a)

    def __call__(self, x) -> np.ndarray:
        return cosine_synthesis(self, x)


def cosine_analysis(values) -> CosineSpectrum:
    """Coefficients ``Phi(l) = w(l) sum_n values_n cos(l x_n)`` of grid data."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if values.ndim != 1 or n < 2:
        raise InvalidGridError(f"cosine analysis needs a 1-D grid with N >= 2, got shape {values.shape}")
    return CosineSpectrum(cosine_weights(n) * (_cosine_table(n) @ values))


def cosine_synthesis(spec: CosineSpectrum, eval_points=None) -> np.ndarray:
    """Evaluate ``sum_l w(l) Phi(l) cos(l x)``; defaults to the native grid."""
    n = spec.n_modes
    if eval_points is None:
        return spec.amplitudes @ _cosine_table(n)
    x = np.asarray(eval_points, dtype=float)
    out = np.cos(np.multiply.outer(x, np.arange(n))) @ spec.amplitudes
    return out if out.ndim else float(out)


def apply_multiplier(spec: CosineSpectrum, model, mu=None) -> CosineSpectrum:
    return CosineSpectrum(symbol(model, np.arange(spec.n_modes), mu) * spec.coeffs)


def operator_matrix(model, n: int, mu=None) -> np.ndarray:
    """Dense matrix of the nonlocal operator acting on collocation values.

    ``M[m, n] = sum_l w(l)^2 symbol(l) cos(l x_n) cos(l x_m)``.
    """
    model = DispersionModel.coerce(model)
    if model is DispersionModel.WHITHAM:
        return _whitham_matrix(n).copy()
    return _matrix_for(symbol(model, np.arange(n), mu), n)


def operator_mu_derivative(model, n: int, mu=None) -> np.ndarray:
    """Derivative of :func:`operator_matrix` with respect to the speed."""
    return _matrix_for(symbol_mu_derivative(model, np.arange(n), mu), n)


def _matrix_for(diag: np.ndarray, n: int) -> np.ndarray:
    table = _cosine_table(n)
    w2 = cosine_weights(n) ** 2
    m = table.T @ ((w2 * diag)[:, None] * table)
    # exact symmetry; the product above is symmetric only to rounding
    return 0.5 * (m + m.T)


@lru_cache(maxsize=16)
def _whitham_matrix(n: int) -> np.ndarray:
    m = _matrix_for(symbol(DispersionModel.WHITHAM, np.arange(n)), n)
    m.flags.writeable = False
    return m
