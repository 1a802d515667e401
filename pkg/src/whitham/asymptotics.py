"""Small-amplitude expansions of the k = 1 branches near bifurcation.

Whitham::

    phi(eps) = eps cos x + eps**2 (C1/2 + C2 cos 2x) + O(eps**3)
    mu(eps)  = mu* + eps**2 (C1 + C2) + O(eps**3)

with ``mu* = sqrt(tanh 1)``, ``C1 = 1/(mu* - 1)`` and
``C2 = 1/(2 mu* - sqrt(2 tanh 2))``.  C2 is positive (about +2.80); the
collocation Newton solver confirms the sign, see ``tests/test_asymptotics.py``.

KdV::

    phi(eps) = eps cos x + eps**2 (cos 2x - 3) + O(eps**3)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import DispersionModel

# eps**2 coefficient of the KdV speed, mu = 5/6 + KDV_SPEED_COEFF eps**2 + O(eps**4).
# From the cos(x) component of the third-order balance of the nonlocal KdV operator.
KDV_SPEED_COEFF = -5.0


@dataclass(frozen=True)
class ExpansionCoefficients:
    model: DispersionModel
    mu_star: float
    c1: float
    c2: float | None = None


def whitham_coefficients() -> ExpansionCoefficients:
    mu_star = math.sqrt(math.tanh(1.0))
    c1 = 1.0 / (mu_star - 1.0)
    c2 = 1.0 / (2.0 * mu_star - math.sqrt(2.0 * math.tanh(2.0)))
    return ExpansionCoefficients(DispersionModel.WHITHAM, mu_star, c1, c2)


def kdv_coefficients() -> ExpansionCoefficients:
    # c1 is the mean (cos 0x) eps**2 coefficient, -3, read off the KdV expansion
    return ExpansionCoefficients(DispersionModel.KDV, 5.0 / 6.0, -3.0, None)


def whitham_expansion(eps, x):
    """Second-order Whitham wave at amplitude ``eps`` on points ``x``; returns (values, mu)."""
    c = whitham_coefficients()
    x = np.asarray(x, dtype=float)
    values = eps * np.cos(x) + eps**2 * (0.5 * c.c1 + c.c2 * np.cos(2.0 * x))
    return values, c.mu_star + eps**2 * (c.c1 + c.c2)


def kdv_expansion(eps, x):
    x = np.asarray(x, dtype=float)
    return eps * np.cos(x) + eps**2 * (np.cos(2.0 * x) - 3.0)


def kdv_speed(eps) -> float:
    return 5.0 / 6.0 + KDV_SPEED_COEFF * eps**2
