"""Scalar special functions for the cube-section solver.

Everything here derives from the Laplace transform of a single cell
density: for the bounded regime (reflectances in [0,1]) the cell density
is the indicator of [0,1] with transform P(s) = (1 - exp(-s))/s, cumulant
function K(t) = log(P(-t)) = log((e^t - 1)/t) and squashing function
sigma = K'.  For the unbounded regime (nonnegative spectra) the density
is the indicator of [0, inf) with K(t) = -log(-t) and sigma(t) = -1/t,
defined only for t < 0.

All functions are pure and branch between a Taylor series near the
removable singularity at 0 and overflow-safe closed forms elsewhere.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "Regime",
    "sigma",
    "sigma_prime",
    "cumulant_K",
    "laplace_P",
    "laplace_Phat",
]


class Regime(enum.Enum):
    """Which feasible set the cell density describes."""

    BOUNDED = "bounded"      # cells in [0,1], sigma: R -> (0,1)
    UNBOUNDED = "unbounded"  # cells in [0,inf), sigma(t) = -1/t for t < 0


# Switch to the series below this |t|; closed forms cancel badly near 0.
_SERIES_CUTOFF = 0.25

# Bernoulli-number coefficients of sigma(t) - 1/2 = sum B_{2k} t^{2k-1}/(2k)!
# (odd powers t, t^3, ..., t^13).
_SIGMA_COEFF = (
    1.0 / 12,
    -1.0 / 720,
    1.0 / 30240,
    -1.0 / 1209600,
    1.0 / 47900160,
    -691.0 / 1307674368000,
    7.0 / 523069747200,
)


def _check_unbounded_domain(t: float) -> None:
    if t >= 0.0:
        raise ValueError(f"unbounded regime requires t < 0, got t={t}")


def sigma(t: float, regime: Regime = Regime.BOUNDED) -> float:
    """Squashing function sigma = K'.

    Bounded: (coth(t/2) - 2/t + 1)/2, an increasing bijection R -> (0,1)
    with sigma(0) = 1/2.  Unbounded: -1/t for t < 0, range (0, inf).
    """
    if regime is Regime.UNBOUNDED:
        _check_unbounded_domain(t)
        return -1.0 / t
    at = abs(t)
    if at < _SERIES_CUTOFF:
        t2 = t * t
        acc = 0.0
        for c in reversed(_SIGMA_COEFF):
            acc = acc * t2 + c
        return 0.5 + t * acc
    # sigma(t) = 1/(1 - e^{-t}) - 1/t; evaluate at |t| and reflect,
    # since sigma(t) + sigma(-t) = 1.
    val = 1.0 / (-math.expm1(-at)) - 1.0 / at
    return val if t > 0 else 1.0 - val


def sigma_prime(t: float, regime: Regime = Regime.BOUNDED) -> float:
    """Derivative of the squashing function; equals K''.

    Strictly positive; in the bounded regime it is even with maximum
    sigma_prime(0) = 1/12.
    """
    if regime is Regime.UNBOUNDED:
        _check_unbounded_domain(t)
        return 1.0 / (t * t)
    at = abs(t)
    if at < _SERIES_CUTOFF:
        t2 = t * t
        acc = 0.0
        for k in range(len(_SIGMA_COEFF) - 1, 0, -1):
            acc = acc * t2 + (2 * k + 1) * _SIGMA_COEFF[k]
        return acc * t2 + _SIGMA_COEFF[0]
    # d/dt [1/(1-e^{-t}) - 1/t] = 1/t^2 - e^{-t}/(1-e^{-t})^2, even in t.
    # The two terms cancel near the series cutoff; extended precision keeps
    # the branches consistent to ~1e-16 there.
    if at < 1.0:
        tl = np.longdouble(at)
        u = -np.expm1(-tl)
        return float(1.0 / (tl * tl) - np.exp(-tl) / (u * u))
    u = -math.expm1(-at)
    return 1.0 / (at * at) - math.exp(-at) / (u * u)


# K(t) = t/2 + sum B_{2k} t^{2k} / (2k (2k)!)  (even powers t^2 .. t^14)
_K_COEFF = (
    1.0 / 24,
    -1.0 / 2880,
    1.0 / 181440,
    -1.0 / 9676800,
    1.0 / 479001600,
    -691.0 / 15692092416000,
    1.0 / 1046139494400,
)

# Above this |t| the direct expm1 form loses digits / overflows.
_K_LARGE = 30.0


def cumulant_K(t: float, regime: Regime = Regime.BOUNDED) -> float:
    """Cumulant function K(t) = log((e^t - 1)/t); K(0) = 0.

    Unbounded regime: K(t) = -log(-t) for t < 0.
    """
    if regime is Regime.UNBOUNDED:
        _check_unbounded_domain(t)
        return -math.log(-t)
    at = abs(t)
    if at < _SERIES_CUTOFF:
        t2 = t * t
        acc = 0.0
        for c in reversed(_K_COEFF):
            acc = acc * t2 + c
        return 0.5 * t + acc * t2
    if t > _K_LARGE:
        return t - math.log(t) + math.log1p(-math.exp(-t))
    if t < -_K_LARGE:
        return -math.log(-t) + math.log1p(-math.exp(t))
    return math.log(math.expm1(t) / t)


# P(s) = sum (-s)^k / (k+1)!
_P_COEFF = tuple((-1.0) ** k / math.factorial(k + 1) for k in range(13))
# Phat(s) = ((s-1)e^s + 1)/s^2 = sum_{k>=1} k s^{k-1} / (k+1)!
_PHAT_COEFF = tuple(k / math.factorial(k + 1) for k in range(1, 14))


def laplace_P(s: float) -> float:
    """Laplace transform of the unit-cell indicator: (1 - e^{-s})/s, P(0) = 1."""
    if abs(s) < _SERIES_CUTOFF:
        acc = 0.0
        for c in reversed(_P_COEFF):
            acc = acc * s + c
        return acc
    return -math.expm1(-s) / s


def laplace_Phat(s: float) -> float:
    """First-moment companion of P: ((s-1)e^s + 1)/s^2, with Phat(0) = 1/2.

    This is -P' reflected in the argument, so K'(t) = Phat(t)/P(-t).
    """
    if abs(s) < _SERIES_CUTOFF:
        acc = 0.0
        for c in reversed(_PHAT_COEFF):
            acc = acc * s + c
        return acc
    return ((s - 1.0) * math.exp(s) + 1.0) / (s * s)
