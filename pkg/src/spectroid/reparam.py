"""Equalizing reparameterization of the wavelength interval.

Given responsivities w on [a,b] and coefficients alpha with
S(l) = <alpha, w(l)> > 0, the change of variable l = phi(omega) with
phi the inverse of theta(l) = C^{-1} integral_a^l S, C = integral_a^b S,
makes the combination of the pulled-back ("equalized") responsivities
w_i(phi(omega)) phi'(omega) constantly equal to C.  An estimator built on
equalized responsivities is neutral-exact: constant spectra round-trip
exactly through their response.

The shortcut system works directly on [a,b] with the normalized
responsivities w_i/S inside the squashing function, avoiding phi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryOrExteriorResponse,
    DependentChannels,
    NonPositiveCombination,
    NotEstimable,
    UnsupportedDimension,
)
from .saddle import SaddleResult, SolverOptions, _newton, _System
from .specfun import Regime, sigma
from .stepfn import StepFunction, ResponseVector, dependence_threshold_ok, gram_matrix
from .zonotope import ZonotopeModel

__all__ = ["Reparameterization", "build_equalization", "equalized_responsivities", "solve_shortcut"]

POSITIVITY_MARGIN_RTOL = 1e-12


@dataclass(frozen=True)
class Reparameterization:
    """Piecewise-linear graph of phi: omega in [0,1] -> lambda in [a,b]."""

    alpha: np.ndarray
    C: float
    omega_knots: np.ndarray   # strictly increasing, first 0, last 1
    lambda_knots: np.ndarray  # the breakpoints of w

    def phi(self, omega) -> np.ndarray:
        return np.interp(omega, self.omega_knots, self.lambda_knots)

    def theta(self, lam) -> np.ndarray:
        return np.interp(lam, self.lambda_knots, self.omega_knots)


def _combination(w: StepFunction, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, float)
    if alpha.size != w.m:
        raise ValueError("alpha length must match channel count")
    return w.values @ alpha


def build_equalization(w: StepFunction, alpha=None) -> Reparameterization:
    """Knot locations of phi from the cumulative integral of S = <alpha, w>."""
    if alpha is None:
        alpha = np.ones(w.m)
    S = _combination(w, alpha)
    margin = POSITIVITY_MARGIN_RTOL * float(np.max(np.abs(S)))
    bad = np.nonzero(S <= margin)[0]
    if bad.size:
        k = int(bad[0])
        raise NonPositiveCombination(
            f"<alpha, w> is not strictly positive on cell {k} "
            f"([{w.breakpoints[k]}, {w.breakpoints[k + 1]}]): S={S[k]}")
    cell = w.widths * S
    C = float(cell.sum())
    omega = np.concatenate([[0.0], np.cumsum(cell) / C])
    omega[-1] = 1.0
    return Reparameterization(alpha=np.asarray(alpha, float), C=C,
                              omega_knots=omega, lambda_knots=w.breakpoints.copy())


def equalized_responsivities(rep: Reparameterization, w: StepFunction) -> StepFunction:
    """The pulled-back responsivities w(phi(omega)) phi'(omega) on [0,1].

    On the segment from knot k-1 to k the slope phi' is C / S_k, so each
    cell value is scaled by C / S_k and per-channel integrals are preserved.
    """
    if rep.lambda_knots.size != w.breakpoints.size or \
            not np.allclose(rep.lambda_knots, w.breakpoints):
        raise ValueError("reparameterization was not built from this responsivity")
    S = _combination(w, rep.alpha)
    vals = w.values * (rep.C / S)[:, None]
    return StepFunction(rep.omega_knots, vals, w.channel_labels)


def solve_shortcut(w: StepFunction, alpha, y0,
                   regime: Regime = Regime.BOUNDED,
                   options: SolverOptions | None = None) -> SaddleResult:
    """Solve the normalized-responsivity system directly on [a,b].

    Finds tau with  integral sigma(<tau, w/S>) w dl = y0  and returns the
    estimate sigma(<tau0, w/S>) on the original breakpoints of w.  This is
    the equalized-responsivity estimate expressed in lambda, without
    computing phi.
    """
    options = options or SolverOptions()
    yv = y0.components if isinstance(y0, ResponseVector) else np.atleast_1d(np.asarray(y0, float))
    if alpha is None:
        alpha = np.ones(w.m)
    S = _combination(w, alpha)
    margin = POSITIVITY_MARGIN_RTOL * float(np.max(np.abs(S)))
    if np.any(S <= margin):
        raise NonPositiveCombination("<alpha, w> must be strictly positive")
    if not dependence_threshold_ok(gram_matrix(w)):
        raise DependentChannels("responsivity channels are linearly dependent")

    inner = w.values / S[:, None]
    if regime is Regime.BOUNDED:
        try:
            if not ZonotopeModel.from_responsivity(w).contains_interior(yv):
                raise BoundaryOrExteriorResponse(
                    "response is on or outside the boundary of the feasible zonotope")
        except UnsupportedDimension:
            pass
        tau_start = np.zeros(w.m)
    else:
        if np.any(w.values < -1e-12):
            raise ValueError("unbounded regime needs nonnegative channels")
        if np.any(yv < 0):
            raise NotEstimable("unbounded responses must be componentwise nonnegative")
        # -c * ones is feasible: <tau, w/S> = -c * sum_i w_i / S < 0
        ysum = float(np.sum(yv))
        total = float(np.sum(w.integrate()))
        c = total / ysum if ysum > 0 else 1.0
        tau_start = -c * np.ones(w.m)
    if options.initial_tau is not None:
        tau_start = np.asarray(options.initial_tau, float)

    sys_ = _System(w.widths, inner, S, regime)
    tau0, iters, hess, cond = _newton(sys_, yv, options, tau_start)

    est_args = inner @ tau0
    est_vals = np.array([[sigma(t, regime)] for t in est_args])
    estimate = StepFunction(w.breakpoints, est_vals)
    residual = np.abs(sys_.G(tau0) - yv)
    return SaddleResult(tau0=tau0, estimate=estimate, response_residual=residual,
                        iterations=iters, hessian_at_solution=hess, regime=regime,
                        condition_estimate=cond)
