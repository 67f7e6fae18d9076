"""Damped-Newton solver for the saddlepoint equation.

The centroid of the solution set {f in Q : L_w f = y0} is sigma(<tau0, w>)
where tau0 solves  integral sigma(<tau, w(x)>) w(x) dx = y0.  The left side
is the gradient of the strictly convex potential

    h(tau) = integral K(<tau, w(x)>) dx - <y0, tau>

so the root is unique and damped Newton with an Armijo backtracking line
search on h converges globally.  The same machinery also solves the
normalized-responsivity shortcut system, where a different function sits
inside sigma than outside: both cases are instances of

    sum_k width_k * scale_k * sigma(<tau, v_k>) * v_k = y0

with scale_k * v_k equal to the responsivity cell values, which keeps the
Jacobian symmetric positive-definite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundaryOrExteriorResponse,
    DependentChannels,
    MaxIterationsExceeded,
    NotEstimable,
    UnsupportedDimension,
)
from .specfun import Regime, cumulant_K, sigma, sigma_prime
from .stepfn import (
    ResponseVector,
    StepFunction,
    dependence_threshold_ok,
    gram_matrix,
    linear_combination,
)
from .zonotope import ZonotopeModel

__all__ = ["SolverOptions", "SaddleResult", "G_map", "G_jacobian", "potential_h", "solve_saddlepoint"]

log = logging.getLogger(__name__)

_COND_WARN = 1e12
_DIVERGE_NORM = 1e8


@dataclass(frozen=True)
class SolverOptions:
    tol_abs: float = 1e-12
    tol_rel: float = 1e-10
    max_iter: int = 200
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    # fraction of the distance to the feasibility-cone boundary the
    # unbounded line search may take
    cone_step_fraction: float = 0.99
    initial_tau: np.ndarray | None = None


@dataclass(frozen=True)
class SaddleResult:
    tau0: np.ndarray
    estimate: StepFunction
    response_residual: np.ndarray
    iterations: int
    hessian_at_solution: np.ndarray
    regime: Regime
    condition_estimate: float = field(default=float("nan"))


def _sigma_vec(t: np.ndarray, regime: Regime) -> np.ndarray:
    return np.array([sigma(ti, regime) for ti in t])


def _sigma_prime_vec(t: np.ndarray, regime: Regime) -> np.ndarray:
    return np.array([sigma_prime(ti, regime) for ti in t])


def _K_vec(t: np.ndarray, regime: Regime) -> np.ndarray:
    return np.array([cumulant_K(ti, regime) for ti in t])


class _System:
    """The finite sums behind G, its Jacobian, and the potential h."""

    def __init__(self, widths, inner, scale, regime):
        self.widths = np.asarray(widths, float)       # (N,)
        self.inner = np.atleast_2d(np.asarray(inner, float))  # (N, m)
        self.scale = np.asarray(scale, float)         # (N,)
        self.regime = regime
        self.weight = self.widths * self.scale        # (N,)

    @property
    def m(self) -> int:
        return self.inner.shape[1]

    def args(self, tau: np.ndarray) -> np.ndarray:
        return self.inner @ tau

    def feasible(self, tau: np.ndarray) -> bool:
        if self.regime is Regime.BOUNDED:
            return True
        return bool(np.all(self.args(tau) < 0.0))

    def G(self, tau: np.ndarray) -> np.ndarray:
        s = _sigma_vec(self.args(tau), self.regime)
        return (self.weight * s) @ self.inner

    def jacobian(self, tau: np.ndarray) -> np.ndarray:
        sp = _sigma_prime_vec(self.args(tau), self.regime)
        wv = self.inner * (self.weight * sp)[:, None]
        return wv.T @ self.inner

    def h(self, tau: np.ndarray, y0: np.ndarray) -> float:
        K = _K_vec(self.args(tau), self.regime)
        return float(self.weight @ K - y0 @ tau)

    def max_step_to_cone(self, tau: np.ndarray, d: np.ndarray) -> float:
        """Largest t with tau + t*d still strictly inside the cone <.,inner> < 0."""
        if self.regime is Regime.BOUNDED:
            return np.inf
        a = self.args(tau)          # all < 0
        da = self.inner @ d
        increasing = da > 0
        if not np.any(increasing):
            return np.inf
        return float(np.min(-a[increasing] / da[increasing]))


def _newton(system: _System, y0: np.ndarray, options: SolverOptions,
            tau_start: np.ndarray) -> tuple[np.ndarray, int, np.ndarray, float]:
    tau = np.asarray(tau_start, float).copy()
    if not system.feasible(tau):
        raise NotEstimable("initial point violates the feasibility cone")
    tol = options.tol_abs + options.tol_rel * np.max(np.abs(y0))
    cond = float("nan")
    for it in range(1, options.max_iter + 1):
        grad = system.G(tau) - y0
        if np.max(np.abs(grad)) <= tol:
            J = system.jacobian(tau)
            return tau, it - 1, J, cond
        J = system.jacobian(tau)
        cond = float(np.linalg.cond(J))
        if cond > _COND_WARN:
            log.warning("Jacobian condition %.3e exceeds %.0e; response near "
                        "the feasible boundary", cond, _COND_WARN)
        d = np.linalg.solve(J, -grad)
        step = 1.0
        cap = system.max_step_to_cone(tau, d)
        if cap < np.inf:
            step = min(step, options.cone_step_fraction * cap)
        h0 = system.h(tau, y0)
        slope = float(grad @ d)  # negative for a descent direction
        # Near the solution the predicted decrease |slope| falls below the
        # float resolution of h and the sufficient-decrease test becomes
        # unverifiable; take the (capped) Newton step, which is safe in the
        # quadratic convergence basin.
        if abs(slope) <= 1e-14 * max(1.0, abs(h0)):
            while step > 1e-16 and not system.feasible(tau + step * d):
                step *= options.backtrack
        else:
            while step > 1e-16:
                cand = tau + step * d
                if system.feasible(cand) and \
                        system.h(cand, y0) <= h0 + options.armijo_c * step * slope:
                    break
                step *= options.backtrack
            else:
                raise NotEstimable("line search stalled at the feasibility boundary")
        tau = tau + step * d
        if np.linalg.norm(tau) > _DIVERGE_NORM:
            raise NotEstimable(
                "iterates diverged: response outside the estimable region")
    raise MaxIterationsExceeded(
        f"no convergence in {options.max_iter} Newton iterations")


def G_map(w: StepFunction, tau, regime: Regime = Regime.BOUNDED) -> ResponseVector:
    """G(tau) = integral sigma(<tau, w(x)>) w(x) dx, an exact finite sum."""
    tau = np.asarray(tau, float)
    sys_ = _System(w.widths, w.values, np.ones(w.n_cells), regime)
    if not sys_.feasible(tau):
        raise NotEstimable("<tau, w> must be negative on every cell (unbounded regime)")
    return ResponseVector(sys_.G(tau), w.channel_labels)


def G_jacobian(w: StepFunction, tau, regime: Regime = Regime.BOUNDED) -> np.ndarray:
    """DG_ij = integral w_i sigma'(<tau, w>) w_j dx; symmetric positive-definite."""
    tau = np.asarray(tau, float)
    sys_ = _System(w.widths, w.values, np.ones(w.n_cells), regime)
    if not sys_.feasible(tau):
        raise NotEstimable("<tau, w> must be negative on every cell (unbounded regime)")
    return sys_.jacobian(tau)


def potential_h(w: StepFunction, tau, y0: ResponseVector | np.ndarray,
                regime: Regime = Regime.BOUNDED) -> float:
    """Convex potential h(tau) = integral K(<tau, w>) dx - <y0, tau>."""
    tau = np.asarray(tau, float)
    yv = y0.components if isinstance(y0, ResponseVector) else np.asarray(y0, float)
    sys_ = _System(w.widths, w.values, np.ones(w.n_cells), regime)
    if not sys_.feasible(tau):
        raise NotEstimable("<tau, w> must be negative on every cell (unbounded regime)")
    return sys_.h(tau, yv)


def _default_unbounded_start(w: StepFunction, y0: np.ndarray) -> np.ndarray:
    # tau = -c * ones is feasible because sum_i w_i >= eps > 0 per cell;
    # pick c so that sigma(<tau,w>) has roughly the magnitude of y0.
    total = float(np.sum(w.integrate()))
    ysum = float(np.sum(y0))
    c = total / ysum if ysum > 0 else 1.0
    return -c * np.ones(w.m)


def solve_saddlepoint(w: StepFunction, y0: ResponseVector | np.ndarray,
                      regime: Regime = Regime.BOUNDED,
                      options: SolverOptions | None = None) -> SaddleResult:
    """Solve the saddlepoint equation G(tau) = y0 and build the centroid estimate.

    Raises DependentChannels, BoundaryOrExteriorResponse (bounded, m <= 3),
    NotEstimable (unbounded divergence), or MaxIterationsExceeded.
    """
    options = options or SolverOptions()
    yv = y0.components if isinstance(y0, ResponseVector) else np.atleast_1d(np.asarray(y0, float))
    if yv.size != w.m:
        raise ValueError("response dimension must match channel count")

    if not dependence_threshold_ok(gram_matrix(w)):
        raise DependentChannels("responsivity channels are linearly dependent")

    if regime is Regime.BOUNDED:
        try:
            if not ZonotopeModel.from_responsivity(w).contains_interior(yv):
                raise BoundaryOrExteriorResponse(
                    "response is on or outside the boundary of the feasible zonotope")
        except UnsupportedDimension:
            pass  # m > 3: attempt the solve, divergence detection applies
        tau_start = np.zeros(w.m)
    else:
        if np.any(w.values < -1e-12) or np.any(w.values.sum(axis=1) <= 0):
            raise ValueError("unbounded regime needs nonnegative channels with positive sum")
        if np.any(yv < 0):
            raise NotEstimable("unbounded responses must be componentwise nonnegative")
        tau_start = _default_unbounded_start(w, yv)

    if options.initial_tau is not None:
        tau_start = np.asarray(options.initial_tau, float)

    sys_ = _System(w.widths, w.values, np.ones(w.n_cells), regime)
    tau0, iters, hess, cond = _newton(sys_, yv, options, tau_start)

    est = linear_combination(w, tau0)
    est_vals = np.array([[sigma(t, regime)] for t in est.values[:, 0]])
    estimate = StepFunction(w.breakpoints, est_vals)
    residual = np.abs(sys_.G(tau0) - yv)
    return SaddleResult(tau0=tau0, estimate=estimate, response_residual=residual,
                        iterations=iters, hessian_at_solution=hess, regime=regime,
                        condition_estimate=cond)
