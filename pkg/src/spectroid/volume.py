"""Cube-section volumes: product Laplace transform and saddlepoint asymptotics.

For the uniform n-grid reduction W (columns W_j = integral of w over the
j'th cell) the Laplace transform of the section-volume function is

    Vol(s) = ||w_1 ^ ... ^ w_m|| * prod_j P(W_j . s)

and the volume of {x in [0,1]^n : W x = y0} has the asymptotic form

    vol(y0) ~ ||w_1 ^ ... ^ w_m|| (n/2pi)^{m/2} det(h''(tau0))^{-1/2}
              * phi_n(tau0) * exp(n h(tau0))

where tau0 and h come from the saddlepoint solve and phi_n corrects for
grid cells that straddle jumps of w (phi_n = 1 on aligned grids).  All
products are accumulated in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .saddle import G_jacobian, SolverOptions, potential_h, solve_saddlepoint
from .specfun import Regime, cumulant_K
from .stepfn import StepFunction, _integral_over

__all__ = ["FiniteReduction", "reduce_to_grid", "vol_transform", "log_vol_transform",
           "phi_n_at", "log_phi_n", "asymptotic_volume", "AsymptoticVolume"]


@dataclass(frozen=True)
class FiniteReduction:
    """Projection of the operator onto the uniform n-grid of [0,1]."""

    n: int
    W: np.ndarray             # (m, n), column j = integral of w over cell j
    exterior_norm: float      # ||w_1 ^ ... ^ w_m|| = sqrt(det(W W^T))

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def w_jn(self) -> np.ndarray:
        """Scaled column vectors n * W_j, shape (n, m)."""
        return self.n * self.W.T

    @property
    def white_point(self) -> np.ndarray:
        return self.W.sum(axis=1)


def reduce_to_grid(w: StepFunction, n: int) -> FiniteReduction:
    """Exact cell integrals of w over the uniform n-grid; lossless when the
    grid contains every breakpoint of w."""
    if n < w.m:
        raise ValueError(f"need n >= m, got n={n}, m={w.m}")
    a, b = w.domain
    if not (abs(a) < 1e-12 and abs(b - 1.0) < 1e-12):
        raise ValueError("reduce_to_grid requires domain [0,1]")
    grid = np.linspace(0.0, 1.0, n + 1)
    W = np.empty((w.m, n))
    for j in range(n):
        W[:, j] = _integral_over(w, grid[j], grid[j + 1])
    gram = W @ W.T
    det = float(np.linalg.det(gram))
    if det <= 0:
        raise ValueError("reduced rows are rank deficient")
    return FiniteReduction(n=n, W=W, exterior_norm=math.sqrt(det))


def log_vol_transform(red: FiniteReduction, s) -> float:
    """log Vol(s); the product over cells is a sum of cumulant values."""
    s = np.asarray(s, float)
    # log P(u) = K(-u)
    args = -(red.W.T @ s)
    return math.log(red.exterior_norm) + float(
        sum(cumulant_K(a) for a in args))


def vol_transform(red: FiniteReduction, s) -> float:
    """Laplace transform of the section-volume function at real s."""
    return math.exp(log_vol_transform(red, s))


def log_phi_n(w: StepFunction, n: int, tau) -> float:
    """log of the jump-correction factor phi_n at real tau.

    Cells on which w is constant contribute 0; a cell straddling jumps
    contributes K(<w_jn, tau>) minus the cell average of K(<tau, w>).
    Exactly 0 when the grid contains every breakpoint of w.
    """
    tau = np.atleast_1d(np.asarray(tau, float))
    grid = np.linspace(0.0, 1.0, n + 1)
    bp = w.breakpoints
    total = 0.0
    for j in range(n):
        lo, hi = grid[j], grid[j + 1]
        i0 = max(np.searchsorted(bp, lo, side="right") - 1, 0)
        i1 = min(np.searchsorted(bp, hi, side="left"), bp.size - 1)
        if i1 - i0 <= 1:
            continue  # single piece covers the cell: term vanishes exactly
        w_jn = np.zeros(w.m)
        avgK = 0.0
        for k in range(i0, i1):
            left, right = max(lo, bp[k]), min(hi, bp[k + 1])
            frac = (right - left) * n
            w_jn += frac * w.values[k]
            avgK += frac * cumulant_K(float(w.values[k] @ tau))
        total += cumulant_K(float(w_jn @ tau)) - avgK
    return total


def phi_n_at(w: StepFunction, n: int, tau) -> float:
    return math.exp(log_phi_n(w, n, tau))


@dataclass(frozen=True)
class AsymptoticVolume:
    log_volume: float
    volume: float            # exp(log_volume); inf/0.0 when unrepresentable
    tau0: np.ndarray
    h_at_tau0: float
    log_phi_n: float


def asymptotic_volume(w: StepFunction, y0, n: int,
                      options: SolverOptions | None = None,
                      with_phi_n: bool = True) -> AsymptoticVolume:
    """Saddlepoint asymptotic volume of the section {x in Q^n : W x = y0}."""
    red = reduce_to_grid(w, n)
    result = solve_saddlepoint(w, y0, Regime.BOUNDED, options)
    tau0 = result.tau0
    h0 = potential_h(w, tau0, y0)
    hess = G_jacobian(w, tau0)  # equals h'' at tau0
    sign, logdet = np.linalg.slogdet(hess)
    if sign <= 0:
        raise AssertionError("h'' must be positive-definite at the saddlepoint")
    lphi = log_phi_n(w, n, tau0) if with_phi_n else 0.0
    m = w.m
    log_vol = (math.log(red.exterior_norm)
               + 0.5 * m * math.log(n / (2.0 * math.pi))
               - 0.5 * logdet
               + lphi
               + n * h0)
    try:
        vol = math.exp(log_vol)
    except OverflowError:
        vol = math.inf
    return AsymptoticVolume(log_volume=log_vol, volume=vol, tau0=tau0,
                            h_at_tau0=h0, log_phi_n=lphi)
