"""Independent ground truth for the saddlepoint machinery.

Uniform hit-and-run sampling of the affine cube section {x in [0,1]^n :
W x = y} gives empirical centroids to check the saddlepoint centroid
against, and exact Irwin-Hall / scaled-uniform-sum densities give exact
section volumes for the m = 1 cases.

Randomness comes from numpy's default PCG64 generator; runs are
reproducible given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as _iproduct

import numpy as np
from scipy.linalg import null_space

from .saddle import SolverOptions, solve_saddlepoint
from .specfun import Regime, sigma
from .stepfn import StepFunction, ResponseVector
from .volume import FiniteReduction, reduce_to_grid

__all__ = [
    "SectionSampleStats",
    "interior_start",
    "hit_and_run",
    "irwin_hall_density",
    "scaled_uniform_sum_density",
    "section_volume_exact",
    "empirical_centroid_vs_formula",
    "CentroidComparison",
]

_FEASIBILITY_TOL = 1e-9
_MIN_CHORD = 1e-14


@dataclass(frozen=True)
class SectionSampleStats:
    n: int
    m: int
    sample_count: int
    empirical_centroid: np.ndarray
    standard_errors: np.ndarray
    seed: int
    burn_in: int
    thinning: int
    constraint_violation_max: float
    degenerate_chords: int = 0


def _reduction_stepfn(red: FiniteReduction) -> StepFunction:
    grid = np.linspace(0.0, 1.0, red.n + 1)
    return StepFunction(grid, red.w_jn)


def interior_start(red: FiniteReduction, y) -> np.ndarray:
    """A strictly interior point of the section, from the reduced saddlepoint solve.

    Solving the n-cell saddlepoint system and setting x_j =
    sigma(<tau, w_jn>) gives W x = y with every x_j in (0,1).
    """
    yv = y.components if isinstance(y, ResponseVector) else np.atleast_1d(np.asarray(y, float))
    wn = _reduction_stepfn(red)
    result = solve_saddlepoint(wn, yv, Regime.BOUNDED,
                               SolverOptions(tol_abs=1e-14, tol_rel=1e-13))
    x = np.array([sigma(float(v @ result.tau0)) for v in red.w_jn])
    return x


def _batch_means_se(samples: np.ndarray, batches: int = 50) -> np.ndarray:
    """Batch-means standard error of the per-coordinate chain means.

    Honest under residual autocorrelation of the thinned chain, unlike the
    iid formula, as long as a batch spans several mixing times.
    """
    kept = samples.shape[0]
    b = min(batches, kept)
    if b < 2:
        return np.full(samples.shape[1], np.inf)
    usable = (kept // b) * b
    bm = samples[:usable].reshape(b, usable // b, -1).mean(axis=1)
    return bm.std(axis=0, ddof=1) / math.sqrt(b)


def hit_and_run(red: FiniteReduction, y, start=None, sample_count: int = 10000,
                seed: int = 0, burn_in: int | None = None,
                thinning: int | None = None) -> SectionSampleStats:
    """Uniform sampling of {x in [0,1]^n : W x = y} by hit-and-run.

    Directions are uniform unit vectors in the null space of W (orthonormal
    basis computed once), so the chain never leaves the affine slice; the
    feasible chord along each direction is computed exactly from the
    coordinate bounds.  burn_in and thinning default to 10n and n, a mixing
    heuristic rather than a guarantee.
    """
    yv = y.components if isinstance(y, ResponseVector) else np.atleast_1d(np.asarray(y, float))
    n, m = red.n, red.m
    if n - m < 1:
        raise ValueError("need at least one free dimension (n - m >= 1)")
    if burn_in is None:
        burn_in = 10 * n
    if thinning is None:
        thinning = n
    x = interior_start(red, yv) if start is None else np.asarray(start, float).copy()
    if np.any(x < 0) or np.any(x > 1) or \
            np.max(np.abs(red.W @ x - yv)) > _FEASIBILITY_TOL:
        raise ValueError("start point is not feasible")

    basis = null_space(red.W)          # (n, n-m), orthonormal
    basis_t = np.ascontiguousarray(basis.T)
    rng = np.random.default_rng(seed)
    total_steps = burn_in + sample_count * thinning
    samples = np.empty((sample_count, n))
    kept = 0
    worst = 0.0
    degenerate = 0

    # random numbers drawn in blocks; per-step generator calls dominate
    # the runtime otherwise
    _BLOCK = 4096
    coeffs = np.empty((0, basis.shape[1]))
    unifs = np.empty(0)
    cursor = _BLOCK

    # the direction need not be normalized: the uniform point on the chord
    # only depends on the line through x
    with np.errstate(divide="ignore", invalid="ignore"):
        for step in range(total_steps):
            while True:
                if cursor >= coeffs.shape[0]:
                    coeffs = rng.standard_normal((_BLOCK, basis.shape[1]))
                    unifs = rng.random(_BLOCK)
                    cursor = 0
                d = coeffs[cursor] @ basis_t
                u01 = unifs[cursor]
                cursor += 1
                # chord [t_lo, t_hi] with 0 <= x + t d <= 1 per coordinate;
                # coordinates with d = 0 give harmless +-inf bounds, and the
                # rare 0/0 nan fails the chord-length test and is resampled
                inv = 1.0 / d
                at_zero = -x * inv
                at_one = at_zero + inv
                t_lo = np.minimum(at_zero, at_one).max()
                t_hi = np.maximum(at_zero, at_one).min()
                if t_hi - t_lo >= _MIN_CHORD:
                    break
                degenerate += 1
            x = x + (t_lo + u01 * (t_hi - t_lo)) * d
            np.clip(x, 0.0, 1.0, out=x)
            if step >= burn_in and (step - burn_in) % thinning == thinning - 1:
                viol = float(np.max(np.abs(red.W @ x - yv)))
                assert viol <= _FEASIBILITY_TOL, "chain left the affine slice"
                worst = max(worst, viol)
                samples[kept] = x
                kept += 1

    mean = samples[:kept].mean(axis=0)
    se = _batch_means_se(samples[:kept])
    return SectionSampleStats(n=n, m=m, sample_count=kept,
                              empirical_centroid=mean, standard_errors=se,
                              seed=seed, burn_in=burn_in, thinning=thinning,
                              constraint_violation_max=worst,
                              degenerate_chords=degenerate)


def irwin_hall_density(n: int, x: float) -> float:
    """Exact density of a sum of n iid uniform(0,1) variables.

    f_n(x) = (1/(n-1)!) sum_k (-1)^k C(n,k) (x-k)_+^{n-1}.  Evaluated with
    compensated float summation for small n and with high-precision
    arithmetic when n is large enough for the alternating sum to cancel
    catastrophically in doubles.
    """
    if x < 0.0 or x > n:
        return 0.0
    if n == 1:
        return 1.0
    if n <= 25:
        terms = []
        fact = math.factorial(n - 1)
        for k in range(int(math.floor(x)) + 1):
            terms.append((-1.0) ** k * math.comb(n, k) * (x - k) ** (n - 1) / fact)
        return max(math.fsum(terms), 0.0)
    import mpmath as mp
    with mp.workdps(30 + 2 * n):
        xm = mp.mpf(x)
        total = mp.mpf(0)
        for k in range(int(mp.floor(xm)) + 1):
            total += (-1) ** k * mp.binomial(n, k) * (xm - k) ** (n - 1)
        total /= mp.factorial(n - 1)
        return float(total)


def scaled_uniform_sum_density(weights, y: float) -> float:
    """Exact density of sum_j w_j U_j with U_j iid uniform(0,1), w_j > 0.

    Grouped inclusion-exclusion over the distinct weights:
      f(y) = (1/((n-1)! prod w_j)) sum_k (-1)^{|k|} prod C(m_i, k_i)
             (y - sum k_i v_i)_+^{n-1}
    evaluated in high precision (the alternating sum cancels severely).
    """
    import mpmath as mp
    weights = np.asarray(weights, float)
    if np.any(weights <= 0):
        raise ValueError("weights must be positive")
    n = weights.size
    if y <= 0.0 or y >= float(weights.sum()):
        return 0.0
    vals, counts = np.unique(weights, return_counts=True)
    with mp.workdps(40 + 3 * n):
        ym = mp.mpf(y)
        total = mp.mpf(0)
        ranges = [range(c + 1) for c in counts]
        for ks in _iproduct(*ranges):
            shift = ym - mp.fsum(k * mp.mpf(v) for k, v in zip(ks, vals))
            if shift <= 0:
                continue
            coeff = mp.mpf(1)
            for k, c in zip(ks, counts):
                coeff *= mp.binomial(int(c), int(k))
            total += (-1) ** sum(ks) * coeff * shift ** (n - 1)
        total /= mp.factorial(n - 1)
        for v, c in zip(vals, counts):
            total /= mp.mpf(v) ** int(c)
        return float(total)


def section_volume_exact(red: FiniteReduction, y: float) -> float:
    """Exact (n-1)-volume of {x in Q^n : <W, x> = y} for m = 1.

    Equals ||W||_2 times the density of sum_j W_j U_j at y.
    """
    if red.m != 1:
        raise ValueError("exact section volume implemented for m = 1 only")
    wrow = red.W[0]
    return float(np.linalg.norm(wrow)) * scaled_uniform_sum_density(wrow, float(y))


@dataclass(frozen=True)
class CentroidComparison:
    n: int
    tau0: np.ndarray
    predicted: np.ndarray          # sigma(<tau0, w_jn>) per cell
    empirical: np.ndarray
    standard_errors: np.ndarray
    z_scores: np.ndarray = field(repr=False)
    max_abs_z: float = 0.0
    l1_distance: float = 0.0
    stats: SectionSampleStats | None = None


def empirical_centroid_vs_formula(w: StepFunction, y0, n: int,
                                  samples: int = 10000, seed: int = 0,
                                  burn_in: int | None = None,
                                  thinning: int | None = None) -> CentroidComparison:
    """Per-cell comparison of sampled means against the saddlepoint prediction."""
    yv = y0.components if isinstance(y0, ResponseVector) else np.atleast_1d(np.asarray(y0, float))
    red = reduce_to_grid(w, n)
    result = solve_saddlepoint(w, yv, Regime.BOUNDED)
    predicted = np.array([sigma(float(v @ result.tau0)) for v in red.w_jn])
    stats = hit_and_run(red, yv, sample_count=samples, seed=seed,
                        burn_in=burn_in, thinning=thinning)
    se = np.where(stats.standard_errors > 0, stats.standard_errors, np.inf)
    z = (stats.empirical_centroid - predicted) / se
    l1 = float(np.abs(stats.empirical_centroid - predicted).sum() / n)
    return CentroidComparison(n=n, tau0=result.tau0, predicted=predicted,
                              empirical=stats.empirical_centroid,
                              standard_errors=stats.standard_errors,
                              z_scores=z, max_abs_z=float(np.max(np.abs(z))),
                              l1_distance=l1, stats=stats)
