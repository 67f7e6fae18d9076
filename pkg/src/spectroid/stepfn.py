"""Piecewise-constant vector-valued functions with exact quadrature.

A StepFunction holds strictly increasing breakpoints a = l_0 < ... < l_N = b
and one value vector in R^m per cell.  Values apply on the half-open cell
[l_{k-1}, l_k), with the final cell closed; the convention only matters for
pointwise sampling since every integral is a finite sum of width * value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatch
from .specfun import Regime, sigma

__all__ = [
    "StepFunction",
    "ResponseVector",
    "apply_operator",
    "common_refinement",
    "gram_matrix",
    "project_Pn",
    "linear_combination",
    "squash",
    "dependence_threshold_ok",
]

# Channels are declared dependent when the Gram minimum eigenvalue falls
# below this fraction of trace/m (scale-invariant rank test).
GRAM_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ResponseVector:
    """A point y in R^m with channel labels; the operator's right-hand side."""

    components: np.ndarray
    channel_labels: tuple[str, ...] = ()

    def __post_init__(self):
        comp = np.atleast_1d(np.asarray(self.components, dtype=float))
        object.__setattr__(self, "components", comp)
        if self.channel_labels and len(self.channel_labels) != comp.size:
            raise ValueError("channel_labels length must match components")

    @property
    def m(self) -> int:
        return self.components.size


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant map [a,b] -> R^m.

    breakpoints: shape (N+1,), strictly increasing.
    values: shape (N, m); row k is the value on cell k.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    channel_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("need at least one cell (two breakpoints)")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if vals.shape[0] != bp.size - 1:
            raise ValueError(
                f"{bp.size - 1} cells but {vals.shape[0]} value rows"
            )
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if self.channel_labels and len(self.channel_labels) != vals.shape[1]:
            raise ValueError("channel_labels length must match channel count")

    # ---- basic queries -------------------------------------------------

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def n_cells(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def __call__(self, x) -> np.ndarray:
        """Pointwise values; half-open cells, final cell closed."""
        x = np.asarray(x, dtype=float)
        a, b = self.domain
        if np.any(x < a) or np.any(x > b):
            raise ValueError("sample point outside domain")
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        idx = np.clip(idx, 0, self.n_cells - 1)
        return self.values[idx]

    def integrate(self) -> np.ndarray:
        """Exact integral per channel: sum of width * value."""
        return self.widths @ self.values

    def channel(self, i: int) -> "StepFunction":
        label = (self.channel_labels[i],) if self.channel_labels else ()
        return StepFunction(self.breakpoints, self.values[:, i : i + 1], label)

    def with_values(self, values: np.ndarray, labels: tuple[str, ...] = ()) -> "StepFunction":
        return StepFunction(self.breakpoints, values, labels)

    @staticmethod
    def constant(value, domain=(0.0, 1.0), labels: tuple[str, ...] = ()) -> "StepFunction":
        vals = np.atleast_1d(np.asarray(value, dtype=float))[None, :]
        return StepFunction(np.array(domain, dtype=float), vals, labels)

    @staticmethod
    def from_samples(wavelengths, columns, labels=(), closed_end=True) -> "StepFunction":
        """Tabulated spectra on a uniform grid, one value per wavelength row.

        Row at l_i becomes the value on the cell [l_i, l_i + delta).
        """
        wl = np.asarray(wavelengths, dtype=float)
        cols = np.asarray(columns, dtype=float)
        if cols.ndim == 1:
            cols = cols[:, None]
        deltas = np.diff(wl)
        if wl.size < 2 or not np.allclose(deltas, deltas[0], rtol=1e-9):
            raise ValueError("wavelength grid must be uniform")
        bp = np.append(wl, wl[-1] + deltas[0])
        return StepFunction(bp, cols, tuple(labels))


def _require_same_domain(u: StepFunction, v: StepFunction) -> None:
    if u.domain != v.domain:
        raise DomainMismatch(f"domains differ: {u.domain} vs {v.domain}")


def common_refinement(u: StepFunction, v: StepFunction):
    """Re-express both functions on the union of their breakpoint sets."""
    _require_same_domain(u, v)
    bp = np.union1d(u.breakpoints, v.breakpoints)
    mids = 0.5 * (bp[:-1] + bp[1:])
    uu = StepFunction(bp, u(mids), u.channel_labels)
    vv = StepFunction(bp, v(mids), v.channel_labels)
    return uu, vv


def apply_operator(w: StepFunction, f: StepFunction) -> ResponseVector:
    """The finite-rank operator: y_i = integral of f * w_i, computed exactly."""
    _require_same_domain(w, f)
    if f.m != 1:
        raise ValueError("f must be a single-channel function")
    ww, ff = common_refinement(w, f)
    y = ww.widths @ (ww.values * ff.values)
    return ResponseVector(y, w.channel_labels)


def gram_matrix(w: StepFunction, weight: StepFunction | None = None) -> np.ndarray:
    """Gram matrix G_ij = integral of w_i w_j (optionally weighted)."""
    if weight is not None:
        ww, gg = common_refinement(w, weight)
        eff = ww.widths * gg.values[:, 0]
        vals = ww.values
    else:
        eff = w.widths
        vals = w.values
    return (vals * eff[:, None]).T @ vals


def dependence_threshold_ok(gram: np.ndarray) -> bool:
    """True when the channels pass the scale-invariant independence test."""
    m = gram.shape[0]
    eigs = np.linalg.eigvalsh(gram)
    return bool(eigs[0] >= GRAM_RANK_RTOL * np.trace(gram) / m)


def project_Pn(f: StepFunction, n: int) -> StepFunction:
    """Cell-average projection onto the uniform n-grid of [0,1].

    Piece j takes the value n * integral of f over [ (j-1)/n, j/n ];
    the total integral is preserved exactly.
    """
    if n <= 0:
        raise ValueError("n must be a positive integer")
    a, b = f.domain
    if not (abs(a) < 1e-12 and abs(b - 1.0) < 1e-12):
        raise DomainMismatch("project_Pn requires domain [0,1]; reparameterize first")
    grid = np.linspace(0.0, 1.0, n + 1)
    vals = np.empty((n, f.m))
    for j in range(n):
        vals[j] = n * _integral_over(f, grid[j], grid[j + 1])
    return StepFunction(grid, vals, f.channel_labels)


def _integral_over(f: StepFunction, lo: float, hi: float) -> np.ndarray:
    """Exact integral of f over [lo, hi] inside its domain."""
    bp = f.breakpoints
    i0 = np.searchsorted(bp, lo, side="right") - 1
    i1 = np.searchsorted(bp, hi, side="left")
    i0 = max(i0, 0)
    i1 = min(i1, bp.size - 1)
    total = np.zeros(f.m)
    for k in range(i0, i1):
        left = max(lo, bp[k])
        right = min(hi, bp[k + 1])
        if right > left:
            total += (right - left) * f.values[k]
    return total


def linear_combination(w: StepFunction, t) -> StepFunction:
    """The single-channel function <t, w>, exact per cell."""
    t = np.asarray(t, dtype=float)
    if t.size != w.m:
        raise ValueError("coefficient vector length must match channel count")
    return StepFunction(w.breakpoints, w.values @ t)


def squash(f: StepFunction, regime: Regime = Regime.BOUNDED) -> StepFunction:
    """Apply the squashing function to each cell value of a 1-channel f."""
    if f.m != 1:
        raise ValueError("squash expects a single-channel function")
    vals = np.array([[sigma(v, regime)] for v in f.values[:, 0]])
    return StepFunction(f.breakpoints, vals)
