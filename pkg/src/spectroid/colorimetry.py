"""Colorimetry application layer.

Spectra ingestion from CSV, tristimulus computation, the centroid and
Hawkyard reflectance estimators, light-source estimation in the unbounded
regime, and residual statistics over reflectance datasets.

The responsivity handed to the solvers is always the full light-plus-
observer weight w(l) = I(l) * (xbar, ybar, zbar)(l); Illuminant E means
I = 1.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import NotEstimable, SpectroidError
from .reparam import solve_shortcut
from .saddle import SaddleResult, SolverOptions, solve_saddlepoint
from .specfun import Regime
from .stepfn import StepFunction, ResponseVector, apply_operator, common_refinement
from .zonotope import ZonotopeModel

__all__ = [
    "SpectraTable",
    "EstimatorConfig",
    "default_cmf_table",
    "default_lms_matrix",
    "synthetic_reflectance_table",
    "build_responsivity",
    "tristimulus",
    "estimate_reflectance",
    "HawkyardResult",
    "hawkyard_estimate",
    "LightSourceEstimate",
    "estimate_lightsource",
    "ResidualStats",
    "residual_stats",
]

DEFAULT_WINDOW = (400.0, 700.0)


@dataclass(frozen=True)
class SpectraTable:
    """Named spectral columns on a shared uniform wavelength grid."""

    wavelengths: np.ndarray
    columns: dict
    kind: str = "reflectance-set"   # CMF-set | illuminant | reflectance-set | emission-set

    def __post_init__(self):
        wl = np.asarray(self.wavelengths, dtype=float)
        object.__setattr__(self, "wavelengths", wl)
        d = np.diff(wl)
        if wl.size < 2 or not np.allclose(d, d[0], rtol=1e-9):
            raise ValueError("wavelength grid must be uniform")
        cols = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}
        for name, v in cols.items():
            if v.shape != wl.shape:
                raise ValueError(f"column {name!r} does not match the grid")
        object.__setattr__(self, "columns", cols)
        if self.kind == "reflectance-set":
            for name, v in cols.items():
                bad = np.nonzero((v < 0.0) | (v > 1.0))[0]
                if bad.size:
                    raise ValueError(
                        f"reflectance column {name!r} outside [0,1] at rows "
                        f"{(bad + 1).tolist()[:10]}")

    @property
    def delta(self) -> float:
        return float(self.wavelengths[1] - self.wavelengths[0])

    @property
    def names(self) -> list:
        return list(self.columns)

    @staticmethod
    def load_csv(path, kind: str = "reflectance-set") -> "SpectraTable":
        """CSV with header 'wavelength,<name1>,...'; '#' lines are comments."""
        with open(path, newline="") as f:
            rows = [r for r in csv.reader(f)
                    if r and not r[0].lstrip().startswith("#")]
        header = rows[0]
        if header[0].strip().lower() != "wavelength":
            raise ValueError("first CSV column must be 'wavelength'")
        data = np.array([[float(x) for x in r] for r in rows[1:]])
        cols = {name.strip(): data[:, i + 1] for i, name in enumerate(header[1:])}
        return SpectraTable(data[:, 0], cols, kind)

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            out = csv.writer(f)
            out.writerow(["wavelength"] + self.names)
            for i, wl in enumerate(self.wavelengths):
                out.writerow([repr(float(wl))] +
                             [repr(float(self.columns[n][i])) for n in self.names])

    def window(self, a: float, b: float) -> "SpectraTable":
        """Rows whose cells [l, l+delta) lie inside [a, b]."""
        wl = self.wavelengths
        keep = (wl >= a - 1e-9) & (wl + self.delta <= b + 1e-9)
        if not np.any(keep):
            raise ValueError("window selects no rows")
        return SpectraTable(wl[keep], {k: v[keep] for k, v in self.columns.items()},
                            self.kind)

    def to_stepfunction(self, names=None) -> StepFunction:
        names = list(names) if names is not None else self.names
        cols = np.column_stack([self.columns[n] for n in names])
        return StepFunction.from_samples(self.wavelengths, cols, tuple(names))


def _data_path(name: str) -> Path:
    return Path(resources.files("spectroid").joinpath("data", name))


def default_cmf_table() -> SpectraTable:
    """Bundled CIE-1931-style CMF table (analytic-fit approximation)."""
    return SpectraTable.load_csv(_data_path("cie1931_cmf_approx.csv"), kind="CMF-set")


def default_lms_matrix() -> np.ndarray:
    """Bundled Hunt-Pointer-Estevez XYZ -> LMS matrix (reference data)."""
    with open(_data_path("hpe_matrix.json")) as f:
        return np.asarray(json.load(f)["xyz_to_lms"], dtype=float)


def synthetic_reflectance_table() -> SpectraTable:
    return SpectraTable.load_csv(_data_path("synthetic_reflectances.csv"))


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = "centroid"          # centroid | hawkyard
    basis: str = "XYZ"                # XYZ | LMS
    equalize: bool = True
    alpha: np.ndarray | None = None
    lms_matrix: np.ndarray | None = None
    illuminant: str | None = None     # column name in the CMF table, or None for E
    window: tuple = DEFAULT_WINDOW
    tol_abs: float = 1e-12
    tol_rel: float = 1e-10

    @staticmethod
    def from_json(path) -> "EstimatorConfig":
        with open(path) as f:
            raw = json.load(f)
        if "alpha" in raw and raw["alpha"] is not None:
            raw["alpha"] = np.asarray(raw["alpha"], dtype=float)
        if "lms_matrix" in raw and raw["lms_matrix"] is not None:
            raw["lms_matrix"] = np.asarray(raw["lms_matrix"], dtype=float)
        if "window" in raw:
            raw["window"] = tuple(raw["window"])
        return EstimatorConfig(**raw)

    def solver_options(self) -> SolverOptions:
        return SolverOptions(tol_abs=self.tol_abs, tol_rel=self.tol_rel)


def build_responsivity(cmf: SpectraTable, cmf_names=("xbar", "ybar", "zbar"),
                       illuminant=None, window: tuple = DEFAULT_WINDOW,
                       basis_matrix: np.ndarray | None = None) -> StepFunction:
    """Responsivity w = I * CMF on the window, optionally remapped by a 3x3 basis.

    illuminant may be None (Illuminant E, I = 1), a column name in the
    table, or an array on the table's grid.
    """
    tbl = cmf.window(*window)
    cols = np.column_stack([tbl.columns[n] for n in cmf_names])
    if illuminant is not None and not (isinstance(illuminant, str) and illuminant == "E"):
        if isinstance(illuminant, str):
            intens = tbl.columns[illuminant]
        else:
            intens = np.asarray(illuminant, dtype=float)
            if intens.shape != tbl.wavelengths.shape:
                raise ValueError("illuminant array does not match the windowed grid")
        cols = cols * intens[:, None]
    labels = tuple(cmf_names)
    if basis_matrix is not None:
        M = np.asarray(basis_matrix, dtype=float)
        if M.shape != (cols.shape[1],) * 2 or abs(np.linalg.det(M)) < 1e-12:
            raise ValueError("basis matrix must be invertible and square")
        cols = cols @ M.T
        labels = tuple(f"b{i}" for i in range(cols.shape[1]))
    return StepFunction.from_samples(tbl.wavelengths, cols, labels)


def tristimulus(w: StepFunction, reflectance: StepFunction) -> ResponseVector:
    """Response of a reflectance under the responsivity w (exact cell sums)."""
    return apply_operator(w, reflectance)


def estimate_reflectance(w: StepFunction, y, equalize: bool = True, alpha=None,
                         options: SolverOptions | None = None) -> SaddleResult:
    """Centroid reflectance estimate; equalize=True gives the neutral-exact
    variant via the normalized-responsivity shortcut system."""
    if equalize:
        return solve_shortcut(w, alpha, y, Regime.BOUNDED, options)
    return solve_saddlepoint(w, y, Regime.BOUNDED, options)


@dataclass(frozen=True)
class HawkyardResult:
    raw: StepFunction
    clamped: StepFunction
    clamp_fraction: float
    coefficients: np.ndarray


def hawkyard_estimate(w: StepFunction, y) -> HawkyardResult:
    """Linear estimate r = sum_j a_j w_j / S with S = sum_i w_i.

    Solving the 3x3 system (integral w w~^T) a = y makes the raw estimate
    reproduce y exactly, but nothing keeps it inside [0,1]; the clamped
    variant is min(max(raw, 0), 1).
    """
    yv = y.components if isinstance(y, ResponseVector) else np.atleast_1d(np.asarray(y, float))
    S = w.values.sum(axis=1)
    if np.any(S <= 0):
        raise SpectroidError("channel sum must be positive on every cell")
    wtilde = w.values / S[:, None]
    A = (w.values * w.widths[:, None]).T @ wtilde
    try:
        coeff = np.linalg.solve(A, yv)
    except np.linalg.LinAlgError as exc:
        raise SpectroidError("singular Hawkyard system") from exc
    raw_vals = (wtilde @ coeff)[:, None]
    raw = StepFunction(w.breakpoints, raw_vals)
    clamped_vals = np.clip(raw_vals, 0.0, 1.0)
    altered = np.count_nonzero(clamped_vals != raw_vals)
    clamped = StepFunction(w.breakpoints, clamped_vals)
    return HawkyardResult(raw=raw, clamped=clamped,
                          clamp_fraction=altered / w.n_cells,
                          coefficients=coeff)


@dataclass(frozen=True)
class LightSourceEstimate:
    spectrum: StepFunction | None
    estimable: bool
    result: SaddleResult | None
    reason: str = ""


def estimate_lightsource(w: StepFunction, y, equalize: bool = True, alpha=None,
                         options: SolverOptions | None = None) -> LightSourceEstimate:
    """Emission-spectrum estimate in the unbounded regime.

    The image of the feasibility cone is not all of the nonnegative
    orthant; responses outside it produce estimable=False rather than an
    exception.
    """
    try:
        if equalize:
            res = solve_shortcut(w, alpha, y, Regime.UNBOUNDED, options)
        else:
            res = solve_saddlepoint(w, y, Regime.UNBOUNDED, options)
    except NotEstimable as exc:
        return LightSourceEstimate(spectrum=None, estimable=False, result=None,
                                   reason=str(exc))
    return LightSourceEstimate(spectrum=res.estimate, estimable=True, result=res)


@dataclass(frozen=True)
class ResidualStats:
    wavelengths: np.ndarray
    mean_residual_pos: np.ndarray
    mean_residual_neg: np.ndarray
    mean_abs_residual: np.ndarray
    per_sample: list = field(default_factory=list)   # (name, max_abs, mean_abs)
    failures: list = field(default_factory=list)     # (name, message)


def residual_stats(dataset: SpectraTable, w: StepFunction,
                   config: EstimatorConfig | None = None) -> ResidualStats:
    """Estimate every spectrum from its own response and aggregate residuals.

    residual = estimated - true per cell; the decomposition residual =
    residual+ + residual- holds exactly.  Per-sample failures are recorded
    and do not abort the batch.
    """
    config = config or EstimatorConfig()
    a, b = w.domain
    tbl = dataset.window(a, b)
    n_cells = w.n_cells
    sum_pos = np.zeros(n_cells)
    sum_neg = np.zeros(n_cells)
    per_sample = []
    failures = []
    count = 0
    options = config.solver_options()
    for name in tbl.names:
        r_true = tbl.to_stepfunction([name])
        try:
            yy = tristimulus(w, r_true)
            if config.method == "hawkyard":
                est = hawkyard_estimate(w, yy).clamped
            else:
                est = estimate_reflectance(w, yy, equalize=config.equalize,
                                           alpha=config.alpha, options=options).estimate
            est_ref, true_ref = common_refinement(est, r_true)
            resid = est_ref.values[:, 0] - true_ref.values[:, 0]
        except SpectroidError as exc:
            failures.append((name, str(exc)))
            continue
        if resid.size != n_cells:
            # residuals are reported on w's grid; refinement can only add
            # breakpoints when the dataset grid differs from w's
            raise ValueError("dataset grid must match the responsivity grid")
        sum_pos += np.maximum(resid, 0.0)
        sum_neg += np.minimum(resid, 0.0)
        per_sample.append((name, float(np.max(np.abs(resid))),
                           float(np.mean(np.abs(resid)))))
        count += 1
    if count == 0:
        raise SpectroidError("every sample in the batch failed")
    mean_pos = sum_pos / count
    mean_neg = sum_neg / count
    return ResidualStats(wavelengths=w.breakpoints[:-1].copy(),
                         mean_residual_pos=mean_pos,
                         mean_residual_neg=mean_neg,
                         mean_abs_residual=mean_pos - mean_neg,
                         per_sample=per_sample, failures=failures)
