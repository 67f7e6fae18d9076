"""Command-line interface.

JSON results go to stdout, optional CSV tables to files, diagnostics to
stderr.  Exit codes: 0 success, 2 input error, 3 infeasible response,
4 solver failure.  All floating-point output is printed with 17
significant digits so reruns can be audited byte-for-byte.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import __version__
from .colorimetry import (
    DEFAULT_WINDOW,
    SpectraTable,
    build_responsivity,
    default_cmf_table,
    default_lms_matrix,
    estimate_lightsource,
    estimate_reflectance,
    hawkyard_estimate,
    residual_stats,
    tristimulus,
    EstimatorConfig,
)
from .errors import (
    BoundaryOrExteriorResponse,
    DependentChannels,
    DomainMismatch,
    MaxIterationsExceeded,
    NonPositiveCombination,
    NotEstimable,
    SpectroidError,
    UnsupportedDimension,
)
from .oracle import empirical_centroid_vs_formula, irwin_hall_density, section_volume_exact
from .reparam import build_equalization, equalized_responsivities
from .stepfn import StepFunction, ResponseVector
from .volume import asymptotic_volume, reduce_to_grid
from .zonotope import ZonotopeModel

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4

log = logging.getLogger("spectroid")


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _to_json(obj, indent=0) -> str:
    """Minimal JSON writer printing every float with 17 significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = ",\n".join(
            f'{pad}  "{k}": {_to_json(v, indent + 2).lstrip()}' for k, v in obj.items())
        return f"{pad}{{\n{items}\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        vals = list(obj)
        return pad + "[" + ", ".join(_to_json(v).strip() for v in vals) + "]"
    if isinstance(obj, bool):
        return pad + ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return pad + _fmt(obj)
    if obj is None:
        return pad + "null"
    return pad + '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _emit(payload: dict) -> None:
    print(_to_json(payload))


def _write_csv(path: str, header: list, rows) -> None:
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise SystemExit(f"error: cannot parse vector {text!r}") from exc


def _load_cmf(args) -> SpectraTable:
    if getattr(args, "cmf", None):
        return SpectraTable.load_csv(args.cmf, kind="CMF-set")
    env_dir = os.environ.get("SPECTROID_DATA")
    if env_dir:
        path = os.path.join(env_dir, "cie1931_cmf_approx.csv")
        if os.path.exists(path):
            return SpectraTable.load_csv(path, kind="CMF-set")
    return default_cmf_table()


def _responsivity_from_args(args) -> StepFunction:
    cmf = _load_cmf(args)
    window = tuple(_parse_vector(args.window)) if getattr(args, "window", None) else DEFAULT_WINDOW
    basis = None
    if getattr(args, "basis", "XYZ") == "LMS":
        basis = default_lms_matrix()
    ill = getattr(args, "illuminant", None)
    names = cmf.names[:3]
    return build_responsivity(cmf, cmf_names=names, illuminant=ill,
                              window=window, basis_matrix=basis)


def _load_w(path: str) -> StepFunction:
    tbl = SpectraTable.load_csv(path, kind="CMF-set")
    return tbl.to_stepfunction()


def _estimate_csv_rows(est: StepFunction):
    return zip(est.breakpoints[:-1], est.values[:, 0])


# ---- subcommands ---------------------------------------------------------

def cmd_estimate(args) -> int:
    w = _responsivity_from_args(args)
    y = _parse_vector(args.xyz)
    if args.method == "hawkyard":
        hk = hawkyard_estimate(w, y)
        est = hk.clamped
        payload = {"command": "estimate", "method": "hawkyard",
                   "response": y, "clamp_fraction": hk.clamp_fraction,
                   "coefficients": hk.coefficients}
    else:
        res = estimate_reflectance(w, y, equalize=args.equalize)
        est = res.estimate
        payload = {"command": "estimate", "method": "centroid",
                   "equalize": args.equalize, "response": y,
                   "tau0": res.tau0, "iterations": res.iterations,
                   "max_residual": float(np.max(res.response_residual))}
    check = tristimulus(w, est)
    payload["roundtrip_response"] = check.components
    payload["roundtrip_error"] = float(np.max(np.abs(check.components - y)))
    if args.out:
        _write_csv(args.out, ["wavelength", "reflectance"], _estimate_csv_rows(est))
        payload["out"] = args.out
    _emit(payload)
    return EXIT_OK


def cmd_batch(args) -> int:
    w = _responsivity_from_args(args)
    dataset = SpectraTable.load_csv(args.dataset, kind="reflectance-set")
    config = EstimatorConfig(method=args.method, equalize=args.equalize)
    stats = residual_stats(dataset, w, config)
    payload = {
        "command": "batch", "method": args.method, "equalize": args.equalize,
        "samples": len(stats.per_sample), "failures": [list(f) for f in stats.failures],
        "mean_abs_residual_overall": float(np.mean(stats.mean_abs_residual)),
        "per_sample": [{"name": n, "max_abs": mx, "mean_abs": mn}
                       for n, mx, mn in stats.per_sample],
    }
    if args.out_residuals:
        _write_csv(args.out_residuals,
                   ["wavelength", "mean_residual_pos", "mean_residual_neg", "mean_abs_residual"],
                   zip(stats.wavelengths, stats.mean_residual_pos,
                       stats.mean_residual_neg, stats.mean_abs_residual))
        payload["out_residuals"] = args.out_residuals
    _emit(payload)
    return EXIT_OK


def cmd_inside(args) -> int:
    w = _responsivity_from_args(args)
    y = _parse_vector(args.xyz)
    zono = ZonotopeModel.from_responsivity(w)
    inside = zono.contains_interior(ResponseVector(y))
    _emit({"command": "inside", "response": y, "inside": inside,
           "white_point": zono.white_point})
    return EXIT_OK if inside else EXIT_INFEASIBLE


def cmd_equalize(args) -> int:
    w = _responsivity_from_args(args)
    alpha = _parse_vector(args.alpha) if args.alpha else np.ones(w.m)
    rep = build_equalization(w, alpha)
    weq = equalized_responsivities(rep, w)
    payload = {"command": "equalize", "alpha": alpha, "C": rep.C,
               "knot_count": int(rep.omega_knots.size)}
    if args.out_knots:
        _write_csv(args.out_knots, ["omega", "lambda"],
                   zip(rep.omega_knots, rep.lambda_knots))
        payload["out_knots"] = args.out_knots
    if args.out_equalized:
        _write_csv(args.out_equalized,
                   ["omega"] + [f"w{i + 1}" for i in range(weq.m)],
                   (tuple([weq.breakpoints[k]] + list(weq.values[k]))
                    for k in range(weq.n_cells)))
        payload["out_equalized"] = args.out_equalized
    _emit(payload)
    return EXIT_OK


def cmd_volume(args) -> int:
    w = _load_w(args.w)
    y = _parse_vector(args.y)
    av = asymptotic_volume(w, y, args.n, with_phi_n=not args.no_phi)
    payload = {"command": "volume", "n": args.n, "response": y,
               "log_volume": av.log_volume, "volume": av.volume,
               "tau0": av.tau0, "h_at_tau0": av.h_at_tau0,
               "log_phi_n": av.log_phi_n, "phi_n_applied": not args.no_phi}
    if args.exact_ih:
        red = reduce_to_grid(w, args.n)
        payload["exact_volume"] = section_volume_exact(red, float(y[0]))
    _emit(payload)
    return EXIT_OK


def cmd_verify_centroid(args) -> int:
    w = _load_w(args.w)
    y = _parse_vector(args.y)
    report = empirical_centroid_vs_formula(w, y, args.n, samples=args.samples,
                                           seed=args.seed)
    payload = {"command": "verify-centroid", "n": args.n, "samples": args.samples,
               "seed": args.seed, "tau0": report.tau0,
               "max_abs_z": report.max_abs_z, "l1_distance": report.l1_distance}
    if args.out:
        _write_csv(args.out, ["cell", "predicted", "empirical", "standard_error", "z"],
                   zip(range(report.n), report.predicted, report.empirical,
                       report.standard_errors, report.z_scores))
        payload["out"] = args.out
    _emit(payload)
    print(f"max|z| = {_fmt(report.max_abs_z)}", file=sys.stderr)
    return EXIT_OK


def cmd_lightsource(args) -> int:
    w = _responsivity_from_args(args)
    y = _parse_vector(args.xyz)
    est = estimate_lightsource(w, y, equalize=args.equalize)
    payload = {"command": "lightsource", "response": y, "estimable": est.estimable}
    if est.estimable:
        payload["tau0"] = est.result.tau0
        payload["max_residual"] = float(np.max(est.result.response_residual))
        if args.out:
            _write_csv(args.out, ["wavelength", "power"],
                       _estimate_csv_rows(est.spectrum))
            payload["out"] = args.out
    else:
        payload["reason"] = est.reason
    _emit(payload)
    return EXIT_OK if est.estimable else EXIT_INFEASIBLE


# ---- parser --------------------------------------------------------------

def _add_common_cmf_flags(p) -> None:
    p.add_argument("--cmf", help="CSV of color matching functions (default: bundled table)")
    p.add_argument("--illuminant", default=None,
                   help="illuminant column name, or E for equal energy (default)")
    p.add_argument("--window", default=None, help="wavelength window a,b (default 400,700)")
    p.add_argument("--basis", choices=["XYZ", "LMS"], default="XYZ")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spectroid",
                                 description="Centroid spectral estimation toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--log-level", default="WARNING",
                    choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate a reflectance from a response")
    _add_common_cmf_flags(p)
    p.add_argument("--xyz", required=True, help="response vector, comma separated")
    p.add_argument("--method", choices=["centroid", "hawkyard"], default="centroid")
    p.add_argument("--equalize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", help="write the estimate as CSV")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("batch", help="residual statistics over a reflectance dataset")
    _add_common_cmf_flags(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", choices=["centroid", "hawkyard"], default="centroid")
    p.add_argument("--equalize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--threads", type=int, default=1,
                   help="reserved; per-item work is independent")
    p.add_argument("--out-residuals", help="write per-wavelength residual means as CSV")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("inside", help="test a response for zonotope interior membership")
    _add_common_cmf_flags(p)
    p.add_argument("--xyz", required=True)
    p.set_defaults(func=cmd_inside)

    p = sub.add_parser("equalize", help="emit equalization knots and responsivities")
    _add_common_cmf_flags(p)
    p.add_argument("--alpha", help="combination coefficients, comma separated")
    p.add_argument("--out-knots")
    p.add_argument("--out-equalized")
    p.set_defaults(func=cmd_equalize)

    p = sub.add_parser("volume", help="asymptotic cube-section volume")
    p.add_argument("--w", required=True, help="CSV step-function responsivity on [0,1]")
    p.add_argument("--y", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--no-phi", action="store_true", help="drop the jump correction")
    p.add_argument("--exact-ih", action="store_true",
                   help="also report the exact m=1 section volume")
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("verify-centroid", help="hit-and-run check of the centroid formula")
    p.add_argument("--w", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1,
                   help="reserved; chains merge as pure reductions")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_centroid)

    p = sub.add_parser("lightsource", help="unbounded light-source estimate")
    _add_common_cmf_flags(p)
    p.add_argument("--xyz", required=True)
    p.add_argument("--equalize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lightsource)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), stream=sys.stderr)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError, DomainMismatch, DependentChannels,
            UnsupportedDimension) as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (BoundaryOrExteriorResponse, NotEstimable, NonPositiveCombination) as exc:
        print(f"error: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (MaxIterationsExceeded, SpectroidError) as exc:
        print(f"error: solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
