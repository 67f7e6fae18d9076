"""End-to-end acceptance checks, one per shipped guarantee.

Each test prints a single PASS/FAIL line (run pytest with -s or read the
captured output) and asserts the same condition.
"""

import math
import time

import numpy as np
import pytest

from spectroid.cli import main as cli_main
from spectroid.colorimetry import (
    build_responsivity,
    default_cmf_table,
    estimate_lightsource,
    estimate_reflectance,
    hawkyard_estimate,
    tristimulus,
)
from spectroid.errors import BoundaryOrExteriorResponse, DependentChannels
from spectroid.oracle import (
    empirical_centroid_vs_formula,
    irwin_hall_density,
    section_volume_exact,
)
from spectroid.reparam import build_equalization, equalized_responsivities
from spectroid.saddle import G_jacobian, G_map, SolverOptions, solve_saddlepoint
from spectroid.specfun import _SERIES_CUTOFF, cumulant_K, sigma
from spectroid.stepfn import StepFunction, apply_operator
from spectroid.volume import asymptotic_volume, reduce_to_grid

TIGHT = SolverOptions(tol_abs=1e-14, tol_rel=1e-13)


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def _random_w(rng, m: int) -> StepFunction:
    pieces = int(rng.integers(max(2, m), 8))
    inner = np.sort(rng.uniform(0.05, 0.95, pieces - 1))
    bp = np.concatenate([[0.0], inner, [1.0]])
    vals = rng.uniform(0.05, 2.0, (pieces, m))
    return StepFunction(bp, vals)


def _interior_response(rng, w: StepFunction) -> np.ndarray:
    f = StepFunction(w.breakpoints, rng.uniform(0.05, 0.95, (w.n_cells, 1)))
    return apply_operator(w, f).components


def test_criterion_01_squashing_identities():
    t0 = time.time()
    ok = sigma(0.0) == 0.5
    ts = np.linspace(-30.0, 30.0, 1000)
    h = 1e-6
    worst_refl = max(abs(sigma(t) + sigma(-t) - 1.0) for t in ts)
    worst_fd = max(abs(sigma(t) - (cumulant_K(t + h) - cumulant_K(t - h)) / (2 * h))
                   for t in ts)
    ok = ok and worst_refl <= 1e-6 and worst_fd <= 1e-6
    # series/closed-form agreement across the branch cutoff
    worst_branch = 0.0
    for t in np.linspace(_SERIES_CUTOFF / 2, 2 * _SERIES_CUTOFF, 200):
        closed = float(1.0 / -np.expm1(-np.longdouble(t)) - 1.0 / np.longdouble(t))
        worst_branch = max(worst_branch, abs(sigma(t) / closed - 1.0))
    ok = ok and worst_branch <= 1e-13
    dt = time.time() - t0
    _report(1, ok and dt < 1.0,
            f"sigma(0)=1/2, reflection {worst_refl:.2e}, sigma=K' FD {worst_fd:.2e}, "
            f"branch {worst_branch:.2e} rel, {dt:.2f}s")


def test_criterion_02_exact_response_1000_cases():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    worst_resid = 0.0
    worst_spread = 0.0
    for case in range(1000):
        m = 1 + case % 3
        w = _random_w(rng, m)
        y = _interior_response(rng, w)
        res = solve_saddlepoint(w, y, options=TIGHT)
        back = apply_operator(w, res.estimate).components
        worst_resid = max(worst_resid,
                          float(np.max(np.abs(back - y)) / np.max(np.abs(y))))
        taus = [res.tau0]
        for _ in range(4):
            start = rng.uniform(-3.0, 3.0, m)
            alt = solve_saddlepoint(
                w, y, options=SolverOptions(tol_abs=1e-14, tol_rel=1e-13,
                                            initial_tau=start))
            taus.append(alt.tau0)
        spread = float(np.max(np.abs(np.array(taus) - taus[0])))
        worst_spread = max(worst_spread, spread)
    dt = time.time() - t0
    ok = worst_resid <= 1e-9 and worst_spread <= 1e-8 and dt < 30.0
    _report(2, ok, f"1000 cases, worst relative residual {worst_resid:.2e}, "
                   f"worst 5-start tau spread {worst_spread:.2e}, {dt:.1f}s")


def test_criterion_03_half_white_fixed_point():
    rng = np.random.default_rng(3)
    ws = [StepFunction(np.array([0.0, 0.5, 1.0]), np.array([[2.0], [1.0]])),
          _random_w(rng, 2), _random_w(rng, 3),
          build_responsivity(default_cmf_table())]
    worst_tau = 0.0
    worst_est = 0.0
    for w in ws:
        res = solve_saddlepoint(w, 0.5 * w.integrate(), options=TIGHT)
        worst_tau = max(worst_tau, float(np.max(np.abs(res.tau0))))
        worst_est = max(worst_est, float(np.max(np.abs(res.estimate.values - 0.5))))
    ok = worst_tau <= 1e-10 and worst_est <= 1e-10
    _report(3, ok, f"y=white/2 on {len(ws)} responsivity sets: "
                   f"max|tau0| {worst_tau:.2e}, max|estimate-1/2| {worst_est:.2e}")


def test_criterion_04_jacobian_correctness():
    rng = np.random.default_rng(4)
    eps = 1e-6
    worst = 0.0
    min_eig = np.inf
    for _ in range(100):
        m = 1 + int(rng.integers(0, 3))
        w = _random_w(rng, m)
        tau = rng.uniform(-2.0, 2.0, m)
        J = G_jacobian(w, tau)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(J)[0]))
        for j in range(m):
            e = np.zeros(m)
            e[j] = eps
            fd = (G_map(w, tau + e).components
                  - G_map(w, tau - e).components) / (2 * eps)
            worst = max(worst, float(np.max(np.abs(fd - J[:, j]))))
    ok = worst <= 1e-6 and min_eig > 0.0
    _report(4, ok, f"100 cases: max elementwise FD error {worst:.2e}, "
                   f"min eigenvalue {min_eig:.2e}")


def test_criterion_05_main_theorem_oracle():
    t0 = time.time()
    w1 = StepFunction(np.array([0.0, 0.5, 1.0]), np.array([[2.0], [1.0]]))
    c1 = empirical_centroid_vs_formula(w1, np.array([1.0]), n=64,
                                       samples=100000, seed=5, thinning=8)
    w2 = StepFunction(np.array([0.0, 0.5, 1.0]),
                      np.array([[1.0, 0.0], [0.0, 1.0]]))
    c2 = empirical_centroid_vs_formula(w2, np.array([0.2, 0.35]), n=64,
                                       samples=100000, seed=6, thinning=16)
    dt = time.time() - t0
    ok = (c1.max_abs_z <= 4.0 and c1.l1_distance <= 0.01
          and c2.max_abs_z <= 4.0 and c2.l1_distance <= 0.01 and dt < 60.0)
    _report(5, ok, f"hit-and-run n=64, 1e5 samples: m=1 max|z| {c1.max_abs_z:.2f} "
                   f"L1 {c1.l1_distance:.4f}; m=2 max|z| {c2.max_abs_z:.2f} "
                   f"L1 {c2.l1_distance:.4f}; {dt:.0f}s")


def test_criterion_06_asymptotic_vs_irwin_hall():
    t0 = time.time()
    w = StepFunction.constant([1.0])
    target = math.sqrt(6.0 / math.pi)
    worst_const = max(abs(asymptotic_volume(w, np.array([0.5]), n).volume - target)
                      for n in (2, 5, 10, 25, 50, 100))
    errs = []
    for n in (10, 20, 30, 40, 50):
        av = asymptotic_volume(w, np.array([0.5]), n)
        exact = math.sqrt(n) * irwin_hall_density(n, n / 2.0)
        errs.append(abs(av.volume / exact - 1.0))
    dt = time.time() - t0
    decreasing = all(a > b for a, b in zip(errs, errs[1:]))
    ok = worst_const <= 1e-12 and errs[-1] < 0.01 and decreasing and dt < 1.0
    _report(6, ok, f"sqrt(6/pi) within {worst_const:.2e}; vs exact Irwin-Hall "
                   f"{errs[-1]:.4%} at n=50, decreasing {errs}, {dt:.2f}s")


def test_criterion_07_phi_n_correction():
    w = StepFunction(np.array([0.0, 1.0 / 3.0, 1.0]), np.array([[2.0], [1.0]]))
    y = np.array([0.9])
    better_everywhere = True
    gaps = []
    for n in (16, 32, 64):
        exact = section_volume_exact(reduce_to_grid(w, n), float(y[0]))
        with_phi = asymptotic_volume(w, y, n, with_phi_n=True).volume
        without = asymptotic_volume(w, y, n, with_phi_n=False).volume
        gaps.append((abs(with_phi - exact), abs(without - exact)))
        better_everywhere &= abs(with_phi - exact) < abs(without - exact)
    _report(7, better_everywhere,
            "jump at 1/3, n in {16,32,64}: |with phi_n - exact| < |without| "
            f"in every case: {[(f'{a:.2e}', f'{b:.2e}') for a, b in gaps]}")


def test_criterion_08_neutral_exactness_and_involution():
    w = build_responsivity(default_cmf_table())
    worst_round = 0.0
    for c in (0.1, 0.5, 0.9):
        y = tristimulus(w, StepFunction.constant([c], domain=w.domain))
        res = estimate_reflectance(w, y, equalize=True, options=TIGHT)
        worst_round = max(worst_round, float(np.max(np.abs(res.estimate.values - c))))
    # involution: estimates for y and white - y sum to 1 pointwise
    rep = build_equalization(w)
    weq = equalized_responsivities(rep, w)
    white = weq.integrate()
    y = 0.3 * white
    a = solve_saddlepoint(weq, y, options=TIGHT).estimate.values
    b = solve_saddlepoint(weq, white - y, options=TIGHT).estimate.values
    worst_inv = float(np.max(np.abs(a + b - 1.0)))
    ok = worst_round <= 1e-8 and worst_inv <= 1e-9
    _report(8, ok, f"gray round-trip error {worst_round:.2e}, "
                   f"involution sum-to-1 error {worst_inv:.2e}")


def test_criterion_09_hawkyard():
    w = build_responsivity(default_cmf_table())
    # pre-clamp residual on a generic response
    y = tristimulus(w, StepFunction.constant([0.4], domain=w.domain))
    hk = hawkyard_estimate(w, y)
    resid = float(np.max(np.abs(apply_operator(w, hk.raw).components - y.components)))
    # half gray gives raw identically 1/2
    y_half = tristimulus(w, StepFunction.constant([0.5], domain=w.domain))
    hk_half = hawkyard_estimate(w, y_half)
    half_err = float(np.max(np.abs(hk_half.raw.values - 0.5)))
    # a saturated spiky reflectance pushes the linear estimate out of [0,1]
    vals = np.full((w.n_cells, 1), 0.02)
    vals[: w.n_cells // 4] = 0.98
    y_edge = tristimulus(w, StepFunction(w.breakpoints, vals))
    hk_edge = hawkyard_estimate(w, y_edge)
    centroid_edge = estimate_reflectance(w, y_edge, equalize=True,
                                         options=TIGHT).estimate.values
    ok = (resid <= 1e-10 and half_err <= 1e-12 and hk_edge.clamp_fraction > 0.0
          and np.all((centroid_edge > 0) & (centroid_edge < 1)))
    _report(9, ok, f"pre-clamp residual {resid:.2e}, half-gray error {half_err:.2e}, "
                   f"clamp_fraction {hk_edge.clamp_fraction:.3f} with centroid in (0,1)")


def test_criterion_10_unbounded():
    t0 = time.time()
    w = build_responsivity(default_cmf_table())
    flat = StepFunction.constant([1.0], domain=w.domain)
    y = apply_operator(w, flat)
    est = estimate_lightsource(w, y, equalize=True, options=TIGHT)
    flat_err = float(np.max(np.abs(est.spectrum.values - 1.0)))
    k = 7.5
    est_k = estimate_lightsource(w, k * y.components, equalize=True, options=TIGHT)
    scale_err = float(np.max(np.abs(est_k.spectrum.values
                                    - k * est.spectrum.values)))
    # scan extreme chromaticities: responses far outside the cone image
    non_estimable = 0
    extremes = [np.array([1e-8, 1e-8, 10.0]), np.array([10.0, 1e-8, 1e-8]),
                np.array([1e-8, 10.0, 1e-8]), np.array([20.0, 1e-6, 20.0])]
    for ye in extremes:
        if not estimate_lightsource(w, ye, equalize=False).estimable:
            non_estimable += 1
    dt = time.time() - t0
    ok = (est.estimable and flat_err <= 1e-8 and scale_err <= 1e-10
          and non_estimable > 0 and dt < 10.0)
    _report(10, ok, f"flat error {flat_err:.2e}, scaling error {scale_err:.2e}, "
                    f"{non_estimable}/{len(extremes)} extreme responses "
                    f"not estimable, {dt:.1f}s")


def test_criterion_11_degenerate_inputs(tmp_path, capsys):
    # library level
    w_dup = StepFunction(np.array([0.0, 1.0]), np.array([[1.0, 1.0]]))
    with pytest.raises(DependentChannels):
        solve_saddlepoint(w_dup, np.array([0.5, 0.5]))
    w = StepFunction(np.array([0.0, 0.5, 1.0]), np.array([[2.0], [1.0]]))
    with pytest.raises(BoundaryOrExteriorResponse):
        solve_saddlepoint(w, w.integrate())  # white point is a vertex of Z

    # CLI level: duplicated channel -> input error (2)
    dup_csv = tmp_path / "dup.csv"
    dup_csv.write_text("wavelength,a,b,c\n400,1,1,0.5\n405,2,2,0.3\n"
                       "410,1.5,1.5,0.4\n")
    code_dup = cli_main(["estimate", "--cmf", str(dup_csv),
                         "--window", "400,415", "--xyz", "0.5,0.5,0.2"])
    # CLI level: y = white point (boundary) -> infeasible (3)
    code_in = cli_main(["inside", "--xyz", "0.3,0.32,0.3"])
    wcmf = build_responsivity(default_cmf_table())
    white = wcmf.integrate()
    code_white = cli_main(["estimate", "--xyz", ",".join(map(str, white))])
    capsys.readouterr()
    ok = code_dup == 2 and code_in == 0 and code_white == 3
    _report(11, ok, f"DependentChannels and BoundaryOrExteriorResponse raised; "
                    f"CLI exit codes: duplicated channel {code_dup} (want 2), "
                    f"white point {code_white} (want 3)")
