import numpy as np
import pytest

from spectroid.errors import DomainMismatch
from spectroid.specfun import Regime, sigma
from spectroid.stepfn import (
    StepFunction,
    apply_operator,
    common_refinement,
    dependence_threshold_ok,
    gram_matrix,
    linear_combination,
    project_Pn,
    squash,
)


def random_stepfn(rng, m=1, n_pieces=5, domain=(0.0, 1.0)):
    a, b = domain
    inner = np.sort(rng.uniform(a, b, n_pieces - 1))
    bp = np.concatenate([[a], inner, [b]])
    vals = rng.uniform(-2.0, 3.0, (n_pieces, m))
    return StepFunction(bp, vals)


def riemann_sum(w, f, n=200000):
    """Independent oracle: midpoint Riemann sum on a dense uniform grid."""
    a, b = w.domain
    xs = a + (np.arange(n) + 0.5) * (b - a) / n
    return (w(xs) * f(xs)).sum(axis=0) * (b - a) / n


def test_constructor_validation():
    with pytest.raises(ValueError):
        StepFunction(np.array([0.0, 0.0, 1.0]), np.array([[1.0], [2.0]]))
    with pytest.raises(ValueError):
        StepFunction(np.array([0.0, 1.0]), np.array([[1.0], [2.0]]))
    with pytest.raises(ValueError):
        StepFunction(np.array([1.0]), np.array([[1.0]]))


def test_halfopen_cell_convention():
    f = StepFunction(np.array([0.0, 0.5, 1.0]), np.array([[2.0], [1.0]]))
    assert f(0.5)[0] == 1.0   # value of the right cell at the breakpoint
    assert f(1.0)[0] == 1.0   # final cell closed
    assert f(0.0)[0] == 2.0


def test_apply_operator_constant():
    w = StepFunction.constant([1.0])
    f = StepFunction.constant([0.7])
    assert apply_operator(w, f).components[0] == pytest.approx(0.7, abs=1e-15)


def test_apply_operator_two_piece():
    w = StepFunction(np.array([0.0, 0.5, 1.0]), np.array([[2.0], [1.0]]))
    f = StepFunction.constant([0.5])
    assert apply_operator(w, f).components[0] == pytest.approx(0.75, abs=1e-15)


def test_apply_operator_matches_riemann_oracle():
    rng = np.random.default_rng(1)
    w = random_stepfn(rng, m=3, n_pieces=5)
    f = random_stepfn(rng, m=1, n_pieces=4)
    got = apply_operator(w, f).components
    ref = riemann_sum(w, f)
    assert got == pytest.approx(ref, abs=5e-4)


def test_apply_operator_bilinear():
    rng = np.random.default_rng(2)
    w = random_stepfn(rng, m=2, n_pieces=6)
    f = random_stepfn(rng, m=1, n_pieces=3)
    g = random_stepfn(rng, m=1, n_pieces=4)
    fg, _ = common_refinement(f, g)
    _, gg = common_refinement(f, g)
    combo = StepFunction(fg.breakpoints, 0.3 * fg.values + 1.7 * gg.values)
    lhs = apply_operator(w, combo).components
    rhs = 0.3 * apply_operator(w, f).components + 1.7 * apply_operator(w, g).components
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_apply_operator_domain_mismatch():
    w = StepFunction.constant([1.0], domain=(0.0, 1.0))
    f = StepFunction.constant([1.0], domain=(0.0, 2.0))
    with pytest.raises(DomainMismatch):
        apply_operator(w, f)


def test_common_refinement_examples():
    u = StepFunction(np.array([0.0, 1.0]), np.array([[3.0]]))
    v = StepFunction(np.array([0.0, 0.5, 1.0]), np.array([[1.0], [2.0]]))
    uu, vv = common_refinement(u, v)
    assert np.allclose(uu.breakpoints, [0.0, 0.5, 1.0])
    assert np.allclose(vv.breakpoints, [0.0, 0.5, 1.0])
    assert np.allclose(uu.values[:, 0], [3.0, 3.0])
    # idempotence
    u2, u3 = common_refinement(uu, uu)
    assert np.allclose(u2.breakpoints, uu.breakpoints)
    assert np.allclose(u2.values, uu.values)


def test_common_refinement_preserves_integrals():
    rng = np.random.default_rng(3)
    u = random_stepfn(rng, m=2, n_pieces=7)
    v = random_stepfn(rng, m=1, n_pieces=4)
    uu, vv = common_refinement(u, v)
    assert uu.integrate() == pytest.approx(u.integrate(), rel=1e-15, abs=1e-15)
    assert vv.integrate() == pytest.approx(v.integrate(), rel=1e-15, abs=1e-15)
    # same totals through the operator
    y1 = apply_operator(u, v).components
    y2 = apply_operator(uu, vv).components
    assert y1 == pytest.approx(y2, rel=1e-15)


def test_gram_matrix_disjoint_supports():
    w = StepFunction(np.array([0.0, 0.5, 1.0]),
                     np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert np.allclose(gram_matrix(w), np.diag([0.5, 0.5]))


def test_gram_matrix_duplicated_channel():
    w = StepFunction(np.array([0.0, 1.0]), np.array([[1.0, 1.0]]))
    G = gram_matrix(w)
    assert np.allclose(G, [[1.0, 1.0], [1.0, 1.0]])
    assert not dependence_threshold_ok(G)
    assert np.linalg.eigvalsh(G)[0] <= 1e-12


def test_gram_matrix_brute_force():
    rng = np.random.default_rng(4)
    w = random_stepfn(rng, m=3, n_pieces=6)
    ref = sum(mu * np.outer(v, v) for mu, v in zip(w.widths, w.values))
    assert np.allclose(gram_matrix(w), ref, rtol=1e-14)
    assert dependence_threshold_ok(gram_matrix(w))


def test_gram_matrix_weighted():
    rng = np.random.default_rng(5)
    w = random_stepfn(rng, m=2, n_pieces=5)
    weight = random_stepfn(rng, m=1, n_pieces=3)
    weight = StepFunction(weight.breakpoints, np.abs(weight.values))
    ww, gg = common_refinement(w, weight)
    ref = sum(mu * g * np.outer(v, v)
              for mu, g, v in zip(ww.widths, gg.values[:, 0], ww.values))
    assert np.allclose(gram_matrix(w, weight), ref, rtol=1e-13)


def test_project_Pn_examples():
    c = StepFunction.constant([3.3])
    for n in (1, 2, 7):
        p = project_Pn(c, n)
        assert np.allclose(p.values, 3.3)
    f = StepFunction(np.array([0.0, 0.5, 1.0]), np.array([[1.0], [0.0]]))
    assert np.allclose(project_Pn(f, 2).values[:, 0], [1.0, 0.0])
    assert np.allclose(project_Pn(f, 3).values[:, 0], [1.0, 0.5, 0.0])


def test_project_Pn_preserves_integral_and_idempotent():
    rng = np.random.default_rng(6)
    f = random_stepfn(rng, m=2, n_pieces=5)
    p = project_Pn(f, 16)
    assert p.integrate() == pytest.approx(f.integrate(), rel=1e-14)
    # idempotent when breaks already on the grid
    again = project_Pn(p, 16)
    assert np.allclose(again.values, p.values)


def test_project_Pn_duality():
    # <f, Pn(g)> = <Pn(f), g>
    rng = np.random.default_rng(7)
    f = random_stepfn(rng, m=1, n_pieces=4)
    g = random_stepfn(rng, m=1, n_pieces=6)
    n = 8
    lhs = apply_operator(f, project_Pn(g, n)).components[0]
    rhs = apply_operator(project_Pn(f, n), g).components[0]
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_project_Pn_errors():
    f = StepFunction.constant([1.0])
    with pytest.raises(ValueError):
        project_Pn(f, 0)
    g = StepFunction.constant([1.0], domain=(0.0, 2.0))
    with pytest.raises(DomainMismatch):
        project_Pn(g, 2)


def test_linear_combination():
    rng = np.random.default_rng(8)
    w = random_stepfn(rng, m=3, n_pieces=5)
    assert np.allclose(linear_combination(w, [0, 0, 0]).values, 0.0)
    e1 = linear_combination(w, [0, 1, 0])
    assert np.allclose(e1.values[:, 0], w.values[:, 1])
    t = rng.uniform(-1, 1, 3)
    xs = rng.uniform(0, 1, 50)
    assert np.allclose(linear_combination(w, t)(xs)[:, 0], w(xs) @ t)


def test_squash():
    f = StepFunction.constant([0.0])
    assert squash(f).values[0, 0] == 0.5
    g = StepFunction.constant([-1.0])
    assert squash(g, Regime.UNBOUNDED).values[0, 0] == 1.0
    rng = np.random.default_rng(9)
    h = random_stepfn(rng, m=1, n_pieces=4)
    s = squash(h)
    assert np.allclose(s.values[:, 0], [sigma(v) for v in h.values[:, 0]])
    assert np.all((s.values > 0) & (s.values < 1))


def test_from_samples():
    wl = np.array([400.0, 405.0, 410.0])
    f = StepFunction.from_samples(wl, np.array([1.0, 2.0, 3.0]))
    assert f.domain == (400.0, 415.0)
    assert f(404.9)[0] == 1.0
    assert f(405.0)[0] == 2.0
    with pytest.raises(ValueError):
        StepFunction.from_samples(np.array([0.0, 1.0, 3.0]), np.zeros(3))
