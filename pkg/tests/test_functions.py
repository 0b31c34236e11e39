import numpy as np
import pytest

from dcx import core, norms, verify
from dcx import functions as fx
from dcx.errors import DomainError, InputError
from dcx.geometry import Ball, Box, Interval, WholeSpace


def test_eval_examples():
    absf = fx.abs_value()
    assert absf.value(-2.0) == 2.0
    both = fx.sum_fn([absf, absf])
    assert both.value(3.0) == 6.0
    sq = fx.PSDQuadratic([[1.0]])
    shifted = fx.affine_precompose(sq, [[2.0]], [1.0])
    assert shifted.value(1.0) == 9.0


def test_eval_domain_error():
    f = fx.MaxOfAffine([[1.0]], [0.0], domain=Interval(0, 1))
    with pytest.raises(DomainError):
        f(2.0)
    assert f(0.5) == 0.5


def test_scale_rejects_negative():
    with pytest.raises(InputError):
        fx.scale(fx.abs_value(), -1.0)


def test_pointwise_max_and_sum_flatten():
    a, b, c = fx.abs_value(), fx.PSDQuadratic([[1.0]]), fx.constant(0.25, 1)
    m = fx.pointwise_max([fx.pointwise_max([a, b]), c])
    assert len(m.children) == 3
    s = fx.sum_fn([fx.sum_fn([a, b]), c])
    assert len(s.children) == 3
    xs = np.linspace(-2, 2, 41)
    assert np.allclose(m.value(xs), np.maximum(np.maximum(np.abs(xs), xs**2), 0.25))
    assert np.allclose(s.value(xs), np.abs(xs) + xs**2 + 0.25)


def test_lipschitz_bound_on_inner():
    assert fx.lipschitz_bound_on_inner(1.0, 0.5) == 4.0
    assert fx.lipschitz_bound_on_inner(0.0, 0.3) == 0.0
    with pytest.raises(InputError):
        fx.lipschitz_bound_on_inner(1.0, 0.0)
    with pytest.raises(InputError):
        fx.lipschitz_bound_on_inner(-1.0, 1.0)


def test_lipschitz_bound_dominates_true_slope():
    # f = x^2 on C = (-2, 2), D = [-1, 1]: the certified 2M/r = 16 bound
    # dominates the true slope 2 (sampled)
    bound = fx.lipschitz_bound_on_inner(4.0, 0.5)
    assert bound == 16.0
    est = fx.estimate_lipschitz(fx.PSDQuadratic([[1.0]]), Interval(-1, 1), 4096, seed=0)
    assert est <= bound
    assert est == pytest.approx(2.0, abs=1e-2)


# ------------------------------------------------------------- extension


def test_extension_interval_fixture():
    ext = fx.lipschitz_extension(fx.PSDQuadratic([[1.0]]), Interval(-1, 1), 2.0)
    # grid-infimum oracle (2e6 points): min over c of c^2 + 2|2 - c| = 3 at c = 1
    assert ext.value(np.array([2.0])) == pytest.approx(3.0, abs=1e-9)
    xs = np.linspace(-1, 1, 101)
    assert np.abs(ext.value(xs) - xs**2).max() == 0.0  # members short-circuit


def test_extension_affine_matching_slope():
    ext = fx.lipschitz_extension(fx.AffineFn([1.0], 0.0), Interval(0, 1), 1.0)
    assert ext.value(np.array([2.0])) == pytest.approx(2.0, abs=1e-12)
    # below the interval both terms of c + |x - c| grow with c: value 2c - x
    assert ext.value(np.array([-1.0])) == pytest.approx(1.0, abs=1e-12)


def test_extension_dominance_property():
    ext = fx.lipschitz_extension(fx.PSDQuadratic([[1.0]]), Interval(-1, 1), 2.0)
    rng = np.random.default_rng(0)
    xs = rng.uniform(-4, 4, 128)
    c0 = rng.uniform(-1, 1, 128)
    assert np.all(ext.value(xs) <= c0**2 + 2 * np.abs(xs - c0) + 1e-9)


def test_extension_global_lipschitz_and_convexity():
    ext = fx.lipschitz_extension(fx.PSDQuadratic([[1.0]]), Interval(-1, 1), 2.0)
    est = fx.estimate_lipschitz(ext, Interval(-3, 3), 1024, seed=1)
    assert est <= 2.0 + 1e-6
    rep = verify.check_midpoint_convex(ext, Interval(-3, 3), 512, 1e-8, seed=2)
    assert rep.passed


def test_extension_2d_box():
    ext = fx.lipschitz_extension(fx.PSDQuadratic(np.eye(2)), Box([-1, -1], [1, 1]), 4.0)
    # frozen 2-d grid-infimum oracle: min over the box of
    # c1^2 + c2^2 + 4 ||(2,0) - c||_2 = 5.0 at c = (1, 0)
    assert float(ext.value(np.array([2.0, 0.0]))) == pytest.approx(5.0, abs=1e-6)


def test_extension_empty_set_rejected():
    from dcx.geometry import EmptySet

    with pytest.raises(InputError):
        fx.lipschitz_extension(fx.abs_value(), EmptySet(1), 1.0)


# ------------------------------------------------------------- splitting


def test_quadratic_split_examples():
    P1, P2 = fx.quadratic_dc_split(fx.QuadraticForm(np.diag([1.0, -2.0])))
    assert np.allclose(P1.matrix, np.diag([1.0, 0.0]))
    assert np.allclose(P2.matrix, np.diag([0.0, 2.0]))
    Q = fx.QuadraticForm(np.array([[2.0, 1.0], [1.0, 2.0]]))  # PSD
    P1, P2 = fx.quadratic_dc_split(Q)
    assert np.allclose(P1.matrix, Q.matrix, atol=1e-12)
    assert np.allclose(P2.matrix, 0.0, atol=1e-12)


def test_quadratic_split_random_3x3():
    rng = np.random.default_rng(7)
    for _ in range(25):
        A = rng.standard_normal((3, 3))
        Q = fx.QuadraticForm(A + A.T)
        P1, P2 = fx.quadratic_dc_split(Q)
        assert np.abs(P1.matrix - P2.matrix - Q.matrix).max() <= 1e-10
        for P in (P1, P2):
            assert np.linalg.eigvalsh(P.matrix).min() >= -1e-12


def test_quadratic_split_eval_faithful():
    rng = np.random.default_rng(8)
    A = rng.standard_normal((2, 2))
    Q = fx.QuadraticForm(A + A.T)
    P1, P2 = fx.quadratic_dc_split(Q)
    pts = rng.standard_normal((1000, 2))
    lhs = fx.PSDQuadratic(P1.matrix)._value(pts) - fx.PSDQuadratic(P2.matrix)._value(pts)
    assert np.abs(lhs - Q.value(pts)).max() <= 1e-10 * (1 + np.abs(Q.value(pts)).max())


def test_quadratic_form_symmetry_enforced():
    with pytest.raises(InputError):
        fx.QuadraticForm(np.array([[0.0, 1.0], [0.5, 0.0]]))


# ----------------------------------------------------------- c11 split


def test_c11_split_sin():
    dc = fx.c11_dc_split(
        lambda p: np.sin(p[:, 0]), lambda p: np.cos(p[:, 0]),
        Interval(-10, 10, closed=False), M=1.0,
    )
    assert isinstance(dc.control, fx.PSDQuadratic)
    assert dc.control.matrix[0, 0] == pytest.approx(0.5)
    rep = core.check_control(dc, duals=4, segments=20000, tol=1e-8, seed=3)
    assert rep.passed


def test_c11_split_affine_and_half_square():
    aff = fx.c11_dc_split(
        lambda p: 3 * p[:, 0] + 1, lambda p: np.full((len(p), 1), 3.0),
        Interval(-2, 2, closed=False), M=0.0,
    )
    assert aff.control._value(np.array([[1.0]]))[0] == 0.0
    half = fx.c11_dc_split(
        lambda p: 0.5 * (p**2).sum(axis=1), lambda p: p,
        Ball(np.zeros(2), 2.0, closed=False), M=1.0,
    )
    rep = core.check_control(half, duals=8, segments=5000, tol=1e-8, seed=4)
    assert rep.passed


def test_c11_split_estimated_bound_is_flagged():
    dc = fx.c11_dc_split(
        lambda p: np.sin(p[:, 0]), lambda p: np.cos(p[:, 0]),
        Interval(-10, 10, closed=False),
    )
    assert dc.provenance == "split-empirical"
    # 1.25 safety factor puts the estimate above the true bound 0.5
    assert 0.5 <= dc.control.matrix[0, 0] <= 0.7


def test_c11_split_rejects_non_euclidean():
    with pytest.raises(InputError):
        fx.c11_dc_split(lambda p: p[:, 0], None, Interval(-1, 1), M=1.0, norm_kind=norms.L1)


def test_c11_split_rejects_negative_bound():
    with pytest.raises(InputError):
        fx.c11_dc_split(lambda p: p[:, 0], None, Interval(-1, 1), M=-1.0)


# -------------------------------------------------- empirical Lipschitz


def test_estimate_lipschitz_examples():
    three = fx.AffineFn([3.0], 0.0)
    est = fx.estimate_lipschitz(three, Interval(0, 1), 512, seed=0)
    assert est >= 3.0 - 1e-6 and est <= 3.0 + 1e-9
    const = fx.constant(5.0, 1)
    assert fx.estimate_lipschitz(const, Interval(0, 1), 512, seed=0) == 0.0


def test_estimate_lipschitz_converges_from_below():
    sq = fx.PSDQuadratic([[1.0]])
    offs = [fx.estimate_lipschitz(sq, Interval(-1, 1), n, seed=0) for n in (64, 1024, 8192)]
    assert all(o <= 2.0 + 1e-9 for o in offs)
    assert offs[-1] == pytest.approx(2.0, abs=5e-3)
    with pytest.raises(InputError):
        fx.estimate_lipschitz(sq, Interval(-1, 1), 1)


def test_gauge_squared_midpoint_convexity():
    from dcx.geometry import HullBody

    body = HullBody(rho=0.5, base=norms.LINF, points=np.eye(2))
    gsq = fx.GaugeSquared(body, 0.5)
    rep = verify.check_midpoint_convex(gsq, Box([-2, -2], [2, 2]), 4096, 1e-9, seed=5)
    assert rep.passed
