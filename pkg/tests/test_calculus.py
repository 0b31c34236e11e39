import numpy as np
import pytest

from dcx import calculus as ca
from dcx import core, norms, verify
from dcx import functions as fx
from dcx.calculus import LipschitzCertificate
from dcx.core import DCFunction, DCPair, bundle, check_control, from_pair
from dcx.errors import InputError, PreconditionError
from dcx.geometry import Ball, Box, Interval, WholeSpace
from dcx.cli import registry_outer


@pytest.fixture
def absdc():
    return from_pair(
        DCPair(fx.abs_value(), fx.constant(0.0, 1)),
        domain=Interval(-3, 3, closed=False),
        name="|x|",
    )


@pytest.fixture
def sqdc():
    return DCFunction(
        Interval(-3, 3, closed=False), lambda p: p[:, 0] ** 2, fx.PSDQuadratic([[1.0]]),
        "pair", "x^2",
    )


# ------------------------------------------------------------ compose


def test_compose_square_of_abs(absdc):
    M = 3.1
    B = Interval(-0.1, M)
    ysq = DCFunction(B, lambda p: p[:, 0] ** 2, fx.PSDQuadratic([[1.0]]), "pair", "y^2")
    cert = LipschitzCertificate(2 * M, B, ca.ANALYTIC)
    comp = ca.compose(absdc, ysq, cert, cert)
    xs = np.array([[0.5], [-1.5], [2.0]])
    # control formula: g_ctrl(F(x)) + (LipG + Lipg) |x| = x^2 + 4 M |x|
    want = xs[:, 0] ** 2 + 4 * M * np.abs(xs[:, 0])
    assert np.allclose(comp.combined_control._value(xs), want, atol=1e-12)
    assert comp.value(np.array([-2.0]))[0] == 4.0
    rep = check_control(comp, duals=4, segments=20000, tol=1e-8, seed=1)
    assert rep.passed
    # analytic check of the minus dual: -x^2 + x^2 + 4M|x| = 4M|x|, convex
    psi = lambda p: -p[:, 0] ** 2 + comp.combined_control._value(p)
    r = verify.check_segment_convex(psi, comp.domain, 4000, 5, 1e-9, seed=2)
    assert r.passed


def test_compose_affine_outer(absdc):
    a = -2.5
    B = Interval(-0.1, 3.1)
    lin = DCFunction(B, lambda p: a * p[:, 0], fx.constant(0.0, 1), "pair", "lin")
    cert_g = LipschitzCertificate(abs(a), B, ca.ANALYTIC)
    cert_c = LipschitzCertificate(0.0, B, ca.ANALYTIC)
    comp = ca.compose(absdc, lin, cert_g, cert_c)
    xs = np.array([[1.0], [-0.5]])
    assert np.allclose(comp.combined_control._value(xs), abs(a) * np.abs(xs[:, 0]))
    rep = check_control(comp, duals=4, segments=5000, tol=1e-9, seed=3)
    assert rep.passed


def test_compose_constant_inner():
    dom = Interval(-1, 1)
    const = core.dc_constant(0.5, dom)
    B = Interval(0, 1)
    ysq = DCFunction(B, lambda p: p[:, 0] ** 2, fx.PSDQuadratic([[1.0]]), "pair", "y^2")
    cert = LipschitzCertificate(2.0, B, ca.ANALYTIC)
    comp = ca.compose(const, ysq, cert, cert)
    assert np.allclose(comp.value(np.array([[0.1], [0.9]])), 0.25)
    rep = check_control(comp, duals=4, segments=2000, tol=1e-9, seed=4)
    assert rep.passed


def test_compose_range_escape_reported(absdc):
    B = Interval(0.0, 1.0)  # range of |x| on (-3,3) escapes this
    ysq = DCFunction(B, lambda p: p[:, 0] ** 2, fx.PSDQuadratic([[1.0]]), "pair", "y^2")
    cert = LipschitzCertificate(2.0, B, ca.ANALYTIC)
    with pytest.raises(PreconditionError, match="range escape"):
        ca.compose(absdc, ysq, cert, cert)


def test_certificate_validation():
    with pytest.raises(InputError):
        LipschitzCertificate(-1.0, Interval(0, 1))
    with pytest.raises(InputError):
        LipschitzCertificate(1.0, Interval(0, 1), origin="guessed")


def test_convex_lipschitz_on_structure():
    box = Box([-2.0], [3.0])
    L, o = ca.convex_lipschitz_on(fx.MaxOfAffine([[2.0], [-5.0]], [0.0, 1.0]), box, norms.L2)
    assert (L, o) == (5.0, ca.ANALYTIC)
    L, o = ca.convex_lipschitz_on(fx.PSDQuadratic([[1.0]]), box, norms.L2)
    assert o == ca.ANALYTIC and L == pytest.approx(6.0)  # 2 * max|x| on the box
    # oracle with a two-sided bound: interior route
    orc = fx.SmoothConvexOracle(lambda p: np.exp(p[:, 0]), dim=1, lower=0.0)
    L, o = ca.convex_lipschitz_on(orc, box, norms.L2, margin=0.5)
    assert o == ca.INTERIOR and L >= np.exp(3.0)  # dominates the true slope e^3
    # oracle without bounds: empirical with safety factor
    orc2 = fx.SmoothConvexOracle(lambda p: np.exp(p[:, 0]), dim=1)
    L2, o2 = ca.convex_lipschitz_on(orc2, box, norms.L2)
    assert o2 == ca.EMPIRICAL and L2 >= np.exp(3.0) * 0.9


# ------------------------------------------------------ compose_global


def test_compose_global_exp(absdc):
    res = ca.compose_global(absdc, registry_outer("exp"), seed=5)
    xs = np.linspace(-2.9, 2.9, 101)
    assert np.abs(res.value(xs) - np.exp(np.abs(xs))).max() == 0.0
    rep = check_control(res, duals=8, segments=30000, tol=1e-8, seed=6)
    assert rep.passed
    assert res.provenance == "composed"


def test_compose_global_product_outer_is_square():
    dom = Interval(-3, 3, closed=False)
    x = core.dc_affine([1.0], 0.0, dom, name="x")
    res = ca.product(x, x, seed=7)
    xs = np.linspace(-2.9, 2.9, 101)
    assert np.abs(res.value(xs) - xs**2).max() <= 1e-12
    rep = check_control(res, duals=8, segments=20000, tol=1e-8, seed=8)
    assert rep.passed
    # convexity of the glued control itself
    r = verify.check_midpoint_convex(res.control, dom, 20000, 1e-8, seed=9)
    assert r.passed


def test_compose_global_linear_outer_matches_direct(sqdc):
    lin = core.dc_affine([2.0], 1.0, WholeSpace(1), name=" affine")
    res = ca.compose_global(sqdc, lin, seed=10)
    xs = np.linspace(-2.9, 2.9, 201)
    assert np.abs(res.value(xs) - (2 * xs**2 + 1)).max() == 0.0
    rep = check_control(res, duals=4, segments=10000, tol=1e-8, seed=11)
    assert rep.passed


def test_compose_global_value_fidelity(absdc, sqdc):
    # composed values equal the direct pointwise composition
    res = ca.compose_global(bundle([absdc, sqdc]), _sum_outer(), seed=12)
    rng = np.random.default_rng(13)
    xs = rng.uniform(-2.99, 2.99, 10000)
    direct = np.abs(xs) + xs**2
    assert np.abs(res.value(xs) - direct).max() <= 1e-12


def _sum_outer():
    return DCFunction(
        WholeSpace(2), lambda p: p[:, 0] + p[:, 1], fx.constant(0.0, 2), "pair", "u+v",
        lip_hint=lambda box, nk: float(norms.norm(np.ones(2), norms.dual_kind(nk))),
    )


def test_local_composition_agrees_with_global(absdc):
    # build the composition only near a point: values agree exactly with
    # the global construction's restriction, and the local check passes
    a = 1.0
    local_dom = Interval(a - 0.25, a + 0.25, closed=False)
    local = DCFunction(local_dom, absdc.value_fn, absdc.control, "pair", "|x| local")
    res_local = ca.compose_global(local, registry_outer("exp"), seed=14)
    res_global = ca.compose_global(absdc, registry_outer("exp"), seed=14)
    xs = np.linspace(a - 0.2, a + 0.2, 101)
    assert np.array_equal(res_local.value(xs), res_global.value(xs))
    rep = check_control(res_local, duals=4, segments=5000, tol=1e-8, seed=15)
    assert rep.passed


# ------------------------------------------------------------- product


def test_product_of_abs_values(absdc):
    dom = Interval(-2, 2, closed=False)
    a = from_pair(DCPair(fx.abs_value(), fx.constant(0.0, 1)), domain=dom, name="|x|")
    res = ca.product(a, a, seed=16)
    xs = np.linspace(-1.9, 1.9, 401)
    assert np.abs(res.value(xs) - xs**2).max() <= 1e-12


def test_product_concave_result():
    dom = Interval(-2, 2, closed=False)
    f1 = core.dc_affine([-1.0], 1.0, dom)  # 1 - x
    f2 = core.dc_affine([1.0], 1.0, dom)  # 1 + x
    res = ca.product(f1, f2, seed=17)
    xs = np.linspace(-1.9, 1.9, 101)
    assert np.abs(res.value(xs) - (1 - xs**2)).max() <= 1e-12
    # -value + control convex (the concave side needs the control)
    psi = lambda p: -res.value_fn(p) + res.control._value(p)
    r = verify.check_segment_convex(psi, dom, 4000, 5, 1e-8, seed=18)
    assert r.passed


def test_product_commutativity_of_values(absdc, sqdc):
    p1 = ca.product(absdc, sqdc, seed=19)
    p2 = ca.product(sqdc, absdc, seed=19)
    xs = np.linspace(-2.9, 2.9, 501)
    assert np.abs(p1.value(xs) - p2.value(xs)).max() <= 1e-12


def test_product_domain_mismatch():
    f1 = core.dc_affine([1.0], 0.0, Interval(-1, 1))
    f2 = core.dc_affine([1.0, 0.0], 0.0, Box([-1, -1], [1, 1]))
    with pytest.raises(InputError):
        ca.product(f1, f2)


# ------------------------------------------------------------ quotient


def test_quotient_inverse_of_one_plus_square():
    dom = Interval(-2, 2, closed=False)
    one = core.dc_constant(1.0, dom)
    xsq = DCFunction(dom, lambda p: p[:, 0] ** 2, fx.PSDQuadratic([[1.0]]), "pair", "x^2")
    den = core.dc_sum([one, xsq])
    res = ca.quotient(one, den, positive=True, m=1.0, seed=20)
    xs = np.linspace(-1.9, 1.9, 201)
    assert np.abs(res.value(xs) - 1 / (1 + xs**2)).max() <= 1e-14
    rep = check_control(res, duals=4, segments=20000, tol=1e-8, seed=21)
    assert rep.passed


def test_quotient_by_one_is_identity():
    dom = Interval(-2, 2, closed=False)
    xsq = DCFunction(dom, lambda p: p[:, 0] ** 2, fx.PSDQuadratic([[1.0]]), "pair", "x^2")
    one = core.dc_constant(1.0, dom)
    res = ca.quotient(xsq, one, positive=True, m=1.0, seed=22)
    xs = np.linspace(-1.9, 1.9, 101)
    assert np.all(res.value(xs) == xsq.value(xs))


def test_quotient_constant_ratio():
    dom = Interval(0, 1, closed=False)
    ex = DCFunction(
        dom, lambda p: np.exp(p[:, 0]),
        fx.SmoothConvexOracle(lambda p: np.exp(p[:, 0]), dim=1, lower=0.0,
                              globally_convex=True),
        "pair", "exp",
    )
    res = ca.quotient(ex, ex, positive=True, m=1.0, seed=23)
    xs = np.linspace(0.05, 0.95, 51)
    assert np.abs(res.value(xs) - 1.0).max() <= 1e-15
    rep = check_control(res, duals=4, segments=5000, tol=1e-8, seed=24)
    assert rep.passed


def test_quotient_sign_violation():
    dom = Interval(-2, 2, closed=False)
    x = core.dc_affine([1.0], 0.0, dom)
    one = core.dc_constant(1.0, dom)
    with pytest.raises(PreconditionError):
        ca.quotient(one, x, positive=True, m=0.5)


def test_quotient_ill_conditioned_floor_rejected():
    dom = Interval(-1, 1, closed=False)
    one = core.dc_constant(1.0, dom)
    tiny = core.dc_constant(1e-7, dom)
    with pytest.raises(InputError):
        ca.quotient(one, tiny, positive=True, m=1e-8)


def test_quotient_estimated_floor_is_flagged():
    dom = Interval(-1, 1, closed=False)
    one = core.dc_constant(1.0, dom)
    two = core.dc_constant(2.0, dom)
    res = ca.quotient(one, two, seed=25)
    assert any("estimated" in n for n in res.notes)


def test_quotient_times_denominator_recovers_numerator():
    dom = Interval(-2, 2, closed=False)
    one = core.dc_constant(1.0, dom)
    xsq = DCFunction(dom, lambda p: p[:, 0] ** 2, fx.PSDQuadratic([[1.0]]), "pair", "x^2")
    den = core.dc_sum([one, xsq])
    q = ca.quotient(one, den, positive=True, m=1.0, seed=26)
    back = ca.product(q, den, seed=27)
    xs = np.linspace(-1.9, 1.9, 201)
    assert np.abs(back.value(xs) - 1.0).max() <= 1e-8


# ----------------------------------------------------- special compose


def test_special_compose_abs_outer(sqdc):
    B = Interval(-10, 10)
    pair = DCPair(
        fx.MaxOfAffine([[1.0], [-1.0]], [0.0, 0.0], domain=B),
        fx.AffineFn([0.0], 0.0, domain=B),
    )
    res = ca.special_compose(sqdc, pair, lip_plus=1.0, lip_minus=1e-9)
    xs = np.linspace(-2.9, 2.9, 101)
    assert np.abs(res.value(xs) - xs**2).max() <= 1e-9
    rep = check_control(res, duals=4, segments=10000, tol=1e-8, seed=28)
    assert rep.passed


def test_special_compose_affine_outer_matches_compose(absdc):
    B = Interval(-5, 5)
    pair = DCPair(fx.AffineFn([2.0], 0.5, domain=B), fx.AffineFn([0.0], 0.0, domain=B))
    res = ca.special_compose(absdc, pair, lip_plus=2.0, lip_minus=1e-9)
    xs = np.linspace(-2.9, 2.9, 101)
    assert np.abs(res.value(xs) - (2 * np.abs(xs) + 0.5)).max() <= 1e-9


def test_special_compose_needs_pair(sqdc):
    with pytest.raises(InputError):
        ca.special_compose(sqdc, "not a pair", 1.0, 1.0)
    B = Interval(-5, 5)
    pair = DCPair(fx.AffineFn([1.0], 0.0, domain=B), fx.AffineFn([0.0], 0.0, domain=B))
    with pytest.raises(PreconditionError):
        ca.special_compose(sqdc, pair, lip_plus=0.0, lip_minus=1.0)


def test_special_compose_gallery_restriction():
    # the staircase's convex parts restricted to a left piece are
    # Lipschitz there; composing with a small-range inner map passes
    from dcx.gallery import staircase_convex_parts

    B = Interval(-1.0, -0.5)
    c1 = fx.SmoothConvexOracle(
        lambda p: staircase_convex_parts(p[:, 0])[0], dim=1, name="c1", domain=B, lower=0.0
    )
    c2 = fx.SmoothConvexOracle(
        lambda p: staircase_convex_parts(p[:, 0])[1], dim=1, name="c2", domain=B, lower=-1.0
    )
    dom = Interval(-0.2, 0.2, closed=False)
    inner = DCFunction(
        dom, lambda p: -np.abs(p[:, 0]) - 0.6, fx.abs_value(), "pair", "-|x|-0.6"
    )
    res = ca.special_compose(inner, DCPair(c1, c2), lip_plus=1.0, lip_minus=2.0, B=B, seed=29)
    xs = np.linspace(-0.19, 0.19, 41)
    want = np.array([staircase_convex_parts(v)[0] - staircase_convex_parts(v)[1]
                     for v in (-np.abs(xs) - 0.6)])
    assert np.abs(res.value(xs) - want).max() <= 1e-9
    rep = check_control(res, duals=4, segments=4000, tol=1e-8, seed=30)
    assert rep.passed


# --------------------------------------------------- quadratic, bilinear


def test_quadratic_compose_identity_on_plane():
    dom = Box([-1, -1], [1, 1], closed=False)
    x1 = core.dc_affine([1.0, 0.0], 0.0, dom)
    x2 = core.dc_affine([0.0, 1.0], 0.0, dom)
    res = ca.quadratic_compose(bundle([x1, x2]), fx.QuadraticForm(np.eye(2)), seed=31)
    rng = np.random.default_rng(32)
    pts = dom.sample(rng, 256)
    assert np.abs(res.value(pts) - (pts**2).sum(axis=1)).max() <= 1e-12
    rep = check_control(res, duals=8, segments=5000, tol=1e-8, seed=33)
    assert rep.passed


def test_quadratic_compose_cancellation():
    dom = Interval(-1, 1, closed=False)
    x = core.dc_affine([1.0], 0.0, dom)
    res = ca.quadratic_compose(bundle([x, x]), fx.QuadraticForm(np.diag([1.0, -1.0])), seed=34)
    xs = np.linspace(-0.9, 0.9, 101)
    assert np.abs(res.value(xs)).max() == 0.0
    rep = check_control(res, duals=4, segments=5000, tol=1e-8, seed=35)
    assert rep.passed


def test_quadratic_compose_random_form(absdc):
    dom = Interval(-1, 1, closed=False)
    a = from_pair(DCPair(fx.abs_value(), fx.constant(0.0, 1)), domain=dom, name="|x|")
    x = core.dc_affine([1.0], 0.0, dom)
    rng = np.random.default_rng(36)
    A = rng.standard_normal((2, 2))
    Q = fx.QuadraticForm(A + A.T)
    res = ca.quadratic_compose(bundle([a, x]), Q, seed=37)
    xs = np.linspace(-0.9, 0.9, 201)
    want = Q.value(np.stack([np.abs(xs), xs], axis=1))
    assert np.abs(res.value(xs) - want).max() <= 1e-10
    rep = check_control(res, duals=8, segments=20000, tol=1e-8, seed=38)
    assert rep.passed


def test_bilinear_scalar_matches_product():
    dom = Interval(-2, 2, closed=False)
    x = core.dc_affine([1.0], 0.0, dom)
    bl = ca.bilinear_product(x, x, [[1.0]], seed=39)
    pr = ca.product(x, x, seed=39)
    xs = np.linspace(-1.9, 1.9, 101)
    assert np.abs(bl.value(xs) - pr.value(xs)).max() <= 1e-10


def test_bilinear_inner_product_matches_quadratic():
    dom = Box([-1, -1], [1, 1], closed=False)
    x1 = core.dc_affine([1.0, 0.0], 0.0, dom)
    x2 = core.dc_affine([0.0, 1.0], 0.0, dom)
    F = bundle([x1, x2])
    bl = ca.bilinear_product(F, F, np.eye(2), seed=40)
    rng = np.random.default_rng(41)
    pts = dom.sample(rng, 128)
    assert np.abs(bl.value(pts) - (pts**2).sum(axis=1)).max() <= 1e-10


def test_bilinear_constant_right_factor():
    dom = Interval(-2, 2, closed=False)
    x = core.dc_affine([1.0], 0.0, dom)
    c = core.dc_constant(3.0, dom)
    res = ca.bilinear_product(x, c, [[1.0]], seed=42)
    xs = np.linspace(-1.9, 1.9, 101)
    assert np.abs(res.value(xs) - 3 * xs).max() <= 1e-10
    rep = check_control(res, duals=4, segments=4000, tol=1e-8, seed=43)
    assert rep.passed


def test_bilinear_shape_mismatch():
    dom = Interval(-1, 1)
    x = core.dc_affine([1.0], 0.0, dom)
    with pytest.raises(InputError):
        ca.bilinear_product(x, x, [[1.0, 0.0]])
