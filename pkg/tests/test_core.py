import json

import numpy as np
import pytest

from dcx import core, norms, verify
from dcx import functions as fx
from dcx.core import DCFunction, DCPair, bundle, check_control, from_pair
from dcx.errors import InputError
from dcx.geometry import Ball, Box, Interval, WholeSpace


@pytest.fixture
def absdc():
    return from_pair(
        DCPair(fx.abs_value(), fx.constant(0.0, 1)), domain=Interval(-2, 2), name="|x|"
    )


def test_from_pair_examples(absdc):
    sq = from_pair(DCPair(fx.PSDQuadratic([[1.0]]), fx.constant(0.0, 1)), domain=Interval(-2, 2))
    assert sq.value(1.5) == 2.25
    assert sq.control._value(np.array([[1.5]]))[0] == 2.25

    zero = from_pair(DCPair(fx.abs_value(), fx.abs_value()), domain=Interval(-2, 2))
    xs = np.linspace(-2, 2, 21)
    assert np.all(zero.value(xs) == 0.0)
    assert np.allclose(zero.control._value(xs.reshape(-1, 1)), 2 * np.abs(xs))


def test_from_pair_mixed_parts_control_contract():
    # value x^2 - |x|; both +value+control and -value+control convex
    f = from_pair(DCPair(fx.PSDQuadratic([[1.0]]), fx.abs_value()), domain=Interval(-2, 2))
    rep = check_control(f, duals=4, segments=4000, tol=1e-9, seed=0)
    assert rep.passed
    plus = lambda p: f.value_fn(p) + f.control._value(p)
    minus = lambda p: -f.value_fn(p) + f.control._value(p)
    for side in (plus, minus):
        r = verify.check_segment_convex(side, Interval(-2, 2), 2000, 5, 1e-9, seed=1)
        assert r.passed


def test_pair_recovery_round_trip(absdc):
    pair = absdc.pair()
    xs = np.linspace(-2, 2, 41).reshape(-1, 1)
    assert np.allclose(pair.plus._value(xs) - pair.minus._value(xs), absdc.value_fn(xs))
    for part in (pair.plus, pair.minus):
        rep = verify.check_midpoint_convex(part, Interval(-2, 2), 2000, 1e-9, seed=2)
        assert rep.passed


def test_bundle_examples(absdc):
    single = bundle([absdc])
    assert single.codomain_dim == 1
    xs = np.array([[0.5], [-1.0]])
    assert np.allclose(single.combined_control._value(xs), absdc.control._value(xs))

    sq = from_pair(DCPair(fx.PSDQuadratic([[1.0]]), fx.constant(0.0, 1)), domain=Interval(-2, 2))
    two = bundle([absdc, sq])
    assert np.allclose(
        two.combined_control._value(xs), np.abs(xs[:, 0]) + xs[:, 0] ** 2
    )

    affines = [core.dc_affine([1.0], 0.0, Interval(-2, 2)) for _ in range(3)]
    F = bundle(affines)
    assert np.all(F.combined_control._value(xs) == 0.0)
    rep = check_control(F, duals=16, segments=2000, tol=1e-10, seed=3)
    assert rep.passed


def test_bundle_empty_rejected():
    with pytest.raises(InputError):
        bundle([])


def test_check_control_pass_and_fail(absdc):
    rep = check_control(absdc, duals=4, segments=2000, tol=1e-9, seed=1)
    assert rep.passed

    bad = DCFunction(Interval(-2, 2), lambda p: p[:, 0] ** 2, fx.constant(0.0, 1), "pair", "bad")
    rep = check_control(bad, duals=4, segments=2000, tol=1e-9, seed=1)
    assert not rep.passed
    assert rep.worst_violation > 1e-3
    # the witness reproduces: the middle point's second difference is negative
    (a, m, b, y) = rep.witness_location
    psi = lambda x: float(y[0]) * float(x[0]) ** 2 + 0.0
    d2 = psi(a) - 2 * psi(m) + psi(b)
    assert d2 < 0


def test_check_control_sin_fixture():
    sin = DCFunction(
        Interval(-10, 10), lambda p: np.sin(p[:, 0]), fx.PSDQuadratic([[0.5]]), "split", "sin"
    )
    rep = check_control(sin, duals=8, segments=100000, tol=1e-8, seed=2)
    assert rep.passed


def test_check_control_empty_region_rejected(absdc):
    with pytest.raises(InputError):
        check_control(absdc, duals=4, segments=10, region=WholeSpace(1))


def test_control_shift_invariance_exact(absdc):
    rep1 = check_control(absdc, duals=4, segments=2000, tol=1e-9, seed=5)
    shifted = DCFunction(
        absdc.domain, absdc.value_fn, absdc.control.shifted(17.0), "pair", "shifted"
    )
    rep2 = check_control(shifted, duals=4, segments=2000, tol=1e-9, seed=5)
    assert rep1.passed == rep2.passed
    assert rep1.worst_violation == pytest.approx(rep2.worst_violation, abs=1e-12)


def test_control_monotonicity(absdc):
    # adding a convex bump to a valid control keeps it valid
    bump = fx.PSDQuadratic([[3.0]])
    fatter = DCFunction(
        absdc.domain, absdc.value_fn, fx.sum_fn([absdc.control, bump]), "pair", "fatter"
    )
    rep = check_control(fatter, duals=4, segments=4000, tol=1e-9, seed=6)
    assert rep.passed


def test_lipschitz_control_gives_lipschitz_value():
    # a d.c. function on a bounded open domain with Lipschitz control has
    # Lipschitz value: the empirical estimate stabilizes under sample growth
    f = from_pair(
        DCPair(
            fx.MaxOfAffine([[1.0], [-1.0], [2.0]], [0.0, 0.0, -0.5]),
            fx.MaxOfAffine([[0.5], [-1.5]], [0.0, -0.2]),
        ),
        domain=Interval(-2, 2, closed=False),
    )
    e1 = fx.estimate_lipschitz(lambda p: f.value_fn(p), Interval(-2, 2), 4096, seed=7)
    e2 = fx.estimate_lipschitz(lambda p: f.value_fn(p), Interval(-2, 2), 8192, seed=7)
    assert np.isfinite(e1) and np.isfinite(e2)
    assert abs(e2 - e1) < 0.05 * max(e1, 1e-9)


def test_value_and_control_lipschitz_on_inner_sets():
    # on any region compactly inside the domain, both the value and the
    # control have finite, reproducible empirical Lipschitz estimates
    from dcx.geometry import compactly_contained

    dom = Interval(-2, 2, closed=False)
    f = from_pair(DCPair(fx.PSDQuadratic([[1.0]]), fx.abs_value()), domain=dom, name="mix")
    inner = Interval(-1, 1)
    assert compactly_contained(inner, dom) is not None
    for target in (lambda p: f.value_fn(p), f.control):
        a = fx.estimate_lipschitz(target, inner, 2048, seed=8)
        b = fx.estimate_lipschitz(target, inner, 2048, seed=8)
        assert np.isfinite(a) and a == b


def test_dc_arithmetic():
    dom = Interval(-2, 2)
    x = core.dc_affine([1.0], 0.0, dom)
    c = core.dc_constant(3.0, dom)
    s = core.dc_sum([x, c])
    assert s.value(1.0) == 4.0
    n = core.dc_negate(x)
    assert n.value(1.5) == -1.5
    half = core.dc_scale(x, 0.5)
    assert half.value(1.0) == 0.5


def test_dc_max_contract():
    dom = Interval(-2, 2)
    f = from_pair(DCPair(fx.PSDQuadratic([[1.0]]), fx.abs_value()), domain=dom)  # x^2 - |x|
    m = core.dc_max([f, core.dc_constant(-0.1, dom)])
    xs = np.linspace(-2, 2, 81)
    assert np.allclose(m.value(xs), np.maximum(xs**2 - np.abs(xs), -0.1))
    rep = check_control(m, duals=4, segments=4000, tol=1e-8, seed=9)
    assert rep.passed


def test_report_json_fields(absdc):
    rep = check_control(absdc, duals=4, segments=500, tol=1e-9, seed=11)
    payload = json.loads(rep.to_json())
    assert set(payload) == {"pass", "worst_violation", "location", "counts", "seed",
                            "tolerance", "notes"}
    assert payload["seed"] == 11
    assert payload["counts"]["duals"] == 4
