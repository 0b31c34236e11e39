import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcx import geometry as geo, norms
from dcx.errors import InputError, UndecidableError
from dcx.geometry import (
    Ball,
    Box,
    EmptySet,
    HalfspaceIntersection,
    HullBody,
    Interval,
    WholeSpace,
    compactly_contained,
    dist_to_set,
    inner_parallel,
    minkowski_gauge,
    outer_parallel,
)


def test_dist_examples():
    ball = Ball(np.zeros(2), 1.0)
    assert dist_to_set(np.zeros(2), ball) == 0.0
    assert dist_to_set(np.array([2.0, 0.0]), ball) == pytest.approx(1.0, abs=1e-12)
    assert dist_to_set(0.3, Interval(0, 1)) == 0.0


def test_dist_dimension_mismatch():
    with pytest.raises(InputError):
        dist_to_set(np.array([1.0, 2.0, 3.0]), Ball(np.zeros(2), 1.0))


def test_dist_zero_iff_in_closure():
    open_ball = Ball(np.zeros(1), 1.0, closed=False)
    assert dist_to_set(np.array([1.0]), open_ball) == 0.0  # closure point
    assert not open_ball.contains(np.array([1.0]))


def test_inner_parallel_ball():
    got = inner_parallel(Ball(np.zeros(2), 1.0), 0.25)
    assert isinstance(got, Ball)
    assert got.radius == pytest.approx(0.75)
    assert not got.closed


def test_inner_parallel_box_linf_matches_grid_oracle():
    # brute-force membership grid at step 1e-3 over a coarse probe lattice
    C = Box([-1.0, -1.0], [1.0, 1.0])
    D = inner_parallel(C, 0.5, norms.LINF)
    assert isinstance(D, Box)
    assert np.allclose(D.lo, [-0.5, -0.5]) and np.allclose(D.hi, [0.5, 0.5])
    xs = np.linspace(-1.2, 1.2, 49)
    grid = np.array([[a, b] for a in xs for b in xs])
    # oracle: x in D iff every complement sample at distance <= 0.5 stays away,
    # equivalently the linf face margin exceeds 0.5 (computable directly)
    margin = np.minimum(grid - C.lo, C.hi - grid).min(axis=1)
    inside_C = C._contains(grid)
    want = inside_C & (margin > 0.5 + 1e-3)
    got = D._contains(grid)
    border = np.abs(margin - 0.5) <= 1e-3
    assert np.array_equal(got[~border], want[~border])


def test_inner_parallel_full_erosion_empty():
    assert inner_parallel(Ball(np.zeros(1), 1.0), 1.0).is_empty()


def test_inner_parallel_nesting_property():
    C = Ball(np.zeros(2), 1.0)
    small = inner_parallel(C, 0.4)
    big = inner_parallel(C, 0.1)
    rng = np.random.default_rng(0)
    pts = small.sample(rng, 256)
    assert np.all(big._contains(pts))


def test_outer_parallel_examples():
    got = outer_parallel(Ball(np.zeros(2), 0.0), 1.0)
    assert isinstance(got, Ball) and got.radius == 1.0 and not got.closed
    iv = outer_parallel(Interval(0, 1), 0.5)
    assert np.allclose(iv.lo, [-0.5]) and np.allclose(iv.hi, [1.5])
    bx = outer_parallel(Box([0.0, 0.0], [1.0, 1.0]), 0.25, norms.LINF)
    assert isinstance(bx, Box)
    assert np.allclose(bx.lo, [-0.25, -0.25]) and np.allclose(bx.hi, [1.25, 1.25])


def test_outer_parallel_box_l2_grid_oracle():
    C = Box([0.0, 0.0], [1.0, 1.0])
    E = outer_parallel(C, 0.25, norms.L2)
    xs = np.linspace(-0.6, 1.6, 45)
    grid = np.array([[a, b] for a in xs for b in xs])
    dist = C._dist(grid, norms.L2)
    border = np.abs(dist - 0.25) <= 1e-3
    assert np.array_equal(E._contains(grid)[~border], (dist < 0.25)[~border])


def test_parallel_sets_contain_and_shrink():
    C = Ball(np.zeros(2), 1.0)
    rng = np.random.default_rng(1)
    inner = inner_parallel(C, 0.3)
    pts = inner.sample(rng, 256)
    assert np.all(C._contains(pts))
    outer = outer_parallel(C, 0.3)
    pts = C.sample(rng, 256)
    assert np.all(outer._contains(pts))


def test_parallel_radius_errors():
    with pytest.raises(InputError):
        inner_parallel(Ball(np.zeros(1), 1.0), 0.0)
    with pytest.raises(InputError):
        outer_parallel(Ball(np.zeros(1), 1.0), -1.0)


def test_compactly_contained_examples():
    eps = compactly_contained(Ball(np.zeros(2), 0.5), Ball(np.zeros(2), 1.0))
    assert eps is not None and 0.4 <= eps < 0.5
    eps = compactly_contained(Interval(0, 1), Interval(-0.1, 1.1, closed=False))
    assert eps is not None and 0 < eps <= 0.1
    assert compactly_contained(Ball(np.zeros(2), 1.0), Ball(np.zeros(2), 1.0)) is None


def test_compactly_contained_certificate_is_sound():
    A, B = Ball(np.zeros(2), 0.5), Ball(np.zeros(2), 1.0)
    eps = compactly_contained(A, B)
    rng = np.random.default_rng(2)
    fat = A.sample(rng, 512) + eps * norms.sample_ball(rng, 512, 2)
    assert np.all(B._contains(fat))


def test_compactly_contained_box_pairs():
    eps = compactly_contained(Box([-1, -1], [1, 1]), Box([-2, -1.2], [2, 1.2]))
    assert eps is not None and 0 < eps <= 0.2
    assert compactly_contained(Box([-1, -1], [1, 1]), Box([-1, -1], [1, 1])) is None


def test_compactly_contained_undecidable_kind():
    oracle = geo.SublevelSet(fn=lambda p: p[:, 0] ** 2, threshold=1.0, ambient=WholeSpace(1))
    with pytest.raises(UndecidableError):
        compactly_contained(oracle, Ball(np.zeros(1), 2.0))


def test_halfspace_dist_and_vertices():
    square = HalfspaceIntersection(
        np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]), np.ones(4)
    )
    assert sorted(map(tuple, square.vertices())) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    assert square.dist(np.array([2.0, 0.0])) == pytest.approx(1.0, abs=1e-9)
    assert square.dist(np.array([2.0, 2.0])) == pytest.approx(np.sqrt(2), abs=1e-9)
    assert square.dist(np.array([2.0, 2.0]), norms.L1) == pytest.approx(2.0, abs=1e-9)
    assert square.dist(np.array([2.0, 2.0]), norms.LINF) == pytest.approx(1.0, abs=1e-9)
    assert square.inradius() == pytest.approx(1.0, abs=1e-9)


def test_halfspace_complement_distance():
    square = HalfspaceIntersection(
        np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]), np.ones(4)
    )
    assert square.dist_to_complement(np.zeros(2)) == pytest.approx(1.0)
    assert square.dist_to_complement(np.array([0.5, 0.0])) == pytest.approx(0.5)
    assert square.dist_to_complement(np.array([3.0, 0.0])) == 0.0


# ---------------------------------------------------------------- gauges


@pytest.fixture(scope="module")
def octagon():
    return HullBody(rho=0.5, base=norms.LINF, points=np.eye(2))


def test_gauge_examples(octagon):
    assert minkowski_gauge(np.array([1.0, 0.0]), octagon) == pytest.approx(1.0, abs=1e-9)
    assert minkowski_gauge(np.zeros(2), octagon) == 0.0
    assert minkowski_gauge(np.array([0.75, 0.75]), octagon) == pytest.approx(1.5, abs=1e-10)


def test_gauge_bisection_agrees_with_weight_lp(octagon):
    # the explicit hull-weight linear feasibility problem is the slow oracle
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1.5, 1.5, size=(12, 2))
    for p in pts:
        t = minkowski_gauge(p, octagon)
        if t == 0.0:
            continue
        assert octagon.membership_lp(p, scale=t * (1 + 1e-6))
        assert not octagon.membership_lp(p, scale=t * (1 - 1e-6))


def test_gauge_l1_base_body():
    diamondish = HullBody(rho=0.25, base=norms.L1, points=np.array([[1.0, 0.0]]))
    assert minkowski_gauge(np.array([1.0, 0.0]), diamondish) == pytest.approx(1.0, abs=1e-9)
    assert minkowski_gauge(np.array([0.0, 0.25]), diamondish) == pytest.approx(1.0, abs=1e-9)
    for p in [np.array([0.3, 0.1]), np.array([-0.5, 0.05])]:
        t = minkowski_gauge(p, diamondish)
        assert diamondish.membership_lp(p, scale=t * (1 + 1e-6))


def test_gauge_norm_sandwich(octagon):
    # rho ball inside body inside ambient ball: norm <= gauge <= norm/rho
    rng = np.random.default_rng(4)
    pts = rng.uniform(-2, 2, size=(200, 2))
    gs = octagon.gauge(pts)
    ns = norms.norm(pts, norms.LINF)
    assert np.all(ns <= gs + 1e-12)
    assert np.all(gs <= ns / 0.5 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(
    x=st.tuples(st.floats(-3, 3), st.floats(-3, 3)),
    t=st.floats(0, 10),
)
def test_gauge_positive_homogeneity(x, t):
    body = HullBody(rho=0.5, base=norms.LINF, points=np.eye(2))
    p = np.asarray(x)
    assert body.gauge(t * p) == pytest.approx(t * float(body.gauge(p)), abs=1e-9, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(
    x=st.tuples(st.floats(-3, 3), st.floats(-3, 3)),
    y=st.tuples(st.floats(-3, 3), st.floats(-3, 3)),
)
def test_gauge_triangle_inequality(x, y):
    body = HullBody(rho=0.5, base=norms.LINF, points=np.eye(2))
    p, q = np.asarray(x), np.asarray(y)
    assert float(body.gauge(p + q)) <= float(body.gauge(p)) + float(body.gauge(q)) + 1e-9


def test_hull_body_symmetry_and_validation():
    body = HullBody(rho=0.5, base=norms.LINF, points=np.array([[1.0, 0.0]]))
    # negation closure
    assert any(np.allclose(p, [-1.0, 0.0]) for p in body.points)
    with pytest.raises(InputError):
        HullBody(rho=-1.0, base=norms.LINF, points=np.eye(2))
    with pytest.raises(InputError):
        HullBody(rho=0.5, base=norms.L2, points=np.eye(2))


def test_set_json_round_trip():
    sets = [
        Ball(np.array([1.0, 2.0]), 3.0, closed=False, ball_norm=norms.LINF),
        Box([-1.0], [2.0]),
        HalfspaceIntersection(np.array([[1.0, 0.0]]), np.array([2.0])),
        WholeSpace(2),
        EmptySet(1),
    ]
    for s in sets:
        back = geo.set_from_json(s.to_json())
        assert back.to_json() == s.to_json()


def test_membership_convexity_sampling():
    rng = np.random.default_rng(5)
    for C in [Ball(np.zeros(2), 1.0), Box([-1, -0.5], [1, 0.5]),
              HalfspaceIntersection(np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]),
                                    np.array([1.0, 1.0, 1.0]))]:
        x = C.sample(rng, 128)
        y = C.sample(rng, 128)
        t = rng.uniform(0, 1, size=(128, 1))
        mid = t * x + (1 - t) * y
        assert np.all(C._contains(mid))
