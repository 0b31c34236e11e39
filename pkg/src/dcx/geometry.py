"""Convex sets in R^d (desk scale, d <= 3) and the geometric queries the
rest of the package is built on: membership, distance to a set, distance
to a set's complement, inner/outer parallel sets, compact containment
with a certified margin, and Minkowski gauges of polytopal hull bodies.

Sets are immutable after construction and all queries are pure, so values
can be shared freely between threads.  Distance queries are taken to the
closure of the set; the open/closed flag only affects membership.

Points are numpy arrays of shape ``(d,)`` or batches ``(n, d)``; scalars
are accepted in dimension one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from . import norms
from .errors import InputError, InternalError, UndecidableError

_FEAS_TOL = 1e-9


def as_points(x, dim: int):
    """Return ``(pts, was_single)`` with pts of shape (n, dim)."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        if dim != 1:
            raise InputError(f"scalar point given for dimension {dim}")
        return a.reshape(1, 1), True
    if a.ndim == 1:
        if a.shape[0] == dim:
            return a.reshape(1, dim), True
        if dim == 1:
            return a.reshape(-1, 1), False
        raise InputError(f"point of dimension {a.shape[0]} given, set has dimension {dim}")
    if a.ndim == 2:
        if a.shape[1] != dim:
            raise InputError(f"points of dimension {a.shape[1]} given, set has dimension {dim}")
        return a, False
    raise InputError(f"bad point array of shape {a.shape}")


def _unsqueeze(values: np.ndarray, single: bool):
    return values[0] if single else values


def rowdot(pts: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """(n, d) x (k, d) -> (n, k) dot products, accumulated coordinate by
    coordinate in a fixed order so results are bit-identical across batch
    shapes (unlike BLAS matmul)."""
    acc = pts[:, 0:1] * rows[:, 0]
    for k in range(1, rows.shape[1]):
        acc = acc + pts[:, k : k + 1] * rows[:, k]
    return acc


# --------------------------------------------------------------------------
# set kinds
# --------------------------------------------------------------------------


class ConvexSet:
    """Base class; concrete kinds implement membership and, where the
    representation allows it, exact distance queries."""

    dim: int
    closed: bool = True

    # -- membership ---------------------------------------------------

    def contains(self, x):
        pts, single = as_points(x, self.dim)
        return _unsqueeze(self._contains(pts), single)

    def _contains(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- distances ----------------------------------------------------

    def dist(self, x, norm_kind: str = norms.L2):
        """Distance from x to the closure of the set, in the ambient norm."""
        pts, single = as_points(x, self.dim)
        return _unsqueeze(self._dist(pts, norm_kind), single)

    def _dist(self, pts, norm_kind):
        raise UndecidableError(f"distance query unsupported for {type(self).__name__}")

    def dist_to_complement(self, x, norm_kind: str = norms.L2):
        """Distance to the complement of the set (0 outside).  Exact for
        analytic kinds; this is the erosion primitive."""
        pts, single = as_points(x, self.dim)
        return _unsqueeze(self._dist_complement(pts, norm_kind), single)

    def _dist_complement(self, pts, norm_kind):
        raise UndecidableError(
            f"complement-distance query unsupported for {type(self).__name__}"
        )

    # -- structure ----------------------------------------------------

    def is_empty(self) -> bool:
        return False

    def is_bounded(self) -> bool:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise UndecidableError(f"no bounding box for {type(self).__name__}")

    def vertices(self) -> Optional[np.ndarray]:
        """Extreme points for polytopal kinds; None otherwise."""
        return None

    def inradius(self, norm_kind: str = norms.L2) -> float:
        raise UndecidableError(f"inradius unsupported for {type(self).__name__}")

    def sample(self, rng: np.random.Generator, n: int, norm_kind: str = norms.L2) -> np.ndarray:
        raise UndecidableError(f"sampling unsupported for {type(self).__name__}")

    def to_json(self) -> dict:
        raise UndecidableError(f"serialization unsupported for {type(self).__name__}")


@dataclass(frozen=True)
class EmptySet(ConvexSet):
    dim: int = 1
    closed: bool = True

    def _contains(self, pts):
        return np.zeros(len(pts), dtype=bool)

    def _dist(self, pts, norm_kind):
        return np.full(len(pts), np.inf)

    def _dist_complement(self, pts, norm_kind):
        return np.zeros(len(pts))

    def is_empty(self):
        return True

    def is_bounded(self):
        return True

    def to_json(self):
        return {"kind": "empty", "dim": self.dim}


@dataclass(frozen=True)
class WholeSpace(ConvexSet):
    dim: int = 1
    closed: bool = True

    def _contains(self, pts):
        return np.ones(len(pts), dtype=bool)

    def _dist(self, pts, norm_kind):
        return np.zeros(len(pts))

    def _dist_complement(self, pts, norm_kind):
        return np.full(len(pts), np.inf)

    def is_bounded(self):
        return False

    def sample(self, rng, n, norm_kind=norms.L2):
        raise InputError("cannot sample the whole space; pass a bounded working region")

    def to_json(self):
        return {"kind": "whole-space", "dim": self.dim}


@dataclass(frozen=True)
class Ball(ConvexSet):
    """Norm ball.  ``ball_norm`` defaults to l2 (a euclidean ball); stages
    and working regions in a non-euclidean workspace use the ambient kind."""

    center: np.ndarray
    radius: float
    closed: bool = True
    ball_norm: str = norms.L2

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if self.radius < 0:
            raise InputError("ball radius must be >= 0")
        norms.check_kind(self.ball_norm)

    @property
    def dim(self):
        return self.center.shape[0]

    def _r(self, pts):
        return norms.norm(pts - self.center, self.ball_norm)

    def _contains(self, pts):
        r = self._r(pts)
        return r <= self.radius if self.closed else r < self.radius

    def _dist(self, pts, norm_kind):
        if norm_kind == self.ball_norm:
            return np.maximum(0.0, self._r(pts) - self.radius)
        if self.radius == 0.0:
            return norms.norm(pts - self.center, norm_kind)
        if self.ball_norm in (norms.L1, norms.LINF):
            # polyhedral balls reduce to exact polytope distances
            return self._as_polytope()._dist(pts, norm_kind)
        # l2 ball under l1/linf ambient: per-point numeric solve (edge case)
        return np.array([_dist_l2ball_mixed(p, self, norm_kind) for p in pts])

    def _as_polytope(self) -> "HalfspaceIntersection":
        if self.ball_norm == norms.LINF:
            box = Box(self.center - self.radius, self.center + self.radius)
            eye = np.eye(self.dim)
            A = np.vstack([eye, -eye])
            b = np.concatenate([box.hi, -box.lo])
            return HalfspaceIntersection(A, b, closed=self.closed)
        if self.ball_norm == norms.L1:
            signs = Box(-np.ones(self.dim), np.ones(self.dim)).vertices()
            A = signs
            b = self.radius + signs @ self.center
            return HalfspaceIntersection(A, b, closed=self.closed)
        raise UndecidableError("only polyhedral balls convert to polytopes")

    def _dist_complement(self, pts, norm_kind):
        if norm_kind != self.ball_norm:
            raise UndecidableError(
                "complement distance of a ball needs the ambient norm to match the ball norm"
            )
        return np.maximum(0.0, self.radius - self._r(pts))

    def is_bounded(self):
        return True

    def bounding_box(self):
        # the unit ball of each supported norm has coordinate extent 1
        return self.center - self.radius, self.center + self.radius

    def inradius(self, norm_kind=norms.L2):
        return self.radius / _norm_cover_factor(self.ball_norm, norm_kind, self.dim)

    def sample(self, rng, n, norm_kind=norms.L2):
        return self.center + self.radius * norms.sample_ball(rng, n, self.dim, self.ball_norm)

    def boundary_sample(self, rng, n):
        return self.center + self.radius * norms.sample_sphere(rng, n, self.dim, self.ball_norm)

    def to_json(self):
        return {
            "kind": "ball",
            "center": list(map(float, self.center)),
            "radius": float(self.radius),
            "closed": self.closed,
            "norm": self.ball_norm,
        }


@dataclass(frozen=True)
class Box(ConvexSet):
    lo: np.ndarray
    hi: np.ndarray
    closed: bool = True

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape:
            raise InputError("box lo/hi shape mismatch")
        if np.any(hi < lo):
            raise InputError("box needs lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.shape[0]

    def _contains(self, pts):
        if self.closed:
            return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        # degenerate coordinates stay closed so thin boxes are nonempty
        degen = self.hi - self.lo == 0
        strict = (pts > self.lo) & (pts < self.hi)
        eq = pts == self.lo
        ok = np.where(degen, eq, strict)
        return np.all(ok, axis=1)

    def _dist(self, pts, norm_kind):
        clamped = np.clip(pts, self.lo, self.hi)
        return norms.norm(pts - clamped, norm_kind)

    def _dist_complement(self, pts, norm_kind):
        # complement distance is the least face margin for l1/l2/linf alike
        # (face normals are +-e_i, whose dual norms are all 1)
        margins = np.minimum(pts - self.lo, self.hi - pts).min(axis=1)
        return np.maximum(margins, 0.0)

    def is_bounded(self):
        return True

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def vertices(self):
        d = self.dim
        corners = np.array(
            [[(self.hi if (i >> k) & 1 else self.lo)[k] for k in range(d)] for i in range(2**d)]
        )
        return np.unique(corners, axis=0)

    def inradius(self, norm_kind=norms.L2):
        return float(np.min(self.hi - self.lo)) / 2.0

    def sample(self, rng, n, norm_kind=norms.L2):
        return rng.uniform(size=(n, self.dim)) * (self.hi - self.lo) + self.lo

    def to_json(self):
        return {
            "kind": "box",
            "lo": list(map(float, self.lo)),
            "hi": list(map(float, self.hi)),
            "closed": self.closed,
        }


def Interval(a: float, b: float, closed: bool = True) -> Box:
    """One-dimensional convex set [a, b] (or (a, b) when open)."""
    if b < a:
        raise InputError("interval needs a <= b")
    return Box(np.array([a]), np.array([b]), closed=closed)


@dataclass(frozen=True)
class HalfspaceIntersection(ConvexSet):
    """{x : A x <= b}; rows are (normal, offset) pairs.  Open flag makes
    the inequalities strict."""

    normals: np.ndarray
    offsets: np.ndarray
    closed: bool = True
    _vertex_cache: list = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if A.shape[0] != b.shape[0]:
            raise InputError("normals/offsets length mismatch")
        if np.any(norms.norm(A, norms.L2) == 0):
            raise InputError("zero normal in halfspace list")
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)

    @property
    def dim(self):
        return self.normals.shape[1]

    def _slacks(self, pts):
        return self.offsets - pts @ self.normals.T

    def _contains(self, pts):
        s = self._slacks(pts)
        tol = _FEAS_TOL * (1.0 + np.abs(self.offsets))
        if self.closed:
            return np.all(s >= -tol, axis=1)
        return np.all(s > 0, axis=1)

    def _dist(self, pts, norm_kind):
        if norm_kind == norms.L2:
            return _dist_l2_polytope(pts, self.normals, self.offsets)[0]
        return np.array(
            [_dist_lp_polytope(p, self.normals, self.offsets, norm_kind) for p in pts]
        )

    def project(self, pts: np.ndarray) -> np.ndarray:
        """Euclidean projection onto the set (exact, active-set enumeration)."""
        return _dist_l2_polytope(np.atleast_2d(pts), self.normals, self.offsets)[1]

    def _dist_complement(self, pts, norm_kind):
        dual = norms.dual_kind(norm_kind)
        w = norms.norm(self.normals, dual)
        margins = self._slacks(pts) / w
        return np.maximum(margins.min(axis=1), 0.0)

    def is_bounded(self):
        return self.vertices() is not None and len(self.vertices()) > 0 and self._is_bounded_flag

    @property
    def _is_bounded_flag(self):
        vs = self.vertices()
        if vs is None or len(vs) == 0:
            return False
        # bounded iff recession cone is trivial: check that every coordinate
        # direction is blocked by some constraint
        A = self.normals
        for d in range(self.dim):
            for sgn in (1.0, -1.0):
                if not np.any(A[:, d] * sgn > 1e-12):
                    ray = np.zeros(self.dim)
                    ray[d] = sgn
                    if np.all(A @ ray <= 1e-12):
                        return False
        return True

    def vertices(self):
        if not self._vertex_cache:
            self._vertex_cache.append(_polytope_vertices(self.normals, self.offsets))
        return self._vertex_cache[0]

    def bounding_box(self):
        vs = self.vertices()
        if vs is None or len(vs) == 0:
            raise UndecidableError("unbounded or empty halfspace intersection")
        return vs.min(axis=0), vs.max(axis=0)

    def inradius(self, norm_kind=norms.L2):
        from scipy.optimize import linprog

        dual = norms.dual_kind(norm_kind)
        w = norms.norm(self.normals, dual)
        d = self.dim
        # max s  s.t.  A x + s w <= b
        c = np.zeros(d + 1)
        c[-1] = -1.0
        A_ub = np.hstack([self.normals, w.reshape(-1, 1)])
        res = linprog(c, A_ub=A_ub, b_ub=self.offsets, bounds=[(None, None)] * d + [(0, None)])
        if not res.success:
            return 0.0
        return float(res.x[-1])

    def sample(self, rng, n, norm_kind=norms.L2):
        lo, hi = self.bounding_box()
        out = np.empty((n, self.dim))
        got = 0
        for _ in range(10_000):
            batch = rng.uniform(size=(max(4 * n, 64), self.dim)) * (hi - lo) + lo
            keep = batch[self._contains(batch)]
            take = min(n - got, len(keep))
            out[got : got + take] = keep[:take]
            got += take
            if got == n:
                return out
        raise InternalError("rejection sampling failed; set may have tiny volume")

    def to_json(self):
        return {
            "kind": "halfspaces",
            "normals": [list(map(float, a)) for a in self.normals],
            "offsets": list(map(float, self.offsets)),
            "closed": self.closed,
        }


@dataclass(frozen=True)
class DilatedSet(ConvexSet):
    """Open outer parallel set {x : dist(x, base) < r} of a convex base.

    Used where the dilation is not itself expressible in the five basic
    kinds (boxes under l1/l2 ambient norms, polytopes).
    """

    base: ConvexSet
    r: float
    norm_kind: str = norms.L2
    closed: bool = False

    def __post_init__(self):
        if self.r <= 0:
            raise InputError("dilation radius must be > 0")

    @property
    def dim(self):
        return self.base.dim

    def _contains(self, pts):
        d = self.base._dist(pts, self.norm_kind)
        return d <= self.r if self.closed else d < self.r

    def _dist(self, pts, norm_kind):
        if norm_kind != self.norm_kind:
            raise UndecidableError("dilated set queried under a different norm")
        return np.maximum(0.0, self.base._dist(pts, norm_kind) - self.r)

    def _dist_complement(self, pts, norm_kind):
        if norm_kind != self.norm_kind:
            raise UndecidableError("dilated set queried under a different norm")
        return np.maximum(0.0, self.r - self.base._dist(pts, norm_kind))

    def is_bounded(self):
        return self.base.is_bounded()

    def bounding_box(self):
        lo, hi = self.base.bounding_box()
        return lo - self.r, hi + self.r

    def inradius(self, norm_kind=norms.L2):
        if norm_kind != self.norm_kind:
            raise UndecidableError("dilated set queried under a different norm")
        try:
            return self.base.inradius(norm_kind) + self.r
        except UndecidableError:
            return self.r

    def sample(self, rng, n, norm_kind=norms.L2):
        lo, hi = self.bounding_box()
        out = np.empty((n, self.dim))
        got = 0
        for _ in range(10_000):
            batch = rng.uniform(size=(max(4 * n, 64), self.dim)) * (hi - lo) + lo
            keep = batch[self._contains(batch)]
            take = min(n - got, len(keep))
            out[got : got + take] = keep[:take]
            got += take
            if got == n:
                return out
        raise InternalError("rejection sampling failed on dilated set")

    def to_json(self):
        return {
            "kind": "dilated",
            "base": self.base.to_json(),
            "r": float(self.r),
            "norm": self.norm_kind,
        }


@dataclass(frozen=True)
class SublevelSet(ConvexSet):
    """Oracle set {x in ambient : f(x) < threshold} for a convex f.

    Membership is by evaluation; metric queries are undecidable, so the
    gluing pipeline replaces these with inscribed polytopes first.
    """

    fn: object
    threshold: float
    ambient: ConvexSet
    closed: bool = False

    @property
    def dim(self):
        return self.ambient.dim

    def _contains(self, pts):
        inside = self.ambient._contains(pts)
        vals = np.full(len(pts), np.inf)
        if np.any(inside):
            vals[inside] = np.asarray(self.fn(pts[inside]), dtype=float)
        return inside & (vals < self.threshold)

    def is_bounded(self):
        return self.ambient.is_bounded()

    def to_json(self):
        raise UndecidableError("oracle sublevel sets do not serialize")


@dataclass(frozen=True)
class IntersectionSet(ConvexSet):
    """Intersection of convex sets; membership-only unless all parts agree."""

    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise InputError("empty intersection list")
        dims = {p.dim for p in self.parts}
        if len(dims) != 1:
            raise InputError("intersection of sets with different dimensions")

    @property
    def dim(self):
        return self.parts[0].dim

    @property
    def closed(self):
        return all(p.closed for p in self.parts)

    def _contains(self, pts):
        out = np.ones(len(pts), dtype=bool)
        for p in self.parts:
            out &= p._contains(pts)
        return out

    def _dist_complement(self, pts, norm_kind):
        vals = [p._dist_complement(pts, norm_kind) for p in self.parts]
        return np.minimum.reduce(vals)

    def is_bounded(self):
        return any(p.is_bounded() for p in self.parts)

    def bounding_box(self):
        los, his = [], []
        for p in self.parts:
            try:
                lo, hi = p.bounding_box()
            except UndecidableError:
                continue
            los.append(lo)
            his.append(hi)
        if not los:
            raise UndecidableError("no bounded part in intersection")
        return np.max(los, axis=0), np.min(his, axis=0)

    def sample(self, rng, n, norm_kind=norms.L2):
        lo, hi = self.bounding_box()
        out = np.empty((n, self.dim))
        got = 0
        for _ in range(10_000):
            batch = rng.uniform(size=(max(4 * n, 64), self.dim)) * (hi - lo) + lo
            keep = batch[self._contains(batch)]
            take = min(n - got, len(keep))
            out[got : got + take] = keep[:take]
            got += take
            if got == n:
                return out
        raise InternalError("rejection sampling failed on intersection")


def intersect(a: ConvexSet, b: ConvexSet) -> ConvexSet:
    """Intersection with cheap simplifications for matching kinds."""
    if isinstance(a, WholeSpace):
        return b
    if isinstance(b, WholeSpace):
        return a
    if a.is_empty() or b.is_empty():
        return EmptySet(a.dim)
    if isinstance(a, Box) and isinstance(b, Box):
        lo = np.maximum(a.lo, b.lo)
        hi = np.minimum(a.hi, b.hi)
        if np.any(hi < lo):
            return EmptySet(a.dim)
        return Box(lo, hi, closed=a.closed and b.closed)
    if isinstance(a, HalfspaceIntersection) and isinstance(b, HalfspaceIntersection):
        return HalfspaceIntersection(
            np.vstack([a.normals, b.normals]),
            np.concatenate([a.offsets, b.offsets]),
            closed=a.closed and b.closed,
        )
    if isinstance(a, Ball) and isinstance(b, Ball) and a.ball_norm == b.ball_norm:
        if np.array_equal(a.center, b.center):
            small, big = (a, b) if a.radius <= b.radius else (b, a)
            return Ball(small.center, small.radius, small.closed and big.closed, small.ball_norm)
    return IntersectionSet((a, b))


# --------------------------------------------------------------------------
# polytope internals
# --------------------------------------------------------------------------


def _subset_indices(m: int, d: int):
    for k in range(1, d + 1):
        yield from combinations(range(m), k)


def _dist_l2_polytope(pts: np.ndarray, A: np.ndarray, b: np.ndarray):
    """Exact euclidean distance and projection via active-set enumeration.

    Sound for the small facet counts used at desk scale; every candidate
    projection is the least-squares projection onto the affine span of an
    active subset, filtered by feasibility.
    """
    n, d = pts.shape
    tol = _FEAS_TOL * (1.0 + np.abs(b))
    feas = (pts @ A.T - b <= tol).all(axis=1)
    best = np.where(feas, 0.0, np.inf)
    proj = np.where(feas[:, None], pts, np.nan)
    m = A.shape[0]
    for S in _subset_indices(m, d):
        A_S = A[list(S)]
        M = A_S @ A_S.T
        if abs(np.linalg.det(M)) < 1e-12 * max(1.0, np.abs(M).max() ** len(S)):
            continue
        resid = pts @ A_S.T - b[list(S)]
        lam = np.linalg.solve(M, resid.T).T
        cand = pts - lam @ A_S
        ok = (cand @ A.T - b <= tol).all(axis=1)
        dist = np.linalg.norm(pts - cand, axis=1)
        better = ok & (dist < best)
        best = np.where(better, dist, best)
        proj = np.where(better[:, None], cand, proj)
    if np.any(~np.isfinite(best)):
        raise InternalError("projection enumeration failed: empty polytope?")
    return best, proj


def _dist_lp_polytope(p: np.ndarray, A: np.ndarray, b: np.ndarray, norm_kind: str) -> float:
    """Exact l1/linf distance to {A x <= b} by linear programming."""
    from scipy.optimize import linprog

    d = len(p)
    m = A.shape[0]
    if norm_kind == norms.L1:
        # vars (c, s): min sum s;  c - s <= p, -c - s <= -p, A c <= b
        c_vec = np.concatenate([np.zeros(d), np.ones(d)])
        eye = np.eye(d)
        A_ub = np.vstack(
            [
                np.hstack([eye, -eye]),
                np.hstack([-eye, -eye]),
                np.hstack([A, np.zeros((m, d))]),
            ]
        )
        b_ub = np.concatenate([p, -p, b])
        res = linprog(c_vec, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * d + [(0, None)] * d)
    elif norm_kind == norms.LINF:
        c_vec = np.concatenate([np.zeros(d), [1.0]])
        eye = np.eye(d)
        ones = np.ones((d, 1))
        A_ub = np.vstack(
            [
                np.hstack([eye, -ones]),
                np.hstack([-eye, -ones]),
                np.hstack([A, np.zeros((m, 1))]),
            ]
        )
        b_ub = np.concatenate([p, -p, b])
        res = linprog(c_vec, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * d + [(0, None)])
    else:
        raise InputError(f"unsupported norm kind {norm_kind!r}")
    if not res.success:
        raise InternalError(f"distance LP failed: {res.message}")
    return float(res.fun)


def _dist_l2ball_mixed(p: np.ndarray, ball: "Ball", norm_kind: str) -> float:
    """l1/linf distance from p to a euclidean ball; small smooth solve."""
    from scipy.optimize import minimize

    c, r = ball.center, ball.radius
    if np.linalg.norm(p - c) <= r:
        return 0.0

    def objective(y):
        return float(norms.norm(p - y, norm_kind))

    cons = {"type": "ineq", "fun": lambda y: r**2 - float((y - c) @ (y - c))}
    start = c + r * (p - c) / np.linalg.norm(p - c)
    best = objective(start)
    for shrink in (1.0, 0.5, 0.9):
        x0 = c + shrink * r * (p - c) / np.linalg.norm(p - c)
        res = minimize(objective, x0, constraints=[cons], method="SLSQP")
        if res.success:
            best = min(best, objective(res.x))
    return best


def _polytope_vertices(A: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
    """Vertices of {A x <= b} by basis enumeration; None when unbounded in
    a detectable way is handled by the caller."""
    m, d = A.shape
    pts = []
    tol = _FEAS_TOL * (1.0 + np.abs(b))
    for S in combinations(range(m), d):
        A_S = A[list(S)]
        if abs(np.linalg.det(A_S)) < 1e-12:
            continue
        v = np.linalg.solve(A_S, b[list(S)])
        if np.all(A @ v - b <= tol):
            pts.append(v)
    if not pts:
        return np.empty((0, d))
    pts = np.asarray(pts)
    # dedupe
    order = np.lexsort(pts.T)
    pts = pts[order]
    keep = [0]
    for i in range(1, len(pts)):
        if np.linalg.norm(pts[i] - pts[keep[-1]]) > 1e-9 * (1 + np.abs(pts[i]).max()):
            keep.append(i)
    return pts[keep]


def hull_polytope(points: np.ndarray, closed: bool = True) -> ConvexSet:
    """Convex hull of finitely many points as a halfspace intersection.

    Dimension one reduces to an interval; higher dimensions go through
    scipy's hull.  Degenerate (flat) hulls raise: the gluing pipeline only
    feeds full-dimensional stage sets here.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = pts.shape[1]
    if d == 1:
        return Box(np.array([pts.min()]), np.array([pts.max()]), closed=closed)
    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise InputError(f"degenerate point set for hull: {exc}") from exc
    A = hull.equations[:, :-1]
    b = -hull.equations[:, -1]
    return HalfspaceIntersection(A, b, closed=closed)


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------


def dist_to_set(x, C: ConvexSet, norm_kind: str = norms.L2):
    """inf over c in C of ||x - c|| in the ambient norm (0 iff x in the
    closure of C)."""
    norms.check_kind(norm_kind)
    return C.dist(x, norm_kind)


def inner_parallel(C: ConvexSet, r: float, norm_kind: str = norms.L2) -> ConvexSet:
    """Open erosion {x in C : dist(x, complement of C) > r}.

    Exact for balls (matching norm), boxes, intervals and halfspace
    intersections; convexity of the result comes with the construction.
    """
    if r <= 0:
        raise InputError("erosion radius must be > 0")
    norms.check_kind(norm_kind)
    if isinstance(C, WholeSpace) or isinstance(C, EmptySet):
        return C
    if isinstance(C, Ball):
        if C.ball_norm != norm_kind:
            raise UndecidableError("erosion of a ball under a different ambient norm")
        if C.radius - r <= 0:
            return EmptySet(C.dim)
        return Ball(C.center, C.radius - r, closed=False, ball_norm=C.ball_norm)
    if isinstance(C, Box):
        lo, hi = C.lo + r, C.hi - r
        if np.any(hi <= lo):
            return EmptySet(C.dim)
        return Box(lo, hi, closed=False)
    if isinstance(C, HalfspaceIntersection):
        w = norms.norm(C.normals, norms.dual_kind(norm_kind))
        shrunk = HalfspaceIntersection(C.normals, C.offsets - r * w, closed=False)
        vs = shrunk.vertices()
        if vs is not None and len(vs) == 0:
            return EmptySet(C.dim)
        return shrunk
    if isinstance(C, DilatedSet):
        if norm_kind != C.norm_kind:
            raise UndecidableError("dilated set queried under a different norm")
        if r < C.r:
            return DilatedSet(C.base, C.r - r, C.norm_kind)
        # erosion eats the whole dilation margin; erode the base further
        rest = r - C.r
        if rest == 0:
            # closure of base vs base: erosion by the full margin keeps the base's interior
            return inner_parallel(C.base, 1e-300, norm_kind)
        return inner_parallel(C.base, rest, norm_kind)
    raise UndecidableError(f"inner parallel unsupported for {type(C).__name__}")


def outer_parallel(C: ConvexSet, r: float, norm_kind: str = norms.L2) -> ConvexSet:
    """Open dilation {x : dist(x, C) < r}."""
    if r <= 0:
        raise InputError("dilation radius must be > 0")
    norms.check_kind(norm_kind)
    if isinstance(C, WholeSpace) or isinstance(C, EmptySet):
        return C
    if isinstance(C, Ball):
        if C.ball_norm == norm_kind:
            return Ball(C.center, C.radius + r, closed=False, ball_norm=C.ball_norm)
        if C.radius == 0.0:
            return Ball(C.center, r, closed=False, ball_norm=norm_kind)
        return DilatedSet(C, r, norm_kind)
    if isinstance(C, Box):
        if C.dim == 1 or norm_kind == norms.LINF:
            return Box(C.lo - r, C.hi + r, closed=False)
        return DilatedSet(C, r, norm_kind)
    return DilatedSet(C, r, norm_kind)


def _support(A: ConvexSet, direction: np.ndarray, norm_kind: str) -> float:
    """sup over x in A of <direction, x>; certified upper bound."""
    if isinstance(A, Ball):
        return float(direction @ A.center) + A.radius * float(
            norms.norm(direction, norms.dual_kind(A.ball_norm))
        )
    vs = A.vertices()
    if vs is not None and len(vs):
        if isinstance(A, HalfspaceIntersection) and not A._is_bounded_flag:
            raise UndecidableError("support of an unbounded polytope")
        return float((vs @ direction).max())
    if isinstance(A, DilatedSet):
        return _support(A.base, direction, norm_kind) + A.r * float(
            norms.norm(direction, norms.dual_kind(A.norm_kind))
        )
    raise UndecidableError(f"support function unsupported for {type(A).__name__}")


def _sup_norm_to(A: ConvexSet, center: np.ndarray, norm_kind: str) -> float:
    """Certified upper bound for sup over x in A of ||x - center||."""
    if isinstance(A, Ball):
        base = norms.norm(A.center - center, norm_kind)
        if A.ball_norm == norm_kind:
            return float(base) + A.radius
        return float(base) + A.radius * _norm_cover_factor(norm_kind, A.ball_norm, A.dim)
    vs = A.vertices()
    if vs is not None and len(vs):
        return float(norms.norm(vs - center, norm_kind).max())
    if isinstance(A, DilatedSet):
        return _sup_norm_to(A.base, center, norm_kind) + A.r
    raise UndecidableError(f"norm supremum unsupported for {type(A).__name__}")


def _norm_cover_factor(target: str, source: str, dim: int) -> float:
    """Least c with ||x||_target <= c ||x||_source (standard norm table)."""
    if target == source:
        return 1.0
    table = {
        (norms.L1, norms.L2): np.sqrt(dim),
        (norms.L1, norms.LINF): float(dim),
        (norms.L2, norms.LINF): np.sqrt(dim),
        (norms.L2, norms.L1): 1.0,
        (norms.LINF, norms.L1): 1.0,
        (norms.LINF, norms.L2): 1.0,
    }
    return float(table[(target, source)])


def compactly_contained(
    A: ConvexSet, B: ConvexSet, norm_kind: str = norms.L2
) -> Optional[float]:
    """A certified eps > 0 with A + ball(0, eps) inside B, or None.

    Computed analytically per kind pair (support functions / radii); the
    returned value is 90% of the best margin the bound yields, so it is
    strictly feasible.  Unsupported pairs raise UndecidableError rather
    than silently answering.
    """
    norms.check_kind(norm_kind)
    if A.dim != B.dim:
        raise InputError("dimension mismatch")
    if A.is_empty():
        return 1.0
    if isinstance(B, WholeSpace):
        return 1.0
    if isinstance(A, WholeSpace):
        return None

    slack: Optional[float] = None
    if isinstance(B, Ball):
        if B.ball_norm != norm_kind:
            raise UndecidableError("containment in a ball of a different norm")
        slack = B.radius - _sup_norm_to(A, B.center, norm_kind)
    elif isinstance(B, Box):
        lo, hi = B.lo, B.hi
        margins = []
        d = B.dim
        for k in range(d):
            e = np.zeros(d)
            e[k] = 1.0
            margins.append(hi[k] - _support(A, e, norm_kind))
            margins.append(_support(A, -e, norm_kind) * -1.0 - lo[k])
        # ambient unit balls have coordinate extent 1, so eps adds 1:1
        slack = float(min(margins))
    elif isinstance(B, HalfspaceIntersection):
        w = norms.norm(B.normals, norms.dual_kind(norm_kind))
        gaps = [
            (B.offsets[i] - _support(A, B.normals[i], norm_kind)) / w[i]
            for i in range(len(B.offsets))
        ]
        slack = float(min(gaps))
    elif isinstance(B, DilatedSet):
        if B.norm_kind != norm_kind:
            raise UndecidableError("containment in a dilation under a different norm")
        # A + ball(eps) inside base + ball(r) as soon as sup dist(A, base) + eps <= r
        slack = B.r - _sup_dist_to(A, B.base, norm_kind)
    else:
        raise UndecidableError(
            f"containment undecidable for kinds {type(A).__name__} in {type(B).__name__}"
        )
    if slack is None or slack <= 0:
        return None
    return 0.9 * slack


def _sup_dist_to(A: ConvexSet, base: ConvexSet, norm_kind: str) -> float:
    vs = A.vertices()
    if vs is not None and len(vs):
        return float(base._dist(vs, norm_kind).max())
    if isinstance(A, Ball):
        return float(base._dist(A.center.reshape(1, -1), norm_kind)[0]) + A.radius
    raise UndecidableError(f"distance supremum unsupported for {type(A).__name__}")


# --------------------------------------------------------------------------
# hull bodies and the Minkowski gauge
# --------------------------------------------------------------------------


def _base_ball_vertices(kind: str, dim: int) -> np.ndarray:
    if kind == norms.LINF:
        return Box(-np.ones(dim), np.ones(dim)).vertices()
    if kind == norms.L1:
        return np.vstack([np.eye(dim), -np.eye(dim)])
    raise InputError("hull bodies support polyhedral base balls only (l1 or linf)")


@dataclass(frozen=True)
class HullBody:
    """conv(rho * base ball  union  {+-p_i}) — the unit ball of an
    equivalent norm when the points have ambient norm <= 1 and rho > 0.

    Restricted to polyhedral base balls so that membership is exact linear
    feasibility; the facet form (computed once) answers gauge queries in a
    handful of dot products.
    """

    rho: float
    base: str
    points: np.ndarray
    _facets: list = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self):
        if self.rho <= 0:
            raise InputError("rho must be positive")
        if self.base not in (norms.L1, norms.LINF):
            raise InputError("base ball must be polyhedral: 'l1' or 'linf'")
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        # close the point list under negation (symmetry invariant)
        full = np.vstack([pts, -pts])
        order = np.lexsort(full.T)
        full = full[order]
        keep = [0]
        for i in range(1, len(full)):
            if np.linalg.norm(full[i] - full[keep[-1]]) > 1e-12:
                keep.append(i)
        object.__setattr__(self, "points", full[keep])

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def generator_vertices(self) -> np.ndarray:
        return np.vstack([self.rho * _base_ball_vertices(self.base, self.dim), self.points])

    def facets(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, b) with body = {x : A x <= b}, b normalized to 1."""
        if not self._facets:
            gens = self.generator_vertices()
            if self.dim == 1:
                r = float(np.abs(gens).max())
                A = np.array([[1.0], [-1.0]])
                b = np.array([r, r])
            else:
                from scipy.spatial import ConvexHull

                hull = ConvexHull(gens)
                A = hull.equations[:, :-1]
                b = -hull.equations[:, -1]
            if np.any(b <= 0):
                raise InternalError("hull body does not contain the origin in its interior")
            A = A / b[:, None]
            b = np.ones(len(b))
            self._facets.append((A, b))
        return self._facets[0]

    def gauge(self, x) -> np.ndarray:
        """Exact gauge via the facet form: max_i <a_i, x> (vectorized).

        The dot products accumulate coordinate by coordinate rather than
        through matmul so results are bit-identical across batch shapes
        (constructions cache gauge values and rely on reproducing them).
        """
        pts, single = as_points(x, self.dim)
        A, _ = self.facets()
        vals = np.maximum(rowdot(pts, A).max(axis=1), 0.0)
        return _unsqueeze(vals, single)

    def contains(self, x, scale: float = 1.0):
        pts, single = as_points(x, self.dim)
        A, b = self.facets()
        ok = np.all(pts @ A.T <= scale * b + 1e-12, axis=1)
        return _unsqueeze(ok, single)

    def membership_lp(self, x: np.ndarray, scale: float = 1.0) -> bool:
        """Membership of x in scale * body as the explicit linear
        feasibility problem over hull weights.  This is the slow reference
        route; the facet form must agree with it, and tests check that.

        Feasibility: x = w + P^T (alpha - beta), ||w||_base <= lam * rho,
        lam + sum(alpha) + sum(beta) = scale, all weights >= 0.
        """
        from scipy.optimize import linprog

        x = np.asarray(x, dtype=float).reshape(-1)
        d = self.dim
        P = self.points
        k = P.shape[0]
        # variables: w (d, free), lam (1), mu (k)   [point list already symmetric]
        n_var = d + 1 + k
        A_eq = np.zeros((d + 1, n_var))
        A_eq[:d, :d] = np.eye(d)
        A_eq[:d, d + 1 :] = P.T
        A_eq[d, d:] = 1.0
        b_eq = np.concatenate([x, [scale]])
        bounds = [(None, None)] * d + [(0, None)] * (1 + k)
        if self.base == norms.LINF:
            # |w_j| <= lam * rho
            A_ub = np.zeros((2 * d, n_var))
            A_ub[:d, :d] = np.eye(d)
            A_ub[d:, :d] = -np.eye(d)
            A_ub[:, d] = -self.rho
            b_ub = np.zeros(2 * d)
        else:
            # sum |w_j| <= lam * rho via s_j >= +-w_j
            n_var2 = n_var + d
            A_eq = np.hstack([A_eq, np.zeros((d + 1, d))])
            A_ub = np.zeros((2 * d + 1, n_var2))
            A_ub[:d, :d] = np.eye(d)
            A_ub[:d, n_var:] = -np.eye(d)
            A_ub[d : 2 * d, :d] = -np.eye(d)
            A_ub[d : 2 * d, n_var:] = -np.eye(d)
            A_ub[2 * d, n_var:] = 1.0
            A_ub[2 * d, d] = -self.rho
            b_ub = np.zeros(2 * d + 1)
            bounds = bounds + [(0, None)] * d
            res = linprog(
                np.zeros(n_var2), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds
            )
            return bool(res.success)
        res = linprog(np.zeros(n_var), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds)
        return bool(res.success)

    def circumradius(self, norm_kind: str) -> float:
        gens = self.generator_vertices()
        return float(norms.norm(gens, norm_kind).max())

    def to_json(self):
        return {
            "kind": "hull-body",
            "rho": float(self.rho),
            "base": self.base,
            "points": [list(map(float, p)) for p in self.points],
        }

    @staticmethod
    def from_json(d: dict) -> "HullBody":
        return HullBody(rho=float(d["rho"]), base=d["base"], points=np.asarray(d["points"]))


def minkowski_gauge(x, body: HullBody, tol: float = 1e-10) -> float:
    """inf{t > 0 : x in t * body} by bisection on t with an exact
    membership test per iterate (absolute tolerance on t).

    The bracket comes from the two-sided norm sandwich
    rho * base ball <= body <= circumscribed base ball.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != body.dim:
        raise InputError("dimension mismatch between point and body")
    base_norm = norms.norm(x, body.base)
    if base_norm == 0.0:
        return 0.0
    r_max = max(body.rho, float(norms.norm(body.points, body.base).max()))
    lo = float(base_norm) / r_max
    hi = float(base_norm) / body.rho
    if body.contains(x, scale=lo):
        return lo
    if not body.contains(x, scale=hi):
        raise InternalError(
            f"gauge bracket failed: x not in {hi} * body (base norm {base_norm}, rho {body.rho})"
        )
    for _ in range(200):
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if body.contains(x, scale=mid):
            hi = mid
        else:
            lo = mid
    raise InternalError(
        f"gauge bisection did not converge: bracket [{lo}, {hi}], tol {tol}"
    )


def set_from_json(d: dict) -> ConvexSet:
    kind = d["kind"]
    if kind == "ball":
        return Ball(
            np.asarray(d["center"], dtype=float),
            float(d["radius"]),
            closed=bool(d.get("closed", True)),
            ball_norm=d.get("norm", norms.L2),
        )
    if kind == "box":
        return Box(
            np.asarray(d["lo"], dtype=float),
            np.asarray(d["hi"], dtype=float),
            closed=bool(d.get("closed", True)),
        )
    if kind == "interval":
        return Interval(float(d["a"]), float(d["b"]), closed=bool(d.get("closed", True)))
    if kind == "halfspaces":
        return HalfspaceIntersection(
            np.asarray(d["normals"], dtype=float),
            np.asarray(d["offsets"], dtype=float),
            closed=bool(d.get("closed", True)),
        )
    if kind == "whole-space":
        return WholeSpace(int(d["dim"]))
    if kind == "empty":
        return EmptySet(int(d["dim"]))
    if kind == "dilated":
        return DilatedSet(set_from_json(d["base"]), float(d["r"]), d.get("norm", norms.L2))
    raise InputError(f"unknown set kind {kind!r}")
