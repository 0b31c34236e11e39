"""Representations of continuous convex functions and the convex-analysis
toolbox used by the d.c. calculus: interior Lipschitz bounds, global
Lipschitz convex extensions, spectral splitting of quadratic forms, and
quadratic-control splittings of smooth maps.

A ``ConvexFn`` is an immutable expression tree.  Evaluation is vectorized
(``(n, d)`` batches) and pure.  Convexity of oracle nodes is asserted by
the caller and spot-checked by the ``verify`` module; closed-form nodes
(max-of-affine, nonnegative quadratics, gauges, distances) are convex by
construction on the whole space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import geometry, norms
from .errors import DomainError, InputError, UndecidableError
from .geometry import ConvexSet, HullBody, as_points, _unsqueeze


class ConvexFn:
    """Base class for convex function representations.

    ``value`` evaluates without a domain check (hot path); calling the
    object checks membership first and raises ``DomainError`` on escape.
    ``globally_convex`` marks formulas that stay convex on all of R^d,
    which lets downstream code evaluate them outside their formal domain
    (the gluing recursion relies on this for its distance/max terms).
    """

    domain: Optional[ConvexSet] = None
    globally_convex: bool = False

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def value(self, x):
        pts, single = as_points(x, self.dim)
        return _unsqueeze(self._value(pts), single)

    def _value(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        if self.domain is not None:
            pts, single = as_points(x, self.dim)
            ok = self.domain._contains(pts)
            if not np.all(ok):
                bad = pts[~ok][0]
                raise DomainError(f"point {bad} outside the function's domain")
            return _unsqueeze(self._value(pts), single)
        return self.value(x)

    # closed under the basic operations --------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = constant(float(other), self.dim)
        return sum_fn([self, other])

    __radd__ = __add__

    def __mul__(self, factor):
        return scale(self, factor)

    __rmul__ = __mul__

    def lower_bound_on_box(self, lo: np.ndarray, hi: np.ndarray) -> Optional[float]:
        """A certified lower bound on the box, or None if unavailable."""
        return None

    def shifted(self, c: float) -> "ConvexFn":
        return sum_fn([self, constant(float(c), self.dim)])


def _shared_dim(children: Sequence[ConvexFn]) -> int:
    dims = {c.dim for c in children}
    if len(dims) != 1:
        raise InputError(f"mixed dimensions in combination: {sorted(dims)}")
    return dims.pop()


def _shared_domain(children: Sequence[ConvexFn]) -> Optional[ConvexSet]:
    doms = [c.domain for c in children if c.domain is not None]
    if not doms:
        return None
    out = doms[0]
    for d in doms[1:]:
        if d is not out:
            out = geometry.intersect(out, d)
    return out


@dataclass(frozen=True)
class AffineFn(ConvexFn):
    """<slope, x> + intercept; the degenerate convex function."""

    slope: np.ndarray
    intercept: float
    domain: Optional[ConvexSet] = None
    globally_convex: bool = True

    def __post_init__(self):
        object.__setattr__(self, "slope", np.atleast_1d(np.asarray(self.slope, dtype=float)))

    @property
    def dim(self):
        return self.slope.shape[0]

    def _value(self, pts):
        return pts @ self.slope + self.intercept

    def lower_bound_on_box(self, lo, hi):
        corner = np.where(self.slope >= 0, lo, hi)
        return float(corner @ self.slope + self.intercept)


def constant(c: float, dim: int) -> AffineFn:
    return AffineFn(np.zeros(dim), float(c))


@dataclass(frozen=True)
class MaxOfAffine(ConvexFn):
    """max_j (<s_j, x> + b_j): the workhorse piecewise-linear convex kind."""

    slopes: np.ndarray
    intercepts: np.ndarray
    domain: Optional[ConvexSet] = None
    globally_convex: bool = True

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.slopes, dtype=float))
        b = np.atleast_1d(np.asarray(self.intercepts, dtype=float))
        if S.shape[0] != b.shape[0]:
            raise InputError("slopes/intercepts length mismatch")
        object.__setattr__(self, "slopes", S)
        object.__setattr__(self, "intercepts", b)

    @property
    def dim(self):
        return self.slopes.shape[1]

    def _value(self, pts):
        return (pts @ self.slopes.T + self.intercepts).max(axis=1)

    def lower_bound_on_box(self, lo, hi):
        corners = np.where(self.slopes >= 0, lo, hi)
        piece_mins = (corners * self.slopes).sum(axis=1) + self.intercepts
        return float(piece_mins.max())

    def lipschitz_constant(self, norm_kind: str) -> float:
        return float(norms.norm(self.slopes, norms.dual_kind(norm_kind)).max())


def abs_value(dim: int = 1) -> MaxOfAffine:
    """|x| in dimension 1 as max{x, -x}."""
    if dim != 1:
        raise InputError("abs_value is one-dimensional; use a gauge for d > 1")
    return MaxOfAffine(np.array([[1.0], [-1.0]]), np.zeros(2))


def norm_fn(dim: int, norm_kind: str = norms.L2) -> ConvexFn:
    """The ambient norm as a convex function."""
    if norm_kind == norms.L1:
        signs = geometry.Box(-np.ones(dim), np.ones(dim)).vertices()
        return MaxOfAffine(signs, np.zeros(len(signs)))
    if norm_kind == norms.LINF:
        rows = np.vstack([np.eye(dim), -np.eye(dim)])
        return MaxOfAffine(rows, np.zeros(len(rows)))
    return SmoothConvexOracle(
        lambda pts: np.linalg.norm(pts, axis=-1),
        dim=dim,
        name="l2-norm",
        lower=0.0,
        globally_convex=True,
    )


class SmoothConvexOracle(ConvexFn):
    """Caller-asserted convex function given by callbacks.

    The callable takes an (n, d) batch and returns (n,).  ``grad`` is
    optional; ``lower`` is an optional analytic global lower bound used by
    Lipschitz certification.
    """

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        dim: int = 1,
        grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        name: str = "oracle",
        lower: Optional[float] = None,
        domain: Optional[ConvexSet] = None,
        globally_convex: bool = False,
    ):
        self.fn = fn
        self._dim = dim
        self.grad = grad
        self.name = name
        self.lower = lower
        self.domain = domain
        self.globally_convex = globally_convex

    @property
    def dim(self):
        return self._dim

    def __repr__(self):
        return f"SmoothConvexOracle({self.name}, dim={self._dim})"

    def _value(self, pts):
        return np.asarray(self.fn(pts), dtype=float).reshape(len(pts))

    def lower_bound_on_box(self, lo, hi):
        return self.lower


@dataclass(frozen=True)
class PSDQuadratic(ConvexFn):
    """x^T P x for positive semidefinite P (tiny negative eigenvalues are
    clamped at construction)."""

    matrix: np.ndarray
    domain: Optional[ConvexSet] = None
    globally_convex: bool = True

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if P.shape[0] != P.shape[1]:
            raise InputError("quadratic matrix must be square")
        if np.abs(P - P.T).max() > 1e-12 * max(1.0, np.abs(P).max()):
            raise InputError("quadratic matrix must be symmetric")
        evals = np.linalg.eigvalsh(P)
        if evals.min() < -1e-12 * max(1.0, np.abs(evals).max()):
            raise InputError("matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", P)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def _value(self, pts):
        return np.einsum("ni,ij,nj->n", pts, self.matrix, pts)

    def lower_bound_on_box(self, lo, hi):
        return 0.0

    def lipschitz_on_ball(self, radius: float, norm_kind: str) -> float:
        """Certified Lipschitz constant on {||x|| <= radius}: gradient is
        2 P x, bounded through the operator norm."""
        cover = geometry._norm_cover_factor(norms.L2, norm_kind, self.dim)
        back = geometry._norm_cover_factor(norms.dual_kind(norm_kind), norms.L2, self.dim)
        op = float(np.linalg.norm(self.matrix, 2))
        return 2.0 * op * radius * cover * back


@dataclass(frozen=True)
class GaugeSquared(ConvexFn):
    """scale * gauge(x)^2 for a hull body's Minkowski gauge (a squared
    equivalent norm, hence convex everywhere)."""

    body: HullBody
    scale_factor: float = 0.5
    domain: Optional[ConvexSet] = None
    globally_convex: bool = True

    def __post_init__(self):
        if self.scale_factor < 0:
            raise InputError("gauge-squared scale must be >= 0")

    @property
    def dim(self):
        return self.body.dim

    def _value(self, pts):
        return self.scale_factor * self.body.gauge(pts) ** 2

    def lower_bound_on_box(self, lo, hi):
        return 0.0


@dataclass(frozen=True)
class DistanceTo(ConvexFn):
    """coeff * dist(x, D) in the stored ambient norm."""

    set_: ConvexSet
    coeff: float = 1.0
    norm_kind: str = norms.L2
    domain: Optional[ConvexSet] = None
    globally_convex: bool = True

    def __post_init__(self):
        if self.coeff < 0:
            raise InputError("distance coefficient must be >= 0")

    @property
    def dim(self):
        return self.set_.dim

    def _value(self, pts):
        if self.coeff == 0.0:
            return np.zeros(len(pts))
        return self.coeff * self.set_._dist(pts, self.norm_kind)

    def lower_bound_on_box(self, lo, hi):
        return 0.0


@dataclass(frozen=True)
class SumFn(ConvexFn):
    children: tuple

    @property
    def dim(self):
        return _shared_dim(self.children)

    @property
    def domain(self):
        return _shared_domain(self.children)

    @property
    def globally_convex(self):
        return all(c.globally_convex for c in self.children)

    def _value(self, pts):
        out = self.children[0]._value(pts).copy()
        for c in self.children[1:]:
            out += c._value(pts)
        return out

    def lower_bound_on_box(self, lo, hi):
        total = 0.0
        for c in self.children:
            b = c.lower_bound_on_box(lo, hi)
            if b is None:
                return None
            total += b
        return total


@dataclass(frozen=True)
class ScaledFn(ConvexFn):
    child: ConvexFn
    factor: float

    def __post_init__(self):
        if self.factor < 0:
            raise InputError("scaling a convex function by a negative factor breaks convexity")

    @property
    def dim(self):
        return self.child.dim

    @property
    def domain(self):
        return self.child.domain

    @property
    def globally_convex(self):
        return self.child.globally_convex

    def _value(self, pts):
        return self.factor * self.child._value(pts)

    def lower_bound_on_box(self, lo, hi):
        b = self.child.lower_bound_on_box(lo, hi)
        return None if b is None else self.factor * b


@dataclass(frozen=True)
class PointwiseMax(ConvexFn):
    children: tuple

    @property
    def dim(self):
        return _shared_dim(self.children)

    @property
    def domain(self):
        return _shared_domain(self.children)

    @property
    def globally_convex(self):
        return all(c.globally_convex for c in self.children)

    def _value(self, pts):
        vals = [c._value(pts) for c in self.children]
        return np.maximum.reduce(vals)

    def lower_bound_on_box(self, lo, hi):
        best = None
        for c in self.children:
            b = c.lower_bound_on_box(lo, hi)
            if b is not None:
                best = b if best is None else max(best, b)
        return best


@dataclass(frozen=True)
class AffinePrecompose(ConvexFn):
    """child(M x + shift): convexity survives affine substitution."""

    child: ConvexFn
    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        s = np.atleast_1d(np.asarray(self.shift, dtype=float))
        if M.shape[0] != self.child.dim or M.shape[0] != s.shape[0]:
            raise InputError("affine map output dimension must match the child's input")
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "shift", s)

    @property
    def dim(self):
        return self.matrix.shape[1]

    @property
    def globally_convex(self):
        return self.child.globally_convex

    def _value(self, pts):
        return self.child._value(pts @ self.matrix.T + self.shift)

    def lower_bound_on_box(self, lo, hi):
        # box enclosure of the affine image, then the child's bound
        M, s = self.matrix, self.shift
        img_lo = np.minimum(M * lo, M * hi).sum(axis=1) + s
        img_hi = np.maximum(M * lo, M * hi).sum(axis=1) + s
        return self.child.lower_bound_on_box(img_lo, img_hi)


# --------------------------------------------------------------------------
# closure operations (spec surface)
# --------------------------------------------------------------------------


def eval_fn(f: ConvexFn, x):
    """Checked evaluation; raises DomainError outside the domain."""
    return f(x)


def sum_fn(fns: Sequence[ConvexFn]) -> ConvexFn:
    fns = list(fns)
    if not fns:
        raise InputError("empty sum")
    if len(fns) == 1:
        return fns[0]
    flat: list[ConvexFn] = []
    for f in fns:
        if isinstance(f, SumFn):
            flat.extend(f.children)
        else:
            flat.append(f)
    return SumFn(tuple(flat))


def scale(f: ConvexFn, factor: float) -> ConvexFn:
    if factor < 0:
        raise InputError("negative scale would break convexity")
    if factor == 1.0:
        return f
    return ScaledFn(f, float(factor))


def pointwise_max(fns: Sequence[ConvexFn]) -> ConvexFn:
    fns = list(fns)
    if not fns:
        raise InputError("empty max")
    if len(fns) == 1:
        return fns[0]
    flat: list[ConvexFn] = []
    for f in fns:
        if isinstance(f, PointwiseMax):
            flat.extend(f.children)
        else:
            flat.append(f)
    return PointwiseMax(tuple(flat))


def affine_precompose(f: ConvexFn, matrix, shift) -> ConvexFn:
    return AffinePrecompose(f, matrix, shift)


# --------------------------------------------------------------------------
# Lipschitz machinery
# --------------------------------------------------------------------------


def lipschitz_bound_on_inner(M: float, r: float) -> float:
    """Certified Lipschitz constant 2M/r for a convex function with
    |f| <= M on C, valid on any D with D + ball(0, 2r) inside C.

    The bound follows from convexity alone: extending the segment from x
    through y by r stays in C, and the three-point convexity inequality
    turns the two-sided bound M into a slope bound 2M/r.
    """
    if r <= 0:
        raise InputError("inner margin r must be > 0")
    if M < 0:
        raise InputError("bound M must be >= 0")
    return 2.0 * M / r


def estimate_lipschitz(
    f,
    C: ConvexSet,
    n_samples: int = 1024,
    norm_kind: str = norms.L2,
    rng: Optional[np.random.Generator] = None,
    seed: int = 0,
) -> float:
    """Empirical lower bound on Lip(f) over C: the largest sampled slope.

    Uses far pairs plus short-step perturbation pairs; the short steps
    catch boundary-attained slopes that random far pairs miss.
    """
    if n_samples < 2:
        raise InputError("need at least two samples")
    if rng is None:
        rng = np.random.default_rng(seed)
    fn = f.value if isinstance(f, ConvexFn) else f
    pts = C.sample(rng, n_samples, norm_kind)
    vals = np.asarray(fn(pts), dtype=float)
    perm = rng.permutation(n_samples)
    dx = norms.norm(pts - pts[perm], norm_kind)
    keep = dx > 1e-12
    best = 0.0
    if np.any(keep):
        best = float((np.abs(vals - vals[perm])[keep] / dx[keep]).max())
    # short steps toward other sample points stay inside C by convexity
    t = 1e-4
    near = pts + t * (pts[perm] - pts)
    nvals = np.asarray(fn(near), dtype=float)
    ndx = norms.norm(near - pts, norm_kind)
    keep = ndx > 1e-15
    if np.any(keep):
        best = max(best, float((np.abs(nvals - vals)[keep] / ndx[keep]).max()))
    return best


class LipschitzExtension(ConvexFn):
    """f_hat(x) = inf{f(c) + L ||x - c|| : c in C}: the convex L-Lipschitz
    extension of an L-Lipschitz convex f from C to the whole space.

    Inside C the infimum is attained at c = x (the L-Lipschitz bound makes
    every competitor at least f(x)), so members short-circuit.  Outside,
    the infimum is solved numerically: a coarse grid over C picks
    multi-start seeds and a convex line/coordinate search refines them.
    The objective is convex in c, so local refinement is sound.
    """

    def __init__(self, f: ConvexFn, C: ConvexSet, L: float, norm_kind: str = norms.L2):
        if L <= 0:
            raise InputError("Lipschitz constant must be > 0")
        if C.is_empty():
            raise InputError("cannot extend from an empty set")
        self.f = f
        self.C = C
        self.L = float(L)
        self.norm_kind = norm_kind
        self.domain = None
        self.globally_convex = True
        self._starts = self._make_starts()

    @property
    def dim(self):
        return self.C.dim

    def _make_starts(self) -> np.ndarray:
        try:
            vs = self.C.vertices()
        except UndecidableError:
            vs = None
        rng = np.random.default_rng(7)
        pts = [self.C.sample(rng, 64, self.norm_kind)]
        if vs is not None and len(vs):
            pts.append(vs)
        return np.vstack(pts)

    def _value(self, pts):
        member = self.C._contains(pts) | (self.C.dist(pts, self.norm_kind) <= 1e-15)
        out = np.empty(len(pts))
        if np.any(member):
            out[member] = self.f._value(pts[member])
        idx = np.nonzero(~member)[0]
        for i in idx:
            out[i] = self._extend_one(pts[i])
        return out

    def _objective(self, x, cands):
        return self.f._value(cands) + self.L * norms.norm(x - cands, self.norm_kind)

    def _extend_one(self, x: np.ndarray) -> float:
        grid = self._starts
        vals = self._objective(x, grid)
        order = np.argsort(vals)[:8]
        best = float(vals[order[0]])
        for j in order:
            best = min(best, self._refine(x, grid[j]))
        return best

    def _refine(self, x: np.ndarray, c0: np.ndarray) -> float:
        from scipy.optimize import minimize_scalar

        d = self.dim
        if isinstance(self.C, geometry.Box):
            lo, hi = self.C.lo, self.C.hi
            c = c0.copy()
            for _ in range(4 if d > 1 else 1):
                for k in range(d):

                    def g(t, k=k):
                        cc = c.copy()
                        cc[k] = t
                        return float(self._objective(x, cc.reshape(1, -1))[0])

                    if hi[k] - lo[k] <= 0:
                        continue
                    res = minimize_scalar(
                        g, bounds=(lo[k], hi[k]), method="bounded",
                        options={"xatol": 1e-12},
                    )
                    c[k] = float(res.x)
            return float(self._objective(x, c.reshape(1, -1))[0])
        # other kinds: golden search along the segment [c0, proj-ish point],
        # then a short projected pattern search
        proj = self._project(x.reshape(1, -1))[0]

        def h(t):
            cc = (1 - t) * c0 + t * proj
            return float(self._objective(x, cc.reshape(1, -1))[0])

        res = minimize_scalar(h, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
        return float(min(h(float(res.x)), h(0.0), h(1.0)))

    def _project(self, pts):
        C = self.C
        if isinstance(C, geometry.Ball) and C.ball_norm == norms.L2:
            delta = pts - C.center
            r = np.linalg.norm(delta, axis=1, keepdims=True)
            fac = np.minimum(1.0, C.radius / np.maximum(r, 1e-300))
            return C.center + delta * fac
        if isinstance(C, geometry.Box):
            return np.clip(pts, C.lo, C.hi)
        if isinstance(C, geometry.HalfspaceIntersection):
            return C.project(pts)
        # fall back to the best sampled start
        vals = norms.norm(pts[:, None, :] - self._starts[None, :, :], self.norm_kind)
        return self._starts[vals.argmin(axis=1)]


def lipschitz_extension(
    f: ConvexFn, C: ConvexSet, L: float, norm_kind: str = norms.L2
) -> LipschitzExtension:
    """Extend an L-Lipschitz convex f from C to the whole space; equals f
    on C exactly and is convex and L-Lipschitz globally."""
    return LipschitzExtension(f, C, L, norm_kind)


# --------------------------------------------------------------------------
# quadratic forms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticForm:
    """A symmetric matrix viewed as the form x -> x^T Q x."""

    matrix: np.ndarray

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if Q.shape[0] != Q.shape[1]:
            raise InputError("quadratic form matrix must be square")
        if np.abs(Q - Q.T).max() > 1e-12 * max(1.0, np.abs(Q).max()):
            raise InputError("quadratic form matrix must be symmetric (tolerance 1e-12)")
        object.__setattr__(self, "matrix", 0.5 * (Q + Q.T))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def value(self, x):
        pts, single = as_points(x, self.dim)
        return _unsqueeze(np.einsum("ni,ij,nj->n", pts, self.matrix, pts), single)


def quadratic_dc_split(Q: QuadraticForm) -> tuple[QuadraticForm, QuadraticForm]:
    """Split Q = P1 - P2 with both parts positive semidefinite, sharing
    Q's eigenbasis (positive/negative eigenvalue split).

    Reconstruction is exact to rounding; eigenvalues below -1e-12 on the
    parts cannot occur because negatives are clamped to zero.
    """
    evals, vecs = np.linalg.eigh(Q.matrix)
    pos = np.clip(evals, 0.0, None)
    neg = np.clip(-evals, 0.0, None)
    P1 = (vecs * pos) @ vecs.T
    P2 = (vecs * neg) @ vecs.T
    return QuadraticForm(0.5 * (P1 + P1.T)), QuadraticForm(0.5 * (P2 + P2.T))


# --------------------------------------------------------------------------
# quadratic-control splitting of smooth functions
# --------------------------------------------------------------------------


def estimate_gradient_lipschitz(
    grad,
    domain: ConvexSet,
    n_samples: int = 2048,
    seed: int = 0,
) -> float:
    """Empirical bound on the gradient's Lipschitz constant (euclidean),
    inflated by a 1.25 safety factor.  Estimates are flagged by callers."""
    rng = np.random.default_rng(seed)
    pts = domain.sample(rng, n_samples, norms.L2)
    perm = rng.permutation(n_samples)
    g1 = np.asarray(grad(pts), dtype=float).reshape(n_samples, -1)
    g2 = g1[perm]
    dx = np.linalg.norm(pts - pts[perm], axis=1)
    keep = dx > 1e-10
    base = float((np.linalg.norm(g1 - g2, axis=1)[keep] / dx[keep]).max()) if np.any(keep) else 0.0
    near = pts + 1e-5 * (pts[perm] - pts)
    gn = np.asarray(grad(near), dtype=float).reshape(n_samples, -1)
    ndx = np.linalg.norm(near - pts, axis=1)
    keep = ndx > 1e-12
    if np.any(keep):
        base = max(base, float((np.linalg.norm(gn - g1, axis=1)[keep] / ndx[keep]).max()))
    return 1.25 * base


def c11_dc_split(
    value,
    grad,
    domain: ConvexSet,
    M: Optional[float] = None,
    norm_kind: str = norms.L2,
    name: str = "c11",
):
    """Quadratic-control splitting of a C^{1,1} scalar function: with the
    gradient M-Lipschitz on the (bounded, open, convex) domain, the
    control (M/2) ||x||^2 works, since +-f + (M/2)||x||^2 has nonnegative
    curvature along every segment.

    Only the euclidean ambient norm is supported: for other norms the
    right constant depends on a rotundity modulus this toolbox does not
    model, so those inputs are rejected instead of guessed.

    Returns a DCFunction; when M is estimated from gradient samples the
    provenance is tagged 'split-empirical'.
    """
    from .core import DCFunction

    if norm_kind != norms.L2:
        raise InputError(
            "quadratic-control splitting is only certified for the euclidean norm; "
            "supply an explicit control for other ambient norms"
        )
    provenance = "split"
    if M is None:
        if grad is None:
            raise InputError("need a gradient oracle to estimate the curvature bound")
        M = estimate_gradient_lipschitz(grad, domain)
        provenance = "split-empirical"
    if M < 0:
        raise InputError("curvature bound M must be >= 0")
    control: ConvexFn
    if M == 0:
        control = constant(0.0, domain.dim)
    else:
        control = PSDQuadratic(0.5 * M * np.eye(domain.dim))

    def fn(pts):
        return np.asarray(value(pts), dtype=float).reshape(len(pts))

    return DCFunction(domain=domain, value_fn=fn, control=control, provenance=provenance, name=name)
