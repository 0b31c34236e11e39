"""Composition calculus for d.c. functions and mappings.

The two pillars:

* ``compose`` — the Lipschitz composition rule: if f controls F on A,
  g controls G on B, and both G and g are Lipschitz on B, then
  g o F + (Lip G + Lip g) * f controls G o F on A.

* ``compose_global`` — the global pipeline for an outer function whose
  control is bounded on bounded sets: exhaust the domain by sublevel sets
  of the inner control, shrink them to stages with certified gaps, apply
  the Lipschitz rule on each stage against a bounded range box, and glue
  the stage controls into one global control.

Products, quotients, quadratic and bilinear compositions are routed
through these two constructors exactly as their proofs suggest: a product
is the composition with u*v (split as a difference of squares), a
quotient composes with u/v on a band bounded away from v = 0, a quadratic
form is split spectrally into a difference of nonnegative forms, and a
bilinear product embeds as a quadratic form on the bundled mapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import norms, verify
from .core import DCFunction, DCMapping, as_mapping, bundle, dc_negate, dc_sum, from_convex
from .errors import InputError, PreconditionError
from .functions import (
    AffineFn,
    AffinePrecompose,
    ConvexFn,
    DistanceTo,
    GaugeSquared,
    LipschitzExtension,
    MaxOfAffine,
    PSDQuadratic,
    PointwiseMax,
    QuadraticForm,
    ScaledFn,
    SmoothConvexOracle,
    SumFn,
    constant,
    estimate_lipschitz,
    lipschitz_extension,
    quadratic_dc_split,
    scale,
    sum_fn,
)
from .geometry import (
    Ball,
    Box,
    ConvexSet,
    HalfspaceIntersection,
    WholeSpace,
    _norm_cover_factor,
    compactly_contained,
    inner_parallel,
)
from .gluing import (
    Exhaustion,
    GluePatch,
    LocalControlFamily,
    SublevelSet,
    _ray_directions,
    convex_sup_on,
    glue,
    inscribe_polytope,
)

ANALYTIC = "certified-analytic"
INTERIOR = "interior-bound"
EMPIRICAL = "empirical"

EMPIRICAL_SAFETY = 1.5


@dataclass(frozen=True)
class LipschitzCertificate:
    """A Lipschitz constant valid on a scope, with its origin recorded:
    'certified-analytic' (exact structure), 'interior-bound' (the 2M/r
    interior argument), or 'empirical' (sampled slopes times a safety
    factor, tainting downstream provenance)."""

    constant: float
    scope: ConvexSet
    origin: str = ANALYTIC

    def __post_init__(self):
        if self.constant < 0:
            raise InputError("a Lipschitz constant cannot be negative")
        if self.origin not in (ANALYTIC, INTERIOR, EMPIRICAL):
            raise InputError(f"unknown certificate origin {self.origin!r}")


# --------------------------------------------------------------------------
# Lipschitz certification of convex expression trees
# --------------------------------------------------------------------------


def convex_lipschitz_on(
    fn: ConvexFn, box: Box, norm_kind: str, margin: float = 0.5, seed: int = 0
) -> tuple[float, str]:
    """Certified Lipschitz constant of a convex expression on a box.

    Structure gives exact constants for the closed-form nodes; oracle
    nodes fall back to the interior bound 2M/r on the box expanded by
    2*margin when a two-sided bound is available, and to inflated
    empirical slopes as a last resort.
    """
    dual = norms.dual_kind(norm_kind)
    if isinstance(fn, AffineFn):
        return float(norms.norm(fn.slope, dual)), ANALYTIC
    if isinstance(fn, MaxOfAffine):
        return fn.lipschitz_constant(norm_kind), ANALYTIC
    if isinstance(fn, PSDQuadratic):
        corners = box.vertices()
        r2 = float(np.linalg.norm(corners, axis=1).max())
        op = float(np.linalg.norm(fn.matrix, 2))
        return 2.0 * op * r2 * _norm_cover_factor(dual, norms.L2, fn.dim), ANALYTIC
    if isinstance(fn, GaugeSquared):
        A, _ = fn.body.facets()
        l_gauge = float(norms.norm(A, dual).max())
        g_sup = float(fn.body.gauge(box.vertices()).max())
        return 2.0 * fn.scale_factor * g_sup * l_gauge, ANALYTIC
    if isinstance(fn, DistanceTo):
        return fn.coeff * _norm_cover_factor(fn.norm_kind, norm_kind, fn.dim), ANALYTIC
    if isinstance(fn, LipschitzExtension):
        return fn.L * _norm_cover_factor(fn.norm_kind, norm_kind, fn.dim), ANALYTIC
    if isinstance(fn, SumFn):
        total, worst = 0.0, ANALYTIC
        for c in fn.children:
            L, o = convex_lipschitz_on(c, box, norm_kind, margin, seed)
            total += L
            worst = _worse(worst, o)
        return total, worst
    if isinstance(fn, ScaledFn):
        L, o = convex_lipschitz_on(fn.child, box, norm_kind, margin, seed)
        return fn.factor * L, o
    if isinstance(fn, PointwiseMax):
        best, worst = 0.0, ANALYTIC
        for c in fn.children:
            L, o = convex_lipschitz_on(c, box, norm_kind, margin, seed)
            best = max(best, L)
            worst = _worse(worst, o)
        return best, worst
    if isinstance(fn, GluePatch):
        Lg, og = convex_lipschitz_on(fn.gamma, box, norm_kind, margin, seed)
        Lp, op_ = convex_lipschitz_on(fn.phi, box, norm_kind, margin, seed)
        return max(Lg, Lp), _worse(_worse(og, op_), INTERIOR)
    if isinstance(fn, AffinePrecompose):
        M = fn.matrix
        img_lo = np.minimum(M * box.lo, M * box.hi).sum(axis=1) + fn.shift
        img_hi = np.maximum(M * box.lo, M * box.hi).sum(axis=1) + fn.shift
        Lc, o = convex_lipschitz_on(fn.child, Box(img_lo, img_hi), norm_kind, margin, seed)
        op2 = float(np.linalg.norm(M, 2))
        cover = _norm_cover_factor(norm_kind, norms.L2, M.shape[0]) * _norm_cover_factor(
            norms.L2, norm_kind, M.shape[1]
        )
        return Lc * op2 * cover, o
    # oracle path: interior bound when a two-sided bound exists
    expanded = Box(box.lo - 2 * margin, box.hi + 2 * margin)
    lower = fn.lower_bound_on_box(expanded.lo, expanded.hi)
    if lower is not None:
        sup = float(fn._value(expanded.vertices()).max())
        M = max(abs(sup), abs(lower))
        return 2.0 * M / margin, INTERIOR
    L = estimate_lipschitz(fn, box, 2048, norm_kind, seed=seed)
    return EMPIRICAL_SAFETY * L, EMPIRICAL


def _worse(a: str, b: str) -> str:
    order = {ANALYTIC: 0, INTERIOR: 1, EMPIRICAL: 2}
    return a if order[a] >= order[b] else b


def dc_value_lipschitz(
    g, box: Box, norm_kind: str, margin: float = 0.5, seed: int = 0
) -> tuple[float, str]:
    """Certified Lipschitz constant of a d.c. function's (or mapping's)
    value on a box: per-component analytic hints when the construction
    supplied them, inflated empirical slopes otherwise; components combine
    through the codomain norm."""
    mapping = as_mapping(g)
    consts, worst = [], ANALYTIC
    for comp in mapping.components:
        hint = getattr(comp, "lip_hint", None)
        if hint is not None:
            consts.append(float(hint(box, norm_kind)))
            continue
        L = estimate_lipschitz(
            lambda pts, _c=comp: np.asarray(_c.value_fn(pts), dtype=float),
            box,
            2048,
            norm_kind,
            seed=seed,
        )
        consts.append(EMPIRICAL_SAFETY * L)
        worst = EMPIRICAL
    if len(consts) == 1:
        return consts[0], worst
    return float(norms.norm(np.asarray(consts), norm_kind)), worst


# --------------------------------------------------------------------------
# the Lipschitz composition rule
# --------------------------------------------------------------------------


def compose(
    F,
    G,
    lipG: LipschitzCertificate,
    lipg: LipschitzCertificate,
    f_ctrl: Optional[ConvexFn] = None,
    g_ctrl: Optional[ConvexFn] = None,
    range_check: int = 512,
    seed: int = 0,
    name: Optional[str] = None,
) -> DCMapping:
    """G o F with the control g_ctrl o F + (Lip G + Lip g) * f_ctrl.

    Preconditions: f_ctrl controls F on its domain, g_ctrl controls G on
    G's domain B, and G, g_ctrl are Lipschitz on B with the certified
    constants.  The range condition F(A) inside B is sampled; an escaping
    point raises immediately with its location.
    """
    Fm, Gm = as_mapping(F), as_mapping(G)
    f_ctrl = f_ctrl if f_ctrl is not None else Fm.combined_control
    g_ctrl = g_ctrl if g_ctrl is not None else Gm.combined_control
    if Fm.codomain_dim != Gm.domain.dim:
        raise InputError("inner codomain and outer domain dimensions differ")
    B = Gm.domain
    if range_check > 0 and not isinstance(B, WholeSpace) and not isinstance(
        Fm.domain, WholeSpace
    ):
        rng = verify.derive_rng(seed, 404)
        pts = Fm.domain.sample(rng, range_check)
        vals = Fm.value(pts)
        ok = B._contains(vals) | (B.dist(vals) <= 1e-9)
        if not np.all(ok):
            bad_x = pts[~ok][0]
            bad_y = vals[~ok][0]
            raise PreconditionError(
                f"range escape: F({bad_x}) = {bad_y} is outside the outer domain"
            )

    L = lipG.constant + lipg.constant

    def outer_ctrl_of_F(pts, _g=g_ctrl, _F=Fm):
        return _g._value(np.atleast_2d(_F.value(pts)))

    term = SmoothConvexOracle(
        outer_ctrl_of_F, dim=Fm.dim, name="outer-control-through-inner", domain=Fm.domain
    )
    control = sum_fn([term, scale(f_ctrl, L)]) if L > 0 else term
    tainted = EMPIRICAL in (lipG.origin, lipg.origin)
    notes = (f"Lip(G)={lipG.constant:.6g} ({lipG.origin})",
             f"Lip(g)={lipg.constant:.6g} ({lipg.origin})")
    if tainted:
        notes = notes + ("empirical Lipschitz certificate used",)

    comps = []
    for i, gc in enumerate(Gm.components):
        def val(pts, _gc=gc, _F=Fm):
            return np.asarray(_gc.value_fn(np.atleast_2d(_F.value(pts))), dtype=float)

        comps.append(
            DCFunction(
                domain=Fm.domain,
                value_fn=val,
                control=control,
                provenance="composed",
                name=f"{gc.name}∘{Fm.name}",
                notes=notes,
            )
        )
    return DCMapping(
        components=tuple(comps),
        combined_control=control,
        provenance="composed",
        name=name or f"{Gm.name}∘{Fm.name}",
        notes=notes,
    )


# --------------------------------------------------------------------------
# the global pipeline
# --------------------------------------------------------------------------


def _center_of(A: ConvexSet) -> np.ndarray:
    if isinstance(A, Ball):
        return A.center.copy()
    if isinstance(A, Box):
        return 0.5 * (A.lo + A.hi)
    if isinstance(A, WholeSpace):
        return np.zeros(A.dim)
    vs = A.vertices()
    if vs is not None and len(vs):
        return vs.mean(axis=0)
    rng = verify.derive_rng(11, 0)
    return A.sample(rng, 1)[0]


def _certified_sup(fn: ConvexFn, A: ConvexSet, seed: int) -> float:
    return convex_sup_on(fn, A, seed=seed)


def _range_box(
    mapping: DCMapping,
    stage: ConvexSet,
    seed: int,
    inflate: float = 1.25,
    clip: Optional[Box] = None,
) -> Box:
    """Axis box around the sampled range of F over a stage, inflated about
    its center, optionally clipped to the outer function's domain box."""
    rng = verify.derive_rng(seed, 31)
    pts = [stage.sample(rng, 4096)]
    vs = stage.vertices()
    if vs is not None and len(vs):
        pts.append(vs)
    vals = np.vstack([np.atleast_2d(mapping.value(p)) for p in pts])
    lo, hi = vals.min(axis=0), vals.max(axis=0)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    half = half * inflate + 1e-9
    lo, hi = mid - half, mid + half
    if clip is not None:
        lo, hi = np.maximum(lo, clip.lo), np.minimum(hi, clip.hi)
        if np.any(hi < lo):
            raise PreconditionError("sampled range leaves the outer function's domain box")
    return Box(lo, hi)


def _stage_control(
    mapping: DCMapping,
    g: DCFunction,
    stage: ConvexSet,
    norm_kind: str,
    cod_norm: str,
    seed: int,
    clip: Optional[Box] = None,
    band_floor: Optional[float] = None,
) -> tuple[ConvexFn, tuple]:
    """Stage-local control from the Lipschitz rule against a bounded range
    box.  The expansion margin r keeps the interior bound honest; with a
    banded outer domain the margin shrinks so the expanded box stays
    inside the band."""
    B = _range_box(mapping, stage, seed, clip=clip)
    extent = float((B.hi - B.lo).max())
    r = 0.25 * (1.0 + extent)
    if band_floor is not None:
        # keep oracle-route expansions inside the band; the clipped box
        # itself already is, so a zero margin just forces analytic routes
        room = float(B.lo[-1] - band_floor)
        if room > 0:
            r = min(r, 0.49 * room)
    Lg, og = convex_lipschitz_on(g.control, B, cod_norm, margin=r, seed=seed)
    LG, oG = dc_value_lipschitz(g, B, cod_norm, margin=r, seed=seed)
    L = LG + Lg

    def outer_ctrl_of_F(pts, _g=g.control, _F=mapping):
        return _g._value(np.atleast_2d(_F.value(pts)))

    # F(stage) stays in B, so the outer control's bound over B bounds the
    # composed term on the whole stage
    lower = g.control.lower_bound_on_box(B.lo, B.hi)
    term = SmoothConvexOracle(
        outer_ctrl_of_F, dim=mapping.dim, name="stage-control", lower=lower
    )
    gamma = sum_fn([term, scale(mapping.combined_control, L)]) if L > 0 else term
    return gamma, (LG, oG, Lg, og)


def compose_global(
    F,
    g: DCFunction,
    n_stages: int = 8,
    seed: int = 0,
    norm_kind: str = norms.L2,
    codomain_norm: Optional[str] = None,
    n_directions: Optional[int] = None,
    name: Optional[str] = None,
) -> DCFunction:
    """g o F for an outer d.c. function on R^n (or on a band containing
    the range) whose control is bounded on bounded sets.

    Pipeline: (1) exhaust the domain by sublevel sets of F's control,
    advancing the threshold geometrically so the stage count stays
    logarithmic in the control's size; (2) shrink each sublevel set to an
    inscribed polytope eroded by delta/k, giving bounded open stages with
    certified gaps; (3) on each stage, box the sampled range, certify
    Lipschitz constants for g and its control there, and form the stage
    control by the Lipschitz rule; (4) glue.  On a bounded domain the
    sublevels saturate, the topmost stages equal the domain itself, and
    the glued control is certified on all of it.
    """
    mapping = as_mapping(F)
    A = mapping.domain
    cod = codomain_norm or norm_kind
    f_ctrl = mapping.combined_control
    anchor = _center_of(A)
    band_floor = None
    clip = None
    if getattr(g, "band_floor", None) is not None:
        band_floor = float(g.band_floor)
    if isinstance(g.domain, Box):
        clip = g.domain

    # range condition: sampled values must lie in g's domain
    if not isinstance(g.domain, WholeSpace):
        rng = verify.derive_rng(seed, 404)
        probe_set = A if A.is_bounded() else Ball(anchor, 8.0, ball_norm=norm_kind)
        pts = probe_set.sample(rng, 2048, norm_kind)
        pts = pts[A._contains(pts)] if not A.is_bounded() else pts
        vals = np.atleast_2d(mapping.value(pts))
        ok = g.domain._contains(vals) | (g.domain.dist(vals) <= 1e-9)
        if not np.all(ok):
            bad = pts[~ok][0]
            raise PreconditionError(
                f"stage 0 (range check): F({bad}) leaves the outer function's domain"
            )

    f0 = float(f_ctrl.value(anchor.reshape(1, -1))[0])
    stages: list[ConvexSet] = []
    gaps: list[float] = []
    bounded = A.is_bounded()

    if bounded:
        supA = _certified_sup(f_ctrl, A, seed=seed)
        margin = 1e-9 * (1.0 + abs(supA))
        need = supA + margin - f0
    else:
        need = math.inf

    # geometric sublevel thresholds f0 + 1, f0 + 2, f0 + 4, ...
    thresholds = []
    t = 1.0
    while t < need and len(thresholds) < (n_stages if not bounded else 60):
        thresholds.append(t)
        t *= 2.0
    if bounded and (not thresholds or thresholds[-1] < need):
        pass  # saturated stages below cover the rest

    dirs = None
    prev_radii = None
    delta = None
    dim = A.dim
    nd = n_directions or (2 if dim == 1 else (64 if dim == 2 else 128))
    if bounded:
        cap = float(np.abs(np.concatenate(A.bounding_box())).max()) + 2.0
    else:
        cap = None

    for k, thr in enumerate(thresholds, start=1):
        level = SublevelSet(fn=f_ctrl._value, threshold=f0 + thr, ambient=A)
        radius_cap = cap if cap is not None else (
            max(1.0, float(np.abs(anchor).max()) + 1.0) * (k + 1)
        )
        if dirs is None:
            dirs = _ray_directions(dim, nd)
        poly, prev_radii = inscribe_polytope(
            level,
            anchor,
            norm_kind=norm_kind,
            directions=dirs,
            max_radius=radius_cap,
            min_radii=prev_radii,
        )
        if delta is None:
            inr = poly.inradius(norm_kind)
            delta = max(inr / 4.0, 1e-9)
        stage = inner_parallel(poly, delta / k, norm_kind)
        if stage.is_empty():
            raise PreconditionError(f"stage {k} eroded to nothing; the domain is too thin")
        stages.append(stage)

    if bounded:
        stages.extend([A, A, A])
    elif len(stages) < 3:
        raise InputError("need at least three stages on an unbounded domain")

    for i in range(len(stages) - 1):
        if stages[i + 1] is A:
            gaps.append(np.inf)
            continue
        chain = (delta or 1.0) / ((i + 1) * (i + 2)) * 0.999
        cc = None
        try:
            cc = compactly_contained(stages[i], stages[i + 1], norm_kind)
        except Exception:
            cc = None
        gaps.append(max(cc, chain) if cc is not None else chain)
    gaps.append(np.inf)

    gammas, cert_notes = [], []
    worst_origin = ANALYTIC
    for k, stage in enumerate(stages):
        gamma, (LG, oG, Lg, og) = _stage_control(
            mapping, g, stage, norm_kind, cod, seed=seed * 1000 + k,
            clip=clip, band_floor=band_floor,
        )
        gammas.append(gamma)
        worst_origin = _worse(worst_origin, _worse(oG, og))
        cert_notes.append(f"stage {k + 1}: Lip(G)={LG:.4g} ({oG}), Lip(g)={Lg:.4g} ({og})")

    E = Exhaustion(ambient=A, stages=tuple(stages), gaps=tuple(gaps), norm_kind=norm_kind)
    glued = glue(E, LocalControlFamily(controls=tuple(gammas)), seed=seed)

    def value(pts, _g=g, _F=mapping):
        return np.asarray(_g.value_fn(np.atleast_2d(_F.value(pts))), dtype=float)

    notes = (f"control glued over {len(stages)} stages",) + tuple(cert_notes[:4])
    if worst_origin == EMPIRICAL:
        notes = notes + ("empirical Lipschitz certificate used",)
    return DCFunction(
        domain=A,
        value_fn=value,
        control=glued.control,
        provenance="composed",
        name=name or f"{g.name}∘{mapping.name}",
        notes=notes,
    )


# --------------------------------------------------------------------------
# products, quotients, special compositions
# --------------------------------------------------------------------------


def _product_outer() -> DCFunction:
    """g(u, v) = u v on R^2: the difference of squares
    (u+v)^2/4 - (u-v)^2/4, controlled by (u^2 + v^2)/2."""

    def hint(box: Box, nk: str) -> float:
        # gradient (v, u); its dual norm maxes at a corner
        corners = box.vertices()[:, ::-1]
        return float(norms.norm(corners, norms.dual_kind(nk)).max())

    return DCFunction(
        domain=WholeSpace(2),
        value_fn=lambda pts: pts[:, 0] * pts[:, 1],
        control=PSDQuadratic(0.5 * np.eye(2)),
        provenance="split",
        name="u*v",
        lip_hint=hint,
    )


def product(f1: DCFunction, f2: DCFunction, seed: int = 0, **kw) -> DCFunction:
    """f1 * f2 through the global pipeline with the difference-of-squares
    outer function."""
    if f1.domain.dim != f2.domain.dim:
        raise InputError("product factors live in different dimensions")
    out = compose_global(
        bundle([f1, f2], name=f"({f1.name},{f2.name})"), _product_outer(), seed=seed,
        name=f"{f1.name}*{f2.name}", **kw,
    )
    return out


def quotient(
    f1: DCFunction,
    f2: DCFunction,
    positive: Optional[bool] = None,
    m: Optional[float] = None,
    seed: int = 0,
    **kw,
) -> DCFunction:
    """f1 / f2 for a denominator bounded away from zero.

    The outer function u/v is smooth on the band {v >= m/2, |u| <= U}; on
    that band its curvature is bounded by 2(U + mb)/mb^3 (mb the band
    floor), so a quadratic control works, and the composition routes
    through the global pipeline restricted to the band.

    ``positive`` asserts the sign of f2 (auto-detected from samples when
    omitted); negative denominators are handled by negating both parts.
    An estimated floor m is tagged and conservatively halved.
    """
    if f1.domain.dim != f2.domain.dim:
        raise InputError("quotient parts live in different dimensions")
    rng = verify.derive_rng(seed, 99)
    if f2.domain.is_bounded():
        pts = f2.domain.sample(rng, 4096)
    else:
        probe = Ball(_center_of(f2.domain), 8.0, ball_norm=kw.get("norm_kind", norms.L2))
        pts = probe.sample(rng, 4096)
        pts = pts[f2.domain._contains(pts)]
        if len(pts) == 0:
            raise InputError("could not probe the denominator's domain")
    vals = f2.value(pts)
    if positive is None:
        positive = bool(vals.mean() > 0)
    sign = 1.0 if positive else -1.0
    signed = sign * vals
    if np.any(signed <= 0):
        bad = pts[int(np.argmin(signed))]
        raise PreconditionError(f"denominator changes sign or vanishes near {bad}")
    est_note = ()
    if m is None:
        m = 0.5 * float(signed.min())
        est_note = (f"denominator floor estimated from samples: m={m:.6g}",)
    if m < 1e-6:
        raise InputError(f"denominator floor m={m} below 1e-6: ill-conditioned quotient")
    if float(signed.min()) < m:
        raise PreconditionError(
            f"sampled denominator {float(signed.min()):.6g} dips below the floor m={m}"
        )

    num = f1 if positive else dc_negate(f1)
    den = f2 if positive else dc_negate(f2)

    U = 1.25 * float(np.abs(f1.value(pts)).max()) + 1.0
    V = 1.25 * float(signed.max()) + 1.0
    mb = 0.5 * m
    M = 2.0 * (U + mb) / mb**3
    band = Box(np.array([-U, mb]), np.array([U, V]))

    def hint(box: Box, nk: str, _mb=mb) -> float:
        umax = float(np.abs(box.vertices()[:, 0]).max())
        vmin = max(float(box.lo[1]), _mb)
        grad = np.array([1.0 / vmin, umax / vmin**2])
        return float(norms.norm(grad, norms.dual_kind(nk)))

    gq = DCFunction(
        domain=band,
        value_fn=lambda p: p[:, 0] / p[:, 1],
        control=PSDQuadratic(0.5 * M * np.eye(2)),
        provenance="split",
        name="u/v",
        notes=est_note,
        lip_hint=hint,
        band_floor=mb,
    )

    out = compose_global(
        bundle([num, den], name=f"({f1.name},{f2.name})"), gq, seed=seed,
        name=f"{f1.name}/{f2.name}", **kw,
    )
    if est_note:
        return out.with_note(est_note[0])
    return out


def special_compose(
    F,
    g: "DCPairLike",
    lip_plus: float,
    lip_minus: float,
    B: Optional[ConvexSet] = None,
    seed: int = 0,
    **kw,
) -> DCFunction:
    """Composition with an outer function given as a difference of two
    Lipschitz convex parts on B: extend each part to the whole codomain
    space by the Lipschitz convex extension, then compose globally.  The
    extended control is globally Lipschitz, so no range bounding beyond
    the pipeline's own is needed, and the resulting controls are smaller
    than the generic route's."""
    from .core import DCPair, from_pair

    if not isinstance(g, DCPair):
        raise InputError("special composition expects a pair of convex parts")
    if lip_plus <= 0 or lip_minus <= 0:
        raise PreconditionError("both parts need positive certified Lipschitz constants")
    scope = B
    if scope is None:
        scope = g.plus.domain or g.minus.domain
    if scope is None:
        raise InputError("supply the set the parts are Lipschitz on")
    nk = kw.get("norm_kind", norms.L2)
    plus_hat = lipschitz_extension(g.plus, scope, lip_plus, nk)
    minus_hat = lipschitz_extension(g.minus, scope, lip_minus, nk)
    ghat = from_pair(DCPair(plus_hat, minus_hat), domain=WholeSpace(scope.dim), name="extended")
    ghat = DCFunction(
        domain=ghat.domain, value_fn=ghat.value_fn, control=ghat.control,
        provenance=ghat.provenance, name=ghat.name,
        lip_hint=lambda box, nkind: lip_plus + lip_minus,
    )
    return compose_global(F, ghat, seed=seed, **kw)


def quadratic_compose(F, Q: QuadraticForm, seed: int = 0, name: Optional[str] = None, **kw) -> DCFunction:
    """Q o F by spectral splitting: Q = P1 - P2 with both parts
    nonnegative, each y -> y^T P_i y convex and bounded on bounded sets,
    so each part composes through the global pipeline; the results
    subtract, controls add."""
    mapping = as_mapping(F)
    if Q.dim != mapping.codomain_dim:
        raise InputError("form dimension does not match the mapping's codomain")
    P1, P2 = quadratic_dc_split(Q)
    parts = []
    for tag, P in (("+", P1), ("-", P2)):
        if not np.any(P.matrix):
            parts.append(None)
            continue
        q = PSDQuadratic(P.matrix)

        def hint(box: Box, nk: str, _q=q) -> float:
            # gradient 2 P y, bounded through the l2 operator norm
            r2 = float(np.linalg.norm(box.vertices(), axis=1).max())
            op = float(np.linalg.norm(_q.matrix, 2))
            return 2.0 * op * r2 * _norm_cover_factor(norms.dual_kind(nk), norms.L2, _q.dim)

        base = from_convex(q, domain=WholeSpace(Q.dim), name=f"quad{tag}")
        gq = DCFunction(
            domain=base.domain, value_fn=base.value_fn, control=base.control,
            provenance=base.provenance, name=base.name, lip_hint=hint,
        )
        parts.append(compose_global(mapping, gq, seed=seed, **kw))
    pos, neg = parts
    if neg is None and pos is None:
        from .core import dc_constant

        return dc_constant(0.0, mapping.domain)
    if neg is None:
        return pos
    if pos is None:
        return dc_negate(neg)
    out = dc_sum([pos, dc_negate(neg)], name=name or f"Q∘{mapping.name}")
    return DCFunction(
        domain=out.domain,
        value_fn=out.value_fn,
        control=out.control,
        provenance="composed",
        name=out.name,
        notes=("spectral split of the quadratic form",),
    )


def bilinear_product(F, G, B_matrix, seed: int = 0, **kw) -> DCFunction:
    """x -> B(F(x), G(x)) for a bilinear form B: bundle (F, G) into one
    mapping and compose with the symmetric quadratic form
    (y, v) -> y^T B v on the product space."""
    Fm, Gm = as_mapping(F), as_mapping(G)
    Bmat = np.atleast_2d(np.asarray(B_matrix, dtype=float))
    m, k = Bmat.shape
    if Fm.codomain_dim != m or Gm.codomain_dim != k:
        raise InputError("bilinear form shape does not match the mappings' codomains")
    stacked = bundle(list(Fm.components) + list(Gm.components), name=f"({Fm.name},{Gm.name})")
    S = np.zeros((m + k, m + k))
    S[:m, m:] = 0.5 * Bmat
    S[m:, :m] = 0.5 * Bmat.T
    return quadratic_compose(stacked, QuadraticForm(S), seed=seed,
                             name=f"B({Fm.name},{Gm.name})", **kw)
