"""Local-to-global control machinery: exhaustion builders and the gluing
recursion that welds countably many local control functions into one
global control (finite prefix at desk scale).

The recursion, stage by stage (1-based indices, D_n the stages, d_n the
certified gaps, gamma_n the shifted-positive local controls bounded by
b_n on D_n):

    phi_n(x) = ((b_n + 1)/d_n) * dist(x, D_n)
    h_n      = max(gamma_{n+1}, phi_n) on D_{n+1},  phi_n outside
    g_n      = h_{n+2} - sigma_n + ((sigma_n + s_n + 1)/d_n) * dist(x, D_n)
                  with s_n >= sup f_n(D_{n+2}),  sigma_n >= sup h_{n+2}(D_n)
    f_1      = h_2,   f_{n+1} = max(f_n, g_n)

Each f_n is convex on the whole ambient set, controls the mapping on
D_{n+1}, and f_{n+1} = f_n on D_n exactly (the max picks the old branch
because g_n <= 0 there), which is what makes the finite prefix stable.
Upper bounds for s_n, sigma_n are safe to overestimate; underestimating
them would break the locality property, so polytopal stages use exact
vertex maxima and round stages use inflated boundary samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import norms, verify
from .core import DCFunction
from .errors import InputError, PreconditionError, UndecidableError
from .functions import (
    ConvexFn,
    DistanceTo,
    PointwiseMax,
    SmoothConvexOracle,
    constant,
    lipschitz_extension,
    estimate_lipschitz,
    sum_fn,
)
from .geometry import (
    Ball,
    Box,
    ConvexSet,
    EmptySet,
    HalfspaceIntersection,
    SublevelSet,
    WholeSpace,
    compactly_contained,
    hull_polytope,
    inner_parallel,
    intersect,
)

SUP_SAMPLES = 4096
SUP_INFLATE = 1.25


# --------------------------------------------------------------------------
# exhaustions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Exhaustion:
    """Increasing stages D_1 subset D_2 subset ... inside an ambient convex
    set, with certified positive gap lower bounds d_n < dist(D_n, C \\ D_{n+1}).
    A gap of +inf means the next stage already fills the ambient set."""

    ambient: ConvexSet
    stages: tuple
    gaps: tuple
    norm_kind: str = norms.L2

    def __post_init__(self):
        if len(self.stages) != len(self.gaps):
            raise InputError("one gap certificate per stage is required")
        for s in self.stages:
            if s.is_empty():
                raise InputError("empty stage in exhaustion")

    def __len__(self):
        return len(self.stages)

    def validate(self, seed: int = 0, samples: int = 512) -> verify.VerificationReport:
        """Sampled invariant check: nesting, gap certificates, coverage of
        the last stage's reach."""
        worst = -np.inf
        where = None
        notes = []
        for i in range(len(self.stages) - 1):
            rng = verify.derive_rng(seed, i)
            inner, outer = self.stages[i], self.stages[i + 1]
            pts = inner.sample(rng, samples, self.norm_kind)
            ok = outer._contains(pts) | (outer.dist(pts, self.norm_kind) <= 1e-12)
            if not np.all(ok):
                worst = max(worst, 1.0)
                where = [pts[~ok][0]]
                notes.append(f"stage {i + 1} not inside stage {i + 2}")
                continue
            gap = self.gaps[i]
            if np.isfinite(gap):
                d = outer.dist_to_complement(pts, self.norm_kind)
                bad = d <= gap
                v = float((gap - d).max() / max(gap, 1e-300))
                if v > worst:
                    worst = v
                    where = [pts[int(np.argmax(gap - d))]]
                if np.any(bad):
                    notes.append(f"gap certificate {gap} violated between stages {i+1},{i+2}")
        return verify.VerificationReport(
            passed=bool(worst <= 0.0),
            worst_violation=float(worst),
            witness_location=None if where is None else [list(map(float, w)) for w in where],
            sample_counts={"per_stage": samples, "stages": len(self.stages)},
            seed=seed,
            tolerance=0.0,
            notes=notes,
        )


@dataclass(frozen=True)
class LocalControlFamily:
    """Local controls gamma_n on the stages, with (optional, recomputed)
    upper bounds b_n.  Controls may arrive unshifted; ``glue`` performs the
    positivity shift and records it."""

    controls: tuple
    bounds: Optional[tuple] = None

    def __len__(self):
        return len(self.controls)


def _certified_gap(inner: ConvexSet, outer: ConvexSet, norm_kind: str, fallback: float) -> float:
    """A certified d with d < dist(inner, complement of outer)."""
    try:
        eps = compactly_contained(inner, outer, norm_kind)
    except UndecidableError:
        eps = None
    best = fallback
    if eps is not None:
        best = max(best, eps)
    return best


def build_exhaustion(
    C: ConvexSet,
    C_list: Sequence[ConvexSet],
    delta: float,
    norm_kind: str = norms.L2,
) -> Exhaustion:
    """Shrink an increasing family C_n (covering C) into stages
    D_n = {x in C_n : dist(x, complement C_n) > delta/n}.

    The inclusion chain through the intermediate set
    {dist > delta/(n+1)} subset D_{n+1} certifies the gap
    d_n = delta/(n(n+1)) analytically for every kind; exact kind-pair
    margins are used instead when they are larger.
    """
    if delta <= 0:
        raise InputError("delta must be > 0")
    if not C_list:
        raise InputError("need at least one exhausting set")
    inr = C_list[0].inradius(norm_kind)
    if inr < 2 * delta:
        raise InputError(
            f"the first exhausting set must contain an open ball of radius "
            f"2*delta = {2 * delta} (inradius is only {inr}); shrink delta"
        )
    stages = []
    for n, Cn in enumerate(C_list, start=1):
        Dn = inner_parallel(Cn, delta / n, norm_kind)
        if Dn.is_empty():
            raise InputError(f"stage {n} eroded to the empty set; shrink delta")
        stages.append(Dn)
    gaps = []
    for n in range(1, len(stages)):
        chain = delta / (n * (n + 1)) * 0.999
        gaps.append(_certified_gap(stages[n - 1], stages[n], norm_kind, chain))
    gaps.append(np.inf)  # last stage carries no forward certificate
    return Exhaustion(ambient=C, stages=tuple(stages), gaps=tuple(gaps), norm_kind=norm_kind)


def sublevel_exhaustion(
    f: ConvexFn, x0, C: Optional[ConvexSet] = None, n_stages: int = 8
) -> list:
    """Open sublevel sets {x in C : f(x) < f(x0) + n} for n = 1..N, as
    membership oracles.  Convex because f is; metric queries need the
    inscribed-polytope conversion first."""
    dom = C if C is not None else (f.domain or WholeSpace(f.dim))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not bool(dom.contains(x0)):
        raise InputError("anchor point x0 must lie in the set being exhausted")
    f0 = float(f.value(x0))
    return [
        SublevelSet(fn=f._value, threshold=f0 + n, ambient=dom) for n in range(1, n_stages + 1)
    ]


def inscribe_polytope(
    S: ConvexSet,
    anchor,
    norm_kind: str = norms.L2,
    directions: Optional[np.ndarray] = None,
    n_directions: int = 64,
    max_radius: float = 64.0,
    tol: float = 1e-12,
    min_radii: Optional[np.ndarray] = None,
) -> tuple[ConvexSet, np.ndarray]:
    """Inscribed polytope of a convex membership oracle by ray bisection
    from an interior anchor.

    Returns (polytope, radii).  Convexity of S makes membership monotone
    along each ray, so bisection is exact to ``tol``; the hull of points
    strictly inside S is a certified subset.  Passing the previous stage's
    radii as ``min_radii`` (with the same direction set) keeps successive
    polytopes nested.
    """
    anchor = np.atleast_1d(np.asarray(anchor, dtype=float))
    d = anchor.shape[0]
    if not bool(S.contains(anchor)):
        raise PreconditionError("anchor must lie inside the oracle set")
    if directions is None:
        directions = _ray_directions(d, n_directions)
    k = len(directions)
    lo = np.zeros(k)
    hi = np.full(k, float(max_radius))
    # shrink hi until all endpoints leave the set or the cap binds
    pts = anchor + hi[:, None] * directions
    outside = ~S._contains(pts)
    # rays that stay inside up to the cap are fine: the cap bounds the stage
    for _ in range(120):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        inside = S._contains(anchor + mid[:, None] * directions)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    radii = np.where(outside, lo, hi)  # capped rays keep the cap radius
    radii = np.maximum(radii, 0.0)
    if min_radii is not None:
        radii = np.maximum(radii, min_radii)
    pts = anchor + (radii[:, None] * directions)
    poly = hull_polytope(np.vstack([pts, anchor.reshape(1, -1)]), closed=False)
    return poly, radii


def _ray_directions(dim: int, n: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    # dim 3: Fibonacci sphere, deterministic
    i = np.arange(n, dtype=float)
    phi = np.arccos(1 - 2 * (i + 0.5) / n)
    theta = np.pi * (1 + 5**0.5) * (i + 0.5)
    return np.stack(
        [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)], axis=1
    )


# --------------------------------------------------------------------------
# sups over stages
# --------------------------------------------------------------------------


def convex_sup_on(
    fn: ConvexFn,
    S: ConvexSet,
    seed: int,
    n_samples: int = SUP_SAMPLES,
    inflate: float = SUP_INFLATE,
) -> float:
    """Upper bound for sup of a convex function over a stage set.

    Polytopal stages: the maximum over vertices is exact for convex
    functions, and interior samples guard against oracle nodes that are
    only convex-by-assertion.  Round stages: boundary samples (a convex
    function's supremum sits on the boundary) inflated by the safety factor.
    """
    cands = []
    vs = S.vertices()
    exact = False
    if vs is not None and len(vs):
        cands.append(vs)
        exact = True
    rng = verify.derive_rng(seed, 77)
    if isinstance(S, Ball):
        cands.append(S.boundary_sample(rng, n_samples))
    try:
        cands.append(S.sample(rng, min(n_samples, 1024)))
    except (UndecidableError, InputError):
        pass
    if not cands:
        raise InputError("cannot bound a control on this stage kind")
    best = max(float(fn._value(c).max()) for c in cands)
    if exact:
        return best + 1e-12 * (1 + abs(best))
    # inflation must move the estimate upward regardless of sign
    return best * inflate if best > 0 else best / inflate


def convex_inf_on(fn: ConvexFn, S: ConvexSet, seed: int) -> tuple[float, bool]:
    """Lower bound for inf over the stage: analytic box bound when the
    node tree supports it (exact flag True), sampled minus margin else."""
    try:
        lo, hi = S.bounding_box()
    except UndecidableError:
        lo = hi = None
    if lo is not None:
        b = fn.lower_bound_on_box(lo, hi)
        if b is not None:
            return float(b), True
    rng = verify.derive_rng(seed, 78)
    pts = S.sample(rng, 2048)
    vals = fn._value(pts)
    span = float(vals.max() - vals.min())
    return float(vals.min()) - 0.25 * span - 1.0, False


# --------------------------------------------------------------------------
# patch nodes
# --------------------------------------------------------------------------


class GluePatch(ConvexFn):
    """The h_n node: max(gamma, phi) on the patch, phi outside.

    Convex on the ambient set because phi exceeds gamma's bound before the
    patch boundary is reached (that is what the gap certificate in phi's
    slope buys); gamma is never evaluated outside the patch.
    """

    def __init__(self, gamma: ConvexFn, phi: ConvexFn, patch: ConvexSet):
        self.gamma = gamma
        self.phi = phi
        self.patch = patch
        self.domain = None
        self.globally_convex = gamma.globally_convex and phi.globally_convex

    @property
    def dim(self):
        return self.patch.dim

    def _value(self, pts):
        out = self.phi._value(pts).copy()
        mask = self.patch._contains(pts)
        if np.any(mask):
            out[mask] = np.maximum(out[mask], self.gamma._value(pts[mask]))
        return out

    def lower_bound_on_box(self, lo, hi):
        return self.phi.lower_bound_on_box(lo, hi)


# --------------------------------------------------------------------------
# the gluing recursion
# --------------------------------------------------------------------------


@dataclass
class GlueResult:
    """Glued control plus per-stage internals for inspection and dumps."""

    control: ConvexFn
    stage_controls: list  # shifted gamma_n
    shifts: list
    bounds: list
    phis: list
    hs: list
    gs: list
    fs: list  # f_1 .. f_final
    certified_stage: ConvexSet  # control contract certified here
    notes: list = field(default_factory=list)


def _pad_degenerate(E: Exhaustion, controls: list) -> tuple[list, list, list, list]:
    """Repeat the final stage when it fills the ambient set, so short or
    fully degenerate exhaustions still feed the recursion.  A repeated
    full stage has an empty forward complement, hence an infinite gap."""
    stages = list(E.stages)
    gaps = list(E.gaps)
    notes = []
    full = _covers_ambient(stages[-1], E.ambient)
    while len(stages) < 4 and full:
        stages.append(stages[-1])
        controls.append(controls[-1])
        gaps[-1] = np.inf
        gaps.append(np.inf)
        notes.append("padded with a repeated full stage")
    return stages, gaps, controls, notes


def _covers_ambient(stage: ConvexSet, ambient: ConvexSet) -> bool:
    if stage is ambient:
        return True
    if isinstance(stage, WholeSpace) and isinstance(ambient, WholeSpace):
        return True
    if type(stage) is type(ambient):
        try:
            return stage.to_json() == ambient.to_json()
        except UndecidableError:
            return False
    return False


def glue(
    E: Exhaustion,
    family: LocalControlFamily,
    seed: int = 0,
    sup_samples: int = SUP_SAMPLES,
    sup_inflate: float = SUP_INFLATE,
) -> GlueResult:
    """Run the recursion over the exhaustion's finite prefix.

    With K usable stages the final function is f_{K-2}; it is convex on
    the ambient set, controls the mapping on D_{K-1}, and agrees with f_n
    on D_n exactly for every earlier n.
    """
    if len(family) != len(E):
        raise InputError("one local control per stage is required")
    if len(E) < 2:
        raise InputError("need at least two stages to glue")
    controls = list(family.controls)
    stages, gaps, controls, notes = _pad_degenerate(E, controls)
    K = len(stages)
    if K < 3:
        raise InputError(
            "need at least three stages (or a final stage filling the ambient set) "
            "to certify any region"
        )
    for i, g in enumerate(gaps[: K - 1]):
        if not (g > 0):
            raise InputError(f"missing or nonpositive gap certificate after stage {i + 1}")
    nk = E.norm_kind

    # positivity shift and bounds per stage
    shifted, shifts, bounds = [], [], []
    for i, (gamma, S) in enumerate(zip(controls, stages)):
        lb, exact = convex_inf_on(gamma, S, seed=seed * 1000 + i)
        shift = 1.0 - lb
        g_sh = gamma.shifted(shift) if shift != 0.0 else gamma
        b = convex_sup_on(g_sh, S, seed=seed * 1000 + i, n_samples=sup_samples, inflate=sup_inflate)
        shifted.append(g_sh)
        shifts.append(shift)
        bounds.append(b)
        if not exact:
            notes.append(f"stage {i + 1}: sampled lower bound used for the positivity shift")

    # phi_n and h_n for n = 1..K-1 (0-based i = 0..K-2)
    phis, hs = [], []
    for i in range(K - 1):
        coeff = 0.0 if np.isinf(gaps[i]) else (bounds[i] + 1.0) / gaps[i]
        phi = DistanceTo(stages[i], coeff, nk)
        phis.append(phi)
        hs.append(GluePatch(shifted[i + 1], phi, stages[i + 1]))

    # recursion
    fs = [hs[1]]  # f_1 = h_2
    gs = []
    for n1 in range(1, K - 2):
        f_prev = fs[-1]
        h_next = hs[n1 + 1]
        s = convex_sup_on(f_prev, stages[n1 + 1], seed=seed * 1000 + 500 + n1,
                          n_samples=sup_samples, inflate=sup_inflate)
        sigma = convex_sup_on(h_next, stages[n1 - 1], seed=seed * 1000 + 700 + n1,
                              n_samples=sup_samples, inflate=sup_inflate)
        coeff = 0.0 if np.isinf(gaps[n1 - 1]) else (sigma + s + 1.0) / gaps[n1 - 1]
        g_n = sum_fn([h_next, constant(-sigma, h_next.dim), DistanceTo(stages[n1 - 1], coeff, nk)])
        gs.append(g_n)
        fs.append(PointwiseMax((f_prev, g_n)))

    return GlueResult(
        control=fs[-1],
        stage_controls=shifted,
        shifts=shifts,
        bounds=bounds,
        phis=phis,
        hs=hs,
        gs=gs,
        fs=fs,
        certified_stage=stages[min(K - 2, len(stages) - 1)],
        notes=notes,
    )


# --------------------------------------------------------------------------
# local patches to one global d.c. function
# --------------------------------------------------------------------------


def dc_from_local(
    A: ConvexSet,
    locals_: Sequence[tuple[ConvexSet, DCFunction]],
    working_region: Optional[ConvexSet] = None,
    seed: int = 0,
    consistency_tol: float = 1e-10,
    norm_kind: str = norms.L2,
) -> DCFunction:
    """Assemble one d.c. function from finitely many consistent local
    patches covering the working region.

    The summed patch controls (each extended to a globally convex
    function when its formula is not already one) control the assembled
    value on the region: near any point some patch control supplies local
    convexity of y*F + control, and adding the remaining convex summands
    preserves it.  The sum is then run through a degenerate gluing pass so
    the result carries the same normalization as every other glued control.
    """
    if not locals_:
        raise InputError("need at least one local patch")
    W = working_region if working_region is not None else A
    if isinstance(W, WholeSpace):
        raise InputError("pass a bounded working region for the assembly")
    rng = verify.derive_rng(seed, 0)
    probe = W.sample(rng, 2048, norm_kind)

    # coverage
    covered = np.zeros(len(probe), dtype=bool)
    for patch, _ in locals_:
        covered |= patch._contains(probe)
    if not np.all(covered):
        bad = probe[~covered][0]
        raise InputError(f"working region not covered by the patches: uncovered point {bad}")

    # overlap consistency
    for i in range(len(locals_)):
        for j in range(i + 1, len(locals_)):
            pi, fi = locals_[i]
            pj, fj = locals_[j]
            both = pi._contains(probe) & pj._contains(probe)
            if not np.any(both):
                continue
            vi = np.asarray(fi.value_fn(probe[both]), dtype=float)
            vj = np.asarray(fj.value_fn(probe[both]), dtype=float)
            err = float(np.abs(vi - vj).max())
            if err > consistency_tol:
                raise InputError(
                    f"patches {i} and {j} disagree on their overlap by {err:.3e}"
                )

    patches = [p for p, _ in locals_]
    if len(locals_) == 1:
        return locals_[0][1]

    # globally convex extensions of the patch controls
    ext_controls = []
    for patch, f in locals_:
        c = f.control
        if c.globally_convex:
            ext_controls.append(c)
            continue
        L = 1.5 * estimate_lipschitz(c, patch, 2048, norm_kind, seed=seed + 11)
        core_set = inner_parallel(patch, 1e-9, norm_kind)
        ext_controls.append(lipschitz_extension(c, core_set, max(L, 1e-9), norm_kind))

    summed = sum_fn(ext_controls)

    def value(pts, _locals=tuple(locals_), _patches=tuple(patches)):
        out = np.full(len(pts), np.nan)
        todo = np.ones(len(pts), dtype=bool)
        for patch, f in _locals:
            mask = todo & patch._contains(pts)
            if np.any(mask):
                out[mask] = np.asarray(f.value_fn(pts[mask]), dtype=float)
                todo &= ~mask
        if np.any(todo):
            # boundary crumbs: nearest patch by distance
            rest = np.nonzero(todo)[0]
            dists = np.stack([p._dist(pts[rest], norm_kind) for p in _patches], axis=1)
            pick = dists.argmin(axis=1)
            for k, patch_idx in zip(rest, pick):
                out[k] = float(
                    np.asarray(_locals[patch_idx][1].value_fn(pts[k : k + 1]), dtype=float)[0]
                )
        return out

    E = Exhaustion(ambient=W, stages=(W, W), gaps=(np.inf, np.inf), norm_kind=norm_kind)
    glued = glue(E, LocalControlFamily(controls=(summed, summed)), seed=seed)
    return DCFunction(
        domain=W,
        value_fn=value,
        control=glued.control,
        provenance="glued",
        name="patched",
        notes=("assembled from %d local patches" % len(locals_),),
    )
