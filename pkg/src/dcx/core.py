"""Delta-convex functions and mappings with explicit control functions.

A mapping F into a normed space is delta-convex on a convex domain when
some continuous convex f makes y* o F + f convex for every dual vector
y* of norm at most one; such an f "controls" F.  For scalar functions
this is the classical two-convex-representation property: g = p - m
with p, m convex iff p + m controls g.

This module holds the value/control pair types, the constructors that
move between representations, and ``check_control``, the sampled checker
every composition result in the package is validated against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import norms, verify
from .errors import InputError
from .functions import ConvexFn, SmoothConvexOracle, constant, sum_fn, scale
from .geometry import ConvexSet, EmptySet, WholeSpace, as_points, _unsqueeze


@dataclass(frozen=True)
class DCFunction:
    """A scalar delta-convex function: domain, value oracle, and a convex
    control.  ``provenance`` records which construction produced it
    ('pair', 'composed', 'glued', 'split', 'gallery', ...), and ``notes``
    accumulate the construction chain for report lineage.

    ``lip_hint``, when set by a constructor, maps (box, norm_kind) to an
    analytic Lipschitz constant of the value on the box; ``band_floor``
    marks outer functions only defined above a coordinate floor."""

    domain: ConvexSet
    value_fn: Callable[[np.ndarray], np.ndarray]
    control: ConvexFn
    provenance: str
    name: str = "dc"
    notes: tuple = field(default_factory=tuple)
    lip_hint: Optional[Callable] = field(default=None, compare=False)
    band_floor: Optional[float] = None

    def __post_init__(self):
        if self.domain.is_empty():
            raise InputError("a d.c. function needs a nonempty domain")
        if self.control.dim != self.domain.dim:
            raise InputError("control dimension does not match the domain")

    @property
    def dim(self) -> int:
        return self.domain.dim

    def value(self, x):
        pts, single = as_points(x, self.dim)
        return _unsqueeze(np.asarray(self.value_fn(pts), dtype=float).reshape(len(pts)), single)

    __call__ = value

    def pair(self) -> "DCPair":
        """Recover a two-convex-function representation from the control:
        value = plus - minus with plus = (value + control)/2 and
        minus = (control - value)/2, both convex by the control contract."""
        ctrl = self.control

        def plus(pts, _v=self.value_fn, _c=ctrl):
            return 0.5 * (np.asarray(_v(pts), dtype=float).reshape(len(pts)) + _c._value(pts))

        def minus(pts, _v=self.value_fn, _c=ctrl):
            return 0.5 * (_c._value(pts) - np.asarray(_v(pts), dtype=float).reshape(len(pts)))

        p = SmoothConvexOracle(plus, dim=self.dim, name=f"{self.name}+", domain=self.domain)
        m = SmoothConvexOracle(minus, dim=self.dim, name=f"{self.name}-", domain=self.domain)
        return DCPair(p, m)

    def with_note(self, note: str) -> "DCFunction":
        return DCFunction(
            self.domain, self.value_fn, self.control, self.provenance, self.name,
            self.notes + (note,), self.lip_hint, self.band_floor,
        )


@dataclass(frozen=True)
class DCPair:
    """g = plus - minus with both parts convex on a shared domain."""

    plus: ConvexFn
    minus: ConvexFn

    def __post_init__(self):
        if self.plus.dim != self.minus.dim:
            raise InputError("pair parts live in different dimensions")

    @property
    def dim(self):
        return self.plus.dim


def from_pair(p: DCPair, domain: Optional[ConvexSet] = None, name: str = "pair") -> DCFunction:
    """Build the d.c. function plus - minus; plus + minus controls it."""
    dom = domain
    if dom is None:
        dom = p.plus.domain if p.plus.domain is not None else p.minus.domain
    if dom is None:
        dom = WholeSpace(p.dim)
    if p.plus.domain is not None and p.minus.domain is not None:
        if p.plus.domain.dim != p.minus.domain.dim:
            raise InputError("pair parts have mismatched domains")

    def value(pts, _p=p.plus, _m=p.minus):
        return _p._value(pts) - _m._value(pts)

    return DCFunction(
        domain=dom,
        value_fn=value,
        control=sum_fn([p.plus, p.minus]),
        provenance="pair",
        name=name,
    )


def from_convex(g: ConvexFn, domain: Optional[ConvexSet] = None, name: str = "convex") -> DCFunction:
    """A convex function is d.c. with itself as control (+-g + g is 2g or 0)."""
    dom = domain if domain is not None else (g.domain or WholeSpace(g.dim))
    return DCFunction(domain=dom, value_fn=g._value, control=g, provenance="pair", name=name)


def dc_affine(slope, intercept: float, domain: ConvexSet, name: str = "affine") -> DCFunction:
    from .functions import AffineFn

    a = AffineFn(slope, intercept)

    return DCFunction(
        domain=domain, value_fn=a._value, control=constant(0.0, a.dim), provenance="pair",
        name=name,
    )


def dc_constant(c: float, domain: ConvexSet) -> DCFunction:
    return dc_affine(np.zeros(domain.dim), c, domain, name=f"const({c})")


def dc_sum(fs: Sequence[DCFunction], name: str = "sum") -> DCFunction:
    fs = list(fs)
    if not fs:
        raise InputError("empty sum")
    _shared_domain_check(fs)

    def value(pts, _fs=tuple(fs)):
        out = np.asarray(_fs[0].value_fn(pts), dtype=float).reshape(len(pts)).copy()
        for f in _fs[1:]:
            out += np.asarray(f.value_fn(pts), dtype=float).reshape(len(pts))
        return out

    return DCFunction(
        domain=fs[0].domain,
        value_fn=value,
        control=sum_fn([f.control for f in fs]),
        provenance="pair",
        name=name,
    )


def dc_scale(f: DCFunction, t: float) -> DCFunction:
    """t * F is controlled by |t| * control: a dual of norm <= 1 against
    t*F acts like a dual of norm <= |t| against F."""

    def value(pts, _f=f, _t=t):
        return _t * np.asarray(_f.value_fn(pts), dtype=float).reshape(len(pts))

    return DCFunction(
        domain=f.domain,
        value_fn=value,
        control=scale(f.control, abs(t)),
        provenance=f.provenance,
        name=f"{t}*{f.name}",
    )


def dc_negate(f: DCFunction) -> DCFunction:
    return dc_scale(f, -1.0)


def dc_max(fs: Sequence[DCFunction], name: str = "max") -> DCFunction:
    """Pointwise maximum of d.c. functions, through pair representations:
    max(p - m, q - n) = max(p + n, q + m) - (m + n), so the result is
    controlled by max(p + n, q + m) + m + n."""
    fs = list(fs)
    if not fs:
        raise InputError("empty max")
    out = fs[0]
    for g in fs[1:]:
        out = _dc_max2(out, g)
    return DCFunction(
        domain=out.domain, value_fn=out.value_fn, control=out.control,
        provenance="pair", name=name,
    )


def _dc_max2(f: DCFunction, g: DCFunction) -> DCFunction:
    from .functions import pointwise_max

    fp, gp = f.pair(), g.pair()
    pf, mf = fp.plus, fp.minus
    pg, mg = gp.plus, gp.minus
    control = sum_fn([pointwise_max([sum_fn([pf, mg]), sum_fn([pg, mf])]), mf, mg])

    def value(pts, _f=f, _g=g):
        return np.maximum(
            np.asarray(_f.value_fn(pts), dtype=float).reshape(len(pts)),
            np.asarray(_g.value_fn(pts), dtype=float).reshape(len(pts)),
        )

    return DCFunction(
        domain=f.domain, value_fn=value, control=control, provenance="pair",
        name=f"max({f.name},{g.name})",
    )


def _shared_domain_check(fs: Sequence) -> None:
    dims = {f.domain.dim for f in fs}
    if len(dims) != 1:
        raise InputError("components live in different dimensions")
    first = fs[0].domain
    for f in fs[1:]:
        if f.domain is not first and type(f.domain) is type(first):
            continue  # distinct but structurally compatible domains are fine
    # membership agreement is the caller's contract; dimension is enforced


@dataclass(frozen=True)
class DCMapping:
    """A d.c. mapping into R^n: component functions on one domain plus a
    combined control.  ``bundle`` builds the canonical sum-of-controls
    combination; constructions that certify a tighter mapping-level
    control (the bump gallery does) pass it to ``check_control``
    explicitly."""

    components: tuple
    combined_control: ConvexFn
    provenance: str = "bundle"
    name: str = "mapping"
    notes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.components:
            raise InputError("a mapping needs at least one component")
        _shared_domain_check(self.components)

    @property
    def domain(self) -> ConvexSet:
        return self.components[0].domain

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def codomain_dim(self) -> int:
        return len(self.components)

    def value(self, x):
        pts, single = as_points(x, self.dim)
        cols = [np.asarray(c.value_fn(pts), dtype=float).reshape(len(pts)) for c in self.components]
        out = np.stack(cols, axis=1)
        return out[0] if single else out


def bundle(components: Sequence[DCFunction], name: str = "bundle") -> DCMapping:
    """Combine scalar d.c. components into a mapping; the sum of the
    component controls controls the bundle (triangle inequality over the
    dual pairing)."""
    comps = tuple(components)
    if not comps:
        raise InputError("cannot bundle an empty component list")
    control = sum_fn([c.control for c in comps])
    return DCMapping(components=comps, combined_control=control, provenance="bundle", name=name)


def as_mapping(f) -> DCMapping:
    if isinstance(f, DCMapping):
        return f
    if isinstance(f, DCFunction):
        return DCMapping(
            components=(f,), combined_control=f.control, provenance=f.provenance, name=f.name
        )
    raise InputError(f"expected a DCFunction or DCMapping, got {type(f).__name__}")


def check_control(
    F,
    duals: int = 64,
    segments: int = 2048,
    tol: float = verify.DEFAULT_TOL,
    seed: int = 0,
    points_per_segment: int = 5,
    region: Optional[ConvexSet] = None,
    control: Optional[ConvexFn] = None,
    norm_kind: str = norms.L2,
    codomain_norm: Optional[str] = None,
    batch: int = 16384,
) -> verify.VerificationReport:
    """Sampled test of the control contract: along random segments in the
    domain (or ``region``), second differences of y* o F + control must be
    >= -tol * scale for every sampled unit dual y*.

    The dual sample always contains the extreme coordinate duals, then
    fills up uniformly from the dual sphere.  Component values and the
    control are evaluated once per point; duals only recombine them.
    """
    if duals <= 0 or segments <= 0:
        raise InputError("need positive dual / segment counts")
    mapping = as_mapping(F)
    ctrl = control if control is not None else mapping.combined_control
    dom = region if region is not None else mapping.domain
    if isinstance(dom, (EmptySet, WholeSpace)):
        raise InputError("sampling region must be nonempty and bounded; pass region=...")
    m = mapping.codomain_dim
    cod = codomain_norm or norm_kind
    dual_rng = verify.derive_rng(seed, 1_000_003)
    Y = norms.sample_dual_vectors(dual_rng, duals, m, cod)[:duals]

    P = points_per_segment
    ts = np.linspace(0.0, 1.0, P)
    n_batches = (segments + batch - 1) // batch
    sizes = [min(batch, segments - i * batch) for i in range(n_batches)]

    def one(i: int):
        rng = verify.derive_rng(seed, i)
        n = sizes[i]
        a = dom.sample(rng, n, norm_kind)
        b = dom.sample(rng, n, norm_kind)
        pts = (a[:, None, :] + ts[None, :, None] * (b - a)[:, None, :]).reshape(n * P, -1)
        comp_vals = np.stack(
            [np.asarray(c.value_fn(pts), dtype=float).reshape(n * P) for c in mapping.components],
            axis=1,
        )
        ctrl_vals = ctrl._value(pts)
        worst = -np.inf
        where = None
        pts3 = pts.reshape(n, P, -1)
        for y in Y:
            psi = (comp_vals @ y + ctrl_vals).reshape(n, P)
            d2 = psi[:, :-2] - 2.0 * psi[:, 1:-1] + psi[:, 2:]
            sc = 1.0 + np.abs(psi[:, :-2]) + np.abs(psi[:, 1:-1]) + np.abs(psi[:, 2:])
            viol = -d2 / sc
            flat = int(np.argmax(viol))
            r, c = divmod(flat, P - 2)
            if viol[r, c] > worst:
                worst = float(viol[r, c])
                where = (pts3[r, c], pts3[r, c + 1], pts3[r, c + 2], y)
        return worst, where

    results = verify._run_batches(one, n_batches)
    report = verify._finalize(
        [r[0] for r in results],
        [r[1] for r in results],
        {"duals": duals, "segments": segments, "points_per_segment": P},
        seed,
        tol,
        notes=[f"provenance: {mapping.provenance}", f"name: {mapping.name}", *mapping.notes],
    )
    return report
