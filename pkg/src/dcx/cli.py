"""Command-line front end and the JSON workspace format.

Subcommands
-----------
``decompose``  build the d.c. function for a workspace's expression tree,
               run the control check, emit a JSON report with value and
               control samples.
``glue``       run the gluing recursion from an explicit stage/control
               description, optionally dumping the per-stage functions to
               CSV, then check the glued control.
``verify``     run the control check for a workspace (expression or glue
               section) with the sampling counts given on the command line.
``gallery``    emit the staircase family on a grid, or a bump system's
               mapping/control samples, as CSV.
``gauge``      evaluate a hull-body Minkowski gauge at a point.

Exit codes: 0 pass, 1 verification fail, 2 input error, 3 internal error.

Workspaces are canonical JSON: object keys sorted, floats rendered with
17 significant digits, so serialize-parse-serialize is byte-stable.
Every expression node is one of the closure operations the calculus
implements; named definitions are referenced as "@name" and must be
acyclic.  Smooth outer functions come from a fixed registry (sin, exp,
atan, polynomials with inline coefficients); no user code is executed.
The environment variable DCX_THREADS caps sampling parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import calculus, core, gallery, gluing, norms, verify
from .errors import DcxError, InputError, InternalError
from .functions import (
    AffineFn,
    ConvexFn,
    DistanceTo,
    GaugeSquared,
    MaxOfAffine,
    PSDQuadratic,
    SmoothConvexOracle,
    pointwise_max,
    scale,
    sum_fn,
)
from .geometry import Box, ConvexSet, HullBody, WholeSpace, minkowski_gauge, set_from_json


# --------------------------------------------------------------------------
# canonical JSON
# --------------------------------------------------------------------------


def canonical_json(obj) -> str:
    """Canonical form: sorted keys, fixed float format (17 significant
    digits), compact separators, newline-terminated."""

    def render(o) -> str:
        if o is None or isinstance(o, bool):
            return json.dumps(o)
        if isinstance(o, (int, np.integer)) and not isinstance(o, bool):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return format_float(float(o))
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, (list, tuple, np.ndarray)):
            return "[" + ",".join(render(v) for v in o) + "]"
        if isinstance(o, dict):
            items = sorted(o.items())
            return "{" + ",".join(json.dumps(str(k)) + ":" + render(v) for k, v in items) + "}"
        raise InputError(f"cannot serialize {type(o).__name__}")

    return render(obj) + "\n"


def format_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise InputError("non-finite float in workspace")
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return f"{x:.17g}"


# --------------------------------------------------------------------------
# the outer-function registry
# --------------------------------------------------------------------------


def registry_outer(spec) -> core.DCFunction:
    """Built-in smooth outer functions on R with analytic controls:
    exp (its own control), sin (curvature 1, control x^2/2), atan
    (curvature 3*sqrt(3)/8), and polynomials (control sum |a_j| |x|^j
    over j >= 2, whose curvature dominates the polynomial's)."""
    dom = WholeSpace(1)
    if spec == "exp":
        ctrl = SmoothConvexOracle(
            lambda p: np.exp(p[:, 0]), dim=1, name="exp", lower=0.0, globally_convex=True
        )
        return core.DCFunction(
            dom, lambda p: np.exp(p[:, 0]), ctrl, "pair", "exp",
            lip_hint=lambda box, nk: float(np.exp(box.hi.max())),
        )
    if spec == "sin":
        return core.DCFunction(
            dom, lambda p: np.sin(p[:, 0]), PSDQuadratic([[0.5]]), "split", "sin",
            lip_hint=lambda box, nk: 1.0,
        )
    if spec == "atan":
        c = 3.0 * np.sqrt(3.0) / 16.0
        return core.DCFunction(
            dom, lambda p: np.arctan(p[:, 0]), PSDQuadratic([[c]]), "split", "atan",
            lip_hint=lambda box, nk: 1.0,
        )
    if isinstance(spec, dict) and "poly" in spec:
        coeffs = np.asarray(spec["poly"], dtype=float)

        def val(p, _c=coeffs):
            return np.polynomial.polynomial.polyval(p[:, 0], _c)

        def ctrl_val(p, _c=coeffs):
            out = np.zeros(len(p))
            ax = np.abs(p[:, 0])
            for j in range(2, len(_c)):
                if _c[j] != 0.0:
                    out += abs(_c[j]) * ax**j
            return out

        ctrl = SmoothConvexOracle(ctrl_val, dim=1, name="poly-control", lower=0.0,
                                  globally_convex=True)

        def hint(box: Box, nk: str, _c=coeffs) -> float:
            m = float(np.abs(np.concatenate([box.lo, box.hi])).max())
            return float(sum(j * abs(_c[j]) * m ** (j - 1) for j in range(1, len(_c))))

        return core.DCFunction(dom, val, ctrl, "pair", "poly", lip_hint=hint)
    raise InputError(f"unknown outer function {spec!r}; registry: exp, sin, atan, poly")


# --------------------------------------------------------------------------
# workspace parsing
# --------------------------------------------------------------------------


class Workspace:
    """Parsed workspace: ambient space, named definitions, the expression
    tree, seed and tolerances."""

    def __init__(self, data: dict):
        amb = data.get("ambient", {})
        self.dim = int(amb.get("dimension", 1))
        self.norm_kind = norms.check_kind(amb.get("norm", norms.L2))
        self.seed = int(data.get("seed", 0))
        tol = data.get("tolerances", {})
        self.tol = float(tol.get("tol", verify.DEFAULT_TOL))
        self.segments = int(tol.get("segments", 10_000))
        self.duals = int(tol.get("duals", 64))
        self.definitions = data.get("definitions", {})
        self.data = data
        self._resolving: list[str] = []
        dom = data.get("domain")
        self.domain = self.resolve_set(dom) if dom is not None else WholeSpace(self.dim)

    # ---- references ----

    def _lookup(self, name: str) -> dict:
        if name in self._resolving:
            raise InputError(f"cyclic reference through @{name}")
        if name not in self.definitions:
            raise InputError(f"undefined reference @{name}")
        return self.definitions[name]

    def resolve_set(self, spec) -> ConvexSet:
        if isinstance(spec, str) and spec.startswith("@"):
            name = spec[1:]
            raw = self._lookup(name)
            self._resolving.append(name)
            try:
                return self.resolve_set(raw)
            finally:
                self._resolving.pop()
        if not isinstance(spec, dict):
            raise InputError(f"bad set spec {spec!r}")
        return set_from_json(spec)

    def resolve_convex(self, spec) -> ConvexFn:
        if isinstance(spec, str) and spec.startswith("@"):
            name = spec[1:]
            raw = self._lookup(name)
            self._resolving.append(name)
            try:
                return self.resolve_convex(raw)
            finally:
                self._resolving.pop()
        if not isinstance(spec, dict):
            raise InputError(f"bad convex function spec {spec!r}")
        kind = spec.get("kind")
        if kind == "max-affine":
            return MaxOfAffine(np.asarray(spec["slopes"], dtype=float),
                               np.asarray(spec["intercepts"], dtype=float))
        if kind == "affine":
            return AffineFn(np.asarray(spec["slope"], dtype=float), float(spec["intercept"]))
        if kind == "psd-quadratic":
            return PSDQuadratic(np.asarray(spec["matrix"], dtype=float))
        if kind == "gauge-squared":
            return GaugeSquared(HullBody.from_json(spec["body"]),
                                float(spec.get("scale", 0.5)))
        if kind == "distance":
            return DistanceTo(self.resolve_set(spec["set"]), float(spec.get("coeff", 1.0)),
                              spec.get("norm", self.norm_kind))
        if kind == "sum":
            return sum_fn([self.resolve_convex(c) for c in spec["children"]])
        if kind == "max":
            return pointwise_max([self.resolve_convex(c) for c in spec["children"]])
        if kind == "scale":
            return scale(self.resolve_convex(spec["child"]), float(spec["factor"]))
        raise InputError(f"unknown convex function kind {kind!r}")

    # ---- expressions ----

    def build(self, node) -> core.DCFunction:
        if isinstance(node, str) and node.startswith("@"):
            name = node[1:]
            raw = self._lookup(name)
            self._resolving.append(name)
            try:
                return self.build(raw)
            finally:
                self._resolving.pop()
        if not isinstance(node, dict):
            raise InputError(f"bad expression node {node!r}")
        op = node.get("op")
        if op == "const":
            return core.dc_constant(float(node["value"]), self.domain)
        if op == "var":
            idx = int(node.get("index", 0))
            slope = np.zeros(self.dim)
            slope[idx] = 1.0
            return core.dc_affine(slope, 0.0, self.domain, name=f"x{idx}")
        if op == "affine":
            return core.dc_affine(np.asarray(node["slope"], dtype=float),
                                  float(node.get("intercept", 0.0)), self.domain)
        if op == "norm":
            from .functions import norm_fn

            return core.from_convex(norm_fn(self.dim, self.norm_kind), self.domain, name="norm")
        if op == "pair":
            plus = self.resolve_convex(node["plus"])
            minus = self.resolve_convex(node["minus"])
            return core.from_pair(core.DCPair(plus, minus), domain=self.domain)
        if op == "sum":
            return core.dc_sum([self.build(c) for c in node["children"]])
        if op == "scale":
            return core.dc_scale(self.build(node["child"]), float(node["factor"]))
        if op == "max":
            return core.dc_max([self.build(c) for c in node["children"]])
        if op == "product":
            return calculus.product(self.build(node["left"]), self.build(node["right"]),
                                    seed=self.seed, norm_kind=self.norm_kind)
        if op == "quotient":
            return calculus.quotient(
                self.build(node["num"]), self.build(node["den"]),
                positive=node.get("positive"), m=node.get("m"),
                seed=self.seed, norm_kind=self.norm_kind,
            )
        if op == "compose":
            inner = self.build(node["child"])
            outer = registry_outer(node["outer"])
            return calculus.compose_global(inner, outer, seed=self.seed,
                                           norm_kind=self.norm_kind)
        if op == "quadratic":
            from .functions import QuadraticForm

            comps = [self.build(c) for c in node["children"]]
            return calculus.quadratic_compose(
                core.bundle(comps), QuadraticForm(np.asarray(node["matrix"], dtype=float)),
                seed=self.seed, norm_kind=self.norm_kind,
            )
        if op == "bilinear":
            left = core.bundle([self.build(c) for c in node["left"]])
            right = core.bundle([self.build(c) for c in node["right"]])
            return calculus.bilinear_product(left, right, node["matrix"],
                                             seed=self.seed, norm_kind=self.norm_kind)
        if op == "gallery":
            name = node.get("name")
            if name == "staircase-ramp":
                return gallery.staircase_dc()
            raise InputError(f"unknown gallery reference {name!r}")
        raise InputError(f"unknown expression op {op!r}")


def load_workspace(path: str) -> Workspace:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"workspace file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}")
    return Workspace(data)


# --------------------------------------------------------------------------
# command implementations
# --------------------------------------------------------------------------


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check_region(ws: Workspace, f: core.DCFunction) -> ConvexSet:
    reg = ws.data.get("region")
    if reg is not None:
        return ws.resolve_set(reg)
    if not isinstance(f.domain, WholeSpace):
        return f.domain
    raise InputError("the workspace needs a bounded 'region' to sample on")


def cmd_decompose(args) -> int:
    ws = load_workspace(args.workspace)
    if args.seed is not None:
        ws.seed = args.seed
    if "expression" not in ws.data:
        raise InputError("workspace has no 'expression' section")
    f = ws.build(ws.data["expression"])
    region = _check_region(ws, f)
    segments = args.samples or ws.segments
    tol = args.tol if args.tol is not None else ws.tol
    report = core.check_control(
        f, duals=ws.duals, segments=segments, tol=tol, seed=ws.seed,
        region=region, norm_kind=ws.norm_kind,
    )
    rng = verify.derive_rng(ws.seed, 12345)
    grid = region.sample(rng, 64, ws.norm_kind)
    order = np.lexsort(grid.T)
    grid = grid[order]
    payload = {
        "report": json.loads(report.to_json()),
        "provenance": f.provenance,
        "name": f.name,
        "notes": list(f.notes),
        "samples": {
            "points": grid.tolist(),
            "value": np.asarray(f.value(grid), dtype=float).tolist(),
            "control": np.asarray(f.control._value(grid), dtype=float).tolist(),
        },
    }
    _emit(canonical_json(payload), args.out)
    return 0 if report.passed else 1


def _glue_from_spec(ws: Workspace) -> tuple[gluing.GlueResult, dict]:
    spec = ws.data.get("glue")
    if spec is None:
        raise InputError("workspace has no 'glue' section")
    ambient = ws.resolve_set(spec["ambient"])
    stages = tuple(ws.resolve_set(s) for s in spec["stages"])
    gaps_raw = spec.get("gaps")
    if gaps_raw is None:
        gaps = []
        for i in range(len(stages) - 1):
            from .geometry import compactly_contained

            eps = compactly_contained(stages[i], stages[i + 1], ws.norm_kind)
            if eps is None:
                raise InputError(f"no containment margin between stages {i + 1} and {i + 2}")
            gaps.append(eps)
        gaps.append(float("inf"))
    else:
        gaps = [float(g) if g != "inf" else float("inf") for g in gaps_raw]
    E = gluing.Exhaustion(ambient=ambient, stages=stages, gaps=tuple(gaps),
                          norm_kind=ws.norm_kind)
    controls = tuple(ws.resolve_convex(c) for c in spec["controls"])
    res = gluing.glue(E, gluing.LocalControlFamily(controls=controls), seed=ws.seed)
    return res, spec


def cmd_glue(args) -> int:
    ws = load_workspace(args.workspace)
    if args.seed is not None:
        ws.seed = args.seed
    res, spec = _glue_from_spec(ws)
    report = None
    mapping_name = spec.get("mapping")
    if mapping_name is not None:
        outer = registry_outer(mapping_name)
        dc = core.DCFunction(
            domain=res.certified_stage, value_fn=outer.value_fn, control=res.control,
            provenance="glued", name=f"{mapping_name}-glued",
        )
        region = ws.resolve_set(spec["region"]) if "region" in spec else res.certified_stage
        report = core.check_control(
            dc, duals=ws.duals, segments=args.samples or ws.segments,
            tol=args.tol if args.tol is not None else ws.tol,
            seed=ws.seed, region=region, norm_kind=ws.norm_kind,
        )
    if args.out and args.out.endswith(".csv"):
        _dump_stages_csv(res, args.out, args.grid or 512)
    else:
        payload = {
            "stages": len(res.fs) + 2,
            "shifts": res.shifts,
            "bounds": res.bounds,
            "certified_stage": res.certified_stage.to_json(),
            "report": json.loads(report.to_json()) if report else None,
        }
        _emit(canonical_json(payload), args.out)
    if report is not None and not report.passed:
        return 1
    return 0


def _dump_stages_csv(res: gluing.GlueResult, path: str, grid: int):
    S = res.certified_stage
    if S.dim == 1:
        lo, hi = S.bounding_box()
        xs = np.linspace(float(lo[0]), float(hi[0]), grid).reshape(-1, 1)
    else:
        xs = S.sample(verify.derive_rng(0, 0), grid)
    cols = {}
    for i, phi in enumerate(res.phis, start=1):
        cols[f"phi_{i}"] = phi._value(xs)
    for i, h in enumerate(res.hs, start=1):
        cols[f"h_{i}"] = h._value(xs)
    for i, gfun in enumerate(res.gs, start=1):
        cols[f"g_{i}"] = gfun._value(xs)
    for i, f in enumerate(res.fs, start=1):
        cols[f"f_{i}"] = f._value(xs)
    header = ",".join([f"x{k+1}" for k in range(xs.shape[1])] + list(cols))
    lines = [header]
    for row in range(len(xs)):
        vals = [format_float(float(v)) for v in xs[row]]
        vals += [format_float(float(cols[c][row])) for c in cols]
        lines.append(",".join(vals))
    _emit("\n".join(lines) + "\n", path)


def cmd_verify(args) -> int:
    ws = load_workspace(args.fn)
    if args.seed is not None:
        ws.seed = args.seed
    if "expression" in ws.data:
        return cmd_decompose(
            argparse.Namespace(workspace=args.fn, seed=args.seed, out=args.out,
                               samples=args.samples, tol=args.tol)
        )
    if "glue" in ws.data:
        return cmd_glue(
            argparse.Namespace(workspace=args.fn, seed=args.seed, out=args.out,
                               samples=args.samples, tol=args.tol, grid=None)
        )
    raise InputError("nothing to verify: no 'expression' or 'glue' section")


def cmd_gallery(args) -> int:
    if args.what == "staircase":
        n = args.grid or 4096
        xs = -1.0 + np.arange(n) / n  # [-1, 0), avoiding the divergence at 0
        d = gallery.staircase_indicator(xs)
        gv = gallery.staircase_ramp(xs)
        v = gallery.staircase_jump_count(xs)
        c1, c2 = gallery.staircase_convex_parts(xs)
        lines = ["x,d,g,v,c1,c2,c1_minus_c2"]
        for i in range(n):
            lines.append(
                ",".join(
                    format_float(float(val))
                    for val in (xs[i], d[i], gv[i], v[i], c1[i], c2[i], c1[i] - c2[i])
                )
            )
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    if args.what == "bumps":
        if not args.spec:
            raise InputError("gallery bumps needs --spec FILE")
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
        sys_ = gallery.BumpSystem.standard(
            int(spec["dimension"]),
            spec["targets"],
            rho=spec.get("rho"),
            delta=spec.get("delta"),
            norm_kind=spec.get("norm", norms.LINF),
        )
        bm = gallery.build_bump_mapping(sys_, seed=args.seed or 0)
        rng = verify.derive_rng(args.seed or 0, 2)
        n = args.grid or 1024
        pts = rng.uniform(-1.5, 1.5, size=(n, sys_.dimension))
        H = np.atleast_2d(bm.value(pts))
        hvals = bm.control._value(pts)
        member = bm.region_membership(pts)
        region = np.where(member.any(axis=1), member.argmax(axis=1) + 1, 0)
        k = H.shape[1]
        header = (
            [f"x{j+1}" for j in range(sys_.dimension)]
            + [f"H{j+1}" for j in range(k)]
            + ["h", "region"]
        )
        lines = [",".join(header)]
        for i in range(n):
            row = [format_float(float(v)) for v in pts[i]]
            row += [format_float(float(v)) for v in H[i]]
            row += [format_float(float(hvals[i])), str(int(region[i]))]
            lines.append(",".join(row))
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    raise InputError(f"unknown gallery item {args.what!r}")


def cmd_gauge(args) -> int:
    with open(args.body, "r", encoding="utf-8") as fh:
        body = HullBody.from_json(json.load(fh))
    point = np.asarray([float(t) for t in args.point.split(",")], dtype=float)
    value = minkowski_gauge(point, body, tol=args.tol if args.tol is not None else 1e-10)
    _emit(format_float(value) + "\n", args.out)
    return 0


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dcx", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--norm", choices=list(norms.KINDS), default=None)

    d = sub.add_parser("decompose", help="build and check a workspace expression")
    d.add_argument("--workspace", required=True)
    common(d)
    d.set_defaults(handler=cmd_decompose)

    gl = sub.add_parser("glue", help="run the gluing recursion from a workspace")
    gl.add_argument("--workspace", required=True)
    gl.add_argument("--grid", type=int, default=None, help="rows for CSV stage dumps")
    common(gl)
    gl.set_defaults(handler=cmd_glue)

    v = sub.add_parser("verify", help="verify a workspace's expression or glue section")
    v.add_argument("--fn", required=True, help="workspace file")
    common(v)
    v.set_defaults(handler=cmd_verify)

    ga = sub.add_parser("gallery", help="emit gallery constructions as CSV")
    ga.add_argument("what", choices=["staircase", "bumps"])
    ga.add_argument("--grid", type=int, default=None)
    ga.add_argument("--spec", default=None, help="bump system JSON (for bumps)")
    common(ga)
    ga.set_defaults(handler=cmd_gallery)

    gg = sub.add_parser("gauge", help="Minkowski gauge of a hull body at a point")
    gg.add_argument("--body", required=True, help="hull body JSON file")
    gg.add_argument("--point", required=True, help="comma-separated coordinates")
    common(gg)
    gg.set_defaults(handler=cmd_gauge)
    return p


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except DcxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # anything unexpected is an internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
