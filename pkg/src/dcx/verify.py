"""Randomized numerical verification primitives: midpoint/segment
convexity samplers, exact-on-steps total variation, and the report type
every checker in the package returns.

Runs are deterministic: a master seed is split into per-batch seeds by
counter, and reductions are order-independent maxima, so reports are
byte-identical across reruns and across worker counts (the DCX_THREADS
environment variable caps the thread pool; 1 disables it).
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import norms
from .errors import InputError
from .geometry import ConvexSet

DEFAULT_TOL = 1e-8


def derive_rng(seed: int, counter: int = 0) -> np.random.Generator:
    """Deterministic per-purpose generator from a master seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(counter,))))


def worker_count() -> int:
    raw = os.environ.get("DCX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class VerificationReport:
    """Outcome of a sampled check.  ``passed`` holds exactly when
    ``worst_violation <= tolerance``; the witness location re-evaluates to
    the reported violation."""

    passed: bool
    worst_violation: float
    witness_location: Optional[list]
    sample_counts: dict
    seed: int
    tolerance: float
    notes: list = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "pass": bool(self.passed),
            "worst_violation": float(self.worst_violation),
            "location": self.witness_location,
            "counts": {k: int(v) for k, v in sorted(self.sample_counts.items())},
            "seed": int(self.seed),
            "tolerance": float(self.tolerance),
            "notes": list(self.notes),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def __bool__(self):
        return self.passed


def _finalize(violations, locations, counts, seed, tol, notes=None) -> VerificationReport:
    """Order-independent max reduction over per-batch results."""
    worst = -np.inf
    where = None
    for v, loc in zip(violations, locations):
        if v > worst:
            worst = v
            where = loc
    if where is not None:
        where = [list(map(float, np.atleast_1d(p))) for p in where]
    return VerificationReport(
        passed=bool(worst <= tol),
        worst_violation=float(worst),
        witness_location=where,
        sample_counts=counts,
        seed=seed,
        tolerance=tol,
        notes=notes or [],
    )


def _run_batches(batch_fn, n_batches: int):
    threads = worker_count()
    if threads <= 1 or n_batches <= 1:
        return [batch_fn(i) for i in range(n_batches)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(batch_fn, range(n_batches)))


def _as_batch_fn(f) -> Callable[[np.ndarray], np.ndarray]:
    value = getattr(f, "value", None)
    if callable(value):
        return value
    return lambda pts: np.asarray(f(pts), dtype=float)


def check_midpoint_convex(
    f,
    C: ConvexSet,
    n_triples: int = 4096,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    norm_kind: str = norms.L2,
    batch: int = 65536,
) -> VerificationReport:
    """Sample pairs (x, y) in C and test
    f((x+y)/2) <= (f(x)+f(y))/2 + tol * scale with the relative scale
    1 + |f(x)| + |f(y)| (second differences of large controls drown in
    rounding otherwise)."""
    if n_triples <= 0:
        raise InputError("need a positive triple count")
    fn = _as_batch_fn(f)
    n_batches = (n_triples + batch - 1) // batch
    sizes = [min(batch, n_triples - i * batch) for i in range(n_batches)]

    def one(i: int):
        rng = derive_rng(seed, i)
        n = sizes[i]
        x = C.sample(rng, n, norm_kind)
        y = C.sample(rng, n, norm_kind)
        mid = 0.5 * (x + y)
        fx, fy, fm = fn(x), fn(y), fn(mid)
        scale = 1.0 + np.abs(fx) + np.abs(fy)
        viol = (fm - 0.5 * (fx + fy)) / scale
        k = int(np.argmax(viol))
        return float(viol[k]), (x[k], y[k])

    results = _run_batches(one, n_batches)
    return _finalize(
        [r[0] for r in results],
        [r[1] for r in results],
        {"triples": n_triples},
        seed,
        tol,
    )


def check_segment_convex(
    f,
    C: ConvexSet,
    n_segments: int = 2048,
    points_per_segment: int = 5,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    norm_kind: str = norms.L2,
    batch: int = 16384,
) -> VerificationReport:
    """Second differences along random segments in C must be
    >= -tol * scale at every interior grid point."""
    if n_segments <= 0 or points_per_segment < 3:
        raise InputError("need positive counts and at least 3 points per segment")
    fn = _as_batch_fn(f)
    P = points_per_segment
    ts = np.linspace(0.0, 1.0, P)
    n_batches = (n_segments + batch - 1) // batch
    sizes = [min(batch, n_segments - i * batch) for i in range(n_batches)]

    def one(i: int):
        rng = derive_rng(seed, i)
        n = sizes[i]
        a = C.sample(rng, n, norm_kind)
        b = C.sample(rng, n, norm_kind)
        pts = a[:, None, :] + ts[None, :, None] * (b - a)[:, None, :]
        vals = fn(pts.reshape(n * P, -1)).reshape(n, P)
        d2 = vals[:, :-2] - 2.0 * vals[:, 1:-1] + vals[:, 2:]
        scale = 1.0 + np.abs(vals[:, :-2]) + np.abs(vals[:, 1:-1]) + np.abs(vals[:, 2:])
        viol = -d2 / scale
        flat = int(np.argmax(viol))
        r, c = divmod(flat, P - 2)
        loc = pts[r, c : c + 3]
        return float(viol[r, c]), tuple(loc)

    results = _run_batches(one, n_batches)
    return _finalize(
        [r[0] for r in results],
        [r[1] for r in results],
        {"segments": n_segments, "points_per_segment": P},
        seed,
        tol,
    )


def total_variation(step_fn, a: float, b: float, refinement: int) -> float:
    """Total variation of ``step_fn`` over [a, b] on the dyadic partition
    of depth ``refinement`` (2^refinement subintervals).

    A partition sum never exceeds the true variation, and refining a
    dyadic partition can only increase it; for a step function the value
    is exact as soon as every constant piece contains a grid point.
    Evaluation is chunked so deep refinements stay in memory bounds.
    """
    if not a < b:
        raise InputError("need a < b")
    if refinement < 0 or refinement > 40:
        raise InputError("refinement depth out of range [0, 40]")
    n = 1 << refinement
    h = (b - a) / n
    total = 0.0
    chunk = 1 << 22
    prev_val = None
    fn = _as_batch_fn_scalar(step_fn)
    for start in range(0, n + 1, chunk):
        stop = min(n + 1, start + chunk)
        idx = np.arange(start, stop, dtype=float)
        ts = a + idx * h
        ts[-1] = b if stop == n + 1 else ts[-1]
        vals = fn(ts)
        if prev_val is not None:
            total += abs(vals[0] - prev_val)
        total += float(np.abs(np.diff(vals)).sum())
        prev_val = float(vals[-1])
    return total


def _as_batch_fn_scalar(f) -> Callable[[np.ndarray], np.ndarray]:
    """Adapt a scalar->scalar function of one real variable to 1-d batches."""
    value = getattr(f, "value", None)
    if callable(value):
        return lambda ts: np.asarray(value(ts.reshape(-1, 1)), dtype=float)

    def wrapped(ts):
        try:
            out = f(ts)
            out = np.asarray(out, dtype=float)
            if out.shape == ts.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(f(t)) for t in ts])

    return wrapped
