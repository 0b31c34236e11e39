"""Ambient norms on R^d (d small) and samplers for their spheres and balls.

Everything here is vectorized: points are arrays of shape ``(d,)`` or
``(n, d)``; norms reduce over the last axis.  The three supported ambient
norms are ``'l1'``, ``'l2'`` and ``'linf'``.  Norm choice matters for all
quantitative constants (Lipschitz bounds, gap certificates), which is why
it is threaded explicitly through the geometric code instead of being a
global setting.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError

L1 = "l1"
L2 = "l2"
LINF = "linf"

KINDS = (L1, L2, LINF)

_DUAL = {L1: LINF, L2: L2, LINF: L1}


def check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise InputError(f"unknown norm kind {kind!r}; expected one of {KINDS}")
    return kind


def dual_kind(kind: str) -> str:
    """The dual norm's kind (l1 <-> linf, l2 self-dual)."""
    return _DUAL[check_kind(kind)]


def norm(x, kind: str = L2):
    """Norm of a point or a batch of points, reducing the last axis."""
    x = np.asarray(x, dtype=float)
    if kind == L2:
        return np.linalg.norm(x, axis=-1)
    if kind == L1:
        return np.abs(x).sum(axis=-1)
    if kind == LINF:
        return np.abs(x).max(axis=-1)
    raise InputError(f"unknown norm kind {kind!r}")


def ball_volume_box_ratio(dim: int, kind: str) -> float:
    """vol(unit ball) / vol([-1,1]^d); used to size rejection samplers."""
    if kind == LINF:
        return 1.0
    if kind == L1:
        # 2^d/d! over 2^d
        f = 1.0
        for k in range(2, dim + 1):
            f *= k
        return 1.0 / f
    # l2
    from math import gamma, pi

    return (pi ** (dim / 2) / gamma(dim / 2 + 1)) / 2.0**dim


def sample_sphere(rng: np.random.Generator, n: int, dim: int, kind: str = L2) -> np.ndarray:
    """n points distributed over the unit sphere of the given norm.

    l2 uses normalized Gaussians (uniform).  l1 uses exponential magnitudes
    with random signs (uniform on the simplex faces).  linf picks a face
    uniformly and fills the remaining coordinates uniformly.
    """
    check_kind(kind)
    if dim == 1:
        signs = rng.integers(0, 2, size=n) * 2 - 1
        return signs.reshape(n, 1).astype(float)
    if kind == L2:
        g = rng.standard_normal((n, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return g
    if kind == L1:
        mags = rng.exponential(size=(n, dim))
        mags /= mags.sum(axis=1, keepdims=True)
        signs = rng.integers(0, 2, size=(n, dim)) * 2 - 1
        return mags * signs
    # linf: one coordinate pinned to +-1, the rest uniform in [-1, 1]
    out = rng.uniform(-1.0, 1.0, size=(n, dim))
    face = rng.integers(0, dim, size=n)
    sign = rng.integers(0, 2, size=n) * 2 - 1
    out[np.arange(n), face] = sign.astype(float)
    return out


def sample_ball(rng: np.random.Generator, n: int, dim: int, kind: str = L2) -> np.ndarray:
    """n points uniform in the closed unit ball of the given norm."""
    check_kind(kind)
    if kind == LINF:
        return rng.uniform(-1.0, 1.0, size=(n, dim))
    sphere = sample_sphere(rng, n, dim, kind)
    radii = rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / dim)
    return sphere * radii


def dual_probe_directions(dim: int, kind: str) -> np.ndarray:
    """Deterministic unit vectors of the *dual* norm used as fixed probes.

    Always includes +-e_i (dual-norm 1 for all three kinds); for a dual
    linf ball the corners are extreme points and are added as well.
    """
    eye = np.eye(dim)
    probes = [eye, -eye]
    if dual_kind(kind) == LINF and dim > 1:
        corners = np.array(
            [[float(b) for b in np.binary_repr(i, width=dim)] for i in range(2**dim)]
        )
        corners = corners * 2 - 1
        probes.append(corners)
    return np.vstack(probes)


def sample_dual_vectors(
    rng: np.random.Generator, count: int, dim: int, kind: str
) -> np.ndarray:
    """`count` unit vectors of the dual norm: fixed probes first, then
    uniform sphere samples to fill up."""
    probes = dual_probe_directions(dim, kind)
    if count <= len(probes):
        return probes[:count]
    extra = sample_sphere(rng, count - len(probes), dim, dual_kind(kind))
    return np.vstack([probes, extra])
