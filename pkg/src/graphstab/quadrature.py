"""Quadrature building blocks: Gauss-Legendre panels, product rules on
spheres, and volumes of ball intersections."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special

from .geometry import ball_volume


@lru_cache(maxsize=64)
def gauss_legendre(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(k)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def pairwise_sum(values: np.ndarray) -> float:
    """Sum with a fixed pairwise reduction order, independent of chunking."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    while v.size > 1:
        if v.size % 2:
            v = np.append(v, 0.0)
        v = v[0::2] + v[1::2]
    return float(v[0])


def panel_nodes(a, b, k: int = 20):
    """Gauss-Legendre nodes/weights mapped to ``[a, b]``, broadcasting over a, b.

    Returns arrays of shape ``broadcast(a, b).shape + (k,)``.
    """
    x, w = gauss_legendre(k)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def integrate_panels(func, breaks, k: int = 20) -> float:
    """Composite Gauss-Legendre over consecutive ``breaks``; ``func`` vectorised."""
    breaks = np.asarray(breaks, dtype=float)
    nodes, weights = panel_nodes(breaks[:-1], breaks[1:], k)
    vals = func(nodes.ravel()).reshape(nodes.shape)
    return pairwise_sum(vals * weights)


# ---------------------------------------------------------------------------
# spheres


@lru_cache(maxsize=32)
def sphere_rule(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on the unit sphere S^{n-1} in R^n.

    Each polar angle is integrated in ``t = cos(phi)`` with the k-point
    Gauss-Jacobi rule for the weight ``(1 - t^2)^((d-3)/2)`` (plain
    Gauss-Legendre on S^2); the azimuth uses the 2k-point trapezoid rule,
    exact for trigonometric polynomials of degree < 2k.
    """
    if n < 2:
        raise ValueError("sphere rule needs n >= 2")
    m = 2 * k
    az = 2.0 * math.pi * np.arange(m) / m
    pts = np.stack([np.cos(az), np.sin(az)], axis=1)
    wts = np.full(m, 2.0 * math.pi / m)
    for dim in range(3, n + 1):
        # embed S^{dim-2} into S^{dim-1}: (t, sqrt(1-t^2) y), t = cos(phi)
        alpha = 0.5 * (dim - 3)
        t, wt = special.roots_jacobi(k, alpha, alpha)
        s = np.sqrt(1.0 - t * t)
        new_pts = np.concatenate(
            [np.repeat(t, len(pts))[:, None],
             (s[:, None, None] * pts[None, :, :]).reshape(-1, dim - 1)], axis=1)
        wts = (wt[:, None] * wts[None, :]).ravel()
        pts = new_pts
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def integrate_sphere(func, n: int, radius: float = 1.0, k: int = 8,
                     center=None) -> float:
    """Integrate ``func(points)`` over the sphere of given radius (fixed rule)."""
    pts, wts = sphere_rule(n, k)
    x = pts * radius
    if center is not None:
        x = x + np.asarray(center, dtype=float)
    vals = np.asarray(func(x), dtype=float)
    return pairwise_sum(vals * wts) * radius ** (n - 1)


def integrate_sphere_adaptive(func, n: int, radius: float = 1.0, k0: int = 4,
                              rtol: float = 1e-10, atol: float = 1e-14,
                              k_max: int = 64, center=None) -> tuple[float, int]:
    """Double the per-angle node count until two successive values agree.

    Returns ``(value, k)`` of the last rule used.
    """
    k = k0
    prev = integrate_sphere(func, n, radius, k, center)
    while True:
        nxt = 2 * k
        if nxt > k_max or len(sphere_rule(n, nxt)[1]) > 4_000_000:
            return prev, k
        val = integrate_sphere(func, n, radius, nxt, center)
        if abs(val - prev) <= max(atol, rtol * abs(val)):
            return val, nxt
        prev, k = val, nxt


# ---------------------------------------------------------------------------
# balls


def cap_volume(n: int, r, height):
    """Volume of the cap of height ``height`` (0..2r) cut from an n-ball of radius r."""
    r = np.asarray(r, dtype=float)
    h = np.clip(np.asarray(height, dtype=float), 0.0, 2.0 * r)
    small = h <= r
    hh = np.where(small, h, 2.0 * r - h)
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(r > 0, (2.0 * r * hh - hh * hh) / np.where(r > 0, r * r, 1.0), 0.0)
    part = 0.5 * ball_volume(n, r) * special.betainc((n + 1) / 2.0, 0.5, np.clip(z, 0, 1))
    return np.where(small, part, ball_volume(n, r) - part)


def ball_intersection_volume(n: int, r1, r2, d):
    """Volume of ``B_{r1}(0) cap B_{r2}(p)`` in R^n with ``|p| = d``."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    d = np.abs(np.asarray(d, dtype=float))
    r1, r2, d = np.broadcast_arrays(r1, r2, d)
    out = np.zeros(r1.shape)
    lo = np.minimum(r1, r2)
    contained = d + lo <= np.maximum(r1, r2)
    out[contained] = ball_volume(n, lo[contained])
    lens = (~contained) & (d < r1 + r2) & (r1 > 0) & (r2 > 0)
    if np.any(lens):
        a, b, dd = r1[lens], r2[lens], d[lens]
        # signed distance from centre 1 to the radical hyperplane
        x = (dd * dd + a * a - b * b) / (2.0 * dd)
        out[lens] = cap_volume(n, a, a - x) + cap_volume(n, b, b - (dd - x))
    return out if out.shape else float(out)
