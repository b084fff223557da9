"""Integration over star-shaped level sets by shooting rays from the origin.

A level set ``Sigma_h = {f = h}`` that meets every ray from 0 exactly once
is parametrised by the unit sphere, ``x(theta) = r(theta) theta``, with area
element ``r^{n-1} |Df| / (Df . theta) dtheta``.  Rotational graphs skip the
root finding since ``r(theta)`` is constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, PreconditionError
from .geometry import GraphFunction, Jet
from .quadrature import pairwise_sum, sphere_rule

MAX_SURFACE_POINTS = 600_000


@dataclass(frozen=True)
class LevelSurface:
    """Quadrature nodes on ``Sigma_h``.

    ``weights`` already include the area element, so
    ``sum(weights * phi(points))`` approximates the surface integral of phi.
    ``empty`` marks a level below the range of ``f`` (no level set).
    """

    h: float
    k: int
    points: np.ndarray
    weights: np.ndarray
    jet: Jet | None
    radial_speed: np.ndarray      # Df . theta
    empty: bool = False

    @property
    def grad_norm(self) -> np.ndarray:
        return np.linalg.norm(self.jet.df, axis=-1)


def _is_rotational(f: GraphFunction) -> bool:
    return getattr(f, "profile", None) is not None


def _check_centered(f: GraphFunction):
    for ball in f.boundary:
        if np.any(np.asarray(ball.center, dtype=float) != 0.0):
            raise PreconditionError("ray parametrisation needs excised balls centred at 0")


def level_radii(f: GraphFunction, h: float, dirs: np.ndarray,
                max_doublings: int = 200) -> np.ndarray | None:
    """Radii ``r(theta)`` with ``f(r theta) = h``; ``None`` when the level is empty."""
    _check_centered(f)
    if not h < f.h_max:
        raise DomainError(f"level {h} is not below h_max = {f.h_max}")
    n = f.n
    r_in = f.inner_radius()
    if r_in > 0:
        lo = np.full(len(dirs), r_in * (1 + 1e-12))
    else:
        lo = np.full(len(dirs), 1e-9)
    f_lo = f(lo[:, None] * dirs)
    below = f_lo < h
    if not np.any(below):
        return None
    if not np.all(below):
        raise PreconditionError("level set is not star-shaped about the origin")
    hi = np.maximum(2.0 * lo, 1.0)
    for _ in range(max_doublings):
        f_hi = f(hi[:, None] * dirs)
        todo = f_hi <= h
        if not np.any(todo):
            break
        lo = np.where(todo, hi, lo)
        hi = np.where(todo, 2.0 * hi, hi)
    else:
        raise ConvergenceError("could not bracket the level set along rays")
    for _ in range(200):
        mid = np.where(lo > 0, np.sqrt(lo * hi), 0.5 * (lo + hi))
        mid = np.where((mid <= lo) | (mid >= hi), 0.5 * (lo + hi), mid)
        fm = f(mid[:, None] * dirs)
        up = fm < h
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * hi):
            break
    r = 0.5 * (lo + hi)
    # Newton polish within the bracket
    for _ in range(2):
        j = f.jet(r[:, None] * dirs, order=1)
        speed = np.einsum("ij,ij->i", j.df, dirs)
        step = np.where(speed > 0, (j.f - h) / np.where(speed > 0, speed, 1.0), 0.0)
        r = np.clip(r - step, lo, hi)
    return r


def level_surface(f: GraphFunction, h: float, k: int, order: int = 2) -> LevelSurface:
    """Quadrature nodes on ``Sigma_h`` from the k-point product sphere rule."""
    n = f.n
    theta, w = sphere_rule(n, k)
    if _is_rotational(f):
        prof = f.profile
        u0 = float(prof.u(prof.r_min))
        if h < u0 or (h == u0 and prof.r_min == 0):
            return LevelSurface(h, k, theta[:0], w[:0], None, w[:0], True)
        if not h < f.h_max:
            raise DomainError(f"level {h} is not below h_max = {f.h_max}")
        r = np.full(len(theta), prof.radius_at(h))
        if prof.r_min > 0:
            r = np.maximum(r, prof.r_min * (1 + 1e-12))
    else:
        r = level_radii(f, h, theta)
        if r is None:
            return LevelSurface(h, k, theta[:0], w[:0], None, w[:0], True)
    pts = r[:, None] * theta
    j = f.jet(pts, order=order)
    speed = np.einsum("ij,ij->i", j.df, theta)
    if np.any(speed <= 0):
        raise PreconditionError("f is not increasing along every ray through Sigma_h")
    g = np.linalg.norm(j.df, axis=1)
    weights = w * r ** (n - 1) * g / speed
    return LevelSurface(float(h), k, pts, weights, j, speed)


def surface_integral(f: GraphFunction, h: float, integrand, rtol: float = 1e-10,
                     atol: float = 1e-14, k0: int = 2, k_max: int = 64,
                     order: int = 2):
    """Integrate ``integrand(surface) -> values`` over ``Sigma_h``.

    The per-angle node count doubles until two successive values agree.
    ``integrand`` may return a tuple of arrays to integrate several
    quantities at once; convergence is then judged on all of them.
    Returns ``(values, surface)`` where ``surface`` is the finest rule used.
    """
    def evaluate(k):
        s = level_surface(f, h, k, order)
        if s.empty:
            return None, s
        vals = integrand(s)
        if not isinstance(vals, tuple):
            vals = (vals,)
        return np.array([pairwise_sum(np.asarray(v) * s.weights) for v in vals]), s

    k = k0
    prev, surf = evaluate(k)
    if prev is None:
        return None, surf
    while True:
        nxt = 2 * k
        if nxt > k_max or len(sphere_rule(f.n, nxt)[1]) > MAX_SURFACE_POINTS:
            return prev, surf
        val, s2 = evaluate(nxt)
        if np.all(np.abs(val - prev) <= np.maximum(atol, rtol * np.abs(val))):
            return val, s2
        prev, surf, k = val, s2, nxt
