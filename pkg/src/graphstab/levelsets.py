"""Level-set volume ``V(h) = |Sigma_h|``, its first variation, and the
differential inequalities satisfied by V for graphs of nonnegative scalar
curvature.

Three evaluation paths exist for a slice ``Sigma_h``:

* rotational graphs use closed forms in the radius ``r(h)``;
* ``"rays"`` integrates over a star-shaped level set with the product
  sphere rule (any n);
* ``"coarea"`` (n = 3 default for non-rotational graphs) integrates
  ``phi_eps(f - h) |Df|`` over a voxel grid and Richardson-extrapolates in
  the mollifier width.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import (DomainError, OutwardMinimizingUnverified, PreconditionError,
                     RegularValueError)
from .geometry import (REGULAR_GRADIENT_TOL, UPWARD, GraphFunction, _levelset_H,
                       classify_orientation, constants, quasi_random_points,
                       scalar_curvature_reilly)
from .quadrature import pairwise_sum
from .surfaces import level_surface, surface_integral

CONVEX = "convex"
STAR_SHAPED = "star-shaped"
UNKNOWN = "unknown"
STRICTNESS = 1e-8


@dataclass(frozen=True)
class LevelSetSlice:
    """Per-level data of ``Sigma_h``.

    ``vprime`` is the first-variation integral ``int H/|Df|``; ``regular``
    is false when ``min_abs_gradient`` falls below the regular-value floor.
    """

    h: float
    volume: float
    total_mean_curvature: float
    vprime: float
    min_abs_gradient: float
    min_mean_curvature: float
    convexity_flag: str
    strict_mean_convex: bool
    regular: bool
    method: str
    outer_radius: float = math.nan

    @property
    def outward_minimizing_verified(self) -> bool:
        return self.convexity_flag == CONVEX and self.strict_mean_convex


def _empty_slice(h, method):
    return LevelSetSlice(float(h), 0.0, 0.0, 0.0, math.inf, math.inf, UNKNOWN,
                         False, False, method)


def _tangent_curvatures(df, d2):
    """Principal curvatures of the level sets: eigenvalues of ``D^2 f / |Df|``
    restricted to ``Df^perp``."""
    g = np.linalg.norm(df, axis=1)
    nu = df / g[:, None]
    n = df.shape[1]
    s = np.where(nu[:, -1] >= 0, 1.0, -1.0)
    v = nu.copy()
    v[:, -1] += s
    Hh = np.eye(n) - 2.0 * np.einsum("ni,nj->nij", v, v) / np.einsum("ni,ni->n", v, v)[:, None, None]
    T = Hh[:, :, : n - 1]
    k = np.einsum("nia,nij,njb->nab", T, d2, T) / g[:, None, None]
    return np.linalg.eigvalsh(k)


def _flags(df, d2, r_out, n):
    kappa = _tangent_curvatures(df, d2)
    H = kappa.sum(axis=1)
    scale = (n - 1) / r_out
    convex = bool(np.min(kappa) >= -1e-10 * scale / (n - 1))
    strict = bool(np.min(H) >= STRICTNESS * scale)
    return (CONVEX if convex else STAR_SHAPED), strict, float(np.min(H))


def _rotational_slice(f, h, tol):
    prof = f.profile
    n = f.n
    om = constants(n).omega
    u0 = float(prof.u(prof.r_min))
    if h < u0 or (h == u0 and prof.r_min == 0):
        return _empty_slice(h, "rotational")
    r = prof.radius_at(h)
    u1 = float(prof.du(max(r, prof.r_min * (1 + 1e-15)), 1)) if r > prof.r_min else math.inf
    vol = om * r ** (n - 1)
    intH = (n - 1) * om * r ** (n - 2)
    vprime = intH / u1 if math.isfinite(u1) else 0.0
    Hs = (n - 1) / r
    return LevelSetSlice(float(h), vol, intH, vprime, u1, Hs, CONVEX,
                         Hs >= STRICTNESS * Hs, u1 >= tol, "rotational", r)


def _ray_slice(f, h, tol, rtol=1e-10):
    def dens(s):
        df, d2 = s.jet.df, s.jet.d2f
        H = _levelset_H(df, d2, tol=0.0)
        g = np.linalg.norm(df, axis=1)
        return np.ones(len(g)), H, H / g

    vals, surf = surface_integral(f, h, dens, rtol=rtol, k0=4)
    if vals is None:
        return _empty_slice(h, "rays")
    g = surf.grad_norm
    r_out = float(np.max(np.linalg.norm(surf.points, axis=1)))
    flag, strict, minH = _flags(surf.jet.df, surf.jet.d2f, r_out, f.n)
    gmin = float(np.min(g))
    return LevelSetSlice(float(h), float(vals[0]), float(vals[1]), float(vals[2]),
                         gmin, minH, flag, strict, gmin >= tol, "rays", r_out)


@lru_cache(maxsize=1)
def _bump_norm() -> float:
    return 2.0 * integrate.quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), 0, 1,
                                epsabs=0.0, epsrel=1e-12)[0]


def _bump(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out / _bump_norm()


def _coarea_slice(f, h, tol, cells: int = 128, width: float = 2.0):
    """Coarea evaluation on a voxel grid (n = 3).

    Level-set flags and the grid extent come from a coarse ray scan; the
    three integrals use midpoint quadrature of ``phi_eps(f - h) g |Df|`` with
    ``eps = width * spacing * median|Df|`` and ``2 eps``, combined as
    ``(4 I(eps) - I(2 eps)) / 3``.
    """
    if f.n != 3:
        raise DomainError("coarea evaluation is implemented for n = 3")
    surf = level_surface(f, h, 16)
    if surf.empty:
        return _empty_slice(h, "coarea")
    g_s = surf.grad_norm
    r_out = float(np.max(np.linalg.norm(surf.points, axis=1)))
    flag, strict, minH = _flags(surf.jet.df, surf.jet.d2f, r_out, 3)
    G = float(np.median(g_s))
    # half-width L must hold the 2 eps band: L = 1.1 r_out + 8 width L G / (g_min cells)
    frac = 8.0 * width * G / (float(np.min(g_s)) * cells)
    if frac > 0.7:
        raise PreconditionError("gradient varies too much on Sigma_h for the coarea grid")
    L = 1.1 * r_out / (1.0 - frac)
    dx = 2.0 * L / cells
    eps = width * dx * G
    ax = -L + (np.arange(cells) + 0.5) * dx
    sums = np.zeros((2, 3))
    gmin = math.inf
    for i in range(cells):
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        pts = np.stack([np.full(X.size, ax[i]), X.ravel(), Y.ravel()], axis=1)
        vals = f.extended(pts)
        band = np.abs(vals - h) < 2.0 * eps
        if not np.any(band):
            continue
        if i in (0, cells - 1):
            raise PreconditionError("coarea band touches the grid boundary")
        p = pts[band]
        ok = f.in_domain(p)
        p = p[ok]
        j = f.jet(p, order=2)
        g = np.linalg.norm(j.df, axis=1)
        gmin = min(gmin, float(g.min()))
        if g.min() < tol:
            raise RegularValueError(f"|Df| below {tol:g} near the level set")
        H = _levelset_H(j.df, j.d2f, tol=0.0)
        t = j.f - h
        for a, e in enumerate((eps, 2.0 * eps)):
            w = _bump(t / e) / e
            sums[a] += [pairwise_sum(w * g), pairwise_sum(w * H * g), pairwise_sum(w * H)]
    sums *= dx ** 3
    vol, intH, vprime = (4.0 * sums[0] - sums[1]) / 3.0
    gmin = min(gmin, float(np.min(g_s)))
    return LevelSetSlice(float(h), float(vol), float(intH), float(vprime), gmin, minH,
                         flag, strict, gmin >= tol, "coarea", r_out)


def level_volume(f: GraphFunction, h: float, method: str = "auto",
                 tol: float = REGULAR_GRADIENT_TOL, **kw) -> LevelSetSlice:
    """Volume and first-variation data of the level set ``Sigma_h``.

    ``method`` is ``"auto"``, ``"rotational"``, ``"rays"`` or ``"coarea"``.
    ``auto`` picks the closed form for rotational graphs, coarea for other
    n = 3 graphs and rays otherwise.  Rays are faster but only valid when
    every ray from the origin crosses the level set once, which is not
    checked beyond the crossing itself.

    Raises
    ------
    DomainError
        If ``h >= h_max``.
    """
    h = float(h)
    if not h < f.h_max:
        raise DomainError(f"level {h} is not below h_max = {f.h_max}")
    rot = getattr(f, "profile", None) is not None
    if method == "auto":
        method = "rotational" if rot else ("coarea" if f.n == 3 else "rays")
    if method == "rotational":
        if not rot:
            raise DomainError("graph is not rotationally symmetric")
        return _rotational_slice(f, h, tol)
    if method == "rays":
        return _ray_slice(f, h, tol)
    if method == "coarea":
        return _coarea_slice(f, h, tol, **kw)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class VolumeFunction:
    """Samples of ``V(h)`` ordered by h."""

    samples: tuple
    h_max: float
    monotone_verdict: bool

    @property
    def h(self):
        return np.array([s.h for s in self.samples])

    @property
    def V(self):
        return np.array([s.volume for s in self.samples])

    @property
    def Vprime(self):
        return np.array([s.vprime for s in self.samples])

    @property
    def regular(self):
        return np.array([s.regular for s in self.samples])

    def __call__(self, h):
        """Piecewise-linear interpolation of the samples."""
        return np.interp(h, self.h, self.V)

    def slope_discrepancy(self) -> np.ndarray:
        """``|V' - centred difference slope| / (1 + V')`` at interior regular samples."""
        h, V, Vp = self.h, self.V, self.Vprime
        reg = self.regular
        out = []
        for i in range(1, len(h) - 1):
            if reg[i - 1] and reg[i] and reg[i + 1]:
                a, b = h[i] - h[i - 1], h[i + 1] - h[i]
                # second-order slope on a nonuniform grid
                s = (a * a * V[i + 1] - b * b * V[i - 1] - (a * a - b * b) * V[i]) / (a * b * (a + b))
                out.append(abs(Vp[i] - s) / (1.0 + abs(Vp[i])))
        return np.array(out)

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "V", "Vprime", "regular", "convex_verified"])
        for s in self.samples:
            w.writerow([format(s.h, ".17g"), format(s.volume, ".17g"),
                        format(s.vprime, ".17g"), int(s.regular),
                        int(s.outward_minimizing_verified)])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def volume_function(f: GraphFunction, levels, method: str = "auto",
                    threads: int = 1) -> VolumeFunction:
    """Evaluate slices at the given levels (in parallel) and merge by h."""
    levels = sorted(float(h) for h in levels)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            slices = list(ex.map(lambda h: level_volume(f, h, method), levels))
    else:
        slices = [level_volume(f, h, method) for h in levels]
    V = np.array([s.volume for s in slices if s.regular])
    mono = bool(np.all(np.diff(V) >= -1e-12 * np.maximum(1.0, np.abs(V[1:])))) if len(V) > 1 else True
    return VolumeFunction(tuple(slices), float(f.h_max), mono)


# ---------------------------------------------------------------------------
# h_0


def volume_threshold(n: int, m: float) -> float:
    """``2 omega (2m)^{(n-1)/(n-2)}``: twice the horizon area of mass m."""
    return 2.0 * constants(n).omega * (2.0 * m) ** ((n - 1) / (n - 2))


def _lowest_level(f: GraphFunction) -> float:
    prof = getattr(f, "profile", None)
    if prof is not None:
        return float(prof.u(prof.r_min))
    if f.boundary:
        return min(b.value for b in f.boundary)
    pts = quasi_random_points(f.n, 4096, 0.0, 10.0)
    return float(np.min(f.extended(pts)))


def h_zero(f: GraphFunction, m: float, h_lo: float | None = None,
           h_hi: float | None = None, method: str = "auto") -> float:
    """``sup{h : V(h) <= 2 omega (2m)^{(n-1)/(n-2)}}`` by bisection on V.

    Returns ``-inf`` when V already exceeds the threshold at the lowest level.

    Raises
    ------
    DomainError
        If V never exceeds the threshold below ``h_max``.
    """
    if not m > 0:
        raise DomainError("mass must be positive")
    T = volume_threshold(f.n, m)
    V = lambda h: level_volume(f, h, method).volume
    lo = _lowest_level(f) if h_lo is None else float(h_lo)
    if V(lo) > T:
        return -math.inf
    if h_hi is None:
        if math.isfinite(f.h_max):
            gap = f.h_max - lo
            if gap <= 0:
                raise DomainError("V never exceeds the threshold: empty range")
            hi = None
            for k in range(1, 80):
                cand = f.h_max - gap * 2.0 ** -k
                if cand <= lo:
                    continue
                if V(cand) > T:
                    hi = cand
                    break
                lo = cand
            if hi is None:
                raise DomainError("V never exceeds the threshold below h_max")
        else:
            step = 1.0
            hi = lo + step
            while V(hi) <= T:
                lo = hi
                step *= 2.0
                hi = lo + step
                if step > 1e300:
                    raise DomainError("V never exceeds the threshold")
    else:
        hi = float(h_hi)
        if V(hi) <= T:
            raise DomainError("V does not exceed the threshold at h_hi")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if V(mid) <= T:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# inequalities


def minkowski_gap(slc: LevelSetSlice, n: int) -> float:
    """``int H - (C_n/2) (V/omega)^{(n-2)/(n-1)}``; nonnegative for
    outward-minimizing mean-convex level sets.

    Raises
    ------
    OutwardMinimizingUnverified
        Unless the slice is verified convex and strictly mean-convex.
    """
    if not slc.outward_minimizing_verified:
        raise OutwardMinimizingUnverified(
            f"slice at h={slc.h}: convexity={slc.convexity_flag}, strict={slc.strict_mean_convex}")
    c = constants(n)
    return slc.total_mean_curvature - 0.5 * c.c_n * (slc.volume / c.omega) ** ((n - 2) / (n - 1))


def _bracket(V, m, n):
    c = constants(n)
    return (V / c.omega) ** ((n - 2) / (n - 1)) / (2.0 * m) - 1.0


def hypotheses_hold(f: GraphFunction, count: int = 512, tol: float = 1e-8,
                    shell: tuple | None = None) -> bool:
    """Sampled ``R >= -tol`` and upward mean curvature."""
    o = classify_orientation(f, count, tol, shell)
    if o.direction != UPWARD:
        return False
    from .geometry import default_sample_shell
    lo, hi = shell if shell is not None else default_sample_shell(f)
    pts = quasi_random_points(f.n, count, lo, hi)
    pts = pts[f.in_domain(pts)]
    R = scalar_curvature_reilly(f, pts)
    return bool(np.min(R) >= -tol * (1.0 + np.max(np.abs(R))))


def split_rhs(total_H, alpha, m, n):
    """``alpha^{-1} [int H - (1 + alpha^{-2}) C_n m]``."""
    alpha = np.asarray(alpha, dtype=float)
    return (total_H - (1.0 + alpha ** -2) * constants(n).c_n * m) / alpha


def volume_inequality_residual(f: GraphFunction, h: float, alpha, m: float,
                               slc: LevelSetSlice | None = None, check: bool = True):
    """``V'(h) - alpha^{-1}[int H - (1 + alpha^{-2}) C_n m]`` (positive when the
    inequality holds); ``alpha`` may be an array.

    Raises
    ------
    PreconditionError
        If ``check`` and sampled ``R >= 0`` or upward orientation fails.
    RegularValueError
        If h is not a regular level.
    """
    if np.any(np.asarray(alpha) <= 0):
        raise DomainError("gradient threshold must be positive")
    if check and not hypotheses_hold(f):
        raise PreconditionError("sampled R >= 0 / upward orientation failed")
    slc = slc or level_volume(f, h)
    if not slc.regular:
        raise RegularValueError(f"h = {h} is not a regular level")
    return slc.vprime - split_rhs(slc.total_mean_curvature, alpha, m, f.n)


def optimal_alpha(V: float, m: float, n: int) -> float:
    """Maximiser in alpha of the split right side after Minkowski:
    ``sqrt(3) [(1/2m)(V/omega)^{(n-2)/(n-1)} - 1]^{-1/2}``."""
    if not m > 0:
        raise DomainError("mass must be positive")
    b = _bracket(V, m, n)
    if not b > 0:
        raise DomainError("volume at or below omega (2m)^{(n-1)/(n-2)}: alpha undefined")
    return math.sqrt(3.0) / math.sqrt(b)


def volume_growth_rhs(V, m: float, n: int):
    """``C_n (2m/(3 sqrt 3)) [(1/2m)(V/omega)^{(n-2)/(n-1)} - 1]^{3/2}``."""
    b = _bracket(np.asarray(V, dtype=float), m, n)
    if np.any(b < 0):
        raise DomainError("volume below omega (2m)^{(n-1)/(n-2)}")
    return constants(n).c_n * (2.0 * m / (3.0 * math.sqrt(3.0))) * b ** 1.5


def volume2_residual(f: GraphFunction, h: float, m: float,
                     slc: LevelSetSlice | None = None) -> float:
    """``V'(h)`` minus the volume-growth lower bound.

    Unverified slices (not convex or not strictly mean-convex) still return
    the residual but emit a warning: the verdict is advisory there.
    """
    if not m > 0:
        raise DomainError("mass must be positive")
    slc = slc or level_volume(f, h)
    if not slc.regular:
        raise RegularValueError(f"h = {h} is not a regular level")
    if not slc.outward_minimizing_verified:
        warnings.warn("outward-minimizing sufficient condition unverified; verdict advisory",
                      stacklevel=2)
    return slc.vprime - float(volume_growth_rhs(slc.volume, m, f.n))


def schwarzschild_vprime_ratio(n: int, m: float, r) -> np.ndarray:
    """Closed-form ``V' / volume_growth_rhs`` for Schwarzschild: ``(3 sqrt3/2) r^{n-2}/(r^{n-2} - 2m)``."""
    r = np.asarray(r, dtype=float)
    return 1.5 * math.sqrt(3.0) * r ** (n - 2) / (r ** (n - 2) - 2.0 * m)
