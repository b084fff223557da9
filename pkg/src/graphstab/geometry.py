"""Graph functions over R^n and their pointwise differential geometry.

A graph function is anything that can hand back its jet ``(f, Df, D^2 f,
D^3 f)`` at a batch of points.  On top of the jet this module computes

* the scalar curvature of the graph in two independent ways: the
  divergence identity (a vector field built from first and second
  derivatives, differentiated analytically with the third derivatives)
  and the Gauss equation ``R = H^2 - |A|^2`` from the shape operator;
* the mean curvature of the graph with the upward convention;
* the mean curvature of a regular level set inside its horizontal
  hyperplane, with respect to the inward normal ``-Df/|Df|``.

Points are arrays of shape ``(..., n)``; every operation is vectorised
over the leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import special
from scipy.stats import qmc

from .errors import DomainError, InternalError, RegularValueError

MIN_DIMENSION = 3
MAX_DIMENSION = 7

#: points per vectorised batch when third derivatives are requested
CHUNK = 4096

REGULAR_GRADIENT_TOL = 1e-6


def check_dimension(n: int) -> int:
    """Validate the dimension of the base space of a graph."""
    if int(n) != n:
        raise DomainError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if n < MIN_DIMENSION:
        raise DomainError(f"dimension must be >= {MIN_DIMENSION}, got {n}")
    if n > MAX_DIMENSION:
        raise DomainError(
            f"dimension {n} exceeds the cap {MAX_DIMENSION} (sphere quadrature cost)")
    return n


@dataclass(frozen=True)
class Constants:
    """Dimensional constants.

    Attributes
    ----------
    n : int
        Dimension of the base space.
    omega : float
        Area of the unit (n-1)-sphere.
    c_n : float
        ``2 (n-1) omega``, the normalisation of the mass flux.
    beta : float
        Volume of the unit n-ball, ``omega / n``.
    """

    n: int
    omega: float
    c_n: float
    beta: float


@lru_cache(maxsize=None)
def constants(n: int) -> Constants:
    n = check_dimension(n)
    omega = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    return Constants(n=n, omega=omega, c_n=2.0 * (n - 1) * omega, beta=omega / n)


def sphere_area(n: int, r=1.0):
    """Area of the (n-1)-sphere of radius ``r`` in R^n (any n >= 1)."""
    omega = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    return omega * np.asarray(r, dtype=float) ** (n - 1)


def ball_volume(n: int, r=1.0):
    """Volume of the n-ball of radius ``r`` (any n >= 1)."""
    beta = math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)
    return beta * np.asarray(r, dtype=float) ** n


class Jet(NamedTuple):
    """Function value and derivatives up to third order at a batch of points."""

    f: np.ndarray
    df: np.ndarray
    d2f: np.ndarray | None = None
    d3f: np.ndarray | None = None


@dataclass(frozen=True)
class BoundaryBall:
    """One component of the excised region with its constant boundary value."""

    center: tuple
    radius: float
    value: float

    def contains(self, x: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        return np.linalg.norm(x - c, axis=-1) < self.radius


ENTIRE = "entire"
MINIMAL_BOUNDARY = "minimal-boundary"
EXTERIOR = "exterior"
KINDS = (ENTIRE, MINIMAL_BOUNDARY, EXTERIOR)


class GraphFunction:
    """Base class for a function whose graph is a hypersurface of R^{n+1}.

    Subclasses implement :meth:`_jet` on a flat ``(N, n)`` batch of points
    that lie in the domain.  ``kind`` is ``"entire"``, ``"minimal-boundary"``
    (the excised balls are horizons) or ``"exterior"`` (excised balls with a
    regular boundary, filled in the same way).

    ``h_max`` is the limit of ``f`` at infinity (``inf`` when unbounded).
    """

    n: int
    kind: str = ENTIRE
    boundary: tuple = ()
    h_max: float = math.inf
    #: radial profile when the graph is rotationally symmetric about 0
    profile = None

    # -- evaluation -------------------------------------------------------

    def _jet(self, x: np.ndarray, order: int) -> Jet:
        raise NotImplementedError

    def in_domain(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape[:-1], dtype=bool)
        for ball in self.boundary:
            inside |= ball.contains(x)
        return ~inside

    def jet(self, x, order: int = 3) -> Jet:
        """Return the jet of ``f`` at ``x`` (shape ``(..., n)``)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise DomainError(f"points must have trailing dimension {self.n}")
        if not np.all(self.in_domain(x)):
            raise DomainError("point inside the excised region of the graph")
        lead = x.shape[:-1]
        flat = x.reshape(-1, self.n)
        jets = [self._jet(flat[i:i + CHUNK], order)
                for i in range(0, max(len(flat), 1), CHUNK)] if len(flat) else [
                    self._jet(flat, order)]
        n = self.n
        parts = []
        shapes = [(), (n,), (n, n), (n, n, n)]
        for k in range(order + 1):
            arr = np.concatenate([j[k] for j in jets], axis=0)
            parts.append(arr.reshape(lead + shapes[k]))
        parts += [None] * (4 - len(parts))
        return Jet(*parts)

    def __call__(self, x) -> np.ndarray:
        return self.jet(x, order=0).f

    def extended(self, x) -> np.ndarray:
        """The filled-in function: constant on each excised ball."""
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape[:-1])
        inside = np.zeros(x.shape[:-1], dtype=bool)
        for ball in self.boundary:
            mask = ball.contains(x) & ~inside
            out[mask] = ball.value
            inside |= mask
        if np.any(~inside):
            out[~inside] = self.jet(x[~inside], order=0).f
        return out

    def inner_radius(self) -> float:
        """Radius of a ball about 0 containing every excised component."""
        r = 0.0
        for ball in self.boundary:
            r = max(r, float(np.linalg.norm(ball.center)) + ball.radius)
        return r

    def rescaled(self, scale: float, shift: float) -> "GraphFunction":
        """``x -> (f(scale * x) - shift) / scale``."""
        return RescaledGraph(self, scale, shift)


# ---------------------------------------------------------------------------
# concrete graph families


class Plane(GraphFunction):
    """The horizontal hyperplane ``f = height``."""

    def __init__(self, n: int, height: float = 0.0):
        self.n = check_dimension(n)
        self.height = float(height)
        self.h_max = self.height

    def _jet(self, x, order):
        N, n = x.shape
        out = [np.full(N, self.height), np.zeros((N, n))]
        if order >= 2:
            out.append(np.zeros((N, n, n)))
        if order >= 3:
            out.append(np.zeros((N, n, n, n)))
        return Jet(*out[:order + 1]) if order >= 1 else Jet(out[0], out[1])


def _sym3(x: np.ndarray) -> np.ndarray:
    """``delta_ij x_k + delta_ik x_j + delta_jk x_i`` for a batch of vectors."""
    n = x.shape[-1]
    eye = np.eye(n)
    return (np.einsum("ij,nk->nijk", eye, x) + np.einsum("ik,nj->nijk", eye, x)
            + np.einsum("jk,ni->nijk", eye, x))


class QuadraticRadialGraph(GraphFunction):
    """``f(x) = phi(|x|^2)``, smooth through the origin.

    Parameters
    ----------
    phi : callable
        ``phi(s, k)`` returns the k-th derivative of phi at ``s = |x|^2``.
    """

    def __init__(self, n: int, phi: Callable, h_max: float = math.inf,
                 domain_radius: float = math.inf):
        self.n = check_dimension(n)
        self.phi = phi
        self.h_max = h_max
        self.domain_radius = domain_radius

    def in_domain(self, x):
        x = np.asarray(x, dtype=float)
        return np.einsum("...i,...i->...", x, x) < self.domain_radius ** 2

    def _jet(self, x, order):
        s = np.einsum("ni,ni->n", x, x)
        p = [self.phi(s, k) for k in range(order + 1)]
        out = [p[0]]
        if order >= 1:
            out.append(2.0 * p[1][:, None] * x)
        if order >= 2:
            out.append(2.0 * p[1][:, None, None] * np.eye(self.n)
                       + 4.0 * p[2][:, None, None] * np.einsum("ni,nj->nij", x, x))
        if order >= 3:
            out.append(4.0 * p[2][:, None, None, None] * _sym3(x)
                       + 8.0 * p[3][:, None, None, None]
                       * np.einsum("ni,nj,nk->nijk", x, x, x))
        if order == 0:
            out.append(np.zeros_like(x))
        return Jet(*out)


def paraboloid(n: int, curvature: float = 1.0) -> QuadraticRadialGraph:
    """``f = curvature * |x|^2 / 2``."""
    c = float(curvature)

    def phi(s, k):
        return [0.5 * c * s, np.full_like(s, 0.5 * c),
                np.zeros_like(s), np.zeros_like(s)][k]

    return QuadraticRadialGraph(n, phi)


def lower_hemisphere(n: int, radius: float = 1.0) -> QuadraticRadialGraph:
    """``f = -sqrt(radius^2 - |x|^2)``, the bottom cap of a round sphere."""
    a2 = float(radius) ** 2

    def phi(s, k):
        w = np.sqrt(a2 - s)
        return [-w, 0.5 / w, 0.25 / w ** 3, 0.375 / w ** 5][k]

    return QuadraticRadialGraph(n, phi, h_max=0.0, domain_radius=float(radius))


class RadialGraph(GraphFunction):
    """``f(x) = u(|x|)`` for a radial profile defined on ``[r_min, inf)``.

    The profile must expose ``n``, ``r_min``, ``u(r)``, ``du(r, k)``
    (k-th derivative, k = 1..3), ``u_inf`` and ``horizon`` (whether
    ``|u'| -> inf`` at ``r_min``).
    """

    def __init__(self, profile):
        self.profile = profile
        self.n = check_dimension(profile.n)
        r_min = float(profile.r_min)
        if r_min > 0:
            self.boundary = (BoundaryBall((0.0,) * self.n, r_min, float(profile.u(r_min))),)
            self.kind = MINIMAL_BOUNDARY if profile.horizon else EXTERIOR
        else:
            self.boundary = ()
            self.kind = ENTIRE
        self.h_max = float(profile.u_inf)

    def in_domain(self, x):
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x, axis=-1) >= self.profile.r_min

    def _jet(self, x, order):
        r = np.linalg.norm(x, axis=1)
        if np.any(r == 0.0):
            raise DomainError("radial jet undefined at the origin")
        prof = self.profile
        out = [prof.u(r)]
        if order == 0:
            out.append(np.zeros_like(x))
            return Jet(*out)
        u1 = prof.du(r, 1)
        out.append((u1 / r)[:, None] * x)
        if order >= 2:
            u2 = prof.du(r, 2)
            a = u1 / r
            b = (u2 - a) / r ** 2
            xx = np.einsum("ni,nj->nij", x, x)
            out.append(a[:, None, None] * np.eye(self.n) + b[:, None, None] * xx)
        if order >= 3:
            u3 = prof.du(r, 3)
            db = (u3 - b * r) / r ** 2 - 2.0 * b / r
            out.append(b[:, None, None, None] * _sym3(x)
                       + (db / r)[:, None, None, None]
                       * np.einsum("nij,nk->nijk", xx, x))
        return Jet(*out)


class AnisotropicRadialGraph(GraphFunction):
    """``f(x) = u(|x / axes|)``: level sets are ellipsoids with the given axes."""

    def __init__(self, profile, axes: Sequence[float]):
        self.base = RadialGraph(profile)
        self.n = self.base.n
        self.axes = np.asarray(axes, dtype=float)
        if self.axes.shape != (self.n,) or np.any(self.axes <= 0):
            raise DomainError("axes must be n positive numbers")
        self.h_max = self.base.h_max
        if profile.r_min > 0:
            self.kind = EXTERIOR

    def in_domain(self, x):
        return self.base.in_domain(np.asarray(x, dtype=float) / self.axes)

    def _jet(self, x, order):
        j = self.base._jet(x / self.axes, order)
        inv = 1.0 / self.axes
        out = [j.f, j.df * inv]
        if order >= 2:
            out.append(j.d2f * np.einsum("i,j->ij", inv, inv))
        if order >= 3:
            out.append(j.d3f * np.einsum("i,j,k->ijk", inv, inv, inv))
        return Jet(*out)


class BumpedGraph(GraphFunction):
    """A base graph plus a Gaussian bump ``A exp(-|x-c|^2 / (2 w^2))``."""

    def __init__(self, base: GraphFunction, amplitude: float, center, width: float):
        self.base = base
        self.n = base.n
        self.kind = base.kind
        self.boundary = base.boundary
        self.h_max = base.h_max
        self.amplitude = float(amplitude)
        self.center = np.asarray(center, dtype=float)
        self.width = float(width)
        for ball in self.boundary:
            gap = np.linalg.norm(self.center - np.asarray(ball.center)) - ball.radius
            if gap < 8.0 * self.width:
                raise DomainError("bump must stay away from the excised region")

    def in_domain(self, x):
        return self.base.in_domain(x)

    def _jet(self, x, order):
        j = self.base._jet(x, order)
        s2 = self.width ** 2
        d = x - self.center
        b = self.amplitude * np.exp(-np.einsum("ni,ni->n", d, d) / (2.0 * s2))
        z = d / s2
        out = [j.f + b]
        if order >= 1:
            out.append(j.df - b[:, None] * z)
        if order >= 2:
            zz = np.einsum("ni,nj->nij", z, z)
            out.append(j.d2f + b[:, None, None] * (zz - np.eye(self.n) / s2))
        if order >= 3:
            zzz = np.einsum("ni,nj,nk->nijk", z, z, z)
            out.append(j.d3f + b[:, None, None, None] * (-zzz + _sym3(z) / s2))
        if order == 0:
            out.append(j.df)
        return Jet(*out)


class RescaledGraph(GraphFunction):
    """``g(x) = (f(s x) - shift) / s``."""

    def __init__(self, base: GraphFunction, scale: float, shift: float):
        if scale <= 0:
            raise DomainError("scale must be positive")
        self.base = base
        self.n = base.n
        self.kind = base.kind
        self.scale = float(scale)
        self.shift = float(shift)
        self.boundary = tuple(
            BoundaryBall(tuple(np.asarray(b.center) / scale), b.radius / scale,
                         (b.value - shift) / scale) for b in base.boundary)
        self.h_max = (base.h_max - shift) / scale
        if base.profile is not None:
            self.profile = base.profile.rescaled(scale, shift)

    def in_domain(self, x):
        return self.base.in_domain(np.asarray(x, dtype=float) * self.scale)

    def _jet(self, x, order):
        s = self.scale
        j = self.base._jet(x * s, order)
        out = [(j.f - self.shift) / s, j.df]
        if order >= 2:
            out.append(j.d2f * s)
        if order >= 3:
            out.append(j.d3f * s * s)
        return Jet(*out)


class FiniteDifferenceGraph(GraphFunction):
    """Graph given only by values; derivatives by centred differences.

    Steps scale with ``1 + |x|``: ``eps^(1/3)`` for the gradient,
    ``eps^(1/4)`` for the Hessian and ``eps^(1/5)`` for the outer
    difference that produces third derivatives from Hessians.  Expect
    roughly 1e-10, 1e-8 and 1e-5 relative accuracy respectively.
    """

    EPS = np.finfo(float).eps
    STEP1 = EPS ** (1.0 / 3.0)
    STEP2 = EPS ** (1.0 / 4.0)
    STEP3 = EPS ** (1.0 / 5.0)

    def __init__(self, func: Callable, n: int, kind: str = ENTIRE,
                 boundary: Sequence[BoundaryBall] = (), h_max: float = math.inf):
        self.func = func
        self.n = check_dimension(n)
        if kind not in KINDS:
            raise DomainError(f"unknown kind {kind!r}")
        self.kind = kind
        self.boundary = tuple(boundary)
        self.h_max = h_max

    def _grad(self, x):
        h = self.STEP1 * (1.0 + np.linalg.norm(x, axis=1))
        g = np.empty_like(x)
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = 1.0
            g[:, i] = (self.func(x + h[:, None] * e) - self.func(x - h[:, None] * e)) / (2 * h)
        return g

    def _hess(self, x):
        h = self.STEP2 * (1.0 + np.linalg.norm(x, axis=1))
        n = self.n
        H = np.empty((len(x), n, n))
        f0 = self.func(x)
        eye = np.eye(n)
        for i in range(n):
            ei = h[:, None] * eye[i]
            H[:, i, i] = (self.func(x + ei) - 2 * f0 + self.func(x - ei)) / h ** 2
            for j in range(i + 1, n):
                ej = h[:, None] * eye[j]
                v = (self.func(x + ei + ej) - self.func(x + ei - ej)
                     - self.func(x - ei + ej) + self.func(x - ei - ej)) / (4 * h ** 2)
                H[:, i, j] = H[:, j, i] = v
        return H

    def _jet(self, x, order):
        out = [self.func(x), self._grad(x) if order >= 1 else np.zeros_like(x)]
        if order >= 2:
            out.append(self._hess(x))
        if order >= 3:
            h = self.STEP3 * (1.0 + np.linalg.norm(x, axis=1))
            T = np.empty((len(x), self.n, self.n, self.n))
            for k in range(self.n):
                e = np.zeros(self.n)
                e[k] = 1.0
                T[..., k] = (self._hess(x + h[:, None] * e)
                             - self._hess(x - h[:, None] * e)) / (2 * h[:, None, None])
            out.append(0.5 * (T + np.swapaxes(T, 1, 3)))
        return Jet(*out)


# ---------------------------------------------------------------------------
# curvature


def scalar_curvature_reilly(f: GraphFunction, x) -> np.ndarray:
    """Scalar curvature as the divergence of ``(f_ii f_j - f_ij f_i)/(1+|Df|^2)``.

    The divergence is expanded with the product rule; the third
    derivatives enter through ``d_j (Delta f)`` and ``f_ijj``.
    """
    j = f.jet(x, order=3)
    df, d2, d3 = j.df, j.d2f, j.d3f
    W = 1.0 + np.einsum("...i,...i->...", df, df)
    lap = np.einsum("...ii->...", d2)
    P = lap[..., None] * df - np.einsum("...ij,...i->...j", d2, df)
    grad_lap = np.einsum("...iij->...j", d3)
    div_P = (np.einsum("...j,...j->...", grad_lap, df) + lap * lap
             - np.einsum("...ijj,...i->...", d3, df)
             - np.einsum("...ij,...ij->...", d2, d2))
    grad_W = 2.0 * np.einsum("...k,...kj->...j", df, d2)
    return div_P / W - np.einsum("...j,...j->...", P, grad_W) / W ** 2


def shape_operator(f: GraphFunction, x) -> np.ndarray:
    """Shape operator ``g^{-1} II`` of the graph w.r.t. the upward normal."""
    j = f.jet(x, order=2)
    df, d2 = j.df, j.d2f
    W = 1.0 + np.einsum("...i,...i->...", df, df)
    g = np.eye(f.n) + np.einsum("...i,...j->...ij", df, df)
    try:
        return np.linalg.solve(g, d2) / np.sqrt(W)[..., None, None]
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise InternalError("induced metric is singular") from exc


def scalar_curvature_gauss(f: GraphFunction, x) -> np.ndarray:
    """Scalar curvature from the Gauss equation ``R = (tr A)^2 - tr(A^2)``."""
    A = shape_operator(f, x)
    tr = np.einsum("...ii->...", A)
    return tr * tr - np.einsum("...ij,...ji->...", A, A)


def graph_mean_curvature(f: GraphFunction, x) -> np.ndarray:
    """Scalar mean curvature ``H`` with mean curvature vector ``H (-Df, 1)/sqrt(W)``.

    A round sphere seen from inside has positive ``H``; the lower
    hemisphere of the unit sphere in R^{n+1} gives ``H = n``.
    """
    return np.einsum("...ii->...", shape_operator(f, x))


def levelset_mean_curvature(f: GraphFunction, x,
                            tol: float = REGULAR_GRADIENT_TOL) -> np.ndarray:
    """Mean curvature of the level set through ``x`` w.r.t. ``-Df/|Df|``.

    Equals ``div(Df/|Df|)``; a round sphere of radius r gives ``(n-1)/r``.
    """
    j = f.jet(x, order=2)
    return _levelset_H(j.df, j.d2f, tol)


def _levelset_H(df, d2, tol=REGULAR_GRADIENT_TOL):
    g2 = np.einsum("...i,...i->...", df, df)
    g = np.sqrt(g2)
    if np.any(g < tol):
        raise RegularValueError(f"|Df| below {tol:g}: not a regular level")
    lap = np.einsum("...ii->...", d2)
    return (lap - np.einsum("...i,...ij,...j->...", df, d2, df) / g2) / g


# ---------------------------------------------------------------------------
# sampling and admissibility


def quasi_random_points(n: int, count: int, r_lo: float, r_hi: float,
                        center=None) -> np.ndarray:
    """Deterministic low-discrepancy points in the shell ``r_lo <= |x| <= r_hi``."""
    u = qmc.Halton(d=n + 1, scramble=False).random(count + 1)[1:]
    z = special.ndtri(np.clip(u[:, :n], 1e-12, 1 - 1e-12))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    r = r_lo + (r_hi - r_lo) * u[:, n]
    pts = z * r[:, None]
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return pts


def default_sample_shell(f: GraphFunction) -> tuple[float, float]:
    r_in = f.inner_radius()
    lo = 1.05 * r_in if r_in > 0 else 0.05
    return lo, max(10.0 * lo, lo + 10.0)


UPWARD = "upward"
DOWNWARD = "downward"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class Orientation:
    """Mean curvature direction decided from a fixed quasi-random sample."""

    direction: str
    min_H: float
    max_H: float
    samples: int = 0


def classify_orientation(f: GraphFunction, count: int = 512, tol: float = 1e-8,
                         shell: tuple | None = None) -> Orientation:
    """Classify the graph as upward, downward or undetermined.

    All sampled ``|H| < tol`` is undetermined, as is a sample with both
    signs beyond ``tol``.
    """
    lo, hi = shell if shell is not None else default_sample_shell(f)
    pts = quasi_random_points(f.n, count, lo, hi)
    pts = pts[f.in_domain(pts)]
    H = graph_mean_curvature(f, pts)
    hmin, hmax = float(H.min()), float(H.max())
    if hmin >= -tol and hmax > tol:
        d = UPWARD
    elif hmax <= tol and hmin < -tol:
        d = DOWNWARD
    else:
        d = UNDETERMINED
    return Orientation(d, hmin, hmax, len(pts))


@dataclass(frozen=True)
class FlatnessReport:
    radii: tuple
    grad_norm: tuple
    values: tuple
    limit: str
    ok: bool


def check_asymptotically_flat(f: GraphFunction, radii=None,
                              directions: int = 32) -> FlatnessReport:
    """Sample ``|Df|`` and ``f`` on growing spheres.

    Passes when the maximal gradient norm decreases along the radii and
    ends below 1e-2 of its first value, and the mean of ``f`` either
    settles (steps shrinking by a fixed factor per radius) or diverges
    monotonically.
    """
    if radii is None:
        r0 = max(1.0, 2.0 * f.inner_radius())
        radii = r0 * 10.0 ** np.arange(0, 7)
    dirs = quasi_random_points(f.n, directions, 1.0, 1.0)
    gmax, fmean = [], []
    for r in radii:
        j = f.jet(dirs * r, order=1)
        gmax.append(float(np.max(np.linalg.norm(j.df, axis=1))))
        fmean.append(float(np.mean(j.f)))
    g = np.array(gmax)
    decreasing = bool(np.all(np.diff(g) <= 1e-12 * g[0] + 0.0)) and g[-1] <= 1e-2 * max(g[0], 1e-300)
    steps = np.diff(fmean)
    tiny = 1e-12 * (1 + np.abs(fmean[-1]))
    # a limit needs geometrically shrinking steps; log growth has equal ones
    shrink = np.abs(steps[-2:]) <= 0.8 * np.abs(steps[-3:-1]) + tiny
    if np.all(np.abs(steps) < tiny) or np.all(shrink):
        limit = "constant"
    elif np.all(steps > 0):
        limit = "+inf"
    elif np.all(steps < 0):
        limit = "-inf"
    else:
        limit = "unknown"
    flat_grad = bool(g[-1] < 1e-12) or decreasing
    return FlatnessReport(tuple(map(float, radii)), tuple(gmax), tuple(fmean), limit,
                          flat_grad and limit != "unknown")


def check_minimal_boundary(f: GraphFunction, threshold: float = 1e3,
                           offset: float = 1e-8, directions: int = 32) -> bool:
    """Check that ``|Df|`` exceeds ``threshold`` just outside each excised ball
    and that ``f`` is constant (the declared value) on it."""
    if not f.boundary:
        return False
    dirs = quasi_random_points(f.n, directions, 1.0, 1.0)
    for ball in f.boundary:
        pts = np.asarray(ball.center) + dirs * ball.radius * (1.0 + offset)
        j = f.jet(pts, order=1)
        if np.min(np.linalg.norm(j.df, axis=1)) < threshold:
            return False
        if np.max(np.abs(j.f - ball.value)) > 1e-3 * (1.0 + abs(ball.value)):
            return False
    return True
