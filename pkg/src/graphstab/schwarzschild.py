"""Schwarzschild embedding functions and rotationally symmetric test graphs.

The Schwarzschild graph of mass m is ``u = S_m(|x|)`` with
``S_m'(r) = (r^{n-2}/(2m) - 1)^{-1/2}`` on ``r >= (2m)^{1/(n-2)}`` and
``S_m = 0`` on the horizon.  More generally a nondecreasing mass profile
``m(r)`` produces the rotational graph with ``u' = sqrt(2m/(r^{n-2}-2m))``
whose level-set quasi-local mass at radius r is exactly ``m(r)`` and whose
scalar curvature is ``2(n-1) m'(r) / r^{n-1}``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import interpolate, optimize

from .errors import ConvergenceError, DomainError, PreconditionError
from .geometry import RadialGraph, check_dimension, quasi_random_points
from .quadrature import panel_nodes, pairwise_sum

GL_ORDER = 20
PANEL_RATIO = 1.3


class _Antiderivative:
    """``U(r) = int_a^r phi(rho) d rho`` for a vectorised integrand on ``[a, inf)``.

    Integrates in ``tau = sqrt(rho - a)`` so an inverse square-root blow-up of
    ``phi`` at ``a`` becomes a smooth integrand.  Geometric panels in tau
    (ratio 1.3, 20-point Gauss-Legendre) are tabulated once; ``knots`` adds
    extra breakpoints where ``phi`` is not smooth.
    """

    def __init__(self, phi: Callable, a: float, scale: float, knots=(),
                 r_far: float | None = None):
        self.phi = phi
        self.a = float(a)
        tau0 = 0.05 * math.sqrt(scale)
        r_far = r_far if r_far is not None else self.a + 1e14 * scale
        tau_far = math.sqrt(r_far - self.a)
        nb = int(math.ceil(math.log(tau_far / tau0) / math.log(PANEL_RATIO))) + 1
        breaks = np.concatenate([[0.0], tau0 * PANEL_RATIO ** np.arange(nb)])
        extra = [math.sqrt(k - self.a) for k in knots if k > self.a]
        breaks = np.unique(np.concatenate([breaks, extra]))
        self.breaks = breaks
        nodes, wts = panel_nodes(breaks[:-1], breaks[1:], GL_ORDER)
        vals = self._g(nodes.ravel()).reshape(nodes.shape)
        self.cum = np.concatenate([[0.0], np.cumsum((vals * wts).sum(axis=1))])

    def _g(self, tau):
        # 2 tau phi(a + tau^2) is smooth in tau; below the smallest tau with
        # a + tau^2 > a in floating point its value at that tau is used
        t_min = math.sqrt(4.0 * np.finfo(float).eps * max(self.a, 1e-300))
        te = np.maximum(tau, t_min)
        with np.errstate(invalid="ignore", divide="ignore"):
            v = 2.0 * te * self.phi(self.a + te * te)
        return np.where(tau > 0, v, 0.0)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.a * (1 - 1e-14)):
            raise DomainError("radius below the start of the profile")
        t = np.sqrt(np.maximum(r - self.a, 0.0))
        out = np.empty(t.shape)
        flat_t = t.ravel()
        flat = out.reshape(-1)
        far = flat_t > self.breaks[-1]
        near = ~far
        if np.any(near):
            k = np.clip(np.searchsorted(self.breaks, flat_t[near], side="right") - 1,
                        0, len(self.breaks) - 2)
            lo = self.breaks[k]
            nodes, wts = panel_nodes(lo, flat_t[near], GL_ORDER)
            part = (self._g(nodes.ravel()).reshape(nodes.shape) * wts).sum(axis=1)
            flat[near] = self.cum[k] + part
        for i in np.flatnonzero(far):
            tt = flat_t[i]
            nb = int(math.ceil(math.log(tt / self.breaks[-1]) / math.log(PANEL_RATIO))) + 1
            br = np.geomspace(self.breaks[-1], tt, nb + 1)
            nodes, wts = panel_nodes(br[:-1], br[1:], GL_ORDER)
            flat[i] = self.cum[-1] + pairwise_sum(self._g(nodes.ravel()).reshape(nodes.shape) * wts)
        return out


# ---------------------------------------------------------------------------
# radial profiles


class RadialProfile:
    """Height function ``u(r)`` of a rotationally symmetric graph on ``[r_min, inf)``.

    Subclasses provide ``u`` and ``du(r, k)``.  ``source`` is one of
    ``"schwarzschild"``, ``"mass-profile"`` or ``"explicit"``.
    """

    n: int
    r_min: float
    horizon: bool = False
    source: str = "explicit"
    u_inf: float = math.inf

    def u(self, r):
        raise NotImplementedError

    def du(self, r, k: int = 1):
        raise NotImplementedError

    def u_prime(self, r):
        return self.du(r, 1)

    def quasilocal_mass(self, r):
        """``(r^{n-2}/2) u'^2/(1+u'^2)``: the level-set quasi-local mass."""
        r = np.asarray(r, dtype=float)
        p = self.du(r, 1) ** 2
        return 0.5 * r ** (self.n - 2) * p / (1.0 + p)

    def radius_at(self, h):
        """Radius r with ``u(r) = h`` (u increasing); ``inf`` when ``h >= u_inf``."""
        h = float(h)
        u0 = float(self.u(self.r_min))
        if h < u0:
            raise DomainError("level below the profile's minimum")
        if h == u0:
            return float(self.r_min)
        if h >= self.u_inf:
            return math.inf
        lo = self.r_min
        hi = max(2.0 * self.r_min, 1.0)
        while float(self.u(hi)) < h:
            lo, hi = hi, 4.0 * hi
            if hi > 1e300:
                raise ConvergenceError("could not bracket the level radius")
        return optimize.brentq(lambda r: float(self.u(r)) - h, lo, hi,
                               xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)

    def rescaled(self, scale: float, shift: float) -> "RadialProfile":
        return ScaledProfile(self, scale, shift)

    def shifted(self, c: float) -> "RadialProfile":
        return ScaledProfile(self, 1.0, -c)

    def graph(self) -> RadialGraph:
        return RadialGraph(self)


class ScaledProfile(RadialProfile):
    """``(u(s r) - shift) / s``."""

    def __init__(self, base: RadialProfile, scale: float, shift: float):
        self.base = base
        self.n = base.n
        self.scale = float(scale)
        self.shift = float(shift)
        self.r_min = base.r_min / scale
        self.horizon = base.horizon
        self.source = base.source
        self.u_inf = (base.u_inf - shift) / scale

    def u(self, r):
        return (self.base.u(np.asarray(r) * self.scale) - self.shift) / self.scale

    def du(self, r, k=1):
        return self.base.du(np.asarray(r) * self.scale, k) * self.scale ** (k - 1)

    def radius_at(self, h):
        return self.base.radius_at(h * self.scale + self.shift) / self.scale


class ExplicitProfile(RadialProfile):
    """Profile from user callables ``u`` and ``du(r, k)``."""

    def __init__(self, n, u, du, r_min=0.0, u_inf=math.inf, horizon=False):
        self.n = check_dimension(n)
        self._u, self._du = u, du
        self.r_min = float(r_min)
        self.u_inf = u_inf
        self.horizon = horizon

    def u(self, r):
        return self._u(np.asarray(r, dtype=float))

    def du(self, r, k=1):
        return self._du(np.asarray(r, dtype=float), k)


@dataclass(frozen=True, eq=False)
class SchwarzschildProfile(RadialProfile):
    """Schwarzschild embedding function ``S_m`` in dimension n.

    ``sup_height`` is ``S_inf`` for n >= 5 and ``inf`` for n = 3, 4.
    ``method="quadrature"`` forces the quadrature path in every dimension.
    """

    n: int
    m: float
    method: str = "auto"
    horizon_radius: float = field(init=False)
    sup_height: float = field(init=False)

    source = "schwarzschild"
    horizon = True

    def __post_init__(self):
        check_dimension(self.n)
        if not self.m > 0:
            raise DomainError("Schwarzschild mass must be positive")
        rh = (2.0 * self.m) ** (1.0 / (self.n - 2))
        object.__setattr__(self, "horizon_radius", rh)
        sup = schwarzschild_sup(self.n, self.m) if self.n >= 5 else math.inf
        object.__setattr__(self, "sup_height", sup)
        if self.method == "quadrature" or self.n >= 5:
            anti = _Antiderivative(self._du1_safe, rh, rh)
            object.__setattr__(self, "_anti", anti)

    @property
    def r_min(self):
        return self.horizon_radius

    @property
    def u_inf(self):
        return self.sup_height

    def _g(self, r):
        """``r^{n-2}/(2m) - 1`` computed without cancellation near the horizon."""
        r = np.asarray(r, dtype=float)
        return np.expm1((self.n - 2) * np.log(r / self.horizon_radius))

    def _du1_safe(self, r):
        with np.errstate(divide="ignore"):
            return 1.0 / np.sqrt(self._g(r))

    def u(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.horizon_radius * (1 - 1e-14)):
            raise DomainError("radius below the Schwarzschild horizon")
        r = np.maximum(r, self.horizon_radius)
        if self.method != "quadrature" and self.n == 3:
            return np.sqrt(8.0 * self.m * (r - 2.0 * self.m))
        if self.method != "quadrature" and self.n == 4:
            s = math.sqrt(2.0 * self.m)
            return s * np.arccosh(r / s)
        return self._anti(r)

    def du(self, r, k=1):
        r = np.asarray(r, dtype=float)
        n, m = self.n, self.m
        g = self._g(r)
        if k == 1:
            return g ** -0.5
        g1 = (n - 2) * r ** (n - 3) / (2.0 * m)
        if k == 2:
            return -0.5 * g ** -1.5 * g1
        g2 = (n - 2) * (n - 3) * r ** (n - 4) / (2.0 * m)
        if k == 3:
            return 0.75 * g ** -2.5 * g1 * g1 - 0.5 * g ** -1.5 * g2
        raise ValueError("derivative order must be 1, 2 or 3")

    def radius_at(self, h):
        h = float(h)
        if h < 0:
            raise DomainError("level below the horizon height")
        if self.method != "quadrature" and self.n == 3:
            return 2.0 * self.m + h * h / (8.0 * self.m)
        if self.method != "quadrature" and self.n == 4:
            s = math.sqrt(2.0 * self.m)
            return s * math.cosh(h / s)
        return super().radius_at(h)


def schwarzschild_profile(n: int, m: float, method: str = "auto") -> SchwarzschildProfile:
    return SchwarzschildProfile(n, m, method)


def schwarzschild_graph(n: int, m: float, shift: float = 0.0) -> RadialGraph:
    """Graph of ``S_m(|x|) + shift``."""
    prof = SchwarzschildProfile(n, m)
    return RadialGraph(prof.shifted(shift) if shift else prof)


def schwarzschild_height(n: int, m: float, r, method: str = "auto"):
    """``S_m(r)``: closed form for n = 3, 4, quadrature otherwise."""
    return SchwarzschildProfile(check_dimension(n), m, method).u(r)


@dataclass(frozen=True)
class SupCertificate:
    value: float
    truncation_radius: float
    tail_bound: float


def schwarzschild_sup_certified(n: int, m: float, tol: float = 1e-13) -> SupCertificate:
    """``S_inf`` with its truncation certificate.

    The integral is truncated at radius R with the tail bounded by
    ``kappa sqrt(2m) R^{(4-n)/2} 2/(n-4)`` where
    ``kappa = (1 - 2m/R^{n-2})^{-1/2}`` accounts for the ``-1`` under the root.
    """
    n = check_dimension(n)
    if n <= 4:
        raise DomainError(f"S_inf diverges for n = {n} (S_m is unbounded)")
    if not m > 0:
        raise DomainError("mass must be positive")
    rh = (2.0 * m) ** (1.0 / (n - 2))
    c = math.sqrt(2.0 * m) * 2.0 / (n - 4)
    e = (4.0 - n) / 2.0
    R = rh * 4.0
    while True:
        kappa = (1.0 - 2.0 * m / R ** (n - 2)) ** -0.5
        bound = kappa * c * R ** e
        if bound <= tol * rh:
            break
        R *= 4.0
    g = lambda r: 1.0 / np.sqrt(np.expm1((n - 2) * np.log(r / rh)))
    anti = _Antiderivative(g, rh, rh, r_far=R)
    return SupCertificate(float(anti(R)), R, bound)


def schwarzschild_sup(n: int, m: float) -> float:
    """``S_inf = lim S_m(r)`` for n >= 5."""
    return schwarzschild_sup_certified(n, m).value


# ---------------------------------------------------------------------------
# mass profiles


class MassProfile:
    """A quasi-local mass profile ``m(r)`` on ``[r_min, inf)``.

    Parameters
    ----------
    m, dm : callable
        ``m(r)`` and ``dm(r, k)`` for k = 1, 2 (vectorised).
    r_min : float
    m_total : float
        Limit of ``m`` at infinity.
    knots : sequence of float
        Radii where ``m`` is only piecewise smooth.
    """

    def __init__(self, m: Callable, dm: Callable, r_min: float, m_total: float,
                 knots: Sequence[float] = (), label: str = "custom"):
        self._m, self._dm = m, dm
        self.r_min = float(r_min)
        self.m_total = float(m_total)
        self.knots = tuple(float(k) for k in knots)
        self.label = label

    def __call__(self, r):
        return self._m(np.asarray(r, dtype=float))

    def derivative(self, r, k: int = 1):
        return self._dm(np.asarray(r, dtype=float), k)

    def sample_radii(self, count: int = 400, r_max: float | None = None) -> np.ndarray:
        r_max = r_max or self.r_min * 1e4 + 10.0
        return np.geomspace(self.r_min, r_max, count)

    def is_nondecreasing(self, radii=None, tol: float = 0.0) -> bool:
        r = self.sample_radii() if radii is None else np.asarray(radii)
        return bool(np.all(np.diff(self(r)) >= -tol) and np.all(self.derivative(r, 1) >= -tol))

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, m: float, r_min: float) -> "MassProfile":
        return cls(lambda r: np.full(np.shape(r), m, dtype=float),
                   lambda r, k: np.zeros(np.shape(r)), r_min, m, label="constant")

    @classmethod
    def power_tail(cls, m_total: float, coeffs: Sequence[float],
                   powers: Sequence[float], r_min: float) -> "MassProfile":
        """``m(r) = m_total - sum_k c_k (r / r_min)^{-p_k}``.

        Nondecreasing when every ``c_k >= 0``; negative coefficients give a
        decreasing profile (scalar curvature negative somewhere).
        """
        c = np.asarray(coeffs, dtype=float)
        p = np.asarray(powers, dtype=float)
        r0 = float(r_min)

        def m(r):
            s = np.asarray(r, dtype=float)[..., None] / r0
            return m_total - np.sum(c * s ** (-p), axis=-1)

        def dm(r, k):
            r = np.asarray(r, dtype=float)
            s = r[..., None] / r0
            if k == 1:
                return np.sum(c * p * s ** (-p), axis=-1) / r
            if k == 2:
                return -np.sum(c * p * (p + 1) * s ** (-p), axis=-1) / r ** 2
            raise ValueError("k must be 1 or 2")

        return cls(m, dm, r0, m_total, label="power-tail")

    @classmethod
    def saturating(cls, m_total: float, r_min: float, length: float = 1.0) -> "MassProfile":
        """``m(r) = m_total (1 - exp(-r / length))``."""
        L = float(length)

        def m(r):
            return m_total * -np.expm1(-np.asarray(r, dtype=float) / L)

        def dm(r, k):
            e = np.exp(-np.asarray(r, dtype=float) / L)
            return m_total * e / L if k == 1 else -m_total * e / L ** 2

        return cls(m, dm, r_min, m_total, label="saturating")

    @classmethod
    def logarithmic(cls, scale: float, r_min: float) -> "MassProfile":
        """``m(r) = scale * log(1 + r)``: unbounded, so the mass is infinite."""

        def m(r):
            return scale * np.log1p(np.asarray(r, dtype=float))

        def dm(r, k):
            r = np.asarray(r, dtype=float)
            return scale / (1 + r) if k == 1 else -scale / (1 + r) ** 2

        return cls(m, dm, r_min, math.inf, label="logarithmic")

    @classmethod
    def from_samples(cls, r, m) -> "MassProfile":
        """Monotone piecewise-cubic interpolant of samples, constant beyond the last.

        Non-monotone samples are rejected, not repaired.
        """
        r = np.asarray(r, dtype=float)
        m = np.asarray(m, dtype=float)
        if r.ndim != 1 or r.shape != m.shape or len(r) < 2:
            raise DomainError("need matching 1-d arrays of at least two samples")
        if np.any(np.diff(r) <= 0):
            raise DomainError("sample radii must be strictly increasing")
        if np.any(np.diff(m) < 0):
            raise DomainError("mass samples must be nondecreasing")
        if np.any(m < 0):
            raise DomainError("mass samples must be nonnegative")
        pchip = interpolate.PchipInterpolator(r, m, extrapolate=False)
        d1, d2 = pchip.derivative(1), pchip.derivative(2)
        r_end, m_end = r[-1], m[-1]

        def mf(x):
            x = np.asarray(x, dtype=float)
            return np.where(x >= r_end, m_end, pchip(np.minimum(x, r_end)))

        def dmf(x, k):
            x = np.asarray(x, dtype=float)
            d = d1 if k == 1 else d2
            return np.where(x >= r_end, 0.0, d(np.minimum(x, r_end)))

        return cls(mf, dmf, r[0], m_end, knots=r[1:], label="samples")

    @classmethod
    def from_csv(cls, path) -> "MassProfile":
        """Two-column CSV ``r, m`` with an optional header row."""
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    if rows:
                        raise DomainError(f"malformed row {row!r}")
        if not rows:
            raise DomainError("no samples in mass profile file")
        r, m = np.array(rows).T
        return cls.from_samples(r, m)


def random_mass_profile(rng: np.random.Generator, n: int, m_total: float | None = None,
                        terms: int = 2) -> MassProfile:
    """A random nondecreasing power-tail profile starting on a horizon.

    ``m(r_min) = r_min^{n-2}/2`` so the generated graph has a minimal
    boundary; the sub-horizon condition is checked on a dense grid and the
    draw repeated until it holds.
    """
    n = check_dimension(n)
    m_total = float(m_total if m_total is not None else rng.uniform(0.2, 3.0))
    for _ in range(1000):
        frac = rng.uniform(0.3, 0.9)          # m(r_min) / m_total
        r_min = (2.0 * frac * m_total) ** (1.0 / (n - 2))
        w = rng.dirichlet(np.ones(terms))
        powers = np.sort(rng.uniform(1.5, 4.0, terms))
        coeffs = (1.0 - frac) * m_total * w
        mp = MassProfile.power_tail(m_total, coeffs, powers, r_min)
        r = np.geomspace(r_min, r_min * 1e3, 4000)[1:]
        if _horizon_slope_ok(mp, n) and np.all(mp(r) < 0.5 * r ** (n - 2) * (1 - 1e-9)):
            mp.label = "random-power-tail"
            return mp
    raise ConvergenceError("could not draw an admissible mass profile")


class MassRadialProfile(RadialProfile):
    """Rotational profile generated from a mass profile."""

    source = "mass-profile"

    def __init__(self, mp: MassProfile, n: int):
        self.n = check_dimension(n)
        self.mass_profile = mp
        self.r_min = mp.r_min
        m0 = float(mp(self.r_min))
        edge = 0.5 * self.r_min ** (self.n - 2)
        self.horizon = bool(abs(m0 - edge) <= 1e-12 * max(edge, 1e-300))
        self._anti = _Antiderivative(self._du1, self.r_min, max(self.r_min, 1e-3),
                                     knots=mp.knots)
        self.u_inf = self._limit()

    def _limit(self):
        if self.n <= 4 or not math.isfinite(self.mass_profile.m_total):
            return math.inf
        return float(self._anti(self.r_min * 1e12 + 1e12))

    def _parts(self, r):
        n = self.n
        mp = self.mass_profile
        N = 2.0 * mp(r)
        D = r ** (n - 2) - N
        return N, D

    def _du1(self, r):
        N, D = self._parts(np.asarray(r, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.sqrt(N / D)

    def u(self, r):
        return self._anti(r)

    def du(self, r, k=1):
        r = np.asarray(r, dtype=float)
        n = self.n
        mp = self.mass_profile
        N, D = self._parts(r)
        u1 = np.sqrt(N / D)
        if k == 1:
            return u1
        N1 = 2.0 * mp.derivative(r, 1)
        D1 = (n - 2) * r ** (n - 3) - N1
        q = N1 * D - N * D1
        p1 = q / D ** 2
        u2 = p1 / (2.0 * u1)
        if k == 2:
            return u2
        N2 = 2.0 * mp.derivative(r, 2)
        D2 = (n - 2) * (n - 3) * r ** (n - 4) - N2
        p2 = (N2 * D - N * D2) / D ** 2 - 2.0 * D1 * q / D ** 3
        if k == 3:
            return (p2 - 2.0 * u2 * u2) / (2.0 * u1)
        raise ValueError("derivative order must be 1, 2 or 3")


def _horizon_slope_ok(mp: MassProfile, n: int) -> bool:
    # on a horizon start, r^{n-2} - 2 m must grow or it goes negative just outside r_min
    a = mp.r_min
    return bool(2.0 * float(mp.derivative(np.asarray(a), 1)) < (n - 2) * a ** (n - 3) * (1 - 1e-9))


def profile_from_mass(mp: MassProfile, n: int, check_radii=None) -> MassRadialProfile:
    """Rotational profile whose level-set quasi-local mass is ``m(r)``.

    ``u' = sqrt(2 m / (r^{n-2} - 2 m))`` and ``u(r_min) = 0``.  The
    attribute ``admissible`` records whether ``m`` is nondecreasing on the
    check radii (equivalently, nonnegative scalar curvature).

    Raises
    ------
    DomainError
        If ``m(r) >= r^{n-2}/2`` at a sampled radius beyond ``r_min``.
    """
    n = check_dimension(n)
    r = mp.sample_radii(2000) if check_radii is None else np.asarray(check_radii)
    r = r[r > mp.r_min]
    mv = mp(r)
    if np.any(mv >= 0.5 * r ** (n - 2)):
        raise DomainError("mass profile crosses the horizon bound m(r) < r^{n-2}/2")
    if np.any(mv < 0):
        raise DomainError("negative mass profile")
    if float(mp(mp.r_min)) > 0.5 * mp.r_min ** (n - 2) * (1 + 1e-12):
        raise DomainError("mass profile starts inside its own horizon")
    if (float(mp(mp.r_min)) >= 0.5 * mp.r_min ** (n - 2) * (1 - 1e-12)
            and not _horizon_slope_ok(mp, n)):
        raise DomainError("mass profile crosses the horizon bound just outside r_min")
    prof = MassRadialProfile(mp, n)
    prof.admissible = mp.is_nondecreasing(np.concatenate([[mp.r_min], r]))
    return prof


# ---------------------------------------------------------------------------
# asymptotic comparison with Schwarzschild


@dataclass(frozen=True)
class AsymptoticCheck:
    """Outcome of the uniform asymptotically-Schwarzschild test.

    ``Lambda`` is the median offset at the outermost radii, clipped into the
    interval of offsets compatible with every sample; ``margin`` is the
    smallest ``gamma |x|^alpha - |f - Lambda - S_m|`` over the samples.
    """

    passed: bool
    Lambda: float
    margin: float
    feasible_interval: tuple
    mass: float
    radii: tuple


def asymptotic_schwarzschild_check(f, r0: float, gamma: float, alpha: float,
                                   m: float | None = None, r_check: float | None = None,
                                   radii_count: int = 200, directions: int = 64,
                                   tol: float = 1e-12) -> AsymptoticCheck:
    """Test ``|f(x) - (Lambda + S_m(|x|))| <= gamma |x|^alpha`` for ``|x| > r0``."""
    n = f.n
    if not alpha < 2.0 - n / 2.0:
        raise DomainError(f"decay exponent must be < 2 - n/2 = {2 - n / 2}")
    if m is None:
        from .mass import adm_mass
        m = adm_mass(f).converged_mass
        if m is None:
            raise ConvergenceError("mass of f did not converge")
    if not m > 0:
        raise DomainError("asymptotic check needs positive mass")
    S = SchwarzschildProfile(n, m)
    lo_r = max(r0, S.horizon_radius, f.inner_radius()) * (1 + 1e-9)
    r_check = r_check or max(1e4 * max(r0, 1.0), 100 * lo_r)
    radii = np.geomspace(lo_r, r_check, radii_count)
    dirs = quasi_random_points(n, directions, 1.0, 1.0)
    pts = radii[:, None, None] * dirs[None, :, :]
    d = f(pts) - S.u(radii)[:, None]
    allow = gamma * radii[:, None] ** alpha
    lo = float(np.max(d - allow))
    hi = float(np.min(d + allow))
    outer = d[-max(1, radii_count // 10):]
    lam = float(np.median(outer))
    passed = lo <= hi + tol * (1 + abs(hi))
    if passed:
        lam = min(max(lam, lo), hi)
    margin = float(np.min(allow - np.abs(d - lam)))
    return AsymptoticCheck(bool(passed), lam, margin, (lo, hi), float(m),
                           (float(radii[0]), float(radii[-1])))
