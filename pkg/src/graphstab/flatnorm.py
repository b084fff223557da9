"""Explicit flat-distance upper bounds between a graph and a horizontal plane.

Inside a ball U of R^{n+1}, the filled-in graph ``M - A`` and the plane
``Pi = {x^{n+1} = h_0}`` bound the region ``B = B_+ + B_-`` between them, so
``M - Pi = A + dB`` and ``F_U(M - Pi) <= M_U(A) + M_U(B_+) + M_U(B_-)``.
Region masses are Lebesgue volumes inside U.

Rotational graphs (and planes) are integrated over height slices, where
``{f < z}`` is a ball and its intersection with the slice of U is a lens;
other n = 3 graphs are integrated column by column on a voxel grid.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from .comparison import AsymptoticProfile, comparison_constant, lowdim_height_bound
from .errors import DomainError
from .geometry import GraphFunction, Plane, ball_volume, check_dimension, constants
from .quadrature import ball_intersection_volume, pairwise_sum

QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class Ball:
    """Ball ``U`` in R^{n+1}: ``center = (x_c, z_c)``."""

    center: tuple
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError("ball radius must be positive")

    @classmethod
    def on_plane(cls, n: int, h0: float, rho: float) -> "Ball":
        return cls(tuple([0.0] * n) + (float(h0),), float(rho))

    @property
    def xc(self) -> np.ndarray:
        return np.asarray(self.center[:-1], dtype=float)

    @property
    def zc(self) -> float:
        return float(self.center[-1])

    def slice_radius(self, z):
        """Radius of the n-ball ``U cap {x^{n+1} = z}`` (0 outside)."""
        z = np.asarray(z, dtype=float)
        return np.sqrt(np.maximum(self.rho ** 2 - (z - self.zc) ** 2, 0.0))


@dataclass(frozen=True)
class FlatDecomposition:
    """Masses in U of the fill-in A and the regions ``B_+``, ``B_-``."""

    mass_A: float
    mass_B_plus: float
    mass_B_minus: float
    bound: float | None = None
    per_term: dict = field(default_factory=dict)
    method: str = ""

    @property
    def total(self) -> float:
        return self.mass_A + self.mass_B_plus + self.mass_B_minus


# ---------------------------------------------------------------------------
# height-slice integration (rotational graphs, planes)


def _sublevel_radius(f: GraphFunction):
    """``z -> R(z)`` with ``{f_bar < z} = B_{R(z)}`` (``R = inf`` for all of R^n)."""
    if isinstance(f, Plane):
        c = f.height
        return lambda z: math.inf if z > c else 0.0, c
    prof = f.profile
    v = float(prof.u(prof.r_min))
    u_inf = float(f.h_max)

    def R(z):
        if z <= v:
            return 0.0
        if z >= u_inf:
            return math.inf
        return prof.radius_at(z)

    return R, v


def _slice_volume(n, R, rz, d):
    """``|B_R(0) cap B_rz(p)|`` in R^n, ``|p| = d``; handles infinite R."""
    if rz <= 0 or R <= 0:
        return 0.0
    if math.isinf(R):
        return float(ball_volume(n, rz))
    return float(ball_intersection_volume(n, R, rz, d))


def _kinks(func_list, lo, hi, count=200):
    """Zeros of each function in ``[lo, hi]`` from a sign scan plus brentq."""
    pts = []
    z = np.linspace(lo, hi, count)
    for g in func_list:
        vals = np.array([g(t) for t in z])
        for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
            pts.append(optimize.brentq(g, z[i], z[i + 1], xtol=1e-14 * max(1, abs(z[i]))))
    return sorted(set(pts))


def _quad_pieces(func, breaks, scale: float = 0.0):
    """Sum of adaptive quadratures over consecutive breakpoints.

    ``scale`` sets the absolute tolerance; pieces where the integrand is
    zero up to cancellation noise would otherwise never converge.
    """
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b > a:
            total += integrate.quad(func, a, b, epsabs=1e-3 * QUAD_RTOL * scale,
                                    epsrel=QUAD_RTOL, limit=200)[0]
    return total


def _slices_rotational(f: GraphFunction, h0: float, U: Ball):
    n = f.n
    R, v = _sublevel_radius(f)
    R = functools.lru_cache(maxsize=None)(R)
    d = float(np.linalg.norm(U.xc))
    scale = float(ball_volume(n + 1, U.rho))
    beta = constants(n).beta
    z_lo, z_hi = U.zc - U.rho, U.zc + U.rho

    def below(z):
        return _slice_volume(n, R(z), float(U.slice_radius(z)), d)

    def above(z):
        rz = float(U.slice_radius(z))
        return beta * rz ** n - _slice_volume(n, R(z), rz, d)

    def kink_funcs():
        def g(sign_r, sign_d):
            def fn(z):
                r = R(z)
                r = 1e300 if math.isinf(r) else r
                return sign_r * r + sign_d * d - float(U.slice_radius(z))
            return fn
        return [g(1, 1), g(1, -1), g(-1, 1)]

    # B_-: z in (max(z_lo, v), min(h0, z_hi))
    a, b = max(z_lo, v), min(h0, z_hi)
    m_minus = 0.0
    if b > a:
        br = [a] + [k for k in _kinks(kink_funcs(), a, b) if a < k < b] + [b]
        m_minus = _quad_pieces(below, br, scale)
    # B_+: z in (max(z_lo, h0), min(z_hi, h_max))
    a, b = max(z_lo, h0), min(z_hi, float(f.h_max))
    m_plus = 0.0
    if b > a:
        br = [a] + [k for k in _kinks(kink_funcs(), a, b) if a < k < b]
        if a < v < b:
            br.append(v)
        br = sorted(set(br)) + [b]
        m_plus = _quad_pieces(above, br, scale)
    return m_plus, m_minus


def _columns_rotational(f: GraphFunction, h0: float, U: Ball):
    """Second slicing order for ``U`` centred on the axis: integrate vertical
    chord lengths over ``|x| = t``."""
    if np.any(U.xc != 0):
        raise DomainError("column order implemented for balls centred on the axis")
    n = f.n
    om = constants(n).omega
    if isinstance(f, Plane):
        fb = lambda t: f.height
        r_min = 0.0
    else:
        prof = f.profile
        r_min = prof.r_min
        v = float(prof.u(r_min))
        fb = lambda t: v if t <= r_min else float(prof.u(t))
    zc, rho = U.zc, U.rho

    def s(t):
        return math.sqrt(max(rho * rho - t * t, 0.0))

    def plus(t):
        return om * t ** (n - 1) * max(0.0, min(fb(t), zc + s(t)) - max(h0, zc - s(t)))

    def minus(t):
        return om * t ** (n - 1) * max(0.0, min(h0, zc + s(t)) - max(fb(t), zc - s(t)))

    funcs = [lambda t: fb(t) - zc - s(t), lambda t: fb(t) - zc + s(t), lambda t: fb(t) - h0]
    br = [0.0] + [k for k in _kinks(funcs, 0.0, rho) if 0 < k < rho]
    if 0 < r_min < rho:
        br.append(r_min)
    br = sorted(set(br)) + [rho]
    scale = float(ball_volume(n + 1, rho))
    return _quad_pieces(plus, br, scale), _quad_pieces(minus, br, scale)


def _mass_A(f: GraphFunction, U: Ball) -> float:
    n = f.n
    total = 0.0
    for ball in f.boundary:
        rz = float(U.slice_radius(ball.value))
        if rz > 0:
            d = float(np.linalg.norm(np.asarray(ball.center) - U.xc))
            total += float(ball_intersection_volume(n, ball.radius, rz, d))
    return total


# ---------------------------------------------------------------------------
# voxel columns (general n = 3)


def _column_lengths(fb, h0, U: Ball, pts):
    s = np.sqrt(np.maximum(U.rho ** 2 - np.sum((pts - U.xc) ** 2, axis=1), 0.0))
    top, bot = U.zc + s, U.zc - s
    plus = np.maximum(0.0, np.minimum(fb, top) - np.maximum(h0, bot))
    minus = np.maximum(0.0, np.minimum(h0, top) - np.maximum(fb, bot))
    return plus, minus


def _columns_grid(f: GraphFunction, h0: float, U: Ball, cells: int):
    n = f.n
    dx = 2.0 * U.rho / cells
    ax = (np.arange(cells) + 0.5) * dx - U.rho
    plus = minus = 0.0
    for i in range(cells):
        grids = np.meshgrid(*([ax] * (n - 1)), indexing="ij")
        pts = np.stack([np.full(grids[0].size, ax[i])] + [g.ravel() for g in grids], axis=1)
        pts = pts + U.xc
        inside = np.sum((pts - U.xc) ** 2, axis=1) < U.rho ** 2
        if not np.any(inside):
            continue
        pts = pts[inside]
        p, m = _column_lengths(f.extended(pts), h0, U, pts)
        plus += pairwise_sum(p)
        minus += pairwise_sum(m)
    return plus * dx ** n, minus * dx ** n


def flat_distance_upper(f: GraphFunction, h0: float, U: Ball | None = None,
                        rho: float | None = None, cells: int = 96, m: float | None = None,
                        ap: AsymptoticProfile | None = None) -> FlatDecomposition:
    """``M_U(A) + M_U(B_+) + M_U(B_-)`` for the graph of f and the plane at h0.

    Rotational graphs and planes use height slices (exact lens volumes
    under adaptive quadrature); other graphs use voxel columns at
    ``cells`` and ``2 cells`` combined by Richardson extrapolation.
    Passing the mass m also fills in :func:`theorem_bound` for U.
    """
    if U is None:
        if rho is None:
            raise DomainError("give U or rho")
        U = Ball.on_plane(f.n, h0, rho)
    if len(U.center) != f.n + 1:
        raise DomainError("ball centre must lie in R^{n+1}")
    mA = _mass_A(f, U)
    if isinstance(f, Plane) or getattr(f, "profile", None) is not None:
        mp, mm = _slices_rotational(f, h0, U)
        method = "height-slices"
    else:
        a = _columns_grid(f, h0, U, cells)
        b = _columns_grid(f, h0, U, 2 * cells)
        mp = (4.0 * b[0] - a[0]) / 3.0
        mm = (4.0 * b[1] - a[1]) / 3.0
        mp, mm = max(mp, 0.0), max(mm, 0.0)
        method = "voxel-columns"
    bound, terms = None, {}
    if m is not None:
        tb = theorem_bound(f.n, m, U.rho, ap, float(np.linalg.norm(U.xc)))
        bound = tb["bound"]
        terms = {k: tb[k] for k in ("A", "B_minus", "B_plus", "height")}
    return FlatDecomposition(mA, mp, mm, bound, terms, method)


def decomposition_crosscheck(f: GraphFunction, h0: float, U: Ball) -> dict:
    """``B_+`` and ``B_-`` from height slices and from vertical columns."""
    s = _slices_rotational(f, h0, U)
    c = _columns_rotational(f, h0, U)
    return {"slices": s, "columns": c,
            "rel_diff_plus": abs(s[0] - c[0]) / max(abs(c[0]), 1e-300),
            "rel_diff_minus": abs(s[1] - c[1]) / max(abs(c[1]), 1e-300)}


# ---------------------------------------------------------------------------
# theorem-side bound


def theorem_bound(n: int, m: float, rho: float, ap: AsymptoticProfile | None = None,
                  center_offset: float = 0.0) -> dict:
    """Right side of the flat-distance estimate with artifact constants.

    * fill-in: isoperimetry plus the Penrose bound give
      ``|Omega| <= beta (2m)^{n/(n-2)}``;
    * ``B_-``: below h_0 every sublevel set has ``V <= 2 omega (2m)^{(n-1)/(n-2)}``,
      so ``M(B_-) <= 2 rho beta 2^{n/(n-1)} (2m)^{n/(n-2)}``;
    * ``B_+``: ``M(B_+) <= beta rho^n * (height bound over B_{rho + offset})``.
    """
    n = check_dimension(n)
    if not (m > 0 and rho > 0):
        raise DomainError("need m > 0 and rho > 0")
    beta = constants(n).beta
    a_term = beta * (2.0 * m) ** (n / (n - 2))
    bm_term = 2.0 * rho * beta * 2.0 ** (n / (n - 1)) * (2.0 * m) ** (n / (n - 2))
    if n >= 5:
        height = comparison_constant(n) * m ** (1.0 / (n - 2))
        detail = {}
    else:
        if ap is None:
            raise DomainError("n = 3, 4 need an asymptotic profile")
        detail = lowdim_height_bound(n, ap, m, rho + center_offset)
        height = detail["bound"]
    bp_term = beta * rho ** n * height
    return {"bound": a_term + bm_term + bp_term, "A": a_term, "B_minus": bm_term,
            "B_plus": bp_term, "height": height, "height_detail": detail}


# ---------------------------------------------------------------------------
# test forms


@dataclass(frozen=True)
class BumpForm:
    """``eta(|X - X0|) dx^1 ^ ... ^ dx^n`` with ``eta(t) = (1 - t^2/s^2)^3``."""

    center: tuple
    radius: float

    def eta(self, t):
        u = 1.0 - (np.asarray(t) / self.radius) ** 2
        return np.where(u > 0, u ** 3, 0.0)

    @property
    def sup(self) -> float:
        return 1.0

    @property
    def sup_d(self) -> float:
        """``sup |eta'|``, attained at ``t = s/sqrt5``."""
        return 6.0 / math.sqrt(5.0) * 0.64 / self.radius


def standard_forms(n: int, h0: float, rho: float) -> list:
    """Three bumps of radius rho/2 centred on the axis at heights h0, h0 +- rho/3."""
    zero = (0.0,) * n
    return [BumpForm(zero + (h0 + dz,), rho / 2.0) for dz in (0.0, rho / 3.0, -rho / 3.0)]


def pairing(f: GraphFunction, h0: float, form: BumpForm) -> float:
    """``(M - Pi)(omega)`` with M the graph over the domain (fill-in excluded)."""
    n = f.n
    X0 = np.asarray(form.center, dtype=float)
    if np.any(X0[:-1] != 0):
        raise DomainError("forms must be centred on the axis")
    z0, s = X0[-1], form.radius
    om = constants(n).omega
    if isinstance(f, Plane) or getattr(f, "profile", None) is not None:
        r_min = 0.0 if isinstance(f, Plane) else f.profile.r_min
        fv = (lambda t: f.height) if isinstance(f, Plane) else (lambda t: float(f.profile.u(t)))

        def integrand(t):
            on_graph = form.eta(math.hypot(t, fv(t) - z0)) if t >= r_min else 0.0
            return om * t ** (n - 1) * (on_graph - form.eta(math.hypot(t, h0 - z0)))

        br = [0.0] + ([r_min] if 0 < r_min < s else []) + [s]
        return _quad_pieces(integrand, br, float(ball_volume(n, s)))
    cells = 128
    dx = 2.0 * s / cells
    ax = (np.arange(cells) + 0.5) * dx - s
    grids = np.meshgrid(*([ax] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    pts = pts[np.sum(pts ** 2, axis=1) < s * s]
    dom = f.in_domain(pts)
    vals = np.zeros(len(pts))
    vals[dom] = form.eta(np.hypot(np.linalg.norm(pts[dom], axis=1), f(pts[dom]) - z0))
    plane = form.eta(np.hypot(np.linalg.norm(pts, axis=1), h0 - z0))
    return pairwise_sum(vals - plane) * dx ** n


# ---------------------------------------------------------------------------
# convergence study


@dataclass(frozen=True)
class FamilyMember:
    graph: GraphFunction
    mass: float
    profile: AsymptoticProfile | None = None


@dataclass(frozen=True)
class StudyRow:
    m: float
    h0: float
    d_flat_upper: float
    bound: float
    mass_A: float
    mass_B_plus: float
    mass_B_minus: float
    pairings: tuple = ()
    pairing_ok: bool = True


@dataclass(frozen=True)
class StudyTable:
    rows: tuple
    rho: float
    monotone_decreasing: bool
    within_bound: bool
    ratio_final_initial: float
    exponent_fit: float | None
    bound_exponent_fit: float | None

    CSV_FIELDS = ("m", "d_flat_upper", "bound", "mass_A", "mass_B_plus", "mass_B_minus")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_FIELDS)
        for r in self.rows:
            w.writerow([format(getattr(r, k), ".17g") for k in self.CSV_FIELDS])
        return buf.getvalue()

    def to_json(self) -> str:
        d = {k: v for k, v in asdict(self).items() if k != "rows"}
        d["rows"] = [asdict(r) for r in self.rows]
        return json.dumps(d, indent=2, sort_keys=True)


def fit_exponent(m, values, tail: int | None = None) -> float | None:
    """Slope of ``log values`` against ``log m`` over the last ``tail`` points."""
    m = np.asarray(m, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(m) < 2:
        return None
    if tail:
        m, v = m[-tail:], v[-tail:]
    return float(np.polyfit(np.log(m), np.log(v), 1)[0])


def convergence_study(family: Sequence[FamilyMember], rho: float, forms: bool = True,
                      h0s: Sequence[float] | None = None, tail: int | None = 4,
                      threads: int = 1) -> StudyTable:
    """Flat upper bound and theorem bound for each member, normalised at h_0.

    Raises
    ------
    DomainError
        If the masses are not strictly decreasing.
    """
    from concurrent.futures import ThreadPoolExecutor

    from .levelsets import h_zero

    ms = [fm.mass for fm in family]
    if any(b >= a for a, b in zip(ms[:-1], ms[1:])):
        raise DomainError("masses must be strictly decreasing")

    def row(i):
        fm = family[i]
        f, m = fm.graph, fm.mass
        h0 = h_zero(f, m) if h0s is None else h0s[i]
        dec = flat_distance_upper(f, h0, rho=rho, m=m, ap=fm.profile)
        tb = dec.bound
        prs, ok = (), True
        if forms:
            prs = tuple(pairing(f, h0, w) for w in standard_forms(f.n, h0, rho))
            for p, w in zip(prs, standard_forms(f.n, h0, rho)):
                lim = dec.mass_A * w.sup + (dec.mass_B_plus + dec.mass_B_minus) * w.sup_d
                ok = ok and abs(p) <= lim * (1 + 1e-9) + 1e-12
        return StudyRow(m, h0, dec.total, tb, dec.mass_A, dec.mass_B_plus, dec.mass_B_minus,
                        prs, ok)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            rows = list(ex.map(row, range(len(family))))
    else:
        rows = [row(i) for i in range(len(family))]
    d = np.array([r.d_flat_upper for r in rows])
    b = np.array([r.bound for r in rows])
    mono = bool(np.all(np.diff(d) < 0))
    within = bool(np.all(d <= b))
    ratio = float(d[-1] / d[0]) if d[0] > 0 else math.nan
    return StudyTable(tuple(rows), float(rho), mono, within, ratio,
                      fit_exponent(ms, d, tail), fit_exponent(ms, b, tail))


def schwarzschild_family(n: int, masses: Sequence[float],
                         ap: AsymptoticProfile | None = None) -> list:
    """Schwarzschild graphs with the given masses (``ap`` is needed for n = 3, 4)."""
    from .schwarzschild import schwarzschild_graph

    if ap is not None:
        ap.validate(n, stability=True)
    return [FamilyMember(schwarzschild_graph(n, m), float(m), ap) for m in masses]


def rescaled_family(base: GraphFunction, base_mass: float, masses: Sequence[float],
                    ap: AsymptoticProfile | None = None) -> list:
    """Members ``lambda f(x / lambda)`` with ``lambda = (m / base_mass)^{1/(n-2)}``.

    For ``lambda <= 1`` the base parameters ``(r0, gamma)`` stay valid for
    every member when ``alpha <= 1``, so one profile serves the family
    uniformly; only the offset Lambda scales.
    """
    n = base.n
    if ap is not None:
        ap.validate(n, stability=True)
    out = []
    for m in masses:
        lam = (m / base_mass) ** (1.0 / (n - 2))
        if lam > 1.0:
            raise DomainError("rescaled family members must have mass <= base mass")
        mp = None
        if ap is not None:
            mp = AsymptoticProfile(ap.r0, ap.gamma, ap.decay_exponent, lam * ap.Lambda)
        out.append(FamilyMember(base.rescaled(1.0 / lam, 0.0), float(m), mp))
    return out
