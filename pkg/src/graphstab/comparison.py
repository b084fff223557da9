"""The comparison ODE ``Y' = F(Y)`` for rescaled level-set volumes, its blow-up
height, the height bounds it implies, and the round-level-set estimates used
in dimensions three and four.

With ``q = (n-2)/(n-1)``, ``a = omega^{-q}/2`` and ``K = 2 C_n/(3 sqrt 3)``,

    F(Y) = K (a Y^q - 1)^{3/2},   Y(0) = 2 * 2^{(n-1)/(n-2)} omega.

Substituting ``v = 1/(a Y^q)`` turns ``int dY/F`` into an incomplete-beta
type integral of ``v^{A-1} (1-v)^{-3/2}`` with ``A = 1/2 - 1/(n-2)``, which
is finite at ``v = 0`` exactly when n >= 5.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError, PreconditionError
from .geometry import GraphFunction, check_dimension, constants, quasi_random_points
from .schwarzschild import SchwarzschildProfile

STOP_FACTOR = 1e12


@dataclass(frozen=True)
class OdeConstants:
    n: int
    omega: float
    q: float
    a: float
    K: float
    y0: float
    A: float


@lru_cache(maxsize=None)
def ode_constants(n: int) -> OdeConstants:
    n = check_dimension(n)
    c = constants(n)
    q = (n - 2) / (n - 1)
    return OdeConstants(n, c.omega, q, 0.5 * c.omega ** -q,
                        2.0 * c.c_n / (3.0 * math.sqrt(3.0)),
                        2.0 * 2.0 ** ((n - 1) / (n - 2)) * c.omega,
                        0.5 - 1.0 / (n - 2))


def initial_value(n: int) -> float:
    """``Y(0) = 2 * 2^{(n-1)/(n-2)} omega``."""
    return ode_constants(n).y0


def ode_rhs(Y, n: int):
    """``F(Y) = C_n (2/(3 sqrt 3)) [(1/2)(Y/omega)^{(n-2)/(n-1)} - 1]^{3/2}``.

    Raises
    ------
    DomainError
        If the bracket is negative (Y below ``omega 2^{(n-1)/(n-2)}``).
    """
    k = ode_constants(n)
    Y = np.asarray(Y, dtype=float)
    b = k.a * Y ** k.q - 1.0
    tiny = 1e-14
    if np.any(b < -tiny):
        raise DomainError("Y below the domain of F")
    out = k.K * np.maximum(b, 0.0) ** 1.5
    return out if out.shape else float(out)


# ---------------------------------------------------------------------------
# blow-up height


def _tail_bracket(k: OdeConstants, v_s: float) -> tuple[float, float, float]:
    """``int_0^{v_s} v^{A-1}(1-v)^{-3/2} dv``: lower, estimate, upper."""
    lo = v_s ** k.A / k.A
    hi = lo * (1.0 - v_s) ** -1.5
    est = lo + 1.5 * v_s ** (k.A + 1) / (k.A + 1)
    return lo, min(max(est, lo), hi), hi


def _height_scale(k: OdeConstants) -> float:
    return k.a ** (-1.0 / k.q) / (k.K * k.q)


def blow_up_quadrature(n: int) -> float:
    """Blow-up height from ``int_{Y(0)}^inf dY/F(Y)`` in the variable v.

    Uses the algebraic-weight Gauss-Kronrod rule for the ``v^{A-1}`` end
    point singularity; ``(1-v)^{-3/2}`` is smooth on ``[0, 2^{-q}]``.
    """
    k = ode_constants(n)
    if k.A <= 0:
        raise DomainError(f"no finite blow-up for n = {n}")
    x = 2.0 ** -k.q
    val, _ = integrate.quad(lambda v: (1.0 - v) ** -1.5, 0.0, x, weight="alg",
                            wvar=(k.A - 1.0, 0.0), epsabs=0.0, epsrel=1e-13, limit=200)
    return _height_scale(k) * val


@dataclass(frozen=True)
class ComparisonSolution:
    """Numerical solution of the comparison ODE.

    ``blow_up_height`` is finite for n >= 5 (``None`` otherwise) with
    ``blow_up_bracket`` enclosing it; ``growth_fit`` certifies
    ``h <= c Y^{1/4}`` (n = 3) or ``h <= c log Y`` (n = 4) on the range.
    """

    n: int
    grid: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    blow_up_height: float | None
    blow_up_bracket: tuple | None
    growth_fit: dict | None
    _dense: object = field(default=None, repr=False, compare=False)

    def __call__(self, h):
        """Y at heights within the computed range (dense output)."""
        h = np.asarray(h, dtype=float)
        if np.any(h < self.grid[0]) or np.any(h > self.grid[-1]):
            raise DomainError("height outside the integrated range")
        return np.exp(self._dense(h.ravel())[0]).reshape(h.shape)

    def header(self) -> dict:
        return {"n": self.n, "blow_up_height": self.blow_up_height,
                "blow_up_bracket": list(self.blow_up_bracket) if self.blow_up_bracket else None,
                "growth_fit": self.growth_fit, "y0": float(self.Y[0]), "points": int(len(self.grid))}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "Y"])
        for h, y in zip(self.grid, self.Y):
            w.writerow([format(float(h), ".17g"), format(float(y), ".17g")])
        return buf.getvalue()

    def header_json(self) -> str:
        return json.dumps(self.header(), indent=2, sort_keys=True)


def _log_rhs(n):
    k = ode_constants(n)

    def rhs(h, z):
        Y = math.exp(z[0])
        b = max(k.a * Y ** k.q - 1.0, 0.0)
        return [k.K * b ** 1.5 / Y]

    return rhs


def integrate_comparison(n: int, h_budget: float | None = None, rtol: float = 1e-13,
                         points: int = 2001) -> ComparisonSolution:
    """Integrate ``Y' = F(Y)`` from ``Y(0)`` with DOP853 in ``log Y``.

    n >= 5 stops once ``Y > 1e12 omega`` and adds the remaining height
    analytically; n = 3, 4 integrate to ``h_budget`` and certify the growth
    envelope.

    Raises
    ------
    ConvergenceError
        If the integrator fails or the budget ends without a certificate.
    """
    n = check_dimension(n)
    k = ode_constants(n)
    z0 = math.log(k.y0)
    rhs = _log_rhs(n)
    if k.A > 0:
        z_stop = math.log(STOP_FACTOR * k.omega)
        event = lambda h, z: z[0] - z_stop
        event.terminal = True
        span = (0.0, h_budget if h_budget is not None else 1e6)
        sol = integrate.solve_ivp(rhs, span, [z0], method="DOP853", rtol=rtol,
                                  atol=1e-14, dense_output=True, events=event)
        if sol.status != 1:
            raise ConvergenceError("comparison ODE did not reach the stop value")
        h_s = float(sol.t_events[0][0])
        Y_s = math.exp(z_stop)
        v_s = 1.0 / (k.a * Y_s ** k.q)
        scale = _height_scale(k)
        lo, est, hi = _tail_bracket(k, v_s)
        # integrator error enters through h_s; rtol on a height of O(1)
        slack = 10.0 * rtol * max(1.0, h_s)
        bracket = (h_s + scale * lo - slack, h_s + scale * hi + slack)
        grid = np.linspace(0.0, h_s, points)
        Y = np.exp(sol.sol(grid)[0])
        Y[0] = k.y0
        return ComparisonSolution(n, grid, Y, h_s + scale * est, bracket, None, sol.sol)
    if h_budget is None:
        h_budget = 1e4 if n == 3 else 60.0
    sol = integrate.solve_ivp(rhs, (0.0, h_budget), [z0], method="DOP853", rtol=rtol,
                              atol=1e-14, dense_output=True)
    if sol.status != 0:
        raise ConvergenceError("comparison ODE integration failed")
    if n == 3:
        grid = np.concatenate([[0.0], np.geomspace(h_budget * 1e-6, h_budget, points - 1)])
    else:
        grid = np.linspace(0.0, h_budget, points)
    Y = np.exp(sol.sol(grid)[0])
    Y[0] = k.y0
    fit = growth_certificate(n, grid, Y)
    return ComparisonSolution(n, grid, Y, None, None, fit, sol.sol)


def growth_certificate(n: int, grid, Y) -> dict:
    """Coefficient c with ``h <= c Y^{1/4}`` (n = 3) or ``h <= c log Y`` (n = 4).

    c is the larger of the maximum ratio on the computed range and the
    asymptotic ratio ``4/(K a^{3/2})`` (n = 3) or ``1/(K a^{3/2})`` (n = 4),
    so it also covers heights beyond the range when the ratio increases.
    """
    k = ode_constants(n)
    s = k.K * k.a ** 1.5
    grid = np.asarray(grid)
    Y = np.asarray(Y)
    if n == 3:
        ratio = grid / Y ** 0.25
        limit = 4.0 / s
        sel = grid >= grid[-1] / 10.0
        slope = float(np.polyfit(np.log(grid[sel]), np.log(Y[sel]), 1)[0])
        extra = {"loglog_slope_final_decade": slope}
    elif n == 4:
        ratio = grid / np.log(Y)
        limit = 1.0 / s
        sel = grid >= grid[-1] / 2.0
        slope = float(np.polyfit(grid[sel], np.log(Y[sel]), 1)[0])
        extra = {"log_slope_final_half": slope, "log_slope_limit": s}
    else:
        raise DomainError("growth envelope applies to n = 3, 4")
    c_range = float(np.max(ratio))
    return {"kind": "Y^(1/4)" if n == 3 else "log Y", "coefficient": max(c_range, limit),
            "range_max": c_range, "asymptotic": limit, "range": [float(grid[0]), float(grid[-1])],
            **extra}


@lru_cache(maxsize=None)
def comparison_constant(n: int) -> float:
    """Artifact constant of the height bound: blow-up height (n >= 5) or the
    certified growth coefficient (n = 3, 4)."""
    sol = integrate_comparison(n)
    if sol.blow_up_height is not None:
        return sol.blow_up_height
    return sol.growth_fit["coefficient"]


# ---------------------------------------------------------------------------
# comparison with volume functions


@dataclass(frozen=True)
class SampledVolume:
    """Volume samples ``(h, V, V', regular)`` for the comparison lemma."""

    h: np.ndarray
    V: np.ndarray
    Vprime: np.ndarray
    regular: np.ndarray

    @classmethod
    def from_volume_function(cls, vf) -> "SampledVolume":
        return cls(vf.h, vf.V, vf.Vprime, vf.regular)


@dataclass(frozen=True)
class ComparisonVerdict:
    hypotheses_ok: bool
    hypothesis_failures: tuple
    conclusion_ok: bool
    min_margin: float
    margins: np.ndarray = field(repr=False, default=None)


def comparison_check(V, sol: ComparisonSolution, a: float, b: float,
                     rtol: float = 1e-9) -> ComparisonVerdict:
    """Check ``Y <= V`` on the samples in ``[a, b]`` and report hypotheses.

    Hypotheses: V nondecreasing, ``V(a) >= Y(a)``, ``V' >= F(V)`` at regular
    samples.  ``a`` should be a sample height of V.  Tolerances are relative
    (``rtol``) to the compared values.
    """
    n = sol.n
    h, Vv = np.asarray(V.h), np.asarray(V.V)
    Vp, reg = np.asarray(V.Vprime), np.asarray(V.regular, dtype=bool)
    sel = (h >= a) & (h <= b)
    if not np.any(sel):
        raise DomainError("no volume samples in [a, b]")
    h, Vv, Vp, reg = h[sel], Vv[sel], Vp[sel], reg[sel]
    fails = []
    if np.any(np.diff(Vv) < -rtol * np.abs(Vv[1:])):
        fails.append("V not nondecreasing")
    Y = sol(h)
    if Vv[0] < Y[0] * (1.0 - rtol):
        fails.append("V(a) < Y(a)")
    dom = Vv >= ode_constants(n).omega * 2.0 ** ((n - 1) / (n - 2))
    if not np.all(dom):
        fails.append("V below the domain of F")
    else:
        Fv = ode_rhs(Vv[reg], n)
        if np.any(Vp[reg] < Fv * (1.0 - rtol) - rtol):
            fails.append("V' < F(V) at a regular sample")
    margins = Vv - Y
    ok = bool(np.all(margins >= -rtol * np.maximum(np.abs(Y), 1.0)))
    return ComparisonVerdict(not fails, tuple(fails), ok, float(np.min(margins)), margins)


def synthetic_rough_volume(n: int, jumps, h_end: float, offset: float = 0.0,
                           points: int = 801) -> SampledVolume:
    """A nondecreasing V with jumps that solves ``V' = F(V)`` between them.

    ``jumps`` is a list of ``(height, size)`` with positive sizes.  V is
    discontinuous (so not differentiable) at the jump heights; those samples
    are marked irregular.
    """
    k = ode_constants(n)
    jumps = sorted((float(hj), float(s)) for hj, s in jumps)
    if any(s < 0 for _, s in jumps):
        raise DomainError("jumps must be nonnegative")
    cuts = [0.0] + [hj for hj, _ in jumps if 0 < hj < h_end] + [h_end]
    hs, Vs, Vps, regs = [], [], [], []
    v = k.y0 + offset
    for i in range(len(cuts) - 1):
        lo, hi = cuts[i], cuts[i + 1]
        if i > 0:
            v += dict(jumps)[lo]
        cnt = max(3, int(points * (hi - lo) / h_end))
        t = np.linspace(lo, hi, cnt)
        rhs = lambda _h, z: [ode_rhs(max(z[0], k.y0), n)]
        s = integrate.solve_ivp(rhs, (lo, hi), [v], method="DOP853", t_eval=t,
                                rtol=1e-12, atol=1e-12)
        vals = s.y[0]
        keep = slice(0, -1) if i < len(cuts) - 2 else slice(None)
        hs.append(t[keep])
        Vs.append(vals[keep])
        Vps.append(ode_rhs(vals[keep], n))
        r = np.ones(len(t[keep]), dtype=bool)
        if i > 0:
            r[0] = False
        regs.append(r)
        v = float(vals[-1])
    return SampledVolume(np.concatenate(hs), np.concatenate(Vs), np.concatenate(Vps),
                         np.concatenate(regs))


def rescale(f: GraphFunction, m: float, h0: float) -> GraphFunction:
    """``x -> m^{-1/(n-2)} (f(m^{1/(n-2)} x) - h0)``: a graph of mass one."""
    if not m > 0:
        raise DomainError("mass must be positive")
    return f.rescaled(m ** (1.0 / (f.n - 2)), h0)


def height_bound(n: int, m: float, V: float | None = None) -> float:
    """Upper bound for ``sup f - h_0`` (n >= 5) or ``h - h_0`` (n = 3, 4).

    n >= 5: ``C m^{1/(n-2)}``; n = 3: ``c sqrt(m) V^{1/4}``; n = 4:
    ``c sqrt(m) log(m^{-3/2} V)``, with C, c from :func:`comparison_constant`.
    """
    n = check_dimension(n)
    if not m > 0:
        raise DomainError("mass must be positive")
    C = comparison_constant(n)
    if n >= 5:
        return C * m ** (1.0 / (n - 2))
    if V is None:
        raise DomainError("the low-dimensional bound needs V(h)")
    if n == 3:
        return C * math.sqrt(m) * V ** 0.25
    return C * math.sqrt(m) * math.log(m ** -1.5 * V)


# ---------------------------------------------------------------------------
# dimensions three and four


@dataclass(frozen=True)
class AsymptoticProfile:
    """Parameters of a uniformly asymptotically Schwarzschild graph.

    ``decay_exponent`` is the exponent of ``gamma |x|^alpha``; it is a
    different quantity from the gradient threshold of the volume inequality.
    """

    r0: float
    gamma: float
    decay_exponent: float
    Lambda: float = 0.0

    def validate(self, n: int, stability: bool = False) -> "AsymptoticProfile":
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if not self.decay_exponent < 2.0 - n / 2.0:
            raise DomainError(f"decay exponent must be < {2 - n / 2}")
        if stability and n in (3, 4) and not self.decay_exponent < 0:
            raise DomainError("stability studies in n = 3, 4 need a negative decay exponent")
        return self


def r1_threshold(n: int, gamma: float, alpha: float, a: float, b: float, c: float,
                 m: float) -> float:
    """Radius beyond which ``gamma (c r)^alpha < S_m(b r) - S_m(a r)``.

    n = 3: ``max(C m^{-1/(1-2 alpha)}, 2m)`` with
    ``C = [gamma c^alpha / (sqrt8 (sqrt b - sqrt a))]^{2/(1-2 alpha)}``;
    n = 4: ``max(C m^{1/(2 alpha)}, sqrt(2m))`` with
    ``C = [gamma c^alpha / (sqrt2 log(b/a))]^{-1/alpha}``.
    """
    if not (gamma > 0 and c > 0 and m > 0 and 1.0 <= a < b):
        raise DomainError("need gamma, c, m > 0 and 1 <= a < b")
    if n == 3:
        if not alpha < 0.5:
            raise DomainError("n = 3 needs alpha < 1/2")
        e = 2.0 / (1.0 - 2.0 * alpha)
        C = (gamma * c ** alpha / (math.sqrt(8.0) * (math.sqrt(b) - math.sqrt(a)))) ** e
        return max(C * m ** (-1.0 / (1.0 - 2.0 * alpha)), 2.0 * m)
    if n == 4:
        if not alpha < 0:
            raise DomainError("n = 4 needs alpha < 0")
        C = (gamma * c ** alpha / (math.sqrt(2.0) * math.log(b / a))) ** (-1.0 / alpha)
        return max(C * m ** (1.0 / (2.0 * alpha)), math.sqrt(2.0 * m))
    raise DomainError("r1 threshold is defined for n = 3, 4")


@dataclass(frozen=True)
class RoundLevelSet:
    r1: float
    h1: float
    eps: float
    inner_margin: float      # min over |x| = r1 of (h1 - eps) - f
    outer_margin: float      # min over |x| = 3 r1 of f - (h1 + eps)


def round_levelset_data(n: int, ap: AsymptoticProfile, m: float, f: GraphFunction,
                        r1: float | None = None, directions: int = 256) -> RoundLevelSet:
    """``r_1``, ``h_1 = Lambda + S_m(2 r_1)`` and ``eps`` with sampled containments.

    ``r1`` overrides the recipe (used to probe where it breaks).

    Raises
    ------
    PreconditionError
        If ``eps <= 0`` or a sampled containment fails.
    """
    if n not in (3, 4):
        raise DomainError("round level sets are used for n = 3, 4")
    ap.validate(n)
    g, al = ap.gamma, ap.decay_exponent
    if r1 is None:
        r1 = max(r1_threshold(n, g, al, 1.0, 2.0, 1.0, m),
                 r1_threshold(n, g, al, 2.0, 3.0, 3.0, m), ap.r0)
    S = SchwarzschildProfile(n, m)
    s1, s2, s3 = (float(S.u(k * r1)) for k in (1, 2, 3))
    h1 = ap.Lambda + s2
    eps = min(s2 - s1 - g * r1 ** al, s3 - s2 - g * (3 * r1) ** al)
    if not eps > 0:
        raise PreconditionError(f"eps = {eps:.6g} <= 0 at r1 = {r1:.6g}")
    dirs = quasi_random_points(n, directions, 1.0, 1.0)
    inner = float(np.min(h1 - eps - f.extended(r1 * dirs)))
    outer = float(np.min(f.extended(3 * r1 * dirs) - (h1 + eps)))
    if inner < 0 or outer < 0:
        raise PreconditionError("sampled containment B_r1 in Omega_h1 in B_3r1 failed")
    return RoundLevelSet(float(r1), float(h1), float(eps), inner, outer)


@dataclass(frozen=True)
class EnvelopeVerdict:
    passed: bool
    min_slack: float
    worst_radius: float


def envelope_check(f: GraphFunction, m: float, r1: float, h1: float,
                   radii: int = 200, directions: int = 128, r_max_factor: float = 1e4,
                   tol: float = 1e-8) -> EnvelopeVerdict:
    """Check ``f(x) - h_1 <= S_m(|x|) - S_m(r_1)`` for sampled ``|x| >= r_1``.

    Raises
    ------
    PreconditionError
        If ``B_{r_1}`` is not inside ``Omega_{h_1}`` on samples.
    """
    n = f.n
    if n not in (3, 4):
        raise DomainError("the envelope applies to n = 3, 4")
    S = SchwarzschildProfile(n, m)
    if r1 < S.horizon_radius:
        raise DomainError("r1 below the Schwarzschild horizon")
    ball = quasi_random_points(n, 1024, 0.0, r1)
    if np.any(f.extended(ball) >= h1):
        raise PreconditionError("B_r1 is not contained in Omega_h1")
    dirs = quasi_random_points(n, directions, 1.0, 1.0)
    rr = np.geomspace(r1, r_max_factor * r1, radii)
    vals = f.extended(rr[:, None, None] * dirs[None])
    slack = (S.u(rr) - S.u(r1))[:, None] - (vals - h1)
    i = np.unravel_index(np.argmin(slack), slack.shape)
    ms = float(slack[i])
    return EnvelopeVerdict(ms >= -tol * max(1.0, abs(h1)), ms, float(rr[i[0]]))


def lowdim_height_bound(n: int, ap: AsymptoticProfile, m: float, rho: float) -> dict:
    """Bound on ``sup_{B_rho} f - h_0`` in n = 3, 4 with its terms.

    ``V(h_1) <= |dB_{3 r_1}|``, the growth bound turns this into
    ``h_1 - h_0 <= height_bound(n, m, |dB_{3r_1}|)``, and the envelope adds
    ``max(0, S_m(rho) - S_m(r_1))`` outside ``B_{r_1}``.
    """
    if n not in (3, 4):
        raise DomainError("the low-dimensional bound is for n = 3, 4")
    ap.validate(n)
    if not (m > 0 and rho > 0):
        raise DomainError("need m > 0 and rho > 0")
    g, al = ap.gamma, ap.decay_exponent
    r1 = max(r1_threshold(n, g, al, 1.0, 2.0, 1.0, m),
             r1_threshold(n, g, al, 2.0, 3.0, 3.0, m), ap.r0)
    V1 = constants(n).omega * (3.0 * r1) ** (n - 1)
    h_term = max(0.0, height_bound(n, m, V1))
    S = SchwarzschildProfile(n, m)
    env = max(0.0, float(S.u(rho)) - float(S.u(r1))) if rho > r1 else 0.0
    return {"bound": h_term + env, "height_term": h_term, "envelope_term": env,
            "r1": r1, "V_h1_bound": V1, "constant": comparison_constant(n)}
