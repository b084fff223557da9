"""ADM mass of graphs from the flux integral, and the identity relating it to
interior scalar curvature plus the quasi-local mass of a level set."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, PreconditionError, RegularValueError
from .geometry import (REGULAR_GRADIENT_TOL, GraphFunction, _levelset_H, constants,
                       quasi_random_points, scalar_curvature_reilly)
from .quadrature import (integrate_sphere_adaptive, pairwise_sum, panel_nodes,
                         sphere_rule)
from .surfaces import surface_integral

SPHERE_RTOL = 1e-10
SPHERE_ATOL = 1e-14


def flux_density(f: GraphFunction, x: np.ndarray) -> np.ndarray:
    """``sum_ij (f_ii f_j - f_ij f_i) x^j / |x| / (1 + |Df|^2)``."""
    j = f.jet(x, order=2)
    df, d2 = j.df, j.d2f
    nu = x / np.linalg.norm(x, axis=-1, keepdims=True)
    lap = np.einsum("...ii->...", d2)
    W = 1.0 + np.einsum("...i,...i->...", df, df)
    num = lap * np.einsum("...j,...j->...", df, nu) - np.einsum("...ij,...i,...j->...", d2, df, nu)
    return num / W


def _check_sphere(f: GraphFunction, r: float):
    for ball in f.boundary:
        d = float(np.linalg.norm(ball.center))
        if abs(d - r) <= ball.radius or d + ball.radius >= r:
            raise DomainError(f"sphere |x| = {r} meets the excised region")


def mass_flux(f: GraphFunction, r: float, rtol: float = SPHERE_RTOL) -> float:
    """Flux integral over ``|x| = r`` divided by ``C_n`` (its limit is the mass)."""
    r = float(r)
    if not r > 0:
        raise DomainError("radius must be positive")
    _check_sphere(f, r)
    val, _ = integrate_sphere_adaptive(lambda x: flux_density(f, x), f.n, r, k0=2,
                                       rtol=rtol, atol=SPHERE_ATOL * max(1.0, r ** (f.n - 2)))
    return val / constants(f.n).c_n


@dataclass(frozen=True)
class FluxSeries:
    """Flux values on the radius ladder ``r_k = r_start 2^k``.

    ``converged_mass`` is ``None`` when three successive values never agreed
    within the budget (the mass may be infinite).
    """

    radii: tuple
    flux_values: tuple
    converged_mass: float | None
    convergence_certificate: dict
    monotone: bool

    def to_record(self) -> dict:
        return {"radii": list(self.radii), "flux": list(self.flux_values),
                "mass": self.converged_mass, "monotone": self.monotone,
                "certificate": self.convergence_certificate}


def _aitken(a, b, c):
    d1, d2 = b - a, c - b
    den = d2 - d1
    if den == 0.0 or abs(d2) >= abs(d1) or d1 * d2 <= 0:
        return c
    return c - d2 * d2 / den


def adm_mass(f: GraphFunction, r0: float = 1.0, max_steps: int = 40,
             rtol: float = 1e-6, atol: float = 1e-8) -> FluxSeries:
    """Flux integral on a doubling radius ladder with Aitken extrapolation.

    The ladder starts at twice a diameter bound of ``Omega`` and ``B_{r0}``;
    convergence is declared after three successive values agree within
    ``max(atol, rtol |value|)``.
    """
    start = 2.0 * 2.0 * max(f.inner_radius(), r0)
    radii, vals = [], []
    mass = None
    cert = {"method": "none", "steps": 0}
    for k in range(max_steps):
        r = start * 2.0 ** k
        radii.append(r)
        vals.append(mass_flux(f, r))
        if len(vals) >= 3:
            a, b, c = vals[-3:]
            tol = max(atol, rtol * abs(c))
            if abs(b - a) <= tol and abs(c - b) <= tol:
                mass = _aitken(a, b, c)
                cert = {"method": "aitken", "steps": len(vals),
                        "last_increment": c - b, "extrapolation_shift": mass - c,
                        "tolerance": tol}
                break
    else:
        cert = {"method": "not-converged", "steps": len(vals),
                "last_increment": vals[-1] - vals[-2]}
    v = np.asarray(vals)
    qtol = np.maximum(SPHERE_ATOL, SPHERE_RTOL * np.abs(v[1:]))
    monotone = bool(np.all(np.diff(v) >= -10.0 * qtol))
    return FluxSeries(tuple(radii), tuple(vals), mass, cert, monotone)


# ---------------------------------------------------------------------------
# level-set quantities


def _quasilocal_density(s):
    df, d2 = s.jet.df, s.jet.d2f
    g2 = np.einsum("ij,ij->i", df, df)
    return g2 / (1.0 + g2) * _levelset_H(df, d2)


def quasilocal_mass(f: GraphFunction, h: float, closed_form: bool = True,
                    tol: float = REGULAR_GRADIENT_TOL) -> float:
    """``(1/C_n) int_{Sigma_h} |Df|^2/(1+|Df|^2) H_{Sigma_h}``.

    Rotational graphs use ``(r^{n-2}/2) u'^2/(1+u'^2)`` unless
    ``closed_form`` is false; other graphs integrate over the star-shaped
    level set.
    """
    prof = getattr(f, "profile", None)
    if prof is not None and closed_form:
        if not h < f.h_max:
            raise DomainError(f"level {h} is not below h_max")
        r = prof.radius_at(h)
        if float(prof.du(r, 1)) < tol:
            raise RegularValueError(f"|Df| below {tol:g} on the level set")
        return float(prof.quasilocal_mass(r))
    val, surf = surface_integral(f, h, _quasilocal_density)
    if val is None:
        raise RegularValueError("empty level set")
    if np.min(surf.grad_norm) < tol:
        raise RegularValueError(f"|Df| below {tol:g} on the level set")
    return float(val[0]) / constants(f.n).c_n


@dataclass(frozen=True)
class TailCertificate:
    """Bound on ``int_{|x| > R} |R_g| dx`` from a power fit ``|R_g| <= C r^{-s}``."""

    method: str            # "power-fit", "below-noise" or "failed"
    bound: float
    exponent: float | None
    certified: bool


def _tail_certificate(f: GraphFunction, R: float, noise: float,
                      directions: int = 64, samples: int = 12) -> TailCertificate:
    n = f.n
    om = constants(n).omega
    radii = np.geomspace(R / 8.0, R, samples)
    dirs = quasi_random_points(n, directions, 1.0, 1.0)
    vals = np.array([np.max(np.abs(scalar_curvature_reilly(f, r * dirs))) for r in radii])
    if np.all(vals <= noise):
        return TailCertificate("below-noise", 0.0, None, True)
    keep = vals > noise
    if keep.sum() < 3:
        return TailCertificate("below-noise", 0.0, None, True)
    lr, lv = np.log(radii[keep]), np.log(vals[keep])
    s = -float(np.polyfit(lr, lv, 1)[0])
    delta = s - n
    if not delta > 0.05:
        return TailCertificate("failed", math.inf, s, False)
    C = float(np.max(vals[keep] * radii[keep] ** s))
    return TailCertificate("power-fit", om * C * R ** (-delta) / delta, s, True)


@dataclass(frozen=True)
class QuasiLocalReport:
    """Both sides of ``C_n m = int_{outside Omega_h} R + int_{Sigma_h} ...``."""

    h: float
    mass: float
    interior_scalar_integral: float
    quasilocal_term: float
    identity_residual: float
    truncation_radius: float
    tail: TailCertificate
    c_n_mass: float

    @property
    def relative_residual(self) -> float:
        """Residual divided by ``C_n m`` (absolute residual when m = 0)."""
        return self.identity_residual / (abs(self.c_n_mass) or 1.0)

    def to_record(self) -> dict:
        d = asdict(self)
        d["relative_residual"] = self.relative_residual
        return d


def _radial_breaks(r_in: float, R: float, ratio: float = 1.2) -> np.ndarray:
    k = max(1, int(math.ceil(math.log(R / r_in) / math.log(ratio))))
    return np.geomspace(r_in, R, k + 1)


def _interior_rotational(f: GraphFunction, r_h: float, R: float) -> float:
    """``omega int_{r_h}^R rho^{n-1} R_g(rho) d rho`` along the first axis."""
    n = f.n
    br = _radial_breaks(r_h, R)
    nodes, wts = panel_nodes(br[:-1], br[1:], 20)
    rho = nodes.ravel()
    x = np.zeros((rho.size, n))
    x[:, 0] = rho
    Rg = scalar_curvature_reilly(f, x)
    vals = (Rg * rho ** (n - 1)).reshape(nodes.shape) * wts
    return constants(n).omega * pairwise_sum(vals)


def _ray_shell(f: GraphFunction, theta, w, r_in, r_out: float) -> float:
    """``sum_theta w int_{r(theta)}^{r_out} R_g rho^{n-1} d rho`` with 20-point panels."""
    n = f.n
    br = np.linspace(0.0, 1.0, 5)
    a = r_in[:, None] + (r_out - r_in)[:, None] * br[None, :-1]
    b = r_in[:, None] + (r_out - r_in)[:, None] * br[None, 1:]
    nodes, wts = panel_nodes(a, b, 20)
    pts = nodes[..., None] * theta[:, None, None, :]
    Rg = scalar_curvature_reilly(f, pts.reshape(-1, n)).reshape(nodes.shape)
    per_ray = np.sum(Rg * nodes ** (n - 1) * wts, axis=(1, 2))
    return pairwise_sum(w * per_ray)


def _interior_general(f: GraphFunction, h: float, R: float, k: int,
                      radial_ratio: float, scale: float) -> float:
    """``int_{Omega_h^c cap B_R} R_g`` for a star-shaped level set.

    The shell between ``Sigma_h`` and the sphere ``|x| = r_s`` enclosing it
    is integrated along rays, doubling the angular rule until two values
    agree; beyond ``r_s`` every radial Gauss node carries an adaptive
    sphere integral, so localised curvature (a bump) is resolved in angle
    wherever it sits.
    """
    from .surfaces import level_radii

    n = f.n
    prev = None
    while True:
        theta, w = sphere_rule(n, k)
        r_in = level_radii(f, h, theta)
        if r_in is None:
            raise RegularValueError("empty level set")
        r_s = 1.05 * float(np.max(r_in))
        shell = _ray_shell(f, theta, w, r_in, r_s)
        if prev is not None and abs(shell - prev[0]) <= 1e-9 * scale:
            break
        if 2 * k > 128:
            break
        prev, k = (shell, r_s), 2 * k
    br = _radial_breaks(r_s, R, 1.2)
    nodes, wts = panel_nodes(br[:-1], br[1:], 20)
    vals = np.empty(nodes.size)
    for i, rho in enumerate(nodes.ravel()):
        atol = 1e-13 * scale / rho ** (n - 1)
        vals[i] = integrate_sphere_adaptive(lambda x: scalar_curvature_reilly(f, x), n, rho,
                                            k0=4, rtol=1e-10, atol=atol, k_max=128)[0]
    outer = pairwise_sum(vals.reshape(nodes.shape) * wts)
    return shell + outer


def lam_identity_residual(f: GraphFunction, h: float, series: FluxSeries | None = None,
                          k: int = 16, radial_ratio: float = 1.05) -> QuasiLocalReport:
    """Evaluate both sides of the mass identity at level h.

    The interior integral is truncated at the last radius of the flux ladder;
    its tail is bounded by a power fit of ``|R|`` (see :class:`TailCertificate`).
    The quasi-local term is always integrated over the level set, never taken
    from the rotational closed form, so the two sides stay independent.

    Raises
    ------
    PreconditionError
        If the mass did not converge or the tail could not be certified.
    """
    n = f.n
    c_n = constants(n).c_n
    series = series or adm_mass(f)
    if series.converged_mass is None:
        raise PreconditionError("mass did not converge; identity is meaningless")
    m = series.converged_mass
    R = series.radii[-1]
    val, surf = surface_integral(f, h, _quasilocal_density)
    if val is None:
        raise RegularValueError("empty level set")
    if np.min(surf.grad_norm) < REGULAR_GRADIENT_TOL:
        raise RegularValueError("critical level")
    q = float(val[0])
    if getattr(f, "profile", None) is not None:
        r_h = float(np.linalg.norm(surf.points[0]))
        interior = _interior_rotational(f, r_h, R)
    else:
        interior = _interior_general(f, h, R, k, radial_ratio, c_n * max(abs(m), 1e-3))
    noise = 1e-10 * max(1.0, abs(m)) / R ** n
    tail = _tail_certificate(f, R, noise)
    if not tail.certified:
        raise PreconditionError("scalar-curvature tail could not be certified")
    resid = abs(c_n * m - interior - q)
    return QuasiLocalReport(float(h), float(m), float(interior), q, float(resid), float(R), tail,
                            float(c_n * m))


def report_json(series: FluxSeries, reports=()) -> str:
    """JSON record ``{radii, flux, mass, monotone, residuals}``."""
    rec = series.to_record()
    rec["residuals"] = [r.to_record() for r in reports]
    return json.dumps(rec, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, TailCertificate):
        return asdict(o)
    raise TypeError(type(o))
