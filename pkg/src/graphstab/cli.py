"""Scenario-driven command line front end.

A scenario is one JSON document::

    {
      "schema": 1,
      "dimension": 3,
      "family": {"kind": "schwarzschild", "m": 1.0},
      "asymptotic": {"r0": 1.0, "gamma": 1.0, "alpha": -0.5, "Lambda": 0.0},
      "study": {"masses": [1, 0.5, 0.25], "rho": 10.0, "levels": 20},
      "tolerances": {"mass_rtol": 1e-6}
    }

Family kinds: ``schwarzschild`` (``m``), ``mass-profile`` (``samples``
with ``r``/``m`` lists, ``power_tail`` with ``m_total``/``coeffs``/
``powers``/``r_min``, or ``csv``), ``schwarzschild-plus-bump`` (``m`` and
``bump`` with ``amplitude``/``center``/``width``) and
``explicit-rotational`` (``u`` as an expression in ``r``, ``r_min``,
optional ``u_inf`` and ``horizon``).

Every run writes ``summary.json`` with one verdict per asserted invariant
plus the subcommand's table.  Exit status: 0 all invariants pass,
1 an invariant fails, 2 the scenario does not parse or validate,
3 a numerical procedure did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .comparison import (AsymptoticProfile, blow_up_quadrature, integrate_comparison)
from .errors import ConvergenceError, DomainError, GraphStabError
from .flatnorm import (Ball, convergence_study, flat_distance_upper, rescaled_family,
                       schwarzschild_family)
from .geometry import (BumpedGraph, GraphFunction, RadialGraph, default_sample_shell,
                       quasi_random_points, scalar_curvature_gauss, scalar_curvature_reilly)
from .levelsets import (h_zero, level_volume, volume2_residual, volume_function,
                        volume_inequality_residual, volume_threshold)
from .mass import adm_mass, lam_identity_residual
from .schwarzschild import (ExplicitProfile, MassProfile, profile_from_mass,
                            schwarzschild_graph)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVARIANT, EXIT_PARSE, EXIT_NONCONVERGENCE = 0, 1, 2, 3
ENV_OUTPUT_DIR = "GRAPHSTAB_OUTPUT_DIR"
FAMILY_KINDS = ("schwarzschild", "mass-profile", "schwarzschild-plus-bump",
                "explicit-rotational")
DEFAULT_TOLERANCES = {"mass_rtol": 1e-6, "curvature_agreement": 1e-6,
                      "curvature_floor": 1e-8, "lam_relative": 1e-5,
                      "mass_relative": 1e-4, "blow_up_agreement": 1e-6}


class ScenarioError(Exception):
    """The scenario file does not parse or validate."""


@dataclass
class Scenario:
    dimension: int
    family: dict
    asymptotic: AsymptoticProfile | None = None
    study: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0


def _positive(x, name):
    if not isinstance(x, (int, float)) or isinstance(x, bool) or not x > 0:
        raise ScenarioError(f"{name} must be a positive number")
    return float(x)


def parse_scenario(doc: dict, dimension: int | None = None,
                   tol: float | None = None) -> Scenario:
    """Validate a decoded scenario document."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ScenarioError(f"schema must be {SCHEMA_VERSION}, got {doc.get('schema')!r}")
    n = dimension if dimension is not None else doc.get("dimension")
    if not isinstance(n, int) or isinstance(n, bool) or n < 3:
        raise ScenarioError("dimension must be an integer >= 3")
    fam = doc.get("family")
    if not isinstance(fam, dict) or fam.get("kind") not in FAMILY_KINDS:
        raise ScenarioError(f"family.kind must be one of {FAMILY_KINDS}")
    ap = None
    # the asymptotic profile only enters the n = 3, 4 height bounds
    if doc.get("asymptotic") is not None and n < 5:
        a = doc["asymptotic"]
        try:
            ap = AsymptoticProfile(_positive(a["r0"], "asymptotic.r0"),
                                   _positive(a["gamma"], "asymptotic.gamma"),
                                   float(a["alpha"]), float(a.get("Lambda", 0.0)))
            ap.validate(n)
        except (KeyError, TypeError, DomainError) as e:
            raise ScenarioError(f"asymptotic: {e}") from None
    study = doc.get("study", {})
    if not isinstance(study, dict):
        raise ScenarioError("study must be an object")
    if "masses" in study:
        ms = study["masses"]
        if not isinstance(ms, list) or not ms:
            raise ScenarioError("study.masses must be a non-empty list")
        ms = [_positive(m, "study.masses[]") for m in ms]
        if any(b >= a for a, b in zip(ms[:-1], ms[1:])):
            raise ScenarioError("study.masses must be strictly decreasing")
    if "rho" in study:
        _positive(study["rho"], "study.rho")
    if "levels" in study:
        if not isinstance(study["levels"], int) or study["levels"] < 2:
            raise ScenarioError("study.levels must be an integer >= 2")
    tols = dict(DEFAULT_TOLERANCES)
    user = doc.get("tolerances", {})
    if not isinstance(user, dict):
        raise ScenarioError("tolerances must be an object")
    for k, v in user.items():
        if k not in DEFAULT_TOLERANCES:
            raise ScenarioError(f"unknown tolerance {k!r}")
        tols[k] = _positive(v, f"tolerances.{k}")
    if tol is not None:
        tols["mass_rtol"] = _positive(tol, "--tol")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        raise ScenarioError("seed must be an integer")
    return Scenario(n, fam, ap, study, tols, seed)


def load_scenario(path, dimension: int | None = None, tol: float | None = None) -> Scenario:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ScenarioError(f"cannot read scenario: {e}") from None
    return parse_scenario(doc, dimension, tol)


# ---------------------------------------------------------------------------
# families


class NonmonotoneSamples(GraphStabError):
    """Mass samples decrease: the generated graph would have R < 0."""

    def __init__(self, r, m, n):
        i = int(np.argmin(np.diff(m)))
        slope = (m[i + 1] - m[i]) / (r[i + 1] - r[i])
        rr = 0.5 * (r[i] + r[i + 1])
        self.scalar_curvature = 2.0 * (n - 1) * slope / rr ** (n - 1)
        self.radius = rr
        super().__init__(f"mass samples decrease near r = {rr:.6g}: R = "
                         f"{self.scalar_curvature:.6g} < 0")


def _mass_profile(fam: dict, n: int) -> MassProfile:
    if "samples" in fam:
        s = fam["samples"]
        r, m = np.asarray(s["r"], dtype=float), np.asarray(s["m"], dtype=float)
        if len(r) == len(m) and len(r) > 1 and np.any(np.diff(m) < 0):
            raise NonmonotoneSamples(r, m, n)
        return MassProfile.from_samples(r, m)
    if "power_tail" in fam:
        p = fam["power_tail"]
        return MassProfile.power_tail(float(p["m_total"]), p["coeffs"], p["powers"],
                                      float(p["r_min"]))
    if "csv" in fam:
        return MassProfile.from_csv(fam["csv"])
    raise ScenarioError("mass-profile family needs samples, power_tail or csv")


def _explicit_profile(fam: dict, n: int) -> ExplicitProfile:
    import sympy

    r = sympy.Symbol("r", positive=True)
    try:
        expr = sympy.sympify(fam["u"], locals={"r": r})
    except (sympy.SympifyError, KeyError, TypeError) as e:
        raise ScenarioError(f"explicit-rotational u: {e}") from None
    if expr.free_symbols - {r}:
        raise ScenarioError("u may only depend on r")
    fns = [sympy.lambdify(r, sympy.diff(expr, r, k), "numpy") for k in range(4)]

    def u(x):
        return np.broadcast_to(fns[0](x), np.shape(x)).astype(float)

    def du(x, k=1):
        return np.broadcast_to(fns[k](x), np.shape(x)).astype(float)

    u_inf = fam.get("u_inf")
    return ExplicitProfile(n, u, du, float(fam.get("r_min", 0.0)),
                           math.inf if u_inf is None else float(u_inf),
                           bool(fam.get("horizon", False)))


def build_graph(sc: Scenario) -> tuple[GraphFunction, float | None]:
    """The scenario's graph and its mass when known in closed form."""
    fam, n = sc.family, sc.dimension
    try:
        kind = fam["kind"]
        if kind == "schwarzschild":
            m = _positive(fam["m"], "family.m")
            return schwarzschild_graph(n, m), m
        if kind == "schwarzschild-plus-bump":
            m = _positive(fam["m"], "family.m")
            b = fam["bump"]
            g = BumpedGraph(schwarzschild_graph(n, m), float(b["amplitude"]),
                            [float(c) for c in b["center"]], _positive(b["width"], "bump.width"))
            return g, m
        if kind == "mass-profile":
            mp = _mass_profile(fam, n)
            prof = profile_from_mass(mp, n)
            m = mp.m_total if math.isfinite(mp.m_total) else None
            return RadialGraph(prof), m
        return RadialGraph(_explicit_profile(fam, n)), None
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, DomainError):
            raise
        raise ScenarioError(f"family: {e!r}") from None


# ---------------------------------------------------------------------------
# results


@dataclass
class Invariant:
    name: str
    passed: bool
    value: float | None
    threshold: float | None
    detail: str = ""

    def record(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": _num(self.value),
                "threshold": _num(self.threshold), "detail": self.detail}


@dataclass
class Result:
    invariants: list = field(default_factory=list)
    records: dict = field(default_factory=dict)
    table: tuple = ((), ())          # (header, rows)

    def check(self, name, passed, value=None, threshold=None, detail=""):
        self.invariants.append(Invariant(name, bool(passed), value, threshold, detail))

    @property
    def ok(self) -> bool:
        return all(i.passed for i in self.invariants)


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def table_json(header, rows) -> str:
    recs = [{k: (_num(v) if isinstance(v, (float, np.floating)) else
                 (bool(v) if isinstance(v, (bool, np.bool_)) else v))
             for k, v in zip(header, row)} for row in rows]
    return json.dumps(recs, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# subcommands


def _default_levels(f: GraphFunction, count: int) -> np.ndarray:
    lo, _ = default_sample_shell(f)
    r_in = max(f.inner_radius(), lo)
    radii = np.geomspace(1.2 * r_in, 20.0 * r_in, count)
    x = np.zeros((count, f.n))
    x[:, 0] = radii
    return np.asarray(f(x), dtype=float)


def run_verify(sc: Scenario, threads: int) -> Result:
    """Curvature cross-check, sign of R, mass convergence and, for rotational
    graphs, the mass identity and volume inequalities."""
    res = Result()
    n, t = sc.dimension, sc.tolerances
    try:
        f, m_known = build_graph(sc)
    except NonmonotoneSamples as e:
        res.check("scalar_curvature_nonnegative", False, e.scalar_curvature,
                  -t["curvature_floor"], str(e))
        return res
    lo, hi = default_sample_shell(f)
    pts = quasi_random_points(n, 200, lo, hi)
    pts = pts[f.in_domain(pts)]
    R1, R2 = scalar_curvature_reilly(f, pts), scalar_curvature_gauss(f, pts)
    scale = 1.0 + float(np.max(np.abs(R2)))
    agree = float(np.max(np.abs(R1 - R2))) / scale
    res.check("scalar_curvature_agreement", agree <= t["curvature_agreement"], agree,
              t["curvature_agreement"], "max |Reilly - Gauss| / (1 + max |R|)")
    i = int(np.argmin(R1))
    rmin = float(R1[i])
    res.check("scalar_curvature_nonnegative", rmin >= -t["curvature_floor"] * scale, rmin,
              -t["curvature_floor"] * scale,
              f"R < 0 at |x| = {np.linalg.norm(pts[i]):.6g}" if rmin < 0 else "")
    rows = []
    series = adm_mass(f, rtol=t["mass_rtol"])
    if series.converged_mass is None:
        raise ConvergenceError(f"flux series did not converge after {len(series.radii)} radii")
    m = series.converged_mass
    res.records["mass"] = m
    res.check("flux_monotone", series.monotone, None, None, "nondecreasing within 10x quadrature tol")
    if m_known is not None:
        rel = abs(m - m_known) / m_known
        res.check("mass_recovered", rel <= t["mass_relative"], rel, t["mass_relative"])
    if getattr(f, "profile", None) is not None and rmin >= -t["curvature_floor"] * scale:
        levels = _default_levels(f, int(sc.study.get("levels", 5)))
        for h in levels:
            rep = lam_identity_residual(f, float(h), series)
            rows.append(("lam_identity", float(h), rep.relative_residual, t["lam_relative"]))
        worst = max(r[2] for r in rows)
        res.check("lam_identity", worst <= t["lam_relative"], worst, t["lam_relative"])
        if m > 0:
            h0 = h_zero(f, m)
            res.records["h0"] = h0
            alphas = np.geomspace(1e-2, 1e2, 25)
            e3 = e4 = math.inf
            for h in levels[levels > h0]:
                slc = level_volume(f, float(h))
                if not slc.regular or slc.volume <= volume_threshold(n, m) / 2 ** (1 / (n - 2)):
                    continue
                r3 = float(np.min(volume_inequality_residual(f, float(h), alphas, m, slc,
                                                             check=False)))
                r4 = volume2_residual(f, float(h), m, slc)
                rows.append(("split_min_over_alpha", float(h), r3, 0.0))
                rows.append(("volume_growth", float(h), r4, 0.0))
                e3, e4 = min(e3, r3), min(e4, r4)
            if math.isfinite(e3):
                res.check("volume_inequality_alpha", e3 >= 0, e3, 0.0)
                res.check("volume_inequality_optimal", e4 >= 0, e4, 0.0)
    res.table = (("check", "h", "value", "threshold"), rows)
    return res


def run_mass(sc: Scenario, threads: int) -> Result:
    res = Result()
    f, m_known = build_graph(sc)
    series = adm_mass(f, rtol=sc.tolerances["mass_rtol"])
    res.records = series.to_record()
    res.table = (("r", "flux"), list(zip(series.radii, series.flux_values)))
    if series.converged_mass is None:
        raise ConvergenceError("flux series did not converge (mass may be infinite)")
    res.check("flux_monotone", series.monotone, None, None)
    if m_known is not None:
        rel = abs(series.converged_mass - m_known) / m_known
        res.check("mass_recovered", rel <= sc.tolerances["mass_relative"], rel,
                  sc.tolerances["mass_relative"])
    return res


def run_levelsets(sc: Scenario, threads: int) -> Result:
    res = Result()
    f, m = build_graph(sc)
    count = int(sc.study.get("levels", 20))
    if "h_range" in sc.study:
        a, b = (float(x) for x in sc.study["h_range"])
        levels = np.linspace(a, b, count)
    else:
        levels = _default_levels(f, count)
    vf = volume_function(f, levels, sc.study.get("method", "auto"), threads)
    res.records["h_max"] = _num(vf.h_max)
    if m:
        res.records["h0"] = _num(h_zero(f, m, method=sc.study.get("method", "auto")))
    res.check("volume_monotone", vf.monotone_verdict, None, None)
    rows = [(s.h, s.volume, s.vprime, s.regular, s.outward_minimizing_verified)
            for s in vf.samples]
    res.table = (("h", "V", "Vprime", "regular", "convex_verified"), rows)
    return res


def run_ode(sc: Scenario, threads: int) -> Result:
    res = Result()
    n = sc.dimension
    sol = integrate_comparison(n)
    res.records = sol.header()
    if n >= 5:
        q = blow_up_quadrature(n)
        rel = abs(q - sol.blow_up_height) / q
        res.records["blow_up_quadrature"] = q
        res.check("blow_up_estimators_agree", rel <= sc.tolerances["blow_up_agreement"], rel,
                  sc.tolerances["blow_up_agreement"])
    else:
        g = sol.growth_fit
        if n == 3:
            slope = g["loglog_slope_final_decade"]
            res.check("growth_loglog_slope", abs(slope - 4.0) <= 0.05, slope, 4.0)
        else:
            slope = g["log_slope_final_half"]
            rel = abs(slope - g["log_slope_limit"]) / g["log_slope_limit"]
            res.check("growth_exponential_rate", rel <= 1e-2, slope, g["log_slope_limit"])
    res.table = (("h", "Y"), list(zip(sol.grid.tolist(), sol.Y.tolist())))
    return res


def _center(sc: Scenario, h0: float):
    c = sc.study.get("center")
    if c is None:
        return Ball.on_plane(sc.dimension, h0, float(sc.study.get("rho", 10.0)))
    if len(c) != sc.dimension + 1:
        raise ScenarioError("study.center must have dimension + 1 entries")
    return Ball(tuple(float(x) for x in c), float(sc.study.get("rho", 10.0)))


def run_flatnorm(sc: Scenario, threads: int) -> Result:
    res = Result()
    f, m = build_graph(sc)
    if m is None:
        series = adm_mass(f, rtol=sc.tolerances["mass_rtol"])
        if series.converged_mass is None:
            raise ConvergenceError("mass did not converge")
        m = series.converged_mass
    h0 = h_zero(f, m, method=sc.study.get("method", "auto"))
    U = _center(sc, h0)
    dec = flat_distance_upper(f, h0, U, m=m, ap=sc.asymptotic
                              if sc.dimension < 5 else None)
    res.records = {"m": m, "h0": h0, "rho": U.rho, "center": list(U.center),
                   "method": dec.method, "per_term": dec.per_term}
    res.check("masses_nonnegative", min(dec.mass_A, dec.mass_B_plus, dec.mass_B_minus) >= 0,
              min(dec.mass_A, dec.mass_B_plus, dec.mass_B_minus), 0.0)
    res.check("within_theorem_bound", dec.total <= dec.bound, dec.total, dec.bound)
    res.table = (("m", "h0", "d_flat_upper", "bound", "mass_A", "mass_B_plus", "mass_B_minus"),
                 [(m, h0, dec.total, dec.bound, dec.mass_A, dec.mass_B_plus, dec.mass_B_minus)])
    return res


def run_study(sc: Scenario, threads: int) -> Result:
    res = Result()
    n = sc.dimension
    if "masses" not in sc.study:
        raise ScenarioError("study needs a mass ladder (study.masses)")
    masses = [float(m) for m in sc.study["masses"]]
    rho = float(sc.study.get("rho", 10.0))
    kind = sc.family["kind"]
    if n < 5 and sc.asymptotic is None:
        raise ScenarioError("n = 3, 4 studies need an asymptotic profile")
    ap = sc.asymptotic if n < 5 else None
    if kind == "schwarzschild":
        family = schwarzschild_family(n, masses, ap)
    elif kind == "mass-profile":
        base, m_base = build_graph(sc)
        if m_base is None:
            raise ScenarioError("mass-profile study needs a finite total mass")
        family = rescaled_family(base, m_base, masses, ap)
    else:
        raise ScenarioError(f"studies support schwarzschild and mass-profile, not {kind}")
    st = convergence_study(family, rho, threads=threads)
    res.records = {"rho": rho, "ratio_final_initial": st.ratio_final_initial,
                   "exponent_fit": st.exponent_fit, "bound_exponent_fit": st.bound_exponent_fit,
                   "h0": [r.h0 for r in st.rows]}
    res.check("monotone_decreasing", st.monotone_decreasing, None, None)
    res.check("within_theorem_bound", st.within_bound, None, None)
    res.check("pairings_bounded", all(r.pairing_ok for r in st.rows), None, None)
    if "max_ratio" in sc.study:
        lim = float(sc.study["max_ratio"])
        res.check("final_over_initial", st.ratio_final_initial <= lim,
                  st.ratio_final_initial, lim)
    if "expected_exponent" in sc.study:
        e = float(sc.study["expected_exponent"])
        err = abs(st.exponent_fit - e)
        res.check("mass_exponent", err <= 0.05, st.exponent_fit, e)
    res.table = (StudyTableHeader, [(r.m, r.d_flat_upper, r.bound, r.mass_A, r.mass_B_plus,
                                     r.mass_B_minus) for r in st.rows])
    return res


StudyTableHeader = ("m", "d_flat_upper", "bound", "mass_A", "mass_B_plus", "mass_B_minus")

COMMAND_HELP = {
    "verify": "curvature cross-check, sign of R, mass ladder and level-set inequalities",
    "mass": "ADM mass by flux extrapolation",
    "levelsets": "level-set volumes, mean curvature and V' on a height grid",
    "ode": "comparison ODE solution and blow-up height",
    "flatnorm": "flat-distance decomposition against the plane at h0",
    "study": "flat-distance convergence study over a mass family",
}

COMMANDS = {"verify": run_verify, "mass": run_mass, "levelsets": run_levelsets,
            "ode": run_ode, "flatnorm": run_flatnorm, "study": run_study}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphstab", description=__doc__.split("\n")[0])
    p.add_argument("--dimension", type=int, default=None, help="override the scenario dimension")
    p.add_argument("--tol", type=float, default=None, help="relative tolerance of the mass ladder")
    p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    p.add_argument("--output-dir", default=None,
                   help=f"output directory (default ${ENV_OUTPUT_DIR} or ./graphstab-out)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name, help=COMMAND_HELP[name])
        s.add_argument("scenario", help="scenario JSON file")
    return p


def _write(outdir: Path, name: str, text: str):
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / name, "w", newline="\n") as fh:
        fh.write(text)


def _diagnostic(status: int, kind: str, message: str) -> dict:
    return {"status": status, "error": kind, "message": message}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    outdir = Path(args.output_dir or os.environ.get(ENV_OUTPUT_DIR) or "graphstab-out")
    summary = {"schema": SCHEMA_VERSION, "command": args.command}
    try:
        if args.threads < 1:
            raise ScenarioError("--threads must be >= 1")
        sc = load_scenario(args.scenario, args.dimension, args.tol)
        summary["dimension"] = sc.dimension
        res = COMMANDS[args.command](sc, args.threads)
    except ScenarioError as e:
        diag = _diagnostic(EXIT_PARSE, "parse", str(e))
    except ConvergenceError as e:
        diag = _diagnostic(EXIT_NONCONVERGENCE, "non-convergence", str(e))
    except GraphStabError as e:
        diag = _diagnostic(EXIT_INVARIANT, type(e).__name__, str(e))
    else:
        status = EXIT_OK if res.ok else EXIT_INVARIANT
        header, rows = res.table
        if header:
            if args.format == "csv":
                _write(outdir, f"{args.command}.csv", table_csv(header, rows))
            else:
                _write(outdir, f"{args.command}.json", table_json(header, rows) + "\n")
        summary.update({"status": status,
                        "invariants": [i.record() for i in res.invariants],
                        "records": res.records})
        _write(outdir, "summary.json",
               json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n")
        for inv in res.invariants:
            print(f"{'PASS' if inv.passed else 'FAIL'} {inv.name}"
                  + (f" value={_fmt(inv.value)}" if inv.value is not None else ""))
        return status
    summary.update(diag)
    _write(outdir, "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(json.dumps(diag, sort_keys=True), file=sys.stderr)
    return diag["status"]


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return _num(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float):
        return _num(o)
    return str(o)


if __name__ == "__main__":
    sys.exit(main())
