from __future__ import annotations

import json

import numpy as np
import pytest

from graphstab.errors import DomainError, PreconditionError, RegularValueError
from graphstab.geometry import BumpedGraph, Plane, constants
from graphstab.mass import (adm_mass, lam_identity_residual, mass_flux, quasilocal_mass,
                            report_json)
from graphstab.schwarzschild import (MassProfile, SchwarzschildProfile, profile_from_mass,
                                     random_mass_profile, schwarzschild_graph)


def test_flux_equals_rotational_quasilocal_mass():
    # with R = 0 the flux through |x| = r is the level-set quasi-local mass
    f = schwarzschild_graph(3, 1.0)
    assert mass_flux(f, 100.0) == pytest.approx(1.0, abs=1e-3)
    for n in (4, 6):
        g = schwarzschild_graph(n, 1.5)
        assert mass_flux(g, 7.0) == pytest.approx(float(g.profile.quasilocal_mass(7.0)), rel=1e-10)


def test_flux_of_plane_vanishes():
    assert mass_flux(Plane(4, 2.0), 3.0) == 0.0


def test_flux_sphere_must_avoid_horizon():
    with pytest.raises(DomainError):
        mass_flux(schwarzschild_graph(3, 1.0), 1.5)


def test_flux_of_generated_profile_at_large_radius():
    mp = MassProfile.power_tail(0.25, [0.05], [2.0], 0.4)
    f = profile_from_mass(mp, 3).graph()
    assert mass_flux(f, 1e4) == pytest.approx(0.25, rel=1e-8)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
@pytest.mark.parametrize("m", [0.25, 1.0, 4.0])
def test_adm_mass_schwarzschild(n, m):
    s = adm_mass(schwarzschild_graph(n, m))
    assert s.converged_mass == pytest.approx(m, rel=1e-4)
    assert s.monotone
    assert s.convergence_certificate["method"] == "aitken"


def test_adm_mass_plane_and_infinite_mass():
    assert adm_mass(Plane(3)).converged_mass == 0.0
    f = profile_from_mass(MassProfile.logarithmic(0.05, 1.0), 3).graph()
    s = adm_mass(f, max_steps=12)
    assert s.converged_mass is None
    assert s.convergence_certificate["method"] == "not-converged"
    with pytest.raises(PreconditionError):
        lam_identity_residual(f, float(f.profile.u(3.0)), s)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_quasilocal_mass_schwarzschild(n):
    m = 0.6
    f = schwarzschild_graph(n, m)
    S = SchwarzschildProfile(n, m)
    for r in (1.01 * S.horizon_radius, 2.0, 30.0):
        h = float(S.u(r))
        assert quasilocal_mass(f, h) == pytest.approx(m, rel=1e-12)
        assert quasilocal_mass(f, h, closed_form=False) == pytest.approx(m, rel=1e-10)


def test_quasilocal_mass_plane_undefined():
    with pytest.raises((RegularValueError, DomainError)):
        quasilocal_mass(Plane(3, 0.0), 0.0)


def test_quasilocal_mass_generated_profile(rng):
    mp = random_mass_profile(rng, 4)
    prof = profile_from_mass(mp, 4)
    f = prof.graph()
    for r in (1.5 * mp.r_min, 6 * mp.r_min):
        assert quasilocal_mass(f, float(prof.u(r)), closed_form=False) == pytest.approx(
            float(mp(r)), rel=1e-8)


@pytest.mark.parametrize("n", [3, 5])
def test_lam_identity_schwarzschild(n):
    f = schwarzschild_graph(n, 1.0)
    rep = lam_identity_residual(f, float(f.profile.u(3.0)))
    assert abs(rep.interior_scalar_integral) <= 1e-8
    assert rep.quasilocal_term == pytest.approx(constants(n).c_n, rel=1e-10)
    assert rep.relative_residual <= 1e-8


@pytest.mark.parametrize("n", [3, 4, 6])
def test_lam_identity_generated_profile(n, rng):
    mp = random_mass_profile(rng, n)
    f = profile_from_mass(mp, n).graph()
    series = adm_mass(f)
    rep = lam_identity_residual(f, float(f.profile.u(2.0 * mp.r_min)), series)
    assert rep.interior_scalar_integral > 0
    assert rep.relative_residual <= 1e-6


def test_lam_identity_bumped_graph_by_rays():
    f = BumpedGraph(schwarzschild_graph(3, 0.5), 0.15, [3.2, 0.0, 0.0], 0.25)
    series = adm_mass(f)
    assert series.converged_mass == pytest.approx(0.5, rel=1e-6)
    rep = lam_identity_residual(f, 1.5, series)
    assert rep.relative_residual <= 1e-5
    assert rep.tail.certified


def test_report_json_roundtrip():
    f = schwarzschild_graph(3, 1.0)
    s = adm_mass(f)
    rep = lam_identity_residual(f, 2.0, s)
    d = json.loads(report_json(s, [rep]))
    assert d["mass"] == pytest.approx(1.0) and len(d["residuals"]) == 1
    assert set(d) >= {"radii", "flux", "mass", "monotone", "residuals"}
