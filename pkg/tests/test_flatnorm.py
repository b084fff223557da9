from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from scipy.stats import qmc

from graphstab.comparison import AsymptoticProfile
from graphstab.errors import DomainError
from graphstab.flatnorm import (Ball, BumpForm, FamilyMember, convergence_study,
                                decomposition_crosscheck, flat_distance_upper, pairing,
                                schwarzschild_family, standard_forms, theorem_bound)
from graphstab.geometry import BumpedGraph, Plane, RadialGraph, constants
from graphstab.levelsets import h_zero
from graphstab.schwarzschild import (MassProfile, profile_from_mass, schwarzschild_graph,
                                     schwarzschild_sup)


def slab_oracle(n, rho, zc, lo, hi):
    """``|{lo < z < hi} cap B_rho((0, zc))|`` in R^{n+1} by mpmath quadrature."""
    beta = mpmath.pi ** (mpmath.mpf(n) / 2) / mpmath.gamma(mpmath.mpf(n) / 2 + 1)
    a, b = max(lo, zc - rho), min(hi, zc + rho)
    val = mpmath.quad(lambda z: beta * (rho ** 2 - (z - zc) ** 2) ** (mpmath.mpf(n) / 2), [a, zc, b]
                      if a < zc < b else [a, b])
    return float(val)


@pytest.mark.parametrize("n", [3, 5])
def test_identical_planes_give_zero(n):
    d = flat_distance_upper(Plane(n, 0.7), 0.7, rho=3.0)
    assert d.total == 0.0
    assert pairing(Plane(n, 0.7), 0.7, standard_forms(n, 0.7, 3.0)[1]) == 0.0


@pytest.mark.parametrize("n", [3, 4, 6])
def test_plane_slab_against_oracle(n):
    h0, delta, rho = 0.2, 0.35, 2.0
    U = Ball(tuple([0.0] * n) + (h0 + delta / 2,), rho)
    d = flat_distance_upper(Plane(n, h0 + delta), h0, U)
    expected = slab_oracle(n, rho, h0 + delta / 2, h0, h0 + delta)
    assert d.mass_A == 0.0 and d.mass_B_minus == pytest.approx(0.0, abs=1e-12)
    assert d.mass_B_plus == pytest.approx(expected, rel=1e-9)
    assert d.total <= constants(n).beta * rho ** n * delta
    below = flat_distance_upper(Plane(n, h0 - delta), h0, U)
    assert below.mass_B_minus == pytest.approx(slab_oracle(n, rho, h0 + delta / 2, h0 - delta, h0),
                                               rel=1e-9)


def _mc_volume(f, h0, rho, box_lo, box_hi, sign, points=2 ** 16):
    """Quasi-Monte Carlo volume of ``B_+`` (sign 1) or ``B_-`` (sign -1) in the box."""
    n = f.n
    s = qmc.Sobol(n + 1, scramble=True, seed=7).random(points)
    p = box_lo + s * (box_hi - box_lo)
    x, z = p[:, :n], p[:, n]
    inside = np.sum(x ** 2, axis=1) + (z - h0) ** 2 < rho ** 2
    fb = f.extended(x)
    hit = (z > h0) & (z < fb) if sign > 0 else (z < h0) & (z > fb)
    return np.count_nonzero(inside & hit) * np.prod(box_hi - box_lo) / points


def _mc_decomposition(f, h0, rho):
    """Boxes hugging each region: B_+ lies over ``|x| < rho``, B_- inside ``Sigma_h0``."""
    n = f.n
    z_hi = min(float(f.h_max), h0 + rho)
    plus = _mc_volume(f, h0, rho, np.array([-rho] * n + [h0]), np.array([rho] * n + [z_hi]), 1)
    r0 = f.profile.radius_at(h0)
    z_lo = float(f.extended(np.zeros((1, n)))[0])
    minus = _mc_volume(f, h0, rho, np.array([-r0] * n + [z_lo]), np.array([r0] * n + [h0]), -1)
    return plus, minus


def test_schwarzschild_n5_against_quasi_monte_carlo():
    f = schwarzschild_graph(5, 1.0)
    h0 = h_zero(f, 1.0)
    d = flat_distance_upper(f, h0, rho=10.0, m=1.0)
    plus, minus = _mc_decomposition(f, h0, 10.0)
    assert d.mass_B_plus == pytest.approx(plus, rel=0.05)
    assert d.mass_B_minus == pytest.approx(minus, rel=0.05)
    # fill-in: the horizon disc sits at height 0, inside the slice of U there
    r_h = 2.0 ** (1 / 3)
    assert d.mass_A == pytest.approx(constants(5).beta * r_h ** 5, rel=1e-12)
    assert d.total <= d.bound
    assert math.isfinite(d.total) and d.method == "height-slices"


@pytest.mark.parametrize("n,m", [(3, 1.0), (5, 1.0), (5, 2.0 ** -8), (4, 0.3)])
def test_slicing_orders_agree(n, m):
    f = schwarzschild_graph(n, m)
    h0 = h_zero(f, m)
    c = decomposition_crosscheck(f, h0, Ball.on_plane(n, h0, 4.0))
    assert c["rel_diff_plus"] <= 1e-4
    assert c["rel_diff_minus"] <= 1e-4


def test_slicing_orders_agree_on_mass_profile():
    mp = MassProfile.power_tail(1.0, [0.3], [2.0], 1.4)
    f = RadialGraph(profile_from_mass(mp, 3))
    h0 = h_zero(f, 1.0)
    c = decomposition_crosscheck(f, h0, Ball.on_plane(3, h0, 6.0))
    assert c["rel_diff_plus"] <= 1e-4 and c["rel_diff_minus"] <= 1e-4


def test_monotone_in_radius():
    f = schwarzschild_graph(3, 0.5)
    h0 = h_zero(f, 0.5)
    totals = [flat_distance_upper(f, h0, rho=r).total for r in (0.5, 1.0, 2.0, 4.0, 8.0)]
    assert np.all(np.diff(totals) > 0)
    assert all(t >= 0 for t in totals)


def test_voxel_columns_match_height_slices():
    base = schwarzschild_graph(3, 0.5)
    flat_bump = BumpedGraph(base, 0.0, [4.0, 0.0, 0.0], 0.25)
    h0 = h_zero(base, 0.5)
    ref = flat_distance_upper(base, h0, rho=3.0)
    vox = flat_distance_upper(flat_bump, h0, rho=3.0, cells=64)
    assert vox.method == "voxel-columns"
    assert vox.mass_A == pytest.approx(ref.mass_A, rel=1e-12)
    assert vox.mass_B_plus == pytest.approx(ref.mass_B_plus, rel=1e-3)
    assert vox.mass_B_minus == pytest.approx(ref.mass_B_minus, rel=1e-2)
    bumped = flat_distance_upper(BumpedGraph(base, 0.15, [2.8, 0.0, 0.0], 0.2), h0, rho=3.0,
                                 cells=64)
    assert bumped.mass_B_plus > vox.mass_B_plus


@pytest.mark.parametrize("n", [5, 6])
def test_bound_compliance_high_dimensions(n):
    for m in (1.0, 0.1, 0.01):
        f = schwarzschild_graph(n, m)
        d = flat_distance_upper(f, h_zero(f, m), rho=5.0, m=m)
        assert d.total <= d.bound
        # the fill-in bound is attained by the round horizon
        assert d.mass_A <= d.per_term["A"] * (1 + 1e-12)
        assert d.per_term["B_minus"] >= d.mass_B_minus
        assert d.per_term["B_plus"] >= d.mass_B_plus


@pytest.mark.parametrize("n", [3, 4])
def test_bound_compliance_low_dimensions(n):
    ap = AsymptoticProfile(r0=2.0, gamma=0.05, decay_exponent=-0.5)
    for m in (1.0, 0.1):
        f = schwarzschild_graph(n, m)
        d = flat_distance_upper(f, h_zero(f, m), rho=5.0, m=m, ap=ap)
        assert d.total <= d.bound


def test_theorem_bound_exponents():
    ms = 2.0 ** -np.arange(20, 30)
    b5 = [theorem_bound(5, m, 10.0)["bound"] for m in ms]
    assert np.polyfit(np.log(ms), np.log(b5), 1)[0] == pytest.approx(1 / 3, abs=1e-3)
    ap = AsymptoticProfile(r0=2.0, gamma=0.05, decay_exponent=-0.5)
    b3 = [theorem_bound(3, m, 10.0, ap)["bound"] for m in ms]
    assert np.polyfit(np.log(ms), np.log(b3), 1)[0] == pytest.approx(0.25, abs=1e-3)
    with pytest.raises(DomainError):
        theorem_bound(3, 1.0, 1.0)


def test_bump_form_constants():
    w = BumpForm((0.0, 0.0, 0.0, 1.0), 0.8)
    t = np.linspace(0, 0.8, 200001)
    d = np.abs(np.gradient(w.eta(t), t))
    assert d.max() == pytest.approx(w.sup_d, rel=1e-6)
    assert w.eta(0.0) == w.sup == 1.0
    assert w.eta(0.9) == 0.0


def test_pairing_rotational_matches_grid():
    base = schwarzschild_graph(3, 0.5)
    h0 = h_zero(base, 0.5)
    same = BumpedGraph(base, 0.0, [4.0, 0.0, 0.0], 0.25)
    # the grid path is first order at the edge of the excised ball
    for w in standard_forms(3, h0, 3.0):
        assert pairing(same, h0, w) == pytest.approx(pairing(base, h0, w), rel=1e-2, abs=1e-4)


def test_single_member_table():
    t = convergence_study(schwarzschild_family(5, [0.5]), rho=5.0)
    assert len(t.rows) == 1
    assert t.exponent_fit is None
    assert t.within_bound and t.rows[0].pairing_ok
    lines = t.to_csv().splitlines()
    assert lines[0] == "m,d_flat_upper,bound,mass_A,mass_B_plus,mass_B_minus"
    assert len(lines) == 2


def test_non_monotone_masses_rejected():
    with pytest.raises(DomainError):
        convergence_study(schwarzschild_family(5, [0.5, 0.5]), rho=5.0)
    with pytest.raises(DomainError):
        convergence_study(schwarzschild_family(5, [0.25, 0.5]), rho=5.0)


def test_short_study_decreases_and_pairs():
    t = convergence_study(schwarzschild_family(5, [1.0, 0.25, 0.0625]), rho=5.0, threads=2)
    assert t.monotone_decreasing and t.within_bound
    assert all(r.pairing_ok for r in t.rows)
    for r in t.rows:
        assert r.h0 < schwarzschild_sup(5, r.m)
    assert '"rows"' in t.to_json()


def test_family_members_are_normalised_at_h0():
    fam = [FamilyMember(schwarzschild_graph(5, 1.0), 1.0)]
    t = convergence_study(fam, rho=5.0, h0s=[h_zero(fam[0].graph, 1.0)], forms=False)
    u = convergence_study(fam, rho=5.0, forms=False)
    assert t.rows[0].d_flat_upper == u.rows[0].d_flat_upper


def test_low_dimensional_families_need_negative_decay():
    ap = AsymptoticProfile(r0=2.0, gamma=0.05, decay_exponent=0.3)
    with pytest.raises(DomainError, match="negative decay"):
        schwarzschild_family(3, [1.0, 0.5], ap)
    assert len(schwarzschild_family(5, [1.0, 0.5])) == 2
