from __future__ import annotations

import math

import numpy as np
import pytest
import sympy

from graphstab.errors import DomainError, RegularValueError
from graphstab.geometry import (DOWNWARD, ENTIRE, MINIMAL_BOUNDARY, UPWARD,
                                AnisotropicRadialGraph, BumpedGraph, FiniteDifferenceGraph,
                                Plane, check_asymptotically_flat, check_dimension,
                                check_minimal_boundary, classify_orientation, constants,
                                graph_mean_curvature, levelset_mean_curvature,
                                lower_hemisphere, paraboloid, quasi_random_points,
                                scalar_curvature_gauss, scalar_curvature_reilly)
from graphstab.schwarzschild import ExplicitProfile, schwarzschild_graph


def sympy_profile(n, expr_fn, r_min=0.0):
    """Rotational profile with exact derivatives from a sympy expression."""
    r = sympy.Symbol("r", positive=True)
    e = expr_fn(r)
    fns = [sympy.lambdify(r, sympy.diff(e, r, k), "numpy") for k in range(4)]
    prof = ExplicitProfile(n, lambda x: fns[0](x) + 0 * x,
                           lambda x, k=1: fns[k](x) + 0 * x, r_min=r_min)
    return prof, r, e


def rotational_R_oracle(n, r, e, radii):
    """``(n-1) r^{1-n} d/dr [r^{n-2} u'^2/(1+u'^2)]`` by symbolic differentiation."""
    up = sympy.diff(e, r)
    expr = (n - 1) * r ** (1 - n) * sympy.diff(r ** (n - 2) * up ** 2 / (1 + up ** 2), r)
    fn = sympy.lambdify(r, sympy.simplify(expr), "numpy")
    return np.asarray(fn(np.asarray(radii)), dtype=float)


def test_constants_match_gamma_function():
    for n in range(3, 8):
        c = constants(n)
        omega = float(2 * sympy.pi ** sympy.Rational(n, 2) / sympy.gamma(sympy.Rational(n, 2)))
        assert c.omega == pytest.approx(omega, rel=1e-15)
        assert c.c_n == pytest.approx(2 * (n - 1) * omega, rel=1e-15)
        assert c.beta == pytest.approx(omega / n, rel=1e-15)
    assert constants(3).c_n == pytest.approx(16 * math.pi)


@pytest.mark.parametrize("n", [2, 8, 3.5])
def test_dimension_bounds(n):
    with pytest.raises(DomainError):
        check_dimension(n)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_plane_is_flat(n):
    x = quasi_random_points(n, 50, 0.1, 5.0)
    f = Plane(n, 1.5)
    assert np.all(scalar_curvature_reilly(f, x) == 0)
    assert np.all(scalar_curvature_gauss(f, x) == 0)
    assert np.all(graph_mean_curvature(f, x) == 0)


def test_paraboloid_at_critical_point():
    # A = identity at the origin: R = 9 - 3
    f = paraboloid(3)
    x = np.zeros((1, 3))
    assert scalar_curvature_gauss(f, x)[0] == pytest.approx(6.0, abs=1e-14)
    assert scalar_curvature_reilly(f, x)[0] == pytest.approx(6.0, abs=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_lower_hemisphere_mean_curvature(n):
    f = lower_hemisphere(n)
    x = quasi_random_points(n, 40, 0.0, 0.6)
    np.testing.assert_allclose(graph_mean_curvature(f, x), n, rtol=1e-12)
    # unit n-sphere: R = n(n-1)
    np.testing.assert_allclose(scalar_curvature_gauss(f, x), n * (n - 1), rtol=1e-12)
    np.testing.assert_allclose(scalar_curvature_reilly(f, x), n * (n - 1), rtol=1e-10)


@pytest.mark.parametrize("n", [3, 5, 7])
@pytest.mark.parametrize("shape", [
    lambda r: r ** 2 / 2 + r ** 3 / 10,
    lambda r: sympy.log(1 + r ** 2),
    lambda r: sympy.sqrt(1 + r ** 2) - 2 / (1 + r),
])
def test_rotational_scalar_curvature_oracle(n, shape):
    prof, r, e = sympy_profile(n, shape)
    f = prof.graph()
    radii = np.linspace(0.3, 4.0, 25)
    dirs = quasi_random_points(n, 25, 1.0, 1.0)
    x = radii[:, None] * dirs
    oracle = rotational_R_oracle(n, r, e, radii)
    scale = 1.0 + np.max(np.abs(oracle))
    assert np.max(np.abs(scalar_curvature_reilly(f, x) - oracle)) <= 1e-10 * scale
    assert np.max(np.abs(scalar_curvature_gauss(f, x) - oracle)) <= 1e-10 * scale


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_schwarzschild_scalar_flat(n):
    f = schwarzschild_graph(n, 1.0)
    rh = 2.0 ** (1.0 / (n - 2))
    x = quasi_random_points(n, 200, 1.01 * rh, 30 * rh)
    assert np.max(np.abs(scalar_curvature_reilly(f, x))) <= 1e-8
    assert np.max(np.abs(scalar_curvature_gauss(f, x))) <= 1e-8


def test_schwarzschild_mean_curvature_upward_and_decaying():
    f = schwarzschild_graph(3, 1.0)
    H = graph_mean_curvature(f, np.array([[10.0, 0, 0], [100.0, 0, 0], [1000.0, 0, 0]]))
    assert np.all(H > 0) and H[0] > H[1] > H[2]
    assert classify_orientation(f).direction == UPWARD


def test_downward_orientation():
    g = FiniteDifferenceGraph(lambda x: -np.sum(x * x, axis=-1) / 2, 3)
    assert classify_orientation(g, shell=(0.1, 2.0)).direction == DOWNWARD


def test_levelset_curvature_round_and_named_example():
    f = schwarzschild_graph(3, 0.5)
    x = np.array([[2.0, 0.0, 0.0], [0.0, 0.0, 2.0]])
    np.testing.assert_allclose(levelset_mean_curvature(f, x), 1.0, rtol=1e-13)
    for n in (4, 6):
        g = schwarzschild_graph(n, 1.0)
        x = quasi_random_points(n, 10, 3.0, 3.0)
        np.testing.assert_allclose(levelset_mean_curvature(g, x), (n - 1) / 3.0, rtol=1e-12)


def test_levelset_curvature_ellipsoid_oracle():
    # oracle: div(grad phi/|grad phi|) for phi = sum x_i^2/a_i^2, symbolic
    axes = (1.0, 1.3, 0.8)
    prof, _, _ = sympy_profile(3, lambda r: r ** 2 + r)
    f = AnisotropicRadialGraph(prof, axes)
    xs = sympy.symbols("x0:3", real=True)
    phi = sum(xi ** 2 / a ** 2 for xi, a in zip(xs, axes))
    g = [sympy.diff(phi, xi) for xi in xs]
    norm = sympy.sqrt(sum(gi ** 2 for gi in g))
    H = sum(sympy.diff(gi / norm, xi) for gi, xi in zip(g, xs))
    Hf = sympy.lambdify(xs, H, "numpy")
    pts = quasi_random_points(3, 30, 0.5, 2.0)
    oracle = np.array([Hf(*p) for p in pts])
    np.testing.assert_allclose(levelset_mean_curvature(f, pts), oracle, rtol=1e-6)


def test_levelset_curvature_critical_point():
    with pytest.raises(RegularValueError):
        levelset_mean_curvature(paraboloid(3), np.zeros((1, 3)))


def test_finite_difference_graph_matches_analytic():
    f = schwarzschild_graph(3, 1.0)
    g = FiniteDifferenceGraph(lambda x: f(x), 3)
    x = quasi_random_points(3, 30, 3.0, 8.0)
    ja, jf = f.jet(x, 2), g.jet(x, 2)
    np.testing.assert_allclose(jf.df, ja.df, rtol=1e-8, atol=1e-9)
    np.testing.assert_allclose(jf.d2f, ja.d2f, rtol=1e-5, atol=1e-6)


def test_bumped_graph_derivatives_match_finite_differences():
    f = BumpedGraph(schwarzschild_graph(3, 0.5), 0.15, [3.2, 0, 0], 0.25)
    x = np.array([[3.1, 0.1, -0.05], [3.3, -0.1, 0.2]])
    j = f.jet(x, 3)
    h = 1e-5
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (f.jet(x + e, 2).d2f - f.jet(x - e, 2).d2f) / (2 * h)
        np.testing.assert_allclose(j.d3f[:, :, :, i], fd, rtol=1e-5, atol=1e-6)


def test_bump_too_close_rejected():
    with pytest.raises(DomainError):
        BumpedGraph(schwarzschild_graph(3, 0.5), 0.1, [1.5, 0, 0], 0.25)


def test_kinds_and_boundary_checks():
    s = schwarzschild_graph(4, 1.0)
    assert s.kind == MINIMAL_BOUNDARY and check_minimal_boundary(s)
    assert paraboloid(3).kind == ENTIRE and not check_minimal_boundary(paraboloid(3))
    rep = check_asymptotically_flat(s)
    assert rep.ok and rep.limit == "+inf"
    rep5 = check_asymptotically_flat(schwarzschild_graph(5, 1.0))
    assert rep5.ok and rep5.limit == "constant"
    assert not check_asymptotically_flat(paraboloid(3)).ok
