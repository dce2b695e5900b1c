import math

import numpy as np
import pytest
import sympy as sp

from ctsb import euclidean as eu
from ctsb.params import DomainError, TransformParams
from ctsb.quadrature import QuadSpec, gauss_hermite, legendre_box

X = eu.Polynomial.monomial


def test_rho_s_values_and_mass():
    assert eu.rho_s(np.zeros(1), 1.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
    assert eu.rho_s(np.zeros(2), 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    x, w = gauss_hermite(40)
    # int rho_s = E_{N(0,1)}[rho_s(x) / phi(x)] with s = 1.7
    s = 1.7
    ratio = eu.rho_s(x[:, None], s) / eu.rho_s(x[:, None], 1.0)
    assert abs(np.sum(w * ratio) - 1) < 1e-10


def test_rho_c_restricts_to_real_heat_kernel():
    x = np.linspace(-4, 4, 17)[:, None]
    assert np.max(np.abs(eu.rho_c(1.3, x) - eu.rho_s(x, 1.3))) < 1e-15


def test_rho_c_principal_branch_value():
    val = eu.rho_c(1 + 1j, np.zeros(1))
    assert abs(val - (2 * math.pi * (1 + 1j)) ** -0.5) < 1e-15


def test_rho_c_is_holomorphic_in_tau():
    tau, z, h = 2 + 0.5j, np.array([1 + 0.3j]), 1e-5
    d_re = (eu.rho_c(tau + h, z) - eu.rho_c(tau - h, z)) / (2 * h)
    d_im = (eu.rho_c(tau + 1j * h, z) - eu.rho_c(tau - 1j * h, z)) / (2 * h)
    # Cauchy-Riemann: d/dv = i d/dx
    assert abs(d_im - 1j * d_re) < 1e-6


def test_rho_c_rejects_left_half_plane():
    with pytest.raises(DomainError):
        eu.rho_c(-0.1 + 1j, np.zeros(1))


def test_mu_density_special_case_and_center():
    z = (np.linspace(-3, 3, 13)[:, None] + 1j * np.linspace(-2, 2, 13)[None, :]).ravel()[:, None]
    for t in (0.3, 1.0, 2.5):
        ref = np.exp(-np.abs(z[:, 0]) ** 2 / t) / (math.pi * t)
        assert np.max(np.abs(eu.mu_stau_density(z, TransformParams.make(t, t)) - ref)) < 1e-14
    assert eu.mu_stau_density(np.zeros(1), TransformParams.make(1, 1)) == pytest.approx(1 / math.pi)


def test_mu_density_d2_factorizes():
    p = TransformParams.make(2, 1, 0.5)
    z = np.array([0.3 + 0.2j, -0.7 + 1.1j])
    prod = eu.mu_stau_density(z[:1], p) * eu.mu_stau_density(z[1:], p)
    assert eu.mu_stau_density(z, p) == pytest.approx(prod, rel=1e-14)


def test_mu_normalization():
    assert abs(eu.mu_normalization(TransformParams.make(2, 1, 0.5)) - 1) < 1e-8
    assert abs(eu.mu_normalization(TransformParams.make(1, 1.9, 0.1)) - 1) < 1e-8


def test_mu_rejects_outside_disk():
    with pytest.raises(DomainError):
        eu.mu_stau_density(np.zeros(1), TransformParams.make(1, 2, 0))


def test_mu_prefactor_by_symbolic_integration():
    s, t, u = sp.Rational(2), sp.Rational(1), sp.Rational(1, 2)
    al = (2 * s * t - t**2 - u**2) / 4
    x, y = sp.symbols("x y", real=True)
    q = (t / 2 * x**2 + (s - t / 2) * y**2 + u * x * y) / (2 * al)
    mass = sp.integrate(sp.exp(-q), (x, -sp.oo, sp.oo), (y, -sp.oo, sp.oo))
    assert sp.simplify(mass - 2 * sp.pi * sp.sqrt(al)) == 0


def test_heat_apply_poly_examples():
    tau = 0.7 - 0.2j
    assert eu.heat_apply_poly(X((1,)), tau) == X((1,))
    assert eu.heat_apply_poly(X((2,)), tau).allclose(X((2,)) + eu.Polynomial.constant(tau))
    expect = X((4,)) + X((2,), 6 * tau) + eu.Polynomial.constant(3 * tau**2)
    assert eu.heat_apply_poly(X((4,)), tau).allclose(expect)


def test_heat_apply_poly_matches_symbolic_series():
    x, tau = sp.symbols("x tau")
    f = x**6 - 2 * x**3 + 5
    series = sum((tau / 2) ** n / sp.factorial(n) * sp.diff(f, x, 2 * n) for n in range(4))
    ref = sp.Poly(sp.expand(series.subs(tau, sp.Rational(3, 10) + sp.I / 5)), x)
    got = eu.heat_apply_poly(X((6,)) + X((3,), -2) + eu.Polynomial.constant(5), 0.3 + 0.2j)
    for (k,), c in ref.terms():
        assert abs(got.terms.get((k,), 0) - complex(c)) < 1e-14


def test_transform_quadrature_examples():
    p = TransformParams.make(1.5, 1, 0.5)
    one = lambda y: np.ones(len(y))
    assert abs(eu.transform_quadrature(one, p, [0.4 - 0.3j]) - 1) < 1e-10
    lin = lambda y: y[:, 0]
    assert abs(eu.transform_quadrature(lin, TransformParams.make(1, 1), [1j]) - 1j) < 1e-10
    z = 0.5 + 0.5j
    sq = lambda y: y[:, 0] ** 2
    got = eu.transform_quadrature(sq, p, [z])
    assert abs(got - (z * z + p.tau.value)) / abs(z * z + p.tau.value) < 1e-8


def test_transform_quadrature_agrees_with_heat_series_in_2d():
    f = X((2, 1)) + X((0, 3), 0.5j)
    p = TransformParams.make(2, 1.2, -0.4)
    z = np.array([0.2 + 0.1j, -0.3 + 0.4j])
    got = eu.transform_quadrature(f, p, z)
    assert abs(got - eu.heat_apply_poly(f, p.tau)(z)) < 1e-9


def test_poly_norm_rho_s_examples():
    assert eu.poly_norm_rho_s(X((1,)), 1.0) == pytest.approx(1.0)
    for s in (0.5, 2.0):
        assert eu.poly_norm_rho_s(X((2,)), s) == pytest.approx(3 * s * s)
    assert eu.poly_norm_rho_s(eu.Polynomial.constant(1.0), 3.0) == 1.0


def test_poly_norm_rho_s_matches_hermite():
    f = X((3,)) + X((1,), 2 - 1j) + eu.Polynomial.constant(0.5)
    s = 1.3
    x, w = gauss_hermite(30)
    vals = np.abs(f(math.sqrt(s) * x)) ** 2
    assert eu.poly_norm_rho_s(f, s) == pytest.approx(np.sum(w * vals), rel=1e-12)


def test_poly_norm_mu_examples():
    for p in (TransformParams.make(1, 1), TransformParams.make(2, 1, 0.7)):
        assert eu.poly_norm_mu_stau(X((1,)), p) == pytest.approx(p.s)
        F = X((2,)) + eu.Polynomial.constant(p.tau.value)
        assert eu.poly_norm_mu_stau(F, p) == pytest.approx(3 * p.s**2, rel=1e-13)
        assert eu.poly_norm_mu_stau(eu.Polynomial.constant(1), p) == pytest.approx(1.0)


@pytest.mark.parametrize("a,b", [(2, 0), (1, 1), (3, 1), (2, 2), (4, 2), (3, 3)])
def test_zmoment_matches_density_quadrature(a, b):
    p = TransformParams.make(1.5, 1.0, 0.6)
    sd = np.sqrt(np.diag(eu.mu_covariance(p)))
    nodes, w = legendre_box([0, 0], 9 * sd, 80)
    z = nodes[:, 0] + 1j * nodes[:, 1]
    ref = np.sum(w * z**a * np.conj(z) ** b * eu.mu_stau_density(z[:, None], p))
    assert abs(eu.zmoment(a, b, p) - ref) < 1e-9 * max(1, abs(ref))


def test_isometry_on_grid_both_dimensions(rng):
    from ctsb.params import isometry_params_grid

    fs = [X((5,)) + X((2,), 1j), X((2, 3)) + X((1, 0), -2) + X((0, 4), 0.3)]
    for f in fs:
        for p in isometry_params_grid(20):
            lhs = eu.poly_norm_mu_stau(eu.heat_apply_poly(f, p.tau), p)
            assert lhs == pytest.approx(eu.poly_norm_rho_s(f, p.s), rel=1e-10)


def test_norm_ratio_closed_form_vs_quadrature():
    p = TransformParams.make(2, 1, 0.5)
    z = [0.7 + 0.4j]
    assert eu.norm_ratio_quadrature(z, p) == pytest.approx(eu.norm_ratio_closed_form(z, p), rel=1e-6)


def test_norm_ratio_at_origin_is_unit_mass():
    # at z = 0, s = tau = 1 the integrand is rho_1 itself
    assert eu.norm_ratio_closed_form([0j], TransformParams.make(1, 1)) == pytest.approx(1.0, rel=1e-14)


def test_norm_ratio_blows_up_at_boundary():
    vals = [eu.norm_ratio_closed_form([0j], TransformParams.make(1, 2 - eps)) for eps in (1e-1, 1e-3, 1e-6)]
    assert vals[0] < vals[1] < vals[2]
    assert eu.norm_ratio_closed_form([30 + 30j], TransformParams.make(1, 2 - 1e-12)) == math.inf


def test_pointwise_bound_holds_for_z_squared():
    p = TransformParams.make(1.5, 1.2, 0.3)
    F = X((2,))
    norm = eu.poly_norm_mu_stau(F, p)
    g = np.linspace(-2, 2, 9)
    for z in (g[:, None] + 1j * g[None, :]).ravel():
        assert abs(F([z])) ** 2 <= eu.norm_ratio_closed_form([z], p) * norm * (1 + 1e-12)


@pytest.mark.parametrize("a,b,c,d,tol", [(0, 0.5, 0, 0, 1e-10), (1, 1, 0, 0, 1e-8), (1, 1, 0.3, 0.7, 1e-8)])
def test_uncertainty_saturation(a, b, c, d, tol):
    vx, vp, cov, defect = eu.uncertainty_check(eu.CoherentStateParams(a, b, c, d))
    assert abs(defect) < tol
    if a == 0:
        assert abs(cov) < 1e-12 and vx * vp == pytest.approx(0.25)


def test_uncertainty_legendre_agrees_with_hermite():
    c = eu.CoherentStateParams(0.4, 0.8, -0.5, 1.2)
    h = eu.uncertainty_check(c)
    l = eu.uncertainty_check(c, QuadSpec(kind="legendre", order=96))
    assert np.allclose(h, l, atol=1e-9)


def test_coherent_state_requires_positive_width():
    with pytest.raises(DomainError):
        eu.CoherentStateParams(0, 0, 0, 0)
