import math

import numpy as np
import pytest
from scipy.linalg import expm

from ctsb import su2
from ctsb.params import DomainError, MetricTriple

E = su2.su2_basis()


def test_basis_orthonormal_and_structure():
    gram = np.array([[su2.inner_k(a, b) for b in E] for a in E])
    assert np.allclose(gram, np.eye(3), atol=1e-15)
    # (i/sqrt2)^2 [sigma_1, sigma_2] = -i sigma_3
    assert np.allclose(E[0] @ E[1] - E[1] @ E[0], -math.sqrt(2) * E[2], atol=1e-15)
    for e in E:
        assert su2.is_algebra(e, in_k=True)


def test_inner_abc_examples(rng):
    assert su2.inner_abc(E[0], E[0], MetricTriple(1, 1, 0)) == pytest.approx(1)
    m = MetricTriple(2.0, 0.7, 0.4)
    assert su2.inner_abc(su2.J(E[0]), su2.J(E[0]), m) == pytest.approx(m.b)
    Z, W = su2.random_sl2(rng, 50), su2.random_sl2(rng, 50)
    assert np.max(np.abs(su2.inner_abc(Z, W, m) - su2.inner_abc_trace(Z, W, m))) < 1e-12


def test_split_convention(rng):
    Z = su2.random_sl2(rng)
    X, Y = su2.split(Z)
    assert su2.is_algebra(X, in_k=True) and su2.is_algebra(Y, in_k=True)
    assert np.allclose(X + su2.J(Y), Z, atol=1e-15)


@pytest.mark.parametrize("m", [MetricTriple(1, 1, 0), MetricTriple(2, 1, 0.5)])
def test_ad_invariance(m, rng):
    assert su2.ad_invariance_residual(m, 100, rng) < 1e-12


def test_non_invariant_control_is_detected(rng):
    def form(Z, W):
        return (Z[0, 1] * np.conj(W[0, 1])).real

    assert su2.ad_invariance_residual(MetricTriple(1, 1, 0), 20, rng, form=form) > 1e-3


def test_irrep_examples():
    assert np.all(su2.irrep(1).gen == 0)
    assert np.allclose(su2.irrep(2).gen, E, atol=1e-15)
    for n in (1, 2, 3, 4):
        assert np.allclose(su2.casimir(su2.irrep(n)), -(n * n - 1) / 2 * np.eye(n), atol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_irrep_brackets(n):
    g = su2.irrep(n).gen
    for a, b, c in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        assert np.allclose(g[a] @ g[b] - g[b] @ g[a], -math.sqrt(2) * g[c], atol=1e-12)
        assert np.allclose(g[a], -g[a].conj().T)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_rep_matrix_is_exponential_of_generators(n, rng):
    r = su2.irrep(n)
    for _ in range(3):
        Z = su2.random_sl2(rng, scale=0.6)
        assert np.allclose(r.group(su2.expm2(Z)), expm(r.algebra(Z)), atol=1e-11)


def test_rep_matrix_is_homomorphism(rng):
    g, h = su2.expm2(su2.random_sl2(rng, 2, 0.5))
    for n in (2, 3, 4):
        assert np.allclose(su2.rep_matrix(n, g @ h), su2.rep_matrix(n, g) @ su2.rep_matrix(n, h), atol=1e-12)


def test_character_examples():
    assert su2.character(3, np.eye(2)) == pytest.approx(3)
    assert abs(su2.character(2, np.diag([1j, -1j]))) < 1e-15
    assert su2.character(2, np.diag([2.0, 0.5])) == pytest.approx(2.5)
    # the character is the trace of the representation, including at lambda = -1
    g = -np.eye(2)
    for n in (1, 2, 3, 4):
        assert su2.character(n, g) == pytest.approx(np.trace(su2.rep_matrix(n, g)))


def test_character_matches_trace_off_diagonal(rng):
    z = su2.expm2(su2.random_sl2(rng, 5))
    for n in (2, 3, 5):
        assert np.allclose(su2.character(n, z), np.trace(su2.rep_matrix(n, z), axis1=-2, axis2=-1), atol=1e-10)


def test_haar_quadrature_basic():
    q = su2.haar_quadrature(12)
    assert q.integrate(np.ones(len(q))) == pytest.approx(1, abs=1e-15)
    for n in range(2, 12):
        assert abs(q.integrate(su2.character(n, q.nodes))) < 1e-13
    for n in (2, 3, 4):
        D = su2.rep_matrix(n, q.nodes)
        assert np.allclose(q.integrate(np.abs(D) ** 2), np.full((n, n), 1 / n), atol=1e-13)


def test_haar_quadrature_unimodular(rng):
    q = su2.haar_quadrature(10)
    A = rng.standard_normal((3, 3))
    inv = np.swapaxes(q.nodes.conj(), -1, -2)
    f = lambda g: su2.matrix_entry(3, A, g) ** 2
    assert q.integrate(f(q.nodes)) == pytest.approx(q.integrate(f(inv)), abs=1e-13)


def test_haar_sample_moments(rng):
    U = su2.haar_sample(rng, 40000)
    assert all(su2.is_group(u, in_k=True) for u in U[:100])
    chi = np.trace(U, axis1=-2, axis2=-1)
    se = 1 / math.sqrt(len(U))
    assert abs(chi.mean()) < 4 * se
    assert abs(np.mean(np.abs(chi) ** 2) - 1) < 6 * se


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_heat_kernel_mass(t):
    q = su2.haar_quadrature(48)
    assert abs(q.integrate(su2.heat_kernel_K(t, q.nodes)) - 1) < 1e-8


def test_heat_kernel_semigroup():
    q = su2.haar_quadrature(48)
    x = su2.expm2(0.3 * E[0])
    inv = np.swapaxes(q.nodes.conj(), -1, -2)
    conv = q.integrate(su2.heat_kernel_K(0.5, x @ inv) * su2.heat_kernel_K(0.5, q.nodes))
    assert abs(conv - su2.heat_kernel_K(1.0, x)) < 1e-6


def test_heat_kernel_inversion_and_class_function(rng):
    k = su2.haar_sample(rng, 30)
    kinv = np.swapaxes(k.conj(), -1, -2)
    assert np.allclose(su2.heat_kernel_K(0.7, k), su2.heat_kernel_K(0.7, kinv), atol=1e-12)
    theta = su2.class_angle(k)
    assert np.allclose(su2.heat_kernel_K(0.7, k), su2.heat_kernel_theta(0.7, theta), atol=1e-12)


def test_heat_kernel_C_restricts_and_is_conjugation_invariant(rng):
    k = su2.haar_sample(rng, 20)
    assert np.allclose(su2.heat_kernel_C(0.8, k), su2.heat_kernel_K(0.8, k), atol=1e-12)
    z = su2.expm2(su2.random_sl2(rng, 20, 0.4))
    kh = np.swapaxes(k.conj(), -1, -2)
    a = su2.heat_kernel_C(1 + 0.5j, z)
    b = su2.heat_kernel_C(1 + 0.5j, k @ z @ kh)
    assert np.max(np.abs(a - b) / np.abs(a)) < 1e-10


def test_heat_kernel_C_holomorphic_in_tau():
    z = su2.expm2(0.4 * su2.J(E[0]))
    tau, h = 1 + 0.5j, 1e-5
    d_re = (su2.heat_kernel_C(tau + h, z) - su2.heat_kernel_C(tau - h, z)) / (2 * h)
    d_im = (su2.heat_kernel_C(tau + 1j * h, z) - su2.heat_kernel_C(tau - 1j * h, z)) / (2 * h)
    assert abs(d_im - 1j * d_re) < 1e-6


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_heat_operator_eigen_relation(n, rng):
    q = su2.haar_quadrature(40)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    t = 0.6
    got = q.integrate(su2.heat_kernel_K(t, q.nodes) * su2.matrix_entry(n, A, q.nodes))
    ref = np.trace(expm(t * su2.casimir(su2.irrep(n)) / 2) @ A)
    assert abs(got - ref) / abs(ref) < 1e-8


def test_weyl_rule_matches_haar_for_class_functions():
    theta, w = su2.weyl_rule(60)
    q = su2.haar_quadrature(30)
    for t in (0.3, 1.0):
        a = np.sum(w * su2.heat_kernel_theta(t, theta))
        b = q.integrate(su2.heat_kernel_K(t, q.nodes))
        assert a == pytest.approx(1, abs=1e-10) and b == pytest.approx(1, abs=1e-10)
    assert np.sum(w * su2.character(3, su2.class_element(theta)) ** 2).real == pytest.approx(1)


def test_approximate_identity_trend():
    theta, w = su2.weyl_rule(400)
    # for f = chi_2 the heat integral is 2 exp(-3t/4), which tends to f(e) = 2
    errs = [abs(np.sum(w * su2.heat_kernel_theta(t, theta) * 2 * np.cos(theta)) - 2) for t in (0.5, 0.1, 0.02)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] == pytest.approx(2 * (1 - math.exp(-0.015)), rel=1e-8)


def test_series_truncation_rule():
    n = su2.series_nmax(1.0, 1.0, 1e-12)
    assert 10 * n * n * math.exp(-(n * n - 1) / 4) < 1e-12
    m = n - 1
    assert 10 * m * m * math.exp(-(m * m - 1) / 4) >= 1e-12
    with pytest.raises(su2.SeriesTruncationError):
        su2.series_nmax(1e-7, 1.0)
    with pytest.raises(DomainError):
        su2.series_nmax(0.0)


def test_expm2_matches_scipy(rng):
    Z = su2.random_sl2(rng, 10, 2.0)
    Z[0] = [[0, 1], [0, 0]]  # nilpotent
    out = su2.expm2(Z)
    for z, e in zip(Z, out):
        assert np.allclose(e, expm(z), rtol=1e-12, atol=1e-12)
