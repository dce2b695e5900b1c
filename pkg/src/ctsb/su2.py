"""SU(2) and its complexification SL(2, C).

Conventions: the inner product on su(2) is ``<X, Y> = -Tr(XY)``, with
orthonormal basis ``e_a = (i / sqrt 2) sigma_a``. Then the Casimir of the
n-dimensional irrep is ``-(n^2 - 1)/2`` times the identity, and the heat
kernel of ``exp(t Delta / 2)`` is the character series

    rho_t(k) = sum_n n exp(-t (n^2 - 1) / 4) chi_n(k).

Group and algebra elements are plain complex arrays of shape ``(2, 2)``;
functions that take many of them accept a leading batch axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._backend import kernels
from ._kernels_py import _expm_traceless
from .params import ComplexTime, DomainError, MetricTriple

PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)
I2 = np.eye(2, dtype=complex)


class SeriesTruncationError(RuntimeError):
    pass


def su2_basis() -> np.ndarray:
    """Orthonormal basis ``(e_1, e_2, e_3)`` of su(2), shape ``(3, 2, 2)``."""
    return (1j / math.sqrt(2)) * PAULI


def is_algebra(Z, in_k: bool = False, tol: float = 1e-14) -> bool:
    Z = np.asarray(Z)
    ok = abs(np.trace(Z)) <= tol
    if in_k:
        ok = ok and np.allclose(Z, -Z.conj().T, atol=tol, rtol=0)
    return bool(ok)


def is_group(g, in_k: bool = False, tol: float = 1e-12) -> bool:
    g = np.asarray(g)
    ok = abs(np.linalg.det(g) - 1) <= tol
    if in_k:
        ok = ok and np.allclose(g @ g.conj().T, I2, atol=tol, rtol=0)
    return bool(ok)


def J(Z):
    """Complex structure on sl(2, C): multiplication by i."""
    return 1j * np.asarray(Z)


def split(Z):
    """``Z = X + J Y`` with ``X, Y`` in su(2); returns ``(X, Y)``."""
    Z = np.asarray(Z, dtype=complex)
    Zh = np.swapaxes(Z.conj(), -1, -2)
    return (Z - Zh) / 2, -1j * (Z + Zh) / 2


def inner_k(X, Y):
    return -np.trace(np.asarray(X) @ np.asarray(Y), axis1=-2, axis2=-1).real


def inner_abc(Z, W, m: MetricTriple):
    """The Ad(SU(2))-invariant inner product ``<Z, W>_{a,b,c}`` on sl(2, C)."""
    X1, Y1 = split(Z)
    X2, Y2 = split(W)
    return (
        m.a * inner_k(X1, X2)
        + m.b * inner_k(Y1, Y2)
        + m.c * (inner_k(X1, Y2) + inner_k(X2, Y1))
    )


def inner_abc_trace(A, B, m: MetricTriple):
    """Same inner product written with traces of ``AB*`` and ``AB``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    Bh = np.swapaxes(B.conj(), -1, -2)
    t1 = np.trace(A @ Bh, axis1=-2, axis2=-1).real
    t2 = np.trace(A @ B, axis1=-2, axis2=-1)
    return 0.5 * (m.a + m.b) * t1 + 0.5 * ((m.b - m.a + 2j * m.c) * t2).real


def random_sl2(rng, size=None, scale: float = 1.0):
    """Random traceless complex matrices (not normalised)."""
    shape = (2, 2) if size is None else (size, 2, 2)
    Z = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    tr = np.trace(Z, axis1=-2, axis2=-1)
    return Z - tr[..., None, None] * I2 / 2


def expm2(A):
    """Exponential of traceless 2x2 matrices (batched) in closed form."""
    A = np.asarray(A, dtype=complex)
    out = _expm_traceless(A.reshape(-1, 2, 2))
    return out.reshape(A.shape)


def ad_invariance_residual(m: MetricTriple, trials: int, rng, form=None) -> float:
    """Largest change of ``form(Z, W)`` under conjugation by random k in SU(2)."""
    form = form or (lambda Z, W: inner_abc(Z, W, m))
    worst = 0.0
    for _ in range(trials):
        k = haar_sample(rng)
        Z, W = random_sl2(rng), random_sl2(rng)
        kinv = k.conj().T
        worst = max(worst, abs(form(k @ Z @ kinv, k @ W @ kinv) - form(Z, W)))
    return float(worst)


@dataclass(frozen=True, eq=False)
class Irrep:
    """The n-dimensional irrep; ``gen[a]`` represents ``e_a``."""

    n: int
    gen: np.ndarray

    @property
    def spin(self) -> float:
        return (self.n - 1) / 2

    @property
    def casimir_value(self) -> float:
        """``c_n`` with ``C = -c_n I``."""
        return (self.n * self.n - 1) / 2

    def algebra(self, Z):
        """Complex-linear image of ``Z`` in sl(2, C)."""
        coeffs = -np.einsum("aij,ji->a", su2_basis(), np.asarray(Z, dtype=complex))
        return np.einsum("a,aij->ij", coeffs, self.gen)

    def group(self, g):
        return rep_matrix(self.n, g)


@lru_cache(maxsize=None)
def irrep(n: int) -> Irrep:
    """Spin-(n-1)/2 generators from ladder operators, basis m = j, j-1, ..., -j."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    j = (n - 1) / 2
    m = j - np.arange(n)
    Jz = np.diag(m).astype(complex)
    Jp = np.zeros((n, n), dtype=complex)
    for k in range(1, n):
        # |m> -> |m+1>, index k -> k-1
        Jp[k - 1, k] = math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    Jm = Jp.T.copy()
    Jx = (Jp + Jm) / 2
    Jy = (Jp - Jm) / 2j
    gen = 1j * math.sqrt(2) * np.stack([Jx, Jy, Jz])
    gen.setflags(write=False)
    return Irrep(n, gen)


def casimir(r: Irrep) -> np.ndarray:
    return np.einsum("aij,ajk->ik", r.gen, r.gen)


def rep_matrix(n: int, g) -> np.ndarray:
    """Holomorphic n-dimensional representation of SL(2, C) (batched).

    Realised on homogeneous polynomials of degree n-1 with the orthonormal
    basis ``x^p y^q / sqrt(p! q!)``, ``p = n - 1 - k`` for basis index k.
    """
    g = np.asarray(g, dtype=complex)
    single = g.ndim == 2
    g = g.reshape(-1, 2, 2)
    a, b, c, d = g[:, 0, 0], g[:, 0, 1], g[:, 1, 0], g[:, 1, 1]
    N = n - 1
    fact = [math.factorial(i) for i in range(N + 1)]
    D = np.zeros((g.shape[0], n, n), dtype=complex)
    for k in range(n):
        p, q = N - k, k
        for r in range(p + 1):
            tr = math.comb(p, r) * a**r * c ** (p - r)
            for s in range(q + 1):
                pp = r + s
                kk = N - pp
                coef = math.comb(q, s) * math.sqrt(fact[pp] * fact[N - pp] / (fact[p] * fact[q]))
                D[:, kk, k] += coef * tr * b**s * d ** (q - s)
    return D[0] if single else D


def matrix_entry(n: int, A, g):
    """``Tr(pi_n(g) A)`` for one or many group elements."""
    return np.einsum("...ij,ji->...", rep_matrix(n, g), np.asarray(A, dtype=complex))


def eigen_lambda(g):
    """Eigenvalue of largest modulus (``lambda`` with ``|lambda| >= 1``)."""
    T = np.trace(np.asarray(g, dtype=complex), axis1=-2, axis2=-1)
    root = np.sqrt(T * T - 4)
    l1 = (T + root) / 2
    l2 = (T - root) / 2
    return np.where(np.abs(l1) >= np.abs(l2), l1, l2)


def character(n: int, z) -> np.ndarray:
    """chi_n(z) = (lambda^n - lambda^-n) / (lambda - 1/lambda).

    Evaluated as the geometric sum ``sum_k lambda^(n-1-2k)``, which is the
    continuous extension through lambda = +-1.
    """
    lam = eigen_lambda(z)
    k = np.arange(n)
    return np.sum(lam[..., None] ** (n - 1 - 2 * k), axis=-1)


def class_angle(k) -> np.ndarray:
    """Eigenvalue angle theta in [0, pi] of unitary k."""
    T = np.trace(np.asarray(k, dtype=complex), axis1=-2, axis2=-1).real
    return np.arccos(np.clip(T / 2, -1.0, 1.0))


NMAX_CAP = 5000


def series_nmax(t: float, lam_abs: float = 1.0, tol: float = 1e-12, safety: float = 10.0) -> int:
    """First n whose tail bound ``safety n^2 e^{-t(n^2-1)/4} |lambda|^{n-1}`` is below tol."""
    if t <= 0:
        raise DomainError(f"heat time must be positive, got {t}")
    lg = math.log(max(1.0, lam_abs))
    target = math.log(tol / safety)
    n = 1
    while True:
        n += 1
        if 2 * math.log(n) - t * (n * n - 1) / 4 + (n - 1) * lg < target:
            return n
        if n > NMAX_CAP:
            raise SeriesTruncationError(
                f"character series needs more than {NMAX_CAP} terms (t={t}, |lambda|={lam_abs})"
            )


def heat_kernel_C(tau, z, tol: float = 1e-12) -> np.ndarray:
    """Holomorphic heat kernel rho_C(tau, z) on SL(2, C), batched over z."""
    tau = ComplexTime.of(tau)
    if tau.t <= 0:
        raise DomainError(f"Re(tau) must be positive, got {tau.value}")
    z = np.asarray(z, dtype=complex)
    T = np.trace(z, axis1=-2, axis2=-1)
    lam_abs = float(np.max(np.abs(eigen_lambda(z)))) if T.size else 1.0
    nmax = series_nmax(tau.t, lam_abs, tol)
    return kernels.heat_series(np.atleast_1d(T), tau.value, nmax).reshape(T.shape)


def heat_kernel_K(t: float, k, tol: float = 1e-12) -> np.ndarray:
    """Heat kernel rho_t on SU(2) (real values), batched over k."""
    if t <= 0:
        raise DomainError(f"heat time must be positive, got {t}")
    return heat_kernel_C(complex(t, 0), k, tol).real


def heat_kernel_theta(t: float, theta, tol: float = 1e-12) -> np.ndarray:
    """rho_t as a function of the class angle theta."""
    theta = np.asarray(theta, dtype=float)
    return kernels.heat_series(
        np.atleast_1d(2 * np.cos(theta)).astype(complex), complex(t), series_nmax(t, 1.0, tol)
    ).real.reshape(theta.shape)


def class_element(theta):
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(1j * theta)
    out[..., 1, 1] = np.exp(-1j * theta)
    return out


def weyl_rule(order: int):
    """Nodes/weights on [0, pi] for class functions: dk -> (2/pi) sin^2 theta d theta."""
    x, w = leggauss(order)
    theta = (x + 1) * np.pi / 2
    return theta, w * (np.pi / 2) * (2 / np.pi) * np.sin(theta) ** 2


@dataclass(frozen=True, eq=False)
class HaarQuadrature:
    """Product rule for normalised Haar measure on SU(2).

    Exact for every matrix entry of an irrep of dimension ``<= exact_dim`` and
    for products of two entries whose dimensions satisfy
    ``n1 + n2 - 1 <= exact_dim``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def exact_dim(self) -> int:
        return self.order

    def integrate(self, values) -> complex:
        return np.tensordot(self.weights, values, axes=(0, 0))

    def __len__(self) -> int:
        return len(self.weights)


def euler_zyz(alpha, beta, gamma):
    alpha, beta, gamma = np.broadcast_arrays(alpha, beta, gamma)
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    out = np.empty(alpha.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-0.5j * (alpha + gamma)) * c
    out[..., 0, 1] = -np.exp(-0.5j * (alpha - gamma)) * s
    out[..., 1, 0] = np.exp(0.5j * (alpha - gamma)) * s
    out[..., 1, 1] = np.exp(0.5j * (alpha + gamma)) * c
    return out


@lru_cache(maxsize=8)
def haar_quadrature(order: int) -> HaarQuadrature:
    """Euler-angle product rule: trapezoid in both outer angles, Gauss-Legendre in cos(beta).

    ``order`` nodes in alpha and cos(beta), ``2 * order`` in gamma over [0, 4 pi).
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    na, ng = order, 2 * order
    x, wx = leggauss(order)
    alpha = 2 * np.pi * np.arange(na) / na
    gamma = 4 * np.pi * np.arange(ng) / ng
    beta = np.arccos(x)
    A, B, G = np.meshgrid(alpha, beta, gamma, indexing="ij")
    W = np.broadcast_to((wx / 2)[None, :, None], A.shape) / (na * ng)
    nodes = euler_zyz(A.ravel(), B.ravel(), G.ravel())
    nodes.setflags(write=False)
    weights = np.ascontiguousarray(W.ravel())
    weights.setflags(write=False)
    return HaarQuadrature(nodes, weights, order)


def haar_sample(rng, size=None) -> np.ndarray:
    """Haar-random SU(2) elements via QR of complex Ginibre matrices."""
    shape = (1 if size is None else size, 2, 2)
    G = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    Q, R = np.linalg.qr(G)
    ph = np.diagonal(R, axis1=-2, axis2=-1)
    Q = Q * (ph / np.abs(ph))[:, None, :]
    det = np.linalg.det(Q)
    Q[:, :, 1] /= det[:, None]
    return Q[0] if size is None else Q
