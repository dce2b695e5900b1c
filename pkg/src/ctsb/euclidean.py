"""The flat case K = R^d, K_C = C^d.

Heat kernels are Gaussians, matrix entries are polynomials, and every norm
identity reduces to Gaussian moment calculus. Points are plain numpy arrays:
real arrays of shape ``(d,)`` on R^d and complex arrays of shape ``(d,)`` on
C^d (leading batch axes are allowed wherever noted).
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .params import DomainError, TransformParams, ComplexTime
from .quadrature import QuadSpec, QuadratureError, gaussian_expectation_rule, legendre_box


def _double_factorial(k: int) -> int:
    # (k)!! for odd k >= -1
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


class Polynomial:
    """Sparse polynomial on R^d (or its holomorphic extension to C^d).

    Terms are stored as ``{exponent tuple: complex coefficient}``.
    """

    def __init__(self, terms: Mapping[tuple[int, ...], complex], d: int | None = None):
        clean: dict[tuple[int, ...], complex] = {}
        for exps, c in terms.items():
            exps = tuple(int(e) for e in exps)
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            if c != 0:
                clean[exps] = clean.get(exps, 0) + complex(c)
        if d is None:
            if not terms:
                raise ValueError("dimension required for the zero polynomial")
            d = len(next(iter(terms)))
        if any(len(e) != d for e in clean):
            raise ValueError("inconsistent exponent lengths")
        self.d = d
        self.terms = {e: c for e, c in clean.items() if c != 0}

    @classmethod
    def monomial(cls, exps, coeff=1.0) -> "Polynomial":
        exps = tuple(exps)
        return cls({exps: coeff}, d=len(exps))

    @classmethod
    def constant(cls, value, d: int = 1) -> "Polynomial":
        return cls({(0,) * d: value}, d=d)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = defaultdict(complex, self.terms)
        for e, c in other.terms.items():
            out[e] += c
        return Polynomial(out, d=self.d)

    def __mul__(self, k) -> "Polynomial":
        return Polynomial({e: k * c for e, c in self.terms.items()}, d=self.d)

    __rmul__ = __mul__

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-1) * other

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.d == other.d and self.terms == other.terms

    def __repr__(self) -> str:
        return f"Polynomial({dict(sorted(self.terms.items()))!r}, d={self.d})"

    def allclose(self, other: "Polynomial", tol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= tol for k in keys)

    def laplacian(self) -> "Polynomial":
        out: dict[tuple[int, ...], complex] = defaultdict(complex)
        for e, c in self.terms.items():
            for j, ej in enumerate(e):
                if ej >= 2:
                    f = list(e)
                    f[j] -= 2
                    out[tuple(f)] += c * ej * (ej - 1)
        return Polynomial(out, d=self.d)

    def __call__(self, x) -> np.ndarray:
        """Evaluate at points ``x`` of shape ``(..., d)``; real or complex."""
        x = np.asarray(x)
        if self.d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        out = np.zeros(x.shape[:-1], dtype=complex)
        for e, c in self.terms.items():
            term = np.full(x.shape[:-1], c, dtype=complex)
            for j, ej in enumerate(e):
                if ej:
                    term = term * x[..., j] ** ej
            out += term
        return out


def rho_s(x, s: float) -> np.ndarray:
    """Variance-``s`` Gaussian density on R^d at ``x`` of shape ``(..., d)``."""
    if s <= 0:
        raise DomainError(f"heat time must be positive, got s={s}")
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    return (2 * np.pi * s) ** (-d / 2) * np.exp(-np.sum(x * x, axis=-1) / (2 * s))


def rho_c(tau, z) -> np.ndarray:
    """Holomorphic continuation of the heat kernel to (tau, z) in C_+ x C^d.

    Uses the bilinear square ``z . z`` and the principal logarithm for the
    normalising power, so it restricts to :func:`rho_s` for real arguments.
    """
    tau = ComplexTime.of(tau)
    if tau.t <= 0:
        raise DomainError(f"Re(tau) must be positive, got tau={tau.value}")
    tv = tau.value
    z = np.asarray(z, dtype=complex)
    d = z.shape[-1]
    log_pref = -(d / 2) * np.log(2 * np.pi * tv)
    return np.exp(log_pref - np.sum(z * z, axis=-1) / (2 * tv))


def _mu_quadratic_form(x, y, p: TransformParams):
    t, u, s, al = p.t, p.u, p.s, p.alpha
    return (
        (t / 2) * np.sum(x * x, axis=-1)
        + (s - t / 2) * np.sum(y * y, axis=-1)
        + u * np.sum(x * y, axis=-1)
    ) / (2 * al)


def mu_covariance(p: TransformParams) -> np.ndarray:
    """Per-coordinate covariance of (Re z_j, Im z_j) under mu_{s,tau}."""
    p.check()
    return np.array([[p.s - p.t / 2, -p.u / 2], [-p.u / 2, p.t / 2]])


def mu_stau_density(z, p: TransformParams) -> np.ndarray:
    """Density of the heat-kernel measure mu_{s,tau} on C^d (Lebesgue on R^{2d}).

    The normalising constant ``(2 pi sqrt(alpha))^{-d}`` is the one that makes
    the Gaussian with covariance :func:`mu_covariance` a probability density;
    see ``docs/derivations.md``.
    """
    p.check()
    z = np.asarray(z, dtype=complex)
    d = z.shape[-1]
    q = _mu_quadratic_form(z.real, z.imag, p)
    return (2 * np.pi * math.sqrt(p.alpha)) ** (-d) * np.exp(-q)


def heat_apply_poly(f: Polynomial, tau) -> Polynomial:
    """Terminating series ``sum_n (tau/2)^n / n! Laplacian^n f``."""
    tv = ComplexTime.of(tau).value
    out = f
    term = f
    n = 0
    while True:
        term = term.laplacian()
        n += 1
        if not term.terms:
            break
        out = out + term * ((tv / 2) ** n / math.factorial(n))
    return out


def _transform_once(f, p: TransformParams, z, spec: QuadSpec):
    tv = p.tau.value
    w = 1 / tv
    # |rho_c(tau, z - y)| is a real Gaussian in y with this centre and spread
    std = 1 / math.sqrt(w.real)
    center = z.real - (w.imag / w.real) * z.imag
    nodes, weights = legendre_box(center, np.full(z.shape, spec.halfwidth * std), spec.order)
    vals = rho_c(p.tau, z[None, :] - nodes) * np.asarray(f(nodes), dtype=complex)
    return complex(np.sum(weights * vals))


def transform_quadrature(f: Callable, p: TransformParams, z, spec: QuadSpec | None = None) -> complex:
    """Numerical ``int rho_c(tau, z - y) f(y) dy`` over R^d.

    ``f`` takes an array of points of shape ``(n, d)``. The result is checked
    against a coarser rule; a :class:`QuadratureError` carrying the estimate
    is raised when the two disagree beyond ``spec.rtol``.
    """
    p.check()
    spec = spec or QuadSpec()
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    fine = _transform_once(f, p, z, spec)
    coarse = _transform_once(f, p, z, spec.with_order(max(2, (3 * spec.order) // 4)))
    err = abs(fine - coarse)
    if err > spec.rtol * max(1.0, abs(fine)):
        raise QuadratureError(
            f"transform quadrature not converged: estimate {fine} +/- {err:.3g}", fine, err
        )
    return fine


def real_gaussian_moment(k: int, s: float) -> float:
    """E[X^k] for X ~ N(0, s)."""
    if k % 2:
        return 0.0
    return s ** (k // 2) * _double_factorial(k - 1)


def poly_norm_rho_s(f: Polynomial, s: float) -> float:
    """Squared norm of ``f`` in L^2(R^d, rho_s) from exact Gaussian moments."""
    if s <= 0:
        raise DomainError(f"s must be positive, got {s}")
    total = 0j
    items = list(f.terms.items())
    for ea, ca in items:
        for eb, cb in items:
            m = 1.0
            for ja, jb in zip(ea, eb):
                m *= real_gaussian_moment(ja + jb, s)
                if m == 0.0:
                    break
            total += ca * np.conj(cb) * m
    return float(total.real)


def complex_gaussian_moments(p: TransformParams) -> tuple[complex, float]:
    """Second moments ``(E[Z^2], E[|Z|^2])`` of one coordinate under mu_{s,tau}.

    These are ``s - tau`` and ``s``.
    """
    c = mu_covariance(p)
    ez2 = complex(c[0, 0] - c[1, 1], 2 * c[0, 1])
    ezz = float(c[0, 0] + c[1, 1])
    return ez2, ezz


def zmoment(a: int, b: int, p: TransformParams) -> complex:
    """E[Z^a conj(Z)^b] for one coordinate, by Isserlis pairings."""
    ez2, ezz = complex_gaussian_moments(p)
    ezb2 = ez2.conjugate()
    total = 0j
    for k in range(min(a, b) + 1):
        ra, rb = a - k, b - k
        if ra % 2 or rb % 2:
            continue
        # choose k mixed pairs, then pair the rest within each group
        count = (
            math.comb(a, k) * math.comb(b, k) * math.factorial(k)
            * _double_factorial(ra - 1) * _double_factorial(rb - 1)
        )
        total += count * ezz**k * ez2 ** (ra // 2) * ezb2 ** (rb // 2)
    return total


def poly_norm_mu_stau(F: Polynomial, p: TransformParams) -> float:
    """Squared norm of a holomorphic polynomial in L^2(C^d, mu_{s,tau})."""
    p.check()
    cache: dict[tuple[int, int], complex] = {}
    total = 0j
    items = list(F.terms.items())
    for ea, ca in items:
        for eb, cb in items:
            m = 1 + 0j
            for ja, jb in zip(ea, eb):
                key = (ja, jb)
                if key not in cache:
                    cache[key] = zmoment(ja, jb, p)
                m *= cache[key]
            total += ca * np.conj(cb) * m
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"norm has imaginary residue {total.imag}")
    return float(total.real)


def norm_ratio_log(z, p: TransformParams) -> float:
    p.check()
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = z.shape[-1]
    xi, eta = z.real, z.imag
    al = p.alpha
    expo = (
        (p.t / 2) * np.sum(xi * xi) + (p.s - p.t / 2) * np.sum(eta * eta) + p.u * np.sum(xi * eta)
    ) / (2 * al)
    return d * math.log(p.s / (2.0 * math.sqrt(al))) + float(expo)


def norm_ratio_closed_form(z, p: TransformParams) -> float:
    """Closed form of ``int |rho_c(tau, z - x)|^2 / rho_s(x) dx``.

    This is also the sharp pointwise-evaluation bound: ``|F(z)|^2`` is at
    most this value times the squared mu_{s,tau} norm of ``F``. Returns
    ``inf`` instead of overflowing as alpha approaches 0.
    """
    lg = norm_ratio_log(z, p)
    return math.inf if lg > 709.0 else math.exp(lg)


def norm_ratio_quadrature(z, p: TransformParams, spec: QuadSpec | None = None) -> float:
    """Direct quadrature of the same integral (used as an oracle)."""
    p.check()
    spec = spec or QuadSpec()
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = 1 / p.tau.value
    curv = w.real - 1 / (2 * p.s)
    center = (w * z).real / curv
    std = 1 / math.sqrt(2 * curv)
    nodes, weights = legendre_box(center, np.full(z.shape, spec.halfwidth * std), spec.order)
    rc = rho_c(p.tau, z[None, :] - nodes)
    vals = np.abs(rc) ** 2 / rho_s(nodes, p.s)
    return float(np.sum(weights * vals))


@dataclass(frozen=True)
class CoherentStateParams:
    """Wave packet ``exp(i a x^2 - b (x - c)^2 + i dphase x)``."""

    a: float
    b: float
    c: float
    dphase: float

    def __post_init__(self):
        if not self.b > 0:
            raise DomainError(f"b must be positive, got {self.b}")

    def psi(self, x):
        return np.exp(1j * self.a * x * x - self.b * (x - self.c) ** 2 + 1j * self.dphase * x)

    def log_derivative(self, x):
        return 2j * self.a * x - 2 * self.b * (x - self.c) + 1j * self.dphase


def uncertainty_check(c: CoherentStateParams, quad: QuadSpec | None = None):
    """Moments of X and P = -i d/dx in the state ``c`` (hbar = 1).

    Returns ``(var_x, var_p, cov, defect)`` where the Schrodinger defect is
    ``var_x * var_p - 1/4 - cov^2``.
    """
    quad = quad or QuadSpec(kind="hermite", order=64)
    mean, std = c.c, 1 / (2 * math.sqrt(c.b))
    if quad.kind == "hermite":
        x, w = gaussian_expectation_rule([mean], [[std * std]], quad.order)
        x = x[:, 0]
    elif quad.kind == "legendre":
        x, w = legendre_box([mean], [quad.halfwidth * std], quad.order)
        x = x[:, 0]
        w = w * np.abs(c.psi(x)) ** 2
    else:
        raise ValueError(f"unknown quadrature kind {quad.kind!r}")
    norm = np.sum(w)
    if not np.isfinite(norm) or norm <= 0:
        raise QuadratureError("state normalisation failed")
    w = w / norm
    pvals = -1j * c.log_derivative(x)
    ex = np.sum(w * x)
    ex2 = np.sum(w * x * x)
    ep = np.sum(w * pvals)
    ep2 = np.sum(w * np.abs(pvals) ** 2)
    exp_sym = np.sum(w * x * pvals).real
    var_x = float(ex2 - ex**2)
    var_p = float((ep2 - ep * ep.conjugate()).real)
    cov = float(exp_sym - ex * ep.real)
    if abs(ep.imag) > 1e-8:
        raise QuadratureError(f"<P> has imaginary part {ep.imag}")
    defect = var_x * var_p - 0.25 - cov * cov
    return var_x, var_p, cov, defect


def mu_normalization(p: TransformParams, spec: QuadSpec | None = None) -> float:
    """Total mass of mu_{s,tau} on C^1 by tensor Gauss-Legendre on a box."""
    spec = spec or QuadSpec()
    sd = np.sqrt(np.diag(mu_covariance(p)))
    nodes, weights = legendre_box([0.0, 0.0], spec.halfwidth * sd, spec.order)
    z = (nodes[:, 0] + 1j * nodes[:, 1])[:, None]
    return float(np.sum(weights * mu_stau_density(z, p)))
