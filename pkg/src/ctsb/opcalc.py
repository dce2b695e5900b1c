"""Operator calculus on matrix entries of SU(2) / SL(2, C).

A left-invariant operator L acting on ``f_{pi,A}(x) = Tr(pi(x) A)`` acts by a
matrix on A: ``X~ f_{pi,A} = f_{pi, pi_*(X) A}``. For ``|f|^2`` on SL(2, C) the
relevant representation is ``pi (x) conj(pi)``, whose generators are built in
:class:`TensorConjRep`. Every identity below is then a statement about
finite matrices and is checked at machine precision.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .params import ComplexTime, MetricTriple, TransformParams, isometry_params_grid, phi_inverse  # noqa: F401
from .su2 import Irrep, irrep, matrix_entry


@dataclass(frozen=True, eq=False)
class MatrixEntry:
    """``f(x) = Tr(pi_n(x) A)``; evaluation uses the holomorphic rep on SL(2, C)."""

    rep: Irrep
    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        if A.shape != (self.rep.n, self.rep.n):
            raise ValueError(f"A must be {self.rep.n}x{self.rep.n}, got {A.shape}")
        object.__setattr__(self, "A", A)

    @classmethod
    def of(cls, n: int, A) -> "MatrixEntry":
        return cls(irrep(n), A)

    @property
    def n(self) -> int:
        return self.rep.n

    def __call__(self, g):
        return matrix_entry(self.n, self.A, g)

    def __add__(self, other: "MatrixEntry") -> "MatrixEntry":
        if other.n != self.n:
            raise ValueError("matrix entries of different irreps")
        return MatrixEntry(self.rep, self.A + other.A)

    def __mul__(self, k) -> "MatrixEntry":
        return MatrixEntry(self.rep, k * self.A)

    __rmul__ = __mul__

    def l2_norm_sq(self) -> float:
        """Norm in L^2(SU(2), Haar) by Schur orthogonality."""
        return float(np.sum(np.abs(self.A) ** 2) / self.n)


def random_endomorphism(n: int, rng) -> np.ndarray:
    """Complex Ginibre matrix normalised in Frobenius norm."""
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return A / np.linalg.norm(A)


class TensorConjRep:
    """``pi (x) conj(pi)`` as a representation of sl(2, C) viewed as a real algebra.

    ``M(e_a) = pi(e_a) (x) I + I (x) conj(pi(e_a))`` and
    ``M(J e_a) = i pi(e_a) (x) I - i I (x) conj(pi(e_a))``.
    """

    def __init__(self, base: Irrep | int):
        self.base = irrep(base) if isinstance(base, int) else base
        n = self.base.n
        eye = np.eye(n)
        g = self.base.gen
        self.dim = n * n
        self.X = np.stack([np.kron(ga, eye) + np.kron(eye, ga.conj()) for ga in g])
        self.Y = np.stack([1j * np.kron(ga, eye) - 1j * np.kron(eye, ga.conj()) for ga in g])

    def M(self, x_coeffs, y_coeffs=(0.0, 0.0, 0.0)) -> np.ndarray:
        """Image of ``sum x_a e_a + sum y_a J e_a`` (real coefficients)."""
        return np.einsum("a,aij->ij", np.asarray(x_coeffs, float), self.X) + np.einsum(
            "a,aij->ij", np.asarray(y_coeffs, float), self.Y
        )

    @cached_property
    def holo_block(self) -> np.ndarray:
        """Generators acting on the holomorphic factor only."""
        return np.stack([np.kron(ga, np.eye(self.base.n)) for ga in self.base.gen])


@dataclass(frozen=True)
class LiftedOperator:
    matrix: np.ndarray
    label: str

    def __matmul__(self, other):
        return self.matrix @ (other.matrix if isinstance(other, LiftedOperator) else other)


def _as_tensor(r) -> TensorConjRep:
    if isinstance(r, TensorConjRep):
        return r
    return TensorConjRep(r)


def lift_delta_k(r) -> LiftedOperator:
    """Laplacian of K: sum of squares of the e_a fields.

    On a bare :class:`Irrep` this is the Casimir.
    """
    if isinstance(r, Irrep):
        return LiftedOperator(np.einsum("aij,ajk->ik", r.gen, r.gen), "delta_k")
    r = _as_tensor(r)
    return LiftedOperator(np.einsum("aij,ajk->ik", r.X, r.X), "delta_k")


def _del_fields(r: TensorConjRep, sign: int):
    return [(r.X[a] + sign * 1j * r.Y[a]) / 2 for a in range(3)]


def lift_del2(r) -> LiftedOperator:
    r = _as_tensor(r)
    return LiftedOperator(sum(D @ D for D in _del_fields(r, -1)), "del2")


def lift_delbar2(r) -> LiftedOperator:
    r = _as_tensor(r)
    return LiftedOperator(sum(D @ D for D in _del_fields(r, +1)), "delbar2")


def lift_delta_stau(r, p: TransformParams) -> LiftedOperator:
    """``sum_a (s - t/2) X_a^2 + (t/2) Y_a^2 - u X_a Y_a``."""
    p.check()
    r = _as_tensor(r)
    s, t, u = p.s, p.t, p.u
    mat = sum(
        (s - t / 2) * r.X[a] @ r.X[a] + (t / 2) * r.Y[a] @ r.Y[a] - u * r.X[a] @ r.Y[a]
        for a in range(3)
    )
    return LiftedOperator(mat, "delta_stau")


def lift_L_abc(r, m: MetricTriple) -> LiftedOperator:
    """Laplacian of the (a, b, c) metric: ``(b X^2 + a Y^2 - 2c XY) / (ab - c^2)``."""
    m.check()
    r = _as_tensor(r)
    det = m.a * m.b - m.c * m.c
    mat = sum(
        m.b * r.X[a] @ r.X[a] + m.a * r.Y[a] @ r.Y[a] - 2 * m.c * r.X[a] @ r.Y[a]
        for a in range(3)
    ) / det
    return LiftedOperator(mat, "L_abc")


def opnorm(M) -> float:
    return float(np.linalg.norm(M, 2)) if np.size(M) else 0.0


def commutator_norm(A, B) -> float:
    A = A.matrix if isinstance(A, LiftedOperator) else A
    B = B.matrix if isinstance(B, LiftedOperator) else B
    return opnorm(A @ B - B @ A)


def decomposition_residual(r, p: TransformParams) -> float:
    """Operator norm of ``s Delta_K - Delta_{s,tau} - tau del^2 - conj(tau) delbar^2``."""
    r = _as_tensor(r)
    tau = p.tau.value
    R = (
        p.s * lift_delta_k(r).matrix
        - lift_delta_stau(r, p).matrix
        - tau * lift_del2(r).matrix
        - np.conj(tau) * lift_delbar2(r).matrix
    )
    return opnorm(R)


def commutator_suite(r, p: TransformParams) -> dict[str, float]:
    """Pairwise commutator norms among the four lifted Laplacians."""
    r = _as_tensor(r)
    ops = {
        "delta_k": lift_delta_k(r),
        "del2": lift_del2(r),
        "delbar2": lift_delbar2(r),
        "delta_stau": lift_delta_stau(r, p),
    }
    names = list(ops)
    out = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            out[f"[{a},{b}]"] = commutator_norm(ops[a], ops[b])
    return out


def right_invariance_suite(r, p: TransformParams) -> float:
    """Max commutator norm of del^2, delbar^2, Delta_{s,tau} with each M(e_a), M(Je_a)."""
    r = _as_tensor(r)
    ops = [lift_del2(r), lift_delbar2(r), lift_delta_stau(r, p)]
    gens = list(r.X) + list(r.Y)
    worst = 0.0
    for L in ops:
        for G in gens[:3] if L.label == "delta_stau" else gens:
            worst = max(worst, commutator_norm(L.matrix, G))
    return worst


def transform_me(f: MatrixEntry, tau) -> MatrixEntry:
    """``M_tau f_{pi,A} = f_{pi_C, exp(tau C / 2) A}``."""
    tv = ComplexTime.of(tau).value
    C = lift_delta_k(f.rep).matrix
    return MatrixEntry(f.rep, expm(tv * C / 2) @ f.A)


def surjectivity_witness(F: MatrixEntry, tau) -> MatrixEntry:
    """The matrix entry on K whose transform is ``F``."""
    tv = ComplexTime.of(tau).value
    C = lift_delta_k(F.rep).matrix
    return MatrixEntry(F.rep, expm(-tv * C / 2) @ F.A)


def _tensor_A(f: MatrixEntry) -> np.ndarray:
    return np.kron(f.A, f.A.conj())


def _real_trace(z: complex, what: str) -> float:
    if abs(z.imag) > 1e-10 * max(1.0, abs(z.real)):
        raise ArithmeticError(f"{what} has imaginary residue {z.imag:.3g}")
    return float(z.real)


def norm_sq_rho_s(f: MatrixEntry, s: float) -> float:
    """``||f||^2`` in L^2(SU(2), rho_s) as ``Tr(exp(s C_sigma / 2) (A (x) conj A))``."""
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    r = TensorConjRep(f.rep)
    val = np.trace(expm(s * lift_delta_k(r).matrix / 2) @ _tensor_A(f))
    return _real_trace(complex(val), "||f||^2_rho_s")


def norm_sq_mu_stau(f: MatrixEntry, p: TransformParams, order=("stau", "del2", "delbar2")) -> float:
    """``||M_tau f||^2`` in L^2(SL(2, C), mu_{s,tau}) by the exponential product.

    ``order`` permutes the three (commuting) exponential factors.
    """
    p.check()
    r = TensorConjRep(f.rep)
    tau = p.tau.value
    factors = {
        "stau": expm(lift_delta_stau(r, p).matrix / 2),
        "del2": expm(tau * lift_del2(r).matrix / 2),
        "delbar2": expm(np.conj(tau) * lift_delbar2(r).matrix / 2),
    }
    E = factors[order[0]] @ factors[order[1]] @ factors[order[2]]
    return _real_trace(complex(np.trace(E @ _tensor_A(f))), "||F||^2_mu")


def holomorphic_norm_sq_mu(F: MatrixEntry, p: TransformParams) -> float:
    """``||F||^2`` for a holomorphic matrix entry F (no M_tau applied)."""
    p.check()
    r = TensorConjRep(F.rep)
    E = expm(lift_delta_stau(r, p).matrix / 2)
    return _real_trace(complex(np.trace(E @ _tensor_A(F))), "||F||^2_mu")


def holomorphic_fourth_moment_mu(F: MatrixEntry, p: TransformParams) -> float:
    """``E|F|^4`` under mu_{s,tau}.

    ``|F|^4`` is a matrix entry of ``pi (x) conj(pi) (x) pi (x) conj(pi)``, so the same
    exponential formula applies on that n^4-dimensional space. Together with
    :func:`holomorphic_norm_sq_mu` this gives the exact variance of ``|F|^2``, which is
    what decides whether a Monte Carlo standard error can be trusted.
    """
    p.check()
    n = F.n
    eye = np.eye(n)

    def k4(a, b, c, d):
        return np.kron(np.kron(a, b), np.kron(c, d))

    s, t, u = p.s, p.t, p.u
    L = 0
    for g in F.rep.gen:
        X = k4(g, eye, eye, eye) + k4(eye, g.conj(), eye, eye) + k4(eye, eye, g, eye) + k4(eye, eye, eye, g.conj())
        Y = 1j * (k4(g, eye, eye, eye) - k4(eye, g.conj(), eye, eye) + k4(eye, eye, g, eye) - k4(eye, eye, eye, g.conj()))
        L = L + (s - t / 2) * X @ X + (t / 2) * Y @ Y - u * X @ Y
    B = k4(F.A, F.A.conj(), F.A, F.A.conj())
    return _real_trace(complex(np.trace(expm(L / 2) @ B)), "E|F|^4")


def expected_trace_zz(p: TransformParams) -> float:
    """Exact ``E[Tr(Z Z*)]`` under mu_{s,tau}: sum of |Z_ij|^2 over entries."""
    total = 0.0
    for i in range(2):
        for j in range(2):
            A = np.zeros((2, 2))
            A[j, i] = 1.0
            total += holomorphic_norm_sq_mu(MatrixEntry.of(2, A), p)
    return total


def labc_at(p: TransformParams) -> MetricTriple:
    return phi_inverse(p.s, p.t, p.u)
