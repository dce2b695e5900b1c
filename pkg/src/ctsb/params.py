"""Parameter domain for the (s, tau) transform and the metric reparametrization.

A transform is indexed by a real ``s > 0`` and a complex time ``tau = t + iu``.
It is well defined when ``tau`` lies in the open disk of radius ``s`` centred
at ``s``, equivalently when ``alpha(s, tau) > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class DomainError(ValueError):
    """Raised when parameters fall outside their admissible domain."""


@dataclass(frozen=True)
class ComplexTime:
    t: float
    u: float = 0.0

    @property
    def value(self) -> complex:
        return complex(self.t, self.u)

    @classmethod
    def of(cls, tau) -> "ComplexTime":
        if isinstance(tau, ComplexTime):
            return tau
        tau = complex(tau)
        return cls(tau.real, tau.imag)


@dataclass(frozen=True)
class TransformParams:
    s: float
    tau: ComplexTime

    @classmethod
    def make(cls, s: float, t: float, u: float = 0.0) -> "TransformParams":
        return cls(float(s), ComplexTime(float(t), float(u)))

    @property
    def t(self) -> float:
        return self.tau.t

    @property
    def u(self) -> float:
        return self.tau.u

    @property
    def alpha(self) -> float:
        return alpha(self)

    def check(self) -> "TransformParams":
        """Return self, or raise :class:`DomainError` if outside the disk."""
        if not in_disk(self):
            raise DomainError(
                f"alpha <= 0: tau={self.t}+{self.u}i outside D(s,s) for s={self.s} "
                f"(alpha={alpha(self):.6g})"
            )
        return self


@dataclass(frozen=True)
class MetricTriple:
    a: float
    b: float
    c: float

    def check(self) -> "MetricTriple":
        if not (self.a > 0 and self.b > 0 and self.a * self.b - self.c**2 > 0):
            raise DomainError(
                f"invalid metric triple (a={self.a}, b={self.b}, c={self.c}): "
                "need a > 0, b > 0, ab - c^2 > 0"
            )
        return self

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


def alpha(p: TransformParams) -> float:
    """Ellipticity determinant ``(2st - t^2 - u^2) / 4``."""
    s, t, u = p.s, p.tau.t, p.tau.u
    return (2.0 * s * t - t * t - u * u) / 4.0


def in_disk(p: TransformParams) -> bool:
    # exact comparison, no epsilon padding at the boundary
    return p.s > 0 and alpha(p) > 0


def phi(m: MetricTriple) -> tuple[float, float, float]:
    """Map a metric triple ``(a, b, c)`` to ``(s, t, u)``."""
    m.check()
    det = m.a * m.b - m.c * m.c
    return ((m.a + m.b) / det, 2.0 * m.a / det, 2.0 * m.c / det)


def phi_inverse(s: float, t: float, u: float = 0.0) -> MetricTriple:
    """Map ``(s, t, u)`` in the disk back to the metric triple ``(a, b, c)``."""
    p = TransformParams.make(s, t, u).check()
    al = p.alpha
    return MetricTriple(t / 2.0 / al, (s - t / 2.0) / al, u / 2.0 / al)


def isometry_params_grid(n_points: int = 20, s_values=(0.5, 1.0, 2.0, 4.0)):
    """Deterministic grid of valid (s, tau) points spread through each disk."""
    pts = []
    per_s = -(-n_points // len(s_values))
    for s in s_values:
        for k in range(per_s):
            ang = 2 * math.pi * (k + 0.5) / per_s
            rad = 0.8 * s * (0.3 + 0.7 * ((k * 7919) % per_s) / max(per_s - 1, 1))
            t = s + rad * math.cos(ang)
            u = rad * math.sin(ang)
            pts.append(TransformParams.make(s, t, u).check())
    return pts[:n_points]
