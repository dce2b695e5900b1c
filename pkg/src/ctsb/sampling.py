"""Monte Carlo layer: diffusion sampling of mu_{s,tau} on SL(2, C).

mu_{s,tau} is the time-1 law of the left-invariant diffusion generated by
``Delta_{s,tau} / 2``. That operator is the Laplacian of the (a, b, c) metric
at ``(a, b, c) = phi_inverse(s, t, u)``, so one step of the geometric
Euler-Maruyama scheme is ``Z <- Z exp(sqrt(h) sum_j xi_j V_j)`` with ``V_j`` an
orthonormal frame for that metric. For a fixed index a, the pair
``(e_a, J e_a)`` spans a commuting subalgebra, so ``Z exp(sqrt(h) (xi V + xi' V'))``
over one pair samples that block's heat semigroup exactly. The default scheme
composes the three blocks symmetrically (Strang), which is weak order 2; the
single-exponential geometric Euler-Maruyama step is kept as ``scheme="euler"``.

Random numbers are drawn per fixed-size chunk of paths from a seed sequence
keyed by ``(seed, chunk index)``, so a given seed always produces the same
paths whatever the execution order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Sequence

import numpy as np

from ._backend import kernels
from .opcalc import MatrixEntry, transform_me
from .params import MetricTriple, TransformParams, phi_inverse
from .su2 import HaarQuadrature, J, heat_kernel_theta, inner_abc, su2_basis


SCHEMES = ("strang", "euler")


@dataclass(frozen=True)
class SamplerConfig:
    n_paths: int = 100_000
    n_steps: int = 200
    seed: int = 0
    antithetic: bool = False
    chunk: int = 4096
    scheme: str = "strang"

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.n_paths < 2:
            raise ValueError("n_paths must be >= 2")
        if self.antithetic and (self.n_paths % 2 or self.chunk % 2):
            raise ValueError("antithetic sampling needs even n_paths and chunk")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.n_steps


@dataclass(frozen=True)
class Estimate:
    mean: complex | float
    stderr: float
    n: int

    def within(self, exact, k: float = 3.0) -> bool:
        return abs(self.mean - exact) <= k * self.stderr

    def z_score(self, exact) -> float:
        if self.stderr == 0:
            return 0.0 if self.mean == exact else math.inf
        return abs(self.mean - exact) / self.stderr


def estimate(values, antithetic: bool = False) -> Estimate:
    """Sample mean and standard error; antithetic pairs are averaged first."""
    v = np.asarray(values)
    n = v.shape[0]
    if antithetic:
        v = 0.5 * (v[0::2] + v[1::2])
    m = v.shape[0]
    if m < 2:
        raise ValueError("need at least two samples")
    mean = v.mean()
    stderr = float(np.sqrt(np.sum(np.abs(v - mean) ** 2) / (m - 1) / m))
    if np.isrealobj(v):
        mean = float(mean)
    return Estimate(mean, stderr, n)


def frame_abc(m: MetricTriple) -> np.ndarray:
    """Orthonormal frame of sl(2, C) for ``<., .>_{a,b,c}``, shape ``(6, 2, 2)``.

    Each pair ``(e_a, J e_a)`` is mixed by the inverse Cholesky factor of
    ``[[a, c], [c, b]]``.
    """
    m.check()
    B = np.array([[m.a, m.c], [m.c, m.b]])
    Linv = np.linalg.inv(np.linalg.cholesky(B))
    frame = []
    for e in su2_basis():
        pair = np.stack([e, J(e)])
        frame.extend(np.einsum("ij,jkl->ikl", Linv, pair))
    return np.array(frame)


def gram(frame, m: MetricTriple) -> np.ndarray:
    k = len(frame)
    return np.array([[inner_abc(frame[i], frame[j], m) for j in range(k)] for i in range(k)])


def step_schedule(V, n_steps: int, scheme: str = "strang"):
    """Fields, per-row scale table and block size for the whole path.

    Returns ``(fields, scale, block)`` with ``scale`` of shape (rows, k); each
    row consumes one slab of normals. For Strang the trailing half step on
    block 1 is merged with the leading half step of the next step, so a row is
    ``B1, B2(h/2), B3(h), B2(h/2)`` and one final row closes with ``B1(h/2)``.
    """
    V = np.asarray(V)
    h = 1.0 / n_steps
    if scheme == "euler":
        return V, np.full((n_steps, len(V)), math.sqrt(h)), len(V)
    fields = np.concatenate([V[0:2], V[2:4], V[4:6], V[2:4]])
    w = np.tile(np.repeat([1.0, 0.5, 1.0, 0.5], 2), (n_steps + 1, 1))
    w[0, :2] = 0.5
    w[-1, :] = 0.0
    w[-1, :2] = 0.5
    return fields, np.sqrt(w * h), 2


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_chunk(p: TransformParams, cfg: SamplerConfig, index: int) -> tuple[np.ndarray, float]:
    """Endpoints of chunk ``index`` alone; depends only on (p, cfg, index)."""
    start = index * cfg.chunk
    if not 0 <= start < cfg.n_paths:
        raise IndexError(f"chunk {index} out of range")
    size = min(cfg.chunk, cfg.n_paths - start)
    V, scale, block = step_schedule(frame_abc(phi_inverse(p.s, p.t, p.u)), cfg.n_steps, cfg.scheme)
    rows, k = scale.shape[0], V.shape[0]
    rng = _chunk_rng(cfg.seed, index)
    if cfg.antithetic:
        half = rng.standard_normal((rows, size // 2, k))
        xi = np.empty((rows, size, k))
        xi[:, 0::2] = half
        xi[:, 1::2] = -half
    else:
        xi = rng.standard_normal((rows, size, k))
    return kernels.sde_endpoints(V, xi, scale, block)


def n_chunks(cfg: SamplerConfig) -> int:
    return -(-cfg.n_paths // cfg.chunk)


def iter_mu_stau(p: TransformParams, cfg: SamplerConfig) -> Iterator[tuple[np.ndarray, float]]:
    """Yield ``(endpoints, max |det - 1|)`` chunk by chunk."""
    p.check()
    for index in range(n_chunks(cfg)):
        yield sample_chunk(p, cfg, index)


def sample_mu_stau(p: TransformParams, cfg: SamplerConfig, return_det_error: bool = False):
    """Endpoints of ``cfg.n_paths`` simulated paths, shape ``(n_paths, 2, 2)``."""
    parts, worst = [], 0.0
    for Z, w in iter_mu_stau(p, cfg):
        parts.append(Z)
        worst = max(worst, w)
    Z = np.concatenate(parts)
    return (Z, worst) if return_det_error else Z


def mc_expectation(fn: Callable, p: TransformParams, cfg: SamplerConfig) -> Estimate:
    """Estimate ``E[fn(Z)]`` under mu_{s,tau}; ``fn`` maps (N, 2, 2) -> (N,)."""
    vals = np.concatenate([np.asarray(fn(Z)) for Z, _ in iter_mu_stau(p, cfg)])
    return estimate(vals, cfg.antithetic)


def mc_norm_sq(f: MatrixEntry, p: TransformParams, cfg: SamplerConfig) -> Estimate:
    """Monte Carlo ``E|F(Z)|^2`` with ``F = M_tau f``."""
    p.check()
    if f.n == 1:
        return Estimate(float(abs(f.A[0, 0]) ** 2), 0.0, cfg.n_paths)
    F = transform_me(f, p.tau)
    return mc_expectation(lambda Z: np.abs(F(Z)) ** 2, p, cfg)


def trace_zz(Z) -> np.ndarray:
    """``Tr(Z Z*)``; exactly right-K-invariant."""
    return np.sum(np.abs(Z) ** 2, axis=(-2, -1))


def k_average(F: Callable, z, q: HaarQuadrature):
    """Right K-average ``sum_i w_i F(z k_i)``; ``F`` takes a batch of group elements."""
    z = np.asarray(z, dtype=complex)
    return q.integrate(F(z[None] @ q.nodes) if z.ndim == 2 else F(z[:, None] @ q.nodes[None]).T)


@dataclass
class NuReport:
    t: float
    variants: list
    estimates: list
    max_pair_z: float
    passed: bool


def nu_invariance_stat(t: float, variants: Sequence[tuple[float, float]], cfg: SamplerConfig) -> NuReport:
    """Compare MC means of Tr(Z Z*) under mu_{s, t+iu} across (s, u) variants."""
    ests = []
    for i, (s, u) in enumerate(variants):
        p = TransformParams.make(s, t, u).check()
        sub = replace(cfg, seed=cfg.seed + 1000 * i)
        ests.append(mc_expectation(trace_zz, p, sub))
    worst = 0.0
    for i in range(len(ests)):
        for j in range(i + 1, len(ests)):
            comb = math.hypot(ests[i].stderr, ests[j].stderr)
            worst = max(worst, abs(ests[i].mean - ests[j].mean) / comb)
    return NuReport(t, list(variants), ests, worst, worst <= 3.0)


def rho_deviation_sup(s: float, theta_grid: int = 2001) -> float:
    """``max_theta |rho_s(k_theta) - 1|`` on a uniform grid over [0, pi]."""
    theta = np.linspace(0.0, np.pi, theta_grid)
    return float(np.max(np.abs(heat_kernel_theta(s, theta) - 1.0)))


def decay_rate_fit(s_values=None, theta_grid: int = 2001):
    """Least-squares slope of ``log sup|rho_s - 1|`` against s; returns (rate, devs)."""
    s_values = np.linspace(2.0, 8.0, 13) if s_values is None else np.asarray(s_values, float)
    devs = np.array([rho_deviation_sup(s, theta_grid) for s in s_values])
    slope, _ = np.polyfit(s_values, np.log(devs), 1)
    return -slope, devs
