"""Tensor-product Gauss rules used by the Euclidean layer."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss


class QuadratureError(RuntimeError):
    """Quadrature did not reach the requested accuracy."""

    def __init__(self, msg, value=None, error=None):
        super().__init__(msg)
        self.value = value
        self.error = error


@dataclass(frozen=True)
class QuadSpec:
    """How to integrate: ``kind`` is ``"hermite"`` or ``"legendre"``.

    ``halfwidth`` is the truncation box half-width in standard deviations
    (only used by the Legendre rule).
    """

    kind: str = "legendre"
    order: int = 64
    halfwidth: float = 8.0
    rtol: float = 1e-8

    def with_order(self, order: int) -> "QuadSpec":
        return QuadSpec(self.kind, order, self.halfwidth, self.rtol)


def gauss_hermite(order: int):
    """Nodes/weights for E[g(X)], X ~ N(0, 1)."""
    x, w = hermegauss(order)
    return x, w / np.sqrt(2.0 * np.pi)


def gaussian_expectation_rule(mean, cov, order: int):
    """Tensor Gauss-Hermite rule for ``E[g(X)]`` with ``X ~ N(mean, cov)``.

    Returns ``(nodes, weights)`` with nodes of shape ``(order**k, k)``.
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    k = mean.size
    x, w = gauss_hermite(order)
    grids = np.meshgrid(*([x] * k), indexing="ij")
    std_nodes = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*([w] * k), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    L = np.linalg.cholesky(cov)
    return mean + std_nodes @ L.T, weights


def legendre_box(centers, halfwidths, order: int):
    """Tensor Gauss-Legendre rule on the box ``centers +/- halfwidths``."""
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    halfwidths = np.atleast_1d(np.asarray(halfwidths, dtype=float))
    x, w = leggauss(order)
    axes = [c + h * x for c, h in zip(centers, halfwidths)]
    waxes = [h * w for h in halfwidths]
    nodes = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    weights = np.prod(
        np.stack([g.ravel() for g in np.meshgrid(*waxes, indexing="ij")], axis=-1), axis=-1
    )
    return nodes, weights
