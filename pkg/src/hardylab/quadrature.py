"""Triangle quadrature rules in barycentric form.

Weights are normalised to sum to one, so ``area * sum(w * f(x_q))``
approximates the integral over a triangle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray  # (q, 3) barycentric coordinates
    weights: np.ndarray  # (q,), sum to 1
    degree: int

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).reshape(-1, 3)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if len(nodes) != len(weights):
            raise ValueError("nodes and weights differ in length")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if not np.isclose(weights.sum(), 1.0, rtol=0, atol=1e-13):
            raise ValueError("quadrature weights must sum to 1")
        if not np.allclose(nodes.sum(axis=1), 1.0, rtol=0, atol=1e-13):
            raise ValueError("barycentric coordinates must sum to 1")
        if np.any(nodes.max(axis=1) >= 1.0 - 1e-14):
            raise ValueError("quadrature node at a triangle vertex")
        for arr in (nodes, weights):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)


def _orbit3(a, w):
    b = 1.0 - 2.0 * a
    return [(b, a, a), (a, b, a), (a, a, b)], [w] * 3


def dunavant2():
    nodes, weights = _orbit3(1.0 / 6.0, 1.0 / 3.0)
    return QuadratureRule(nodes, weights, 2)


def dunavant4():
    n1, w1 = _orbit3(0.445948490915965, 0.223381589678011)
    n2, w2 = _orbit3(0.091576213509771, 0.109951743655322)
    w = np.array(w1 + w2)
    return QuadratureRule(n1 + n2, w / w.sum(), 4)


@lru_cache(maxsize=None)
def _collapsed(n_radial: int, n_angular: int):
    """Conical product nodes collapsed at vertex 1, as ``(nodes, weights)``.

    Gauss-Jacobi(1, 0) in the radial direction absorbs the Duffy
    Jacobian, Gauss-Legendre runs across the rays.  All weights are
    positive and no node touches a vertex.
    """
    xj, wj = roots_jacobi(n_radial, 1.0, 0.0)
    xl, wl = roots_legendre(n_angular)
    u = 0.5 * (1.0 + xj)  # 1 - distance from vertex 1, on [0, 1]
    v = 0.5 * (1.0 + xl)
    U, V = np.meshgrid(u, v, indexing="ij")
    WU, WV = np.meshgrid(wj, wl, indexing="ij")
    l1 = U
    l2 = (1.0 - U) * V
    l0 = 1.0 - l1 - l2
    w = (WU * WV).reshape(-1)
    nodes = np.stack([l0.reshape(-1), l1.reshape(-1), l2.reshape(-1)], axis=1)
    return nodes, w / w.sum()


def collapsed_gauss(npts: int) -> QuadratureRule:
    """Conical product rule with ``npts**2`` nodes, exact to degree ``2*npts - 1``."""
    nodes, w = _collapsed(npts, npts)
    return QuadratureRule(nodes, w, 2 * npts - 1)


def vertex_collapsed(n_angular: int = 24, n_radial: int = 2) -> QuadratureRule:
    """Rule for integrands homogeneous of degree 0 about local vertex 0.

    With ``x`` measured from vertex 0, ``l_i l_j / |x|^2`` (``i, j != 0``)
    is constant along rays from that vertex, so the radial direction is
    integrated exactly and only the smooth angular profile is left to
    ``n_angular``-point Gauss-Legendre.  Geometric subdivision towards the
    vertex gains nothing for such integrands: every self-similar cell
    carries the same relative error.  The polynomial degree is
    ``2*min(n_radial, n_angular) - 1``.
    """
    nodes, w = _collapsed(n_radial, n_angular)
    return QuadratureRule(nodes[:, [1, 0, 2]], w, 2 * min(n_radial, n_angular) - 1)


def rule_of_degree(degree: int) -> QuadratureRule:
    if degree <= 2:
        return dunavant2()
    if degree <= 4:
        return dunavant4()
    return collapsed_gauss((degree + 2) // 2)


def subdivided(rule: QuadratureRule, levels: int = 1) -> QuadratureRule:
    """Apply ``rule`` on the ``4**levels`` cells of uniform quadrisection."""
    cells = [np.eye(3)]
    for _ in range(levels):
        nxt = []
        for c in cells:
            a, b, d = c
            ab, bd, da = (a + b) / 2, (b + d) / 2, (d + a) / 2
            nxt += [np.array(x) for x in ([a, ab, da], [ab, b, bd], [da, bd, d], [ab, bd, da])]
        cells = nxt
    nodes = np.vstack([rule.nodes @ c for c in cells])
    weights = np.concatenate([rule.weights / len(cells)] * len(cells))
    return QuadratureRule(nodes, weights, rule.degree)
