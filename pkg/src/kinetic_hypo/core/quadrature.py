"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Fixed quadrature rules shared by the numerical modules.

All rules return ``(nodes, weights)`` pairs that integrate a plain function
(no implicit weight) over their domain, except where a weight exponent is
named explicitly. Rules are cached because the same sizes are requested by
every field assembly.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import special


Rule = Tuple[np.ndarray, np.ndarray]


def gauss_legendre(a: float, b: float, n: int) -> Rule:
    """
    Gauss-Legendre nodes and weights on [a, b].

    Args:
        a (float): Lower bound.
        b (float): Upper bound.
        n (int): Number of nodes.

    Returns:
        Rule: Nodes and weights on [a, b].
    """
    knots, weights = _legendre(n)
    return 0.5 * (b - a) * knots + 0.5 * (b + a), 0.5 * (b - a) * weights


def composite_legendre(a: float, b: float, n_panels: int, n_nodes: int) -> Rule:
    """Composite Gauss-Legendre rule on equal panels of [a, b]."""
    edges = np.linspace(a, b, n_panels + 1)
    knots, weights = _legendre(n_nodes)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * knots[None, :]).ravel()
    wts = (half[:, None] * weights[None, :]).ravel()
    return nodes, wts


def gauss_hermite_line(n: int, scale: float, center: float = 0.0) -> Rule:
    """
    Hermite-type rule for integrals over the whole real line.

    Nodes are ``center + sqrt(2)*scale*x_i`` and the Gaussian weight is folded
    into the weights, so that ``sum(w * g(nodes))`` approximates ``int g``
    for any ``g`` decaying like a Gaussian of width ``scale``.

    Args:
        n (int): Number of nodes.
        scale (float): Width of the Gaussian envelope the rule is adapted to.
        center (float): Shift of the node set.

    Returns:
        Rule: Nodes and weights on the real line.
    """
    knots, weights = _hermite(n)
    h = np.sqrt(2.0) * scale
    return center + h * knots, h * np.exp(np.log(weights) + knots**2)


def gauss_laguerre_half_line(n: int, scale: float) -> Rule:
    """Laguerre-type rule for ``int_0^inf g(tau) dtau`` with exponential decay ``scale``."""
    knots, weights = np.polynomial.laguerre.laggauss(n)
    return scale * knots, scale * np.exp(np.log(weights) + knots)


@lru_cache(maxsize=64)
def gauss_jacobi_unit(n: int, power: float) -> Rule:
    """
    Nodes and weights for ``int_0^1 h(r) r**power dr``.

    The Jacobi weight absorbs an algebraic endpoint singularity at r = 0 so that
    ``h`` only needs to be smooth.

    Args:
        n (int): Number of nodes.
        power (float): Exponent of the weight, > -1.

    Returns:
        Rule: Nodes in (0, 1) and weights (weight already folded in).
    """
    x, w = special.roots_jacobi(n, 0.0, power)
    r = 0.5 * (1.0 + x)
    return r, w * 2.0 ** (-power - 1.0)


def circle_rule(n: int) -> Rule:
    """Trapezoid rule on the unit circle; nodes are unit vectors of shape (n, 2)."""
    phi = 2.0 * np.pi * np.arange(n) / n
    nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    return nodes, np.full(n, 2.0 * np.pi / n)


def sphere_rule(dim: int, n_2d: int = 256, sizes_3d: Tuple[int, int] = (15, 20)) -> Rule:
    """
    Quadrature on the unit sphere of R^dim for dim in {1, 2, 3}.

    dim = 1 uses the two points {+1, -1} with unit weights (counting measure),
    dim = 2 the trapezoid rule on the circle, dim = 3 a product of Gauss-Legendre
    in the polar cosine and the trapezoid rule in azimuth. All rules are
    antipodally symmetric when the azimuthal size is even.

    The default d = 3 size (15, 20) has 300 nodes and integrates every
    polynomial of degree <= 19 on the sphere exactly (degree 2 n_z - 1 in the
    cosine, n_phi - 1 in azimuth). It stands in for a 302-node Lebedev rule,
    which reaches degree 29 but is not available in SciPy < 1.15.

    Returns:
        Rule: Unit vectors of shape (n, dim) and surface weights.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.ones(2)
    if dim == 2:
        return circle_rule(n_2d)
    if dim == 3:
        n_z, n_phi = sizes_3d
        z, wz = _legendre(n_z)
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        zz, pp = np.meshgrid(z, phi, indexing="ij")
        rho = np.sqrt(1.0 - zz**2)
        nodes = np.stack(
            [(rho * np.cos(pp)).ravel(), (rho * np.sin(pp)).ravel(), zz.ravel()], axis=1
        )
        weights = (wz[:, None] * np.full(n_phi, 2.0 * np.pi / n_phi)[None, :]).ravel()
        return nodes, weights
    raise ValueError(f"sphere_rule supports dim in {{1, 2, 3}}, got {dim}")


def sphere_area(dim: int) -> float:
    """Surface measure |S^{dim-1}| (2 for dim = 1)."""
    return float(2.0 * np.pi ** (dim / 2.0) / special.gamma(dim / 2.0))


def orthonormal_complement(direction: np.ndarray) -> np.ndarray:
    """
    Orthonormal basis of the hyperplane perpendicular to ``direction``.

    Gram-Schmidt against the first coordinate axis, falling back to the second
    axis when ``direction`` is within 0.9 of the first.

    Args:
        direction (np.ndarray): Unit vector of shape (d,).

    Returns:
        np.ndarray: Array of shape (d - 1, d) whose rows span the complement.
    """
    d = direction.shape[0]
    basis = []
    axes = list(np.eye(d))
    reference = axes[0] if abs(direction[0]) < 0.9 else axes[1]
    ordered = [reference] + [a for a in axes if a is not reference]
    for axis in ordered:
        vec = axis - np.dot(axis, direction) * direction
        for b in basis:
            vec = vec - np.dot(vec, b) * b
        norm = np.linalg.norm(vec)
        if norm > 1e-8:
            basis.append(vec / norm)
        if len(basis) == d - 1:
            break
    return np.array(basis).reshape(d - 1, d)


@lru_cache(maxsize=64)
def _legendre(n: int) -> Rule:
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=64)
def _hermite(n: int) -> Rule:
    return np.polynomial.hermite.hermgauss(n)
