"""Quadrature over dilated level sets rho*Sigma_a with the induced measure.

The level set Sigma_a = {a = 1} of an elliptic homogeneous symbol is
star-shaped, so it is parametrized globally as a radial graph
r(theta) = a(theta)^(-1/2) over the unit sphere.  The area element is

    dS = r^(n-2) sqrt(r^2 + |grad_S r|^2) dsigma(theta),

with dsigma the round measure.  Two weightings are exposed and never
conflated:

* ``weights``         the dilation-invariant measure rho^(n-1) d(omega)
                      appearing in the uniform trace estimates (total
                      mass rho^(n-1) * area(Sigma_a)),
* ``coarea_weights``  the polar factor 2 rho^(n-1)/|grad a(omega)|
                      d(omega) from the change of variables
                      dxi = 2 rho^(n-1)/|grad a(omega)| d(omega) d(rho).

``coarea_verify`` checks that change of variables against a plain tensor
grid integral for rapidly decaying integrands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import gauss_legendre, sphere_rule, tensor_grid_integral
from .symbols import HomogeneousSymbol


@dataclass
class SurfaceQuadrature:
    """Nodes and weights over rho*Sigma_a."""

    symbol: HomogeneousSymbol
    rho: float
    resolution: int
    nodes: np.ndarray            # points on rho*Sigma_a, shape (m, n)
    directions: np.ndarray       # unit vectors theta_j
    surface_points: np.ndarray   # omega_j = r(theta_j) theta_j on Sigma_a
    weights_sigma: np.ndarray    # d(omega) weights on Sigma_a
    grad_norms: np.ndarray       # |grad a(omega_j)| on Sigma_a
    weights: np.ndarray = field(init=False)         # rho^(n-1) d(omega)
    coarea_weights: np.ndarray = field(init=False)  # 2 rho^(n-1)/|grad a| d(omega)

    def __post_init__(self):
        factor = self.rho ** (self.symbol.n - 1)
        self.weights = factor * self.weights_sigma
        self.coarea_weights = 2.0 * factor * self.weights_sigma / self.grad_norms

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def node_defect(self) -> float:
        """max |a(node) - rho^2| / rho^2 over the nodes."""
        vals = self.symbol.value(self.nodes)
        return float(np.abs(vals - self.rho**2).max() / self.rho**2)


def build_quadrature(
    sym: HomogeneousSymbol, rho: float, resolution: int
) -> SurfaceQuadrature:
    """Quadrature over rho*Sigma_a via the radial-graph parametrization."""
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    dirs, w_round = sphere_rule(sym.n, resolution)
    r = sym.level_radius(dirs)
    omega = dirs * r[:, None]

    # tangential gradient of r(theta) = a(theta)^(-1/2) on the sphere
    a_dir = sym.value(dirs)
    grad_ext = -0.5 * a_dir[:, None] ** -1.5 * sym.grad(dirs)
    grad_tan = grad_ext - np.sum(grad_ext * dirs, axis=-1, keepdims=True) * dirs
    area_factor = r ** (sym.n - 2) * np.sqrt(r**2 + np.sum(grad_tan**2, axis=-1))

    return SurfaceQuadrature(
        symbol=sym,
        rho=float(rho),
        resolution=resolution,
        nodes=rho * omega,
        directions=dirs,
        surface_points=omega,
        weights_sigma=w_round * area_factor,
        grad_norms=np.linalg.norm(sym.grad(omega), axis=-1),
    )


def surface_integral(q: SurfaceQuadrature, F, weights: str = "measure") -> float:
    """sum_j w_j F(node_j); F is a callable on points or an array of values.

    weights: "measure" for rho^(n-1) d(omega), "sigma" for plain d(omega)
    on Sigma_a, "coarea" for the polar factor 2 rho^(n-1)/|grad a| d(omega).
    """
    vals = np.asarray(F(q.nodes) if callable(F) else F)
    if vals.shape != q.weights.shape:
        raise ValueError(f"F values have shape {vals.shape}, expected {q.weights.shape}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite integrand values on surface nodes")
    w = {"measure": q.weights, "sigma": q.weights_sigma, "coarea": q.coarea_weights}[
        weights
    ]
    return float(np.sum(w * vals))


@dataclass
class CoareaReport:
    lhs: float
    rhs: float
    rel_gap: float
    resolution: int
    r_max: float


def coarea_verify(
    sym: HomogeneousSymbol,
    F,
    resolution: int = 64,
    r_max: float = 12.0,
    radial_nodes: int = 160,
    lhs_nodes_per_axis: int | None = None,
) -> CoareaReport:
    """Check int F dxi = int_0^inf int_Sigma F(rho*omega) 2 rho^(n-1)/|grad a| d(omega) d(rho).

    F must decay fast enough (Gaussian-type) that truncating at r_max
    leaves a negligible tail.  The left side is a plain tensor-product
    Gauss-Legendre integral over [-r_max, r_max]^n.
    """
    if lhs_nodes_per_axis is None:
        lhs_nodes_per_axis = 160 if sym.n == 2 else 96
    lhs = tensor_grid_integral(F, sym.n, r_max, lhs_nodes_per_axis)

    q = build_quadrature(sym, 1.0, resolution)
    # rho large enough that rho*omega covers |xi| <= r_max in every direction
    rho_max = r_max * float(np.sqrt(sym.value(q.directions).max()))
    rho, w_rho = gauss_legendre(radial_nodes, 0.0, rho_max)
    pts = rho[:, None, None] * q.surface_points[None, :, :]
    vals = np.asarray(F(pts.reshape(-1, sym.n))).reshape(len(rho), -1)
    inner = vals @ (q.weights_sigma / q.grad_norms)
    rhs = float(np.sum(w_rho * 2.0 * rho ** (sym.n - 1) * inner))

    gap = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return CoareaReport(lhs=lhs, rhs=rhs, rel_gap=gap, resolution=resolution, r_max=r_max)
