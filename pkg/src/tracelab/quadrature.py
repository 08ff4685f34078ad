"""Quadrature rules shared across the package.

Everything here is plain numerical plumbing: Gauss-Legendre and
Gauss-Jacobi nodes, panel-based integration for oscillatory radial
integrands, and product rules on the unit sphere.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@lru_cache(maxsize=256)
def _leggauss(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


def gauss_legendre(m: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _leggauss(m)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@lru_cache(maxsize=256)
def _jacobi01(m: int, beta: float):
    # nodes/weights for  int_0^1 u^beta f(u) du  (beta > -1)
    x, w = roots_jacobi(m, 0.0, beta)
    return 0.5 * (x + 1.0), w / 2.0 ** (beta + 1.0)


def gauss_jacobi_power(m: int, beta: float, b: float):
    """Nodes and weights for ``int_0^b u^beta f(u) du`` applied to plain f.

    The returned weights already contain the u^beta factor, so the
    integral is ``sum(w * f(u))``.
    """
    u, w = _jacobi01(m, float(beta))
    return b * u, w * b ** (beta + 1.0)


def panel_edges(b: float, osc_scale: float, feature: float = 1.0) -> np.ndarray:
    """Panel boundaries on [0, b] graded from ``feature`` up to ``osc_scale/2``.

    The first panel has width ~min(feature, osc_scale)/2 and widths double
    until they reach half the oscillation wavelength, after which panels
    are uniform.  Suited to integrands that oscillate on scale
    ``osc_scale`` and have a localized feature of width ``feature`` near 0.
    """
    if b <= 0.0:
        return np.array([0.0])
    cap = 0.5 * osc_scale
    h = min(feature, cap, b)
    edges = [0.0]
    pos = 0.0
    while pos < b:
        pos = min(pos + h, b)
        edges.append(pos)
        h = min(2.0 * h, cap)
    return np.asarray(edges)


def integrate_panels(f, edges: np.ndarray, nodes_per_panel: int = 16):
    """Integrate ``f`` over consecutive panels with one vectorized call."""
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return 0.0
    x, w = _leggauss(nodes_per_panel)
    a = edges[:-1][:, None]
    half = 0.5 * np.diff(edges)[:, None]
    pts = a + half * (x[None, :] + 1.0)
    wts = half * w[None, :]
    vals = np.asarray(f(pts.ravel())).reshape(pts.shape)
    out = np.sum(vals * wts)
    return out if np.iscomplexobj(vals) else float(out)


def radial_integral(
    fn,
    r_max: float,
    osc_scale: float = np.pi,
    zero_exponent: float = 0.0,
    nodes_per_panel: int = 16,
    first_panel_nodes: int = 24,
):
    """``int_0^{r_max} fn(r) dr`` for fn ~ r^zero_exponent near 0.

    The leading power (possibly fractional) is absorbed into a
    Gauss-Jacobi rule on the first panel; the rest uses graded panels
    sized to resolve oscillation on scale ``osc_scale``.
    """
    if r_max <= 0.0:
        return 0.0
    beta = float(zero_exponent)
    h0 = min(1.0, r_max, 0.5 * osc_scale)
    u, w = gauss_jacobi_power(first_panel_nodes, beta, h0)
    first = np.sum(w * (np.asarray(fn(u)) / u**beta))
    if r_max <= h0:
        return first if np.iscomplexobj(first) else float(first)
    edges = h0 + panel_edges(r_max - h0, osc_scale, feature=h0)
    rest = integrate_panels(fn, edges, nodes_per_panel)
    return first + rest


def sphere_rule(n: int, resolution: int):
    """Directions and weights integrating the round measure on S^{n-1}.

    n=2 uses Gauss-Legendre in the angle, n=3 a product of Gauss-Legendre
    in cos(theta) with a trapezoid rule in azimuth, and n>=4 recursive
    Gauss-Jacobi products.  ``sum(w)`` equals the sphere area.
    """
    if n < 2:
        raise ValueError("sphere_rule requires n >= 2")
    if resolution < 4:
        raise ValueError("resolution too small")
    if n == 2:
        ang, w = gauss_legendre(resolution, 0.0, 2.0 * np.pi)
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        return dirs, w
    if n == 3:
        u, wu = gauss_legendre(resolution, -1.0, 1.0)
        nphi = 2 * resolution
        phi = 2.0 * np.pi * np.arange(nphi) / nphi
        wphi = 2.0 * np.pi / nphi
        s = np.sqrt(1.0 - u**2)
        dirs = np.stack(
            [
                np.outer(s, np.cos(phi)),
                np.outer(s, np.sin(phi)),
                np.broadcast_to(u[:, None], (resolution, nphi)).copy(),
            ],
            axis=-1,
        ).reshape(-1, 3)
        w = np.outer(wu, np.full(nphi, wphi)).ravel()
        return dirs, w
    # n >= 4: S^{n-1} as a warped product over the last coordinate
    x, wx = roots_jacobi(resolution, (n - 3) / 2.0, (n - 3) / 2.0)
    sub_dirs, sub_w = sphere_rule(n - 1, resolution)
    s = np.sqrt(1.0 - x**2)
    dirs = np.concatenate(
        [
            s[:, None, None] * sub_dirs[None, :, :],
            np.broadcast_to(x[:, None, None], (resolution, len(sub_w), 1)),
        ],
        axis=-1,
    ).reshape(-1, n)
    w = np.outer(wx, sub_w).ravel()
    return dirs, w


def tensor_grid_integral(f, n: int, r_max: float, nodes_per_axis: int) -> float:
    """Tensor-product Gauss-Legendre integral of f over [-r_max, r_max]^n."""
    x, w = gauss_legendre(nodes_per_axis, -r_max, r_max)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    vals = np.asarray(f(pts), dtype=float)
    wt = w
    for _ in range(n - 1):
        wt = np.multiply.outer(wt, w)
    return float(np.sum(vals * wt.ravel()))
