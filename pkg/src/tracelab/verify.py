"""Experiments composing symbols, surfaces, fields and constants.

Each operation here verifies one estimate numerically:

* ``trace_norm`` / ``trace_ratio``  the weighted restriction norm on a
  dilated level set against a Sobolev norm;
* ``rho_scan``                       the dilation rate rho^(s-1/2) of the
  homogeneous estimate, and uniform boundedness for bracket weights;
* ``sharpness_run``                  truncations of the Cauchy-Schwarz
  optimal profile approaching the sharp constant from below;
* ``critical_comparison``            at regularity exactly 1/2 the plain
  trace ratio grows along a truncation ladder (log-type divergence)
  while the wedge-filtered ratio stays bounded;
* ``duality_check``                  the adjoint-propagator identity: the
  squared norm of F^-1[(F_{t,x} v)(a(xi), xi)] computed directly on the
  frequency grid equals the radial integral of surface integrals with
  the coarea weight 2 rho^(n-1)/|grad a(omega)|.

Radial-path traces use the calibrated Hankel reduction and are only
available over the round sphere; grid-path traces interpolate the space
samples at the quadrature nodes and work for any admissible symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import eval_legendre, lpmv

from .constants import (
    ConstantResult,
    c1_trace_constant,
    gamma_closed_form_constant,
)
from .fields import (
    GridField,
    RadialProfile,
    TestFunction,
    harmonic_sq_norm,
    make_test_function,
    radial_trace_coefficient,
    sobolev_norm,
    spherical_harmonic,
)
from .quadrature import gauss_legendre
from .special_functions import WeightSpec, bracket_weight, power_weight
from .surfaces import SurfaceQuadrature, build_quadrature
from .symbols import HomogeneousSymbol, QuadraticSymbol


def _is_round_sphere(sym: HomogeneousSymbol) -> bool:
    return isinstance(sym, QuadraticSymbol) and sym.is_identity


def trace_norm(f, q: SurfaceQuadrature) -> float:
    """|| f restricted to rho*Sigma_a || in L^2(rho^(n-1) d omega).

    GridFields are interpolated at the quadrature nodes; RadialProfiles
    use the Hankel coefficient (round sphere only).
    """
    if isinstance(f, TestFunction):
        f = f.radial if (f.radial is not None and _is_round_sphere(q.symbol)) else f.grid
    if isinstance(f, RadialProfile):
        if not _is_round_sphere(q.symbol):
            raise ValueError("radial-path traces are defined over the round sphere only")
        coef = radial_trace_coefficient(f, q.rho)
        return float(
            np.sqrt(q.rho ** (f.n - 1) * abs(coef) ** 2 * harmonic_sq_norm(f.n, f.degree))
        )
    if isinstance(f, GridField):
        reach = np.abs(q.nodes).max()
        if reach > 0.5 * f.extent * 0.98:
            raise ValueError(
                f"surface of radius {reach:.3f} exceeds the grid domain "
                f"[-{f.extent / 2:.3f}, {f.extent / 2:.3f}]"
            )
        vals = np.abs(f.interpolate(q.nodes)) ** 2
        return float(np.sqrt(np.sum(q.weights * vals)))
    raise TypeError(f"cannot take trace of {type(f)!r}")


def trace_ratio(
    f,
    sym: HomogeneousSymbol,
    rho: float = 1.0,
    s: float = 1.0,
    flavor="homogeneous",
    resolution: int = 48,
) -> float:
    """trace_norm / sobolev_norm; nan marks a divergent right-hand side."""
    q = build_quadrature(sym, rho, resolution)
    lhs = trace_norm(f, q)
    rhs = sobolev_norm(f, s, flavor)
    if not math.isfinite(rhs) or rhs == 0.0:
        return math.nan
    return lhs / rhs


# -- dilation scan ------------------------------------------------------


@dataclass
class TraceReport:
    symbol: dict
    family: str
    flavor: str
    rows: list                      # (rho_or_R, lhs, rhs, ratio)
    fitted_exponent: Optional[float] = None
    exponent_stderr: Optional[float] = None
    constant_bound: Optional[float] = None
    params: dict = field(default_factory=dict)

    def ratios(self) -> np.ndarray:
        return np.array([r[3] for r in self.rows])

    def as_dict(self) -> dict:
        return {
            "symbol": self.symbol,
            "family": self.family,
            "flavor": self.flavor,
            "rows": [list(map(float, r)) for r in self.rows],
            "fitted_exponent": self.fitted_exponent,
            "exponent_stderr": self.exponent_stderr,
            "constant_bound": self.constant_bound,
            "params": self.params,
        }


def _fit_loglog(xs, ys, drop_ends: bool):
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    if drop_ends and len(xs) >= 6:
        xs, ys = xs[1:-1], ys[1:-1]
    A = np.stack([xs, np.ones_like(xs)], axis=1)
    coef, res, *_ = np.linalg.lstsq(A, ys, rcond=None)
    dof = max(len(xs) - 2, 1)
    resid = ys - A @ coef
    var = float(resid @ resid) / dof
    cov = var * np.linalg.inv(A.T @ A)
    return float(coef[0]), float(np.sqrt(max(cov[0, 0], 0.0)))


def rho_scan(
    sym: HomogeneousSymbol,
    s: float,
    rho_list: Sequence[float],
    weights: str = "power",
    k: int = 0,
    u_max: float = 240.0,
    r_cap: float = 240.0,
) -> TraceReport:
    """Supremal trace ratio of the optimal radial family along a rho ladder.

    weights='power': ratio against the homogeneous norm; the fitted slope
    of log(ratio) vs log(rho) recovers the rate exponent s - 1/2.
    weights='bracket': ratio against sqrt(rho)*sigma(rho)*||w(|D|)f|| with
    sigma = rho^(-1/2) (so the normalizer is ||w(|D|)f||); the scan is
    bounded uniformly in rho by the bracket constant.
    """
    if len(rho_list) < 4:
        raise ValueError("need at least 4 rho points")
    if not _is_round_sphere(sym):
        raise ValueError("rho_scan uses the radial path: round sphere only")
    n = sym.n
    rows = []
    if weights == "power":
        for rho in rho_list:
            tf = make_test_function("cs-optimal", n, s=s, t_star=rho, k=k, R=u_max / rho)
            q = build_quadrature(sym, rho, 16)
            lhs = trace_norm(tf.radial, q)
            rhs = sobolev_norm(tf.radial, s, "homogeneous")
            rows.append((rho, lhs, rhs, lhs / rhs))
        slope, err = _fit_loglog([r[0] for r in rows], [r[3] for r in rows], drop_ends=True)
        return TraceReport(
            symbol=sym.describe(),
            family="cs-optimal",
            flavor="homogeneous",
            rows=rows,
            fitted_exponent=slope,
            exponent_stderr=err,
            params={"s": s, "k": k, "u_max": u_max},
        )
    if weights == "bracket":
        w = bracket_weight(s)
        bound = c1_trace_constant(n, power_weight(-0.5), w)
        for rho in rho_list:
            tf = make_test_function(
                "cs-optimal", n, weight=w, t_star=rho, k=k, R=r_cap
            )
            q = build_quadrature(sym, rho, 16)
            lhs = trace_norm(tf.radial, q)
            # sqrt(rho) * sigma(rho) = 1 for sigma = rho^(-1/2)
            rhs = sobolev_norm(tf.radial, flavor=w)
            rows.append((rho, lhs, rhs, lhs / rhs))
        return TraceReport(
            symbol=sym.describe(),
            family="cs-optimal",
            flavor="bracket-weight",
            rows=rows,
            constant_bound=bound.value,
            params={"s": s, "k": k, "r_cap": r_cap},
        )
    raise ValueError("weights must be 'power' or 'bracket'")


# -- sharpness ----------------------------------------------------------


@dataclass
class SharpnessRun:
    n: int
    params: dict
    target_constant: float
    t_star: float
    k_star: int
    rows: list                      # (R, lhs, rhs, ratio)
    monotone: bool

    @property
    def attainments(self) -> list:
        return [r[3] / self.target_constant for r in self.rows]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "params": self.params,
            "target_constant": self.target_constant,
            "t_star": self.t_star,
            "k_star": self.k_star,
            "rows": [list(map(float, r)) for r in self.rows],
            "attainments": list(map(float, self.attainments)),
            "monotone": self.monotone,
        }


def sharpness_run(
    n: int,
    s: Optional[float] = None,
    R_ladder: Sequence[float] = (10.0, 40.0, 160.0),
    sigma: Optional[WeightSpec] = None,
    w: Optional[WeightSpec] = None,
) -> SharpnessRun:
    """Truncations of the optimal profile approach the sharp constant.

    The profile g_R(r) = J_nu(r t*) r^(1-n/2)/w(r)^2 on [0, R] saturates
    the Cauchy-Schwarz step as R grows; the attainment fraction
    ratio(R)/C is nondecreasing in R.
    """
    sphere = QuadraticSymbol(np.eye(n))
    if s is not None and w is None:
        target = gamma_closed_form_constant(n, s)
        cres = c1_trace_constant(n, power_weight(s - 1.0), power_weight(s))
        w = power_weight(s)
        flavor = "homogeneous"
        params = {"s": s}
    else:
        if w is None:
            raise ValueError("need s (power weights) or an explicit weight spec")
        sigma = sigma or power_weight(-0.5)
        cres = c1_trace_constant(n, sigma, w)
        target = cres
        flavor = w
        params = {"sigma": sigma.describe(), "w": w.describe()}
    if cres.divergent:
        raise ValueError("sharpness run needs a finite target constant")
    t_star = cres.attained_t if cres.attained_t else 100.0
    k_star = cres.attained_k or 0

    rows = []
    for R in R_ladder:
        tf = make_test_function("cs-optimal", n, weight=w, t_star=t_star, k=k_star, R=R)
        q = build_quadrature(sphere, t_star, 16)
        lhs = trace_norm(tf.radial, q)
        if flavor == "homogeneous":
            rhs = sobolev_norm(tf.radial, s, "homogeneous")
        else:
            rhs = t_star**0.5 * float(sigma(t_star)) * sobolev_norm(tf.radial, flavor=w)
        rows.append((R, lhs, rhs, lhs / rhs))
    monotone = all(
        rows[i + 1][3] >= rows[i][3] * (1.0 - 1e-3) for i in range(len(rows) - 1)
    )
    return SharpnessRun(
        n=n,
        params=params,
        target_constant=target.value,
        t_star=t_star,
        k_star=k_star,
        rows=rows,
        monotone=monotone,
    )


# -- critical contrast ---------------------------------------------------


@dataclass
class CriticalReport:
    n: int
    k: int
    rows: list                      # (R, plain_ratio, wedge_ratio)
    plain_growth: float             # last/first plain ratio
    wedge_spread: float             # max/min wedge ratio (inf if wedge is 0)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "rows": [list(map(float, r)) for r in self.rows],
            "plain_growth": self.plain_growth,
            "wedge_spread": self.wedge_spread,
        }


def _hankel_real(p: RadialProfile, degree: int, rho: float) -> float:
    """H_l[g](rho): the Hankel reduction of the profile at harmonic degree l,
    with the i^l phase stripped (real for real profiles)."""
    q = RadialProfile(
        n=p.n,
        degree=degree,
        profile=p.profile,
        r_max=p.r_max,
        osc_scale=p.osc_scale,
        zero_exponent=p.zero_exponent,
    )
    val = radial_trace_coefficient(q, rho) / (1j**degree)
    return float(val.real)


def wedge_trace_norm_radial(p: RadialProfile, rho: float) -> float:
    """Trace norm of the wedge operator x/|x| wedge D/|D| applied to the
    single-harmonic field of profile p, over the sphere of radius rho.

    The Riesz components shift the harmonic degree by one; the resulting
    trace reduces to the two Hankel integrals H_{k-1}, H_{k+1}.  Radial
    input (k = 0) is annihilated identically.
    """
    k, n = p.degree, p.n
    if k == 0:
        return 0.0
    Hm = _hankel_real(p, k - 1, rho)
    Hp = _hankel_real(p, k + 1, rho)
    if n == 2:
        return float(np.sqrt(rho * (np.pi / 4.0) * (Hm + Hp) ** 2))
    if n == 3:
        v, wv = gauss_legendre(64, -1.0, 1.0)
        svec = np.sqrt(1.0 - v**2)
        Pm = eval_legendre(k - 1, v)
        Pp = eval_legendre(k + 1, v)
        P1m = lpmv(1, k - 1, v) if k - 1 >= 1 else np.zeros_like(v)
        P1p = lpmv(1, k + 1, v)
        combo = (
            svec * ((k + 1) * Hp * Pp - k * Hm * Pm) + v * (Hm * P1m + Hp * P1p)
        ) / (2 * k + 1)
        integral = float(np.sum(wv * combo**2))
        return float(np.sqrt(rho**2 * 2.0 * np.pi * integral))
    raise ValueError("wedge radial reduction implemented for n in {2, 3}")


def critical_comparison(
    sym: HomogeneousSymbol,
    k: int,
    R_ladder: Sequence[float] = (10.0, 1e2, 1e3, 1e4),
    rho: float = 1.0,
) -> CriticalReport:
    """Plain vs wedge trace ratios at the critical regularity 1/2.

    Uses the truncated optimal family at s = 1/2 (whose Sobolev norm
    carries the log-divergent Bessel integral): the plain ratio grows
    like sqrt(log R) along the ladder, the wedge ratio does not.
    """
    if k < 0:
        raise ValueError("harmonic degree must be >= 0")
    sym.require_curvature()
    if not _is_round_sphere(sym):
        raise ValueError(
            "the critical-comparison ladder uses the radial reduction, "
            "available over the round sphere only"
        )
    n = sym.n
    rows = []
    for R in R_ladder:
        tf = make_test_function("cs-optimal", n, s=0.5, t_star=1.0, k=k, R=R)
        p = tf.radial
        q = build_quadrature(sym, rho, 16)
        denom = sobolev_norm(p, 0.5, "homogeneous")
        plain = trace_norm(p, q) / denom
        wedge = wedge_trace_norm_radial(p, rho) / denom
        rows.append((R, plain, wedge))
    plain_growth = rows[-1][1] / rows[0][1]
    wedges = [r[2] for r in rows]
    if min(wedges) > 0:
        wedge_spread = max(wedges) / min(wedges)
    else:
        wedge_spread = math.inf if max(wedges) > 0 else 1.0
    return CriticalReport(
        n=n, k=k, rows=rows, plain_growth=plain_growth, wedge_spread=wedge_spread
    )


# -- duality -------------------------------------------------------------


@dataclass
class TimeProfile:
    """ghat supported on [center - width, center + width] (smooth bump)."""

    center: float = 2.5
    width: float = 1.4

    @property
    def support(self) -> tuple:
        return (self.center - self.width, self.center + self.width)

    def __call__(self, tau):
        scalar = np.ndim(tau) == 0
        y = (np.atleast_1d(np.asarray(tau, dtype=float)) - self.center) / self.width
        out = np.zeros_like(y)
        inside = np.abs(y) < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - y[inside] ** 2))
        return float(out[0]) if scalar else out


@dataclass
class DualityReport:
    route_grid: float               # (2pi)^-n int |ghat(a(xi))|^2 |fhat|^2 dxi
    route_coarea: float             # radial x surface with the coarea weight
    rel_gap: float
    rows: list                      # (rho, |ghat(rho^2)|^2, shell integral)
    g_norm_sq_direct: float         # ||g||^2 by time-domain quadrature
    g_norm_sq_plancherel: float     # (1/2pi) int |ghat|^2
    g_norm_sq_onesided: float       # (1/pi) int_0^inf rho |ghat(rho^2)|^2 d rho
    support_ok: bool
    onesided_identity_gap: float

    def as_dict(self) -> dict:
        return {
            "route_grid": self.route_grid,
            "route_coarea": self.route_coarea,
            "rel_gap": self.rel_gap,
            "rows": [list(map(float, r)) for r in self.rows],
            "g_norm_sq_direct": self.g_norm_sq_direct,
            "g_norm_sq_plancherel": self.g_norm_sq_plancherel,
            "g_norm_sq_onesided": self.g_norm_sq_onesided,
            "support_ok": self.support_ok,
            "onesided_identity_gap": self.onesided_identity_gap,
        }


def duality_check(
    sym: HomogeneousSymbol,
    g: TimeProfile,
    f: GridField,
    resolution: int = 96,
    radial_nodes: int = 160,
    t_extent: float = 300.0,
) -> DualityReport:
    """Verify the adjoint-propagator norm identity for v(t,x) = g(t) f(x).

    The squared norm of F^-1[(F_{t,x} v)(a(xi), xi)] is computed once as a
    plain frequency-grid sum and once through the polar decomposition
    adapted to the level sets of a, with the coarea weight
    2 rho^(n-1)/|grad a(omega)|.  Separately the one-sided-support
    identity ||g||^2 = (1/pi) int_0^inf rho |ghat(rho^2)|^2 d rho is
    checked by direct time-domain quadrature; it fails (by design) when
    ghat has mass at tau <= 0.
    """
    lo, hi = g.support
    support_ok = lo > 0.0
    n = sym.n

    # route 1: frequency-grid sum
    xi = f.xi_mesh()
    a_vals = sym.value(xi)
    dxi = 2.0 * np.pi / f.extent
    route_grid = float(
        (2.0 * np.pi) ** (-n)
        * np.sum(np.asarray(g(a_vals)) ** 2 * np.abs(f.freq) ** 2)
        * dxi**n
    )

    # route 2: radial integral of coarea-weighted surface integrals
    q = build_quadrature(sym, 1.0, resolution)
    rho_lo = math.sqrt(max(lo, 0.0))
    rho_hi = math.sqrt(max(hi, 0.0))
    rho, w_rho = gauss_legendre(radial_nodes, rho_lo, rho_hi)
    pts = (rho[:, None, None] * q.surface_points[None, :, :]).reshape(-1, n)
    fv = np.abs(f.freq_at(pts)).reshape(len(rho), -1) ** 2
    shells = 2.0 * rho ** (n - 1) * (fv @ (q.weights_sigma / q.grad_norms))
    gvals = np.asarray(g(rho**2)) ** 2
    rows = [(float(r), float(gv), float(sh)) for r, gv, sh in zip(rho, gvals, shells)]
    route_coarea = float((2.0 * np.pi) ** (-n) * np.sum(w_rho * gvals * shells))

    rel_gap = abs(route_grid - route_coarea) / max(route_grid, route_coarea, 1e-300)

    # one-sided support identity for ||g||^2
    tau, w_tau = gauss_legendre(240, lo, hi)
    ghat = np.asarray(g(tau))
    plancherel = float(np.sum(w_tau * ghat**2) / (2.0 * np.pi))
    ts = np.arange(-t_extent, t_extent, 0.05)
    gt = (np.exp(1j * np.outer(ts, tau)) @ (w_tau * ghat)) / (2.0 * np.pi)
    direct = float(np.sum(np.abs(gt) ** 2) * 0.05)
    onesided = float(np.sum(w_rho * rho * np.asarray(g(rho**2)) ** 2) / np.pi)
    gap = abs(direct - onesided) / max(direct, onesided)

    return DualityReport(
        route_grid=route_grid,
        route_coarea=route_coarea,
        rel_gap=rel_gap,
        rows=rows,
        g_norm_sq_direct=direct,
        g_norm_sq_plancherel=plancherel,
        g_norm_sq_onesided=onesided,
        support_ok=support_ok,
        onesided_identity_gap=gap,
    )
