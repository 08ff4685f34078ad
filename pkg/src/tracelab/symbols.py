"""Elliptic symbols a(xi) that are positively homogeneous of degree two.

Three families are provided, each with closed-form value, gradient and
Hessian (never finite differences):

* ``quadratic``        a(xi) = <A xi, xi> with A symmetric positive definite,
* ``quartic``          a(xi) = (sum_i xi_i^4)^(1/2), whose level set has
                       vanishing curvature on the axes,
* ``perturbed-sphere`` a(xi) = |xi|^2 (1 + eps*h(xi/|xi|)) with h a
                       combination of angular monomials of degree <= 2,
                       giving non-symmetric examples for small eps.

The module also evaluates the dual function a*: it is homogeneous of
degree two and characterised by a*(grad a(xi)) = 1 on the level set
{a = 1}.  Numerically a*(x) = a(eta) where eta solves grad a(eta) = x;
the gradient map is inverted by damped Newton iteration, which is
well-posed exactly when det grad^2 a does not vanish (non-vanishing
Gaussian curvature of the level set).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .quadrature import sphere_rule


class SymbolError(ValueError):
    """Invalid symbol parameters (ellipticity or definiteness failure)."""


class ConvergenceError(RuntimeError):
    """An iterative solve did not reach its tolerance."""

    def __init__(self, message: str, residual: float = np.nan):
        super().__init__(message)
        self.residual = residual


class CurvatureError(RuntimeError):
    """Operation requires non-vanishing curvature of the level set."""


def _as_points(xi, n: int) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != n:
        raise ValueError(f"points must have last axis {n}, got {xi.shape}")
    return xi


class HomogeneousSymbol:
    """Base class: a > 0 away from 0 and a(lam*xi) = lam^2 a(xi)."""

    family = "abstract"

    def __init__(self, n: int):
        if n < 2:
            raise SymbolError("dimension must be >= 2")
        self.n = int(n)
        self._min_hess_cache: dict[int, float] = {}

    def value(self, xi) -> np.ndarray:
        raise NotImplementedError

    def grad(self, xi) -> np.ndarray:
        raise NotImplementedError

    def hess(self, xi) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    # -- level-set geometry -------------------------------------------------

    def level_radius(self, dirs) -> np.ndarray:
        """r(theta) with r(theta)*theta on {a = 1}, i.e. a(theta)^(-1/2)."""
        return self.value(dirs) ** -0.5

    def min_hessian_det_on_level(self, resolution: int = 128) -> float:
        """Minimum of det grad^2 a over the sampled level set {a = 1}.

        Strict positivity certifies (at this resolution) the curvature
        hypothesis needed for the dual function and the critical-trace
        operators.
        """
        if resolution in self._min_hess_cache:
            return self._min_hess_cache[resolution]
        dirs, _ = sphere_rule(self.n, resolution)
        pts = dirs * self.level_radius(dirs)[:, None]
        dets = np.linalg.det(self.hess(pts))
        out = float(dets.min())
        self._min_hess_cache[resolution] = out
        return out

    def require_curvature(self, resolution: int = 128, threshold: float = 0.01):
        md = self.min_hessian_det_on_level(resolution)
        if md < threshold:
            raise CurvatureError(
                f"min det grad^2 a = {md:.3e} < {threshold} on the level set; "
                "curvature hypothesis fails, dual/critical operators undefined"
            )


class QuadraticSymbol(HomogeneousSymbol):
    """a(xi) = <A xi, xi> with A symmetric positive definite."""

    family = "quadratic"

    def __init__(self, matrix):
        A = np.atleast_2d(np.asarray(matrix, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise SymbolError("matrix must be square")
        if not np.allclose(A, A.T, atol=1e-12):
            raise SymbolError("matrix must be symmetric")
        eigs = np.linalg.eigvalsh(A)
        if eigs.min() <= 0.0:
            raise SymbolError(
                f"matrix must be positive definite (eigenvalues {eigs})"
            )
        super().__init__(A.shape[0])
        self.matrix = A

    def value(self, xi):
        xi = _as_points(xi, self.n)
        return np.einsum("...i,ij,...j->...", xi, self.matrix, xi)

    def grad(self, xi):
        xi = _as_points(xi, self.n)
        return 2.0 * xi @ self.matrix

    def hess(self, xi):
        xi = _as_points(xi, self.n)
        H = 2.0 * self.matrix
        return np.broadcast_to(H, xi.shape[:-1] + (self.n, self.n)).copy()

    def describe(self):
        return {"family": "quadratic", "n": self.n, "matrix": self.matrix.tolist()}

    @property
    def is_identity(self) -> bool:
        return bool(np.allclose(self.matrix, np.eye(self.n), atol=1e-14))


class QuarticSymbol(HomogeneousSymbol):
    """a(xi) = (sum_i xi_i^4)^(1/2); curvature vanishes on the axes."""

    family = "quartic"

    def __init__(self, n: int):
        super().__init__(n)

    def value(self, xi):
        xi = _as_points(xi, self.n)
        return np.sqrt(np.sum(xi**4, axis=-1))

    def grad(self, xi):
        xi = _as_points(xi, self.n)
        q = np.sum(xi**4, axis=-1)
        return 2.0 * xi**3 / np.sqrt(q)[..., None]

    def hess(self, xi):
        xi = _as_points(xi, self.n)
        q = np.sum(xi**4, axis=-1)[..., None, None]
        cube = xi**3
        diag = 6.0 * np.einsum("...i,ij->...ij", xi**2, np.eye(self.n))
        outer = 4.0 * cube[..., :, None] * cube[..., None, :]
        return diag / np.sqrt(q) - outer / q**1.5

    def describe(self):
        return {"family": "quartic", "n": self.n}


class PerturbedSphereSymbol(HomogeneousSymbol):
    """a(xi) = |xi|^2 (1 + eps*h(xi/|xi|)).

    The angular profile is h(u) = c0 + b.u + <Q u, u> with Q symmetric,
    i.e. a combination of angular harmonics of degree at most two.  A
    nonzero b makes the symbol non-symmetric (a(-xi) != a(xi)).
    Ellipticity requires |eps| * sup|h| < 1; we enforce the stronger
    margin |eps| * (|c0| + |b| + ||Q||) < 1/2.
    """

    family = "perturbed-sphere"

    def __init__(self, n: int, eps: float, c0: float = 0.0, b=None, Q=None):
        super().__init__(n)
        self.eps = float(eps)
        self.c0 = float(c0)
        self.b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
        self.Q = np.zeros((n, n)) if Q is None else np.asarray(Q, dtype=float)
        if self.b.shape != (n,):
            raise SymbolError(f"b must have shape ({n},)")
        if self.Q.shape != (n, n) or not np.allclose(self.Q, self.Q.T, atol=1e-12):
            raise SymbolError(f"Q must be a symmetric ({n},{n}) matrix")
        h_bound = (
            abs(self.c0)
            + np.linalg.norm(self.b)
            + (np.abs(np.linalg.eigvalsh(self.Q)).max() if self.Q.any() else 0.0)
        )
        if abs(self.eps) * h_bound >= 0.5:
            raise SymbolError(
                f"|eps|*sup|h| <= {abs(self.eps) * h_bound:.3f} >= 1/2; "
                "perturbation too large for guaranteed ellipticity"
            )

    def value(self, xi):
        xi = _as_points(xi, self.n)
        r2 = np.sum(xi**2, axis=-1)
        r = np.sqrt(r2)
        bdot = xi @ self.b
        quad = np.einsum("...i,ij,...j->...", xi, self.Q, xi)
        return (1.0 + self.eps * self.c0) * r2 + self.eps * (r * bdot + quad)

    def grad(self, xi):
        xi = _as_points(xi, self.n)
        r = np.sqrt(np.sum(xi**2, axis=-1))[..., None]
        bdot = (xi @ self.b)[..., None]
        out = 2.0 * (1.0 + self.eps * self.c0) * xi
        with np.errstate(invalid="ignore", divide="ignore"):
            linear = bdot * xi / r + r * self.b
        out = out + self.eps * np.where(r > 0.0, linear, 0.0)
        out = out + 2.0 * self.eps * (xi @ self.Q)
        return out

    def hess(self, xi):
        xi = _as_points(xi, self.n)
        r = np.sqrt(np.sum(xi**2, axis=-1))[..., None, None]
        bdot = (xi @ self.b)[..., None, None]
        eye = np.eye(self.n)
        sym = self.b[:, None] * xi[..., None, :] + xi[..., :, None] * self.b[None, :]
        proj = eye - xi[..., :, None] * xi[..., None, :] / r**2
        H = 2.0 * (1.0 + self.eps * self.c0) * np.broadcast_to(
            eye, xi.shape[:-1] + (self.n, self.n)
        ).copy()
        H += self.eps * (sym / r + bdot * proj / r)
        H += 2.0 * self.eps * self.Q
        return H

    def describe(self):
        return {
            "family": "perturbed-sphere",
            "n": self.n,
            "eps": self.eps,
            "c0": self.c0,
            "b": self.b.tolist(),
            "Q": self.Q.tolist(),
        }


def make_symbol(family: str, params: Optional[dict] = None, n: Optional[int] = None):
    """Build a symbol from a family tag and its parameters.

    ``params`` mirrors the JSON config layout, e.g.
    ``{"family": "quadratic", "matrix": [[1,0],[0,4]]}``.
    """
    params = dict(params or {})
    family = family.lower()
    if family == "quadratic":
        if "matrix" not in params:
            if n is None:
                raise SymbolError("quadratic symbol needs a matrix or n")
            params["matrix"] = np.eye(n)
        return QuadraticSymbol(params["matrix"])
    if family == "quartic":
        dim = params.get("n", n)
        if dim is None:
            raise SymbolError("quartic symbol needs n")
        return QuarticSymbol(int(dim))
    if family in ("perturbed-sphere", "perturbed_sphere"):
        dim = params.get("n", n)
        if dim is None:
            raise SymbolError("perturbed-sphere symbol needs n")
        return PerturbedSphereSymbol(
            int(dim),
            eps=params.get("eps", 0.0),
            c0=params.get("c0", 0.0),
            b=params.get("b"),
            Q=params.get("Q"),
        )
    raise SymbolError(f"unknown symbol family {family!r}")


def symbol_from_config(config: dict):
    cfg = dict(config)
    family = cfg.pop("family")
    n = cfg.pop("n", None)
    return make_symbol(family, cfg, n=n)


@dataclass
class HomogeneityReport:
    samples: int
    max_homogeneity_defect: float
    max_euler_defect: float


def check_homogeneity_euler(
    sym: HomogeneousSymbol, samples: int = 256, seed: int = 0
) -> HomogeneityReport:
    """Sampled relative defects of a(lam*xi) = lam^2 a(xi) and the Euler
    identity a(xi) = xi.grad a(xi)/2."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(samples, sym.n))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    xi = dirs * rng.uniform(0.5, 2.0, size=(samples, 1))
    lam = rng.uniform(0.25, 4.0, size=samples)

    a_xi = sym.value(xi)
    a_scaled = sym.value(lam[:, None] * xi)
    hom = np.abs(a_scaled - lam**2 * a_xi) / np.abs(a_scaled)
    euler = np.abs(a_xi - 0.5 * np.einsum("si,si->s", xi, sym.grad(xi))) / a_xi
    return HomogeneityReport(samples, float(hom.max()), float(euler.max()))


@dataclass
class DualEvaluation:
    """a*(x) together with the resolved Gauss-map pre-image.

    x = scale * grad a(xi_star) with xi_star on {a = 1}, and
    a*(x) = scale^2.
    """

    symbol: HomogeneousSymbol
    x: np.ndarray
    xi_star: np.ndarray
    scale: float
    value: float
    residual: float
    iterations: int


def dual_eval(
    sym: HomogeneousSymbol,
    x,
    tol: float = 1e-12,
    max_iter: int = 100,
    certificate_resolution: int = 128,
) -> DualEvaluation:
    """Evaluate the dual function a* at a single point x != 0.

    Finds xi on {a = 1} whose normalized gradient matches x/|x| by damped
    Newton iteration in the unit-sphere chart u -> xi(u) = u / a(u)^(1/2),
    then a*(x) = (|x| / |grad a(xi)|)^2.  Requires the curvature
    certificate (the Gauss map is locally invertible iff det grad^2 a != 0).
    """
    x = np.asarray(x, dtype=float)
    norm_x = np.linalg.norm(x)
    if norm_x == 0.0:
        raise ValueError("dual function is evaluated away from x = 0")
    sym.require_curvature(certificate_resolution)
    xhat = x / norm_x

    def chart(u):
        a = sym.value(u)
        xi = u / np.sqrt(a)
        g = sym.grad(xi)
        gn = np.linalg.norm(g)
        return xi, g, g / gn, gn, a

    u = xhat.copy()
    xi, g, ghat, gn, a_u = chart(u)
    res = np.linalg.norm(ghat - xhat)
    it = 0
    while res > tol and it < max_iter:
        it += 1
        # J = d(ghat)/du through the chart
        dxi_du = a_u ** -0.5 * (
            np.eye(sym.n) - 0.5 * np.outer(u, sym.grad(u)) / a_u
        )
        dghat_dg = (np.eye(sym.n) - np.outer(ghat, ghat)) / gn
        J = dghat_dg @ sym.hess(xi) @ dxi_du
        step, *_ = np.linalg.lstsq(J, xhat - ghat, rcond=None)
        step -= np.dot(step, u) * u
        alpha = 1.0
        while alpha > 1e-4:
            u_new = u + alpha * step
            u_new /= np.linalg.norm(u_new)
            xi_n, g_n, ghat_n, gn_n, a_n = chart(u_new)
            res_new = np.linalg.norm(ghat_n - xhat)
            if res_new < res * (1.0 - 0.25 * alpha) or res_new < tol:
                u, xi, g, ghat, gn, a_u, res = u_new, xi_n, g_n, ghat_n, gn_n, a_n, res_new
                break
            alpha *= 0.5
        else:
            break
    if res > tol:
        raise ConvergenceError(
            f"dual_eval did not reach tol={tol:g} (residual {res:.3e})", residual=res
        )
    scale = norm_x / gn
    return DualEvaluation(sym, x, xi, scale, scale**2, res, it)


def _batched_gradient_inverse(sym, x, tol=1e-12, max_iter=60):
    """Solve grad a(eta) = x for arrays of points x, by damped Newton."""
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, sym.n)
    norms = np.linalg.norm(flat, axis=-1)
    live = norms > 0.0
    eta = np.where(live[:, None], 0.5 * flat, 0.0)
    target = flat[live]
    cur = eta[live]
    resid = np.linalg.norm(sym.grad(cur) - target, axis=-1)
    scale = np.linalg.norm(target, axis=-1)
    for _ in range(max_iter):
        bad = resid > tol * scale
        if not bad.any():
            break
        rhs = target[bad] - sym.grad(cur[bad])
        step = np.linalg.solve(sym.hess(cur[bad]), rhs[..., None])[..., 0]
        alpha = np.ones(bad.sum())
        base = cur[bad]
        base_res = resid[bad]
        for _ in range(6):
            cand = base + alpha[:, None] * step
            cand_res = np.linalg.norm(sym.grad(cand) - target[bad], axis=-1)
            worse = cand_res >= base_res
            if not worse.any():
                break
            alpha[worse] *= 0.5
        new = cur[bad].copy()
        new_res = resid[bad].copy()
        improved = cand_res < base_res
        new[improved] = cand[improved]
        new_res[improved] = cand_res[improved]
        cur[bad] = new
        resid[bad] = new_res
    if (resid > 1e-6 * scale).any():
        raise ConvergenceError(
            "gradient-map inversion failed on some points",
            residual=float((resid / np.maximum(scale, 1e-300)).max()),
        )
    eta[live] = cur
    return eta.reshape(x.shape)


class NumericalDualSymbol(HomogeneousSymbol):
    """Dual function a* with evaluators backed by gradient-map inversion.

    grad a*(x) is the Newton solution eta(x) of grad a(eta) = x, and
    grad^2 a*(x) = (grad^2 a(eta))^{-1}; both follow from differentiating
    a*(x) = a(eta(x)).
    """

    family = "dual"

    def __init__(self, base: HomogeneousSymbol, certificate_resolution: int = 128):
        base.require_curvature(certificate_resolution)
        super().__init__(base.n)
        self.base = base

    def _eta(self, x):
        return _batched_gradient_inverse(self.base, x)

    def value(self, x):
        x = _as_points(x, self.n)
        return self.base.value(self._eta(x))

    def grad(self, x):
        x = _as_points(x, self.n)
        return self._eta(x)

    def hess(self, x):
        x = _as_points(x, self.n)
        return np.linalg.inv(self.base.hess(self._eta(x)))

    def describe(self):
        return {"family": "dual", "base": self.base.describe()}


def dual_symbol(sym: HomogeneousSymbol, certificate_resolution: int = 128):
    """The dual function a* as a symbol object.

    For quadratic a(xi) = <A xi, xi> the dual is the quadratic form
    <A^{-1} x, x>/4, returned in closed form; other families go through
    the Newton-backed evaluator.
    """
    if isinstance(sym, QuadraticSymbol):
        return QuadraticSymbol(np.linalg.inv(sym.matrix) / 4.0)
    return NumericalDualSymbol(sym, certificate_resolution)
