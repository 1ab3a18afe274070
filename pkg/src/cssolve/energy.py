"""Energy functionals for the gauged Schrödinger problem.

Provides the full action J_q, its truncated variant, the dilation-augmented
functional Jt(theta, u) = J_trunc(u(e^{-theta} .)) in closed form, its theta-
and u-derivatives, Sobolev (Riesz) gradients, and the frequency rescaling
between the fixed-frequency and gauged normalizations of the equation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .gauge import big_n, big_n_gradient
from .grid import RadialFunction, diff_matrix, differentiate, dilate, integrate_plane
from .nonlinearity import NonlinearityModel, capital_lambda_bar


def phi(s) -> np.ndarray | float:
    """Quintic-smoothstep cutoff: 1 on [0,1], 0 on [2,inf), C^2 in between."""
    arr = np.asarray(s, dtype=float)
    t = np.clip(arr - 1.0, 0.0, 1.0)
    out = 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2)
    return float(out) if arr.ndim == 0 else out


def phi_prime(s) -> np.ndarray | float:
    """Derivative of phi; zero outside (1, 2), min value -15/8 at s = 3/2."""
    arr = np.asarray(s, dtype=float)
    t = arr - 1.0
    inside = (t > 0.0) & (t < 1.0)
    t = np.clip(t, 0.0, 1.0)
    out = np.where(inside, -30.0 * t**2 * (1.0 - t) ** 2, 0.0)
    return float(out) if arr.ndim == 0 else out


@dataclass(frozen=True)
class EnergyBreakdown:
    """Action value split into kinetic, gauge and potential contributions."""

    dirichlet: float
    nonlocal_term: float
    potential: float
    total: float
    q: float
    theta: float
    truncation_active: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "dirichlet": self.dirichlet,
                "nonlocal": self.nonlocal_term,
                "potential": self.potential,
                "total": self.total,
                "q": self.q,
                "theta": self.theta,
                "truncation_active": self.truncation_active,
            },
            indent=2,
        )


def _pieces(u: RadialFunction, model: NonlinearityModel):
    dirichlet = 0.5 * integrate_plane(u.grid, differentiate(u).values ** 2)
    n_val = big_n(u)
    big_g_int = integrate_plane(u.grid, model.big_g(u.values))
    return dirichlet, n_val, big_g_int


def j_q(u: RadialFunction, q: float, model: NonlinearityModel) -> EnergyBreakdown:
    """Full action: (1/2)||grad u||^2 + (q/2)N(u) - int G(u)."""
    if q < 0:
        raise ValueError("q must be non-negative")
    dirichlet, n_val, big_g_int = _pieces(u, model)
    nonlocal_term = 0.5 * q * n_val
    potential = -big_g_int
    return EnergyBreakdown(
        dirichlet, nonlocal_term, potential, dirichlet + nonlocal_term + potential,
        q, 0.0, bool(q * n_val > 1.0),
    )


def j_trunc(u: RadialFunction, q: float, model: NonlinearityModel) -> EnergyBreakdown:
    """Truncated action: the gauge term is weighted by phi(q N(u))."""
    if q < 0:
        raise ValueError("q must be non-negative")
    dirichlet, n_val, big_g_int = _pieces(u, model)
    nonlocal_term = 0.5 * q * phi(q * n_val) * n_val
    potential = -big_g_int
    return EnergyBreakdown(
        dirichlet, nonlocal_term, potential, dirichlet + nonlocal_term + potential,
        q, 0.0, bool(q * n_val > 1.0),
    )


def i_comparison(u: RadialFunction, model: NonlinearityModel) -> float:
    """Comparison functional (1/2)||grad u||^2 - int Lambda_bar(u); a lower bound for j_trunc."""
    dirichlet = 0.5 * integrate_plane(u.grid, differentiate(u).values ** 2)
    return dirichlet - integrate_plane(u.grid, capital_lambda_bar(model, u.values))


def j_tilde(theta: float, u: RadialFunction, q: float, model: NonlinearityModel) -> EnergyBreakdown:
    """Closed form of j_trunc(u(e^{-theta} .)):

        (1/2)||grad u||^2 + (q/2) e^{4 theta} phi(q e^{4 theta} N) N - e^{2 theta} int G(u).
    """
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    if q < 0:
        raise ValueError("q must be non-negative")
    dirichlet, n_val, big_g_int = _pieces(u, model)
    s = q * math.exp(4.0 * theta) * n_val
    nonlocal_term = 0.5 * q * math.exp(4.0 * theta) * phi(s) * n_val
    potential = -math.exp(2.0 * theta) * big_g_int
    return EnergyBreakdown(
        dirichlet, nonlocal_term, potential, dirichlet + nonlocal_term + potential,
        q, theta, bool(s > 1.0),
    )


def d_theta_j_tilde(theta: float, u: RadialFunction, q: float, model: NonlinearityModel) -> float:
    """theta-derivative of j_tilde:

        2 q e^{4 theta} phi(s) N + 2 q^2 e^{8 theta} phi'(s) N^2 - 2 e^{2 theta} int G(u),
        s = q e^{4 theta} N(u).

    At theta = 0 with inactive truncation this is the scale-invariance
    (Pohozaev) residual 2qN - 2 int G, which vanishes at solutions.
    """
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    n_val = big_n(u)
    big_g_int = integrate_plane(u.grid, model.big_g(u.values))
    e4, e2 = math.exp(4.0 * theta), math.exp(2.0 * theta)
    s = q * e4 * n_val
    return 2.0 * q * e4 * phi(s) * n_val + 2.0 * q * q * e4 * e4 * phi_prime(s) * n_val**2 - 2.0 * e2 * big_g_int


def weak_gradient(
    theta: float, u: RadialFunction, q: float, model: NonlinearityModel, v: RadialFunction
) -> float:
    """Directional u-derivative of j_tilde at (theta, u) in direction v:

        int grad u . grad v
        + [(q/2) e^{4 theta} phi(s) + (q^2/2) e^{8 theta} phi'(s) N] N'(u)[v]
        - e^{2 theta} int g(u) v,    s = q e^{4 theta} N(u).
    """
    if u.grid is not v.grid and not np.array_equal(u.grid.nodes, v.grid.nodes):
        raise ValueError("u and v must live on the same grid")
    g = u.grid
    dirich = integrate_plane(g, differentiate(u).values * differentiate(v).values)
    n_val = big_n(u)
    e4, e2 = math.exp(4.0 * theta), math.exp(2.0 * theta)
    s = q * e4 * n_val
    coef = 0.5 * q * e4 * phi(s) + 0.5 * q * q * e4 * e4 * phi_prime(s) * n_val
    nprime = float(np.dot(big_n_gradient(u), v.values)) if coef != 0.0 else 0.0
    return dirich + coef * nprime - e2 * integrate_plane(g, model.g(u.values) * v.values)


def _metric_operator(grid, m0: float) -> sp.csr_matrix:
    """Discrete operator A with v^T A w = <w, v> in the (||grad .||^2 + m0 ||.||^2) metric."""
    w_plane = 2.0 * math.pi * grid.weights * grid.nodes
    big_w = sp.diags(w_plane)
    d = diff_matrix(grid)
    return (d.T @ big_w @ d + m0 * big_w).tocsc()


def riesz_gradient(
    theta: float, u: RadialFunction, q: float, model: NonlinearityModel
) -> RadialFunction:
    """Riesz representative w of the weak gradient in the Sobolev metric:

        <w, v>_{H1, m0} = weak_gradient(theta, u, q, model, v)  for every grid v,

    realized exactly in the discrete metric by solving the banded system
    (D^T W D + m0 W) w = rhs, where D is the differentiation matrix and W the
    plane-measure quadrature weights.
    """
    g = u.grid
    w_plane = 2.0 * math.pi * g.weights * g.nodes
    d = diff_matrix(g)
    n_val = big_n(u)
    e4, e2 = math.exp(4.0 * theta), math.exp(2.0 * theta)
    s = q * e4 * n_val
    coef = 0.5 * q * e4 * phi(s) + 0.5 * q * q * e4 * e4 * phi_prime(s) * n_val
    rhs = d.T @ (w_plane * (d @ u.values)) - e2 * w_plane * model.g(u.values)
    if coef != 0.0:
        rhs = rhs + coef * big_n_gradient(u)
    big_w = sp.diags(w_plane)
    a = (d.T @ big_w @ d + model.m0 * big_w).tocsc()
    w = spla.spsolve(a, rhs)
    return RadialFunction(g, w)


def rescale_omega(u: RadialFunction, omega: float, p: float) -> tuple[RadialFunction, float]:
    """Transport a solution of the fixed-frequency equation

        -Delta u + omega u + (gauge terms) = |u|^{p-1} u

    to the gauged normalization with g(v) = -v + |v|^{p-1} v via

        v = omega^{-1/(p-1)} u(omega^{-1/2} .),   q = omega^{2(3-p)/(p-1)}.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    if not (1.0 < p <= 5.0) or p == 3.0:
        raise ValueError("p must lie in (1, 3) or (3, 5]")
    q = omega ** (2.0 * (3.0 - p) / (p - 1.0))
    if omega == 1.0:
        return u, q
    v = dilate(u, omega ** -0.5)
    return RadialFunction(u.grid, omega ** (-1.0 / (p - 1.0)) * v.values), q
