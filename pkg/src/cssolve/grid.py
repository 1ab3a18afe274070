"""Radial grids on [0, R_max] and calculus for radial functions on the plane.

A radial function u(r) stands for the planar field u(|x|); all integrals
are plane integrals, i.e. carry the measure 2*pi*r*dr.  Uniform grids get
composite-Simpson weights and a Simpson-consistent cumulative rule;
geometrically graded grids fall back to trapezoid everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

TWO_PI = 2.0 * np.pi

MIN_NODES = 16


@dataclass(frozen=True)
class RadialGrid:
    """Ascending radii r_0 = 0 < ... < r_{n-1} = R_max with quadrature weights.

    weights are for the 1-D integral int_0^{R_max} f(r) dr; they are positive
    and sum to R_max.
    """

    nodes: np.ndarray
    weights: np.ndarray
    grading: str = "uniform"
    ratio: float = 1.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or nodes.size < MIN_NODES:
            raise ValueError(f"grid needs at least {MIN_NODES} nodes")
        if nodes[0] != 0.0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must start at 0 and increase strictly")
        if weights.shape != nodes.shape or np.any(weights <= 0):
            raise ValueError("weights must be positive, one per node")
        nodes.setflags(write=False)
        weights.setflags(write=False)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.nodes)


@dataclass(frozen=True)
class RadialFunction:
    """Samples of a radial profile u(r) on a RadialGrid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.flags.writeable:
            # freeze a private copy; never flip flags on the caller's array
            values = values.copy()
            values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.shape != self.grid.nodes.shape:
            raise ValueError("values must match the grid size")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")

    def with_values(self, values: np.ndarray) -> "RadialFunction":
        return RadialFunction(self.grid, values)


def _simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for n equispaced nodes.

    An odd interval count is handled with a Simpson 3/8 closure on the last
    three intervals; all weights stay positive.
    """
    m = n - 1
    w = np.zeros(n)
    if m % 2 == 0:
        w[0] = w[-1] = 1.0
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= h / 3.0
    else:
        k = m - 3
        if k > 0:
            w[0] = 1.0
            w[1:k:2] = 4.0
            w[2:k:2] = 2.0
            w[k] = 1.0
            w[: k + 1] *= h / 3.0
        w[k] += 3.0 * h / 8.0
        w[k + 1] += 9.0 * h / 8.0
        w[k + 2] += 9.0 * h / 8.0
        w[k + 3] += 3.0 * h / 8.0
    return w


def make_grid(r_max: float, n: int, grading: str = "uniform", ratio: float = 1.0) -> RadialGrid:
    """Build a radial grid on [0, r_max].

    grading "uniform" gives equispaced nodes with composite-Simpson weights;
    "geometric" gives spacings growing by `ratio` with trapezoid weights,
    renormalized so the last node is exactly r_max.
    """
    if not (r_max > 0):
        raise ValueError("r_max must be positive")
    if n < MIN_NODES:
        raise ValueError(f"need n >= {MIN_NODES}")
    if grading == "uniform":
        nodes = np.linspace(0.0, r_max, n)
        nodes = nodes.copy()
        nodes[0] = 0.0
        nodes[-1] = r_max
        weights = _simpson_weights(n, r_max / (n - 1))
        return RadialGrid(nodes, weights, "uniform", 1.0)
    if grading == "geometric":
        if ratio <= 0:
            raise ValueError("ratio must be positive")
        d = ratio ** np.arange(n - 1)
        nodes = np.concatenate(([0.0], np.cumsum(d)))
        nodes *= r_max / nodes[-1]
        nodes[-1] = r_max
        dd = np.diff(nodes)
        weights = np.zeros(n)
        weights[:-1] += dd / 2.0
        weights[1:] += dd / 2.0
        return RadialGrid(nodes, weights, "geometric", float(ratio))
    raise ValueError(f"unknown grading {grading!r}")


def integrate_plane(f, values: Optional[np.ndarray] = None) -> float:
    """Plane integral of a radial integrand: 2*pi * int f(r) r dr.

    Accepts either a RadialFunction or a (grid, values) pair.
    """
    if values is None:
        g, vals = f.grid, f.values
    else:
        g, vals = f, np.asarray(values)
    return TWO_PI * float(np.sum(g.weights * vals * g.nodes))


def _cum_increments(grid: RadialGrid, f: np.ndarray):
    """Per-interval integrals of f, as (index triples, coefficient triples).

    Returns arrays idx (m, 3) and coef (m, 3) with the k-th interval integral
    equal to sum_j coef[k, j] * f[idx[k, j]].  Shared by the cumulative rule
    and its adjoint so prefix-based functionals have exact discrete gradients.
    """
    n = grid.n
    x = grid.nodes
    ks = np.arange(1, n)
    idx = np.empty((n - 1, 3), dtype=np.intp)
    coef = np.empty((n - 1, 3))
    if grid.grading == "uniform":
        h = x[1] - x[0]
        fwd = (ks % 2 == 1) & (ks < n - 1)
        kf = ks[fwd]
        idx[fwd] = np.stack([kf - 1, kf, kf + 1], axis=1)
        coef[fwd] = h / 12.0 * np.array([5.0, 8.0, -1.0])
        kb = ks[~fwd]
        idx[~fwd] = np.stack([kb - 2, kb - 1, kb], axis=1)
        coef[~fwd] = h / 12.0 * np.array([-1.0, 8.0, 5.0])
    else:
        d = np.diff(x)
        idx[:] = np.stack([ks - 1, ks - 1, ks], axis=1)
        coef[:, 0] = 0.0
        coef[:, 1] = d / 2.0
        coef[:, 2] = d / 2.0
    return idx, coef


def cumulative_integral(grid: RadialGrid, f: np.ndarray) -> np.ndarray:
    """C_i = int_0^{r_i} f dr with the grid's cumulative rule (C_0 = 0)."""
    idx, coef = _cum_increments(grid, np.asarray(f))
    inc = np.sum(coef * np.asarray(f)[idx], axis=1)
    out = np.zeros(grid.n)
    np.cumsum(inc, out=out[1:])
    return out


def cumulative_adjoint(grid: RadialGrid, z: np.ndarray) -> np.ndarray:
    """Transpose of cumulative_integral: returns C^T z.

    Needed to assemble exact discrete gradients of prefix-built functionals.
    """
    z = np.asarray(z)
    idx, coef = _cum_increments(grid, z)
    # C_i = sum_{k<=i} inc_k, so C^T z weights increment k by suffix sums of z
    s = np.cumsum(z[::-1])[::-1]  # s[k] = sum_{i>=k} z_i
    out = np.zeros(grid.n)
    np.add.at(out, idx, coef * s[1:, None])
    return out


def differentiate(u: RadialFunction) -> RadialFunction:
    """Second-order discrete d/dr; u'(0) = 0 by radial symmetry.

    Interior nodes use the 3-point stencil; the outer endpoint a one-sided
    second-order stencil.  Written in difference form so constants map to
    exactly zero.
    """
    g = u.grid
    x, v = g.nodes, u.values
    if g.n < 3:
        raise ValueError("need at least 3 nodes to differentiate")
    d = np.diff(x)
    out = np.empty(g.n)
    out[0] = 0.0
    dl, dr = d[:-1], d[1:]
    a = dl / (dr * (dl + dr))
    b = dr / (dl * (dl + dr))
    out[1:-1] = a * (v[2:] - v[1:-1]) - b * (v[:-2] - v[1:-1])
    d1, d2 = d[-1], d[-2]
    # one-sided: alpha*(v[-1]-v[-2]) + beta*(v[-2]-v[-3]), second order
    alpha = (2.0 * d1 + d2) / (d1 * (d1 + d2))
    beta = -d1 / (d2 * (d1 + d2))
    out[-1] = alpha * (v[-1] - v[-2]) + beta * (v[-2] - v[-3])
    return RadialFunction(g, out)


def diff_matrix(grid: RadialGrid):
    """Sparse matrix realizing `differentiate` (rows match it exactly)."""
    import scipy.sparse as sp

    n = grid.n
    x = grid.nodes
    d = np.diff(x)
    rows, cols, vals = [], [], []
    dl, dr = d[:-1], d[1:]
    a = dl / (dr * (dl + dr))
    b = dr / (dl * (dl + dr))
    i = np.arange(1, n - 1)
    rows += [i, i, i]
    cols += [i + 1, i, i - 1]
    vals += [a, b - a, -b]
    d1, d2 = d[-1], d[-2]
    alpha = (2.0 * d1 + d2) / (d1 * (d1 + d2))
    beta = -d1 / (d2 * (d1 + d2))
    rows += [np.array([n - 1] * 3)]
    cols += [np.array([n - 1, n - 2, n - 3])]
    vals += [np.array([alpha, beta - alpha, -beta])]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def norm_lp(u: RadialFunction, p: float) -> float:
    """Plane L^p norm (2*pi int |u|^p r dr)^{1/p}."""
    if p < 1:
        raise ValueError("p must be >= 1")
    g = u.grid
    val = TWO_PI * float(np.sum(g.weights * np.abs(u.values) ** p * g.nodes))
    return val ** (1.0 / p)


def norm_sobolev(u: RadialFunction, m0: float) -> float:
    """sqrt(||u'||_2^2 + m0 ||u||_2^2), both in the plane L^2."""
    if m0 <= 0:
        raise ValueError("m0 must be positive")
    du = differentiate(u).values
    g = u.grid
    grad2 = TWO_PI * float(np.sum(g.weights * du**2 * g.nodes))
    l22 = TWO_PI * float(np.sum(g.weights * u.values**2 * g.nodes))
    return float(np.sqrt(grad2 + m0 * l22))


def dilate(u: RadialFunction, tau: float) -> RadialFunction:
    """v(r) = u(tau r) by monotone cubic interpolation; 0 beyond R_max."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    g = u.grid
    if tau == 1.0:
        return u
    interp = PchipInterpolator(g.nodes, u.values, extrapolate=False)
    v = interp(tau * g.nodes)
    v = np.where(np.isnan(v), 0.0, v)
    return RadialFunction(g, v)


def _fornberg(x: np.ndarray, x0: float, m: int) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at x0 on nodes x."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def laplacian_radial(u: RadialFunction) -> np.ndarray:
    """Radial Laplacian u'' + u'/r, with the smooth limit 2u''(0) at r = 0.

    Fourth-order stencils on uniform grids (even extension through the
    origin), second-order 3-point stencils on graded grids.
    """
    g = u.grid
    x, v = g.nodes, u.values
    n = g.n
    out = np.empty(n)
    if g.grading == "uniform":
        h = x[1] - x[0]
        h2 = 12.0 * h * h
        h1 = 12.0 * h
        # interior, 5-point centered
        i = np.arange(2, n - 2)
        upp = (-v[i - 2] + 16 * v[i - 1] - 30 * v[i] + 16 * v[i + 1] - v[i + 2]) / h2
        up = (v[i - 2] - 8 * v[i - 1] + 8 * v[i + 1] - v[i + 2]) / h1
        out[2 : n - 2] = upp + up / x[i]
        # r = 0: Delta u = 2 u''(0), even extension
        out[0] = 2.0 * (-30 * v[0] + 32 * v[1] - 2 * v[2]) / h2
        # r = h: even extension supplies the ghost value u(-h) = u(h)
        upp1 = (16 * v[0] - 31 * v[1] + 16 * v[2] - v[3]) / h2
        up1 = (-8 * v[0] + v[1] + 8 * v[2] - v[3]) / h1
        out[1] = upp1 + up1 / x[1]
        # last two nodes: one-sided 6-point stencils
        for i in (n - 2, n - 1):
            sl = slice(n - 6, n)
            w2 = _fornberg(x[sl], x[i], 2)
            w1 = _fornberg(x[sl], x[i], 1)
            out[i] = np.dot(w2, v[sl]) + np.dot(w1, v[sl]) / x[i]
    else:
        for i in range(n):
            if i == 0:
                sl = slice(0, 3)
                out[0] = 2.0 * np.dot(_fornberg(x[sl], 0.0, 2), v[sl])
                continue
            sl = slice(max(0, i - 1), min(n, i + 2))
            if sl.stop - sl.start < 3:
                sl = slice(n - 3, n)
            w2 = _fornberg(x[sl], x[i], 2)
            w1 = _fornberg(x[sl], x[i], 1)
            out[i] = np.dot(w2, v[sl]) + np.dot(w1, v[sl]) / x[i]
    return out


def save_profile_csv(path, u: RadialFunction) -> None:
    """Write a profile as CSV with header r,value at full precision."""
    with open(path, "w") as fh:
        fh.write("r,value\n")
        for r, v in zip(u.grid.nodes, u.values):
            fh.write(f"{float(r)!r},{float(v)!r}\n")


def load_profile_csv(path, grading: str = "uniform") -> RadialFunction:
    """Read a profile CSV written by save_profile_csv, rebuilding the grid."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    nodes = data[:, 0]
    n = len(nodes)
    if grading == "uniform":
        grid = make_grid(nodes[-1], n, "uniform")
    else:
        d = np.diff(nodes)
        weights = np.zeros(n)
        weights[:-1] += d / 2
        weights[1:] += d / 2
        grid = RadialGrid(nodes, weights, grading)
    return RadialFunction(grid, data[:, 1])
