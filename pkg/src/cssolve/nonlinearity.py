"""Nonlinearities g and the derived envelope machinery.

From an odd continuous g with negative slope at the origin we derive
m0 = -(1/2) limsup_{xi->0} g(xi)/xi and the envelopes

    lambda(xi)     = max(g(xi) + m0 xi, 0)           (xi >= 0, odd extension)
    lambda_bar(xi) = xi^{p0} sup_{0<tau<=xi} lambda(tau)/tau^{p0}

together with their primitives Lambda and Lambda_bar.  lambda_bar is the
smallest odd majorant of lambda with lambda_bar(xi)/xi^{p0} non-decreasing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

_BAR_SAMPLES = 4096


@dataclass
class NonlinearityModel:
    """An odd nonlinearity g, its primitive G, and envelope data.

    g and G must accept numpy arrays.  delta0 is the width of the interval
    where lambda vanishes; it may be supplied exactly (constructors do) or
    estimated from samples.
    """

    g: Callable[[np.ndarray], np.ndarray]
    big_g: Callable[[np.ndarray], np.ndarray]
    m0: float
    p0: float = 2.0
    delta0: Optional[float] = None
    gprime: Optional[Callable[[np.ndarray], np.ndarray]] = None
    description: str = ""
    _bar_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.m0 <= 0:
            raise ValueError("m0 must be positive")
        if self.p0 <= 1:
            raise ValueError("p0 must exceed 1")

    # -- envelope machinery -------------------------------------------------

    def _bar_table(self, xi_max: float):
        """Running max of lambda(tau)/tau^p0 on log-spaced samples of (0, xi_max]."""
        key = self._bar_cache.get("xi_max", 0.0)
        if key >= xi_max and "tau" in self._bar_cache:
            return self._bar_cache["tau"], self._bar_cache["runmax"]
        hi = max(xi_max, 1.0)
        tau = np.geomspace(hi * 1e-12, hi, _BAR_SAMPLES)
        ratio = lambda_of(self, tau) / tau**self.p0
        runmax = np.maximum.accumulate(ratio)
        self._bar_cache.update(xi_max=hi, tau=tau, runmax=runmax)
        return tau, runmax

    def _lambda_table(self, xi_max: float):
        """Dense tables of Lambda and Lambda_bar on [0, xi_max] (cumulative trapezoid)."""
        key = self._bar_cache.get("lam_xi_max", 0.0)
        if key >= xi_max and "lam_xi" in self._bar_cache:
            return self._bar_cache["lam_xi"], self._bar_cache["Lam"], self._bar_cache["Lam_bar"]
        hi = max(xi_max, 1.0)
        xi = np.linspace(0.0, hi, 16385)
        lam = lambda_of(self, xi)
        lam_bar = lambda_bar_of(self, xi)
        Lam = np.concatenate(([0.0], np.cumsum((lam[1:] + lam[:-1]) / 2.0 * np.diff(xi))))
        Lam_bar = np.concatenate(([0.0], np.cumsum((lam_bar[1:] + lam_bar[:-1]) / 2.0 * np.diff(xi))))
        self._bar_cache.update(lam_xi_max=hi, lam_xi=xi, Lam=Lam, Lam_bar=Lam_bar)
        return xi, Lam, Lam_bar


def power_model(p: float, omega: float, p0: float = 2.0) -> NonlinearityModel:
    """g(xi) = |xi|^{p-1} xi - omega xi; m0 = omega/2 and delta0 = (omega/2)^{1/(p-1)} exactly."""
    if not (1.0 < p <= 5.0):
        raise ValueError("p must lie in (1, 5]")
    if omega <= 0:
        raise ValueError("omega must be positive")

    def g(xi):
        xi = np.asarray(xi, dtype=float)
        return np.abs(xi) ** (p - 1) * xi - omega * xi

    def big_g(xi):
        xi = np.asarray(xi, dtype=float)
        return np.abs(xi) ** (p + 1) / (p + 1) - omega * xi**2 / 2.0

    def gprime(xi):
        xi = np.asarray(xi, dtype=float)
        return p * np.abs(xi) ** (p - 1) - omega

    return NonlinearityModel(
        g=g,
        big_g=big_g,
        m0=omega / 2.0,
        p0=p0,
        delta0=(omega / 2.0) ** (1.0 / (p - 1.0)),
        gprime=gprime,
        description=f"power p={p} omega={omega}",
    )


def table_model(samples, p0: float = 2.0) -> NonlinearityModel:
    """Nonlinearity from (xi, g(xi)) samples on xi >= 0, extended oddly.

    g is monotone-cubic interpolated, G integrated from the interpolant and
    m0 estimated from the samples nearest the origin.
    """
    from scipy.interpolate import PchipInterpolator

    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise ValueError("need at least 4 (xi, g) sample pairs")
    xi_s, g_s = pts[:, 0], pts[:, 1]
    if xi_s[0] < 0 or np.any(np.diff(xi_s) <= 0):
        raise ValueError("sample abscissae must be non-negative and increasing")
    if xi_s[0] > 0:
        xi_s = np.concatenate(([0.0], xi_s))
        g_s = np.concatenate(([0.0], g_s))
    interp = PchipInterpolator(xi_s, g_s)
    anti = interp.antiderivative()

    def g(xi):
        xi = np.asarray(xi, dtype=float)
        return np.sign(xi) * interp(np.clip(np.abs(xi), 0.0, xi_s[-1]))

    def big_g(xi):
        xi = np.asarray(xi, dtype=float)
        return anti(np.clip(np.abs(xi), 0.0, xi_s[-1]))

    # m0 comes from the slope of g at the origin: g(xi)/xi -> -2 m0
    small = xi_s[-1] * 1e-8
    m0 = -0.5 * float(g(small) / small)
    if m0 <= 0:
        raise ValueError("sampled nonlinearity has no negative slope at 0")
    return NonlinearityModel(g=g, big_g=big_g, m0=m0, p0=p0, description="table")


def lambda_of(model: NonlinearityModel, xi) -> np.ndarray | float:
    """lambda(xi) = max(g(xi) + m0 xi, 0) for xi >= 0, odd in xi."""
    arr = np.asarray(xi, dtype=float)
    a = np.abs(arr)
    val = np.maximum(model.g(a) + model.m0 * a, 0.0)
    out = np.sign(arr) * val
    return float(out) if np.isscalar(xi) or arr.ndim == 0 else out


def lambda_bar_of(model: NonlinearityModel, xi) -> np.ndarray | float:
    """Envelope xi^{p0} sup_{0<tau<=xi} lambda(tau)/tau^{p0}, odd, 0 at 0."""
    arr = np.atleast_1d(np.asarray(xi, dtype=float))
    a = np.abs(arr)
    out = np.zeros_like(a)
    pos = a > 0
    if pos.any():
        tau, runmax = model._bar_table(float(a.max()))
        idx = np.searchsorted(tau, a[pos], side="right") - 1
        sup = np.where(idx >= 0, runmax[np.maximum(idx, 0)], 0.0)
        # include the query point itself in the sup
        sup = np.maximum(sup, lambda_of(model, a[pos]) / a[pos] ** model.p0)
        out[pos] = a[pos] ** model.p0 * sup
    out = np.sign(arr) * out
    return float(out[0]) if np.isscalar(xi) or np.asarray(xi).ndim == 0 else out


def capital_lambda(model: NonlinearityModel, xi) -> np.ndarray | float:
    """Lambda(xi) = int_0^xi lambda; even and non-negative."""
    arr = np.atleast_1d(np.asarray(xi, dtype=float))
    a = np.abs(arr)
    grid, lam, _ = model._lambda_table(float(a.max()) if a.size else 1.0)
    out = np.interp(a, grid, lam)
    return float(out[0]) if np.isscalar(xi) or np.asarray(xi).ndim == 0 else out


def capital_lambda_bar(model: NonlinearityModel, xi) -> np.ndarray | float:
    """Lambda_bar(xi) = int_0^xi lambda_bar; even, >= Lambda."""
    arr = np.atleast_1d(np.asarray(xi, dtype=float))
    a = np.abs(arr)
    grid, _, lam_bar = model._lambda_table(float(a.max()) if a.size else 1.0)
    out = np.interp(a, grid, lam_bar)
    return float(out[0]) if np.isscalar(xi) or np.asarray(xi).ndim == 0 else out


@dataclass
class HypothesisReport:
    """Numerical checks of the structural hypotheses on g."""

    odd_violation: float
    m0: float
    delta0: float
    zeta0: Optional[float]
    growth_ok: bool
    g2prime_ok: bool

    @property
    def all_ok(self) -> bool:
        return (
            self.odd_violation < 1e-10
            and self.g2prime_ok
            and self.growth_ok
            and self.zeta0 is not None
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "odd_violation": self.odd_violation,
                "m0": self.m0,
                "delta0": self.delta0,
                "zeta0": self.zeta0,
                "growth_ok": self.growth_ok,
                "g2prime_ok": self.g2prime_ok,
            },
            indent=2,
        )


def check_hypotheses(model: NonlinearityModel, xi_max: float = 30.0, samples: int = 2000) -> HypothesisReport:
    """Sample-based report on oddness, slope at 0, subcritical growth, G > 0.

    The limsup of g(xi)/xi at 0 is estimated on the geometric sequence
    xi = 2^{-k}; the growth condition is checked against exp(alpha xi^2)
    for alpha in {0.1, 1}.
    """
    xi = np.linspace(xi_max / samples, xi_max, samples)
    odd_violation = float(np.max(np.abs(model.g(-xi) + model.g(xi))))

    small = 2.0 ** -np.arange(1, 41, dtype=float)
    slopes = model.g(small) / small
    limsup = float(np.max(slopes[-10:]))
    g2prime_ok = np.isfinite(limsup) and limsup < 0
    m0_est = -0.5 * limsup if g2prime_ok else float("nan")

    growth_ok = True
    tail = xi[xi >= 0.5 * xi_max]
    for alpha in (0.1, 1.0):
        ratio = np.abs(model.g(tail)) * np.exp(-alpha * tail**2)
        if not (ratio[-1] < 1e-6 and ratio[-1] <= ratio[0] + 1e-12):
            growth_ok = False

    big_g = model.big_g(xi)
    pos = np.nonzero(big_g > 0)[0]
    zeta0 = float(xi[pos[0]]) if pos.size else None

    lam = lambda_of(model, xi)
    zero = np.nonzero(lam > 0)[0]
    delta0_est = float(xi[zero[0] - 1]) if zero.size and zero[0] > 0 else 0.0
    delta0 = model.delta0 if model.delta0 is not None else delta0_est

    return HypothesisReport(
        odd_violation=odd_violation,
        m0=model.m0 if g2prime_ok else m0_est,
        delta0=delta0,
        zeta0=zeta0,
        growth_ok=growth_ok,
        g2prime_ok=bool(g2prime_ok),
    )
