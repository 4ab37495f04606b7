"""Closed-form asymptotic estimators and the phase/root analysis of tipping.

Everything here is algebra: the slow-drift tipping value, the large- and
small-frequency fold estimates, the large-frequency forced tipping estimate,
the saddle-node reference value, and the root structure of

    g_NS(mu) = -mu + A*cos(Omega*(mu0 - mu)),      Omega = omega/eps,

whose descending roots locate the tipping plateaus at small omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .model import SystemConfig

# First zero of Ai(-x); prefactor of the classical saddle-node tipping lag.
C0 = 2.33810741
# Empirical curvature constant of the large-omega fold correction.
L_DEFAULT = 0.7
# Prefactor of the large-omega forced tipping lag.
M_COEFF = C0 * (math.pi / 2.0) ** (1.0 / 3.0)


class DomainError(ValueError):
    """Inputs leave the validity domain of an asymptotic expression."""


def mu_eps(eps: float, K: float) -> float:
    """Slow-drift tipping value (three-term expansion).

    mu_eps = -eps/2 - (eps/2)*log(2K/eps) - (eps^2/(8K))*log(2K/eps)
    """
    if eps <= 0.0:
        raise DomainError("mu_eps requires eps > 0")
    if K <= 0.0:
        raise DomainError("mu_eps requires K > 0")
    log_term = math.log(2.0 * K / eps)
    return -eps / 2.0 - eps / 2.0 * log_term - eps**2 / (8.0 * K) * log_term


def mu_cf_large_omega(A: float, omega: float, L: float = L_DEFAULT) -> float:
    """Fold estimate for large omega: (4A/(pi*omega)) * (1 - L/omega^2)."""
    if omega <= 0.0:
        raise DomainError("mu_cf_large_omega requires omega > 0")
    return 4.0 * A / (math.pi * omega) * (1.0 - L / omega**2)


def mu_cf_small_omega(A: float, omega: float) -> float:
    """Fold estimate for small omega: A / (1 + omega^2/4)."""
    if omega < 0.0:
        raise DomainError("omega must be >= 0")
    return A / (1.0 + omega**2 / 4.0)


def mu_tp_large_omega(A: float, omega: float, eps: float) -> float:
    """Forced tipping estimate for large omega and small drift:

    mu_TP ~ 4A/(pi*omega) - M*(A*eps^2/omega)^(1/3),  M = c0*(pi/2)^(1/3).
    """
    if omega <= 0.0:
        raise DomainError("mu_tp_large_omega requires omega > 0")
    return 4.0 * A / (math.pi * omega) - M_COEFF * (A * eps**2 / omega) ** (1.0 / 3.0)


def snb_mu_tp(alpha: float, eps: float) -> float:
    """Saddle-node tipping lag: mu_TP ~ -c0 * alpha^(1/3) * eps^(2/3)."""
    if alpha <= 0.0 or eps <= 0.0:
        raise DomainError("snb_mu_tp requires alpha > 0 and eps > 0")
    return -C0 * alpha ** (1.0 / 3.0) * eps ** (2.0 / 3.0)


def lemma5_smooth_surface(eps: float, mu0: float, A: float, omega: float) -> bool:
    """True when eps > 2*mu0 + 2A/sqrt(1 + omega^2/4).

    The bound forces the particular solution negative for all t > 0, so the
    tipping surface has no sharp transitions.
    """
    return eps > 2.0 * mu0 + 2.0 * A / math.sqrt(1.0 + omega**2 / 4.0)


@dataclass(frozen=True)
class EstimateSet:
    """All closed-form estimates for one scenario (None where undefined)."""

    mu_eps: float | None
    mu_g: float
    mu_cf_large: float | None
    mu_cf_small: float
    mu_tp_large_omega: float | None
    snb_mu_tp: float | None
    constants: dict = field(default_factory=lambda: {
        "c0": C0, "L": L_DEFAULT, "M": M_COEFF})


def estimate_set(cfg: SystemConfig) -> EstimateSet:
    me = mu_eps(cfg.eps, cfg.K) if cfg.eps > 0.0 else None
    mg = cfg.A / math.sqrt(1.0 + cfg.omega**2 / 4.0)
    large = mu_cf_large_omega(cfg.A, cfg.omega) if cfg.omega > 0.0 else None
    tp_large = (mu_tp_large_omega(cfg.A, cfg.omega, cfg.eps)
                if cfg.omega > 0.0 else None)
    snb = (snb_mu_tp(cfg.alpha, cfg.eps)
           if cfg.alpha > 0.0 and cfg.eps > 0.0 else None)
    return EstimateSet(mu_eps=me, mu_g=mg, mu_cf_large=large,
                       mu_cf_small=mu_cf_small_omega(cfg.A, cfg.omega),
                       mu_tp_large_omega=tp_large, snb_mu_tp=snb)


@dataclass(frozen=True)
class PhaseRoot:
    mu_r: float
    derivative_sign: int     # sign of g_NS'(mu_r)
    slope: float             # d(mu_r)/d(Omega)


@dataclass(frozen=True)
class PhaseAnalysis:
    Omega: float
    roots: tuple[PhaseRoot, ...]
    omega_star: float | None
    n_max: int | None
    bounds: tuple[float, float]
    jump_scale: float


def _g_ns(mu, Omega, A, mu0):
    return -mu + A * math.cos(Omega * (mu0 - mu))


def _dg_ns(mu, Omega, A, mu0):
    return -1.0 + A * Omega * math.sin(Omega * (mu0 - mu))


def _root_slope(mu_r, Omega, A, mu0):
    s = A * math.sin(Omega * (mu0 - mu_r))
    denom = 1.0 - Omega * s
    if denom == 0.0:
        return math.inf
    return -(mu0 - mu_r) * s / denom


def phase_roots(cfg: SystemConfig, mu0_fn=None) -> PhaseAnalysis:
    """Roots of g_NS on [-A-1, min(mu0, A)] with derivative/slope annotations.

    The scan step resolves the oscillation period 2*pi/Omega; intervals with a
    derivative sign flip but no value sign change are split at the enclosed
    extremum so near-tangent root pairs are not skipped.  ``mu0_fn`` optionally
    carries a symbolic mu0(omega) into the transition count (the root search
    itself always uses the literal cfg.mu0).
    """
    if cfg.eps <= 0.0:
        raise DomainError("phase_roots requires eps > 0")
    Omega = cfg.omega / cfg.eps
    A, mu0 = cfg.A, cfg.mu0
    lo, hi = -A - 1.0, min(mu0, A)

    g = lambda m: _g_ns(m, Omega, A, mu0)
    dg = lambda m: _dg_ns(m, Omega, A, mu0)

    mus: list[float] = []
    if hi > lo:
        step = (hi - lo) / 50.0
        if Omega > 0.0:
            step = min(step, math.pi / (10.0 * Omega * max(1.0, A)))
        n = max(int(math.ceil((hi - lo) / step)), 1)
        grid = np.linspace(lo, hi, n + 1)
        vals = -grid + A * np.cos(Omega * (mu0 - grid))
        for i in range(n):
            va, vb = float(vals[i]), float(vals[i + 1])
            a, b = float(grid[i]), float(grid[i + 1])
            found: list[float] = []
            if va == 0.0:
                found.append(a)
            elif vb == 0.0 and i == n - 1:
                found.append(b)
            elif (va < 0.0) != (vb < 0.0):
                found.append(brentq(g, a, b, xtol=1e-14))
            else:
                da, db = dg(a), dg(b)
                if da * db < 0.0:
                    mm = brentq(dg, a, b, xtol=1e-14)
                    vm = g(mm)
                    if vm == 0.0:
                        found.append(mm)
                    elif (vm < 0.0) != (va < 0.0):
                        found.append(brentq(g, a, mm, xtol=1e-14))
                        found.append(brentq(g, mm, b, xtol=1e-14))
            mus.extend(found)

    roots = tuple(
        PhaseRoot(mu_r=m,
                  derivative_sign=int(math.copysign(1.0, dg(m))) if dg(m) != 0.0 else 0,
                  slope=_root_slope(m, Omega, A, mu0))
        for m in sorted(set(mus)))

    me = mu_eps(cfg.eps, cfg.K)
    star = None
    if A > 0.0 and abs(1.0 + me / A) <= 1.0 and mu0 > A + me:
        star = cfg.eps * math.acos(1.0 + me / A) / (mu0 - A - me)
    try:
        nm = n_max(cfg.omega, cfg.eps, A, cfg.K,
                   mu0_fn if mu0_fn is not None else mu0)
    except DomainError:
        nm = None
    jump = 2.0 * math.pi * cfg.eps / cfg.omega if cfg.omega > 0.0 else math.inf
    bounds = (A + me - jump, A + me)
    return PhaseAnalysis(Omega=Omega, roots=roots, omega_star=star, n_max=nm,
                         bounds=bounds, jump_scale=jump)


def n_max(omega: float, eps: float, A: float, K: float, mu0_fn) -> int:
    """Largest n with Q(n; omega) = omega - 2*n*pi*eps/(mu0 - A - mu_eps) > 0.

    Counts the sharp-transition ladder below the given omega.  ``mu0_fn`` may
    be a number or a callable mu0(omega); symbolic forms like m*mu_G(omega)
    are evaluated in the omega -> 0 limit, where the transition ladder
    accumulates (this convention reproduces the reported counts).
    """
    if omega <= 0.0:
        raise DomainError("n_max requires omega > 0")
    mu0 = mu0_fn(0.0) if callable(mu0_fn) else float(mu0_fn)
    denom = mu0 - A - mu_eps(eps, K)
    if denom <= 0.0:
        raise DomainError("n_max requires mu0 > A + mu_eps")
    count = omega * denom / (2.0 * math.pi * eps)
    n = int(math.floor(count))
    if float(n) == count:
        n -= 1
    return max(n, 0)
