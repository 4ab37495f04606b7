"""Adaptive integration of the smoothed system and the saddle-node reference.

The smoothed right-hand side replaces 2|x| by 2*sqrt(alpha^2 + x^2) - 2*alpha,
evaluated in the cancellation-free form 2*x^2/(sqrt(alpha^2 + x^2) + alpha).
The saddle-node (SNB) reference is dy/dt = y^2/alpha - mu(t) + f(t).

Integration is delegated to an embedded 4(5) Runge-Kutta pair with tight
tolerances (scipy's RK45); the tipping event x = K with dx/dt > 0 is an
upward-crossing terminal event located on the dense output.  Smoothing always
postpones tipping (t_tp increases with alpha), which bounds every result
between the non-smooth limit and the pure-drift threshold crossing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .exactsim import NoTipWithinBudget, default_t_max
from .model import ConfigError, SystemConfig, SystemKind

RTOL = 1e-10
ATOL = 1e-12


class StepFloorReached(RuntimeError):
    """The adaptive integrator gave up (step size underflow / stiffness)."""


class AlphaRegime(enum.Enum):
    NONSMOOTH_LIKE = "nonsmooth_like"          # alpha < alpha0
    SNB_LIKE = "snb_like"                      # alpha0 <= alpha < alpha1
    THRESHOLD_LIMITED = "threshold_limited"    # alpha >= alpha1


def alpha_thresholds(eps: float, K: float) -> tuple[float, float]:
    """(alpha0, alpha1) = (eps*(ln(2K/eps)/2)^3, K^(3/2)*eps^(-1/2))."""
    if eps <= 0.0 or K <= 0.0:
        raise ConfigError("alpha thresholds require eps > 0 and K > 0")
    alpha0 = eps * (math.log(2.0 * K / eps) / 2.0) ** 3
    alpha1 = K ** 1.5 * eps ** -0.5
    return alpha0, alpha1


def classify_alpha(alpha: float, eps: float, K: float) -> AlphaRegime:
    alpha0, alpha1 = alpha_thresholds(eps, K)
    if alpha < alpha0:
        return AlphaRegime.NONSMOOTH_LIKE
    if alpha < alpha1:
        return AlphaRegime.SNB_LIKE
    return AlphaRegime.THRESHOLD_LIMITED


@dataclass(frozen=True)
class SmoothTipResult:
    alpha: float
    tipped: bool
    t_tp: float | None
    mu_tp: float | None
    regime: AlphaRegime | None
    thresholds: tuple[float, float] | None
    x_end: float
    samples: tuple | None = None   # (t array, x array) when sample_times given


def _run(rhs, cfg_like, t_max, rtol, atol, require_tip, sample_times):
    mu0, eps, K, x0, alpha = cfg_like
    event = lambda t, y: y[0] - K
    event.terminal = True
    event.direction = 1
    sol = solve_ivp(rhs, (0.0, t_max), [x0], method="RK45", rtol=rtol,
                    atol=atol, events=event, dense_output=sample_times is not None)
    if sol.status == -1:
        raise StepFloorReached(sol.message)
    tipped = bool(sol.t_events[0].size)
    t_tp = float(sol.t_events[0][0]) if tipped else None
    mu_tp = mu0 - eps * t_tp if tipped else None
    if not tipped and require_tip:
        raise NoTipWithinBudget(f"no tip up to t={t_max:.6g}")
    samples = None
    if sample_times is not None:
        ts = np.asarray(sample_times, dtype=float)
        t_hi = t_tp if tipped else sol.t[-1]
        ts = ts[ts <= t_hi]
        samples = (ts, sol.sol(ts)[0])
    regime = thresholds = None
    if eps > 0.0:
        thresholds = alpha_thresholds(eps, K)
        regime = classify_alpha(alpha, eps, K)
    return SmoothTipResult(alpha=alpha, tipped=tipped, t_tp=t_tp, mu_tp=mu_tp,
                           regime=regime, thresholds=thresholds,
                           x_end=float(sol.y[0][-1]), samples=samples)


def integrate_smoothed(cfg: SystemConfig, t_max: float | None = None, *,
                       rtol: float = RTOL, atol: float = ATOL,
                       require_tip: bool = True,
                       sample_times=None) -> SmoothTipResult:
    """Integrate dx/dt = 2*sqrt(alpha^2+x^2) - 2*alpha - mu(t) + f(t).

    Tipping is the upward crossing of x = K, located on the dense output.
    Raises NoTipWithinBudget if no tip occurs before t_max (unless
    require_tip=False) and StepFloorReached on integrator failure.
    """
    if cfg.kind is not SystemKind.SMOOTHED_NSF:
        raise ConfigError("integrate_smoothed requires kind=SmoothedNSF")
    if t_max is None:
        t_max = default_t_max(cfg)
    alpha, A, omega, phase = cfg.alpha, cfg.A, cfg.omega, cfg.phase
    mu0, eps = cfg.mu0, cfg.eps
    a2 = alpha * alpha

    def rhs(t, y):
        x = y[0]
        x2 = x * x
        smooth = 2.0 * x2 / (math.sqrt(a2 + x2) + alpha)
        f = A * math.cos(omega * t - phase) if A else 0.0
        return [smooth - (mu0 - eps * t) + f]

    return _run(rhs, (mu0, eps, cfg.K, cfg.x0, alpha), t_max, rtol, atol,
                require_tip, sample_times)


def integrate_snb(alpha: float, eps: float, A: float, omega: float, K: float,
                  mu0: float, x0: float, t_max: float | None = None, *,
                  phase: float = 0.0, rtol: float = RTOL, atol: float = ATOL,
                  require_tip: bool = True, sample_times=None) -> SmoothTipResult:
    """Integrate the saddle-node reference dy/dt = y^2/alpha - mu(t) + f(t).

    The terminal event at y = K fires well before the finite-time blow-up, so
    the singularity is never integrated through.
    """
    if alpha <= 0.0:
        raise ConfigError("integrate_snb requires alpha > 0")
    if t_max is None:
        t_max = (mu0 + 20.0) / max(eps, 1e-6)

    def rhs(t, y):
        f = A * math.cos(omega * t - phase) if A else 0.0
        return [y[0] * y[0] / alpha - (mu0 - eps * t) + f]

    return _run(rhs, (mu0, eps, K, x0, alpha), t_max, rtol, atol,
                require_tip, sample_times)


def alpha_sweep(base_cfg: SystemConfig, alphas, t_max: float | None = None,
                **kwargs) -> list[SmoothTipResult]:
    """Tipping results across an ascending alpha grid, shared scenario.

    Smoothing postpones tipping, so t_tp is strictly increasing along the
    returned list.
    """
    alphas = list(alphas)
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ConfigError("alphas must be sorted strictly ascending")
    out = []
    for alpha in alphas:
        cfg = SystemConfig(mu0=base_cfg.mu0, eps=base_cfg.eps, A=base_cfg.A,
                           omega=base_cfg.omega, phase=base_cfg.phase,
                           alpha=alpha, K=base_cfg.K, x0=base_cfg.x0,
                           kind=SystemKind.SMOOTHED_NSF)
        out.append(integrate_smoothed(cfg, t_max, **kwargs))
    return out
