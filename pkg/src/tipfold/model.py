"""Domain types and closed-form segment solutions for the piecewise-linear model.

The system integrated throughout this package is

    dx/dt = 2|x| - mu(t) + f(t),   mu(t) = mu0 - eps*t,
    f(t)  = A*cos(omega*t - phase),

together with its smoothed relative (2*sqrt(alpha^2 + x^2) - 2*alpha in place
of 2|x|) and the classical saddle-node reference system dx/dt = x^2/alpha - mu + f.

On either side of the switching manifold x = 0 the piecewise-linear system is a
linear ODE with an exact solution

    x(t) = C * exp(s*2*(t - t_ref)) + p(t),      s = +1 (x > 0), s = -1 (x < 0),

where p(t) is the bounded particular solution (drift ramp plus forced
oscillation).  ``SegmentSolution`` stores one such branch; the event-driven
simulator chains them across crossings.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class ConfigError(ValueError):
    """A SystemConfig invariant is violated; the message names the invariant."""


class SystemKind(enum.Enum):
    NONSMOOTH_PWL = "nonsmooth_pwl"
    SMOOTHED_NSF = "smoothed_nsf"
    SNB = "snb"


class Region(enum.Enum):
    NEGATIVE = -1
    POSITIVE = 1

    @property
    def sign(self) -> int:
        return self.value


@dataclass(frozen=True)
class SystemConfig:
    """Full parameterization of one scenario.

    Defaults are the standard demonstration scenario (mu0=1, x0=-1/2, eps=0.1,
    A=1, omega=1, K=10, alpha=0, cosine forcing).
    """

    mu0: float = 1.0
    eps: float = 0.1
    A: float = 1.0
    omega: float = 1.0
    phase: float = 0.0
    alpha: float = 0.0
    K: float = 10.0
    x0: float = -0.5
    kind: SystemKind = SystemKind.NONSMOOTH_PWL

    def __post_init__(self):
        if self.eps < 0:
            raise ConfigError("eps must be >= 0")
        if self.A < 0:
            raise ConfigError("A must be >= 0")
        if self.omega < 0:
            raise ConfigError("omega must be >= 0")
        if self.K <= 0:
            raise ConfigError("K must be > 0")
        if self.alpha < 0:
            raise ConfigError("alpha must be >= 0")
        if self.kind is SystemKind.NONSMOOTH_PWL and self.alpha != 0.0:
            raise ConfigError("kind=NonSmoothPWL requires alpha = 0")
        if self.kind is SystemKind.SMOOTHED_NSF and self.alpha <= 0.0:
            raise ConfigError("kind=SmoothedNSF requires alpha > 0")
        if self.kind is SystemKind.SNB and self.alpha <= 0.0:
            raise ConfigError("kind=SNB requires alpha > 0")

    def mu(self, t: float) -> float:
        """Control value mu(t) = mu0 - eps*t."""
        return self.mu0 - self.eps * t


def forcing(cfg: SystemConfig, t: float) -> float:
    """Forcing f(t) = A*cos(omega*t - phase); exactly 0.0 when A == 0."""
    if cfg.A == 0.0:
        return 0.0
    return cfg.A * math.cos(cfg.omega * t - cfg.phase)


def x_particular(cfg: SystemConfig, t: float) -> float:
    """Bounded particular solution of the linear ODE in the region x > 0.

    x_P(t) = mu(t)/2 - eps/4 + A/(4 + omega^2) * [omega*sin(th) - 2*cos(th)],
    th = omega*t - phase.  Its sign at an upward crossing of x = 0 decides
    early versus postponed tipping.
    """
    value = cfg.mu(t) / 2.0 - cfg.eps / 4.0
    if cfg.A != 0.0:
        th = cfg.omega * t - cfg.phase
        value += cfg.A / (4.0 + cfg.omega**2) * (
            cfg.omega * math.sin(th) - 2.0 * math.cos(th)
        )
    return value


def q_plus(A: float, omega: float, theta: float) -> float:
    """Forced oscillation of the x > 0 branch at forcing phase theta = omega*t."""
    return A / (4.0 + omega**2) * (omega * math.sin(theta) - 2.0 * math.cos(theta))


def q_minus(A: float, omega: float, theta: float) -> float:
    """Forced oscillation of the x < 0 branch at forcing phase theta = omega*t."""
    return A / (4.0 + omega**2) * (omega * math.sin(theta) + 2.0 * math.cos(theta))


@dataclass(frozen=True)
class SegmentSolution:
    """Exact solution branch on one side of x = 0.

    The exponential is anchored at ``t_ref`` (the segment start) so that
    exp(2*(t - t_ref)) stays representable for large absolute times.  ``C`` is
    C+ for the positive region and C- for the negative region.
    """

    region: Region
    t_ref: float
    C: float
    mu0: float
    eps: float
    A: float
    omega: float
    phase: float

    @classmethod
    def from_state(cls, cfg: SystemConfig, region: Region, t_ref: float,
                   x_ref: float) -> "SegmentSolution":
        """Segment entered at (t_ref, x_ref); C fixed by continuity there."""
        seg = cls(region=region, t_ref=t_ref, C=0.0, mu0=cfg.mu0, eps=cfg.eps,
                  A=cfg.A, omega=cfg.omega, phase=cfg.phase)
        C = x_ref - seg._particular(t_ref)
        object.__setattr__(seg, "C", C)
        return seg

    def _particular(self, t: float) -> float:
        mu_t = self.mu0 - self.eps * t
        if self.region is Region.POSITIVE:
            value = mu_t / 2.0 - self.eps / 4.0
        else:
            value = -mu_t / 2.0 - self.eps / 4.0
        if self.A != 0.0:
            th = self.omega * t - self.phase
            if self.region is Region.POSITIVE:
                value += q_plus(self.A, self.omega, th)
            else:
                value += q_minus(self.A, self.omega, th)
        return value


def segment_value(seg: SegmentSolution, t: float) -> float:
    """Exact state x(t) on the segment.

    The exponential factor alone can overflow when C is denormal-small while
    exp(2*(t - t_ref)) is astronomically large; the log-domain fallback keeps
    the product finite (or a clean IEEE inf) instead of raising.
    """
    z = 2.0 * seg.region.sign * (t - seg.t_ref)
    if z < 700.0:
        expo = seg.C * math.exp(z)
    elif seg.C == 0.0:
        expo = 0.0
    else:
        w = z + math.log(abs(seg.C))
        expo = math.copysign(math.exp(w) if w < 709.0 else math.inf, seg.C)
    return expo + seg._particular(t)


def segment_derivative(seg: SegmentSolution, t: float) -> float:
    """Exact dx/dt on the segment: s*2*x - mu(t) + f(t) with s the region sign."""
    x = segment_value(seg, t)
    f = 0.0
    if seg.A != 0.0:
        f = seg.A * math.cos(seg.omega * t - seg.phase)
    return 2.0 * seg.region.sign * x - (seg.mu0 - seg.eps * t) + f
