"""Event-driven exact simulation of the non-smooth system.

The trajectory is a chain of closed-form ``SegmentSolution`` branches joined at
crossings of the switching manifold x = 0.  Because each branch is exact, the
only numerical work is root finding: segment expressions are sampled with step
min(0.1, pi/(4*omega)) to bracket sign changes of x (region exits) and of
x - K (tipping), and each bracket is polished with Brent's method.  Tangential
passes are caught by locating derivative sign changes inside a sampling
interval and testing the enclosed extremum.

Tipping is the first time x = K with dx/dt > 0; the recorded tipping value is
mu_tp = mu0 - eps*t_tp.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from .model import (ConfigError, Region, SegmentSolution, SystemConfig,
                    SystemKind, forcing, segment_derivative, segment_value,
                    x_particular)

DEFAULT_MAX_EVENTS = 10_000
MU_MARGIN = 20.0        # time budget runs mu down to roughly -MU_MARGIN
GRAZE_DELTA = 1e-8      # look-ahead used to classify tangential crossings
ROOT_XTOL = 1e-13


class MaxEventsExceeded(RuntimeError):
    """Event cap hit; signals near-fold chatter (unbounded crossing count)."""


class NoTipWithinBudget(RuntimeError):
    """No tipping event found within the allotted time/event budget."""


class EventKind(enum.Enum):
    CROSS_UP = "cross_up"      # x: - -> +
    CROSS_DOWN = "cross_down"  # x: + -> -
    TIP = "tip"


@dataclass(frozen=True)
class Event:
    t: float
    x: float
    kind: EventKind


@dataclass(frozen=True)
class TrajectorySegment:
    segment: SegmentSolution
    t_start: float
    t_end: float


@dataclass(frozen=True)
class Trajectory:
    config: SystemConfig
    segments: tuple[TrajectorySegment, ...]
    events: tuple[Event, ...]
    tipped: bool
    t_tp: float | None = None
    mu_tp: float | None = None

    def value(self, t: float) -> float:
        """Exact x(t); t must lie within the simulated span."""
        for rec in self.segments:
            if rec.t_start - 1e-12 <= t <= rec.t_end + 1e-12:
                return segment_value(rec.segment, t)
        raise ValueError(f"t={t} outside simulated range")

    def cross_up_count(self) -> int:
        return sum(1 for e in self.events if e.kind is EventKind.CROSS_UP)


def default_t_max(cfg: SystemConfig) -> float:
    """Time budget: long enough for mu to fall MU_MARGIN below zero."""
    return (cfg.mu0 + MU_MARGIN) / max(cfg.eps, 1e-6)


def _initial_region(cfg: SystemConfig) -> Region:
    if cfg.x0 > 0.0:
        return Region.POSITIVE
    if cfg.x0 < 0.0:
        return Region.NEGATIVE
    slope = -cfg.mu0 + forcing(cfg, 0.0)
    if slope != 0.0:
        return Region.POSITIVE if slope > 0.0 else Region.NEGATIVE
    # Double tie (x0 = 0, dx/dt = 0): classify by the sign of x over (0, delta].
    # Both branch formulas agree there to O(delta^3), so probe either one.
    probe = SegmentSolution.from_state(cfg, Region.NEGATIVE, 0.0, 0.0)
    v = segment_value(probe, GRAZE_DELTA)
    return Region.POSITIVE if v > 0.0 else Region.NEGATIVE


def _refine_root(fn, lo: float, hi: float) -> float:
    return brentq(fn, lo, hi, xtol=ROOT_XTOL, maxiter=200)


def _first_root(fn, dfn, t0: float, t1: float, h: float, v0: float):
    """Earliest root of ``fn`` in (t0, t1], or None.

    ``t0`` is the probe point just after the segment start, where ``v0 = fn(t0)``
    already carries the entered region's sign (segments begin on x = 0 exactly,
    so the root at the very start must not be re-detected).  Plain bracketing
    on samples spaced ``h`` apart, with a tangential rescue: if fn keeps its
    sign across a step but dfn flips, the interior extremum is located and
    tested, splitting the step when the function pokes through.
    """
    a, va = t0, v0
    while a < t1:
        b = min(a + h, t1)
        vb = fn(b)
        root = _root_in(fn, dfn, a, va, b, vb)
        if root is not None:
            return root
        a, va = b, vb
    return None


def _root_in(fn, dfn, a: float, va: float, b: float, vb: float):
    if va == 0.0:
        return a
    if vb == 0.0:
        return b
    if (va < 0.0) != (vb < 0.0):
        return _refine_root(fn, a, b)
    # Same sign at both ends: check for an extremum poking through zero.
    da, db = dfn(a), dfn(b)
    if da == 0.0 or db == 0.0 or (da < 0.0) == (db < 0.0):
        return None
    tm = _refine_root(dfn, a, b)
    vm = fn(tm)
    if vm == 0.0:
        return tm
    if (vm < 0.0) != (va < 0.0):
        return _refine_root(fn, a, tm)
    return None


def _scan_positive(seg: SegmentSolution, K: float, t0: float, t1: float,
                   h: float, v0: float):
    """(t_cross, t_tip) for a positive-region segment, earliest roots only.

    One walk serves both targets, stopping at the first bracket found; this
    keeps exp(2*(t - t_ref)) bounded (~K) instead of sampling the exponential
    branch all the way to the time budget.
    """
    f = lambda s: segment_value(seg, s)
    df = lambda s: segment_derivative(seg, s)
    g = lambda s: segment_value(seg, s) - K
    blowup = 1e6 * max(1.0, K)

    a, va = t0, v0
    while a < t1:
        b = min(a + h, t1)
        vb = f(b)
        cross = _root_in(f, df, a, va, b, vb)
        tip = _root_in(g, df, a, va - K, b, vb - K)
        if tip is not None and (cross is None or tip <= cross):
            return None, tip
        if cross is not None:
            return cross, None
        if vb > blowup:
            break  # monotone escape far beyond threshold; no event ahead
        a, va = b, vb
    return None, None


def simulate(cfg: SystemConfig, t_max: float | None = None, *,
             max_events: int = DEFAULT_MAX_EVENTS) -> Trajectory:
    """Exact trajectory with all events up to min(t_tp, t_max).

    Raises MaxEventsExceeded when the crossing count passes ``max_events``
    (near-fold chatter grows without bound as eps -> 0).
    """
    if cfg.kind is not SystemKind.NONSMOOTH_PWL:
        raise ConfigError("simulate requires kind=NonSmoothPWL")
    if t_max is None:
        t_max = default_t_max(cfg)
    if t_max <= 0.0:
        raise ConfigError("t_max must be > 0")

    h = min(0.1, math.pi / (4.0 * cfg.omega)) if cfg.omega > 0.0 else 0.1
    segments: list[TrajectorySegment] = []
    events: list[Event] = []

    t, x = 0.0, cfg.x0
    region = _initial_region(cfg)
    tipped = False
    t_tp = None

    while True:
        seg = SegmentSolution.from_state(cfg, region, t, x)
        f = lambda s: segment_value(seg, s)
        df = lambda s: segment_derivative(seg, s)

        # Sign of x just after the segment start; at a crossing x(t)=0 exactly,
        # so probe a nudge ahead (tangential passes are classified by the sign
        # of x over (t, t+delta]).
        probe = min(t + GRAZE_DELTA, t_max)
        v0 = f(probe)
        if v0 == 0.0:
            v0 = float(region.sign) * 1e-300

        # Roots of x (and x - K) are located one at a time; tangential touches
        # (sign of x over (root, root+delta] matches the current region) are
        # skipped and the scan resumes past them.
        scan_from, scan_v = probe, v0
        t_cross = t_tip = None
        for _ in range(100_000):
            if region is Region.POSITIVE:
                t_cross, t_tip = _scan_positive(seg, cfg.K, scan_from, t_max,
                                                h, scan_v)
            else:
                t_cross = _first_root(f, df, scan_from, t_max, h, scan_v)
                t_tip = None
            if t_tip is not None:
                if segment_derivative(seg, t_tip) > 0.0:
                    break                      # genuine tip
                scan_from = min(t_tip + GRAZE_DELTA, t_max)
                scan_v, t_tip = f(scan_from), None
                continue
            if t_cross is None:
                break                          # segment runs to the budget
            v_after = f(min(t_cross + GRAZE_DELTA, t_max))
            if v_after == 0.0 or (v_after < 0.0) != (region is Region.NEGATIVE):
                break                          # genuine crossing
            scan_from = min(t_cross + GRAZE_DELTA, t_max)
            scan_v, t_cross = v_after, None    # graze: stay in the region
        else:
            raise MaxEventsExceeded("tangential-touch rescan cap exceeded")

        if t_tip is not None and (t_cross is None or t_tip <= t_cross):
            segments.append(TrajectorySegment(seg, t, t_tip))
            events.append(Event(t_tip, cfg.K, EventKind.TIP))
            tipped, t_tp = True, t_tip
            break

        if t_cross is None:
            segments.append(TrajectorySegment(seg, t, t_max))
            break

        segments.append(TrajectorySegment(seg, t, t_cross))
        new_region = Region.NEGATIVE if region is Region.POSITIVE else Region.POSITIVE
        kind = EventKind.CROSS_UP if new_region is Region.POSITIVE else EventKind.CROSS_DOWN
        events.append(Event(t_cross, 0.0, kind))
        if len(events) > max_events:
            raise MaxEventsExceeded(
                f"more than {max_events} events before t={t_cross:.6g} "
                "(near-fold oscillation?)")
        t, x, region = t_cross, 0.0, new_region

    mu_tp = cfg.mu0 - cfg.eps * t_tp if tipped else None
    return Trajectory(config=cfg, segments=tuple(segments), events=tuple(events),
                      tipped=tipped, t_tp=t_tp, mu_tp=mu_tp)


def tipping_point(cfg: SystemConfig, *, max_events: int = DEFAULT_MAX_EVENTS,
                  max_extensions: int = 6) -> tuple[float, float]:
    """(t_tp, mu_tp) of the first tipping event; extends t_max as needed.

    Requires eps > 0 so that mu -> -infinity guarantees an eventual tip.
    """
    if cfg.eps <= 0.0:
        raise ConfigError("tipping_point requires eps > 0")
    t_max = default_t_max(cfg)
    for _ in range(max_extensions):
        traj = simulate(cfg, t_max, max_events=max_events)
        if traj.tipped:
            return traj.t_tp, traj.mu_tp
        t_max *= 2.0
    raise NoTipWithinBudget(f"no tip up to t={t_max / 2.0:.6g}")


def exit_coefficient(cfg: SystemConfig, t_cross: float) -> float:
    """C+ of the positive segment entered at a CrossUp event.

    Continuity at the crossing gives C+ = -x_P(t_cross): the solution escapes
    upward (early tip) when x_P < 0 and falls back (postponed tip) when x_P > 0.
    """
    return -x_particular(cfg, t_cross)
