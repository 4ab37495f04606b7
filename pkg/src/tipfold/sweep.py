"""Parameter sweeps: tipping curves, fold tables, surfaces, transition detection.

A sweep evaluates mu_TP point by point (exact simulator for alpha = 0, adaptive
integrator otherwise), optionally co-computing the fold mu_CF and grazing mu_G
curves.  Sharp transitions are flagged with a median-based outlier rule on
first differences and refined by interval bisection so the reported location
is grid-independent to ~1/8 of a cell.

mu0 may be literal or the symbolic family mu0 = m*mu_G(omega) used by the
surface scenarios (with x0 = -mu0/2).
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import asym, exactsim, orbit, smoothsim
from .model import ConfigError, SystemConfig, SystemKind

TRANSITION_FACTOR = 5.0      # |diff| > factor * median(|diff|) flags a cell
REFINE_ROUNDS = 3


class SweepAxis(enum.Enum):
    OMEGA = "omega"
    EPS = "eps"
    ALPHA = "alpha"


@dataclass(frozen=True)
class Transition:
    location: float
    drop: float
    index: int           # left grid index of the flagged cell


@dataclass(frozen=True)
class SweepResult:
    axis: SweepAxis
    grid: tuple[float, ...]
    mu_tp: tuple[float, ...]                 # nan where the point failed
    mu_cf: tuple[float, ...] | None
    mu_g: tuple[float, ...] | None
    transitions: tuple[Transition, ...]
    errors: tuple[tuple[int, str], ...]

    @property
    def n_ok(self) -> int:
        return sum(1 for v in self.mu_tp if not math.isnan(v))


@dataclass(frozen=True)
class Surface:
    eps_grid: tuple[float, ...]
    omega_grid: tuple[float, ...]
    mu_tp_matrix: tuple[tuple[float, ...], ...]   # rows: eps, cols: omega
    t_curve: tuple[tuple[float, float], ...]       # (eps_T, omega_T) polyline
    terminus: tuple[float, float] | None
    cross_up_counts: tuple[tuple[int, ...], ...]
    errors: tuple[tuple[int, int, str], ...]


def tipping_value(cfg: SystemConfig, t_max: float | None = None) -> float:
    """mu_TP for one config, dispatched on system kind."""
    if cfg.kind is SystemKind.NONSMOOTH_PWL:
        return exactsim.tipping_point(cfg)[1]
    if cfg.kind is SystemKind.SMOOTHED_NSF:
        return smoothsim.integrate_smoothed(cfg, t_max).mu_tp
    return smoothsim.integrate_snb(cfg.alpha, cfg.eps, cfg.A, cfg.omega, cfg.K,
                                   cfg.mu0, cfg.x0, t_max, phase=cfg.phase).mu_tp


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("TIPFOLD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _map_points(fn, items, workers):
    n = _workers(workers)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _resolve_scenario(base: SystemConfig, omega: float,
                      mu0_scale: float | None, x0_half: bool) -> SystemConfig:
    """Config at the given omega, resolving mu0 = m*mu_G(omega), x0 = -mu0/2."""
    mu0 = base.mu0 if mu0_scale is None else mu0_scale * orbit.grazing_mu(base.A, omega)
    x0 = -mu0 / 2.0 if x0_half else base.x0
    return replace(base, omega=omega, mu0=mu0, x0=x0)


def _detect_transitions(grid, values, evaluator=None,
                        refine_rounds: int = REFINE_ROUNDS):
    """Flag cells whose |first difference| exceeds the median-based rule.

    With an ``evaluator`` the flagged cell is bisected ``refine_rounds`` times
    (keeping the half with the larger drop), pinning the location to ~cell/8.
    """
    vals = np.asarray(values, dtype=float)
    diffs = np.diff(vals)
    finite = np.abs(diffs[np.isfinite(diffs)])
    if finite.size == 0:
        return ()
    med = max(float(np.median(finite)), 1e-12)
    out = []
    for i, d in enumerate(diffs):
        if not np.isfinite(d) or abs(d) <= TRANSITION_FACTOR * med:
            continue
        lo, hi = float(grid[i]), float(grid[i + 1])
        v_lo, v_hi = float(vals[i]), float(vals[i + 1])
        if evaluator is not None:
            for _ in range(refine_rounds):
                mid = 0.5 * (lo + hi)
                try:
                    v_mid = evaluator(mid)
                except Exception:
                    break
                if abs(v_mid - v_lo) >= abs(v_hi - v_mid):
                    hi, v_hi = mid, v_mid
                else:
                    lo, v_lo = mid, v_mid
        out.append(Transition(location=0.5 * (lo + hi), drop=abs(d), index=i))
    return tuple(out)


def sweep_omega(base_cfg: SystemConfig, omega_grid, *,
                mu0_scale: float | None = None, x0_half: bool = False,
                compute_folds: bool = True, refine: bool = True,
                workers: int | None = None) -> SweepResult:
    """mu_TP across a frequency grid, with co-computed mu_CF / mu_G curves."""
    grid = [float(w) for w in omega_grid]
    if not grid:
        raise ConfigError("omega grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("grid must be strictly increasing")

    def eval_mu_tp(w: float) -> float:
        return tipping_value(_resolve_scenario(base_cfg, w, mu0_scale, x0_half))

    def safe(w: float):
        try:
            return eval_mu_tp(w), None
        except Exception as exc:
            return math.nan, f"omega={w:g}: {exc}"

    pairs = _map_points(safe, grid, workers)
    mu_tp = [p[0] for p in pairs]
    errors = tuple((i, p[1]) for i, p in enumerate(pairs) if p[1] is not None)

    mu_cf = mu_g = None
    if compute_folds:
        mu_g = tuple(orbit.grazing_mu(base_cfg.A, w) for w in grid)
        def fold(w: float) -> float:
            br = orbit.continue_to_fold(w, base_cfg.A)
            return br.mu_cf if br.mu_cf is not None else math.nan
        mu_cf = tuple(_map_points(fold, grid, workers))

    transitions = _detect_transitions(grid, mu_tp,
                                      eval_mu_tp if refine else None)
    return SweepResult(axis=SweepAxis.OMEGA, grid=tuple(grid),
                       mu_tp=tuple(mu_tp), mu_cf=mu_cf, mu_g=mu_g,
                       transitions=transitions, errors=errors)


def sweep_eps(base_cfg: SystemConfig, eps_grid, *,
              mu0_scale: float | None = None, x0_half: bool = False,
              compute_folds: bool = True, refine: bool = True,
              workers: int | None = None) -> SweepResult:
    """mu_TP across a drift-rate grid at fixed omega, plus the eps -> 0 fold
    anchor mu_CF(omega) broadcast along the grid."""
    grid = [float(e) for e in eps_grid]
    if not grid or any(e <= 0.0 for e in grid):
        raise ConfigError("eps grid must be nonempty and positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("grid must be strictly increasing")

    scenario = _resolve_scenario(base_cfg, base_cfg.omega, mu0_scale, x0_half)

    def eval_mu_tp(e: float) -> float:
        return tipping_value(replace(scenario, eps=e))

    def safe(e: float):
        try:
            return eval_mu_tp(e), None
        except Exception as exc:
            return math.nan, f"eps={e:g}: {exc}"

    pairs = _map_points(safe, grid, workers)
    mu_tp = [p[0] for p in pairs]
    errors = tuple((i, p[1]) for i, p in enumerate(pairs) if p[1] is not None)

    mu_cf = mu_g = None
    if compute_folds:
        br = orbit.continue_to_fold(base_cfg.omega, base_cfg.A)
        anchor = br.mu_cf if br.mu_cf is not None else math.nan
        mu_cf = tuple(anchor for _ in grid)
        mu_g = tuple(orbit.grazing_mu(base_cfg.A, base_cfg.omega) for _ in grid)

    transitions = _detect_transitions(grid, mu_tp,
                                      eval_mu_tp if refine else None)
    return SweepResult(axis=SweepAxis.EPS, grid=tuple(grid), mu_tp=tuple(mu_tp),
                       mu_cf=mu_cf, mu_g=mu_g, transitions=transitions,
                       errors=errors)


def sweep_alpha(base_cfg: SystemConfig, alpha_grid, *,
                refine: bool = True, workers: int | None = None) -> SweepResult:
    """mu_TP across a smoothing grid (alpha > 0 throughout)."""
    grid = [float(a) for a in alpha_grid]
    if not grid or any(a <= 0.0 for a in grid):
        raise ConfigError("alpha grid must be nonempty and positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("grid must be strictly increasing")

    def eval_mu_tp(a: float) -> float:
        return tipping_value(replace(base_cfg, alpha=a,
                                     kind=SystemKind.SMOOTHED_NSF))

    def safe(a: float):
        try:
            return eval_mu_tp(a), None
        except Exception as exc:
            return math.nan, f"alpha={a:g}: {exc}"

    pairs = _map_points(safe, grid, workers)
    mu_tp = [p[0] for p in pairs]
    errors = tuple((i, p[1]) for i, p in enumerate(pairs) if p[1] is not None)
    transitions = _detect_transitions(grid, mu_tp,
                                      eval_mu_tp if refine else None)
    return SweepResult(axis=SweepAxis.ALPHA, grid=tuple(grid),
                       mu_tp=tuple(mu_tp), mu_cf=None, mu_g=None,
                       transitions=transitions, errors=errors)


def surface(base_cfg: SystemConfig, eps_grid, omega_grid, *,
            mu0_scale: float | None = 1.0, x0_half: bool = True,
            workers: int | None = None) -> Surface:
    """mu_TP over the (eps, omega) plane plus the transition curve.

    Default scenario follows the drifting-grazing setup: mu0 = mu_G(omega),
    x0 = -mu0/2 per column.  The transition curve collects, per eps row, the
    maximal-gradient flagged cell; its terminus is the highest-eps row still
    carrying a transition.
    """
    eg = [float(e) for e in eps_grid]
    wg = [float(w) for w in omega_grid]
    if not eg or not wg:
        raise ConfigError("surface grids must be nonempty")

    def cell(args):
        e, w = args
        cfg = replace(_resolve_scenario(base_cfg, w, mu0_scale, x0_half), eps=e)
        try:
            if cfg.kind is SystemKind.NONSMOOTH_PWL:
                traj = exactsim.simulate(cfg)
                if not traj.tipped:
                    raise exactsim.NoTipWithinBudget("no tip in budget")
                return traj.mu_tp, traj.cross_up_count(), None
            return tipping_value(cfg), -1, None
        except Exception as exc:
            return math.nan, -1, str(exc)

    rows = []
    counts = []
    errors = []
    for i, e in enumerate(eg):
        results = _map_points(cell, [(e, w) for w in wg], workers)
        rows.append(tuple(r[0] for r in results))
        counts.append(tuple(r[1] for r in results))
        for j, r in enumerate(results):
            if r[2] is not None:
                errors.append((i, j, r[2]))

    t_curve = []
    for i, e in enumerate(eg):
        trans = _detect_transitions(wg, rows[i], None)
        if trans:
            biggest = max(trans, key=lambda tr: tr.drop)
            t_curve.append((e, biggest.location))
    terminus = max(t_curve, key=lambda p: p[0]) if t_curve else None

    return Surface(eps_grid=tuple(eg), omega_grid=tuple(wg),
                   mu_tp_matrix=tuple(rows), t_curve=tuple(t_curve),
                   terminus=terminus, cross_up_counts=tuple(counts),
                   errors=tuple(errors))


#: Frequencies of the reference fold table (A = 1).
APPENDIX_OMEGAS = (20.0, 15.0, 10.0, 8.0, 5.0, 4.0, 3.0, 2.5, 2.0, 1.9, 1.8,
                   1.7, 1.6, 1.5, 1.4, 1.2, 1.0, 0.8, 0.5, 0.3, 0.2, 0.1, 0.0)


def appendix_table(omega_rows=None, A: float = 1.0, *,
                   workers: int | None = None):
    """(omega, mu_CF, mu_G) rows via continuation + grazing formula.

    Failed continuations yield mu_CF = None for that row.
    """
    rows = list(APPENDIX_OMEGAS if omega_rows is None else omega_rows)

    def one(w: float):
        mu_g = orbit.grazing_mu(A, w)
        try:
            br = orbit.continue_to_fold(w, A)
            return (w, br.mu_cf, mu_g)
        except Exception:
            return (w, None, mu_g)

    return _map_points(one, rows, workers)


@dataclass(frozen=True)
class OrbitSnapshot:
    mu: float
    t: tuple[float, ...]
    x: tuple[float, ...]
    mean_x: float


def orbit_at(mu: float, omega: float, A: float) -> orbit.PeriodicOrbit:
    """Orbit at a requested mu in [mu_CF, mu_G], seeded by a short march from
    the grazing point.  Requests within 1e-3 above mu_G (rounded table values)
    snap to the grazing orbit."""
    mu_g = orbit.grazing_mu(A, omega)
    if mu > mu_g + 1e-3:
        raise ConfigError(f"mu={mu:g} exceeds grazing value {mu_g:g}")
    if mu >= mu_g - 1e-12:
        return orbit.grazing_orbit(A, omega)
    boot = orbit._bootstrap_branch(omega, A, span=max(mu_g - mu, 1e-6))
    if not boot:
        raise orbit.NewtonDiverged("could not leave the grazing corner")
    current = boot[0]
    for p in boot:
        if p.mu < mu:
            break
        current = p
    for target in np.linspace(current.mu, mu, 13)[1:]:
        try:
            nxt = orbit.solve_orbit(float(target), omega, A, current)
        except (orbit.NewtonDiverged, orbit.UnphysicalOrbit):
            # Requests at/below the fold (e.g. rounded mu_CF values) snap to
            # the deepest orbit reachable within 1e-3.
            if abs(mu - current.mu) <= 1e-3:
                return current
            raise
        current = nxt
    return current


def fig_orbit_snapshots(omega: float, A: float, mus, n: int = 1024):
    """Period samples of the orbit at each requested mu, for plotting."""
    out = []
    for mu in mus:
        orb = orbit_at(float(mu), omega, A)
        th = np.linspace(orb.a, orb.a + 2.0 * math.pi, n)
        xs = [orbit.orbit_value(orb, float(t)) for t in th]
        out.append(OrbitSnapshot(mu=float(mu), t=tuple(float(t) / omega for t in th),
                                 x=tuple(xs), mean_x=orb.mean_x))
    return out
