"""Command-line frontend: scenario parsing, dispatch, CSV/JSON emission.

Subcommands: simulate, fold, sweep, surface, phase, estimate, orbit.
Scenario values come from an optional JSON config file with flag overrides;
mu0 accepts the symbolic forms "muG" / "m*muG" and x0 accepts "-mu0/2".
Every run writes a manifest JSON naming the emitted files.

Exit codes: 0 ok, 2 config error, 3 budget exhausted, 4 continuation
diverged, 5 sweep degradation (under 90% of points succeeded).
"""

from __future__ import annotations

import argparse
import json
import json.encoder
import math
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import __version__, asym, exactsim, orbit, smoothsim, sweep
from .model import ConfigError, SystemConfig, SystemKind

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_CONTINUATION = 4
EXIT_DEGRADED = 5

CSV_FMT = ".10g"
JSON_FMT = ".17g"


class _Float17Encoder(json.JSONEncoder):
    """JSON encoder emitting floats with 17 significant digits (round-trip)."""

    def iterencode(self, o, _one_shot=False):
        return json.encoder._make_iterencode(
            {}, self.default, json.encoder.encode_basestring_ascii,
            self.indent, lambda f: format(f, JSON_FMT),
            self.key_separator, self.item_separator,
            self.sort_keys, self.skipkeys, _one_shot=False)(o, 0)


def dump_json(obj, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, cls=_Float17Encoder, indent=2)
        fh.write("\n")


def write_csv(path: str, header: list[str], rows) -> None:
    def cell(v):
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return ""
        if isinstance(v, float):
            return format(v, CSV_FMT)
        return str(v)

    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\n")


def parse_grid(spec: str) -> list[float]:
    """Grid spec "start:stop:count" (linear) or "start:stop:countL" (log)."""
    log = spec.endswith(("L", "l"))
    body = spec[:-1] if log else spec
    parts = body.split(":")
    if len(parts) != 3:
        raise ConfigError(f"bad grid spec '{spec}' (want start:stop:count)")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad grid spec '{spec}': {exc}") from None
    if count < 1:
        raise ConfigError("grid count must be >= 1")
    if log:
        if start <= 0 or stop <= 0:
            raise ConfigError("log grid requires positive endpoints")
        return [float(v) for v in np.geomspace(start, stop, count)]
    return [float(v) for v in np.linspace(start, stop, count)]


def config_to_dict(cfg: SystemConfig) -> dict:
    d = asdict(cfg)
    d["kind"] = cfg.kind.value
    return d


def config_from_dict(d: dict) -> SystemConfig:
    d = dict(d)
    if "kind" in d:
        d["kind"] = SystemKind(d["kind"])
    return SystemConfig(**d)


def _resolve_mu0(spec, A: float, omega: float) -> tuple[float, float | None]:
    """mu0 literal, or symbolic "muG" / "m*muG"; returns (value, scale)."""
    if isinstance(spec, (int, float)):
        return float(spec), None
    text = str(spec).strip().replace(" ", "")
    low = text.lower()
    if low in ("mug", "mu_g"):
        return orbit.grazing_mu(A, omega), 1.0
    if low.endswith(("*mug", "*mu_g")):
        try:
            m = float(low.split("*")[0])
        except ValueError:
            raise ConfigError(f"bad mu0 spec '{spec}'") from None
        return m * orbit.grazing_mu(A, omega), m
    try:
        return float(text), None
    except ValueError:
        raise ConfigError(f"bad mu0 spec '{spec}'") from None


def build_config(args) -> tuple[SystemConfig, float | None, bool]:
    """SystemConfig from config file + flag overrides.

    Returns (config, mu0_scale, x0_half): the symbolic annotations survive so
    sweeps can re-resolve mu0 per grid point.
    """
    base: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            base.update(json.load(fh))
    for key in ("eps", "A", "omega", "phase", "alpha", "K", "kind"):
        v = getattr(args, key, None)
        if v is not None:
            base[key] = v
    mu0_spec = getattr(args, "mu0", None)
    if mu0_spec is not None:
        base["mu0"] = mu0_spec
    x0_spec = getattr(args, "x0", None)
    if x0_spec is not None:
        base["x0"] = x0_spec

    A = float(base.get("A", 1.0))
    omega = float(base.get("omega", 1.0))
    mu0, scale = _resolve_mu0(base.get("mu0", 1.0), A, omega)
    x0_half = False
    x0_raw = base.get("x0", -0.5)
    if isinstance(x0_raw, str) and x0_raw.strip().replace(" ", "").lower() in ("-mu0/2", "-0.5*mu0"):
        x0 = -mu0 / 2.0
        x0_half = True
    else:
        x0 = float(x0_raw)

    kind = base.get("kind", "nonsmooth_pwl")
    if isinstance(kind, str):
        kind = SystemKind(kind)
    cfg = SystemConfig(mu0=mu0, eps=float(base.get("eps", 0.1)), A=A,
                       omega=omega, phase=float(base.get("phase", 0.0)),
                       alpha=float(base.get("alpha", 0.0)),
                       K=float(base.get("K", 10.0)), x0=x0, kind=kind)
    return cfg, scale, x0_half


def write_manifest(outdir: str, command: str, configs, outputs: list[str],
                   t_start: float) -> str:
    path = os.path.join(outdir, f"{command}_manifest.json")
    dump_json({
        "command": command,
        "version": __version__,
        "configs": configs,
        "outputs": [os.path.basename(p) for p in outputs],
        "wall_time_s": time.perf_counter() - t_start,
    }, path)
    return path


def _event_by_time(traj):
    return {e.t: e.kind.value for e in traj.events}


def cmd_simulate(args, outdir: str) -> int:
    t_start = time.perf_counter()
    cfg, _, _ = build_config(args)
    t_max = args.tmax

    if cfg.kind is SystemKind.NONSMOOTH_PWL:
        try:
            traj = exactsim.simulate(cfg, t_max, max_events=args.max_events)
        except exactsim.MaxEventsExceeded as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        if not traj.tipped and cfg.eps > 0.0 and t_max is None:
            print("error: no tip within the default time budget", file=sys.stderr)
            return EXIT_BUDGET
        t_end = traj.t_tp if traj.tipped else (t_max or exactsim.default_t_max(cfg))
        ts = sorted(set(np.linspace(0.0, t_end, args.samples))
                    | {e.t for e in traj.events})
        ev = _event_by_time(traj)
        rows = []
        for t in ts:
            x = traj.value(t)
            region = "+" if x > 0 else ("-" if x < 0 else "0")
            rows.append((t, x, cfg.mu(t), region, ev.get(t, "")))
        summary = {
            "tipped": traj.tipped, "t_tp": traj.t_tp, "mu_tp": traj.mu_tp,
            "events": [{"t": e.t, "x": e.x, "kind": e.kind.value}
                       for e in traj.events],
        }
    else:
        t_eval = np.linspace(0.0, t_max or exactsim.default_t_max(cfg), args.samples)
        try:
            if cfg.kind is SystemKind.SMOOTHED_NSF:
                res = smoothsim.integrate_smoothed(cfg, t_max, require_tip=False,
                                                   sample_times=t_eval)
            else:
                res = smoothsim.integrate_snb(cfg.alpha, cfg.eps, cfg.A,
                                              cfg.omega, cfg.K, cfg.mu0, cfg.x0,
                                              t_max, phase=cfg.phase,
                                              require_tip=False,
                                              sample_times=t_eval)
        except smoothsim.StepFloorReached as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        if not res.tipped and cfg.eps > 0.0 and t_max is None:
            print("error: no tip within the default time budget", file=sys.stderr)
            return EXIT_BUDGET
        ts, xs = res.samples
        rows = [(float(t), float(x), cfg.mu(float(t)),
                 "+" if x > 0 else ("-" if x < 0 else "0"), "")
                for t, x in zip(ts, xs)]
        if res.tipped:
            rows.append((res.t_tp, cfg.K, cfg.mu(res.t_tp), "+", "tip"))
        summary = {"tipped": res.tipped, "t_tp": res.t_tp, "mu_tp": res.mu_tp,
                   "events": ([{"t": res.t_tp, "x": cfg.K, "kind": "tip"}]
                              if res.tipped else [])}

    csv_path = os.path.join(outdir, "simulate.csv")
    write_csv(csv_path, ["t", "x", "mu", "region", "event_kind"], rows)
    summary["config"] = config_to_dict(cfg)
    json_path = os.path.join(outdir, "simulate_summary.json")
    dump_json(summary, json_path)
    write_manifest(outdir, "simulate", [config_to_dict(cfg)],
                   [csv_path, json_path], t_start)
    if summary["tipped"]:
        print(f"tipped at t={summary['t_tp']:.10g}, mu_tp={summary['mu_tp']:.10g}")
    else:
        print("no tip within budget")
    return EXIT_OK


def cmd_fold(args, outdir: str) -> int:
    t_start = time.perf_counter()
    A = args.A if args.A is not None else 1.0
    header = ["omega", "mu_cf", "mu_g", "mu_cf_large_est", "mu_cf_small_est"]

    def row(w: float, mu_cf):
        large = asym.mu_cf_large_omega(A, w) if w > 0 else None
        return (w, mu_cf, orbit.grazing_mu(A, w), large,
                asym.mu_cf_small_omega(A, w))

    if args.table:
        table = sweep.appendix_table(A=A, workers=args.workers)
        rows = [row(w, mu_cf) for (w, mu_cf, _) in table]
        if any(r[1] is None for r in rows):
            print("error: continuation diverged on some rows", file=sys.stderr)
            return EXIT_CONTINUATION
    else:
        if args.omega is None:
            print("error: need --omega or --table", file=sys.stderr)
            return EXIT_CONFIG
        br = orbit.continue_to_fold(args.omega, A)
        if br.mu_cf is None:
            print("error: continuation diverged", file=sys.stderr)
            return EXIT_CONTINUATION
        rows = [row(args.omega, br.mu_cf)]

    csv_path = os.path.join(outdir, "fold.csv")
    write_csv(csv_path, header, rows)
    write_manifest(outdir, "fold", [{"A": A}], [csv_path], t_start)
    for r in rows:
        print(f"omega={r[0]:g}: mu_cf={r[1]:.6f} mu_g={r[2]:.6f}")
    return EXIT_OK


def cmd_sweep(args, outdir: str) -> int:
    t_start = time.perf_counter()
    cfg, scale, x0_half = build_config(args)
    grid = parse_grid(args.grid)
    folds = not args.no_folds

    if args.axis == "omega":
        res = sweep.sweep_omega(cfg, grid, mu0_scale=scale, x0_half=x0_half,
                                compute_folds=folds, workers=args.workers)
    elif args.axis == "eps":
        res = sweep.sweep_eps(cfg, grid, mu0_scale=scale, x0_half=x0_half,
                              compute_folds=folds, workers=args.workers)
    else:
        res = sweep.sweep_alpha(cfg, grid, workers=args.workers)

    header = [res.axis.value, "mu_tp", "t_tp", "mu_cf", "mu_g",
              "mu_cf_large_est", "mu_cf_small_est", "mu_tp_large_est"]
    rows = []
    for i, g in enumerate(res.grid):
        w = g if res.axis is sweep.SweepAxis.OMEGA else cfg.omega
        eps = g if res.axis is sweep.SweepAxis.EPS else cfg.eps
        mu0_i = scale * orbit.grazing_mu(cfg.A, w) if scale is not None else cfg.mu0
        mu_tp_i = res.mu_tp[i]
        t_tp_i = ((mu0_i - mu_tp_i) / eps
                  if eps > 0 and not math.isnan(mu_tp_i) else None)
        rows.append((
            g,
            mu_tp_i,
            t_tp_i,
            res.mu_cf[i] if res.mu_cf else None,
            res.mu_g[i] if res.mu_g else None,
            asym.mu_cf_large_omega(cfg.A, w) if w > 0 else None,
            asym.mu_cf_small_omega(cfg.A, w),
            asym.mu_tp_large_omega(cfg.A, w, eps) if w > 0 else None,
        ))
    csv_path = os.path.join(outdir, "sweep.csv")
    write_csv(csv_path, header, rows)

    side_path = os.path.join(outdir, "sweep_transitions.json")
    dump_json({
        "axis": res.axis.value,
        "transitions": [{"location": t.location, "drop": t.drop,
                         "index": t.index} for t in res.transitions],
        "errors": [{"index": i, "message": m} for i, m in res.errors],
    }, side_path)
    write_manifest(outdir, "sweep", [config_to_dict(cfg)],
                   [csv_path, side_path], t_start)

    frac = res.n_ok / len(res.grid)
    print(f"{res.n_ok}/{len(res.grid)} points ok; "
          f"{len(res.transitions)} transition(s)")
    return EXIT_OK if frac >= 0.9 else EXIT_DEGRADED


def cmd_surface(args, outdir: str) -> int:
    t_start = time.perf_counter()
    cfg, scale, x0_half = build_config(args)
    eps_grid = parse_grid(args.eps_grid)
    omega_grid = parse_grid(args.omega_grid)
    surf = sweep.surface(cfg, eps_grid, omega_grid,
                         mu0_scale=scale if scale is not None else 1.0,
                         x0_half=True if scale is not None else x0_half,
                         workers=args.workers)
    rows = []
    for i, e in enumerate(surf.eps_grid):
        for j, w in enumerate(surf.omega_grid):
            rows.append((e, w, surf.mu_tp_matrix[i][j],
                         surf.cross_up_counts[i][j]))
    csv_path = os.path.join(outdir, "surface.csv")
    write_csv(csv_path, ["eps", "omega", "mu_tp", "cross_up_count"], rows)
    json_path = os.path.join(outdir, "surface_tcurve.json")
    dump_json({
        "t_curve": [{"eps": e, "omega": w} for e, w in surf.t_curve],
        "terminus": ({"eps": surf.terminus[0], "omega": surf.terminus[1]}
                     if surf.terminus else None),
        "errors": [{"i": i, "j": j, "message": m} for i, j, m in surf.errors],
    }, json_path)
    write_manifest(outdir, "surface", [config_to_dict(cfg)],
                   [csv_path, json_path], t_start)
    n_cells = len(surf.eps_grid) * len(surf.omega_grid)
    n_bad = len(surf.errors)
    print(f"{n_cells - n_bad}/{n_cells} cells ok; "
          f"{len(surf.t_curve)} transition row(s)")
    return EXIT_OK if n_bad <= 0.1 * n_cells else EXIT_DEGRADED


def cmd_phase(args, outdir: str) -> int:
    t_start = time.perf_counter()
    cfg, scale, _ = build_config(args)
    mu0_fn = (lambda w: scale * orbit.grazing_mu(cfg.A, w)) if scale else None
    try:
        asym.n_max(cfg.omega, cfg.eps, cfg.A, cfg.K,
                   mu0_fn if mu0_fn is not None else cfg.mu0)
        pa = asym.phase_roots(cfg, mu0_fn=mu0_fn)
    except asym.DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    json_path = os.path.join(outdir, "phase.json")
    dump_json({
        "Omega": pa.Omega,
        "roots": [{"mu_r": r.mu_r, "derivative_sign": r.derivative_sign,
                   "slope": r.slope} for r in pa.roots],
        "omega_star": pa.omega_star,
        "n_max": pa.n_max,
        "bounds": {"lower": pa.bounds[0], "upper": pa.bounds[1]},
        "jump_scale": pa.jump_scale,
        "config": config_to_dict(cfg),
    }, json_path)
    write_manifest(outdir, "phase", [config_to_dict(cfg)], [json_path], t_start)
    print(f"{len(pa.roots)} root(s); n_max={pa.n_max}; "
          f"omega_star={pa.omega_star}")
    return EXIT_OK


def cmd_estimate(args, outdir: str) -> int:
    t_start = time.perf_counter()
    cfg, _, _ = build_config(args)
    est = asym.estimate_set(cfg)
    json_path = os.path.join(outdir, "estimate.json")
    dump_json({
        "mu_eps": est.mu_eps, "mu_g": est.mu_g,
        "mu_cf_large": est.mu_cf_large, "mu_cf_small": est.mu_cf_small,
        "mu_tp_large_omega": est.mu_tp_large_omega,
        "snb_mu_tp": est.snb_mu_tp, "constants": est.constants,
        "config": config_to_dict(cfg),
    }, json_path)
    write_manifest(outdir, "estimate", [config_to_dict(cfg)], [json_path],
                   t_start)
    print(f"mu_g={est.mu_g:.6f} mu_cf_small={est.mu_cf_small:.6f}")
    return EXIT_OK


def cmd_orbit(args, outdir: str) -> int:
    t_start = time.perf_counter()
    A = args.A if args.A is not None else 1.0
    if args.omega is None or args.omega <= 0:
        print("error: orbit requires --omega > 0", file=sys.stderr)
        return EXIT_CONFIG
    mus = [float(s) for s in args.mus.split(",")]
    try:
        snaps = sweep.fig_orbit_snapshots(args.omega, A, mus, n=args.samples)
    except (orbit.NewtonDiverged, orbit.UnphysicalOrbit) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTINUATION
    rows = []
    for s in snaps:
        for t, x in zip(s.t, s.x):
            rows.append((s.mu, t, x))
    csv_path = os.path.join(outdir, "orbit.csv")
    write_csv(csv_path, ["mu", "t", "x"], rows)
    json_path = os.path.join(outdir, "orbit_means.json")
    dump_json({"omega": args.omega, "A": A,
               "means": [{"mu": s.mu, "mean_x": s.mean_x} for s in snaps]},
              json_path)
    write_manifest(outdir, "orbit", [{"omega": args.omega, "A": A, "mus": mus}],
                   [csv_path, json_path], t_start)
    for s in snaps:
        print(f"mu={s.mu:g}: mean_x={s.mean_x:.6f}")
    return EXIT_OK


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file (flags override)")
    p.add_argument("--mu0", help="initial control value, or 'muG' / 'm*muG'")
    p.add_argument("--x0", help="initial state, or '-mu0/2'")
    p.add_argument("--eps", type=float, help="drift rate")
    p.add_argument("--A", type=float, help="forcing amplitude")
    p.add_argument("--omega", type=float, help="forcing frequency")
    p.add_argument("--phase", type=float, help="forcing phase offset")
    p.add_argument("--alpha", type=float, help="smoothing parameter")
    p.add_argument("--K", type=float, help="tipping threshold")
    p.add_argument("--kind", choices=[k.value for k in SystemKind],
                   help="system kind")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tipfold",
        description="Tipping points, grazing points and cyclic folds of the "
                    "piecewise-linear non-smooth system 2|x| - mu(t) + f(t).")
    ap.add_argument("--outdir", "-o", default=".", help="output directory")
    ap.add_argument("--workers", type=int, default=None,
                    help="sweep parallelism (default: TIPFOLD_THREADS or cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one trajectory with events")
    _add_scenario_flags(p)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--max-events", type=int, default=exactsim.DEFAULT_MAX_EVENTS)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("fold", help="cyclic fold via continuation")
    p.add_argument("--omega", type=float)
    p.add_argument("--A", type=float)
    p.add_argument("--table", action="store_true",
                   help="emit the full reference table")
    p.set_defaults(fn=cmd_fold)

    p = sub.add_parser("sweep", help="mu_TP along a parameter grid")
    _add_scenario_flags(p)
    p.add_argument("--axis", choices=["omega", "eps", "alpha"], required=True)
    p.add_argument("--grid", required=True,
                   help="start:stop:count (linear) or start:stop:countL (log)")
    p.add_argument("--no-folds", action="store_true",
                   help="skip co-computing mu_cf/mu_g")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("surface", help="mu_TP over the (eps, omega) plane")
    _add_scenario_flags(p)
    p.add_argument("--eps-grid", required=True)
    p.add_argument("--omega-grid", required=True)
    p.set_defaults(fn=cmd_surface)

    p = sub.add_parser("phase", help="root structure of g_NS")
    _add_scenario_flags(p)
    p.set_defaults(fn=cmd_phase)

    p = sub.add_parser("estimate", help="closed-form estimate set")
    _add_scenario_flags(p)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("orbit", help="periodic-orbit snapshots")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--A", type=float)
    p.add_argument("--mus", required=True, help="comma-separated mu values")
    p.add_argument("--samples", type=int, default=1024)
    p.set_defaults(fn=cmd_orbit)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    os.makedirs(args.outdir, exist_ok=True)
    try:
        return args.fn(args, args.outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except exactsim.NoTipWithinBudget as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
