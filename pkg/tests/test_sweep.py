"""Sweep engine: transition detection, fold co-curves, surface extraction,
table generation and orbit snapshots."""

import math

import numpy as np
import pytest

from tipfold import asym, orbit
from tipfold.model import ConfigError, SystemConfig, SystemKind
from tipfold.sweep import (appendix_table, fig_orbit_snapshots, orbit_at,
                           surface, sweep_alpha, sweep_eps, sweep_omega,
                           tipping_value)

FIG1 = SystemConfig(mu0=1.0, eps=0.1, A=1.0, omega=1.0, K=10.0, x0=-0.5)


@pytest.fixture(scope="module")
def fig1_omega_sweep():
    return sweep_omega(FIG1, np.arange(0.05, 1.01, 0.05),
                       compute_folds=False, workers=1)


def test_sharp_transition_location(fig1_omega_sweep):
    trans = fig1_omega_sweep.transitions
    assert len(trans) >= 1
    main = max(trans, key=lambda t: t.drop)
    assert 0.30 <= main.location <= 0.35


def test_transition_drop_scales_with_period_slip(fig1_omega_sweep):
    main = max(fig1_omega_sweep.transitions, key=lambda t: t.drop)
    jump = 2.0 * math.pi * FIG1.eps / main.location
    assert jump / 3.0 <= main.drop <= 3.0 * jump


def test_transition_rule_holds(fig1_omega_sweep):
    diffs = np.abs(np.diff(fig1_omega_sweep.mu_tp))
    med = np.median(diffs)
    for t in fig1_omega_sweep.transitions:
        assert t.drop > 5.0 * med


def test_omega_zero_endpoint_matches_shifted_drift_law():
    base = SystemConfig(mu0=2.0, eps=0.1, A=1.0, omega=1.0, K=10.0, x0=-0.5)
    res = sweep_omega(base, [0.0, 0.5], compute_folds=True, workers=1)
    assert abs(res.mu_tp[0] - (1.0 + asym.mu_eps(0.1, 10.0))) < 3.0 * 0.1**2
    assert res.mu_g[0] == 1.0
    assert res.mu_cf[0] == 1.0


def test_large_omega_tail_converges_to_estimate():
    # the large-omega tipping estimate improves as eps decreases; at
    # eps = 0.01 it is good to 0.02 (at 0.025 the gap is ~0.03)
    for w in (8.0, 16.0):
        gaps = []
        for eps in (0.025, 0.01):
            cfg = SystemConfig(mu0=1.0, eps=eps, A=1.0, omega=w, K=10.0,
                               x0=-0.5)
            gaps.append(abs(tipping_value(cfg)
                            - asym.mu_tp_large_omega(1.0, w, eps)))
        assert gaps[1] < gaps[0]
        assert gaps[1] < 0.02


def test_sweep_reports_folds_and_bound(fig1_omega_sweep):
    res = sweep_omega(FIG1, [0.5, 1.0, 2.0, 5.0], compute_folds=True,
                      workers=1)
    for mu_tp, mu_cf, mu_g in zip(res.mu_tp, res.mu_cf, res.mu_g):
        assert mu_tp <= mu_cf + 1e-6
        assert mu_cf < mu_g


def test_eps_sweep_fig7():
    base = SystemConfig(mu0=1.0, eps=0.1, A=1.0, omega=0.5, K=10.0, x0=-0.5)
    res = sweep_eps(base, np.arange(0.10, 0.31, 0.02), mu0_scale=1.0,
                    x0_half=True, compute_folds=True, workers=1)
    assert len(res.transitions) >= 1
    main = max(res.transitions, key=lambda t: t.drop)
    assert 0.15 <= main.location <= 0.25
    # the eps -> 0 anchor is the fold value, broadcast along the grid
    assert res.mu_cf[0] == res.mu_cf[-1]
    assert abs(res.mu_cf[0] - 0.9412) < 2e-3


def test_eps_sweep_monotone_approach_to_fold():
    mu_g5 = orbit.grazing_mu(1.0, 5.0)
    base = SystemConfig(mu0=mu_g5, eps=0.1, A=1.0, omega=5.0, K=10.0,
                        x0=-mu_g5 / 2)
    res = sweep_eps(base, [0.005, 0.01, 0.02, 0.04], compute_folds=True,
                    workers=1)
    mu_cf = res.mu_cf[0]
    gaps = [mu_cf - v for v in res.mu_tp]
    assert all(g > 0.0 for g in gaps)
    assert all(b > a for a, b in zip(gaps, gaps[1:]))   # gap grows with eps
    assert not res.transitions                          # smooth branch


def test_lemma5_region_has_no_transitions():
    base = SystemConfig(mu0=0.1, eps=0.5, A=0.1, omega=1.0, K=10.0, x0=-0.05)
    grid = np.arange(0.4, 0.81, 0.05)
    assert all(asym.lemma5_smooth_surface(float(e), 0.1, 0.1, 1.0)
               for e in grid)
    res = sweep_eps(base, grid, compute_folds=False, workers=1)
    assert not res.transitions


def test_transition_count_grows_with_mu0():
    grid = np.arange(0.1, 1.55, 0.05)
    counts = []
    for m in (1.0, 1.5, 2.0):
        res = sweep_omega(FIG1, grid, mu0_scale=m, x0_half=True,
                          compute_folds=False, refine=False, workers=1)
        d = np.abs(np.diff(res.mu_tp))
        counts.append(int(np.sum(d > 0.2)))
    assert counts[0] <= counts[1] <= counts[2]
    assert counts[2] > counts[0]


def test_alpha_sweep_axis():
    base = SystemConfig(mu0=1.0, eps=0.1, A=0.0, omega=0.0, K=10.0, x0=0.0)
    res = sweep_alpha(base, [1e-3, 1e-2, 0.1, 1.0], workers=1)
    assert all(b < a for a, b in zip(res.mu_tp, res.mu_tp[1:]))
    with pytest.raises(ConfigError):
        sweep_alpha(base, [0.0, 1.0])


def test_surface_structure():
    surf = surface(FIG1, [0.05, 0.1, 0.3, 0.6], np.arange(0.1, 1.3, 0.1),
                   workers=1)
    assert len(surf.mu_tp_matrix) == 4
    assert len(surf.mu_tp_matrix[0]) == 12
    assert not surf.errors
    assert surf.t_curve
    assert surf.terminus == max(surf.t_curve, key=lambda p: p[0])
    # transition locations lie on the grid cells
    for e, w in surf.t_curve:
        assert e in surf.eps_grid
        assert surf.omega_grid[0] <= w <= surf.omega_grid[-1]


def test_surface_crossing_counts():
    # approaching the eps -> 0 fold limit the trajectory oscillates more;
    # on the fast-drift side it crosses at most once before tipping
    surf = surface(FIG1, [0.01, 0.05, 0.3], [0.3, 0.8, 1.2], workers=1)
    counts = np.array(surf.cross_up_counts)
    for j in range(counts.shape[1]):
        col = counts[:, j]
        assert all(b <= a for a, b in zip(col, col[1:]))   # fewer with eps
    assert counts[0, 2] >= 2      # small eps, moderate omega: several
    assert np.all(counts[2, :] <= 1)   # fast drift: at most one


def test_appendix_table_rows():
    rows = appendix_table([4.0, 2.0, 0.0], A=1.0, workers=1)
    by_w = {w: (mu_cf, mu_g) for w, mu_cf, mu_g in rows}
    assert abs(by_w[4.0][0] - 0.3037) <= 2e-3
    assert abs(by_w[4.0][1] - 0.4472) <= 5e-5
    assert abs(by_w[2.0][0] - 0.545) <= 2e-3
    assert abs(by_w[2.0][1] - 0.7071) <= 5e-5
    assert by_w[0.0] == (1.0, 1.0)


def test_orbit_snapshots_fig2():
    snaps = fig_orbit_snapshots(5.0, 1.0, [0.3714, 0.2471])
    graze, fold = snaps
    mu_g = orbit.grazing_mu(1.0, 5.0)
    assert min(graze.x) >= -2.0 * mu_g
    assert max(graze.x) <= 1e-10
    assert graze.mean_x == pytest.approx(-mu_g / 2.0, abs=1e-6)
    assert abs(fold.mean_x) < 0.02


def test_orbit_snapshot_small_omega_fraction():
    # at the rounded fold value 0.9902 the excursion occupies ~11% of the
    # period; just above the fold it shrinks under 10%
    s = fig_orbit_snapshots(0.2, 1.0, [0.9902])[0]
    frac = sum(1 for v in s.x if v > 0) / len(s.x)
    assert frac < 0.15
    s2 = fig_orbit_snapshots(0.2, 1.0, [0.9906])[0]
    frac2 = sum(1 for v in s2.x if v > 0) / len(s2.x)
    assert frac2 < 0.10


def test_orbit_at_rejects_above_grazing():
    with pytest.raises(ConfigError):
        orbit_at(0.5, 5.0, 1.0)


def test_tipping_value_dispatch():
    pwl = SystemConfig(mu0=1.0, eps=0.1, A=0.0, omega=0.0, K=10.0, x0=-0.5)
    sm = SystemConfig(mu0=1.0, eps=0.1, A=0.0, omega=0.0, K=10.0, x0=-0.5,
                      alpha=1e-6, kind=SystemKind.SMOOTHED_NSF)
    snb = SystemConfig(mu0=1.0, eps=0.1, A=0.0, omega=0.0, K=100.0, x0=0.0,
                       alpha=1.0, kind=SystemKind.SNB)
    assert abs(tipping_value(pwl) - tipping_value(sm)) < 1e-4
    assert abs(tipping_value(snb) - asym.snb_mu_tp(1.0, 0.1)) < 0.06


def test_grid_validation():
    with pytest.raises(ConfigError):
        sweep_omega(FIG1, [], workers=1)
    with pytest.raises(ConfigError):
        sweep_omega(FIG1, [0.5, 0.5], workers=1)
    with pytest.raises(ConfigError):
        sweep_eps(FIG1, [0.0, 0.1], workers=1)


def test_errors_recorded_not_raised():
    # a chattering near-fold point exceeds the event cap: it is recorded as
    # nan + error while the rest of the sweep completes
    base = SystemConfig(mu0=0.3, eps=1e-4, A=1.0, omega=5.0, K=10.0, x0=-0.15)
    res = sweep_eps(base, [5e-6, 0.05], compute_folds=False, refine=False,
                    workers=1)
    assert math.isnan(res.mu_tp[0])
    assert res.errors and res.errors[0][0] == 0
    assert not math.isnan(res.mu_tp[1])
    assert res.n_ok == 1
