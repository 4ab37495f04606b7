"""Smoothed-system and saddle-node integration.

Monotone postponement of tipping with smoothing, the alpha-regime thresholds
and plateau values, the comparison principle against the saddle-node bound,
and cross-validation against the exact event-driven simulator at tiny alpha.
"""

import math

import numpy as np
import pytest

from tipfold import asym, exactsim
from tipfold.exactsim import NoTipWithinBudget
from tipfold.model import ConfigError, SystemConfig, SystemKind
from tipfold.smoothsim import (AlphaRegime, alpha_sweep, alpha_thresholds,
                               classify_alpha, integrate_smoothed,
                               integrate_snb)


def _smooth_cfg(**kw):
    base = dict(mu0=1.0, eps=0.1, A=0.0, omega=0.0, K=10.0, x0=0.0,
                alpha=1.0, kind=SystemKind.SMOOTHED_NSF)
    base.update(kw)
    return SystemConfig(**base)


def test_threshold_formulas_exact():
    for eps, K in [(0.1, 10.0), (0.1, 100.0), (0.01, 10.0)]:
        a0, a1 = alpha_thresholds(eps, K)
        assert abs(a0 - eps * (math.log(2 * K / eps) / 2.0) ** 3) < 1e-12
        assert abs(a1 - K ** 1.5 * eps ** -0.5) < 1e-12 * a1


def test_regime_classification_boundaries():
    a0, a1 = alpha_thresholds(0.1, 10.0)
    assert classify_alpha(0.99 * a0, 0.1, 10.0) is AlphaRegime.NONSMOOTH_LIKE
    assert classify_alpha(a0, 0.1, 10.0) is AlphaRegime.SNB_LIKE
    assert classify_alpha(0.99 * a1, 0.1, 10.0) is AlphaRegime.SNB_LIKE
    assert classify_alpha(a1, 0.1, 10.0) is AlphaRegime.THRESHOLD_LIMITED


def test_tiny_alpha_recovers_nonsmooth_drift_value():
    # alpha -> 0 limit equals the non-smooth slow-drift tipping value; at
    # eps = 0.1 that is the full three-term expansion, 0.051 below the
    # leading-order display -eps*log(2K/eps)/2
    res = integrate_smoothed(_smooth_cfg(alpha=1e-6))
    assert abs(res.mu_tp - asym.mu_eps(0.1, 10.0)) < 1e-3
    exact = exactsim.tipping_point(SystemConfig(mu0=1.0, eps=0.1, A=0.0,
                                                omega=0.0, K=10.0, x0=0.0))[1]
    assert abs(res.mu_tp - exact) < 1e-4


def test_huge_alpha_recovers_threshold_crossing():
    res = integrate_smoothed(_smooth_cfg(alpha=1e6))
    assert abs(res.mu_tp - (-math.sqrt(1.0 + 2.0 * 0.1 * 10.0))) < 1e-2


def test_lemma7_ordering():
    lead = -0.1 * math.log(2.0 * 10.0 / 0.1) / 2.0     # -0.26492
    lower = -math.sqrt(1.0 + 2.0 * 0.1 * 10.0)          # -1.73205
    for alpha in (1e-6, 1.0, 1e6):
        res = integrate_smoothed(_smooth_cfg(alpha=alpha))
        assert lower < res.mu_tp < lead


def test_smoothing_postpones_tipping_grid():
    alphas = list(np.geomspace(1e-4, 1e2, 10))
    for eps, A, w in [(0.1, 0.0, 0.0), (0.1, 1.0, 1.0), (0.05, 1.0, 5.0)]:
        base = SystemConfig(mu0=1.0, eps=eps, A=A, omega=w, K=10.0, x0=-0.5)
        results = alpha_sweep(base, alphas)
        t_tps = [r.t_tp for r in results]
        assert all(b > a for a, b in zip(t_tps, t_tps[1:]))
        mu_tps = [r.mu_tp for r in results]
        assert all(b < a for a, b in zip(mu_tps, mu_tps[1:]))


def test_integrator_tolerance_insensitivity():
    r1 = integrate_smoothed(_smooth_cfg(alpha=0.5), rtol=1e-10)
    r2 = integrate_smoothed(_smooth_cfg(alpha=0.5), rtol=5e-11)
    assert abs(r1.mu_tp - r2.mu_tp) < 1e-7


def test_comparison_principle_against_snb():
    # from x(0) = 0 the smoothed trajectory is bounded above by the
    # saddle-node solution with the same alpha
    alpha, eps = 5.0, 0.1
    ts = np.linspace(0.0, 20.0, 400)
    sm = integrate_smoothed(_smooth_cfg(alpha=alpha, K=100.0), t_max=25.0,
                            require_tip=False, sample_times=ts)
    sn = integrate_snb(alpha, eps, 0.0, 0.0, 100.0, 1.0, 0.0, t_max=25.0,
                       require_tip=False, sample_times=ts)
    n = min(len(sm.samples[0]), len(sn.samples[0]))
    assert np.all(sm.samples[1][:n] <= sn.samples[1][:n] + 1e-8)


def test_snb_tipping_matches_airy_scaling():
    res = integrate_snb(1.0, 0.1, 0.0, 0.0, 100.0, 1.0, 0.0)
    target = asym.snb_mu_tp(1.0, 0.1)
    assert abs(res.mu_tp - target) <= 0.1 * abs(target)


def test_snb_stable_root_without_drift():
    res = integrate_snb(1.0, 0.0, 0.0, 0.0, 100.0, 1.0, 0.0, t_max=50.0,
                        require_tip=False)
    assert not res.tipped
    assert res.x_end == pytest.approx(-1.0, abs=1e-6)


def test_snb_forced_sweep_configuration():
    # drifting forced saddle-node (alpha = 1) tips cleanly
    res = integrate_snb(1.0, 0.1, 1.0, 0.5, 10.0, 1.0, -1.0)
    assert res.tipped
    assert res.mu_tp < 1.0


def test_cross_solver_agreement_at_tiny_alpha():
    cfg_exact = SystemConfig(mu0=1.0, eps=0.1, A=1.0, omega=5.0, K=10.0,
                             x0=-0.5)
    mu_exact = exactsim.tipping_point(cfg_exact)[1]
    res = integrate_smoothed(_smooth_cfg(alpha=1e-8, A=1.0, omega=5.0,
                                         x0=-0.5))
    assert abs(mu_exact - res.mu_tp) < 1e-3


def test_alpha_plateaus():
    # each asymptotic alpha range reproduces its plateau formula within 15%
    # (the crossover around alpha0 itself is wide: alpha must sit well inside
    # the range, not at alpha0/10)
    eps, K = 0.1, 100.0
    a0, a1 = alpha_thresholds(eps, K)
    assert a0 == pytest.approx(5.489, abs=1e-3)
    cases = [
        (1e-3, -eps * math.log(2 * K / eps) / 2.0),
        (math.sqrt(a0 * a1), asym.snb_mu_tp(math.sqrt(a0 * a1), eps)),
        (10.0 * a1, -math.sqrt(1.0 + 2.0 * eps * K)),
    ]
    for alpha, target in cases:
        res = integrate_smoothed(_smooth_cfg(alpha=alpha, K=K))
        assert abs(res.mu_tp - target) <= 0.15 * abs(target)


def test_sharp_transition_survives_smoothing():
    # every smoothed curve keeps a sharp transition at small omega and the
    # curves order by alpha pointwise (smoothing postpones tipping)
    ws = np.arange(0.15, 0.46, 0.05)
    prev = None
    for alpha in (0.1, 0.5, 1.0):
        vals = []
        for w in ws:
            cfg = _smooth_cfg(alpha=alpha, A=1.0, omega=float(w), x0=-0.5)
            vals.append(integrate_smoothed(cfg).mu_tp)
        drops = -np.diff(vals)
        assert np.max(drops) > 0.5          # a genuine cliff in [0.15, 0.45]
        if prev is not None:
            assert np.all(np.array(vals) <= prev + 1e-9)
        prev = np.array(vals)


def test_requires_smoothed_kind_and_budget_errors():
    with pytest.raises(ConfigError):
        integrate_smoothed(SystemConfig(mu0=1.0, eps=0.1, A=0.0, omega=0.0,
                                        K=10.0, x0=0.0))
    with pytest.raises(NoTipWithinBudget):
        integrate_smoothed(_smooth_cfg(eps=0.0, alpha=1.0, mu0=1.0),
                           t_max=5.0)
    with pytest.raises(ConfigError):
        integrate_snb(0.0, 0.1, 0.0, 0.0, 10.0, 1.0, 0.0)
    with pytest.raises(ConfigError):
        alpha_sweep(SystemConfig(mu0=1.0, eps=0.1, A=0.0, omega=0.0, K=10.0,
                                 x0=0.0), [1.0, 0.5])


def test_result_thresholds_match_formula():
    res = integrate_smoothed(_smooth_cfg(alpha=1.0, K=100.0))
    a0, a1 = alpha_thresholds(0.1, 100.0)
    assert res.thresholds == (a0, a1)
    assert res.regime is classify_alpha(1.0, 0.1, 100.0)
