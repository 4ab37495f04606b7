"""Periodic-orbit algebra for the forced system without drift.

A crossing periodic orbit of dx/dt = 2|x| - mu + A*cos(omega*t) spends the
phase interval (a, b) of one forcing period in x > 0 and the rest in x < 0.
Writing the exact branch solutions

    x+(th/omega) = +mu/2 + C+ * exp(2*(th - a)/omega) + q+(th)
    x-(th/omega) = -mu/2 + C- * exp(-2*(th - b)/omega) + q-(th)

the four zero conditions x+(a) = x+(b) = x-(b) = x-(a + 2*pi) = 0 pin the
unknowns (a, b, C+, C-).  This module solves that 4x4 transcendental system
with a damped Newton iteration (analytic Jacobian), continues the orbit family
in mu from the grazing point mu_G down to the cyclic fold mu_CF, and provides
the closed-form period average.

The period is locked to the forcing (one period per cycle); sub-harmonic
responses are out of scope.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import q_minus, q_plus

NEWTON_TOL = 1e-11
NEWTON_MAX_ITER = 50
NEWTON_MAX_HALVINGS = 8
STEP_FLOOR = 1e-8
MIN_EXCURSION = 1e-10      # b - a below this is the degenerate grazing family
PHYS_GRID = 512
PHYS_TOL = 1e-9


class NewtonDiverged(RuntimeError):
    """Newton iteration failed to converge (cap hit or step exploded)."""


class UnphysicalOrbit(RuntimeError):
    """Converged root violates the sign conditions x+ > 0 / x- < 0."""


class Termination(enum.Enum):
    FOLD_DETECTED = "fold_detected"
    STEP_FLOOR = "step_floor"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class PeriodicOrbit:
    mu: float
    omega: float
    A: float
    a: float
    b: float
    c_plus: float
    c_minus: float
    residual: float
    mean_x: float

    @property
    def grazing(self) -> bool:
        return self.b - self.a < MIN_EXCURSION


@dataclass(frozen=True)
class ContinuationBranch:
    omega: float
    A: float
    points: tuple[PeriodicOrbit, ...]
    mu_cf: float | None
    fold_orbit: PeriodicOrbit | None
    termination: Termination


def grazing_mu(A: float, omega: float) -> float:
    """Grazing value mu_G = A / sqrt(1 + omega^2/4)."""
    if A < 0:
        raise ValueError("A must be >= 0")
    return A / math.sqrt(1.0 + omega**2 / 4.0)


def grazing_phase(omega: float) -> float:
    """Phase of the tangential touch: tan(phi) = omega/2, phi in [0, pi/2)."""
    return math.atan2(omega, 2.0)


def grazing_orbit(A: float, omega: float) -> PeriodicOrbit:
    """Negative-region orbit x = -mu_G/2 + (A/sqrt(4+omega^2))*cos(omega*t - phi).

    At mu = mu_G the orbit touches x = 0 tangentially at phase phi; in the
    crossing parameterization this is the degenerate corner a = b = phi with
    C- = 0, from which the continuation branch departs.
    """
    if A <= 0:
        raise ValueError("grazing_orbit requires A > 0")
    mu_g = grazing_mu(A, omega)
    phi = grazing_phase(omega)
    c_plus = -mu_g / 2.0 - q_plus(A, omega, phi)
    orb = PeriodicOrbit(mu=mu_g, omega=omega, A=A, a=phi, b=phi,
                        c_plus=c_plus, c_minus=0.0, residual=0.0,
                        mean_x=-mu_g / 2.0)
    return orb


def _residual(u, mu, omega, A):
    a, b, cp, cm = u
    e_up = 2.0 * (b - a) / omega
    e_dn = -2.0 * (2.0 * math.pi + a - b) / omega
    if e_up > 700.0:
        return None
    exp_up = math.exp(e_up)
    exp_dn = math.exp(e_dn)
    return np.array([
        mu / 2.0 + cp + q_plus(A, omega, a),
        mu / 2.0 + cp * exp_up + q_plus(A, omega, b),
        -mu / 2.0 + cm + q_minus(A, omega, b),
        -mu / 2.0 + cm * exp_dn + q_minus(A, omega, a),
    ])


def _dq_plus(A, omega, th):
    return A / (4.0 + omega**2) * (omega * math.cos(th) + 2.0 * math.sin(th))


def _dq_minus(A, omega, th):
    return A / (4.0 + omega**2) * (omega * math.cos(th) - 2.0 * math.sin(th))


def _jacobian(u, mu, omega, A):
    a, b, cp, cm = u
    exp_up = math.exp(2.0 * (b - a) / omega)
    exp_dn = math.exp(-2.0 * (2.0 * math.pi + a - b) / omega)
    J = np.zeros((4, 4))
    J[0, 0] = _dq_plus(A, omega, a)
    J[0, 2] = 1.0
    J[1, 0] = -2.0 / omega * cp * exp_up
    J[1, 1] = 2.0 / omega * cp * exp_up + _dq_plus(A, omega, b)
    J[1, 2] = exp_up
    J[2, 1] = _dq_minus(A, omega, b)
    J[2, 3] = 1.0
    J[3, 0] = -2.0 / omega * cm * exp_dn + _dq_minus(A, omega, a)
    J[3, 1] = 2.0 / omega * cm * exp_dn
    J[3, 3] = exp_dn
    return J


def orbit_value(orbit: PeriodicOrbit, theta: float) -> float:
    """x at forcing phase theta in [a, a + 2*pi] (time t = theta/omega)."""
    mu, omega, A = orbit.mu, orbit.omega, orbit.A
    if orbit.grazing:
        return -mu / 2.0 + q_minus(A, omega, theta)
    if theta <= orbit.b:
        return (mu / 2.0 + orbit.c_plus * math.exp(2.0 * (theta - orbit.a) / omega)
                + q_plus(A, omega, theta))
    return (-mu / 2.0 + orbit.c_minus * math.exp(-2.0 * (theta - orbit.b) / omega)
            + q_minus(A, omega, theta))


def _is_physical(mu, omega, A, a, b, cp, cm) -> bool:
    """Sign conditions on a PHYS_GRID-point interior grid of each arc."""
    pref = A / (4.0 + omega**2)
    th = np.linspace(a, b, PHYS_GRID + 2)[1:-1]
    x_plus = (mu / 2.0 + cp * np.exp(2.0 * (th - a) / omega)
              + pref * (omega * np.sin(th) - 2.0 * np.cos(th)))
    if np.min(x_plus) < -PHYS_TOL:
        return False
    th = np.linspace(b, a + 2.0 * math.pi, PHYS_GRID + 2)[1:-1]
    x_minus = (-mu / 2.0 + cm * np.exp(-2.0 * (th - b) / omega)
               + pref * (omega * np.sin(th) + 2.0 * np.cos(th)))
    if np.max(x_minus) > PHYS_TOL:
        return False
    return True


def mean_x(orbit: PeriodicOrbit) -> float:
    """Exact period average of x: piecewise integrals over both arcs."""
    if orbit.grazing:
        return -orbit.mu / 2.0
    return _mean_from_parts(orbit.mu, orbit.omega, orbit.A, orbit.a, orbit.b,
                            orbit.c_plus, orbit.c_minus)


def _mean_from_parts(mu, omega, A, a, b, cp, cm) -> float:
    pref = A / (4.0 + omega**2)
    trig_p = pref * (math.cos(a) - math.cos(b)
                     + 2.0 / omega * (math.sin(a) - math.sin(b)))
    trig_m = pref * (math.cos(b) - math.cos(a)
                     + 2.0 / omega * (math.sin(a) - math.sin(b)))
    i_plus = (mu / 2.0) * (b - a) / omega \
        + cp / 2.0 * (math.exp(2.0 * (b - a) / omega) - 1.0) + trig_p
    i_minus = (-mu / 2.0) * (2.0 * math.pi + a - b) / omega \
        + cm / 2.0 * (1.0 - math.exp(-2.0 * (2.0 * math.pi + a - b) / omega)) \
        + trig_m
    return omega * (i_plus + i_minus) / (2.0 * math.pi)


def solve_orbit(mu: float, omega: float, A: float,
                guess: PeriodicOrbit) -> PeriodicOrbit:
    """Newton solution of the four compatibility equations at fixed mu.

    Damped steps (up to 8 halvings on residual increase), analytic Jacobian,
    accepted at max-norm residual < 1e-11.  Raises NewtonDiverged on failure
    and UnphysicalOrbit when the root violates the sign conditions or has
    collapsed onto the degenerate zero-excursion family.
    """
    if omega <= 0.0:
        raise ValueError("solve_orbit requires omega > 0")
    u = np.array([guess.a, guess.b, guess.c_plus, guess.c_minus], dtype=float)
    F = _residual(u, mu, omega, A)
    if F is None:
        raise NewtonDiverged("initial guess overflows exponential")
    fnorm = float(np.max(np.abs(F)))
    for _ in range(NEWTON_MAX_ITER):
        if fnorm < NEWTON_TOL:
            break
        J = _jacobian(u, mu, omega, A)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise NewtonDiverged("singular Jacobian") from None
        if not np.all(np.isfinite(step)):
            raise NewtonDiverged("non-finite Newton step")
        lam = 1.0
        for _ in range(NEWTON_MAX_HALVINGS + 1):
            u_new = u + lam * step
            F_new = _residual(u_new, mu, omega, A)
            if F_new is not None and np.all(np.isfinite(F_new)):
                fnorm_new = float(np.max(np.abs(F_new)))
                if fnorm_new < fnorm or fnorm_new < NEWTON_TOL:
                    break
            lam /= 2.0
        else:
            raise NewtonDiverged("damping exhausted")
        u, F, fnorm = u_new, F_new, fnorm_new
    if fnorm >= NEWTON_TOL:
        raise NewtonDiverged(f"no convergence, residual {fnorm:.3e}")

    a, b, cp, cm = (float(v) for v in u)
    # Shift both phases by whole periods so a lands in [-pi, pi).
    shift = 2.0 * math.pi * math.floor((a + math.pi) / (2.0 * math.pi))
    a -= shift
    b -= shift
    if b - a < MIN_EXCURSION:
        # Degenerate corner: legitimate only as the grazing orbit itself.
        mu_g = grazing_mu(A, omega)
        if abs(mu - mu_g) <= 1e-8 and abs(cm) <= 1e-8:
            return grazing_orbit(A, omega)
        raise UnphysicalOrbit("zero-length positive excursion (grazing family)")
    if not (b - a < 2.0 * math.pi):
        raise UnphysicalOrbit("positive excursion exceeds one period")
    if not _is_physical(mu, omega, A, a, b, cp, cm):
        raise UnphysicalOrbit("sign condition failed on sampling grid")
    return PeriodicOrbit(mu=mu, omega=omega, A=A, a=a, b=b, c_plus=cp,
                         c_minus=cm, residual=fnorm,
                         mean_x=_mean_from_parts(mu, omega, A, a, b, cp, cm))


def _make_guess(mu, omega, A, a, b):
    cp = -mu / 2.0 - q_plus(A, omega, a)
    cm = mu / 2.0 - q_minus(A, omega, b)
    return PeriodicOrbit(mu=mu, omega=omega, A=A, a=a, b=b, c_plus=cp,
                         c_minus=cm, residual=math.inf, mean_x=0.0)


def _residual_fixed_d(v, d, omega, A):
    a, mu, cp, cm = v
    b = a + d
    exp_up = math.exp(2.0 * d / omega)
    exp_dn = math.exp(-2.0 * (2.0 * math.pi - d) / omega)
    return np.array([
        mu / 2.0 + cp + q_plus(A, omega, a),
        mu / 2.0 + cp * exp_up + q_plus(A, omega, b),
        -mu / 2.0 + cm + q_minus(A, omega, b),
        -mu / 2.0 + cm * exp_dn + q_minus(A, omega, a),
    ]), exp_up, exp_dn


def _solve_excursion(d, omega, A, v0):
    """Newton on the compatibility system with the excursion b - a = d fixed
    and mu unknown.  Near grazing the family is square-root singular in mu but
    regular in d, so this parameterization starts the branch reliably."""
    v = np.array(v0, dtype=float)
    for _ in range(NEWTON_MAX_ITER):
        F, exp_up, exp_dn = _residual_fixed_d(v, d, omega, A)
        fnorm = float(np.max(np.abs(F)))
        if fnorm < NEWTON_TOL:
            return v
        a, mu, cp, cm = v
        b = a + d
        J = np.array([
            [_dq_plus(A, omega, a), 0.5, 1.0, 0.0],
            [_dq_plus(A, omega, b), 0.5, exp_up, 0.0],
            [_dq_minus(A, omega, b), -0.5, 0.0, 1.0],
            [_dq_minus(A, omega, a), -0.5, 0.0, exp_dn],
        ])
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise NewtonDiverged("singular Jacobian (fixed-excursion)") from None
        if not np.all(np.isfinite(step)):
            raise NewtonDiverged("non-finite step (fixed-excursion)")
        v = v + step
    raise NewtonDiverged("no convergence (fixed-excursion)")


def _bootstrap_branch(omega: float, A: float, span: float):
    """Crossing orbits from the grazing corner, walked in excursion length.

    Returns orbits in decreasing-mu order, stopping once mu has descended
    ``span`` below mu_G or once mu turns back up (fold already passed in d).
    """
    mu_g = grazing_mu(A, omega)
    phi = grazing_phase(omega)
    d = max(1e-3 * omega, 1e-6)
    v = np.array([phi, mu_g, -mu_g / 2.0 - q_plus(A, omega, phi),
                  mu_g / 2.0 - q_minus(A, omega, phi)])
    out: list[PeriodicOrbit] = []
    growth = 1.4
    d_ok = None
    solves = 0
    while d < 0.9 * 2.0 * math.pi and solves < 400:
        solves += 1
        try:
            v_new = _solve_excursion(d, omega, A, v)
        except NewtonDiverged:
            growth = math.sqrt(growth)
            if growth - 1.0 < 1e-3:
                break
            d = d_ok * growth if d_ok is not None else d / 2.0
            continue
        a, mu, cp, cm = (float(x) for x in v_new)
        if mu <= 0.0 or mu > mu_g + 1e-9:
            break
        if out and mu >= out[-1].mu:
            break  # past the fold minimum in the d-parameterization
        if _is_physical(mu, omega, A, a, a + d, cp, cm):
            orb = PeriodicOrbit(mu=mu, omega=omega, A=A, a=a, b=a + d,
                                c_plus=cp, c_minus=cm, residual=0.0,
                                mean_x=_mean_from_parts(mu, omega, A, a, a + d,
                                                        cp, cm))
            out.append(orb)
            if mu_g - mu >= span:
                break
        v = v_new
        d_ok = d
        d *= growth
    return out


def _refine_fold(points) -> float | None:
    """Vertex of the local parabola mu ~ mu_CF + kappa*(a - a_CF)^2.

    Fits the last few branch points (recentred in a for conditioning); the
    refinement is discarded unless it is a small downward correction.
    """
    tail = points[-min(len(points), 12):]
    if len(tail) < 5:
        return None
    aa = np.array([p.a for p in tail])
    mm = np.array([p.mu for p in tail])
    a0 = aa.mean()
    try:
        c2, c1, c0 = np.polyfit(aa - a0, mm, 2)
    except np.linalg.LinAlgError:
        return None
    if c2 <= 0.0:
        return None
    vertex = float(c0 - c1**2 / (4.0 * c2))
    last = points[-1].mu
    if 0.0 <= last - vertex < 1e-3:
        return vertex
    return None


def continue_to_fold(omega: float, A: float,
                     step0: float | None = None) -> ContinuationBranch:
    """March the orbit family down in mu until the solver fails at the fold.

    Starts from the grazing orbit at mu_G, halves the mu step on every Newton
    failure (or unphysical root) and stops when the step falls below 1e-8; the
    last converged mu, refined by the local parabola fit, is reported as
    mu_CF.  At omega = 0 the family degenerates and the documented limit
    mu_CF = mu_G = A is returned directly.
    """
    if A <= 0.0:
        raise ValueError("continue_to_fold requires A > 0")
    if omega < 0.0:
        raise ValueError("omega must be >= 0")
    mu_g = grazing_mu(A, omega)
    graze = grazing_orbit(A, omega)
    if omega == 0.0:
        return ContinuationBranch(omega=omega, A=A, points=(graze,),
                                  mu_cf=mu_g, fold_orbit=graze,
                                  termination=Termination.FOLD_DETECTED)
    if step0 is None:
        step0 = mu_g / 100.0

    points: list[PeriodicOrbit] = [graze]
    points.extend(_bootstrap_branch(omega, A, span=3.0 * step0))
    current: PeriodicOrbit | None = points[-1] if len(points) > 1 else None

    if current is not None:
        step = min(step0, max((mu_g - current.mu) / 4.0, 16.0 * STEP_FLOOR))
    else:
        step = step0
    mu = current.mu if current is not None else mu_g

    while step >= STEP_FLOOR:
        mu_try = mu - step
        if mu_try <= 0.0:
            step /= 2.0
            continue
        if current is None:
            break
        try:
            orb = solve_orbit(mu_try, omega, A, current)
        except (NewtonDiverged, UnphysicalOrbit):
            step /= 2.0
            continue
        current = orb
        points.append(orb)
        mu = mu_try
        step = min(step * 1.25, step0)

    if current is None:
        return ContinuationBranch(omega=omega, A=A, points=tuple(points),
                                  mu_cf=None, fold_orbit=None,
                                  termination=Termination.DIVERGED)
    crossing = [p for p in points if not p.grazing]
    if len(crossing) < 5:
        return ContinuationBranch(omega=omega, A=A, points=tuple(points),
                                  mu_cf=current.mu, fold_orbit=current,
                                  termination=Termination.STEP_FLOOR)
    mu_cf = _refine_fold(crossing)
    if mu_cf is None:
        mu_cf = current.mu
    return ContinuationBranch(omega=omega, A=A, points=tuple(points),
                              mu_cf=mu_cf, fold_orbit=current,
                              termination=Termination.FOLD_DETECTED)


def a_of_mu_curve(omega: float, A: float, a_grid) -> list[tuple[float, float]]:
    """Large-omega fold curve: mu(a) = (4A/(pi*omega)) * (a*sin(a) + cos(a)).

    Returns (mu, a) pairs on the given grid; the fold sits where
    d(mu)/da = (4A/(pi*omega)) * a*cos(a) vanishes at a = 0.
    """
    if omega <= 0.0:
        raise ValueError("a_of_mu_curve requires omega > 0")
    coef = 4.0 * A / (math.pi * omega)
    return [(coef * (a * math.sin(a) + math.cos(a)), float(a)) for a in a_grid]
