"""Closed-form cooling results in leading Lamb-Dicke order.

Laser roles: the first non-cooling laser is the primary coupling field
(detuning ``delta``), the second non-cooling laser (if any) is the extra
coupling field that opens the second transparency window.  Three-level
(single-EIT) scenarios have no second coupling field and are treated as
``omega2 = 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import HeatingRegimeError, PreconditionError, ValidationError
from .scenario import Scenario

# |delta - delta2 -/+ nu| below this fraction of nu counts as the pole
POLE_RTOL = 1e-12
TRUNCATION_WARN = 1e-6


@dataclass(frozen=True)
class RateCoefficients:
    """Heating (``a_plus``) and cooling (``a_minus``) rate coefficients."""

    a_plus: float
    a_minus: float

    def __post_init__(self):
        if self.a_plus < 0 or self.a_minus < 0:
            raise ValidationError(
                f"rate coefficients must be >= 0 (a_plus={self.a_plus}, a_minus={self.a_minus})"
            )

    @property
    def w(self) -> float:
        return self.a_minus - self.a_plus

    @property
    def cooling(self) -> bool:
        return self.a_minus > self.a_plus


@dataclass(frozen=True)
class MotionalDistribution:
    """Populations ``P(0) .. P(N)`` of the motional number states."""

    populations: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.populations, dtype=float)
        object.__setattr__(self, "populations", p)
        if p.ndim != 1 or p.size < 2:
            raise ValidationError("populations must be a 1-D array with at least two entries")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValidationError("populations must lie in [0, 1]")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValidationError(f"populations must sum to 1 (sum = {p.sum()!r})")

    @classmethod
    def thermal(cls, mean_n: float, n_max: int) -> "MotionalDistribution":
        """Thermal distribution renormalized on ``0 .. n_max``."""
        if mean_n == 0:
            p = np.zeros(n_max + 1)
            p[0] = 1.0
            return cls(p)
        q = mean_n / (mean_n + 1.0)
        p = q ** np.arange(n_max + 1)
        return cls(p / p.sum())

    @classmethod
    def fock(cls, n: int, n_max: int) -> "MotionalDistribution":
        p = np.zeros(n_max + 1)
        p[n] = 1.0
        return cls(p)

    @property
    def mean(self) -> float:
        return float(np.arange(self.populations.size) @ self.populations)


def _laser_roles(s: Scenario):
    if s.n_lower > 3:
        raise PreconditionError(
            "closed-form rates cover two or three lower levels; "
            "use the numeric fluctuation-spectrum route for more"
        )
    pos = s.coupling_positions
    first = s.lowers[pos[0]].drive
    second = s.lowers[pos[1]].drive if len(pos) > 1 else None
    return first, second, s.cooling.drive


def optimal_conditions(delta1, omega1, omega2, omega3):
    """Laser settings that null carrier and blue sideband and put the
    narrow absorption maximum on the red sideband.

    Returns ``(delta2, delta3, nu)``.
    """
    if not delta1 > 0:
        raise ValidationError(f"delta1 must be > 0, got {delta1!r}")
    if min(omega1, omega2, omega3) < 0:
        raise ValidationError("Rabi frequencies must be >= 0")
    nu = 0.5 * (math.sqrt(delta1**2 + omega1**2 + omega2**2 / 2 + omega3**2) - delta1)
    return delta1 - nu, delta1, nu


def scenario_optimal_conditions(s: Scenario):
    first, second, cool = _laser_roles(s)
    omega2 = second.rabi if second is not None else 0.0
    return optimal_conditions(first.detuning, first.rabi, omega2, cool.rabi)


def trap_matched_residual(s: Scenario) -> float:
    """``(nu - nu_opt) / nu``: zero when the trap frequency matches the
    optimal value for the scenario's primary detuning and Rabi frequencies."""
    nu = s.trap.frequency
    _, _, nu_opt = scenario_optimal_conditions(s)
    return (nu - nu_opt) / nu


def complete_optimal(s: Scenario) -> Scenario:
    """Copy of ``s`` with trap frequency, second-coupling detuning and
    cooling detuning set to the optimal values (Rabi frequencies kept)."""
    delta2, delta3, nu = scenario_optimal_conditions(s)
    out = s.with_trap(frequency=nu).with_cooling_detuning(delta3)
    pos = s.coupling_positions
    if len(pos) > 1:
        out = out.with_drive(pos[1], detuning=delta2)
    return out


def _extra_shift(sign, nu, delta, delta2, omega2):
    """Second-coupling contribution to the bracket of A+ (sign=+1) or
    A- (sign=-1).  Returns ``None`` at the pole."""
    if omega2 == 0:
        return 0.0
    gap = delta - delta2 - sign * nu
    if abs(gap) < POLE_RTOL * nu:
        return None
    return -sign * nu * omega2**2 / (4.0 * gap)


def closed_form_rates(eta, delta, nu, gamma3, omega1, omega3, omega2=0.0, delta2=0.0):
    """A+ and A- for cooling detuning equal to the primary coupling
    detuning ``delta``.

    At the pole of the second-coupling term the corresponding coefficient
    is returned as exactly zero, its analytic limit.
    """
    weight = omega1**2 / (omega1**2 + omega3**2) if omega1 or omega3 else 0.0
    out = []
    for sign in (+1, -1):
        extra = _extra_shift(sign, nu, delta, delta2, omega2)
        if extra is None:
            out.append(0.0)
            continue
        bracket = (omega1**2 + omega3**2) / 4.0 - nu * (nu - sign * delta) + extra
        num = gamma3 * nu**2 * omega3**2
        den = 4.0 * bracket**2 + gamma3**2 * nu**2
        out.append(eta**2 * weight * num / den)
    return RateCoefficients(a_plus=out[0], a_minus=out[1])


def rate_coefficients(s: Scenario) -> RateCoefficients:
    """Leading-order A+/A- for a scenario with cooling detuning equal to
    the primary coupling detuning.

    Only the decay on the cooling transition enters; the effective
    Lamb-Dicke parameter is ``s.eta`` (the second coupling laser's
    projection does not contribute).
    """
    first, second, cool = _laser_roles(s)
    delta = first.detuning
    scale = max(abs(delta), abs(cool.detuning), s.trap.frequency)
    if abs(cool.detuning - delta) > 1e-12 * scale:
        raise PreconditionError(
            "closed-form rates require the cooling detuning to equal the primary "
            f"coupling detuning ({cool.detuning!r} != {delta!r}); "
            "use numeric_rates for general detunings"
        )
    omega2 = second.rabi if second is not None else 0.0
    delta2 = second.detuning if second is not None else 0.0
    return closed_form_rates(
        s.eta, delta, s.trap.frequency, s.cooling.decay.rate,
        first.rabi, cool.rabi, omega2, delta2,
    )


def optimum_cooling_rate(eta, omega1, omega3, gamma3) -> float:
    """A- (= cooling rate, since A+ vanishes) once the optimal conditions hold."""
    return eta**2 * omega1**2 / (omega1**2 + omega3**2) * omega3**2 / gamma3


def cooling_rate_and_limit(r: RateCoefficients):
    """Return ``(W, n_ss)`` with ``W = A- - A+`` and ``n_ss = A+ / W``."""
    if not r.a_minus > r.a_plus:
        raise HeatingRegimeError(
            f"a_minus ({r.a_minus!r}) <= a_plus ({r.a_plus!r}): no steady cooling limit"
        )
    w = r.a_minus - r.a_plus
    return w, r.a_plus / w


def mean_n_closed_form(r: RateCoefficients, n0, t):
    w, n_ss = cooling_rate_and_limit(r)
    return n_ss + (n0 - n_ss) * np.exp(-w * np.asarray(t, dtype=float))


def rate_generator(r: RateCoefficients, n_max: int) -> np.ndarray:
    """Birth-death generator on ``0 .. n_max``; heating out of ``n_max`` dropped."""
    g = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max + 1):
        if n > 0:
            g[n - 1, n] += r.a_minus * n
            g[n, n] -= r.a_minus * n
        if n < n_max:
            g[n + 1, n] += r.a_plus * (n + 1)
            g[n, n] -= r.a_plus * (n + 1)
    return g


def rate_equation_evolve(r: RateCoefficients, p0: MotionalDistribution, t) -> MotionalDistribution:
    """Evolve motional populations under the leading-order rate equation."""
    n_max = p0.populations.size - 1
    p = la.expm(rate_generator(r, n_max) * float(t)) @ p0.populations
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    if p[-1] > TRUNCATION_WARN:
        warnings.warn(
            f"population {p[-1]:.2e} at the truncation level n = {n_max}; "
            "the reflecting boundary is affecting the result",
            RuntimeWarning,
            stacklevel=2,
        )
    return MotionalDistribution(p)


def rate_equation_trace(r: RateCoefficients, p0: MotionalDistribution, times):
    """Mean occupation at each of ``times``."""
    n_max = p0.populations.size - 1
    g = rate_generator(r, n_max)
    out = []
    for t in np.asarray(times, dtype=float):
        p = la.expm(g * t) @ p0.populations
        out.append(np.arange(n_max + 1) @ p / p.sum())
    return np.array(out)
