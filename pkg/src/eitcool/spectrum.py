"""Fluctuation spectrum of the first-order Lamb-Dicke coupling.

To first order in the Lamb-Dicke parameters the laser coupling is
``V1 (x) (a + a^+)`` with

    V1 = (i/2) sum_j p_j rabi_j (|j><e| - |e><j|),   p_j = eta_j cos(phi_j).

With the projections ``p_j`` folded into ``V1`` the half-sided transform

    S(w) = int_0^inf exp(i w t) <V1(t) V1(0)>_ss dt

is already in rate units, and the motional rate coefficients are
``A+ = 2 Re S(-nu)`` (heating) and ``A- = 2 Re S(+nu)`` (cooling).
The two-time correlation is evaluated with the quantum regression theorem,
i.e. by one linear solve with the internal Liouvillian.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as la

from .errors import NearSingularSolveError, NumericalError, PreconditionError
from .internal import build_internal_liouvillian, steady_state
from .liouville import Liouvillian
from .rates import RateCoefficients, rate_coefficients
from .scenario import Scenario

CONDITION_LIMIT = 1e13
NEGATIVE_RATE_RTOL = 1e-12


def build_v1(s: Scenario) -> np.ndarray:
    d = s.dim
    e = d - 1
    v = np.zeros((d, d), dtype=complex)
    for j, level in enumerate(s.lowers):
        c = 0.5j * level.drive.lamb_dicke_projection * level.drive.rabi
        v[j, e] += c
        v[e, j] -= c
    return v


def _resolvent_solve(L: Liouvillian, rho_ss, y, omega):
    """Solve ``(L + i omega) x = -y`` on the traceless subspace.

    ``y`` must be traceless.  The bordered row pins ``Tr x = 0`` so the
    system stays regular at ``omega = 0``.
    """
    d = L.dim
    m = d * d
    tr = np.eye(d).ravel()
    b = np.zeros((m + 1, m + 1), dtype=complex)
    b[:m, :m] = L.dense() + 1j * omega * np.eye(m)
    b[:m, m] = rho_ss.ravel()
    b[m, :m] = tr
    cond = np.linalg.cond(b)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise NearSingularSolveError(f"resolvent at omega = {omega!r} is near singular", cond)
    rhs = np.zeros(m + 1, dtype=complex)
    rhs[:m] = -y.ravel()
    x = la.solve(b, rhs)
    return x[:m].reshape(d, d)


def correlation_spectrum(s: Scenario, omega: float, connected: bool = False) -> complex:
    """``S(omega)`` of the steady-state autocorrelation of ``V1``.

    The stationary part ``<V1>^2`` of the correlation contributes
    ``i <V1>^2 / omega``, which is handled analytically; it is purely
    imaginary because ``V1`` is Hermitian, so ``Re S`` is unaffected.
    ``connected=True`` drops it (the spectrum of ``V1 - <V1>``), which is
    the only finite choice at ``omega = 0``.
    """
    L = build_internal_liouvillian(s)
    rho = steady_state(L)
    v = build_v1(s)
    y = v @ rho
    mean = np.trace(y)
    x = _resolvent_solve(L, rho, y - mean * rho, omega)
    value = complex(np.trace(v @ x))
    if connected:
        return value
    if abs(mean) > 1e-14 * max(np.abs(v).max(), 1e-300):
        if omega == 0:
            raise NearSingularSolveError(
                "S(0) diverges: <V1> is nonzero; use connected=True", np.inf
            )
        value += 1j * mean * mean / omega
    return value


def numeric_rates(s: Scenario) -> RateCoefficients:
    """A+/A- from the fluctuation spectrum at the trap frequency."""
    nu = s.trap.frequency
    a_plus = 2.0 * correlation_spectrum(s, -nu).real
    a_minus = 2.0 * correlation_spectrum(s, nu).real
    tol = NEGATIVE_RATE_RTOL * max(abs(a_minus), abs(a_plus))
    clamped = []
    for name, value in (("a_plus", a_plus), ("a_minus", a_minus)):
        if value < 0:
            if value < -tol:
                raise NumericalError(f"{name} = {value!r} is negative beyond roundoff")
            value = 0.0
        clamped.append(value)
    return RateCoefficients(*clamped)


def regression_vs_analytic(s: Scenario):
    """Numeric and closed-form coefficients with their largest relative gap.

    The closed form ignores decay channels other than the cooling one, so a
    gap is expected whenever those are nonzero.
    """
    num = numeric_rates(s)
    ana = rate_coefficients(s)
    scale = max(ana.a_minus, ana.a_plus, 1e-300)
    gap = max(abs(num.a_plus - ana.a_plus), abs(num.a_minus - ana.a_minus)) / scale
    return num, ana, gap


def second_coupling_sensitivity(s: Scenario, projections):
    """Numeric rates as the second coupling laser's projection is varied.

    Returns rows ``(projection, a_plus, a_minus)``.
    """
    pos = s.coupling_positions
    if len(pos) < 2:
        raise PreconditionError("scenario has no second coupling laser")
    rows = []
    for p in projections:
        r = numeric_rates(s.with_drive(pos[1], lamb_dicke_projection=float(p)))
        rows.append((float(p), r.a_plus, r.a_minus))
    return rows
