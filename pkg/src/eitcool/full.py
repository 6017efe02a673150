"""Master equation on internal levels x truncated oscillator.

The laser coupling keeps the exact recoil phase operators
``exp(-i p_j (a + a^+))`` (``p_j = eta_j cos phi_j``), exponentiated on the
truncated number basis, so they are exactly unitary there.  Spontaneous
emission into level ``j`` carries recoil ``exp(i eta_j u (a + a^+))``
averaged over the photon direction ``u = cos(theta)``; the emission
Lamb-Dicke parameter is taken as ``|p_j|`` (lasers along the trap axis).
The direction average uses Gauss-Legendre nodes weighted by the angular
distribution, so each node conserves trace exactly.

Joint basis index: ``internal * n_fock + n``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import NumericalError, ResourceError, ValidationError
from .liouville import (
    Liouvillian,
    density_diagnostics,
    hamiltonian_super,
    sandwich,
    solve_steady_state,
    spost,
    spre,
)
from .scenario import DecayChannel, Scenario

DEFAULT_MAX_DIM = 80
DEFAULT_ANGULAR_NODES = 8
TRACE_DRIFT_LIMIT = 1e-6
STEADY_RESIDUAL = 1e-9
THERMAL_TAIL_WARN = 1e-6


@dataclass(frozen=True)
class JointSpace:
    n_internal: int
    n_fock: int

    @property
    def dim(self) -> int:
        return self.n_internal * self.n_fock

    def number_operator(self) -> np.ndarray:
        return np.kron(np.eye(self.n_internal), np.diag(np.arange(self.n_fock, dtype=float)))

    def excited_projector(self) -> np.ndarray:
        p = np.zeros((self.n_internal, self.n_internal))
        p[-1, -1] = 1.0
        return np.kron(p, np.eye(self.n_fock))


def annihilation(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)


def position_eig(n: int):
    a = annihilation(n)
    return la.eigh(a + a.T)


def phase_operator(k: float, n: int, _eig=None) -> np.ndarray:
    """``exp(i k (a + a^+))`` on the first ``n`` number states."""
    w, u = _eig if _eig is not None else position_eig(n)
    return (u * np.exp(1j * k * w)) @ u.conj().T


def angular_nodes(channel: DecayChannel, n_nodes: int = DEFAULT_ANGULAR_NODES):
    """Nodes ``u`` and weights (summing to one) for the emission average.

    Isotropic and dipole patterns use Gauss-Legendre quadrature against the
    densities 1/2 and 3(1+u^2)/8.  A custom second moment ``alpha`` uses the
    three-point distribution with mass ``alpha/2`` at ``u = +-1`` and
    ``1 - alpha`` at ``u = 0``.
    """
    if channel.angular_profile == "custom":
        alpha = channel.angular_second_moment
        return np.array([-1.0, 0.0, 1.0]), np.array([alpha / 2, 1.0 - alpha, alpha / 2])
    u, w = np.polynomial.legendre.leggauss(n_nodes)
    if channel.angular_profile == "isotropic":
        density = np.full_like(u, 0.5)
    else:
        density = 3.0 / 8.0 * (1.0 + u**2)
    return u, w * density


def build_full_liouvillian(
    s: Scenario,
    angular_nodes_count: int = DEFAULT_ANGULAR_NODES,
    max_dim: int = DEFAULT_MAX_DIM,
) -> Liouvillian:
    space = JointSpace(s.dim, s.trap.fock_cutoff)
    if space.dim > max_dim:
        raise ResourceError(
            f"joint dimension {space.dim} exceeds limit {max_dim}; reduce fock_cutoff"
        )
    d, nf = space.n_internal, space.n_fock
    e = d - 1
    eig = position_eig(nf)
    a = annihilation(nf)

    def unit(i, j):
        m = np.zeros((d, d))
        m[i, j] = 1.0
        return m

    h = np.kron(np.eye(d), s.trap.frequency * (a.T @ a)).astype(complex)
    for j, level in enumerate(s.lowers):
        drive = level.drive
        h += drive.detuning * np.kron(unit(j, j), np.eye(nf))
        up = 0.5 * drive.rabi * np.kron(unit(e, j), phase_operator(-drive.lamb_dicke_projection, nf, eig))
        h += up + up.conj().T

    gen = hamiltonian_super(h, sparse=True)
    gamma = s.total_decay
    if gamma:
        pe = sp.csr_matrix(space.excited_projector())
        gen = gen - 0.5 * gamma * (spre(pe, sparse=True) + spost(pe, sparse=True))
    for j, level in enumerate(s.lowers):
        rate = level.decay.rate
        if not rate:
            continue
        eta = abs(level.drive.lamb_dicke_projection)
        u, w = angular_nodes(level.decay, angular_nodes_count)
        lower = sp.csr_matrix(unit(j, e))
        for uk, wk in zip(u, w):
            jump = sp.kron(lower, sp.csr_matrix(phase_operator(eta * uk, nf, eig)), format="csr")
            gen = gen + rate * wk * sandwich(jump, jump.conj().T, sparse=True)
    return Liouvillian(gen.tocsr(), space.dim, space)


def thermal_state(space: JointSpace, mean_n: float, internal: int) -> np.ndarray:
    """``|internal><internal|`` times a thermal oscillator state.

    ``internal`` is a 0-based internal index.  The distribution is
    renormalized on the retained number states.
    """
    if mean_n < 0:
        raise ValidationError("mean_n must be >= 0")
    nf = space.n_fock
    if mean_n == 0:
        p = np.zeros(nf)
        p[0] = 1.0
    else:
        q = mean_n / (mean_n + 1.0)
        tail = q**nf
        if tail > THERMAL_TAIL_WARN:
            warnings.warn(
                f"thermal state with mean_n={mean_n} loses {tail:.2e} of its weight "
                f"above the Fock cutoff {nf}",
                RuntimeWarning,
                stacklevel=2,
            )
        p = q ** np.arange(nf)
        p /= p.sum()
    r = np.zeros((space.n_internal, space.n_internal))
    r[internal, internal] = 1.0
    return np.kron(r, np.diag(p)).astype(complex)


def initial_state(s: Scenario, L: Liouvillian) -> np.ndarray:
    return thermal_state(L.space, s.initial_mean_n, s.initial_internal_state - 1)


@dataclass(frozen=True)
class CoolingTrace:
    t: np.ndarray
    mean_n: np.ndarray
    pop_e: np.ndarray
    trace_error: np.ndarray
    hermiticity_error: np.ndarray
    min_eigenvalue: np.ndarray
    step: float

    def to_csv(self, fh=None) -> str | None:
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t", "mean_n", "pop_e", "trace_error"])
        for row in zip(self.t, self.mean_n, self.pop_e, self.trace_error):
            writer.writerow([f"{v:.17g}" for v in row])
        return out.getvalue() if fh is None else None


def sample_steps(substeps: int, n_samples: int, spacing: str = "log") -> np.ndarray:
    """Distinct substep indices (always including 0 and ``substeps``)."""
    if spacing == "log":
        idx = np.geomspace(1, substeps, max(n_samples - 1, 1))
    elif spacing == "linear":
        idx = np.linspace(0, substeps, n_samples)
    else:
        raise ValidationError(f"unknown spacing {spacing!r}")
    idx = np.rint(idx).astype(int)
    return np.unique(np.concatenate(([0, substeps], idx)))


def evolve(
    L: Liouvillian,
    rho0: np.ndarray,
    t_max: float,
    n_samples: int = 200,
    substeps: int = 2000,
    spacing: str = "log",
) -> CoolingTrace:
    """Propagate ``rho0`` to ``t_max`` with the exact step propagator.

    ``exp(L dt)`` for ``dt = t_max / substeps`` is formed once by scaling and
    squaring and applied repeatedly; samples fall on substep boundaries.
    """
    if not t_max > 0:
        raise ValidationError("t_max must be > 0")
    if substeps < 1:
        raise ValidationError("substeps must be >= 1")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (L.dim, L.dim):
        raise ValidationError(f"initial state shape {rho0.shape} does not match dimension {L.dim}")
    dt = t_max / substeps
    prop = la.expm(L.dense() * dt)
    space = L.space
    n_op = space.number_operator().ravel() if space is not None else None
    e_op = space.excited_projector().ravel() if space is not None else None
    wanted = sample_steps(substeps, n_samples, spacing)

    rows = []
    x = rho0.ravel().copy()
    step = 0
    for target in wanted:
        while step < target:
            x = prop @ x
            step += 1
        rho = x.reshape(L.dim, L.dim)
        diag = density_diagnostics(rho)
        if diag["trace_error"] > TRACE_DRIFT_LIMIT:
            raise NumericalError(
                f"trace drift {diag['trace_error']:.2e} at t = {step * dt!r} "
                f"with step dt = {dt!r}"
            )
        # both observables are diagonal: Tr(rho O) = sum_ij O_ij rho_ij
        mean_n = float(np.real(n_op @ x)) if n_op is not None else math.nan
        pop_e = float(np.real(e_op @ x)) if e_op is not None else math.nan
        rows.append(
            (step * dt, mean_n, pop_e, diag["trace_error"], diag["hermiticity_error"], diag["min_eigenvalue"])
        )
    cols = np.array(rows).T
    return CoolingTrace(*cols, step=dt)


def steady_state_full(L: Liouvillian):
    """Steady state and its mean phonon number."""
    rho = solve_steady_state(L, residual_tol=STEADY_RESIDUAL)
    n_ss = float(np.real(np.trace(rho @ L.space.number_operator())))
    return rho, n_ss


def scenario_steady_n(s: Scenario, **kwargs) -> float:
    return steady_state_full(build_full_liouvillian(s, **kwargs))[1]


def fit_cooling_rate(trace: CoolingTrace, n_ss: float, window=(0.02, 0.5)) -> float:
    """Exponential rate of ``mean_n - n_ss`` over a relative-excess window.

    Uses samples whose excess over the steady value lies between
    ``window[0]`` and ``window[1]`` of the initial excess.
    """
    excess = np.asarray(trace.mean_n) - n_ss
    y0 = excess[0]
    if not y0 > 0:
        raise NumericalError("initial mean_n does not exceed the steady value; nothing to fit")
    lo, hi = window
    mask = (excess > lo * y0) & (excess < hi * y0)
    if mask.sum() < 3:
        raise NumericalError(
            f"only {int(mask.sum())} samples in the fit window; increase n_samples or t_max"
        )
    slope = np.polyfit(np.asarray(trace.t)[mask], np.log(excess[mask]), 1)[0]
    return float(-slope)
