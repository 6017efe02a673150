"""Internal (motion-frozen) optical Bloch dynamics and absorption spectra.

Basis: lower levels ``0 .. M-1`` in scenario order, excited level ``M``.
In the frame rotating with every laser the Hamiltonian is

    H = sum_j detuning_j |j><j| + sum_j rabi_j/2 (|e><j| + |j><e|)

and each lower level ``j`` is fed by spontaneous decay ``|j><e|`` at rate
``gamma_j``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .liouville import Liouvillian, hamiltonian_super, lindblad, solve_steady_state
from .scenario import Scenario

STEADY_RESIDUAL = 1e-10
ZERO_THRESHOLD = 1e-6


def projector(dim: int, i: int, j: int) -> np.ndarray:
    """``|i><j|`` in a ``dim``-dimensional basis."""
    out = np.zeros((dim, dim), dtype=complex)
    out[i, j] = 1.0
    return out


def internal_hamiltonian(s: Scenario, delta3_override: float | None = None) -> np.ndarray:
    d = s.dim
    e = d - 1
    h = np.zeros((d, d), dtype=complex)
    for j, level in enumerate(s.lowers):
        h[j, j] = level.drive.detuning
        h[e, j] = h[j, e] = level.drive.rabi / 2
    if delta3_override is not None:
        h[s.cooling_pos, s.cooling_pos] = delta3_override
    return h


def internal_jumps(s: Scenario):
    """``(rate, |j><e|)`` pairs for every lower level."""
    e = s.dim - 1
    return [(level.decay.rate, projector(s.dim, j, e)) for j, level in enumerate(s.lowers)]


def build_internal_liouvillian(s: Scenario, delta3_override: float | None = None) -> Liouvillian:
    return Liouvillian(lindblad(internal_hamiltonian(s, delta3_override), internal_jumps(s)), s.dim)


def steady_state(L: Liouvillian) -> np.ndarray:
    return solve_steady_state(L, residual_tol=STEADY_RESIDUAL)


def _absorption_from_state(s: Scenario, rho) -> float:
    value = s.cooling.decay.rate * rho[-1, -1].real
    if value < -1e-12 * max(s.cooling.decay.rate, 1.0):
        raise NumericalError(f"negative excited-state population {rho[-1, -1].real!r}")
    return max(value, 0.0)


def absorption(s: Scenario, delta3: float) -> float:
    """Scattering rate ``gamma_cool * rho_ee`` at cooling detuning ``delta3``."""
    return _absorption_from_state(s, steady_state(build_internal_liouvillian(s, delta3)))


@dataclass(frozen=True)
class SpectrumTrace:
    delta3: np.ndarray
    absorption: np.ndarray

    def __len__(self):
        return len(self.delta3)

    def to_csv(self, fh=None) -> str | None:
        """Write ``delta3,absorption`` rows with 17 significant digits."""
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["delta3", "absorption"])
        for x, y in zip(self.delta3, self.absorption):
            writer.writerow([f"{x:.17g}", f"{y:.17g}"])
        return out.getvalue() if fh is None else None


def absorption_sweep(s: Scenario, dmin: float, dmax: float, n: int) -> SpectrumTrace:
    """Absorption on ``n`` evenly spaced cooling detunings in ``[dmin, dmax]``.

    Only the cooling-detuning term of the generator changes along the
    sweep, so the rest is built once.
    """
    if n < 2:
        raise ValidationError("a sweep needs at least 2 points")
    if not dmin < dmax:
        raise ValidationError("dmin must be < dmax")
    base = build_internal_liouvillian(s, 0.0).matrix
    slope = hamiltonian_super(projector(s.dim, s.cooling_pos, s.cooling_pos))
    grid = np.linspace(dmin, dmax, n)
    values = np.empty(n)
    for k, delta3 in enumerate(grid):
        rho = steady_state(Liouvillian(base + delta3 * slope, s.dim))
        values[k] = _absorption_from_state(s, rho)
    return SpectrumTrace(grid, values)


@dataclass
class SpectrumFeatures:
    """Located spectral features.

    ``zeros`` are local minima below the threshold; ``minima`` are the
    remaining (finite) local minima; ``maxima`` are local maxima.
    """

    zeros: list = field(default_factory=list)
    minima: list = field(default_factory=list)
    maxima: list = field(default_factory=list)
    threshold: float = 0.0

    def to_dict(self):
        return {
            "zeros": [float(x) for x in self.zeros],
            "nonzero_minima": [float(x) for x in self.minima],
            "maxima": [float(x) for x in self.maxima],
            "threshold": float(self.threshold),
        }


def _vertex(x, y, k):
    """Vertex ``(x, y)`` of the parabola through points ``k-1, k, k+1``,
    with the abscissa clipped to that interval."""
    x0, x1, x2 = x[k - 1 : k + 2]
    y0, y1, y2 = y[k - 1 : k + 2]
    coef = np.polyfit([x0 - x1, 0.0, x2 - x1], [y0, y1, y2], 2)
    if coef[0] == 0:
        return float(x1), float(y1)
    xv = min(max(-coef[1] / (2 * coef[0]), x0 - x1), x2 - x1)
    return float(x1 + xv), float(np.polyval(coef, xv))


def _v_fit(x, y, k):
    """Zero estimate ``(x0, floor)`` from a three-point V fit to ``sqrt(y)``.

    Near a transparency zero ``y ~ c (x - x0)**2``, so ``sqrt(y)`` is a V
    whose vertex is recovered exactly even when the dip is narrower than
    the grid step.
    """
    g = np.sqrt(np.clip(y[k - 1 : k + 2], 0.0, None))
    h_left, h_right = x[k] - x[k - 1], x[k + 1] - x[k]
    if g[2] <= g[0]:
        # vertex between k and k+1: slope from the left pair
        slope = (g[0] - g[1]) / h_left
        floor = 0.5 * (g[1] + g[2] - slope * h_right)
        offset = (g[1] - floor) / slope if slope > 0 else 0.0
        x0 = x[k] + min(max(offset, 0.0), h_right)
    else:
        slope = (g[2] - g[1]) / h_right
        floor = 0.5 * (g[1] + g[0] - slope * h_left)
        offset = (g[1] - floor) / slope if slope > 0 else 0.0
        x0 = x[k] - min(max(offset, 0.0), h_left)
    return float(x0), float(max(floor, 0.0) ** 2)


def find_spectrum_features(t: SpectrumTrace, rel_threshold: float = ZERO_THRESHOLD) -> SpectrumFeatures:
    """Zeros, finite minima and maxima of an absorption trace.

    A local minimum counts as a zero when its sampled value, or the floor
    of the V fit through it, is at most ``rel_threshold`` times the global
    maximum.  Zeros are located by the V fit, the other extrema by the
    vertex of the interpolating parabola.
    """
    x = np.asarray(t.delta3, dtype=float)
    y = np.asarray(t.absorption, dtype=float)
    if x.size == 0:
        raise ValidationError("empty spectrum trace")
    if x.size < 3:
        raise ValidationError("feature finding needs at least 3 points")
    threshold = rel_threshold * y.max()
    feats = SpectrumFeatures(threshold=threshold)
    for k in range(1, x.size - 1):
        left, mid, right = y[k - 1], y[k], y[k + 1]
        if mid <= left and mid <= right and (mid < left or mid < right):
            x0, floor = _v_fit(x, y, k)
            if min(mid, floor) <= threshold:
                # an exactly vanishing sample is its own best estimate
                feats.zeros.append(float(x[k]) if mid <= 0 else x0)
            else:
                feats.minima.append(_vertex(x, y, k)[0])
        elif mid >= left and mid >= right and (mid > left or mid > right):
            feats.maxima.append(_vertex(x, y, k)[0])
    return feats
