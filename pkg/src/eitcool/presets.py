"""Named parameter sets for the published configurations.

``fig2a``/``fig2b`` are absorption-spectrum settings; ``ca-*`` (units of the
cooling-transition decay rate) and ``hg-*`` (MHz) are the cooling-dynamics
settings.  Where only the combined Lamb-Dicke parameter ``eta`` is known it
is split symmetrically: ``+eta/2`` on coupling lasers, ``-eta/2`` on the
cooling laser.
"""

from __future__ import annotations

import math

from .errors import UnknownPresetError
from .rates import optimal_conditions
from .scenario import DecayChannel, LaserDrive, LowerLevel, Scenario, Trap


def _level(rabi, detuning, projection, rate):
    return LowerLevel(LaserDrive(rabi, detuning, projection), DecayChannel(rate))


def _fig2a():
    delta1, omega1, omega2, omega3 = 1.0, 1.0, 1.0, 0.05
    delta2, delta3, nu = optimal_conditions(delta1, omega1, omega2, omega3)
    eta = 0.1
    return Scenario(
        lowers=(
            _level(omega1, delta1, eta / 2, 0.0),
            _level(omega2, delta2, eta / 2, 0.0),
            _level(omega3, delta3, -eta / 2, 1.0),
        ),
        trap=Trap(nu),
        cooling_index=3,
        unit_label="gamma3",
    )


# Triple-EIT: nu2 = 1.5 nu1.  Coupling detunings put transparency zeros on the
# carrier and both blue sidebands; equal coupling strengths place the single
# dressed-state peak above the carrier between the two red sidebands.
FIG2B_NU1 = 0.294
FIG2B_NU_RATIO = 1.5


def _fig2b():
    delta1, nu1 = 1.0, FIG2B_NU1
    nu2 = FIG2B_NU_RATIO * nu1
    eta = 0.1
    return Scenario(
        lowers=(
            _level(1.0, delta1, eta / 2, 0.0),
            _level(1.0, delta1 - nu1, eta / 2, 0.0),
            _level(1.0, delta1 - nu2, eta / 2, 0.0),
            _level(0.05, delta1, -eta / 2, 1.0),
        ),
        trap=Trap(nu1),
        cooling_index=4,
        unit_label="gamma3",
    )


def _calcium(omega1, omega2, omega3):
    eta = 0.145
    nu, delta1, delta2 = 0.1, 2.5, 2.4
    if omega2 is None:
        lowers = (
            _level(omega1, delta1, eta / 2, 0.0),
            _level(omega3, delta1, -eta / 2, 1.0),
        )
    else:
        lowers = (
            _level(omega1, delta1, eta / 2, 0.0),
            _level(omega2, delta2, eta / 2, 0.0),
            _level(omega3, delta1, -eta / 2, 1.0),
        )
    return Scenario(lowers=lowers, trap=Trap(nu), cooling_index=len(lowers), unit_label="gamma3")


def _mercury(omega1, omega2, delta2):
    gamma = 69.0 / 3.0
    nu, omega3, delta1 = 1.5, 4.0, 80.0
    return Scenario(
        lowers=(
            _level(omega1, delta1, 0.13, gamma),
            _level(omega2, delta2, 0.13, gamma),
            _level(omega3, delta1, -0.13, gamma),
        ),
        trap=Trap(nu),
        cooling_index=3,
        unit_label="MHz",
    )


_PRESETS = {
    "fig2a": _fig2a,
    "fig2b": _fig2b,
    "ca-i": lambda: _calcium(1.0, None, 0.1),
    "ca-ii": lambda: _calcium(0.8, 0.8944, 0.1),
    "ca-iii": lambda: _calcium(0.645, 0.645, 0.645),
    "hg-i": lambda: _mercury(21.0, 8.0, 0.0),
    "hg-ii": lambda: _mercury(21.0, 8.0, 78.5),
    # second coupling strength solving the trap-matching condition exactly
    "hg-iii": lambda: _mercury(4.0, math.sqrt(914.0), 78.5),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> Scenario:
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; valid names: {', '.join(PRESET_NAMES)}"
        ) from None
    return builder()
