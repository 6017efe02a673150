"""Physical parameter types and scenario (de)serialization.

All frequencies of a :class:`Scenario` share one unit (``unit_label`` is a
label only).  Wave numbers, the ion mass and hbar never appear: each laser
carries the product ``eta_j * cos(phi_j)`` of its Lamb-Dicke parameter and
the projection of its wave vector on the trap axis.

Level numbering in documents and in :class:`Scenario` is 1-based and follows
the order of ``lowers``; the excited level has no number.  In matrix
representations the lower levels occupy indices ``0 .. M-1`` and the
excited level is index ``M``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from typing import Any, Mapping

from .errors import ConfigError, ValidationError

ANGULAR_PROFILES = ("isotropic", "dipole", "custom")
_PROFILE_MOMENTS = {"isotropic": 1.0 / 3.0, "dipole": 2.0 / 5.0}

DEFAULT_FOCK_CUTOFF = 10
DEFAULT_MEAN_N = 1.0
DEFAULT_PROFILE = "dipole"


@dataclass(frozen=True)
class LaserDrive:
    """One laser on a lower-to-excited transition.

    ``detuning`` is the laser frequency minus the bare transition frequency.
    ``lamb_dicke_projection`` is ``eta_j cos(phi_j)`` and carries a sign.
    """

    rabi: float
    detuning: float
    lamb_dicke_projection: float = 0.0

    def __post_init__(self):
        for name in ("rabi", "detuning", "lamb_dicke_projection"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.rabi < 0:
            raise ValidationError(f"rabi >= 0 violated (rabi = {self.rabi!r})")
        if abs(self.lamb_dicke_projection) >= 1:
            raise ValidationError(
                "|lamb_dicke_projection| < 1 violated "
                f"(value = {self.lamb_dicke_projection!r})"
            )


@dataclass(frozen=True)
class DecayChannel:
    """Spontaneous decay from the excited level into one lower level.

    The emission pattern enters the dynamics only through the photon
    direction distribution along the trap axis; ``angular_second_moment`` is
    the mean of ``cos(theta)**2`` over that distribution.  It is fixed by the
    profile for ``isotropic`` (1/3) and ``dipole`` (2/5) and must be given
    for ``custom``.
    """

    rate: float
    angular_profile: str = DEFAULT_PROFILE
    angular_second_moment: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.rate) or self.rate < 0:
            raise ValidationError(f"rate >= 0 violated (rate = {self.rate!r})")
        if self.angular_profile not in ANGULAR_PROFILES:
            raise ValidationError(
                f"angular_profile must be one of {ANGULAR_PROFILES}, "
                f"got {self.angular_profile!r}"
            )
        alpha = self.angular_second_moment
        if self.angular_profile == "custom":
            if alpha is None:
                raise ValidationError("custom angular_profile requires angular_second_moment")
        else:
            expected = _PROFILE_MOMENTS[self.angular_profile]
            if alpha is None:
                object.__setattr__(self, "angular_second_moment", expected)
            elif not math.isclose(alpha, expected, rel_tol=1e-12):
                raise ValidationError(
                    f"{self.angular_profile} profile implies angular_second_moment = "
                    f"{expected!r}, got {alpha!r}"
                )
        alpha = self.angular_second_moment
        if not (0.0 <= alpha <= 1.0):
            raise ValidationError(f"angular_second_moment in [0, 1] violated ({alpha!r})")


@dataclass(frozen=True)
class Trap:
    frequency: float
    fock_cutoff: int = DEFAULT_FOCK_CUTOFF

    def __post_init__(self):
        if not math.isfinite(self.frequency) or self.frequency <= 0:
            raise ValidationError(f"trap frequency > 0 violated ({self.frequency!r})")
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 2:
            raise ValidationError(f"fock_cutoff >= 2 violated ({self.fock_cutoff!r})")


@dataclass(frozen=True)
class LowerLevel:
    drive: LaserDrive
    decay: DecayChannel


@dataclass(frozen=True)
class Scenario:
    """Complete parameter set for one cooling configuration.

    ``cooling_index`` and ``initial_internal_state`` are 1-based level
    numbers.  The initial internal state defaults to the cooling level.
    """

    lowers: tuple[LowerLevel, ...]
    trap: Trap
    cooling_index: int
    unit_label: str = ""
    initial_mean_n: float = DEFAULT_MEAN_N
    initial_internal_state: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "lowers", tuple(self.lowers))
        m = len(self.lowers)
        if m not in (2, 3, 4):
            raise ValidationError(f"number of lower levels must be 2, 3 or 4, got {m}")
        if not (1 <= self.cooling_index <= m):
            raise ValidationError(f"cooling_index must be in 1..{m}, got {self.cooling_index}")
        if not any(lv.decay.rate > 0 for lv in self.lowers):
            raise ValidationError("at least one decay rate must be > 0 (no steady state otherwise)")
        if not math.isfinite(self.initial_mean_n) or self.initial_mean_n < 0:
            raise ValidationError(f"initial mean_n >= 0 violated ({self.initial_mean_n!r})")
        if self.initial_internal_state is None:
            object.__setattr__(self, "initial_internal_state", self.cooling_index)
        if not (1 <= self.initial_internal_state <= m):
            raise ValidationError(
                f"initial internal_state must be in 1..{m}, got {self.initial_internal_state}"
            )

    # -- structure -------------------------------------------------------
    @property
    def n_lower(self) -> int:
        return len(self.lowers)

    @property
    def dim(self) -> int:
        """Internal Hilbert-space dimension (lower levels plus excited)."""
        return len(self.lowers) + 1

    @property
    def cooling_pos(self) -> int:
        """0-based position of the cooling transition."""
        return self.cooling_index - 1

    @property
    def cooling(self) -> LowerLevel:
        return self.lowers[self.cooling_pos]

    @property
    def coupling_positions(self) -> list[int]:
        """0-based positions of the coupling (non-cooling) lasers, in order."""
        return [i for i in range(self.n_lower) if i != self.cooling_pos]

    @property
    def eta(self) -> float:
        """Effective Lamb-Dicke parameter of the first coupling and cooling lasers."""
        first = self.lowers[self.coupling_positions[0]]
        return first.drive.lamb_dicke_projection - self.cooling.drive.lamb_dicke_projection

    @property
    def total_decay(self) -> float:
        return sum(lv.decay.rate for lv in self.lowers)

    # -- derived scenarios ----------------------------------------------
    def with_drive(self, pos: int, **changes) -> "Scenario":
        """Copy with fields of the laser at 0-based position ``pos`` replaced."""
        lowers = list(self.lowers)
        lv = lowers[pos]
        lowers[pos] = replace(lv, drive=replace(lv.drive, **changes))
        return replace(self, lowers=tuple(lowers))

    def with_decay(self, pos: int, **changes) -> "Scenario":
        lowers = list(self.lowers)
        lv = lowers[pos]
        decay = replace(lv.decay, **changes)
        lowers[pos] = replace(lv, decay=decay)
        return replace(self, lowers=tuple(lowers))

    def with_trap(self, **changes) -> "Scenario":
        return replace(self, trap=replace(self.trap, **changes))

    def with_cooling_detuning(self, detuning: float) -> "Scenario":
        return self.with_drive(self.cooling_pos, detuning=detuning)

    def with_angular_profile(self, profile: str, second_moment: float | None = None) -> "Scenario":
        lowers = tuple(
            replace(lv, decay=DecayChannel(lv.decay.rate, profile, second_moment))
            for lv in self.lowers
        )
        return replace(self, lowers=lowers)

    def scaled(self, factor: float) -> "Scenario":
        """Multiply every frequency (rabi, detuning, decay, trap) by ``factor``."""
        if not factor > 0:
            raise ValidationError("scale factor must be > 0")
        lowers = tuple(
            LowerLevel(
                replace(lv.drive, rabi=lv.drive.rabi * factor, detuning=lv.drive.detuning * factor),
                replace(lv.decay, rate=lv.decay.rate * factor),
            )
            for lv in self.lowers
        )
        return replace(
            self, lowers=lowers, trap=replace(self.trap, frequency=self.trap.frequency * factor)
        )

    def scaled_lamb_dicke(self, factor: float) -> "Scenario":
        lowers = tuple(
            replace(
                lv,
                drive=replace(
                    lv.drive, lamb_dicke_projection=lv.drive.lamb_dicke_projection * factor
                ),
            )
            for lv in self.lowers
        )
        return replace(self, lowers=lowers)


# ---------------------------------------------------------------------------
# Document schema
# ---------------------------------------------------------------------------

_TOP_KEYS = {"unit_label", "trap", "lowers", "cooling_index", "initial"}
_TRAP_KEYS = {"frequency", "fock_cutoff"}
_LOWER_KEYS = {"rabi", "detuning", "lamb_dicke_projection", "decay"}
_DECAY_KEYS = {"rate", "angular_profile", "angular_second_moment"}
_INITIAL_KEYS = {"mean_n", "internal_state"}


def _expect_mapping(value, path):
    if not isinstance(value, Mapping):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    return value


def _check_keys(obj, allowed, required, path):
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{path}.{extra[0]}" if path else extra[0], "unknown field")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{path}.{key}" if path else key, "required field missing")


def _number(obj, key, path, default=None):
    where = f"{path}.{key}" if path else key
    if key not in obj:
        if default is None:
            raise ConfigError(where, "required field missing")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {type(value).__name__}")
    return float(value)


def _integer(obj, key, path, default=None):
    where = f"{path}.{key}" if path else key
    if key not in obj:
        if default is None:
            raise ConfigError(where, "required field missing")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(where, f"expected an integer, got {value!r}")
    return value


def scenario_from_dict(doc: Mapping[str, Any]) -> Scenario:
    """Build a validated :class:`Scenario` from a parsed document."""
    doc = _expect_mapping(doc, "")
    _check_keys(doc, _TOP_KEYS, ("trap", "lowers"), "")

    unit = doc.get("unit_label", "")
    if not isinstance(unit, str):
        raise ConfigError("unit_label", "expected a string")

    trap_doc = _expect_mapping(doc["trap"], "trap")
    _check_keys(trap_doc, _TRAP_KEYS, ("frequency",), "trap")
    trap = Trap(
        frequency=_number(trap_doc, "frequency", "trap"),
        fock_cutoff=_integer(trap_doc, "fock_cutoff", "trap", DEFAULT_FOCK_CUTOFF),
    )

    lowers_doc = doc["lowers"]
    if not isinstance(lowers_doc, list):
        raise ConfigError("lowers", "expected a list")
    lowers = []
    for i, item in enumerate(lowers_doc):
        path = f"lowers[{i}]"
        item = _expect_mapping(item, path)
        _check_keys(item, _LOWER_KEYS, ("rabi", "detuning", "decay"), path)
        decay_doc = _expect_mapping(item["decay"], f"{path}.decay")
        _check_keys(decay_doc, _DECAY_KEYS, ("rate",), f"{path}.decay")
        profile = decay_doc.get("angular_profile", DEFAULT_PROFILE)
        if not isinstance(profile, str):
            raise ConfigError(f"{path}.decay.angular_profile", "expected a string")
        alpha = None
        if "angular_second_moment" in decay_doc:
            alpha = _number(decay_doc, "angular_second_moment", f"{path}.decay")
        try:
            drive = LaserDrive(
                rabi=_number(item, "rabi", path),
                detuning=_number(item, "detuning", path),
                lamb_dicke_projection=_number(item, "lamb_dicke_projection", path, 0.0),
            )
            decay = DecayChannel(
                rate=_number(decay_doc, "rate", f"{path}.decay"),
                angular_profile=profile,
                angular_second_moment=alpha,
            )
        except ValidationError as exc:
            raise ValidationError(f"{path}: {exc}") from None
        lowers.append(LowerLevel(drive, decay))

    m = len(lowers)
    cooling_index = _integer(doc, "cooling_index", "", m if m else 1)
    initial = _expect_mapping(doc.get("initial", {}), "initial")
    _check_keys(initial, _INITIAL_KEYS, (), "initial")
    mean_n = _number(initial, "mean_n", "initial", DEFAULT_MEAN_N)
    internal = _integer(initial, "internal_state", "initial", cooling_index)

    return Scenario(
        lowers=tuple(lowers),
        trap=trap,
        cooling_index=cooling_index,
        unit_label=unit,
        initial_mean_n=mean_n,
        initial_internal_state=internal,
    )


def scenario_to_dict(s: Scenario) -> dict:
    """Inverse of :func:`scenario_from_dict`; every default written explicitly."""
    lowers = []
    for lv in s.lowers:
        decay = {"rate": lv.decay.rate, "angular_profile": lv.decay.angular_profile}
        if lv.decay.angular_profile == "custom":
            decay["angular_second_moment"] = lv.decay.angular_second_moment
        lowers.append(
            {
                "rabi": lv.drive.rabi,
                "detuning": lv.drive.detuning,
                "lamb_dicke_projection": lv.drive.lamb_dicke_projection,
                "decay": decay,
            }
        )
    return {
        "unit_label": s.unit_label,
        "trap": {"frequency": s.trap.frequency, "fock_cutoff": s.trap.fock_cutoff},
        "lowers": lowers,
        "cooling_index": s.cooling_index,
        "initial": {"mean_n": s.initial_mean_n, "internal_state": s.initial_internal_state},
    }


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)


def load_scenario(source) -> Scenario:
    """Load a scenario from a mapping, JSON text, or a path to a JSON file.

    A string whose first non-blank character is ``{`` is parsed as JSON
    text; any other string is treated as a path.
    """
    if isinstance(source, Mapping):
        return scenario_from_dict(source)
    if isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    elif isinstance(source, (str, os.PathLike)):
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("", f"cannot read scenario file {os.fspath(source)!r}: {exc}")
    elif hasattr(source, "read"):
        text = source.read()
    else:
        raise ConfigError("", f"unsupported scenario source {type(source).__name__}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    return scenario_from_dict(doc)
