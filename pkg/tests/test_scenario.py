import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eitcool import rates
from eitcool.errors import ConfigError, UnknownPresetError, ValidationError
from eitcool.internal import absorption_sweep, find_spectrum_features
from eitcool.presets import PRESET_NAMES, preset
from eitcool.scenario import (
    DecayChannel,
    LaserDrive,
    Trap,
    dump_scenario,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)


def minimal_doc():
    return {
        "trap": {"frequency": 0.1},
        "lowers": [
            {"rabi": 1.0, "detuning": 2.5, "lamb_dicke_projection": 0.07, "decay": {"rate": 0.0}},
            {"rabi": 0.1, "detuning": 2.5, "lamb_dicke_projection": -0.07, "decay": {"rate": 1.0}},
        ],
    }


def test_minimal_document_defaults():
    s = load_scenario(minimal_doc())
    assert s.n_lower == 2
    assert s.trap.fock_cutoff == 10
    assert s.initial_mean_n == 1.0
    assert s.cooling_index == 2
    assert s.initial_internal_state == 2
    assert all(lv.decay.angular_profile == "dipole" for lv in s.lowers)
    assert s.lowers[0].decay.angular_second_moment == pytest.approx(0.4)


def test_negative_rabi_names_invariant():
    doc = minimal_doc()
    doc["lowers"][1]["rabi"] = -0.1
    with pytest.raises(ValidationError, match="rabi >= 0"):
        load_scenario(doc)


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d["trap"].pop("frequency"), "trap.frequency"),
        (lambda d: d["lowers"][0]["decay"].update(rate="fast"), "lowers[0].decay.rate"),
        (lambda d: d.update(colour="red"), "colour"),
        (lambda d: d["lowers"][1].pop("detuning"), "lowers[1].detuning"),
        (lambda d: d.update(lowers={}), "lowers"),
        (lambda d: d.update(initial={"mean_n": "hot"}), "initial.mean_n"),
    ],
)
def test_schema_errors_carry_field_path(mutate, path):
    doc = minimal_doc()
    mutate(doc)
    with pytest.raises(ConfigError) as info:
        load_scenario(doc)
    assert info.value.path == path


def test_invariant_errors():
    with pytest.raises(ValidationError):
        Trap(0.0)
    with pytest.raises(ValidationError):
        Trap(1.0, fock_cutoff=1)
    with pytest.raises(ValidationError):
        LaserDrive(1.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        DecayChannel(1.0, "custom")
    with pytest.raises(ValidationError):
        DecayChannel(1.0, "custom", 1.5)
    with pytest.raises(ValidationError):
        DecayChannel(1.0, "isotropic", 0.4)
    assert DecayChannel(1.0, "isotropic").angular_second_moment == pytest.approx(1 / 3)
    doc = minimal_doc()
    doc["lowers"][1]["decay"]["rate"] = 0.0
    with pytest.raises(ValidationError, match="decay rate"):
        load_scenario(doc)
    doc = minimal_doc()
    doc["cooling_index"] = 3
    with pytest.raises(ValidationError):
        load_scenario(doc)


def test_load_from_text_path_and_stream(tmp_path):
    s = load_scenario(minimal_doc())
    text = dump_scenario(s)
    path = tmp_path / "s.json"
    path.write_text(text)
    assert load_scenario(text) == s
    assert load_scenario(str(path)) == s
    assert load_scenario(path) == s
    assert load_scenario(io.StringIO(text)) == s
    with pytest.raises(ConfigError):
        load_scenario(str(tmp_path / "missing.json"))
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_scenario("{not json")


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_round_trip_and_validate(name):
    s = preset(name)
    assert load_scenario(dump_scenario(s)) == s
    json.loads(dump_scenario(s))


def test_unknown_preset_lists_names():
    with pytest.raises(UnknownPresetError) as info:
        preset("fig9")
    for name in PRESET_NAMES:
        assert name in str(info.value)


def test_preset_values():
    s = preset("fig2a")
    assert [lv.drive.rabi for lv in s.lowers] == [1.0, 1.0, 0.05]
    assert s.lowers[0].drive.detuning == 1.0
    assert s.trap.frequency == pytest.approx(0.2909645, abs=1e-6)
    assert s.lowers[1].drive.detuning == pytest.approx(1.0 - s.trap.frequency)
    assert s.lowers[2].drive.detuning == 1.0
    assert s.cooling.decay.rate == 1.0

    s = preset("ca-ii")
    assert s.trap.frequency == 0.1
    assert [lv.drive.detuning for lv in s.lowers] == [2.5, 2.4, 2.5]
    assert [lv.drive.rabi for lv in s.lowers] == [0.8, 0.8944, 0.1]
    assert s.eta == pytest.approx(0.145)

    s = preset("hg-iii")
    assert [lv.decay.rate for lv in s.lowers] == pytest.approx([23.0] * 3)
    assert s.trap.frequency == 1.5
    assert [lv.drive.detuning for lv in s.lowers] == [80.0, 78.5, 80.0]
    assert s.lowers[1].drive.rabi == pytest.approx(30.2324, abs=1e-4)
    assert [lv.drive.lamb_dicke_projection for lv in s.lowers] == [0.13, 0.13, -0.13]

    assert preset("ca-i").n_lower == 2
    assert preset("fig2b").n_lower == 4


finite = st.floats(min_value=0.01, max_value=10.0, allow_nan=False)
projection = st.floats(min_value=-0.5, max_value=0.5, allow_nan=False)


@st.composite
def documents(draw):
    m = draw(st.integers(2, 4))
    lowers = []
    for _ in range(m):
        profile = draw(st.sampled_from(["isotropic", "dipole", "custom"]))
        decay = {"rate": draw(finite), "angular_profile": profile}
        if profile == "custom":
            decay["angular_second_moment"] = draw(st.floats(0.0, 1.0))
        lowers.append(
            {
                "rabi": draw(finite),
                "detuning": draw(st.floats(-10, 10, allow_nan=False)),
                "lamb_dicke_projection": draw(projection),
                "decay": decay,
            }
        )
    cooling = draw(st.integers(1, m))
    return {
        "unit_label": draw(st.sampled_from(["", "gamma3", "MHz"])),
        "trap": {"frequency": draw(finite), "fock_cutoff": draw(st.integers(2, 20))},
        "lowers": lowers,
        "cooling_index": cooling,
        "initial": {"mean_n": draw(st.floats(0, 5)), "internal_state": draw(st.integers(1, m))},
    }


@given(documents())
@settings(max_examples=60, deadline=None)
def test_round_trip_property(doc):
    s = load_scenario(doc)
    again = load_scenario(dump_scenario(s))
    assert again == s
    assert scenario_to_dict(again) == scenario_to_dict(s)
    assert scenario_from_dict(json.loads(json.dumps(doc))) == s


@given(st.floats(min_value=0.1, max_value=20.0))
@settings(max_examples=20, deadline=None)
def test_unit_invariance(factor):
    base = preset("ca-ii")
    s = base.scaled(factor)
    r0, r1 = rates.rate_coefficients(base), rates.rate_coefficients(s)
    assert r1.a_minus / s.cooling.decay.rate == pytest.approx(r0.a_minus, rel=1e-10)
    assert rates.trap_matched_residual(s) == pytest.approx(rates.trap_matched_residual(base), abs=1e-12)
    _, n0 = rates.cooling_rate_and_limit(rates.rate_coefficients(preset("ca-i")))
    _, n1 = rates.cooling_rate_and_limit(rates.rate_coefficients(preset("ca-i").scaled(factor)))
    assert n1 == pytest.approx(n0, rel=1e-10)


def test_spectrum_zeros_scale_with_units():
    base = preset("fig2a")
    nu = base.trap.frequency
    ref = find_spectrum_features(absorption_sweep(base, 1 - 2 * nu, 1 + 2 * nu, 201)).zeros
    for factor in (0.5, 3.0):
        s = base.scaled(factor)
        zeros = find_spectrum_features(
            absorption_sweep(s, factor * (1 - 2 * nu), factor * (1 + 2 * nu), 201)
        ).zeros
        np.testing.assert_allclose(np.array(zeros) / factor, ref, atol=1e-9)


def test_derived_accessors():
    s = preset("fig2b")
    assert s.cooling_pos == 3
    assert s.coupling_positions == [0, 1, 2]
    assert s.dim == 5
    assert math.isclose(s.eta, 0.1)
    assert s.with_cooling_detuning(0.3).cooling.drive.detuning == 0.3
    assert s.scaled_lamb_dicke(2.0).eta == pytest.approx(0.2)
    with pytest.raises(ValidationError):
        s.scaled(-1.0)
