import warnings

import numpy as np
import pytest

from eitcool import full, rates
from eitcool.errors import NumericalError, ResourceError, ValidationError
from eitcool.internal import build_internal_liouvillian
from eitcool.liouville import Liouvillian
from eitcool.presets import preset
from eitcool.scenario import DecayChannel
from eitcool.spectrum import build_v1


def quiet_initial(s, L):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return full.initial_state(s, L)


def test_phase_operator_unitary_and_small_k():
    n = 10
    for k in (0.0, 0.13, -0.7):
        u = full.phase_operator(k, n)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(n), atol=1e-13)
    a = full.annihilation(n)
    x = a + a.T
    k = 1e-4
    first = (full.phase_operator(k, n) - np.eye(n)) / k
    np.testing.assert_allclose(first, 1j * x, atol=1e-3)


@pytest.mark.parametrize(
    "channel, alpha",
    [
        (DecayChannel(1.0, "isotropic"), 1 / 3),
        (DecayChannel(1.0, "dipole"), 2 / 5),
        (DecayChannel(1.0, "custom", 0.7), 0.7),
    ],
)
def test_angular_nodes_moments(channel, alpha):
    u, w = full.angular_nodes(channel)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.dot(w, u) == pytest.approx(0.0, abs=1e-15)
    assert np.dot(w, u**2) == pytest.approx(alpha, rel=1e-13)


def test_trace_and_hermiticity_preserved(rng):
    s = preset("hg-iii").with_trap(fock_cutoff=6)
    L = full.build_full_liouvillian(s)
    d = L.dim
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = x + x.conj().T
    scale = abs(L.matrix).max() * np.abs(h).max()
    assert abs(np.trace(L.apply(h))) <= 1e-10 * scale
    np.testing.assert_allclose(L.apply(x.conj().T), L.apply(x).conj().T, atol=1e-10 * scale)


def test_factorizes_without_recoil(rng):
    s = preset("ca-iii").scaled_lamb_dicke(0.0).with_trap(fock_cutoff=5)
    L = full.build_full_liouvillian(s)
    Lint = build_internal_liouvillian(s)
    nf = 5
    r_int = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    r_fock = rng.standard_normal((nf, nf)) + 1j * rng.standard_normal((nf, nf))
    hn = s.trap.frequency * np.diag(np.arange(nf))
    trap_part = -1j * (hn @ r_fock - r_fock @ hn)
    expected = np.kron(Lint.apply(r_int), r_fock) + np.kron(r_int, trap_part)
    np.testing.assert_allclose(L.apply(np.kron(r_int, r_fock)), expected, atol=1e-12)


def test_first_order_recoil_matches_v1():
    base = preset("hg-iii").with_trap(fock_cutoff=6)
    eps = 1e-3
    L0 = full.build_full_liouvillian(base.scaled_lamb_dicke(0.0)).dense()
    L1 = full.build_full_liouvillian(base.scaled_lamb_dicke(eps)).dense()
    slope = (L1 - L0) / eps
    nf = 6
    a = full.annihilation(nf)
    h1 = np.kron(build_v1(base), a + a.T)
    m = h1.shape[0]
    expected = -1j * (np.kron(h1, np.eye(m)) - np.kron(np.eye(m), h1.T))
    mask = np.abs(expected) > 1e-12
    rel = np.abs(slope[mask] - expected[mask]) / np.abs(expected[mask])
    assert rel.max() <= 1e-3
    # entries without a first-order term only carry O(eps) curvature
    assert np.abs(slope[~mask]).max() <= 1e-3 * np.abs(expected).max()


def test_resource_limit():
    s = preset("fig2b").with_trap(fock_cutoff=20)
    with pytest.raises(ResourceError, match="fock_cutoff"):
        full.build_full_liouvillian(s)
    assert full.build_full_liouvillian(s, max_dim=100).dim == 100


def test_thermal_state():
    space = full.JointSpace(4, 10)
    rho = full.thermal_state(space, 0.0, 2)
    assert rho[2 * 10, 2 * 10] == 1.0 and np.trace(rho) == 1.0
    with pytest.warns(RuntimeWarning):
        rho = full.thermal_state(space, 1.0, 2)
    n = np.trace(rho @ space.number_operator()).real
    k = np.arange(10)
    assert n == pytest.approx(np.sum(k * 0.5**k) / np.sum(0.5**k), rel=1e-14)
    with pytest.warns(RuntimeWarning, match="cutoff"):
        full.thermal_state(space, 100.0, 0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        full.thermal_state(full.JointSpace(4, 40), 0.3, 0)
    with pytest.raises(ValidationError):
        full.thermal_state(space, -1.0, 0)


def test_motion_decoupled_keeps_mean_n():
    s = preset("ca-ii").scaled_lamb_dicke(0.0)
    L = full.build_full_liouvillian(s)
    trace = full.evolve(L, quiet_initial(s, L), 200.0, n_samples=30, substeps=200)
    np.testing.assert_allclose(trace.mean_n, trace.mean_n[0], atol=1e-8)
    assert np.all((trace.pop_e >= -1e-12) & (trace.pop_e <= 1))
    assert np.all(trace.trace_error <= 1e-6)


def test_evolve_validation_and_drift_error():
    s = preset("ca-i").with_trap(fock_cutoff=4)
    L = full.build_full_liouvillian(s)
    rho0 = quiet_initial(s, L)
    with pytest.raises(ValidationError):
        full.evolve(L, rho0, 0.0)
    with pytest.raises(ValidationError):
        full.evolve(L, rho0[:-1, :-1], 1.0)
    leaky = Liouvillian(L.matrix - 1e-3 * np.eye(L.dim**2), L.dim, L.space)
    with pytest.raises(NumericalError, match="dt"):
        full.evolve(leaky, rho0, 10.0, substeps=10)


def test_sample_steps():
    steps = full.sample_steps(2000, 200)
    assert steps[0] == 0 and steps[-1] == 2000
    assert np.all(np.diff(steps) > 0)
    lin = full.sample_steps(100, 11, "linear")
    np.testing.assert_array_equal(lin, np.arange(0, 101, 10))
    with pytest.raises(ValidationError):
        full.sample_steps(10, 5, "cubic")


def test_steady_state_matches_long_evolution():
    s = preset("ca-iii")
    L = full.build_full_liouvillian(s)
    rho_ss, n_ss = full.steady_state_full(L)
    trace = full.evolve(L, quiet_initial(s, L), 2e4, n_samples=20, substeps=400)
    assert trace.mean_n[-1] == pytest.approx(n_ss, rel=1e-6)
    assert np.abs(L.apply(rho_ss)).max() <= 1e-9


def test_hg_lower_level_decay_is_included():
    s = preset("hg-ii")
    n_all = full.scenario_steady_n(s)
    n_cool_only = full.scenario_steady_n(s.with_decay(0, rate=0.0).with_decay(1, rate=0.0))
    assert n_all != pytest.approx(n_cool_only, rel=1e-3)


def test_fit_cooling_rate_errors():
    t = np.linspace(0, 10, 5)
    trace = full.CoolingTrace(t, np.full(5, 0.1), t, t, t, t, 1.0)
    with pytest.raises(NumericalError):
        full.fit_cooling_rate(trace, 0.5)
    trace = full.CoolingTrace(t, 1 + np.exp(-t), t, t, t, t, 1.0)
    with pytest.raises(NumericalError, match="samples"):
        full.fit_cooling_rate(trace, 1.0)
    t = np.linspace(0, 5, 200)
    trace = full.CoolingTrace(t, 0.2 + 3 * np.exp(-0.7 * t), t, t, t, t, 1.0)
    assert full.fit_cooling_rate(trace, 0.2) == pytest.approx(0.7, rel=1e-10)


def test_csv_header():
    t = np.array([0.0, 1.0])
    trace = full.CoolingTrace(t, t, t, t, t, t, 1.0)
    assert trace.to_csv().splitlines()[0] == "t,mean_n,pop_e,trace_error"


@pytest.mark.slow
def test_ca_i_rate_and_plateau_near_single_eit_theory():
    s = preset("ca-i")
    L = full.build_full_liouvillian(s)
    trace = full.evolve(L, quiet_initial(s, L), 1e5)
    _, n_ss = full.steady_state_full(L)
    fitted = full.fit_cooling_rate(trace, n_ss)
    w, n_theory = rates.cooling_rate_and_limit(rates.rate_coefficients(s))
    assert 0.5 * w <= fitted <= 2 * w
    assert 0.5 * n_theory <= n_ss <= 2 * n_theory


@pytest.mark.slow
def test_small_eta_rate_matches_analytic():
    s = preset("ca-ii").scaled_lamb_dicke(0.25)
    L = full.build_full_liouvillian(s)
    trace = full.evolve(L, quiet_initial(s, L), 5e5)
    _, n_ss = full.steady_state_full(L)
    fitted = full.fit_cooling_rate(trace, n_ss)
    w = rates.rate_coefficients(s).w
    assert fitted == pytest.approx(w, rel=0.25)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["fig2a", "ca-i", "ca-ii", "ca-iii", "hg-i", "hg-ii", "hg-iii"])
def test_quadrature_and_profile_sensitivity(name):
    s = preset(name)
    base = full.scenario_steady_n(s)
    finer = full.scenario_steady_n(s, angular_nodes_count=16)
    assert abs(finer - base) <= 1e-3 * base
    iso = full.scenario_steady_n(s.with_angular_profile("isotropic"))
    assert np.isfinite(iso) and iso > 0
