import numpy as np
import pytest

from eitcool.scenario import DecayChannel, LaserDrive, LowerLevel, Scenario, Trap

# lines collected by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def tripod(
    omega=(1.0, 1.0, 0.05),
    delta=(1.0, 0.7, 1.0),
    gamma=(0.0, 0.0, 1.0),
    proj=(0.05, 0.05, -0.05),
    nu=0.3,
    cutoff=10,
    profile="dipole",
):
    """Three-level (or M-level) scenario with the cooling laser last."""
    lowers = tuple(
        LowerLevel(LaserDrive(o, d, p), DecayChannel(g, profile))
        for o, d, g, p in zip(omega, delta, gamma, proj)
    )
    return Scenario(lowers=lowers, trap=Trap(nu, cutoff), cooling_index=len(lowers))


def random_optimal_tripod(rng, omega_range=(0.05, 2.0), delta_range=(0.05, 5.0), eta=0.1):
    """Tripod with gamma1 = gamma2 = 0 completed to the optimal conditions."""
    from eitcool.rates import optimal_conditions

    d1 = rng.uniform(*delta_range)
    o1, o2, o3 = rng.uniform(*omega_range, size=3)
    d2, d3, nu = optimal_conditions(d1, o1, o2, o3)
    return tripod((o1, o2, o3), (d1, d2, d3), (0.0, 0.0, 1.0), (eta / 2, eta / 2, -eta / 2), nu)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
