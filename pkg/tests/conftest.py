import math

import pytest
from hypothesis import HealthCheck, settings

from entscat.basis import CollisionSpec
from entscat.ccsolve import PropagationConfig, solve
from entscat.pes import default_model
from entscat.tmx import synthesize_unitary

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ELASTIC = ((2, 0, 0), (0, 0, 0))
INELASTIC = ((4, 0, 0), (0, 0, 0))
FINAL_22 = ((2, 0, 0), (2, 0, 0))


def synth_elastic(seed: int, J_max: int = 6, energy: float = 4.0, **kw):
    return synthesize_unitary(CollisionSpec(energy, ELASTIC, 2, 0, J_max), seed, **kw)


def synth_inelastic(seed: int, J_max: int = 6, **kw):
    spec = CollisionSpec(4.0, INELASTIC, 4, 0, J_max, pair_energy_max=1300.0)
    return synthesize_unitary(spec, seed, **kw)


@pytest.fixture(scope="session")
def synth_set():
    return synth_elastic(11)


@pytest.fixture(scope="session")
def synth_set_inelastic():
    return synth_inelastic(5)


@pytest.fixture(scope="session")
def solved_elastic_4():
    """Default model, (2,0) initial pair, 4 cm^-1, J <= 10."""
    spec = CollisionSpec(4.0, ELASTIC, j_max=2, J_max=10)
    return solve(spec, default_model(), PropagationConfig.default_for(4.0))


@pytest.fixture(scope="session")
def solved_inelastic_4():
    """Default model, (4,0) initial pair, 4 cm^-1, j <= 4 with pair energies <= 1300 cm^-1."""
    spec = CollisionSpec(4.0, INELASTIC, j_max=4, J_max=10, pair_energy_max=1300.0)
    return solve(spec, default_model(), PropagationConfig.default_for(4.0))


@pytest.fixture(scope="session")
def solved_elastic_ultracold():
    spec = CollisionSpec(0.04, ELASTIC, j_max=2, J_max=6)
    return solve(spec, default_model(), PropagationConfig.default_for(0.04))


PI = math.pi


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status:<5s} {detail}")
