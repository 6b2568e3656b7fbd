import math
from dataclasses import replace

import numpy as np
import pytest

from entscat.errors import ConfigError, InputDomainError
from entscat.vibwave import (MorseOscillator, VibGridSpec, VibInitialState, build_system, energy_scan,
                             norm_drift, propagate_vib, scan_csv, sinc_dvr_levels, time_reversal_defect)

GRID = VibGridSpec()
INIT = VibInitialState()
BETAS5 = [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi]


def test_dvr_reproduces_morse_levels():
    osc = MorseOscillator()
    e, U = sinc_dvr_levels(osc, np.linspace(0.2, 2.2, 200), 5)
    for v in range(5):
        assert e[v] == pytest.approx(osc.analytic_level(v), rel=1e-8)
    assert np.allclose(U.T @ U, np.eye(5), atol=1e-12)


@pytest.mark.parametrize("kw", [
    dict(R_analysis=30.0), dict(r_min=0.0), dict(n_R=8), dict(v_basis=1), dict(dt=0.0),
])
def test_grid_validation(kw):
    with pytest.raises(ConfigError):
        VibGridSpec(**kw)


def test_initial_state_validation():
    with pytest.raises(InputDomainError):
        VibInitialState(energy=-1.0)
    with pytest.raises(InputDomainError):
        VibInitialState(levels=((0, 2), (0, 2)))


def test_stability_errors_suggest_fixes():
    with pytest.raises(ConfigError, match="dt <="):
        propagate_vib(replace(GRID, dt=5.0), INIT)
    with pytest.raises(ConfigError, match="n_R >="):
        propagate_vib(replace(GRID, n_R=64), INIT)
    with pytest.raises(ConfigError, match="analysis surface"):
        propagate_vib(GRID, replace(INIT, R0=15.0))


def test_coupling_symmetric_and_level_energies():
    sys = build_system(GRID)
    assert np.allclose(sys.coupling, np.transpose(sys.coupling, (0, 2, 1)))
    assert sys.energies[sys.index(0, 2)] == pytest.approx(sys.energies[sys.index(2, 0)])


def test_norm_drift_and_time_reversal():
    assert norm_drift(GRID, INIT, 1000) < 1e-6
    assert time_reversal_defect(GRID, INIT, 500) < 1e-6


@pytest.mark.slow
def test_uncoupled_system_never_populates_11():
    r = propagate_vib(GRID, INIT, coupled=False)
    assert r.probabilities[(1, 1)] == pytest.approx(0.0, abs=1e-12)
    assert r.norm_defect < 1e-3


@pytest.mark.slow
def test_scan_ordering_extremality_and_reuse():
    s = energy_scan(GRID, INIT, [500.0], BETAS5)
    P = s.P[:, 0]
    assert P[0] > P[2] > P[4]
    assert P[0] == P.max() and P[4] == P.min()
    assert np.all(s.norm_defect < 1e-3)
    # the linearity shortcut agrees with a direct propagation
    r = propagate_vib(GRID, replace(INIT, beta=math.pi / 2))
    assert r.probabilities[(1, 1)] == pytest.approx(P[2], rel=1e-8)
    assert r.norm_defect == pytest.approx(s.norm_defect[2, 0], abs=1e-9)
    text = scan_csv(s, timestamp=False)
    assert text == scan_csv(s, timestamp=False)
    assert len(text.splitlines()) == 3 + 5
