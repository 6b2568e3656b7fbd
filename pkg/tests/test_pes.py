import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entscat.basis import CollisionSpec, build_channel_basis
from entscat.errors import ConfigError, InputDomainError
from entscat.pes import (ExponentialDispersion, LennardJones, PotentialModel, RadialTerm,
                         TabulatedRadial, angular_factor, collinear_geometry, coupling_matrices,
                         default_model, isotropic_model, load_potential, potential_matrix,
                         save_potential)

import oracles

CASES = [
    ((2, 2, 4, 3), (2, 0, 2, 1), 2, (0, 2, 2)),
    ((2, 2, 2, 2), (2, 2, 0, 2), 2, (2, 0, 2)),
    ((2, 2, 2, 1), (2, 2, 2, 3), 2, (2, 2, 4)),
    ((2, 0, 2, 1), (0, 0, 0, 1), 1, (2, 0, 2)),
    ((0, 2, 2, 3), (2, 2, 2, 1), 2, (2, 0, 2)),
    ((4, 0, 4, 2), (2, 0, 2, 2), 2, (2, 0, 2)),
    ((2, 0, 2, 0), (2, 0, 2, 2), 2, (0, 0, 0)),
]


@pytest.mark.parametrize("bra, ket, J, lam", CASES)
def test_angular_factor_matches_quadrature(bra, ket, J, lam):
    assert angular_factor(bra, ket, J, lam) == pytest.approx(
        oracles.angular_matrix_element(bra, ket, J, lam), abs=1e-12)


@given(st.integers(0, 5))
def test_isotropic_term_is_identity(J):
    spec = CollisionSpec(4.0, ((2, 0, 0), (0, 0, 0)), 2, J_max=J)
    basis = build_channel_basis(spec, J)
    (A,) = coupling_matrices(basis, isotropic_model())
    assert np.allclose(A, np.eye(len(basis)), atol=1e-14)


@given(st.integers(0, 5))
def test_coupling_symmetric_and_parity_conserving(J):
    spec = CollisionSpec(4.0, ((2, 0, 0), (0, 0, 0)), 4, J_max=J, pair_energy_max=1300)
    basis = build_channel_basis(spec, J)
    for A in coupling_matrices(basis, default_model()):
        assert np.array_equal(A, A.T)
        for i, a in enumerate(basis):
            for j, b in enumerate(basis):
                if a.parity != b.parity:
                    assert A[i, j] == 0.0


def test_exchange_symmetric_coupling():
    # <Pa'|V|Pa> = e(a') e(a) <a'|V|a> for an exchange-symmetric model
    spec = CollisionSpec(4.0, ((2, 0, 0), (0, 0, 0)), 2, J_max=3)
    basis = build_channel_basis(spec, 3)
    idx = {c.label: i for i, c in enumerate(basis)}
    W = potential_matrix(3.3, basis, default_model())
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            ea = (-1) ** (a.j1 + a.j2 - a.j12 + a.l)
            eb = (-1) ** (b.j1 + b.j2 - b.j12 + b.l)
            assert W[idx[a.exchanged().label], idx[b.exchanged().label]] == pytest.approx(ea * eb * W[i, j], abs=1e-13)


def test_radial_functions():
    lj = LennardJones(25.5, 2.95)
    assert float(lj(2.95)) == pytest.approx(0.0, abs=1e-12)
    rmin = 2.95 * 2 ** (1 / 6)
    assert float(lj(rmin)) == pytest.approx(-25.5)
    assert float(lj(300.0)) == 0.0
    ed = ExponentialDispersion(1e4, 2.0)
    assert float(ed(1.0)) == pytest.approx(1e4 * math.exp(-2.0))
    R = np.linspace(2, 10, 30)
    tab = TabulatedRadial(R, lj(R))
    assert float(tab(5.0)) == pytest.approx(float(lj(5.0)), rel=1e-3)
    assert float(tab(20.0)) == 0.0


def test_tabulated_rejects_bad_tables():
    with pytest.raises(ConfigError):
        TabulatedRadial([1, 2, 3], [0, 0, 0])
    with pytest.raises(ConfigError):
        TabulatedRadial([1, 3, 2, 4], [0, 0, 0, 0])
    with pytest.raises(ConfigError):
        TabulatedRadial([1, 2, 3, 4], [0, np.nan, 0, 0])


def test_model_validation():
    lj = LennardJones(1.0, 3.0)
    with pytest.raises(InputDomainError):
        PotentialModel((RadialTerm(2, 0, 2, lj),))  # missing (0, 2, 2) partner
    with pytest.raises(InputDomainError):
        PotentialModel((RadialTerm(1, 0, 1, lj), RadialTerm(0, 1, 1, lj)))  # odd with para
    with pytest.raises(InputDomainError):
        PotentialModel((RadialTerm(2, 0, 2, lj), RadialTerm(0, 2, 2, LennardJones(2.0, 3.0))))


def test_potential_file_round_trip(tmp_path):
    m = default_model()
    p = tmp_path / "pot.json"
    save_potential(m, p)
    m2 = load_potential(p)
    assert m2.digest() == m.digest()
    R = np.linspace(2.5, 12, 7)
    geo = collinear_geometry(m)
    assert np.array_equal(m(R, geo), m2(R, geo))
    doc = json.loads(p.read_text())
    doc["schema"] = "entscat-potential/0"
    p.write_text(json.dumps(doc))
    with pytest.raises(ConfigError):
        load_potential(p)


def test_collinear_geometry_values():
    # both axes along R: P2(1) = 1 for each molecule; G_202 = sqrt(5) <2 0 0 0|2 0> = sqrt(5)
    geo = collinear_geometry(default_model())
    assert geo[(0, 0, 0)] == pytest.approx(1.0)
    assert geo[(2, 0, 2)] == pytest.approx(math.sqrt(5))


def test_spherical_average_is_isotropic_term():
    m = default_model()
    R = np.array([3.0, 4.0])
    assert np.array_equal(m(R), m.terms[0].radial(R))
    with pytest.raises(InputDomainError):
        potential_matrix(0.0, [], m)
