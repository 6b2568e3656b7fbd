import math

import pytest
from hypothesis import given, strategies as st

from entscat.basis import (CollisionSpec, build_channel_basis, enumerate_levels, format_pair,
                           parse_pair, wavenumber)
from entscat.constants import DEFAULT
from entscat.errors import InputDomainError


def brute_force_count(levels, J):
    n = 0
    for a in levels:
        for b in levels:
            for j12 in range(abs(a.j - b.j), a.j + b.j + 1):
                n += sum(1 for l in range(0, J + j12 + 1) if abs(J - j12) <= l <= J + j12)
    return n


def test_para_levels_and_energies():
    lv = enumerate_levels(4, 1, rotor_constant=60.8, vib_spacing=4161.0)
    assert [(x.j, x.v) for x in lv] == [(0, 0), (2, 0), (4, 0), (0, 1), (2, 1), (4, 1)]
    assert lv[1].energy == pytest.approx(6 * 60.8)
    assert lv[5].energy == pytest.approx(20 * 60.8 + 4161.0)
    assert len(enumerate_levels(3, 0, para_only=False)) == 4
    assert enumerate_levels(2, 0, rotor_constant=59.3)[1].energy == pytest.approx(355.8)
    assert [(x.j, x.energy) for x in enumerate_levels(0, 0)] == [(0, 0.0)]


@given(st.integers(0, 6), st.sampled_from([2, 4]))
def test_channel_count_matches_brute_force(J, j_max):
    spec = CollisionSpec(4.0, ((2, 0, 0), (0, 0, 0)), j_max, J_max=J)
    basis = build_channel_basis(spec, J)
    assert len(basis) == brute_force_count(spec.levels(), J)
    assert len({c.label for c in basis}) == len(basis)
    # exchange closure: every channel's partner is in the basis
    labels = {c.label for c in basis}
    assert all(c.exchanged().label in labels for c in basis)


def test_channel_ordering_and_open_flags():
    spec = CollisionSpec(4.0, ((2, 0, 0), (0, 0, 0)), 2, J_max=3)
    basis = build_channel_basis(spec, 3)
    energies = [c.energy for c in basis]
    assert energies == sorted(energies)
    for c in basis:
        assert c.is_open == (c.energy <= spec.total_energy)
    closed = [c for c in basis if not c.is_open]
    assert closed and all(c.pair == (2, 0, 2, 0) for c in closed)


def test_pair_energy_cut_is_exchange_symmetric():
    spec = CollisionSpec(4.0, ((4, 0, 0), (0, 0, 0)), 4, J_max=2, pair_energy_max=1300.0)
    pairs = {c.pair for c in build_channel_basis(spec, 2)}
    assert (4, 0, 0, 0) in pairs and (0, 0, 4, 0) in pairs
    assert (4, 0, 2, 0) not in pairs and (2, 0, 4, 0) not in pairs  # 1580 cm^-1


def test_wavenumber():
    mu = DEFAULT.mu_H2_H2
    k, is_open = wavenumber(4.0, 0.0, mu)
    assert is_open and k == pytest.approx(math.sqrt(mu * 4.0 / DEFAULT.hbar2_over_2amuA2_cm1))
    k, is_open = wavenumber(4.0, 10.0, mu)
    assert not is_open and k > 0
    assert wavenumber(4.0, 4.0, mu) == (0.0, True)
    with pytest.raises(InputDomainError):
        wavenumber(1.0, 0.0, 0.0)


@pytest.mark.parametrize("kw", [
    dict(collision_energy=0.0, initial=((2, 0, 0), (0, 0, 0)), j_max=2),
    dict(collision_energy=1.0, initial=((2, 0, 0), (2, 0, 0)), j_max=2),
    dict(collision_energy=1.0, initial=((4, 0, 0), (0, 0, 0)), j_max=2),
    dict(collision_energy=1.0, initial=((1, 0, 0), (0, 0, 0)), j_max=2),
])
def test_collision_spec_rejects(kw):
    with pytest.raises(InputDomainError):
        CollisionSpec(**kw)


def test_total_energy():
    spec = CollisionSpec(4.0, ((2, 0, 0), (0, 0, 0)), 2)
    assert spec.total_energy == pytest.approx(4.0 + 6 * DEFAULT.B_cm1)


@given(st.tuples(*[st.integers(0, 9)] * 6))
def test_pair_text_round_trip(x):
    pair = (x[:3], x[3:])
    assert parse_pair(format_pair(pair)) == pair


@pytest.mark.parametrize("text", ["2,0,0", "2,0/0,0,0", "a,b,c/0,0,0"])
def test_parse_pair_rejects(text):
    with pytest.raises(InputDomainError):
        parse_pair(text)
