import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entscat.angmom import (HalfInt, clebsch_gordan, legendre_table, normalized_legendre,
                            spherical_harmonic, triangle, wigner_3j, wigner_6j, wigner_9j)
from entscat.errors import InputDomainError

import oracles


@st.composite
def cg_args(draw, jmax=6, half=True):
    j1 = draw(st.integers(0, 2 * jmax)) * Fraction(1, 2) if half else draw(st.integers(0, jmax))
    j2 = draw(st.integers(0, 2 * jmax)) * Fraction(1, 2) if half else draw(st.integers(0, jmax))
    j = abs(j1 - j2) + draw(st.integers(0, int(j1 + j2 - abs(j1 - j2))))
    m1 = -j1 + draw(st.integers(0, int(2 * j1)))
    m2 = -j2 + draw(st.integers(0, int(2 * j2)))
    return j1, m1, j2, m2, j, m1 + m2


@given(cg_args())
def test_clebsch_gordan_matches_sympy(a):
    j1, m1, j2, m2, j, m = a
    if abs(m) > j:
        assert clebsch_gordan(j1, m1, j2, m2, j, m) == 0.0
        return
    assert clebsch_gordan(j1, m1, j2, m2, j, m) == pytest.approx(oracles.cg(j1, m1, j2, m2, j, m), abs=1e-14)


@given(cg_args(jmax=5, half=False))
def test_three_j_symmetries(a):
    j1, m1, j2, m2, j3, m = a
    m3 = -m
    if abs(m3) > j3:
        return
    w = wigner_3j(j1, j2, j3, m1, m2, m3)
    sgn = (-1) ** int(j1 + j2 + j3)
    assert wigner_3j(j2, j3, j1, m2, m3, m1) == pytest.approx(w, abs=1e-15)  # cyclic
    assert wigner_3j(j2, j1, j3, m2, m1, m3) == pytest.approx(sgn * w, abs=1e-15)  # odd permutation
    assert wigner_3j(j1, j2, j3, -m1, -m2, -m3) == pytest.approx(sgn * w, abs=1e-15)
    assert w == pytest.approx(oracles.three_j(j1, j2, j3, m1, m2, m3), abs=1e-14)


@given(st.integers(0, 4), st.integers(0, 4))
def test_clebsch_gordan_orthogonality(j1, j2):
    # sum_{m1 m2} <j1 m1 j2 m2|J M><j1 m1 j2 m2|J' M'> = delta delta
    Js = range(abs(j1 - j2), j1 + j2 + 1)
    for J in Js:
        for Jp in Js:
            for M in range(-J, J + 1):
                s = math.fsum(clebsch_gordan(j1, m1, j2, M - m1, J, M) * clebsch_gordan(j1, m1, j2, M - m1, Jp, M)
                              for m1 in range(-j1, j1 + 1) if abs(M - m1) <= j2)
                assert s == pytest.approx(1.0 if J == Jp else 0.0, abs=1e-13)


@pytest.mark.parametrize("args", [
    (1, 1, 1, 1, 1, 1), (2, 2, 2, 2, 2, 2), (1.5, 1, 0.5, 1, 1.5, 2), (4, 2, 2, 2, 4, 3),
    (3, 3, 2, 4, 1, 3), (6, 4, 2, 3, 5, 7),
])
def test_six_j_matches_sympy(args):
    assert wigner_6j(*args) == pytest.approx(oracles.six_j(*args), abs=1e-14)


@pytest.mark.parametrize("args", [
    (1, 1, 0, 1, 1, 0, 0, 0, 0), (2, 2, 2, 2, 2, 2, 2, 2, 2), (2, 0, 2, 2, 2, 2, 2, 2, 2),
    (2, 2, 4, 2, 0, 2, 2, 2, 2), (0.5, 0.5, 1, 0.5, 0.5, 1, 1, 1, 2),
])
def test_nine_j_matches_sympy(args):
    assert wigner_9j(*args) == pytest.approx(oracles.nine_j(*args), abs=1e-14)


def test_six_j_orthogonality():
    a, b, d, e = 2, 3, 2, 3
    for f in range(0, 6):
        for fp in range(0, 6):
            s = math.fsum((2 * c + 1) * (2 * f + 1) * wigner_6j(a, b, c, d, e, f) * wigner_6j(a, b, c, d, e, fp)
                          for c in range(0, 6))
            ok = triangle(a, e, f) and triangle(d, b, f)
            assert s == pytest.approx(1.0 if (f == fp and ok) else 0.0, abs=1e-13)


def test_large_j_float_path_agrees_with_exact():
    # j above the exact threshold uses log-factorials
    assert wigner_3j(25, 24, 3, 1, -2, 1) == pytest.approx(oracles.three_j(25, 24, 3, 1, -2, 1), rel=1e-11)
    assert wigner_6j(22, 21, 3, 20, 21, 2) == pytest.approx(oracles.six_j(22, 21, 3, 20, 21, 2), rel=1e-10)


def test_selection_rules_and_errors():
    assert clebsch_gordan(1, 0, 1, 0, 1, 0) == 0.0
    assert wigner_3j(1, 1, 3, 0, 0, 0) == 0.0
    assert not triangle(1, 1, 3)
    with pytest.raises(InputDomainError):
        clebsch_gordan(1, 0.5, 1, 0, 1, 0)
    with pytest.raises(InputDomainError):
        wigner_6j(-1, 1, 1, 1, 1, 1)
    with pytest.raises(InputDomainError):
        HalfInt.of(0.3)
    assert HalfInt.of(1.5).twice == 3 and not HalfInt.of(1.5).is_integer
    assert int(HalfInt.of(2)) == 2


@given(st.integers(0, 8), st.data())
def test_spherical_harmonic_matches_scipy(l, data):
    m = data.draw(st.integers(-l, l))
    th = data.draw(st.floats(0, math.pi))
    ph = data.draw(st.floats(0, 2 * math.pi))
    assert spherical_harmonic(l, m, th, ph) == pytest.approx(complex(oracles.ylm(l, m, th, ph)), abs=1e-12)


def test_legendre_table_normalization():
    x, w = np.polynomial.legendre.leggauss(40)
    P = legendre_table(10, np.arccos(x))
    for l in range(11):
        for lp in range(11):
            for m in range(min(l, lp) + 1):
                s = 2 * math.pi * np.dot(w, P[l, m] * P[lp, m])
                assert s == pytest.approx(1.0 if l == lp else 0.0, abs=1e-12)
    assert normalized_legendre(3, -1, 0.4) == pytest.approx(-legendre_table(3, 0.4)[3, 1])
    with pytest.raises(InputDomainError):
        normalized_legendre(2, 3, 0.1)
