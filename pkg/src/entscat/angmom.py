"""Angular-momentum special functions.

Clebsch-Gordan coefficients, Wigner 3j/6j/9j symbols, normalized associated
Legendre functions and spherical harmonics.  The Condon-Shortley phase is used
everywhere; T-matrix files ingested by :mod:`entscat.tmx` are assumed to share
this convention.

Angular momenta may be given as ints, half-integer floats (``1.5``) or
:class:`fractions.Fraction`; internally everything is converted to twice the
value.  For magnitudes up to ``EXACT_JMAX`` the Racah sums are evaluated with
exact rational arithmetic (Python big integers); above that a log-factorial
float evaluation is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InputDomainError

EXACT_JMAX = 20


@dataclass(frozen=True, order=True)
class HalfInt:
    """Integer or half-integer stored as twice its value."""

    twice: int

    @classmethod
    def of(cls, value) -> "HalfInt":
        return cls(_twice(value))

    @property
    def value(self) -> float:
        return self.twice / 2

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __int__(self) -> int:
        if self.twice % 2:
            raise InputDomainError(f"{self.value} is not an integer")
        return self.twice // 2

    def __repr__(self) -> str:
        if self.twice % 2 == 0:
            return f"HalfInt({self.twice // 2})"
        return f"HalfInt({self.twice}/2)"


def _twice(x) -> int:
    if isinstance(x, HalfInt):
        return x.twice
    if isinstance(x, (int, np.integer)):
        return 2 * int(x)
    t = 2 * Fraction(x).limit_denominator(4) if isinstance(x, float) else 2 * Fraction(x)
    if t.denominator != 1 or abs(float(t) - 2 * float(x)) > 1e-9:
        raise InputDomainError(f"{x!r} is not an integer or half-integer")
    return int(t)


def _check_pair(tj: int, tm: int) -> None:
    if tj < 0:
        raise InputDomainError(f"negative angular momentum {tj / 2}")
    if (tj - tm) % 2:
        raise InputDomainError(f"projection {tm / 2} has wrong parity for j={tj / 2}")


def _triangle(ta: int, tb: int, tc: int) -> bool:
    """Triangle rule on twice-values, including the integer-sum condition."""
    return abs(ta - tb) <= tc <= ta + tb and (ta + tb + tc) % 2 == 0


def triangle(a, b, c) -> bool:
    """True when ``a, b, c`` can couple (|a-b| <= c <= a+b, integer perimeter)."""
    return _triangle(_twice(a), _twice(b), _twice(c))


# ---------------------------------------------------------------------------
# Racah sums on twice-values.  All arguments to the factorials are integers
# once the selection rules hold, so the twice-values are halved exactly.

def _fact(n: int) -> int:
    return math.factorial(n)


def _delta_sq(ta: int, tb: int, tc: int) -> Fraction:
    return Fraction(
        _fact((ta + tb - tc) // 2) * _fact((ta - tb + tc) // 2) * _fact((-ta + tb + tc) // 2),
        _fact((ta + tb + tc) // 2 + 1),
    )


def _lndelta(ta: int, tb: int, tc: int) -> float:
    lg = math.lgamma
    return 0.5 * (lg((ta + tb - tc) // 2 + 1) + lg((ta - tb + tc) // 2 + 1)
                  + lg((-ta + tb + tc) // 2 + 1) - lg((ta + tb + tc) // 2 + 2))


def _three_j_exact(j1, j2, j3, m1, m2, m3) -> float:
    pre = _delta_sq(j1, j2, j3) * (
        _fact((j1 + m1) // 2) * _fact((j1 - m1) // 2) * _fact((j2 + m2) // 2)
        * _fact((j2 - m2) // 2) * _fact((j3 + m3) // 2) * _fact((j3 - m3) // 2))
    kmin = max(0, (j2 - j3 - m1) // 2, (j1 - j3 + m2) // 2)
    kmax = min((j1 + j2 - j3) // 2, (j1 - m1) // 2, (j2 + m2) // 2)
    s = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (_fact(k) * _fact((j3 - j2 + m1) // 2 + k) * _fact((j3 - j1 - m2) // 2 + k)
               * _fact((j1 + j2 - j3) // 2 - k) * _fact((j1 - m1) // 2 - k)
               * _fact((j2 + m2) // 2 - k))
        s += Fraction((-1) ** k, den)
    if s == 0:
        return 0.0
    val = math.sqrt(pre * s * s)
    phase = -1 if ((j1 - j2 - m3) // 2) % 2 else 1
    return phase * (val if s > 0 else -val)


def _three_j_float(j1, j2, j3, m1, m2, m3) -> float:
    lg = math.lgamma
    lpre = _lndelta(j1, j2, j3) + 0.5 * (
        lg((j1 + m1) // 2 + 1) + lg((j1 - m1) // 2 + 1) + lg((j2 + m2) // 2 + 1)
        + lg((j2 - m2) // 2 + 1) + lg((j3 + m3) // 2 + 1) + lg((j3 - m3) // 2 + 1))
    kmin = max(0, (j2 - j3 - m1) // 2, (j1 - j3 + m2) // 2)
    kmax = min((j1 + j2 - j3) // 2, (j1 - m1) // 2, (j2 + m2) // 2)
    terms = []
    for k in range(kmin, kmax + 1):
        lden = (lg(k + 1) + lg((j3 - j2 + m1) // 2 + k + 1) + lg((j3 - j1 - m2) // 2 + k + 1)
                + lg((j1 + j2 - j3) // 2 - k + 1) + lg((j1 - m1) // 2 - k + 1)
                + lg((j2 + m2) // 2 - k + 1))
        terms.append((-1) ** k * math.exp(lpre - lden))
    phase = -1 if ((j1 - j2 - m3) // 2) % 2 else 1
    return phase * math.fsum(terms)


@lru_cache(maxsize=None)
def _three_j_canonical(j1, j2, j3, m1, m2, m3) -> float:
    if max(j1, j2, j3) <= 2 * EXACT_JMAX:
        return _three_j_exact(j1, j2, j3, m1, m2, m3)
    return _three_j_float(j1, j2, j3, m1, m2, m3)


def _three_j_twice(j1, j2, j3, m1, m2, m3) -> float:
    if m1 + m2 + m3 != 0 or not _triangle(j1, j2, j3):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    # Reduce by the classical symmetries so that the cache sees one key per
    # orbit: sort columns by j (odd permutations cost (-1)^(j1+j2+j3)), then
    # make the first nonzero m nonnegative (m -> -m costs the same phase).
    cols = [(j1, m1), (j2, m2), (j3, m3)]
    order = sorted(range(3), key=lambda i: (-cols[i][0], -cols[i][1]))
    odd_perm = _perm_parity(order)
    cols = [cols[i] for i in order]
    flip = False
    for _, m in cols:
        if m != 0:
            flip = m < 0
            break
    if flip:
        cols = [(j, -m) for j, m in cols]
    val = _three_j_canonical(cols[0][0], cols[1][0], cols[2][0], cols[0][1], cols[1][1], cols[2][1])
    big_j_odd = ((j1 + j2 + j3) // 2) % 2 == 1
    if big_j_odd and (odd_perm != flip):
        val = -val
    return val


def _perm_parity(order) -> bool:
    inversions = sum(1 for a in range(3) for b in range(a + 1, 3) if order[a] > order[b])
    return inversions % 2 == 1


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol ``(j1 j2 j3; m1 m2 m3)``; 0 when selection rules fail."""
    t = [_twice(x) for x in (j1, j2, j3, m1, m2, m3)]
    for tj, tm in zip(t[:3], t[3:]):
        _check_pair(tj, tm)
    return _three_j_twice(*t)


def clebsch_gordan(j1, m1, j2, m2, j3, m3) -> float:
    """Clebsch-Gordan coefficient ``<j1 m1 j2 m2 | j3 m3>``."""
    t1, u1, t2, u2, t3, u3 = (_twice(x) for x in (j1, m1, j2, m2, j3, m3))
    for tj, tm in ((t1, u1), (t2, u2), (t3, u3)):
        _check_pair(tj, tm)
    if u1 + u2 != u3:
        return 0.0
    w = _three_j_twice(t1, t2, t3, u1, u2, -u3)
    if w == 0.0:
        return 0.0
    phase = -1 if ((t1 - t2 + u3) // 2) % 2 else 1
    return phase * math.sqrt(t3 + 1) * w


def _six_j_exact(a, b, c, d, e, f) -> float:
    pre = _delta_sq(a, b, c) * _delta_sq(a, e, f) * _delta_sq(d, b, f) * _delta_sq(d, e, c)
    tmin = max(a + b + c, a + e + f, d + b + f, d + e + c) // 2
    tmax = min(a + b + d + e, b + c + e + f, c + a + f + d) // 2
    s = Fraction(0)
    for t in range(tmin, tmax + 1):
        den = (_fact(t - (a + b + c) // 2) * _fact(t - (a + e + f) // 2)
               * _fact(t - (d + b + f) // 2) * _fact(t - (d + e + c) // 2)
               * _fact((a + b + d + e) // 2 - t) * _fact((b + c + e + f) // 2 - t)
               * _fact((c + a + f + d) // 2 - t))
        s += Fraction((-1) ** t * _fact(t + 1), den)
    if s == 0:
        return 0.0
    val = math.sqrt(pre * s * s)
    return val if s > 0 else -val


def _six_j_float(a, b, c, d, e, f) -> float:
    lg = math.lgamma
    lpre = _lndelta(a, b, c) + _lndelta(a, e, f) + _lndelta(d, b, f) + _lndelta(d, e, c)
    tmin = max(a + b + c, a + e + f, d + b + f, d + e + c) // 2
    tmax = min(a + b + d + e, b + c + e + f, c + a + f + d) // 2
    terms = []
    for t in range(tmin, tmax + 1):
        lden = (lg(t - (a + b + c) // 2 + 1) + lg(t - (a + e + f) // 2 + 1)
                + lg(t - (d + b + f) // 2 + 1) + lg(t - (d + e + c) // 2 + 1)
                + lg((a + b + d + e) // 2 - t + 1) + lg((b + c + e + f) // 2 - t + 1)
                + lg((c + a + f + d) // 2 - t + 1))
        terms.append((-1) ** t * math.exp(lpre + lg(t + 2) - lden))
    return math.fsum(terms)


@lru_cache(maxsize=None)
def _six_j_twice(a, b, c, d, e, f) -> float:
    if not (_triangle(a, b, c) and _triangle(a, e, f) and _triangle(d, b, f) and _triangle(d, e, c)):
        return 0.0
    if max(a, b, c, d, e, f) <= 2 * EXACT_JMAX:
        return _six_j_exact(a, b, c, d, e, f)
    return _six_j_float(a, b, c, d, e, f)


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol ``{j1 j2 j3; j4 j5 j6}``."""
    t = [_twice(x) for x in (j1, j2, j3, j4, j5, j6)]
    for x in t:
        _check_pair(x, x)
    return _six_j_twice(*t)


@lru_cache(maxsize=None)
def _nine_j_twice(a, b, c, d, e, f, g, h, i) -> float:
    if not (_triangle(a, b, c) and _triangle(d, e, f) and _triangle(g, h, i)
            and _triangle(a, d, g) and _triangle(b, e, h) and _triangle(c, f, i)):
        return 0.0
    # sum over the intermediate x (twice-valued) of three 6j products
    xmin = max(abs(a - i), abs(d - h), abs(b - f))
    xmax = min(a + i, d + h, b + f)
    terms = []
    for x in range(xmin, xmax + 1, 2):
        w = (_six_j_twice(a, d, g, h, i, x) * _six_j_twice(b, e, h, d, x, f)
             * _six_j_twice(c, f, i, x, a, b))
        if w:
            terms.append((-1 if x % 2 else 1) * (x + 1) * w)
    return math.fsum(terms)


def wigner_9j(j1, j2, j3, j4, j5, j6, j7, j8, j9) -> float:
    """Wigner 9j symbol with rows ``(j1 j2 j3), (j4 j5 j6), (j7 j8 j9)``."""
    t = [_twice(x) for x in (j1, j2, j3, j4, j5, j6, j7, j8, j9)]
    for x in t:
        _check_pair(x, x)
    return _nine_j_twice(*t)


# ---------------------------------------------------------------------------
# Spherical harmonics

def legendre_table(lmax: int, theta) -> np.ndarray:
    """Sphere-normalized associated Legendre functions for ``m >= 0``.

    Returns ``P[l, m, ...]`` such that ``Y_l^m(theta, phi) = P[l, m] exp(i m phi)``,
    including the Condon-Shortley phase.  Entries with ``m > l`` are zero.
    """
    theta = np.asarray(theta, dtype=float)
    x = np.cos(theta)
    s = np.sin(theta)
    out = np.zeros((lmax + 1, lmax + 1) + theta.shape)
    pmm = np.full(theta.shape, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(lmax + 1):
        if m > 0:
            pmm = -math.sqrt((2 * m + 1) / (2.0 * m)) * s * pmm
        out[m, m] = pmm
        if m + 1 <= lmax:
            out[m + 1, m] = math.sqrt(2 * m + 3) * x * pmm
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1) / (l * l - m * m))
            b = math.sqrt(((l - 1) ** 2 - m * m) / (4.0 * (l - 1) ** 2 - 1))
            out[l, m] = a * (x * out[l - 1, m] - b * out[l - 2, m])
    return out


def normalized_legendre(l: int, m: int, theta) -> np.ndarray:
    """``Y_l^m(theta, 0)`` as a real array, any sign of ``m``."""
    if abs(m) > l:
        raise InputDomainError(f"|m|={abs(m)} exceeds l={l}")
    p = legendre_table(l, theta)[l, abs(m)]
    if m < 0 and m % 2:
        p = -p
    return p


def spherical_harmonic(l, m, theta, phi):
    """Spherical harmonic ``Y_l^m(theta, phi)`` (Condon-Shortley phase).

    ``theta`` and ``phi`` may be arrays; they are broadcast together.
    """
    tl, tm = _twice(l), _twice(m)
    if tl % 2 or tm % 2:
        raise InputDomainError("spherical harmonics need integer l and m")
    if tl < 0:
        raise InputDomainError(f"negative l={tl // 2}")
    l, m = tl // 2, tm // 2
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    val = normalized_legendre(l, m, theta) * np.exp(1j * m * phi)
    if val.ndim == 0:
        return complex(val)
    return val
