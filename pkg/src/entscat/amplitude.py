"""Scattering amplitudes for identical diatoms from T-matrix elements.

For fixed initial projections ``m1, m2`` (quantized along the incident
direction) and final projections ``m1', m2'`` every amplitude here has the form

    f(theta, phi) = sum_{l'} c_{l'} Y_{l'}^{m'}(theta, phi),   m' = m1 + m2 - m1' - m2',

so each route first builds the coefficient table ``c_{l'}`` (independent of
angle) and then evaluates it on a grid.  Coefficients are accumulated per l'
with exactly rounded sums (``math.fsum`` on real and imaginary parts), since
strongly suppressed amplitudes cancel heavily.

Routes:

* ``unsym``: distinguishable-molecule amplitude, optionally with the incident
  direction reversed (a factor (-1)^l) and/or the initial labels exchanged.
* ``pm``: incoming-symmetrized ``+``/``-`` amplitude with the partial-wave
  parity factor [1 +- (-1)^l] applied term by term.
* ``outgoing``: outgoing-symmetrized ``+``/``-`` amplitude (exchanged final
  labels evaluated at -R, i.e. a factor (-1)^l').
* ``reduced``: closed form for the (4,0) -> (2,2) transition with m1 = m2 = 0,
  valid when T(a'|a) = (-1)^j12' T(a'|Pa) holds.

All amplitudes carry the prefactor ``i sqrt(pi) / sqrt(k k')`` with ``T = 1 - S``.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .angmom import clebsch_gordan, normalized_legendre
from .entangle import EntangledPairState, pm_basis_coefficients
from .errors import InputDomainError, InvariantError, MissingTMatrixError
from .tmx import TMatrixSet, check_exchange_relation

Level = tuple[int, int, int]  # (j, m, v)


@dataclass(frozen=True)
class TransitionSpec:
    """Initial pair ``(a, b)`` and final pair ``(a', b')`` of (j, m, v) levels."""

    initial: tuple[Level, Level]
    final: tuple[Level, Level]
    k: float
    k_final: float

    def __post_init__(self):
        object.__setattr__(self, "initial", tuple(tuple(x) for x in self.initial))
        object.__setattr__(self, "final", tuple(tuple(x) for x in self.final))
        for j, m, v in self.initial + self.final:
            if j < 0 or v < 0 or abs(m) > j:
                raise InputDomainError(f"invalid level (j={j}, m={m}, v={v})")
        if not (self.k > 0 and self.k_final > 0):
            raise InputDomainError("initial and final wavenumbers must be positive (final channel open)")

    @classmethod
    def build(cls, tset: TMatrixSet, initial, final) -> "TransitionSpec":
        """Wavenumbers from the level energies stored with ``tset``."""
        (ja, _, va), (jb, _, vb) = initial
        (jc, _, vc), (jd, _, vd) = final
        k, open_i = tset.wavenumber(ja, va, jb, vb)
        kf, open_f = tset.wavenumber(jc, vc, jd, vd)
        if not open_i or k == 0:
            raise InputDomainError("initial channel is not open")
        if not open_f or kf == 0:
            raise InputDomainError(f"final channel (j1'={jc}, v1'={vc}, j2'={jd}, v2'={vd}) is closed")
        return cls(initial, final, k, kf)

    @property
    def m_prime(self) -> int:
        (_, ma, _), (_, mb, _) = self.initial
        (_, mc, _), (_, md, _) = self.final
        return ma + mb - mc - md

    def with_final_m(self, m1p: int, m2p: int) -> "TransitionSpec":
        (jc, _, vc), (jd, _, vd) = self.final
        return TransitionSpec(self.initial, ((jc, m1p, vc), (jd, m2p, vd)), self.k, self.k_final)

    def final_m_pairs(self) -> list[tuple[int, int]]:
        (jc, _, _), (jd, _, _) = self.final
        return [(a, b) for a in range(-jc, jc + 1) for b in range(-jd, jd + 1)]


@dataclass
class AngularCoefficients:
    """``f = sum_l' c[l'] Y_l'^m'``."""

    m: int
    c: dict = field(default_factory=dict)

    def __add__(self, other: "AngularCoefficients") -> "AngularCoefficients":
        if self.m != other.m:
            raise InputDomainError("cannot add amplitudes with different m'")
        out = dict(self.c)
        for l, v in other.c.items():
            out[l] = out.get(l, 0j) + v
        return AngularCoefficients(self.m, out)

    def scaled(self, s: complex) -> "AngularCoefficients":
        return AngularCoefficients(self.m, {l: s * v for l, v in self.c.items()})

    @property
    def lmax(self) -> int:
        return max(self.c, default=0)

    def norm2(self) -> float:
        """Integral of ``|f|^2`` over the unit sphere."""
        return math.fsum(abs(v) ** 2 for v in self.c.values())

    def theta_profile(self, theta) -> np.ndarray:
        """``f(theta, phi=0)``; the phi dependence is ``exp(i m' phi)``."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        for l in sorted(self.c):
            if abs(self.m) <= l:
                out += self.c[l] * normalized_legendre(l, self.m, theta)
        return out

    def evaluate(self, theta, phi) -> np.ndarray:
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        return self.theta_profile(theta) * np.exp(1j * self.m * phi)


class _Accumulator:
    """Per-l' exactly rounded complex sums."""

    def __init__(self):
        self.re = defaultdict(list)
        self.im = defaultdict(list)

    def add(self, l: int, z: complex) -> None:
        if z != 0:
            self.re[l].append(z.real)
            self.im[l].append(z.imag)

    def result(self, m: int, scale: complex) -> AngularCoefficients:
        return AngularCoefficients(m, {l: scale * complex(math.fsum(self.re[l]), math.fsum(self.im[l]))
                                       for l in sorted(self.re)})


def _prefactor(spec: TransitionSpec) -> complex:
    return 1j * math.sqrt(math.pi) / math.sqrt(spec.k * spec.k_final)


_I_POW = (1, 1j, -1, -1j)


def _ipow(n: int) -> complex:
    return _I_POW[n % 4]


class _TLookup:
    """T lookup that records missing keys instead of raising immediately."""

    def __init__(self, tset: TMatrixSet):
        self.tset = tset
        self.missing = []

    def __call__(self, J, bra, ket) -> complex:
        if self.tset.has(J, bra, ket):
            return self.tset.blocks[J].get(bra, ket)
        self.missing.append((J, bra, ket))
        return 0j

    def check(self):
        if self.missing:
            raise MissingTMatrixError(sorted(set(self.missing)))


def _terms(tset: TMatrixSet, spec: TransitionSpec, l_filter: Callable[[int], bool] | None):
    """Yield the shared angular factors of every term in the partial-wave sum.

    Yields ``(J, l, j12, lp, j12p, w)`` with
    ``w = sqrt(2l+1) i^(l-l') C^{JM}_{l' m' j12' m12'} C^{JM}_{l 0 j12 M}``.
    """
    (ja, ma, _), (jb, mb, _) = spec.initial
    (jc, mc, _), (jd, md, _) = spec.final
    M = ma + mb
    m12p = mc + md
    mp = M - m12p
    for J in tset.J_values:
        if J < abs(M):
            continue
        for j12 in range(max(abs(ja - jb), abs(M)), ja + jb + 1):
            for l in range(abs(J - j12), J + j12 + 1):
                if l_filter is not None and not l_filter(l):
                    continue
                cg_in = clebsch_gordan(l, 0, j12, M, J, M)
                if cg_in == 0:
                    continue
                for j12p in range(max(abs(jc - jd), abs(m12p)), jc + jd + 1):
                    for lp in range(max(abs(J - j12p), abs(mp)), J + j12p + 1):
                        cg_out = clebsch_gordan(lp, mp, j12p, m12p, J, M)
                        if cg_out == 0:
                            continue
                        yield J, l, j12, lp, j12p, math.sqrt(2 * l + 1) * _ipow(l - lp) * cg_out * cg_in


def _pair_cg(j12: int, pair: tuple[Level, Level]) -> float:
    (j1, m1, _), (j2, m2, _) = pair
    return clebsch_gordan(j1, m1, j2, m2, j12, m1 + m2)


def _label(pair: tuple[Level, Level], j12: int, l: int) -> tuple:
    (j1, _, v1), (j2, _, v2) = pair
    return (j1, v1, j2, v2, j12, l)


def _swap(pair):
    return (pair[1], pair[0])


def unsym_coefficients(tset: TMatrixSet, spec: TransitionSpec, reversed_z: bool = False,
                       exchanged_initial: bool = False, reversed_R: bool = False,
                       exchanged_final: bool = False,
                       l_filter: Callable[[int], bool] | None = None) -> AngularCoefficients:
    """Coefficients of one distinguishable-molecule amplitude.

    ``reversed_z`` multiplies each term by (-1)^l (incidence along -z);
    ``exchanged_initial`` swaps the initial labels in both the coupling
    coefficient and the T ket; ``reversed_R`` and ``exchanged_final`` do the
    same for the outgoing side ((-1)^l' and swapped final labels).
    """
    ini = _swap(spec.initial) if exchanged_initial else spec.initial
    fin = _swap(spec.final) if exchanged_final else spec.final
    T = _TLookup(tset)
    acc = _Accumulator()
    for J, l, j12, lp, j12p, w in _terms(tset, spec, l_filter):
        c_in, c_out = _pair_cg(j12, ini), _pair_cg(j12p, fin)
        if c_in == 0 or c_out == 0:
            continue
        sgn = (-1) ** l if reversed_z else 1
        if reversed_R:
            sgn *= (-1) ** lp
        acc.add(lp, sgn * w * c_in * c_out * T(J, _label(fin, j12p, lp), _label(ini, j12, l)))
    T.check()
    return acc.result(spec.m_prime, _prefactor(spec))


def pm_coefficients(tset: TMatrixSet, spec: TransitionSpec, sign: int,
                    l_filter: Callable[[int], bool] | None = None) -> AngularCoefficients:
    """Incoming-symmetrized amplitude for the ``+`` (sign=+1) or ``-`` (sign=-1) state."""
    if sign not in (1, -1):
        raise InputDomainError("sign must be +1 or -1")
    ini, ini_x = spec.initial, _swap(spec.initial)
    T = _TLookup(tset)
    acc = _Accumulator()
    for J, l, j12, lp, j12p, w in _terms(tset, spec, l_filter):
        parity = 1 + sign * (-1) ** l
        if parity == 0:
            continue
        c_out = _pair_cg(j12p, spec.final)
        if c_out == 0:
            continue
        bra = _label(spec.final, j12p, lp)
        c12, c21 = _pair_cg(j12, ini), _pair_cg(j12, ini_x)
        inner = 0j
        if c12:
            inner += c12 * T(J, bra, _label(ini, j12, l))
        if c21:
            inner += sign * c21 * T(J, bra, _label(ini_x, j12, l))
        acc.add(lp, w * c_out * parity * inner)
    T.check()
    return acc.result(spec.m_prime, _prefactor(spec) / math.sqrt(2))


def outgoing_coefficients(tset: TMatrixSet, spec: TransitionSpec, sign: int) -> AngularCoefficients:
    """Outgoing-symmetrized ``+``/``-`` amplitude.

    Four terms: initial order (a b) or (b a), the latter weighted by ``sign``,
    times final order (a' b') at R or (b' a') at -R, the two final orders added
    with a plus sign.
    """
    if sign not in (1, -1):
        raise InputDomainError("sign must be +1 or -1")
    ini, ini_x = spec.initial, _swap(spec.initial)
    fin, fin_x = spec.final, _swap(spec.final)
    T = _TLookup(tset)
    acc = _Accumulator()
    for J, l, j12, lp, j12p, w in _terms(tset, spec, None):
        cf, cfx = _pair_cg(j12p, fin), _pair_cg(j12p, fin_x)
        ci, cix = _pair_cg(j12, ini), _pair_cg(j12, ini_x)
        inv = (-1) ** lp
        total = 0j
        for c_in, pair_in, s_in in ((ci, ini, 1), (cix, ini_x, sign)):
            if c_in == 0:
                continue
            ket = _label(pair_in, j12, l)
            part = 0j
            if cf:
                part += cf * T(J, _label(fin, j12p, lp), ket)
            if cfx:
                part += cfx * inv * T(J, _label(fin_x, j12p, lp), ket)
            total += s_in * c_in * part
        acc.add(lp, w * total)
    T.check()
    return acc.result(spec.m_prime, _prefactor(spec) / math.sqrt(2))


REDUCED_INITIAL = ((4, 0), (0, 0))
REDUCED_FINAL = ((2, 0), (2, 0))


def reduced_2020_coefficients(tset: TMatrixSet, spec: TransitionSpec, sign: int,
                              tol: float = 1e-6) -> AngularCoefficients:
    """Closed-form ``+``/``-`` amplitude for (j1, j2) = (4, 0) -> (2, 2) with m1 = m2 = 0.

    Uses T(2020 j12' l'|4000 4 l) only; the exchanged-ket elements are replaced
    through T(a'|a) = (-1)^j12' T(a'|Pa), which is checked first.  The sum runs
    over J, l, l' = l + 2n and j12', with the selection factor
    [1 +- (-1)^l][1 + (-1)^(l + j12')].
    """
    if sign not in (1, -1):
        raise InputDomainError("sign must be +1 or -1")
    (ja, ma, va), (jb, mb, vb) = spec.initial
    (jc, mc, vc), (jd, md, vd) = spec.final
    if (ja, jb, jc, jd) != (4, 0, 2, 2) or ma or mb or len({va, vb, vc, vd}) != 1:
        raise InputDomainError("reduced form needs (4,0) -> (2,2) with m1 = m2 = 0 and equal v")
    v = va
    report = check_exchange_relation(tset, (2, v, 2, v), (4, v, 0, v))
    if report.max_deviation > tol:
        raise InvariantError(
            f"exchange relation violated (max relative deviation {report.max_deviation:.3g} at "
            f"{report.worst[0][1:]}); use the incoming-symmetrized route instead")
    m12p = mc + md
    cg_40 = clebsch_gordan(4, 0, 0, 0, 4, 0)
    T = _TLookup(tset)
    acc = _Accumulator()
    for J in tset.J_values:
        for l in range(abs(J - 4), J + 5):
            parity = 1 + sign * (-1) ** l
            if parity == 0:
                continue
            cg_in = clebsch_gordan(l, 0, 4, 0, J, 0)
            if cg_in == 0:
                continue
            for j12p in range(abs(m12p), 5):
                sel = 1 + (-1) ** (l + j12p)
                if sel == 0:
                    continue
                c_pair = clebsch_gordan(2, mc, 2, md, j12p, m12p)
                if c_pair == 0:
                    continue
                for lp in range(max(abs(J - j12p), abs(m12p)), J + j12p + 1):
                    if (lp - l) % 2:
                        continue
                    n = (lp - l) // 2
                    cg_out = clebsch_gordan(lp, -m12p, j12p, m12p, J, 0)
                    if cg_out == 0:
                        continue
                    t = T(J, (2, v, 2, v, j12p, lp), (4, v, 0, v, 4, l))
                    acc.add(lp, math.sqrt(2 * l + 1) * (-1) ** n * cg_out * cg_in * c_pair
                            * cg_40 * parity * sel * t)
    T.check()
    return acc.result(-m12p, _prefactor(spec) / math.sqrt(2))


# ---------------------------------------------------------------------------
# pointwise amplitudes

def amplitude_unsym(t: TMatrixSet, spec: TransitionSpec, reversed_z: bool, exchanged_initial: bool,
                    theta, phi):
    return unsym_coefficients(t, spec, reversed_z, exchanged_initial).evaluate(theta, phi)


def amplitude_pm(t: TMatrixSet, spec: TransitionSpec, sign: int, theta, phi):
    return pm_coefficients(t, spec, sign).evaluate(theta, phi)


def general_coefficients(t: TMatrixSet, spec: TransitionSpec, alpha: float, beta: float) -> AngularCoefficients:
    a, b = spec.initial
    cp, cm = pm_basis_coefficients(EntangledPairState(a, b, alpha, beta))
    return pm_coefficients(t, spec, 1).scaled(cp) + pm_coefficients(t, spec, -1).scaled(cm)


def amplitude_general(t: TMatrixSet, spec: TransitionSpec, alpha: float, beta: float, theta, phi):
    return general_coefficients(t, spec, alpha, beta).evaluate(theta, phi)


def amplitude_outgoing_sym(t: TMatrixSet, spec: TransitionSpec, sign: int, theta, phi):
    return outgoing_coefficients(t, spec, sign).evaluate(theta, phi)


def amplitude_reduced_2020(t: TMatrixSet, spec: TransitionSpec, sign: int, theta, phi):
    return reduced_2020_coefficients(t, spec, sign).evaluate(theta, phi)


def symmetrized_pair_coefficients(t: TMatrixSet, spec: TransitionSpec) -> AngularCoefficients:
    """Unentangled pair, incoming state symmetrized: direct plus exchanged-and-reversed."""
    return unsym_coefficients(t, spec) + unsym_coefficients(t, spec, reversed_z=True, exchanged_initial=True)


ROUTES = ("pm", "outgoing", "reduced", "general", "pair", "unsym")


def coefficients_for(t: TMatrixSet, spec: TransitionSpec, route: str, sign: int = 1,
                     alpha: float | None = None, beta: float | None = None) -> AngularCoefficients:
    if route == "pm":
        return pm_coefficients(t, spec, sign)
    if route == "outgoing":
        return outgoing_coefficients(t, spec, sign)
    if route == "reduced":
        return reduced_2020_coefficients(t, spec, sign)
    if route == "general":
        if alpha is None or beta is None:
            raise InputDomainError("route 'general' needs alpha and beta")
        return general_coefficients(t, spec, alpha, beta)
    if route == "pair":
        return symmetrized_pair_coefficients(t, spec)
    if route == "unsym":
        return unsym_coefficients(t, spec)
    raise InputDomainError(f"unknown route {route!r}; expected one of {ROUTES}")


@dataclass
class AmplitudeField:
    """Complex amplitude on a (theta, phi) grid for one final (m1', m2')."""

    theta: np.ndarray
    phi: np.ndarray
    values: np.ndarray  # shape (len(theta), len(phi))
    route: str
    initial_kind: str
    final_m: tuple[int, int]

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise InvariantError("non-finite amplitude values")


def amplitude_field(t: TMatrixSet, spec: TransitionSpec, route: str = "pm", sign: int = 1,
                    n_theta: int = 181, n_phi: int = 8, alpha: float | None = None,
                    beta: float | None = None) -> AmplitudeField:
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = np.arange(n_phi) * (2 * math.pi / n_phi)
    co = coefficients_for(t, spec, route, sign, alpha, beta)
    vals = co.theta_profile(theta)[:, None] * np.exp(1j * co.m * phi)[None, :]
    kind = {"pm": "plus" if sign > 0 else "minus", "outgoing": "plus" if sign > 0 else "minus",
            "reduced": "plus" if sign > 0 else "minus", "general": f"alpha={alpha},beta={beta}",
            "pair": "pair", "unsym": "distinguishable"}[route]
    (_, m1p, _), (_, m2p, _) = spec.final
    return AmplitudeField(theta, phi, vals, route, kind, (m1p, m2p))


__all__ = [
    "TransitionSpec", "AngularCoefficients", "AmplitudeField", "unsym_coefficients",
    "pm_coefficients", "outgoing_coefficients", "reduced_2020_coefficients",
    "general_coefficients", "symmetrized_pair_coefficients", "coefficients_for",
    "amplitude_unsym", "amplitude_pm", "amplitude_general", "amplitude_outgoing_sym",
    "amplitude_reduced_2020", "amplitude_field",
]
