"""Entangled and product internal states of a molecule pair.

Notation: ``a = (j1, m1, v1)`` and ``b = (j2, m2, v2)`` are the two single-molecule
states.  The entangled state with mixing angle ``alpha`` and relative phase
``beta`` is ``cos(alpha)|a>|b> + sin(alpha) e^{i beta}|b>|a>``; the symmetric and
antisymmetric combinations ``(|a>|b> +- |b>|a>)/sqrt(2)`` are the ``+`` and ``-``
states.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InputDomainError

Level = tuple[int, int, int]


@dataclass(frozen=True)
class EntangledPairState:
    a: Level
    b: Level
    alpha: float = math.pi / 4
    beta: float = 0.0

    def __post_init__(self):
        a, b = tuple(self.a), tuple(self.b)
        if a == b:
            raise InputDomainError("the two single-molecule states must differ")
        if len(a) != 3 or len(b) != 3:
            raise InputDomainError("levels are (j, m, v) triples")
        for j, m, v in (a, b):
            if j < 0 or v < 0 or abs(m) > j:
                raise InputDomainError(f"invalid level (j={j}, m={m}, v={v})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def plus(cls, a: Level, b: Level) -> "EntangledPairState":
        return cls(a, b, math.pi / 4, 0.0)

    @classmethod
    def minus(cls, a: Level, b: Level) -> "EntangledPairState":
        return cls(a, b, math.pi / 4, math.pi)

    def coefficients(self) -> tuple[complex, complex]:
        """Amplitudes on ``|a>|b>`` and ``|b>|a>``."""
        return complex(math.cos(self.alpha)), math.sin(self.alpha) * cmath.exp(1j * self.beta)


def pm_basis_coefficients(state: EntangledPairState) -> tuple[complex, complex]:
    """Components ``(c_plus, c_minus)`` of ``state`` on the ``+``/``-`` states."""
    c, s = state.coefficients()
    r = math.sqrt(0.5)
    return r * (c + s), r * (c - s)


def from_pm(c_plus: complex, c_minus: complex) -> tuple[complex, complex]:
    """Inverse of :func:`pm_basis_coefficients` on the ``|a>|b>``, ``|b>|a>`` amplitudes."""
    r = math.sqrt(0.5)
    return r * (c_plus + c_minus), r * (c_plus - c_minus)


@dataclass(frozen=True)
class ProductPrep:
    """Each molecule in ``cos(alpha_i)|a> + sin(alpha_i) e^{i beta_i}|b>``."""

    alpha1: float
    beta1: float
    alpha2: float
    beta2: float

    def expansion(self) -> dict[str, complex]:
        """Pair amplitudes keyed ``aa``, ``ab``, ``ba``, ``bb`` (first letter: molecule 1)."""
        u1 = (math.cos(self.alpha1), math.sin(self.alpha1) * cmath.exp(1j * self.beta1))
        u2 = (math.cos(self.alpha2), math.sin(self.alpha2) * cmath.exp(1j * self.beta2))
        return {"aa": u1[0] * u2[0], "ab": u1[0] * u2[1], "ba": u1[1] * u2[0], "bb": u1[1] * u2[1]}


@dataclass(frozen=True)
class Decomposition:
    """``psi_dp = y * phase * |alpha, beta> + sat_aa |a>|a> + sat_bb |b>|b>``."""

    y: float
    alpha: float
    beta: float
    phase: complex
    sat_aa: complex
    sat_bb: complex

    @property
    def norm(self) -> float:
        return self.y ** 2 + abs(self.sat_aa) ** 2 + abs(self.sat_bb) ** 2

    def expansion(self) -> dict[str, complex]:
        ea = self.y * self.phase * math.cos(self.alpha)
        eb = self.y * self.phase * math.sin(self.alpha) * cmath.exp(1j * self.beta)
        return {"aa": self.sat_aa, "ab": ea, "ba": eb, "bb": self.sat_bb}

    def entangled_state(self, a: Level, b: Level) -> EntangledPairState:
        return EntangledPairState(a, b, self.alpha, self.beta)


def _sgn(x: float) -> float:
    return -1.0 if x < 0 else 1.0


def decompose_product(prep: ProductPrep, tol: float = 1e-14) -> Decomposition:
    """Split a product of two superpositions into entangled part and satellites.

    ``alpha`` is kept in ``[0, pi/2]``.  When ``cos(a1) sin(a2)`` and
    ``sin(a1) cos(a2)`` have opposite signs the sign is moved into ``beta``
    (shifted by pi); a negative ``cos(a1) sin(a2)`` goes into the global phase,
    which is otherwise ``e^{i beta2}``.
    """
    cos1, sin1 = math.cos(prep.alpha1), math.sin(prep.alpha1)
    cos2, sin2 = math.cos(prep.alpha2), math.sin(prep.alpha2)
    u = cos1 * sin2
    w = sin1 * cos2
    y = math.hypot(u, w)
    if y < tol:
        raise InputDomainError("degenerate decomposition: both molecules in the same basis state (y = 0)")
    su = _sgn(u)
    alpha = math.atan2(abs(w), abs(u))
    beta = prep.beta1 - prep.beta2
    if su * _sgn(w) < 0:
        beta += math.pi
    beta = math.remainder(beta, 2 * math.pi)
    return Decomposition(
        y=y, alpha=alpha, beta=beta,
        phase=su * cmath.exp(1j * prep.beta2),
        sat_aa=complex(cos1 * cos2),
        sat_bb=sin1 * sin2 * cmath.exp(1j * (prep.beta1 + prep.beta2)),
    )


class Case(str, Enum):
    A = "case_a"
    B = "case_b"
    C = "case_c"
    MIXED = "mixed"


def classify_case(state: EntangledPairState) -> Case:
    """Which quantum numbers carry the entanglement: only m (a), only v (b), only j (c)."""
    diff = tuple(x != y for x, y in zip(state.a, state.b))
    return {(False, True, False): Case.A, (False, False, True): Case.B,
            (True, False, False): Case.C}.get(diff, Case.MIXED)


def beta_switch_coefficients(beta) -> tuple[np.ndarray, np.ndarray]:
    """Weights of the ``+`` and ``-`` cross sections for a product of two equal-weight superpositions.

    With ``alpha1 = alpha2 = pi/4`` the entangled component has ``y^2 = 1/2`` and
    ``alpha = pi/4``; its cross section is ``y^2 (|c+|^2 sigma+ + |c-|^2 sigma-)``
    when the two channels do not interfere, i.e. weights ``(1 +- cos beta)/4``.
    """
    beta = np.asarray(beta, dtype=float)
    return 0.25 * (1 + np.cos(beta)), 0.25 * (1 - np.cos(beta))
