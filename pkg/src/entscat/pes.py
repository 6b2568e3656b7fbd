"""Diatom-diatom interaction potentials as angular expansions.

The potential is written as

    V(R, r1, r2) = sum_t  v_t(R) G_t(r1_hat, r2_hat, R_hat)

with the rotationally invariant angular functions

    G_{l1 l2 l} = (4 pi)^{3/2} / sqrt(2l+1)
                  * sum_{m} <l1 m1 l2 m2 | l m> Y_{l1 m1}(r1) Y_{l2 m2}(r2) Y*_{l m}(R)

normalized so that ``G_000 = 1`` (the isotropic radial term is the spherical
average of V).

Matrix elements are taken in the space-fixed basis
``|(l, (j1 j2) j12) J M>`` in which the orbital angular momentum is coupled
first, matching the Clebsch-Gordan order of the amplitude expansion.  The
angular factor is the standard tensor-operator result (Edmonds 7.1.5, 7.1.6,
5.4.5) for the scalar product of [Y_l1(1) x Y_l2(2)]^l with Y_l(R):

    <a'|G|a> = (4pi)^{3/2}/sqrt(2l+1) * (-1)^{l'+j12'+J}
               {J l' j12'; lam j12 l} <j12'||T^lam||j12> <l'||Y_lam||l>

where the extra (-1)^{l+j12+l'+j12'} relative to Edmonds converts from the
j12-first to the l-first coupling order.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .angmom import triangle, wigner_3j, wigner_6j, wigner_9j
from .basis import ChannelState
from .errors import ConfigError, InputDomainError

POTENTIAL_SCHEMA = "entscat-potential/1"
FOUR_PI_32 = (4.0 * math.pi) ** 1.5


# ---------------------------------------------------------------------------
# radial functions (R in angstrom -> cm^-1); every one returns 0 beyond r_cut

@dataclass(frozen=True)
class LennardJones:
    epsilon: float
    sigma: float
    r_cut: float = 250.0

    def __call__(self, R):
        R = np.asarray(R, dtype=float)
        x = (self.sigma / R) ** 6
        return np.where(R <= self.r_cut, 4.0 * self.epsilon * (x * x - x), 0.0)

    def to_dict(self):
        return {"kind": "lennard_jones", "epsilon": self.epsilon, "sigma": self.sigma,
                "r_cut": self.r_cut}


@dataclass(frozen=True)
class ExponentialDispersion:
    """``A exp(-beta R) - C6 / R^6 * damping``; set ``c6=0`` for a pure exponential."""

    amplitude: float
    beta: float
    c6: float = 0.0
    r_cut: float = 250.0

    def __call__(self, R):
        R = np.asarray(R, dtype=float)
        val = self.amplitude * np.exp(-self.beta * R)
        if self.c6:
            damp = 1.0 - np.exp(-(R / 3.0) ** 8)
            val = val - self.c6 * damp / R ** 6
        return np.where(R <= self.r_cut, val, 0.0)

    def to_dict(self):
        return {"kind": "exponential", "amplitude": self.amplitude, "beta": self.beta,
                "c6": self.c6, "r_cut": self.r_cut}


class TabulatedRadial:
    """Cubic spline in ``log R`` through tabulated points; 0 outside the table."""

    def __init__(self, R: Sequence[float], values: Sequence[float]):
        R = np.asarray(R, dtype=float)
        values = np.asarray(values, dtype=float)
        if R.ndim != 1 or R.shape != values.shape or len(R) < 4:
            raise ConfigError("tabulated radial term needs >= 4 matching (R, value) points")
        if np.any(R <= 0) or np.any(np.diff(R) <= 0):
            raise ConfigError("tabulated R values must be positive and increasing")
        if not np.all(np.isfinite(values)):
            raise ConfigError("tabulated radial values must be finite")
        self.R = R
        self.values = values
        self._spline = CubicSpline(np.log(R), values)

    def __call__(self, R):
        R = np.asarray(R, dtype=float)
        inside = (R >= self.R[0]) & (R <= self.R[-1])
        safe = np.where(inside, R, self.R[0])
        return np.where(inside, self._spline(np.log(safe)), 0.0)

    def to_dict(self):
        return {"kind": "table", "R": self.R.tolist(), "values": self.values.tolist()}


def radial_from_dict(d: dict) -> Callable:
    kind = d.get("kind")
    if kind == "lennard_jones":
        return LennardJones(float(d["epsilon"]), float(d["sigma"]), float(d.get("r_cut", 250.0)))
    if kind == "exponential":
        return ExponentialDispersion(float(d["amplitude"]), float(d["beta"]),
                                     float(d.get("c6", 0.0)), float(d.get("r_cut", 250.0)))
    if kind == "table":
        return TabulatedRadial(d["R"], d["values"])
    raise ConfigError(f"unknown radial term kind {kind!r}")


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialTerm:
    lambda1: int
    lambda2: int
    lam: int
    radial: Callable

    def __post_init__(self):
        if not triangle(self.lambda1, self.lambda2, self.lam):
            raise InputDomainError(
                f"term ({self.lambda1},{self.lambda2},{self.lam}) violates the triangle rule")

    @property
    def indices(self) -> tuple[int, int, int]:
        return (self.lambda1, self.lambda2, self.lam)


@dataclass(frozen=True)
class PotentialModel:
    terms: tuple[RadialTerm, ...]
    symmetric_under_exchange: bool = True
    name: str = "custom"
    para: bool = field(default=True)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.para:
            for t in self.terms:
                if t.lambda1 % 2 or t.lambda2 % 2:
                    raise InputDomainError(f"odd lambda in term {t.indices} with para symmetry")
        if self.symmetric_under_exchange:
            idx = {t.indices: t for t in self.terms}
            for (a, b, c), t in idx.items():
                partner = idx.get((b, a, c))
                if partner is None:
                    raise InputDomainError(f"term {(a, b, c)} lacks its exchange partner {(b, a, c)}")
                if partner.radial is not t.radial and _radial_dict(partner.radial) != _radial_dict(t.radial):
                    raise InputDomainError(f"terms {(a, b, c)} and {(b, a, c)} differ")

    def __call__(self, R, geometry=None):
        """Sum of radial terms weighted by angular functions at a fixed geometry.

        ``geometry`` maps term indices to the value of G at the orientation of
        interest; ``None`` gives the spherical average (isotropic term only).
        """
        R = np.asarray(R, dtype=float)
        out = np.zeros_like(R)
        for t in self.terms:
            g = (1.0 if t.indices == (0, 0, 0) else 0.0) if geometry is None else geometry[t.indices]
            if g:
                out = out + g * t.radial(R)
        return out

    def to_dict(self) -> dict:
        return {
            "schema": POTENTIAL_SCHEMA,
            "name": self.name,
            "symmetric_under_exchange": self.symmetric_under_exchange,
            "para": self.para,
            "terms": [{"lambda": list(t.indices), "radial": _radial_dict(t.radial)} for t in self.terms],
        }

    def digest(self) -> str:
        """Short content hash used to tag T-matrix files."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _radial_dict(radial) -> dict:
    if hasattr(radial, "to_dict"):
        return radial.to_dict()
    return {"kind": "callable", "repr": repr(radial)}


def default_model() -> PotentialModel:
    """Two-term H2-H2-like model: isotropic Lennard-Jones plus a (2,0,2)/(0,2,2) pair.

    Parameters are placeholders of the right magnitude (well depth ~25 cm^-1
    near 3.3 angstrom, anisotropy of a few cm^-1 at the well), not a fit.
    """
    aniso = ExponentialDispersion(amplitude=3.0e4, beta=2.8, c6=60.0)
    return PotentialModel(
        terms=(
            RadialTerm(0, 0, 0, LennardJones(epsilon=25.5, sigma=2.95)),
            RadialTerm(2, 0, 2, aniso),
            RadialTerm(0, 2, 2, aniso),
        ),
        name="default-lj-202",
    )


def isotropic_model(epsilon: float = 25.5, sigma: float = 2.95) -> PotentialModel:
    return PotentialModel(terms=(RadialTerm(0, 0, 0, LennardJones(epsilon, sigma)),),
                          name="isotropic-lj")


def load_potential(path) -> PotentialModel:
    raw = json.loads(Path(path).read_text())
    if raw.get("schema") != POTENTIAL_SCHEMA:
        raise ConfigError(f"potential file schema {raw.get('schema')!r} != {POTENTIAL_SCHEMA!r}")
    terms = []
    for t in raw.get("terms", []):
        l1, l2, l = (int(x) for x in t["lambda"])
        terms.append(RadialTerm(l1, l2, l, radial_from_dict(t["radial"])))
    if not terms:
        raise ConfigError("potential file has no terms")
    return PotentialModel(tuple(terms), bool(raw.get("symmetric_under_exchange", True)),
                          raw.get("name", Path(path).stem), bool(raw.get("para", True)))


def save_potential(model: PotentialModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")


# ---------------------------------------------------------------------------
# angular factors

def _reduced_y(lp: int, k: int, l: int) -> float:
    """<l'||Y_k||l> (Edmonds 5.4.5)."""
    w = wigner_3j(lp, k, l, 0, 0, 0)
    if w == 0.0:
        return 0.0
    return (-1) ** lp * math.sqrt((2 * lp + 1) * (2 * k + 1) * (2 * l + 1) / (4 * math.pi)) * w


def angular_factor(bra: tuple, ket: tuple, J: int, lam: tuple[int, int, int]) -> float:
    """Angular factor of ``G_lam`` between ``(j1 j2 j12 l)`` labels at total J."""
    j1p, j2p, j12p, lp = bra
    j1, j2, j12, l = ket
    l1, l2, lt = lam
    if (lp + lt + l) % 2 or (j1p + l1 + j1) % 2 or (j2p + l2 + j2) % 2:
        return 0.0
    ry = _reduced_y(lp, lt, l)
    if ry == 0.0:
        return 0.0
    r1 = _reduced_y(j1p, l1, j1)
    r2 = _reduced_y(j2p, l2, j2)
    if r1 == 0.0 or r2 == 0.0:
        return 0.0
    nj = wigner_9j(j1p, j1, l1, j2p, j2, l2, j12p, j12, lt)
    if nj == 0.0:
        return 0.0
    sj = wigner_6j(J, lp, j12p, lt, j12, l)
    if sj == 0.0:
        return 0.0
    red_t = math.sqrt((2 * j12p + 1) * (2 * j12 + 1) * (2 * lt + 1)) * nj * r1 * r2
    phase = (-1) ** (lp + j12p + J)
    return FOUR_PI_32 / math.sqrt(2 * lt + 1) * phase * sj * red_t * ry


def coupling_matrix_element(bra: ChannelState, ket: ChannelState, term: RadialTerm) -> float:
    """Angular factor multiplying ``term.radial(R)`` in <bra|V|ket>.

    Vibrational labels must agree (rigid-rotor coupling); otherwise 0.
    """
    if bra.J != ket.J:
        raise InputDomainError(f"J mismatch: {bra.J} vs {ket.J}")
    if bra.v1 != ket.v1 or bra.v2 != ket.v2:
        return 0.0
    return angular_factor((bra.j1, bra.j2, bra.j12, bra.l), (ket.j1, ket.j2, ket.j12, ket.l),
                          bra.J, term.indices)


def coupling_matrices(basis: Sequence[ChannelState], model: PotentialModel) -> list[np.ndarray]:
    """Angular coupling matrix for each model term over ``basis``."""
    n = len(basis)
    mats = []
    for term in model.terms:
        A = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                A[i, j] = A[j, i] = coupling_matrix_element(basis[i], basis[j], term)
        mats.append(A)
    return mats


def potential_matrix(R: float, basis: Sequence[ChannelState], model: PotentialModel,
                     couplings: list[np.ndarray] | None = None) -> np.ndarray:
    """W(R)_{ij} = sum_t v_t(R) <i|G_t|j> in cm^-1."""
    if R <= 0:
        raise InputDomainError("R must be positive")
    if couplings is None:
        couplings = coupling_matrices(basis, model)
    n = len(basis)
    W = np.zeros((n, n))
    for term, A in zip(model.terms, couplings):
        W += float(term.radial(R)) * A
    return W


def collinear_geometry(model: PotentialModel) -> dict:
    """Values of each G term with both molecular axes along R."""
    from .angmom import clebsch_gordan
    return {t.indices: clebsch_gordan(t.lambda1, 0, t.lambda2, 0, t.lam, 0)
            * math.sqrt((2 * t.lambda1 + 1) * (2 * t.lambda2 + 1)) for t in model.terms}
