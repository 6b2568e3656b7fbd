"""Rovibrational levels and coupled-channel bases for diatom-diatom collisions.

Channels are labelled ``(j1, v1, j2, v2, j12, l)`` inside a total-J block.  The
two molecules are treated as distinguishable here: ``(j1 v1) != (j2 v2)``
pairs appear in both orders, and symmetrization is done later on the
amplitudes.

Canonical channel order (the sort key used everywhere, including the T-matrix
file): ``(pair internal energy, v1, j1, v2, j2, j12, l)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import DEFAULT
from .errors import InputDomainError


@dataclass(frozen=True, order=True)
class MolecularLevel:
    j: int
    v: int
    energy: float


def enumerate_levels(j_max: int, v_max: int, rotor_constant: float | None = None,
                     vib_spacing: float | None = None, para_only: bool = True) -> list[MolecularLevel]:
    """Rigid-rotor/harmonic levels ``E = B j(j+1) + w v`` in cm^-1."""
    if j_max < 0 or v_max < 0:
        raise InputDomainError("j_max and v_max must be >= 0")
    B = DEFAULT.B_cm1 if rotor_constant is None else rotor_constant
    w = DEFAULT.vib_spacing_cm1 if vib_spacing is None else vib_spacing
    step = 2 if para_only else 1
    return [MolecularLevel(j, v, B * j * (j + 1) + w * v)
            for v in range(v_max + 1) for j in range(0, j_max + 1, step)]


def wavenumber(e_total: float, e_channel: float, mu: float,
               hbar2_2amu: float | None = None) -> tuple[float, bool]:
    """Channel wavenumber in 1/angstrom.

    Returns ``(k, is_open)``; for closed channels ``k`` is the magnitude of the
    imaginary wavenumber.  The threshold itself counts as open (``k = 0``).
    """
    if mu <= 0:
        raise InputDomainError("reduced mass must be positive")
    c = DEFAULT.hbar2_over_2amuA2_cm1 if hbar2_2amu is None else hbar2_2amu
    de = e_total - e_channel
    return math.sqrt(mu * abs(de) / c), de >= 0


@dataclass(frozen=True)
class ChannelState:
    j1: int
    v1: int
    j2: int
    v2: int
    j12: int
    l: int
    J: int
    energy: float = 0.0
    k: float = 0.0
    is_open: bool = True

    @property
    def label(self) -> tuple[int, int, int, int, int, int]:
        return (self.j1, self.v1, self.j2, self.v2, self.j12, self.l)

    @property
    def pair(self) -> tuple[int, int, int, int]:
        return (self.j1, self.v1, self.j2, self.v2)

    @property
    def parity(self) -> int:
        return (-1) ** (self.j1 + self.j2 + self.l)

    def exchanged(self) -> "ChannelState":
        """Same j12, l, J with the two molecules' labels swapped."""
        return ChannelState(self.j2, self.v2, self.j1, self.v1, self.j12, self.l, self.J,
                            self.energy, self.k, self.is_open)


@dataclass(frozen=True)
class CollisionSpec:
    """Collision energy, initial pair and basis truncation.

    ``initial`` is ``((j1, m1, v1), (j2, m2, v2))``.  ``pair_energy_max``
    optionally drops level pairs whose combined internal energy exceeds it;
    the cut is symmetric so exchange closure is kept.
    """

    collision_energy: float
    initial: tuple[tuple[int, int, int], tuple[int, int, int]]
    j_max: int
    v_max: int = 0
    J_max: int = 10
    mu: float = field(default_factory=lambda: DEFAULT.mu_H2_H2)
    rotor_constant: float = field(default_factory=lambda: DEFAULT.B_cm1)
    vib_spacing: float = field(default_factory=lambda: DEFAULT.vib_spacing_cm1)
    para_only: bool = True
    pair_energy_max: float | None = None

    def __post_init__(self):
        if not self.collision_energy > 0:
            raise InputDomainError("collision energy must be > 0")
        a, b = (tuple(x) for x in self.initial)
        if a == b:
            raise InputDomainError("identical initial molecular states cannot be entangled")
        object.__setattr__(self, "initial", (a, b))
        for j, _, v in (a, b):
            if j > self.j_max or v > self.v_max:
                raise InputDomainError(f"initial level (j={j}, v={v}) outside the basis truncation")
            if self.para_only and j % 2:
                raise InputDomainError(f"odd j={j} with para-only levels")

    def levels(self) -> list[MolecularLevel]:
        return enumerate_levels(self.j_max, self.v_max, self.rotor_constant,
                                self.vib_spacing, self.para_only)

    def level_energy(self, j: int, v: int) -> float:
        return self.rotor_constant * j * (j + 1) + self.vib_spacing * v

    @property
    def total_energy(self) -> float:
        (j1, _, v1), (j2, _, v2) = self.initial
        return self.collision_energy + self.level_energy(j1, v1) + self.level_energy(j2, v2)


def channel_sort_key(ch: ChannelState):
    return (ch.energy, ch.v1, ch.j1, ch.v2, ch.j2, ch.j12, ch.l)


def build_channel_basis(spec: CollisionSpec, J: int) -> list[ChannelState]:
    """All channels of total angular momentum ``J`` within the truncation."""
    levels = spec.levels()
    e_tot = spec.total_energy
    out = []
    for a in levels:
        for b in levels:
            e_pair = a.energy + b.energy
            if spec.pair_energy_max is not None and e_pair > spec.pair_energy_max:
                continue
            k, is_open = wavenumber(e_tot, e_pair, spec.mu)
            for j12 in range(abs(a.j - b.j), a.j + b.j + 1):
                for l in range(abs(J - j12), J + j12 + 1):
                    out.append(ChannelState(a.j, a.v, b.j, b.v, j12, l, J, e_pair, k, is_open))
    if not out:
        raise InputDomainError(f"empty channel basis for J={J}")
    out.sort(key=channel_sort_key)
    return out


def format_pair(pair) -> str:
    """``((j1, m1, v1), (j2, m2, v2))`` as ``"j1,m1,v1/j2,m2,v2"``."""
    return "/".join(",".join(str(int(x)) for x in lev) for lev in pair)


def parse_pair(text: str) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    """Inverse of :func:`format_pair`."""
    try:
        a, b = text.split("/")
        out = tuple(tuple(int(x) for x in part.split(",")) for part in (a, b))
    except ValueError:
        raise InputDomainError(f"expected 'j1,m1,v1/j2,m2,v2', got {text!r}") from None
    if any(len(lev) != 3 for lev in out):
        raise InputDomainError(f"expected 'j1,m1,v1/j2,m2,v2', got {text!r}")
    return out
