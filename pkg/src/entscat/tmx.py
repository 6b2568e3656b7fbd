"""T-matrix sets: storage, text serialization, synthesis and exchange checks.

The convention is fixed to ``T = 1 - S`` on the open-channel block, with
channels in the l-first coupled basis described in :mod:`entscat.pes`.
T is M-independent, so one matrix is stored per total J.

File format (line oriented, ``#`` header lines, one record per element)::

    # entscat-tmatrix 1
    # convention T=1-S
    # provenance solved
    # collision_energy 4
    # total_energy 368.80000000000001
    # mu 1.00794
    # units energy=cm-1 length=angstrom mass=amu
    # potential_hash 0123456789abcdef
    # truncation j_max=4 v_max=0 J_max=12
    # level 0 0 0
    # level 2 0 364.80000000000001
    # columns J j1' v1' j2' v2' j12' l' j1 v1 j2 v2 j12 l re im
    0 0 0 0 0 0 0 0 0 0 0 0 0 1.2e-3 -4.0e-2
    ...
    # end records=N

Every stored J block is written in full (all bra/ket pairs of its channels),
so a set loaded from disk has the same blocks it was saved with.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .basis import ChannelState, CollisionSpec, build_channel_basis, channel_sort_key, format_pair, wavenumber
from .errors import InputDomainError, MissingTMatrixError, TMatrixFormatError

SCHEMA_LINE = "# entscat-tmatrix 1"
CONVENTION = "T=1-S"
Label = tuple  # (j1, v1, j2, v2, j12, l)


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class TBlock:
    """T-matrix of one total-J block over its open channels."""

    J: int
    channels: tuple[ChannelState, ...]
    T: np.ndarray

    def __post_init__(self):
        self.channels = tuple(self.channels)
        self.T = np.asarray(self.T, dtype=complex)
        n = len(self.channels)
        if self.T.shape != (n, n):
            raise InputDomainError(f"T block J={self.J} has shape {self.T.shape}, expected {(n, n)}")
        self.index = {c.label: i for i, c in enumerate(self.channels)}

    def get(self, bra: Label, ket: Label) -> complex:
        return self.T[self.index[bra], self.index[ket]]

    @property
    def S(self) -> np.ndarray:
        return np.eye(len(self.channels)) - self.T


@dataclass
class TMatrixSet:
    collision_energy: float
    total_energy: float
    mu: float
    levels: dict  # (j, v) -> internal energy, cm^-1
    blocks: dict = field(default_factory=dict)  # J -> TBlock
    provenance: str = "solved"
    convention: str = CONVENTION
    meta: dict = field(default_factory=dict)

    # -- lookup -----------------------------------------------------------
    @property
    def J_values(self) -> list[int]:
        return sorted(self.blocks)

    def has(self, J: int, bra: Label, ket: Label) -> bool:
        b = self.blocks.get(J)
        return b is not None and bra in b.index and ket in b.index

    def get(self, J: int, bra: Label, ket: Label) -> complex:
        if not self.has(J, bra, ket):
            raise MissingTMatrixError([(J, bra, ket)])
        return self.blocks[J].get(bra, ket)

    def require(self, keys: Iterable[tuple]) -> None:
        missing = [key for key in keys if not self.has(*key)]
        if missing:
            raise MissingTMatrixError(missing)

    def pair_energy(self, j1: int, v1: int, j2: int, v2: int) -> float:
        try:
            return self.levels[(j1, v1)] + self.levels[(j2, v2)]
        except KeyError as exc:
            raise InputDomainError(f"level {exc.args[0]} not in the T-matrix set") from None

    def wavenumber(self, j1: int, v1: int, j2: int, v2: int) -> tuple[float, bool]:
        return wavenumber(self.total_energy, self.pair_energy(j1, v1, j2, v2), self.mu)

    def entries(self):
        """Iterate ``(J, bra_label, ket_label, value)`` in canonical order."""
        for J in self.J_values:
            b = self.blocks[J]
            for i, ci in enumerate(b.channels):
                for j, cj in enumerate(b.channels):
                    yield J, ci.label, cj.label, b.T[i, j]

    def map_entries(self, fn: Callable, provenance: str | None = None) -> "TMatrixSet":
        """New set with each element replaced by ``fn(J, bra, ket, value)``."""
        blocks = {}
        for J, b in self.blocks.items():
            T = b.T.copy()
            for i, ci in enumerate(b.channels):
                for j, cj in enumerate(b.channels):
                    T[i, j] = fn(J, ci.label, cj.label, T[i, j])
            blocks[J] = TBlock(J, b.channels, T)
        return TMatrixSet(self.collision_energy, self.total_energy, self.mu, dict(self.levels),
                          blocks, provenance or self.provenance, self.convention, dict(self.meta))

    def max_unitarity_defect(self) -> float:
        out = 0.0
        for b in self.blocks.values():
            S = b.S
            out = max(out, float(np.max(np.abs(S.conj().T @ S - np.eye(len(S))))))
        return out

    def max_symmetry_defect(self) -> float:
        return max((float(np.max(np.abs(b.T - b.T.T))) for b in self.blocks.values()), default=0.0)

    def same_as(self, other: "TMatrixSet") -> bool:
        if self.J_values != other.J_values:
            return False
        for J in self.J_values:
            a, b = self.blocks[J], other.blocks[J]
            if [c.label for c in a.channels] != [c.label for c in b.channels]:
                return False
            if not np.array_equal(a.T, b.T):
                return False
        return True


# ---------------------------------------------------------------------------
# serialization

def save(tset: TMatrixSet, path) -> None:
    """Write ``tset``; values use 17 significant digits (round-trip exact)."""
    lines = [
        SCHEMA_LINE,
        f"# convention {tset.convention}",
        f"# provenance {tset.provenance}",
        f"# collision_energy {_fmt(tset.collision_energy)}",
        f"# total_energy {_fmt(tset.total_energy)}",
        f"# mu {_fmt(tset.mu)}",
        "# units energy=cm-1 length=angstrom mass=amu",
    ]
    for key in sorted(tset.meta):
        val = str(tset.meta[key])
        if "\n" in val:
            raise InputDomainError(f"meta value for {key!r} contains a newline")
        lines.append(f"# meta {key} {val}")
    for (j, v), e in sorted(tset.levels.items()):
        lines.append(f"# level {j} {v} {_fmt(e)}")
    lines.append("# columns J j1' v1' j2' v2' j12' l' j1 v1 j2 v2 j12 l re im")
    n = 0
    for J, bra, ket, val in tset.entries():
        if not (math.isfinite(val.real) and math.isfinite(val.imag)):
            raise InputDomainError(f"non-finite T element at J={J} {bra} <- {ket}")
        lines.append(" ".join(str(x) for x in (J, *bra, *ket)) + f" {_fmt(val.real)} {_fmt(val.imag)}")
        n += 1
    lines.append(f"# end records={n}")
    Path(path).write_text("\n".join(lines) + "\n")


def load(path) -> TMatrixSet:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != SCHEMA_LINE:
        raise TMatrixFormatError(f"expected schema line {SCHEMA_LINE!r}", line=1)
    header = {}
    meta = {}
    levels = {}
    records = []
    end_count = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if not parts:
                continue
            key = parts[0]
            if key == "level":
                try:
                    levels[(int(parts[1]), int(parts[2]))] = float(parts[3])
                except (IndexError, ValueError):
                    raise TMatrixFormatError("malformed level line", lineno) from None
            elif key == "meta":
                meta[parts[1]] = " ".join(parts[2:])
            elif key == "end":
                try:
                    end_count = int(parts[1].split("=")[1])
                except (IndexError, ValueError):
                    raise TMatrixFormatError("malformed end line", lineno) from None
            elif key in ("columns", "units"):
                continue
            else:
                header[key] = " ".join(parts[1:])
            continue
        if end_count is not None:
            raise TMatrixFormatError("data after end marker", lineno)
        parts = line.split()
        if len(parts) != 15:
            raise TMatrixFormatError(f"expected 15 fields, got {len(parts)}", lineno)
        try:
            q = tuple(int(x) for x in parts[:13])
            re, im = float(parts[13]), float(parts[14])
        except ValueError:
            raise TMatrixFormatError("unparsable record", lineno) from None
        if not (math.isfinite(re) and math.isfinite(im)):
            raise TMatrixFormatError("non-finite T element", lineno)
        records.append((lineno, q, complex(re, im)))
    if end_count is None:
        raise TMatrixFormatError("missing end marker (truncated file?)", len(lines))
    if end_count != len(records):
        raise TMatrixFormatError(f"end marker says {end_count} records, found {len(records)}", len(lines))
    if header.get("convention", CONVENTION) != CONVENTION:
        raise TMatrixFormatError(f"unsupported convention {header.get('convention')!r}")
    for key in ("collision_energy", "total_energy", "mu"):
        if key not in header:
            raise TMatrixFormatError(f"header lacks {key}")
    try:
        e_k = float(header["collision_energy"])
        e_tot = float(header["total_energy"])
        mu = float(header["mu"])
    except ValueError:
        raise TMatrixFormatError("non-numeric energy or mass in header") from None

    by_J: dict[int, dict] = {}
    for lineno, q, val in records:
        J, bra, ket = q[0], q[1:7], q[7:13]
        d = by_J.setdefault(J, {})
        if (bra, ket) in d:
            raise TMatrixFormatError(f"duplicate record J={J} {bra} <- {ket}", lineno)
        d[(bra, ket)] = val
    blocks = {}
    for J, d in by_J.items():
        labels = {lab for pair in d for lab in pair}
        chans = []
        for (j1, v1, j2, v2, j12, l) in labels:
            if (j1, v1) not in levels or (j2, v2) not in levels:
                raise TMatrixFormatError(f"channel {(j1, v1, j2, v2, j12, l)} uses an undeclared level")
            e_pair = levels[(j1, v1)] + levels[(j2, v2)]
            k, is_open = wavenumber(e_tot, e_pair, mu)
            chans.append(ChannelState(j1, v1, j2, v2, j12, l, J, e_pair, k, is_open))
        chans.sort(key=channel_sort_key)
        idx = {c.label: i for i, c in enumerate(chans)}
        T = np.zeros((len(chans), len(chans)), dtype=complex)
        if len(d) != len(chans) ** 2:
            raise TMatrixFormatError(f"J={J} block is incomplete ({len(d)} of {len(chans) ** 2} records)")
        for (bra, ket), val in d.items():
            T[idx[bra], idx[ket]] = val
        blocks[J] = TBlock(J, chans, T)
    return TMatrixSet(e_k, e_tot, mu, levels, blocks, header.get("provenance", "ingested"),
                      CONVENTION, meta)


# ---------------------------------------------------------------------------
# synthesis

def exchange_phase(ch: ChannelState) -> int:
    """Sign picked up by |j1 v1 j2 v2 j12 l> under molecule exchange with R -> -R."""
    return (-1) ** (ch.j1 + ch.j2 - ch.j12 + ch.l)


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def _coe(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random symmetric unitary matrix (U U^T with U Haar)."""
    U = _haar_unitary(n, rng)
    return U @ U.T


def synthesize_block(channels: Sequence[ChannelState], rng: np.random.Generator,
                     exchange_symmetric: bool = True, parity_conserving: bool = True) -> np.ndarray:
    """Random unitary, symmetric S over ``channels``.

    With ``parity_conserving`` the S matrix is block diagonal in
    (-1)^(j1+j2+l); with ``exchange_symmetric`` it commutes with the molecule
    exchange operator, which is what a symmetric potential produces.
    """
    n = len(channels)
    S = np.zeros((n, n), dtype=complex)
    groups = {}
    for i, c in enumerate(channels):
        groups.setdefault(c.parity if parity_conserving else 0, []).append(i)
    for idx in groups.values():
        sub = [channels[i] for i in idx]
        m = len(sub)
        if exchange_symmetric:
            pos = {c.label: a for a, c in enumerate(sub)}
            P = np.zeros((m, m))
            for a, c in enumerate(sub):
                b = pos.get(c.exchanged().label)
                if b is None:
                    raise InputDomainError(f"channel {c.label} lacks its exchange partner")
                P[b, a] = exchange_phase(c)
            evals, O = np.linalg.eigh(P)
            block = np.zeros((m, m), dtype=complex)
            for sign in (1.0, -1.0):
                cols = np.abs(evals - sign) < 0.5
                if cols.any():
                    Os = O[:, cols]
                    block += Os @ _coe(Os.shape[1], rng) @ Os.T
        else:
            block = _coe(m, rng)
        S[np.ix_(idx, idx)] = block
    return S


def synthesize_unitary(spec: CollisionSpec, seed: int, J_max: int | None = None,
                       exchange_symmetric: bool = True, parity_conserving: bool = True) -> TMatrixSet:
    """Synthetic T set over the open channels of ``spec`` for J = 0..J_max."""
    rng = np.random.default_rng(seed)
    J_max = spec.J_max if J_max is None else J_max
    blocks = {}
    for J in range(J_max + 1):
        chans = [c for c in build_channel_basis(spec, J) if c.is_open]
        if not chans:
            continue
        S = synthesize_block(chans, rng, exchange_symmetric, parity_conserving)
        blocks[J] = TBlock(J, chans, np.eye(len(chans)) - S)
    levels = {(lv.j, lv.v): lv.energy for lv in spec.levels()}
    meta = {"seed": seed, "exchange_symmetric": exchange_symmetric, "initial": format_pair(spec.initial),
            "truncation": f"j_max={spec.j_max},v_max={spec.v_max},J_max={J_max}"}
    return TMatrixSet(spec.collision_energy, spec.total_energy, spec.mu, levels, blocks,
                      "synthetic", CONVENTION, meta)


# ---------------------------------------------------------------------------
# exchange relation

@dataclass
class ExchangeReport:
    max_deviation: float
    n_compared: int
    worst: list  # (deviation, J, bra, ket)

    @property
    def ok(self) -> bool:
        return self.max_deviation <= 1e-6


def check_exchange_relation(tset: TMatrixSet, bra_pair: tuple, ket_pair: tuple,
                            floor: float = 1e-10, n_worst: int = 5) -> ExchangeReport:
    """Compare T(bra|ket) with its exchange image for every J, j12, l, j12', l'.

    ``bra_pair`` and ``ket_pair`` are ``(j1, v1, j2, v2)``.  The relation
    checked is T(a'|a) = e(a') e(a) T(Pa'|Pa) with e the exchange phase; for
    ``j1'v1' = j2'v2'`` and parity conservation this is
    T(a'|a) = (-1)^(j12' + j12) T(a'|Pa), i.e. (-1)^j12' when j12 is even.
    The deviation is measured relative to the exchange-image element (values
    below ``floor`` times the largest compared element count as absolute).
    """
    pairs = []
    for J in tset.J_values:
        b = tset.blocks[J]
        for ci in b.channels:
            if ci.pair != tuple(bra_pair):
                continue
            for cj in b.channels:
                if cj.pair != tuple(ket_pair):
                    continue
                pi, pj = ci.exchanged(), cj.exchanged()
                if pi.label not in b.index or pj.label not in b.index:
                    raise MissingTMatrixError([(J, pi.label, pj.label)])
                sign = exchange_phase(ci) * exchange_phase(cj)
                pairs.append((J, ci.label, cj.label, b.get(ci.label, cj.label),
                              sign * b.get(pi.label, pj.label)))
    if not pairs:
        raise MissingTMatrixError([("*", tuple(bra_pair), tuple(ket_pair))])
    scale = max(max(abs(p[3]), abs(p[4])) for p in pairs)
    devs = []
    for J, bra, ket, direct, image in pairs:
        denom = max(abs(image), floor * scale, np.finfo(float).tiny)
        devs.append((abs(direct - image) / denom, J, bra, ket))
    devs.sort(key=lambda t: -t[0])
    return ExchangeReport(devs[0][0], len(devs), devs[:n_worst])
