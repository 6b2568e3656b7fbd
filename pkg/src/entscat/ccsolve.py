"""Coupled-channel solver: log-derivative propagation and S/T extraction.

For each total J the radial equations ``psi'' = W(R) psi`` with

    W_ij(R) = delta_ij [l_i(l_i+1)/R^2 + (mu/c)(E_i - E)] + (mu/c) V_ij(R)

(``c`` = hbar^2/(2 amu A^2) in cm^-1) are integrated with Johnson's
log-derivative method from ``R_start`` to
``R_match``, starting from the log-derivative of the regular free solution
(so a vanishing potential gives S = 1 up to the O(h^4) step error; behind
a repulsive wall the starting value is forgotten).  The two parity blocks (-1)^(j1+j2+l) are propagated separately.
At ``R_match`` the open channels are matched to flux-normalized
Riccati-Bessel functions and closed channels to modified spherical Bessel
functions; the open-open block of K gives ``S = (1 + iK)(1 - iK)^-1``.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ive, kve, spherical_jn, spherical_yn

from .basis import ChannelState, CollisionSpec, build_channel_basis, format_pair
from .constants import DEFAULT
from .errors import InputDomainError, NumericalError
from .pes import PotentialModel, coupling_matrices
from .tmx import CONVENTION, TBlock, TMatrixSet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PropagationConfig:
    R_start: float = 1.5
    R_match: float = 30.0
    step: float = 0.01
    kh_max: float = 0.02
    J_max: int | None = None
    converge_tol: float | None = None

    def __post_init__(self):
        if not 0 < self.R_start < self.R_match:
            raise InputDomainError("need 0 < R_start < R_match")
        if self.step <= 0 or self.kh_max <= 0:
            raise InputDomainError("step sizes must be positive")

    @classmethod
    def default_for(cls, collision_energy: float, **kw) -> "PropagationConfig":
        """Defaults by energy: long-range matching below 0.5 cm^-1."""
        if collision_energy <= 0.5:
            kw.setdefault("R_match", 200.0)
        return cls(**kw)

    def halved(self) -> "PropagationConfig":
        return PropagationConfig(self.R_start, self.R_match, self.step / 2, self.kh_max / 2,
                                 self.J_max, self.converge_tol)


@dataclass
class SMatrixBlock:
    J: int
    open_channels: tuple[ChannelState, ...]
    S: np.ndarray

    def unitarity_defect(self) -> float:
        n = len(self.S)
        return float(np.max(np.abs(self.S.conj().T @ self.S - np.eye(n)))) if n else 0.0

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.S - self.S.T))) if len(self.S) else 0.0


def t_from_s(block: SMatrixBlock) -> TBlock:
    return TBlock(block.J, block.open_channels, np.eye(len(block.S)) - block.S)


def s_from_t(block: TBlock) -> SMatrixBlock:
    return SMatrixBlock(block.J, block.channels, np.eye(len(block.T)) - block.T)


# ---------------------------------------------------------------------------

def _w_builder(basis: Sequence[ChannelState], model: PotentialModel, e_total: float, mu: float):
    c = DEFAULT.hbar2_over_2amuA2_cm1
    scale = mu / c
    ll = np.array([ch.l * (ch.l + 1) for ch in basis], dtype=float)
    thresh = scale * (np.array([ch.energy for ch in basis]) - e_total)
    mats = coupling_matrices(basis, model)
    radials = [t.radial for t in model.terms]
    idx = np.arange(len(basis))

    def W(R: np.ndarray) -> np.ndarray:
        """W at an array of radii, shape (len(R), n, n)."""
        out = np.zeros((len(R), len(basis), len(basis)))
        for f, A in zip(radials, mats):
            if np.any(A):
                out += scale * np.asarray(f(R))[:, None, None] * A
        out[:, idx, idx] += ll[None, :] / R[:, None] ** 2 + thresh[None, :]
        return out

    return W, scale


def _step_size(basis, model, e_total, mu, cfg: PropagationConfig) -> float:
    c = DEFAULT.hbar2_over_2amuA2_cm1
    R = np.linspace(cfg.R_start, min(cfg.R_match, 15.0), 400)
    v_min = float(np.min(model(R)))
    de = max(e_total - ch.energy for ch in basis) - min(v_min, 0.0)
    k_loc = np.sqrt(max(mu * de / c, 1e-12))
    return min(cfg.step, cfg.kh_max / k_loc)


def log_derivative(W, R_start: float, R_end: float, h: float, Y0: np.ndarray | None = None,
                   chunk: int = 2048) -> np.ndarray:
    """Johnson's log-derivative propagation of Y = psi' psi^-1 for psi'' = W psi.

    ``Y0`` is the log-derivative at ``R_start``; ``None`` means psi(R_start) = 0.
    The interval is split into an even number of equal steps no longer than ``h``.
    """
    N = int(np.ceil((R_end - R_start) / h))
    N += N % 2
    h = (R_end - R_start) / N
    n = W(np.array([R_start])).shape[-1]
    eye = np.eye(n)
    if Y0 is None:
        y = 1e20 * eye
    else:
        y = np.array(Y0, dtype=float) + (h / 3.0) * W(np.array([R_start]))[0]
    for start in range(1, N + 1, chunk):
        stop = min(start + chunk, N + 1)
        i = np.arange(start, stop)
        Q = -W(R_start + i * h)
        odd = i % 2 == 1
        U = Q.copy()
        if odd.any():
            U[odd] = np.linalg.solve(eye + (h * h / 6.0) * Q[odd], Q[odd])
        wts = np.where(odd, 4.0, 2.0)
        wts[i == N] = 1.0
        corr = (h / 3.0) * wts[:, None, None] * U
        for a in range(len(i)):
            y = np.linalg.solve(eye + h * y, y) - corr[a]
        y = 0.5 * (y + y.T)
    return y


def _asymptotic(basis: Sequence[ChannelState], R: float):
    """Diagonal matching functions (J, J', N, N') with closed channels log-scaled."""
    n = len(basis)
    Jf, Jd, Nf, Nd = (np.zeros(n) for _ in range(4))
    for i, ch in enumerate(basis):
        l, k = ch.l, ch.k
        if ch.is_open and k > 0:
            x = k * R
            j, jp = spherical_jn(l, x), spherical_jn(l, x, derivative=True)
            y, yp = spherical_yn(l, x), spherical_yn(l, x, derivative=True)
            sk = np.sqrt(k)
            Jf[i], Jd[i] = x * j / sk, sk * (j + x * jp)
            Nf[i], Nd[i] = x * y / sk, sk * (y + x * yp)
        else:
            kap = max(k, 1e-12)
            x = kap * R
            # log-derivatives of x i_l(x) and x k_l(x) from scaled Bessel ratios
            ri = ive(l - 0.5, x) / ive(l + 0.5, x)
            rk = kve(l - 0.5, x) / kve(l + 0.5, x)
            Jf[i], Jd[i] = 1.0, kap * (1.0 / x + ri - (l + 1) / x)
            Nf[i], Nd[i] = 1.0, kap * (1.0 / x - rk - (l + 1) / x)
    return Jf, Jd, Nf, Nd


def free_regular_logderiv(basis: Sequence[ChannelState], R: float) -> np.ndarray:
    """Diagonal log-derivative of the regular free solution in each channel at ``R``."""
    out = np.zeros(len(basis))
    for i, ch in enumerate(basis):
        l = ch.l
        if ch.is_open and ch.k > 0:
            x = ch.k * R
            j, jp = spherical_jn(l, x), spherical_jn(l, x, derivative=True)
            if abs(j) < 1e-200:
                out[i] = 1e20
                continue
            out[i] = 1.0 / R + ch.k * jp / j
        else:
            kap = max(ch.k, 1e-12)
            x = kap * R
            out[i] = kap * (ive(l - 0.5, x) / ive(l + 0.5, x) - l / x)
    return np.diag(np.clip(out, -1e20, 1e20))


def match_k_matrix(Y: np.ndarray, basis: Sequence[ChannelState], R: float) -> np.ndarray:
    """Open-open K matrix from the log-derivative matrix at ``R``."""
    Jf, Jd, Nf, Nd = _asymptotic(basis, R)
    A = Y * Nf[None, :] - np.diag(Nd)
    B = Y * Jf[None, :] - np.diag(Jd)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e13:
        raise NumericalError(f"singular matching at R_match={R} (condition {cond:.3g})")
    K = np.linalg.solve(A, B)
    op = [i for i, ch in enumerate(basis) if ch.is_open and ch.k > 0]
    K = K[np.ix_(op, op)]
    return 0.5 * (K + K.T)


def s_from_k(K: np.ndarray) -> np.ndarray:
    eye = np.eye(len(K))
    return np.linalg.solve(eye - 1j * K, eye + 1j * K)


def propagate_channels(J: int, basis: Sequence[ChannelState], model: PotentialModel, e_total: float,
                       mu: float, cfg: PropagationConfig) -> SMatrixBlock:
    """S matrix over the open channels of an explicit channel list."""
    open_all = [ch for ch in basis if ch.is_open and ch.k > 0]
    if not open_all:
        raise NumericalError(f"no open channels at J={J}")
    pos = {ch.label: i for i, ch in enumerate(open_all)}
    S = np.zeros((len(open_all), len(open_all)), dtype=complex)
    for parity in (1, -1):
        sub = [ch for ch in basis if ch.parity == parity]
        op = [ch for ch in sub if ch.is_open and ch.k > 0]
        if not op:
            continue
        W, _ = _w_builder(sub, model, e_total, mu)
        h = _step_size(sub, model, e_total, mu, cfg)
        Y0 = free_regular_logderiv(sub, cfg.R_start)
        Y = log_derivative(W, cfg.R_start, cfg.R_match, h, Y0)
        K = match_k_matrix(Y, sub, cfg.R_match)
        ix = [pos[ch.label] for ch in op]
        S[np.ix_(ix, ix)] = s_from_k(K)
    return SMatrixBlock(J, tuple(open_all), S)


def propagate(J: int, spec: CollisionSpec, model: PotentialModel, cfg: PropagationConfig) -> SMatrixBlock:
    """S matrix over the open channels of the total-J block."""
    return propagate_channels(J, build_channel_basis(spec, J), model, spec.total_energy, spec.mu, cfg)


def phase_shift(l: int, energy: float, model: PotentialModel, mu: float | None = None,
                cfg: PropagationConfig | None = None) -> float:
    """Phase shift in (-pi/2, pi/2] for one structureless channel (isotropic part of ``model``)."""
    mu = DEFAULT.mu_H2_H2 if mu is None else mu
    cfg = cfg or PropagationConfig()
    k = np.sqrt(mu * energy / DEFAULT.hbar2_over_2amuA2_cm1)
    ch = ChannelState(0, 0, 0, 0, 0, l, l, 0.0, float(k), True)
    S = propagate_channels(l, [ch], model, energy, mu, cfg).S[0, 0]
    d = 0.5 * np.angle(S)
    return float(d - np.pi if d > np.pi / 2 else d)


def propagate_converged(J, spec, model, cfg: PropagationConfig, tol: float = 1e-7,
                        max_halvings: int = 4) -> SMatrixBlock:
    """Halve the step until S changes by less than ``tol`` (max abs element)."""
    block = propagate(J, spec, model, cfg)
    for _ in range(max_halvings):
        cfg = cfg.halved()
        finer = propagate(J, spec, model, cfg)
        change = float(np.max(np.abs(finer.S - block.S)))
        block = finer
        if change < tol:
            return block
    log.warning("J=%d: S not converged to %.1e after %d halvings", J, tol, max_halvings)
    return block


def _solve_one(args):
    J, spec, model, cfg = args
    if cfg.converge_tol:
        return propagate_converged(J, spec, model, cfg, cfg.converge_tol)
    return propagate(J, spec, model, cfg)


def solve(spec: CollisionSpec, model: PotentialModel, cfg: PropagationConfig | None = None,
          workers: int = 1) -> TMatrixSet:
    """Solve every J block up to ``J_max`` and collect a :class:`TMatrixSet`."""
    cfg = cfg or PropagationConfig.default_for(spec.collision_energy)
    J_max = spec.J_max if cfg.J_max is None else cfg.J_max
    jobs = [(J, spec, model, cfg) for J in range(J_max + 1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_one, jobs))
    else:
        results = [_solve_one(job) for job in jobs]
    blocks = {b.J: t_from_s(b) for b in results}
    levels = {(lv.j, lv.v): lv.energy for lv in spec.levels()}
    meta = {
        "potential_hash": model.digest(),
        "truncation": f"j_max={spec.j_max},v_max={spec.v_max},J_max={J_max}",
        "R_match": cfg.R_match,
        "max_unitarity_defect": max(b.unitarity_defect() for b in results),
        "initial": format_pair(spec.initial),
    }
    if spec.pair_energy_max is not None:
        meta["pair_energy_max"] = spec.pair_energy_max
    return TMatrixSet(spec.collision_energy, spec.total_energy, spec.mu, levels, blocks,
                      "solved", CONVENTION, meta)
