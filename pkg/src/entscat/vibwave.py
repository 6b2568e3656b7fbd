"""Collinear vibration-vibration energy transfer by wavepacket propagation.

Two diatoms on a common axis, molecular axes along the approach direction and
rotation frozen.  Coordinates: the separation ``R`` of the molecular centres
and the bond lengths ``r1``, ``r2``.  The Hamiltonian is

    H = T_R + h(r1) + h(r2) + V(R - (r1 - re)/2 - (r2 - re)/2)

with Morse oscillators ``h`` and ``V`` the collinear cut of a
:class:`~entscat.pes.PotentialModel`; stretching either bond moves the two
inner atoms closer, which is what couples vibration to translation.

Representation: the oscillators are diagonalized on an ``r`` grid (sinc DVR),
the coupling is integrated on the full ``(R, r1, r2)`` grid, and the wave
function is carried as ``psi_n(R)`` over product levels ``n = (v1, v2)``.  Each
step is a symmetric split: half kinetic step in ``R`` by FFT, full step of the
exactly exponentiated local matrix ``h1 + h2 + V(R)`` plus an absorbing
potential at large ``R``, half kinetic step.  Channel probabilities are the
time-integrated flux through an analysis surface ``R_s`` projected on each
product level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import DEFAULT
from .errors import ConfigError, InputDomainError
from .pes import PotentialModel, collinear_geometry, default_model


@dataclass(frozen=True)
class MorseOscillator:
    De: float = 38292.0  # cm^-1
    a: float = 1.9426  # 1/angstrom
    re: float = 0.7414  # angstrom
    mu: float = field(default_factory=lambda: DEFAULT.mass_H_amu / 2)

    def __call__(self, r):
        x = 1.0 - np.exp(-self.a * (np.asarray(r, dtype=float) - self.re))
        return self.De * x * x

    def analytic_level(self, v: int) -> float:
        """``w (v+1/2) - wx (v+1/2)^2`` relative to the well bottom."""
        c = DEFAULT.hbar2_over_2amuA2_cm1
        w = 2.0 * math.sqrt(c * self.a ** 2 * self.De / self.mu)
        wx = c * self.a ** 2 / self.mu
        return w * (v + 0.5) - wx * (v + 0.5) ** 2


@dataclass(frozen=True)
class VibGridSpec:
    R_min: float = 1.8
    R_max: float = 26.0
    n_R: int = 384
    r_min: float = 0.3
    r_max: float = 1.6
    n_r: int = 64
    v_basis: int = 3  # product levels with v1, v2 <= v_basis
    R_analysis: float = 17.0
    absorber_start: float = 19.0
    absorber_strength: float = 2000.0  # cm^-1 at R_max (quadratic ramp)
    dt: float = 0.1  # fs
    t_final: float = 1500.0  # fs
    v_cap: float = 5.0e4  # cm^-1; clip of the intermolecular potential

    def __post_init__(self):
        if not self.R_min < self.R_analysis < self.absorber_start < self.R_max:
            raise ConfigError("need R_min < R_analysis < absorber_start < R_max")
        if not 0 < self.r_min < self.r_max:
            raise ConfigError("need 0 < r_min < r_max")
        if self.n_R < 16 or self.n_r < 8 or self.v_basis < 2:
            raise ConfigError("grid too small (n_R >= 16, n_r >= 8, v_basis >= 2)")
        if self.dt <= 0 or self.t_final <= 0:
            raise ConfigError("dt and t_final must be positive")

    @property
    def R(self) -> np.ndarray:
        return self.R_min + (self.R_max - self.R_min) * np.arange(self.n_R) / self.n_R

    @property
    def dR(self) -> float:
        return (self.R_max - self.R_min) / self.n_R

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_r)

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_final / self.dt))


@dataclass(frozen=True)
class VibInitialState:
    """``cos(alpha)|0,2> + e^{i beta} sin(alpha)|2,0>`` times an incoming Gaussian in ``R``."""

    alpha: float = math.pi / 4
    beta: float = 0.0
    energy: float = 500.0  # mean collision energy, cm^-1
    R0: float = 11.0
    width: float = 1.0  # position width sigma, angstrom
    levels: tuple = ((0, 2), (2, 0))

    def __post_init__(self):
        if self.energy <= 0 or self.width <= 0:
            raise InputDomainError("energy and width must be positive")
        if tuple(self.levels[0]) == tuple(self.levels[1]):
            raise InputDomainError("the two product levels must differ")

    def energy_width(self, mu: float) -> float:
        """Standard deviation of the collision energy, cm^-1."""
        c = DEFAULT.hbar2_over_2amuA2_cm1
        k0 = math.sqrt(mu * self.energy / c)
        return 2.0 * c * k0 * (0.5 / self.width) / mu

    def coefficients(self) -> tuple[complex, complex]:
        return complex(math.cos(self.alpha)), math.sin(self.alpha) * complex(math.cos(self.beta), math.sin(self.beta))


def sinc_dvr_levels(osc: MorseOscillator, r: np.ndarray, n_levels: int):
    """Lowest eigenpairs of ``-(c/mu) d2/dr2 + V`` on a uniform grid (Colbert-Miller DVR).

    Eigenvectors are returned as grid amplitudes normalized so that
    ``sum |phi|^2 = 1`` with the node spacing absorbed.
    """
    c = DEFAULT.hbar2_over_2amuA2_cm1
    dx = r[1] - r[0]
    n = len(r)
    i = np.arange(n)
    d = i[:, None] - i[None, :]
    with np.errstate(divide="ignore"):
        T = np.where(d == 0, math.pi ** 2 / 3.0, 2.0 * (-1.0) ** np.abs(d) / np.where(d == 0, 1, d) ** 2)
    H = (c / osc.mu) / dx ** 2 * T + np.diag(osc(r))
    e, U = np.linalg.eigh(H)
    U = U[:, :n_levels]
    U = U * np.sign(U[np.argmax(np.abs(U), axis=0), np.arange(n_levels)])
    return e[:n_levels], U


def _intermolecular(model: PotentialModel | None):
    if model is None:
        model = default_model()
    geo = collinear_geometry(model)
    return lambda x: model(np.maximum(x, 0.5), geo)


@dataclass
class VibSystem:
    """Precomputed matrices for one grid, oscillator and potential."""

    grid: VibGridSpec
    channels: list  # (v1, v2)
    energies: np.ndarray  # product level energies, cm^-1 (well bottom = 0)
    coupling: np.ndarray  # (n_R, n_ch, n_ch) intermolecular matrix, cm^-1
    mu: float

    def index(self, v1: int, v2: int) -> int:
        return self.channels.index((v1, v2))


def build_system(grid: VibGridSpec, model: PotentialModel | None = None,
                 osc: MorseOscillator | None = None, coupled: bool = True,
                 mu: float | None = None) -> VibSystem:
    """Oscillator levels and coupling matrices.

    ``coupled=False`` evaluates the intermolecular potential at the centre
    separation only, so vibration and translation decouple.
    """
    osc = osc or MorseOscillator()
    mu = DEFAULT.mu_H2_H2 if mu is None else mu
    nv = grid.v_basis + 1
    ev, U = sinc_dvr_levels(osc, grid.r, nv)
    chans = [(a, b) for a in range(nv) for b in range(nv)]
    energies = np.array([ev[a] + ev[b] for a, b in chans])
    vint = _intermolecular(model)
    R = grid.R
    n = len(chans)
    if coupled:
        x = grid.r - osc.re
        Reff = R[:, None, None] - 0.5 * x[None, :, None] - 0.5 * x[None, None, :]
        V = np.minimum(vint(Reff.ravel()).reshape(Reff.shape), grid.v_cap)
        phi2 = np.einsum("ia,ib->iab", U, U)  # (n_r, nv, nv)
        X = np.einsum("Rij,jcd->Ricd", V, phi2)
        full = np.einsum("iab,Ricd->Racbd", phi2, X)  # bra (a, c), ket (b, d)
        coupling = full.reshape(len(R), n, n)
    else:
        v = np.minimum(vint(R), grid.v_cap)
        coupling = v[:, None, None] * np.eye(n)[None, :, :]
    coupling = 0.5 * (coupling + np.transpose(coupling, (0, 2, 1)))
    return VibSystem(grid, chans, energies, coupling, mu)


def _check_stability(sys: VibSystem, init: VibInitialState) -> None:
    g = sys.grid
    c = DEFAULT.hbar2_over_2amuA2_cm1
    hbar = DEFAULT.hbar_cm1_fs
    ia, ib = sys.index(*init.levels[0]), sys.index(*init.levels[1])
    e_tot = init.energy + 0.5 * (sys.energies[ia] + sys.energies[ib])
    k_max = math.sqrt(sys.mu * max(e_tot - sys.energies.min(), init.energy) / c) + 4.0 / init.width
    if g.dR >= math.pi / k_max:
        raise ConfigError(f"R grid too coarse: spacing {g.dR:.4g} A needs < {math.pi / k_max:.4g} A "
                          f"(n_R >= {int(math.ceil((g.R_max - g.R_min) * k_max / math.pi)) + 1})")
    t_max = c * (math.pi / g.dR) ** 2 / sys.mu
    spread = t_max + float(np.ptp(sys.energies)) + g.v_cap
    if g.dt * spread / hbar > math.pi:
        raise ConfigError(f"time step {g.dt} fs too large for the grid energy range {spread:.4g} cm^-1; "
                          f"use dt <= {0.9 * math.pi * hbar / spread:.4g} fs")
    if init.R0 + 5 * init.width > g.R_analysis:
        raise ConfigError("initial packet overlaps the analysis surface (need R0 + 5 width < R_analysis)")


@dataclass
class VibResult:
    channels: list
    probabilities: dict  # (v1, v2) -> time-integrated outgoing flux
    final_norm: float
    inside_norm: float  # norm at R < R_analysis at the final time
    times: np.ndarray
    flux: np.ndarray  # (n_t, n_ch)
    init: VibInitialState

    @property
    def channel_sum(self) -> float:
        return math.fsum(self.probabilities.values())

    @property
    def absorbed(self) -> float:
        return 1.0 - self.final_norm

    @property
    def norm_defect(self) -> float:
        """``|sum_n P_n + norm left inside the analysis surface - 1|``."""
        return abs(self.channel_sum + self.inside_norm - 1.0)


class _Propagator:
    def __init__(self, sys: VibSystem, absorber: bool = True):
        g = sys.grid
        c = DEFAULT.hbar2_over_2amuA2_cm1
        self.hbar = DEFAULT.hbar_cm1_fs
        self.sys = sys
        k = 2 * math.pi * np.fft.fftfreq(g.n_R, d=g.dR)
        self.k = k
        self.kin = c * k ** 2 / sys.mu
        R = g.R
        W = np.zeros_like(R)
        if absorber:
            s = np.clip((R - g.absorber_start) / (g.R_max - g.absorber_start), 0, None)
            W = g.absorber_strength * s ** 2
        self.W = W
        local = sys.coupling + np.diag(sys.energies)[None, :, :]
        self.lam, self.U = np.linalg.eigh(local)
        self.s = int(np.argmin(np.abs(R - g.R_analysis)))
        # row s of the spectral derivative matrix: psi'(R_s) = drow @ psi
        eye = np.eye(g.n_R)
        D = np.fft.ifft(1j * k[:, None] * np.fft.fft(eye, axis=0), axis=0)
        self.drow = np.real(D[self.s])

    def steps(self, psi: np.ndarray, dt: float, n_steps: int, record: bool = True):
        """Advance ``psi`` (n_R, n_ch) in place; yields flux per channel after each step."""
        hb = self.hbar
        half = np.exp(-0.5j * self.kin * dt / hb)[:, None]
        damp = np.exp(-self.W * abs(dt) / hb)[:, None, None]
        # local propagator U exp(-i lam dt) U^T per R node, absorber folded in
        loc = np.matmul(self.U * np.exp(-1j * self.lam * dt / hb)[:, None, :],
                        np.transpose(self.U, (0, 2, 1))) * damp
        pref = 2 * DEFAULT.hbar2_over_2amuA2_cm1 / hb / self.sys.mu  # hbar/mu in A^2/fs
        fft, ifft = np.fft.fft, np.fft.ifft
        for _ in range(n_steps):
            psi = ifft(half * fft(psi, axis=0), axis=0)
            psi = np.matmul(loc, psi[:, :, None])[:, :, 0]
            psi = ifft(half * fft(psi, axis=0), axis=0)
            if record:
                val = psi[self.s]
                der = self.drow @ psi
                yield psi, pref * np.imag(np.conj(val) * der)
            else:
                yield psi, None


def initial_wavefunction(sys: VibSystem, init: VibInitialState) -> np.ndarray:
    g = sys.grid
    c = DEFAULT.hbar2_over_2amuA2_cm1
    k0 = math.sqrt(sys.mu * init.energy / c)
    R = g.R
    env = (2 * math.pi * init.width ** 2) ** -0.25 * np.exp(-(R - init.R0) ** 2 / (4 * init.width ** 2) - 1j * k0 * R)
    env /= math.sqrt(np.sum(np.abs(env) ** 2) * g.dR)
    psi = np.zeros((g.n_R, len(sys.channels)), dtype=complex)
    ca, cb = init.coefficients()
    psi[:, sys.index(*init.levels[0])] += ca * env
    psi[:, sys.index(*init.levels[1])] += cb * env
    return psi * math.sqrt(g.dR)  # grid amplitudes with sum |psi|^2 = 1


def propagate_vib(grid: VibGridSpec, init: VibInitialState, model: PotentialModel | None = None,
                  osc: MorseOscillator | None = None, coupled: bool = True,
                  system: VibSystem | None = None) -> VibResult:
    """Propagate one initial state and return channel probabilities and the flux history."""
    sys = system or build_system(grid, model, osc, coupled)
    _check_stability(sys, init)
    prop = _Propagator(sys)
    psi = initial_wavefunction(sys, init)
    n = grid.n_steps
    flux = np.empty((n, len(sys.channels)))
    for i, (psi_i, f) in enumerate(prop.steps(psi, grid.dt, n)):
        flux[i] = f
        psi = psi_i
    # psi carries sqrt(dR) so the flux needs 1/dR
    flux /= grid.dR
    probs = {ch: float(np.sum(flux[:, j]) * grid.dt) for j, ch in enumerate(sys.channels)}
    return VibResult(sys.channels, probs, float(np.sum(np.abs(psi) ** 2)), _inside(psi, prop.s),
                     grid.dt * np.arange(1, n + 1), flux, init)


def time_reversal_defect(grid: VibGridSpec, init: VibInitialState, n_steps: int = 500,
                         model: PotentialModel | None = None) -> float:
    """``1 - |<psi0|U(-t)U(t)|psi0>|`` with the absorber off."""
    sys = build_system(grid, model)
    prop = _Propagator(sys, absorber=False)
    psi0 = initial_wavefunction(sys, init)
    psi = psi0
    for psi, _ in prop.steps(psi0, grid.dt, n_steps, record=False):
        pass
    for psi, _ in prop.steps(psi, -grid.dt, n_steps, record=False):
        pass
    return float(1.0 - abs(np.vdot(psi0, psi)))


def norm_drift(grid: VibGridSpec, init: VibInitialState, n_steps: int = 1000,
               model: PotentialModel | None = None) -> float:
    """Norm change over ``n_steps`` with the absorber off."""
    sys = build_system(grid, model)
    prop = _Propagator(sys, absorber=False)
    psi = initial_wavefunction(sys, init)
    n0 = float(np.sum(np.abs(psi) ** 2))
    for psi, _ in prop.steps(psi, grid.dt, n_steps, record=False):
        pass
    return abs(float(np.sum(np.abs(psi) ** 2)) - n0)


@dataclass
class ScanResult:
    energies: np.ndarray
    betas: np.ndarray
    alpha: float
    channel: tuple
    P: np.ndarray  # (n_beta, n_E)
    norm_defect: np.ndarray  # (n_beta, n_E)


def energy_scan(grid: VibGridSpec, template: VibInitialState, energies, betas,
                model: PotentialModel | None = None, channel: tuple = (1, 1),
                reuse_linearity: bool = True) -> ScanResult:
    """``P_channel(E)`` for each ``beta``.

    With ``reuse_linearity`` each energy needs two propagations (the two
    product levels separately); the flux of any superposition follows from
    the stored channel amplitudes at the analysis surface, since the flux is
    bilinear in the wave function.  Otherwise one propagation per (E, beta).
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    sys = build_system(grid, model)
    ci = sys.index(*channel)
    P = np.zeros((len(betas), len(energies)))
    nd = np.zeros_like(P)
    for ie, E in enumerate(energies):
        if not reuse_linearity:
            for ib, b in enumerate(betas):
                r = propagate_vib(grid, replace(template, energy=E, beta=b), system=sys)
                P[ib, ie], nd[ib, ie] = r.probabilities[channel], r.norm_defect
            continue
        amps = []
        for which in (0, 1):
            init = replace(template, energy=E, alpha=0.0 if which == 0 else math.pi / 2, beta=0.0)
            amps.append(_surface_amplitudes(sys, init))
        for ib, b in enumerate(betas):
            ca, cb = replace(template, beta=b).coefficients()
            val = ca * amps[0][0] + cb * amps[1][0]
            der = ca * amps[0][1] + cb * amps[1][1]
            f = (2 * DEFAULT.hbar2_over_2amuA2_cm1 / DEFAULT.hbar_cm1_fs / sys.mu) * np.imag(np.conj(val) * der)
            f /= grid.dR
            probs = np.sum(f, axis=0) * grid.dt
            fin = ca * amps[0][2] + cb * amps[1][2]
            P[ib, ie] = probs[ci]
            nd[ib, ie] = abs(math.fsum(probs) + _inside(fin, amps[0][3]) - 1.0)
    return ScanResult(energies, betas, template.alpha, tuple(channel), P, nd)


def _surface_amplitudes(sys: VibSystem, init: VibInitialState):
    _check_stability(sys, init)
    g = sys.grid
    prop = _Propagator(sys)
    psi = initial_wavefunction(sys, init)
    n = g.n_steps
    val = np.empty((n, len(sys.channels)), dtype=complex)
    der = np.empty_like(val)
    for i, (psi_i, _) in enumerate(prop.steps(psi, g.dt, n, record=False)):
        val[i] = psi_i[prop.s]
        der[i] = prop.drow @ psi_i
        psi = psi_i
    return val, der, psi, prop.s


def _inside(psi: np.ndarray, s: int) -> float:
    return float(np.sum(np.abs(psi[:s]) ** 2))


SCAN_COLUMNS = ["E_k", "beta", "alpha", "channel", "P", "norm_defect"]


def scan_csv(res: ScanResult, timestamp: bool = True) -> str:
    import csv
    import io
    import time
    buf = io.StringIO()
    buf.write("# schema entscat-vibscan/1\n")
    buf.write(f"# columns {','.join(SCAN_COLUMNS)}\n")
    if timestamp:
        buf.write(f"# generated {time.strftime('%Y-%m-%dT%H:%M:%SZ', time.gmtime())}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    ch = "-".join(map(str, res.channel))
    for ib, b in enumerate(res.betas):
        for ie, E in enumerate(res.energies):
            w.writerow([repr(float(E)), repr(float(b)), repr(float(res.alpha)), ch,
                        repr(float(res.P[ib, ie])), repr(float(res.norm_defect[ib, ie]))])
    return buf.getvalue()
