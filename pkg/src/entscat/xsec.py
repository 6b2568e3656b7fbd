"""Differential and integral cross sections, the control metric and satellite bookkeeping.

Conventions
-----------
``sigma(theta)`` is the differential cross section summed over final
projections and integrated over phi::

    sigma(theta) = (k'/k) sum_{m1', m2'} int_0^{2 pi} |f(theta, phi)|^2 dphi     [A^2 / sr * rad]

and the integral cross section is ``int_0^pi sigma(theta) sin(theta) dtheta``
over the full range, with no extra 1/2 for identical molecules.  With this
choice the unentangled-pair value is the mean of the ``+`` and ``-`` values.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .amplitude import (AngularCoefficients, TransitionSpec, coefficients_for, pm_coefficients,
                        symmetrized_pair_coefficients)
from .entangle import (Decomposition, EntangledPairState, ProductPrep, decompose_product,
                       pm_basis_coefficients)
from .errors import InputDomainError, MissingTMatrixError
from .tmx import TMatrixSet

DCS_SCHEMA = "entscat-dcs/2"
SUMMARY_SCHEMA = "entscat-summary/1"
DEFAULT_THETA_NODES = 721
DEFAULT_GL_NODES = 64


# ---------------------------------------------------------------------------
# initial-state descriptors

def initial_tag(initial) -> str:
    if isinstance(initial, EntangledPairState):
        return f"alpha={initial.alpha!r};beta={initial.beta!r}"
    return str(initial)


def _coeff_sets(t: TMatrixSet, spec: TransitionSpec, initial, route: str = "pm") -> list[AngularCoefficients]:
    """One coefficient table per final (m1', m2')."""
    out = []
    for m1p, m2p in spec.final_m_pairs():
        s = spec.with_final_m(m1p, m2p)
        if isinstance(initial, EntangledPairState):
            cp, cm = pm_basis_coefficients(initial)
            out.append(coefficients_for(t, s, route, 1).scaled(cp) + coefficients_for(t, s, route, -1).scaled(cm))
        elif initial in ("plus", "+"):
            out.append(coefficients_for(t, s, route, 1))
        elif initial in ("minus", "-"):
            out.append(coefficients_for(t, s, route, -1))
        elif initial == "pair":
            out.append(symmetrized_pair_coefficients(t, s))
        else:
            raise InputDomainError(f"unknown initial state {initial!r}; use plus, minus, pair or an EntangledPairState")
    return out


def _sigma(coeffs: list[AngularCoefficients], theta, flux: float) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape)
    for c in coeffs:
        out += np.abs(c.theta_profile(theta)) ** 2
    return 2 * math.pi * flux * out


def _sigma_numeric_phi(coeffs: list[AngularCoefficients], theta, flux: float, n_phi: int = 16) -> np.ndarray:
    phi = np.arange(n_phi) * (2 * math.pi / n_phi)
    th = np.asarray(theta, dtype=float)
    out = np.zeros(th.shape)
    for c in coeffs:
        vals = c.evaluate(th[..., None], phi)
        out += np.mean(np.abs(vals) ** 2, axis=-1) * 2 * math.pi
    return flux * out


# ---------------------------------------------------------------------------
# reports

@dataclass
class CrossSectionReport:
    theta: np.ndarray
    sigma: np.ndarray
    initial: str
    final_channel: tuple  # (j1', v1', j2', v2')
    collision_energy: float
    total: float = float("nan")
    converged: bool = True
    d_c: float | None = None
    coefficients: list = field(default_factory=list, repr=False)
    flux: float = 1.0

    def exact_total(self) -> float:
        """``(k'/k) sum |c|^2`` by orthogonality of the spherical harmonics."""
        return self.flux * math.fsum(c.norm2() for c in self.coefficients)

    def minima_count(self, rel_prominence: float = 1e-6) -> int:
        return count_minima(self.sigma, rel_prominence)


def dcs(t: TMatrixSet, spec: TransitionSpec, initial="plus", theta=None, route: str = "pm",
        phi_mode: str = "analytic", n_gl: int = DEFAULT_GL_NODES) -> CrossSectionReport:
    """Differential cross section on ``theta`` (default 721 uniform nodes) and its integral.

    ``initial`` is ``"plus"``, ``"minus"``, ``"pair"`` (unentangled pair,
    incoming state symmetrized) or an :class:`EntangledPairState`.
    ``phi_mode="numeric"`` replaces the analytic phi integral with a uniform
    phi quadrature as a cross-check.
    """
    if theta is None:
        theta = np.linspace(0.0, math.pi, DEFAULT_THETA_NODES)
    theta = np.asarray(theta, dtype=float)
    coeffs = _coeff_sets(t, spec, initial, route)
    flux = spec.k_final / spec.k
    if phi_mode == "analytic":
        sig = _sigma(coeffs, theta, flux)
    elif phi_mode == "numeric":
        sig = _sigma_numeric_phi(coeffs, theta, flux)
    else:
        raise InputDomainError("phi_mode must be 'analytic' or 'numeric'")
    (jc, _, vc), (jd, _, vd) = spec.final
    rep = CrossSectionReport(theta, sig, initial_tag(initial), (jc, vc, jd, vd), t.collision_energy,
                             coefficients=coeffs, flux=flux)
    total(rep, n_gl)
    return rep


def _gl_total(coeffs, flux: float, n: int) -> float:
    x, w = np.polynomial.legendre.leggauss(n)
    return float(np.dot(w, _sigma(coeffs, np.arccos(x), flux)))


def total(report: CrossSectionReport, n: int = DEFAULT_GL_NODES, rel_tol: float = 1e-3) -> float:
    """Integral cross section by Gauss-Legendre in cos(theta).

    Sets ``report.converged`` to False when doubling the node count changes
    the value by more than ``rel_tol``.
    """
    if report.coefficients:
        a = _gl_total(report.coefficients, report.flux, n)
        b = _gl_total(report.coefficients, report.flux, 2 * n)
    else:
        # bare tabulated profile: interpolate in theta
        def f(m):
            x, w = np.polynomial.legendre.leggauss(m)
            return float(np.dot(w, np.interp(np.arccos(x), report.theta, report.sigma)))
        a, b = f(n), f(2 * n)
    report.converged = abs(a - b) <= rel_tol * max(abs(b), np.finfo(float).tiny)
    report.total = b
    return b


def count_minima(sigma: np.ndarray, rel_prominence: float = 1e-6) -> int:
    """Interior local minima of a sampled profile, ignoring ripples below ``rel_prominence``."""
    sigma = np.asarray(sigma, dtype=float)
    scale = float(np.max(np.abs(sigma))) or 1.0
    peaks, _ = find_peaks(-sigma, prominence=rel_prominence * scale)
    return int(len(peaks))


# ---------------------------------------------------------------------------
# averaging identity

@dataclass
class IdentityReport:
    """Unentangled-pair versus mean of ``+``/``-`` cross sections.

    ``integrated`` is the relative deviation of the angle-integrated values
    (summed over final projections; the identity), ``per_m`` the largest such
    deviation for a single final (m1', m2'), and ``folded`` the largest pointwise
    deviation between ``(sigma+ + sigma-)/2`` and the pair profile symmetrized
    under theta -> pi - theta.  The unfolded pointwise profiles differ in
    general: the exchanged part of the pair amplitude is the direct part seen
    from the opposite direction.
    """

    integrated: float
    per_m: float
    folded: float
    sigma_pair: float
    sigma_plus: float
    sigma_minus: float

    @property
    def max_deviation(self) -> float:
        return max(self.integrated, self.per_m, self.folded)


def averaging_identity_check(t: TMatrixSet, spec: TransitionSpec, n_theta: int = 181) -> IdentityReport:
    theta = np.linspace(0.0, math.pi, n_theta)
    flux = spec.k_final / spec.k
    per_m = 0.0
    tp = tm = tq = 0.0
    prof_p = np.zeros(n_theta)
    prof_q = np.zeros(n_theta)
    for m1p, m2p in spec.final_m_pairs():
        s = spec.with_final_m(m1p, m2p)
        cq = symmetrized_pair_coefficients(t, s)
        cp, cm = pm_coefficients(t, s, 1), pm_coefficients(t, s, -1)
        q, p, m = cq.norm2(), cp.norm2(), cm.norm2()
        ref = max(q, np.finfo(float).tiny)
        per_m = max(per_m, abs(q - 0.5 * (p + m)) / ref) if q > 0 or p + m > 0 else per_m
        tq, tp, tm = tq + q, tp + p, tm + m
        prof_q += np.abs(cq.theta_profile(theta)) ** 2
        prof_p += 0.5 * (np.abs(cp.theta_profile(theta)) ** 2 + np.abs(cm.theta_profile(theta)) ** 2)
    integrated = abs(tq - 0.5 * (tp + tm)) / max(tq, np.finfo(float).tiny)
    folded_q = 0.5 * (prof_q + prof_q[::-1])
    folded = float(np.max(np.abs(folded_q - prof_p))) / max(float(np.max(prof_p)), np.finfo(float).tiny)
    return IdentityReport(integrated, per_m, folded, flux * tq, flux * tp, flux * tm)


# ---------------------------------------------------------------------------
# control metric

def control_metric(sigma_plus: float, sigma_minus: float, sigma_ref: float) -> float:
    """Percentage of control ``|100 (sigma+ - sigma-) / sigma_ref|``."""
    if sigma_ref == 0 or not math.isfinite(sigma_ref):
        raise InputDomainError("control metric undefined for a zero reference cross section")
    return abs(100.0 * (sigma_plus - sigma_minus) / sigma_ref)


# ---------------------------------------------------------------------------
# satellites

@dataclass
class SatelliteTerm:
    label: str  # "aa" or "bb"
    weight: float  # |coefficient|^2
    sigma: float  # integral cross section of the identical pair, 0 if closed
    closed: bool


@dataclass
class SatelliteReport:
    decomposition: Decomposition
    sigma_entangled: float  # y^2 * sigma(alpha, beta)
    satellites: list
    mode: str

    @property
    def satellite_total(self) -> float:
        return math.fsum(s.weight * s.sigma for s in self.satellites)

    @property
    def total(self) -> float:
        if self.mode == "drop":
            return self.sigma_entangled
        return self.sigma_entangled + self.satellite_total

    @property
    def ratio(self) -> float:
        """Satellite contribution relative to the entangled one."""
        if self.sigma_entangled == 0:
            return math.inf if self.satellite_total > 0 else 0.0
        return self.satellite_total / self.sigma_entangled


def satellite_accounting(t: TMatrixSet, prep: ProductPrep, initial: tuple, final: tuple,
                         satellite_sets: dict | None = None, mode: str = "incoherent",
                         n_gl: int = DEFAULT_GL_NODES) -> SatelliteReport:
    """Cross section of a product of two superpositions into ``final`` (summed over m').

    ``initial`` is the level pair ``(a, b)`` of (j, m, v) triples the two
    superpositions are built from; ``t`` is the T set at the total energy of
    the entangled component.  The satellites ``|a>|a>`` and ``|b>|b>`` have the
    same collision energy but a different total energy, so they need their own
    T sets (``satellite_sets["aa"]``, ``["bb"]``); a satellite whose final
    channel lies above its total energy contributes exactly zero and needs no
    set.  ``mode`` is ``"drop"`` (entangled part only) or ``"incoherent"``
    (satellite cross sections added); coherent satellite interference is not
    modelled.
    """
    if mode not in ("drop", "incoherent"):
        raise InputDomainError("mode must be 'drop' or 'incoherent'")
    satellite_sets = satellite_sets or {}
    dec = decompose_product(prep)
    a, b = (tuple(x) for x in initial)
    state = dec.entangled_state(a, b)
    spec = TransitionSpec.build(t, (a, b), final)
    sig_ent = dec.y ** 2 * dcs(t, spec, state, theta=np.array([0.0]), n_gl=n_gl).total
    (jc, _, vc), (jd, _, vd) = final
    sats = []
    for lab, lev, coeff in (("aa", a, dec.sat_aa), ("bb", b, dec.sat_bb)):
        w = abs(coeff) ** 2
        e_tot = t.collision_energy + 2 * t.levels[(lev[0], lev[2])]
        closed = e_tot < t.pair_energy(jc, vc, jd, vd)
        if closed or w == 0:
            sats.append(SatelliteTerm(lab, w, 0.0, closed))
            continue
        ts = satellite_sets.get(lab)
        if ts is None:
            if mode == "drop":
                sats.append(SatelliteTerm(lab, w, float("nan"), False))
                continue
            raise MissingTMatrixError([(lab, (lev, lev), tuple(final))])
        sspec = TransitionSpec.build(ts, (lev, lev), final)
        sats.append(SatelliteTerm(lab, w, dcs(ts, sspec, "pair", theta=np.array([0.0]), n_gl=n_gl).total, False))
    return SatelliteReport(dec, sig_ent, sats, mode)


# ---------------------------------------------------------------------------
# emitters

def _header(schema: str, columns: list[str], timestamp: bool) -> list[str]:
    lines = [f"# schema {schema}", f"# columns {','.join(columns)}"]
    if timestamp:
        lines.append(f"# generated {time.strftime('%Y-%m-%dT%H:%M:%SZ', time.gmtime())}")
    return lines


DCS_COLUMNS = ["theta_rad", "sigma", "initial_tag", "final_channel", "E_k"]


def dcs_csv(reports: list[CrossSectionReport], timestamp: bool = True) -> str:
    """CSV text with one row per (report, theta node); floats at 17 significant digits."""
    buf = io.StringIO()
    for line in _header(DCS_SCHEMA, DCS_COLUMNS, timestamp):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DCS_COLUMNS)
    for r in reports:
        fc = "-".join(str(x) for x in r.final_channel)
        for th, s in zip(r.theta, r.sigma):
            w.writerow([repr(float(th)), repr(float(s)), r.initial, fc, repr(float(r.collision_energy))])
    return buf.getvalue()


def summary_record(r: CrossSectionReport) -> dict:
    return {"schema": SUMMARY_SCHEMA, "initial_tag": r.initial, "final_channel": list(r.final_channel),
            "E_k": r.collision_energy, "total": r.total, "converged": r.converged, "d_c": r.d_c,
            "minima": r.minima_count()}


def summary_json(reports: list[CrossSectionReport], extra: dict | None = None) -> str:
    doc = {"schema": SUMMARY_SCHEMA, "records": [summary_record(r) for r in reports]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True)
