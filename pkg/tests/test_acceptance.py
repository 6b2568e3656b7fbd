"""One test per acceptance criterion; each records a PASS/FAIL line printed after the run."""
import math
import os

import numpy as np
import pytest

from entscat.amplitude import TransitionSpec, amplitude_field, pm_coefficients
from entscat.basis import CollisionSpec
from entscat.ccsolve import PropagationConfig, phase_shift, solve
from entscat.entangle import (EntangledPairState, ProductPrep, beta_switch_coefficients,
                              decompose_product, pm_basis_coefficients)
from entscat.pes import default_model, isotropic_model, load_potential
from entscat.tmx import check_exchange_relation
from entscat.vibwave import VibGridSpec, VibInitialState, energy_scan
from entscat.xsec import averaging_identity_check, control_metric, dcs

import oracles
from conftest import ACCEPTANCE, ELASTIC, FINAL_22, INELASTIC, synth_elastic, synth_inelastic


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = ("PASS" if ok else "FAIL", detail)
    assert ok, f"criterion {n}: {detail}"


def _route_dev(t, spec, route_a, route_b):
    """Largest |a - b| on the 181 x 8 grid over all final m and both signs, over the largest |a|."""
    diff = scale = 0.0
    for m1p, m2p in spec.final_m_pairs():
        s = spec.with_final_m(m1p, m2p)
        for sign in (1, -1):
            a = amplitude_field(t, s, route_a, sign, n_theta=181, n_phi=8).values
            b = amplitude_field(t, s, route_b, sign, n_theta=181, n_phi=8).values
            diff = max(diff, float(np.max(np.abs(a - b))))
            scale = max(scale, float(np.max(np.abs(a))))
    return diff / scale


# 1 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_01_averaging_identity(solved_elastic_4):
    sets = [synth_elastic(s, J_max=5) for s in range(12)] + [synth_inelastic(s, J_max=4) for s in range(8)]
    worst = 0.0
    for t in sets:
        initial, final = (INELASTIC, FINAL_22) if (4, 0) in t.levels else (ELASTIC, ELASTIC)
        rep = averaging_identity_check(t, TransitionSpec.build(t, initial, final))
        worst = max(worst, rep.integrated, rep.per_m)
    solved = averaging_identity_check(solved_elastic_4, TransitionSpec.build(solved_elastic_4, ELASTIC, ELASTIC))
    worst_all = max(worst, solved.integrated, solved.per_m)
    record(1, worst_all < 1e-10,
           f"max rel. deviation {worst_all:.2e} over {len(sets)} synthetic + 1 solved set (tol 1e-10)")


# 2 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_02_route_equivalence(solved_elastic_4, solved_inelastic_4, synth_set, synth_set_inelastic):
    devs = {
        "solved elastic": _route_dev(solved_elastic_4, TransitionSpec.build(solved_elastic_4, ELASTIC, ELASTIC),
                                     "pm", "outgoing"),
        "solved inelastic": _route_dev(solved_inelastic_4,
                                       TransitionSpec.build(solved_inelastic_4, INELASTIC, FINAL_22),
                                       "pm", "outgoing"),
        "synthetic elastic": _route_dev(synth_set, TransitionSpec.build(synth_set, ELASTIC, ELASTIC),
                                        "pm", "outgoing"),
        "synthetic inelastic": _route_dev(synth_set_inelastic,
                                          TransitionSpec.build(synth_set_inelastic, INELASTIC, FINAL_22),
                                          "pm", "outgoing"),
    }
    worst = max(devs.values())
    record(2, worst < 1e-8, "max rel. deviation " + ", ".join(f"{k} {v:.1e}" for k, v in devs.items())
           + " (tol 1e-8)")


# 3 ---------------------------------------------------------------------------

def _parity_filter_dev(t, initial, final):
    spec = TransitionSpec.build(t, initial, final)
    even_zeroed = t.map_entries(lambda J, a, b, v: 0j if b[5] % 2 == 0 else v)
    odd_zeroed = t.map_entries(lambda J, a, b, v: 0j if b[5] % 2 == 1 else v)
    worst = 0.0
    for m1p, m2p in spec.final_m_pairs():
        s = spec.with_final_m(m1p, m2p)
        full = {sg: pm_coefficients(t, s, sg) for sg in (1, -1)}
        norm = math.sqrt(full[1].norm2() + full[-1].norm2())
        if norm == 0:
            continue
        for zeroed, dead, alive in ((even_zeroed, 1, -1), (odd_zeroed, -1, 1)):
            d = pm_coefficients(zeroed, s, dead)
            a = pm_coefficients(zeroed, s, alive)
            worst = max(worst, math.sqrt(d.norm2()) / norm)
            keys = set(a.c) | set(full[alive].c)
            diff = math.sqrt(sum(abs(a.c.get(l, 0) - full[alive].c.get(l, 0)) ** 2 for l in keys))
            worst = max(worst, diff / norm)
    return worst


@pytest.mark.slow
def test_criterion_03_parity_exclusivity(solved_elastic_4, synth_set, synth_set_inelastic):
    asym = synth_elastic(8, exchange_symmetric=False)
    devs = [_parity_filter_dev(solved_elastic_4, ELASTIC, ELASTIC),
            _parity_filter_dev(synth_set, ELASTIC, ELASTIC),
            _parity_filter_dev(asym, ELASTIC, ELASTIC),
            _parity_filter_dev(synth_set_inelastic, INELASTIC, FINAL_22)]
    worst = max(devs)
    record(3, worst < 1e-13, f"max residual / unfiltered norm {worst:.1e} over 4 sets (tol 1e-13)")


# 4 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_04_solver(solved_elastic_4, solved_inelastic_4):
    iso = isotropic_model()
    wrap = lambda d: abs((d + math.pi / 2) % math.pi - math.pi / 2)  # noqa: E731
    phase_err = max(wrap(phase_shift(l, E, iso) - ref) for E, l, ref in oracles.PHASE_TABLE)
    live = [(E, 1) for E in (2.0, 25.0)]
    live_err = max(wrap(phase_shift(l, E, iso) - oracles.phase_shift_ivp(iso, l, E, 1.00794)) for E, l in live)
    n_energies = len({E for E, _, _ in oracles.PHASE_TABLE})
    unit = max(solved_elastic_4.max_unitarity_defect(), solved_inelastic_4.max_unitarity_defect())
    ex = check_exchange_relation(solved_inelastic_4, (2, 0, 2, 0), (4, 0, 0, 0))
    ex_rev = check_exchange_relation(solved_inelastic_4, (2, 0, 2, 0), (0, 0, 4, 0))
    exch = max(ex.max_deviation, ex_rev.max_deviation)
    ok = max(phase_err, live_err) < 1e-6 and unit < 1e-6 and exch < 1e-6 and n_energies >= 10
    record(4, ok, f"phase shifts {max(phase_err, live_err):.1e} rad over {n_energies} energies; "
                  f"unitarity {unit:.1e}; exchange relation {exch:.1e} over {ex.n_compared + ex_rev.n_compared} "
                  f"elements (tols 1e-6)")


# 5 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_05_reduced_formula(solved_inelastic_4, synth_set_inelastic):
    dev = max(_route_dev(t, TransitionSpec.build(t, INELASTIC, FINAL_22), "pm", "reduced")
              for t in (solved_inelastic_4, synth_set_inelastic))
    # j12' parity selection: elements with l + j12' odd drop out of the +/- amplitudes
    t = solved_inelastic_4
    spec = TransitionSpec.build(t, INELASTIC, FINAL_22)
    target = lambda a, b: a[:4] == (2, 0, 2, 0) and b[:4] in ((4, 0, 0, 0), (0, 0, 4, 0))  # noqa: E731
    odd_zeroed = t.map_entries(lambda J, a, b, v: 0j if target(a, b) and (b[5] + a[4]) % 2 else v)
    even_zeroed = t.map_entries(lambda J, a, b, v: 0j if target(a, b) and (b[5] + a[4]) % 2 == 0 else v)
    sel = change = 0.0
    scale = 0.0
    for m1p, m2p in spec.final_m_pairs():
        s = spec.with_final_m(m1p, m2p)
        for sign in (1, -1):
            f = amplitude_field(t, s, "pm", sign).values
            sel = max(sel, float(np.max(np.abs(amplitude_field(odd_zeroed, s, "pm", sign).values - f))))
            change = max(change, float(np.max(np.abs(amplitude_field(even_zeroed, s, "pm", sign).values - f))))
            scale = max(scale, float(np.max(np.abs(f))))
    sel, change = sel / scale, change / scale
    ok = dev < 1e-8 and sel < 1e-8 and change > 1e-3
    record(5, ok, f"reduced vs full {dev:.1e} (tol 1e-8); zeroing l+j12' odd changes f by {sel:.1e}, "
                  f"zeroing l+j12' even by {change:.2f}")


# 6 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_06_minima_parity(solved_elastic_4):
    counts = {}
    for E, J_max in ((0.4, 8), (4.0, None), (40.0, 16)):
        if J_max is None:
            t = solved_elastic_4
        else:
            t = solve(CollisionSpec(E, ELASTIC, 2, J_max=J_max), default_model(), PropagationConfig.default_for(E))
        spec = TransitionSpec.build(t, ELASTIC, ELASTIC)
        counts[E] = (dcs(t, spec, "plus").minima_count(), dcs(t, spec, "minus").minima_count())
    ok = all(p % 2 == 0 and m % 2 == 1 for p, m in counts.values())
    record(6, ok, "minima (+, -): " + ", ".join(f"{E:g} cm-1 {p}/{m}" for E, (p, m) in counts.items())
           + " (want even/odd)")


# 7 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_07_ultracold(solved_elastic_ultracold):
    t = solved_elastic_ultracold
    spec = TransitionSpec.build(t, ELASTIC, ELASTIC)
    sp, sm = dcs(t, spec, "plus").total, dcs(t, spec, "minus").total
    low = 0.0
    for m1p, m2p in spec.final_m_pairs():
        s = spec.with_final_m(m1p, m2p)
        for sign in (1, -1):
            low += pm_coefficients(t, s, sign, l_filter=lambda l: l <= 2).norm2()
    low *= spec.k_final / spec.k
    share = low / (sp + sm)
    ratio = sm / sp
    record(7, ratio < 0.05 and share > 0.99,
           f"E_k 0.04 cm-1: sigma-/sigma+ = {ratio:.4f} (tol 0.05); incoming l <= 2 carries {100 * share:.2f}%")


# 8 ---------------------------------------------------------------------------

def test_criterion_08_entangled_algebra():
    rng = np.random.default_rng(2024)
    worst_norm = worst_rt = 0.0
    n = 0
    while n < 1000:
        a1, a2 = rng.uniform(-math.pi, math.pi, 2)
        b1, b2 = rng.uniform(-math.pi, math.pi, 2)
        if math.hypot(math.cos(a1) * math.sin(a2), math.sin(a1) * math.cos(a2)) < 1e-6:
            continue
        prep = ProductPrep(a1, b1, a2, b2)
        d = decompose_product(prep)
        worst_norm = max(worst_norm, abs(d.norm - 1))
        want, got = prep.expansion(), d.expansion()
        worst_rt = max(worst_rt, max(abs(want[k] - got[k]) for k in want))
        n += 1
    wp, wm = beta_switch_coefficients([0.0, math.pi])
    cp0, cm0 = pm_basis_coefficients(EntangledPairState((2, 0, 0), (0, 0, 0), math.pi / 4, 0.0))
    endpoints = (wp[0] == 0.5 and wm[0] == 0.0 and wm[1] == 0.5 and abs(wp[1]) < 1e-16
                 and abs(cm0) < 1e-16 and abs(abs(cp0) - 1) < 1e-15)
    ok = worst_norm < 1e-12 and worst_rt < 1e-12 and endpoints
    record(8, ok, f"1000 preps: norm {worst_norm:.1e}, round trip {worst_rt:.1e} (tol 1e-12); "
                  f"beta endpoints {'exact' if endpoints else 'wrong'}")


# 9 ---------------------------------------------------------------------------

def test_criterion_09_control_metric():
    a = control_metric(511, 346, 428)
    b = control_metric(1014, 11, (1014 + 11) / 2)
    record(9, abs(a - 39) <= 0.5 and abs(b - 196) <= 2, f"d_c = {a:.2f}% (39 +- 0.5), {b:.2f}% (196 +- 2)")


# 10 --------------------------------------------------------------------------

STRETCH_FILE = os.environ.get("ENTSCAT_STRETCH_POTENTIAL")


@pytest.mark.slow
@pytest.mark.stretch
@pytest.mark.xfail(reason="stretch target, allowed to fail", strict=False)
def test_criterion_10_stretch_literature_values():
    if not STRETCH_FILE:
        ACCEPTANCE[10] = ("SKIP", "stretch: set ENTSCAT_STRETCH_POTENTIAL to a potential file (j<=8, J<=30 run)")
        pytest.skip("no literature potential file")
    model = load_potential(STRETCH_FILE)
    t = solve(CollisionSpec(4.0, ELASTIC, 8, J_max=30), model, PropagationConfig.default_for(4.0))
    spec = TransitionSpec.build(t, ELASTIC, ELASTIC)
    sp, sm = dcs(t, spec, "plus").total, dcs(t, spec, "minus").total
    ok = abs(sp / 511 - 1) < 0.15 and abs(sm / 346 - 1) < 0.15
    ACCEPTANCE[10] = ("PASS" if ok else "FAIL", f"stretch (allowed to fail): sigma+ {sp:.0f}, sigma- {sm:.0f} "
                                                 f"vs 511/346 within 15%")
    assert ok


# 11 --------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_11_vibrational_model():
    res = energy_scan(VibGridSpec(), VibInitialState(), [350.0, 500.0, 700.0], [0.0, math.pi / 2, math.pi])
    P = res.P
    ordered = bool(np.all(P[0] > P[1]) and np.all(P[1] > P[2]))
    nd = float(np.max(res.norm_defect))
    record(11, ordered and nd < 1e-3,
           "P11(beta=0 > pi/2 > pi) at 350/500/700 cm-1: "
           + "; ".join("/".join(f"{x:.3g}" for x in P[:, i]) for i in range(P.shape[1]))
           + f"; norm defect {nd:.1e} (tol 1e-3)")
