"""Suppression of the - state at very low collision energy.

For the elastic (2,0) case the - state needs odd partial waves, which are
frozen out near threshold while the + state keeps its s wave.  Prints the
partial-wave-resolved contributions and the ratio sigma-/sigma+ per energy.

    python scripts/ultracold.py --energies 0.04 0.4
"""
import argparse
import json
from pathlib import Path

from entscat.amplitude import TransitionSpec, pm_coefficients
from entscat.basis import CollisionSpec
from entscat.ccsolve import PropagationConfig, solve
from entscat.pes import default_model
from entscat.xsec import control_metric, dcs

INITIAL = ((2, 0, 0), (0, 0, 0))


def by_incoming_l(t, tr, sign: int, l_max: int = 4) -> dict:
    """Integral cross section restricted to one incoming partial wave l."""
    out = {}
    for l in range(l_max + 1):
        tot = 0.0
        for m1p, m2p in tr.final_m_pairs():
            c = pm_coefficients(t, tr.with_final_m(m1p, m2p), sign, l_filter=lambda x, l=l: x == l)
            tot += c.norm2()
        out[l] = tr.k_final / tr.k * tot
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--energies", type=float, nargs="+", default=[0.04])
    ap.add_argument("--J-max", type=int, default=6)
    ap.add_argument("--out", type=Path, default=Path("results/ultracold.json"))
    args = ap.parse_args()
    rows = []
    for E in args.energies:
        spec = CollisionSpec(E, INITIAL, j_max=2, J_max=args.J_max)
        t = solve(spec, default_model(), PropagationConfig.default_for(E))
        tr = TransitionSpec.build(t, INITIAL, INITIAL)
        rp, rm, rq = (dcs(t, tr, k) for k in ("plus", "minus", "pair"))
        row = {"E_k": E, "sigma_plus": rp.total, "sigma_minus": rm.total,
               "ratio_minus_plus": rm.total / rp.total,
               "d_c": control_metric(rp.total, rm.total, rq.total),
               "plus_by_l": by_incoming_l(t, tr, 1), "minus_by_l": by_incoming_l(t, tr, -1)}
        print(json.dumps(row), flush=True)
        rows.append(row)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
