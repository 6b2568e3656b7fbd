"""Control metric d_c for quoted cross sections and for solved ones.

Without arguments, evaluates d_c for two reference triples (sigma+, sigma-,
sigma_pair) in A^2; with ``--tmatrix`` files, evaluates it for the elastic
transition of each set.

    python scripts/control_metric_table.py --tmatrix results/elastic/tmatrix_E*.txt
"""
import argparse
import json

import numpy as np

from entscat import tmx
from entscat.amplitude import TransitionSpec
from entscat.basis import parse_pair
from entscat.xsec import control_metric, dcs

REFERENCE = [(511.0, 346.0, 428.0), (1014.0, 11.0, (1014.0 + 11.0) / 2)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tmatrix", nargs="*", default=[])
    args = ap.parse_args()
    rows = [{"source": "reference", "sigma_plus": p, "sigma_minus": m, "sigma_pair": q,
             "d_c": control_metric(p, m, q)} for p, m, q in REFERENCE]
    th = np.array([0.0])
    for path in args.tmatrix:
        t = tmx.load(path)
        pair = parse_pair(str(t.meta["initial"]))
        tr = TransitionSpec.build(t, pair, pair)
        p, m, q = (dcs(t, tr, k, theta=th).exact_total() for k in ("plus", "minus", "pair"))
        rows.append({"source": path, "E_k": t.collision_energy, "sigma_plus": p, "sigma_minus": m,
                     "sigma_pair": q, "d_c": control_metric(p, m, q)})
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
