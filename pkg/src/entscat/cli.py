"""Scattering of identical diatoms prepared in entangled internal states.

Exit status: 0 success, 1 validation error, 2 numerical failure, 3 invariant
failure.  Errors are also written to stderr as one JSON record.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, tmx
from .amplitude import ROUTES, TransitionSpec
from .basis import format_pair, parse_pair
from .ccsolve import solve
from .checks import Tolerances, run_battery
from .config import RunConfig
from .entangle import EntangledPairState, ProductPrep, beta_switch_coefficients, decompose_product
from .errors import ConfigError, EntscatError, InputDomainError, InvariantError
from .vibwave import energy_scan, scan_csv
from .xsec import (control_metric, dcs, dcs_csv, satellite_accounting,
                   summary_json, summary_record)

log = logging.getLogger("entscat")

SCAN_SCHEMA = "entscat-scan/1"
SCAN_COLUMNS = ["E_k", "alpha", "beta", "sigma", "sigma_plus", "sigma_minus", "sigma_pair", "d_c", "status"]


# ---------------------------------------------------------------------------
# helpers

def pool_map(fn, items, workers: int = 1) -> list:
    """``map`` over a process pool; serial (and deterministic in order) for ``workers <= 1``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_set(path) -> tmx.TMatrixSet:
    try:
        return tmx.load(path)
    except FileNotFoundError:
        raise ConfigError(f"T-matrix file not found: {path}") from None


def _initial_pair(t: tmx.TMatrixSet, text: str | None):
    if text:
        return parse_pair(text)
    if "initial" not in t.meta:
        raise InputDomainError("T-matrix file records no initial pair; pass --pair j1,m1,v1/j2,m2,v2")
    return parse_pair(str(t.meta["initial"]))


def _final_pair(text: str | None, initial):
    return parse_pair(text) if text else initial


def parse_initial(text: str, pair):
    """``plus``/``minus``/``pair``/``pm`` or ``alpha,beta`` in radians."""
    if text in ("plus", "minus", "pair", "pm"):
        return text
    try:
        alpha, beta = (float(x) for x in text.split(","))
    except ValueError:
        raise InputDomainError(f"--initial must be plus|minus|pair|pm|alpha,beta, got {text!r}") from None
    return EntangledPairState(pair[0], pair[1], alpha, beta)


def _timestamp(args, cfg: RunConfig | None = None) -> bool:
    if getattr(args, "no_timestamp", False):
        return False
    return cfg.raw["output"]["timestamp"] if cfg is not None else True


def _config(args) -> RunConfig:
    return RunConfig.load(getattr(args, "config", None), sets=getattr(args, "set", None))


def _finite(x):
    return x if x is None or math.isfinite(x) else None


# ---------------------------------------------------------------------------
# subcommands

def cmd_solve(args) -> int:
    cfg = _config(args)
    spec = cfg.collision_spec()
    t0 = time.perf_counter()
    t = solve(spec, cfg.potential(), cfg.propagation_config(), workers=args.workers)
    out = args.output or cfg.raw["output"]["path"] or "tmatrix.txt"
    tmx.save(t, out)
    print(json.dumps({"output": str(out), "J_max": max(t.J_values), "n_blocks": len(t.blocks),
                      "max_unitarity_defect": t.max_unitarity_defect(),
                      "max_symmetry_defect": t.max_symmetry_defect(),
                      "seconds": round(time.perf_counter() - t0, 3)}, sort_keys=True))
    return 0


def cmd_synth(args) -> int:
    cfg = _config(args)
    t = tmx.synthesize_unitary(cfg.collision_spec(), args.seed,
                               exchange_symmetric=not args.no_exchange_symmetry)
    out = args.output or cfg.raw["output"]["path"] or "tmatrix.txt"
    tmx.save(t, out)
    print(json.dumps({"output": str(out), "seed": args.seed, "n_blocks": len(t.blocks),
                      "max_unitarity_defect": t.max_unitarity_defect()}, sort_keys=True))
    return 0


def _dcs_job(job):
    path, pair, final, initial, route, n_theta = job
    t = _load_set(path)
    spec = TransitionSpec.build(t, pair, final)
    theta = np.linspace(0.0, math.pi, n_theta)
    return dcs(t, spec, initial, theta=theta, route=route)


def _reports(args):
    t = _load_set(args.tmatrix)
    pair = _initial_pair(t, args.pair)
    final = _final_pair(args.final, pair)
    TransitionSpec.build(t, pair, final)  # closed channels fail here, before any work
    initial = parse_initial(args.initial, pair)
    kinds = ["plus", "minus", "pair"] if initial == "pm" else [initial]
    route = args.route
    jobs = [(args.tmatrix, pair, final, k, route if k != "pair" else "pm", args.n_theta) for k in kinds]
    reports = pool_map(_dcs_job, jobs, args.workers)
    extra = {}
    if initial == "pm":
        rp, rm, rq = reports
        d = control_metric(rp.total, rm.total, rq.total)
        rp.d_c = rm.d_c = d
        extra = {"d_c": d, "sigma_pair": rq.total}
        reports = [rp, rm]
    return reports, extra


def cmd_dcs(args) -> int:
    reports, extra = _reports(args)
    _write(dcs_csv(reports, timestamp=_timestamp(args)), args.output)
    summary = summary_json(reports, extra)
    if args.summary:
        Path(args.summary).write_text(summary + "\n")
    elif args.output not in (None, "-"):
        print(summary)
    return 0


def cmd_total(args) -> int:
    reports, extra = _reports(args)
    recs = []
    for r in reports:
        rec = summary_record(r)
        rec["total_exact"] = r.exact_total()
        recs.append(rec)
    doc = {"records": recs, **extra}
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_verify(args) -> int:
    t = _load_set(args.tmatrix)
    pair = _initial_pair(t, args.pair)
    finals = [parse_pair(f) for f in args.final] if args.final else None
    tol = Tolerances(unitarity=args.tol_unitarity, symmetry=args.tol_unitarity,
                     exchange=args.tol_exchange)
    rep = run_battery(t, pair, finals, tol)
    doc = {"tmatrix": str(args.tmatrix), "initial": format_pair(pair), "passed": rep.passed,
           "checks": [c.to_dict() for c in rep.checks]}
    for c in doc["checks"]:
        c["value"] = _finite(c["value"])
    print(json.dumps(doc, indent=2))
    for c in rep.failures:
        log.error("FAIL %s: %.3e >= %.1e %s", c.name, c.value, c.tol, c.detail)
    if not rep.passed:
        raise InvariantError(f"{len(rep.failures)} invariant check(s) failed: "
                             + ", ".join(c.name for c in rep.failures))
    return 0


# -- scan --------------------------------------------------------------------

def _cell_key(source: str, alpha: float, beta: float) -> str:
    return f"{source}|{alpha!r}|{beta!r}"


def _scan_source(job):
    """All pending (alpha, beta) cells of one T set; failures are recorded per cell."""
    source, pair_text, final_text, cells = job
    out = []
    try:
        t = _load_set(source)
        pair = _initial_pair(t, pair_text)
        spec = TransitionSpec.build(t, pair, _final_pair(final_text, pair))
        theta0 = np.array([0.0])
        sp = dcs(t, spec, "plus", theta=theta0).exact_total()
        sm = dcs(t, spec, "minus", theta=theta0).exact_total()
        sq = dcs(t, spec, "pair", theta=theta0).exact_total()
        d_c = control_metric(sp, sm, sq) if sq > 0 else math.nan
    except EntscatError as exc:
        return [{"key": _cell_key(source, a, b), "source": source, "alpha": a, "beta": b,
                 "status": "failed", "error": f"{type(exc).__name__}: {exc}",
                 "exit_code": exc.exit_code} for a, b in cells]
    for a, b in cells:
        rec = {"key": _cell_key(source, a, b), "source": source, "alpha": a, "beta": b,
               "E_k": t.collision_energy}
        try:
            state = EntangledPairState(pair[0], pair[1], a, b)
            s = dcs(t, spec, state, theta=theta0).exact_total()
            rec.update(status="ok", sigma=s, sigma_plus=sp, sigma_minus=sm, sigma_pair=sq, d_c=d_c)
        except EntscatError as exc:
            rec.update(status="failed", error=f"{type(exc).__name__}: {exc}", exit_code=exc.exit_code)
        out.append(rec)
    return out


def _read_manifest(path: Path) -> dict:
    done = {}
    if path.exists():
        for line in path.read_text().splitlines():
            if line.strip():
                rec = json.loads(line)
                done[rec["key"]] = rec
    return done


def _scan_sources(args) -> list[str]:
    sources = [str(p) for p in args.tmatrix]
    if args.energies:
        cfg = _config(args)
        workdir = Path(args.workdir or ".")
        workdir.mkdir(parents=True, exist_ok=True)
        model = cfg.potential()
        for E in args.energies:
            path = workdir / f"tmatrix_E{E!r}.txt"
            if not path.exists():
                sub = RunConfig.load(args.config, sets=list(args.set or []) + [f"collision.energy={E!r}"])
                log.info("solving inline at E_k=%r -> %s", E, path)
                t = solve(sub.collision_spec(), model, sub.propagation_config(), workers=args.workers)
                tmx.save(t, path)
            sources.append(str(path))
    if not sources:
        raise ConfigError("scan needs T-matrix files or --energies with --config")
    return sources


def cmd_scan(args) -> int:
    sources = _scan_sources(args)
    alphas = args.alpha or [math.pi / 4]
    betas = args.beta or list(np.linspace(0.0, 2 * math.pi, 9)[:-1])
    manifest = Path(args.manifest or (str(args.output) + ".manifest.jsonl" if args.output not in (None, "-")
                                      else "scan.manifest.jsonl"))
    done = _read_manifest(manifest)
    jobs = []
    for src in sources:
        pending = [(float(a), float(b)) for a in alphas for b in betas
                   if done.get(_cell_key(src, float(a), float(b)), {}).get("status") != "ok"]
        if pending:
            jobs.append((src, args.pair, args.final, pending))
    n_skip = len(sources) * len(alphas) * len(betas) - sum(len(j[3]) for j in jobs)
    log.info("scan: %d cells done previously, %d pending", n_skip, sum(len(j[3]) for j in jobs))
    with manifest.open("a") as fh:
        for recs in pool_map(_scan_source, jobs, args.workers):
            for rec in recs:
                done[rec["key"]] = rec
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    rows = [done[_cell_key(s, float(a), float(b))] for s in sources for a in alphas for b in betas]
    buf = io.StringIO()
    buf.write(f"# schema {SCAN_SCHEMA}\n# columns {','.join(SCAN_COLUMNS)}\n")
    if _timestamp(args):
        buf.write(f"# generated {time.strftime('%Y-%m-%dT%H:%M:%SZ', time.gmtime())}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    nan = float("nan")
    for r in rows:
        w.writerow([repr(float(r.get("E_k", nan))), repr(float(r["alpha"])), repr(float(r["beta"]))]
                   + [repr(float(r.get(k, nan))) for k in ("sigma", "sigma_plus", "sigma_minus",
                                                            "sigma_pair", "d_c")]
                   + [r["status"]])
    _write(buf.getvalue(), args.output)
    failed = [r for r in rows if r["status"] != "ok"]
    for r in failed:
        log.error("cell %s failed: %s", r["key"], r.get("error"))
    return max((r.get("exit_code", 2) for r in failed), default=0)


# -- decompose / vib -----------------------------------------------------------

def _cjson(z: complex) -> list:
    return [z.real, z.imag]


def cmd_decompose(args) -> int:
    prep = ProductPrep(args.alpha1, args.beta1, args.alpha2, args.beta2)
    dec = decompose_product(prep)
    wp, wm = beta_switch_coefficients(dec.beta)
    doc = {"y": dec.y, "alpha": dec.alpha, "beta": dec.beta, "phase": _cjson(dec.phase),
           "sat_aa": _cjson(dec.sat_aa), "sat_bb": _cjson(dec.sat_bb), "norm": dec.norm,
           "weights_plus_minus_equal_superpositions": [float(wp), float(wm)]}
    if args.tmatrix:
        t = _load_set(args.tmatrix)
        pair = _initial_pair(t, args.pair)
        final = _final_pair(args.final, pair)
        sats = {}
        if args.sat_aa:
            sats["aa"] = _load_set(args.sat_aa)
        if args.sat_bb:
            sats["bb"] = _load_set(args.sat_bb)
        rep = satellite_accounting(t, prep, pair, final, sats, mode=args.mode)
        doc["cross_section"] = {
            "mode": rep.mode, "entangled": rep.sigma_entangled, "total": _finite(rep.total),
            "satellites": [{"label": s.label, "weight": s.weight, "sigma": _finite(s.sigma),
                            "closed": s.closed} for s in rep.satellites],
            "satellite_ratio": _finite(rep.ratio)}
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_vib(args) -> int:
    cfg = _config(args)
    v = cfg.raw["vib"]
    grid = cfg.vib_grid()
    init = cfg.vib_initial()
    res = energy_scan(grid, init, v["energies"], v["betas"], cfg.potential(), tuple(v["channel"]))
    out = args.output or cfg.raw["output"]["path"]
    _write(scan_csv(res, timestamp=_timestamp(args, cfg)), out)
    if out not in (None, "-"):
        print(json.dumps({"output": str(out), "max_norm_defect": float(np.max(res.norm_defect)),
                          "P": res.P.tolist()}, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_config(p):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                   help="override one configuration value (repeatable; value parsed as JSON)")


def _add_transition(p):
    p.add_argument("tmatrix", help="T-matrix file")
    p.add_argument("--pair", help="initial level pair j1,m1,v1/j2,m2,v2 (default: recorded in the file)")
    p.add_argument("--final", help="final level pair j1,m1,v1/j2,m2,v2 (m ignored; default: elastic)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="entscat", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    ap.add_argument("-q", "--quiet", action="store_true", help="errors only")
    ap.add_argument("--workers", type=int, default=1, help="worker processes (default 1, reproducible)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="coupled-channel solve, write a T-matrix file")
    _add_config(p)
    p.add_argument("-o", "--output", help="T-matrix output path (default output.path or tmatrix.txt)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("synth", help="random unitary T-matrix set for testing")
    _add_config(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-exchange-symmetry", action="store_true",
                   help="do not impose the exchange relation")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_synth)

    for name, func, hlp in (("dcs", cmd_dcs, "differential cross sections as CSV"),
                            ("total", cmd_total, "integral cross sections as JSON")):
        p = sub.add_parser(name, help=hlp)
        _add_transition(p)
        p.add_argument("--initial", default="pm",
                       help="plus | minus | pair | pm (plus and minus with d_c) | alpha,beta")
        p.add_argument("--route", default="pm", choices=[r for r in ROUTES if r not in ("pair", "unsym", "general")],
                       help="amplitude assembly for the +/- states")
        p.add_argument("--n-theta", type=int, default=721)
        if name == "dcs":
            p.add_argument("-o", "--output", help="CSV path (default stdout)")
            p.add_argument("--summary", help="write the JSON summary here")
            p.add_argument("--no-timestamp", action="store_true", help="omit the generated-at header line")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="run the invariant battery on a T-matrix file")
    p.add_argument("tmatrix")
    p.add_argument("--pair", help="initial level pair (default: recorded in the file)")
    p.add_argument("--final", action="append", help="restrict to these final pairs (repeatable)")
    p.add_argument("--tol-unitarity", type=float, default=1e-6)
    p.add_argument("--tol-exchange", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="cross sections over an alpha x beta x energy grid")
    p.add_argument("tmatrix", nargs="*", help="T-matrix files, one per energy")
    _add_config(p)
    p.add_argument("--energies", type=float, nargs="+", help="solve inline at these energies (needs --config)")
    p.add_argument("--workdir", help="where inline solves are cached")
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--beta", type=float, nargs="+")
    p.add_argument("--pair")
    p.add_argument("--final")
    p.add_argument("--manifest", help="resume manifest (default <output>.manifest.jsonl)")
    p.add_argument("-o", "--output")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("decompose", help="split a product of superpositions into entangled part and satellites")
    for k in ("alpha1", "beta1", "alpha2", "beta2"):
        p.add_argument(f"--{k}", type=float, required=True)
    p.add_argument("--tmatrix", help="also compute the cross section with this T set")
    p.add_argument("--pair")
    p.add_argument("--final")
    p.add_argument("--sat-aa", help="T set for the |a>|a> satellite")
    p.add_argument("--sat-bb", help="T set for the |b>|b> satellite")
    p.add_argument("--mode", choices=("incoherent", "drop"), default="incoherent")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("vib", help="collinear vibrational wave-packet scan, CSV of P(E; beta)")
    _add_config(p)
    p.add_argument("-o", "--output")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_vib)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    level = logging.ERROR if args.quiet else (logging.DEBUG if args.verbose else logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.workers < 1:
        ap.error("--workers must be >= 1")
    try:
        return int(args.func(args) or 0)
    except EntscatError as exc:
        code = exc.exit_code
        err = exc
    except (OSError, json.JSONDecodeError) as exc:
        code, err = 1, exc
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        code, err = 2, exc
    rec = {"error": type(err).__name__, "message": str(err), "exit_code": code}
    if getattr(err, "missing", None):
        rec["missing"] = [str(m) for m in err.missing]
    sys.stderr.write(json.dumps(rec) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
