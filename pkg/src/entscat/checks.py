"""Invariant battery run against a T-matrix set.

Each check returns a :class:`CheckResult`; :func:`run_battery` collects them
for the transitions out of one initial pair.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .amplitude import (AngularCoefficients, REDUCED_FINAL, REDUCED_INITIAL, TransitionSpec,
                        general_coefficients, outgoing_coefficients, pm_coefficients,
                        reduced_2020_coefficients)
from .errors import EntscatError
from .tmx import TMatrixSet, check_exchange_relation
from .xsec import averaging_identity_check


@dataclass
class CheckResult:
    name: str
    passed: bool | None  # None: skipped
    value: float
    tol: float
    detail: str = ""

    def __post_init__(self):
        if self.passed is not None:
            self.passed = bool(self.passed)
        self.value = float(self.value)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = {True: "pass", False: "FAIL", None: "skip"}[self.passed]
        return d


@dataclass
class Tolerances:
    unitarity: float = 1e-6
    symmetry: float = 1e-6
    identity: float = 1e-10
    routes: float = 1e-8
    exchange: float = 1e-6
    parity: float = 1e-13


@dataclass
class BatteryReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if c.passed is False]


def _cmax(a: AngularCoefficients) -> float:
    return max([abs(v) for v in a.c.values()] + [0.0])


def coefficient_deviation(a: AngularCoefficients, b: AngularCoefficients, scale: float | None = None) -> float:
    """``max_l |a_l - b_l|`` relative to ``scale`` (default: the larger coefficient table)."""
    if a.m != b.m:
        return math.inf
    keys = set(a.c) | set(b.c)
    if scale is None:
        scale = max(_cmax(a), _cmax(b))
    if scale == 0 or not keys:
        return 0.0
    return max(abs(a.c.get(k, 0) - b.c.get(k, 0)) for k in keys) / scale


def _is_zero(a: AngularCoefficients, scale: float) -> float:
    return math.sqrt(a.norm2()) / scale if scale else 0.0


def open_final_pairs(t: TMatrixSet) -> list[tuple]:
    """Level pairs ``((j1, 0, v1), (j2, 0, v2))`` with ``(j1, v1) >= (j2, v2)`` that are open."""
    out = []
    lv = sorted(t.levels)
    for a in lv:
        for b in lv:
            if a < b:
                continue
            k, is_open = t.wavenumber(a[0], a[1], b[0], b[1])
            if is_open and k > 0:
                out.append(((a[0], 0, a[1]), (b[0], 0, b[1])))
    return out


def _flag(meta_value) -> bool:
    return str(meta_value).strip().lower() not in ("false", "0", "no")


def run_battery(t: TMatrixSet, initial: tuple, finals: list | None = None,
                tol: Tolerances | None = None) -> BatteryReport:
    """Unitarity, the averaging identity, route equivalence, the exchange
    relation and parity exclusivity for transitions out of ``initial``."""
    tol = tol or Tolerances()
    rep = BatteryReport()
    add = rep.checks.append

    u = t.max_unitarity_defect()
    add(CheckResult("unitarity", u < tol.unitarity, u, tol.unitarity, "max |S^dag S - I|"))
    s = t.max_symmetry_defect()
    add(CheckResult("time_reversal", s < tol.symmetry, s, tol.symmetry, "max |T - T^T|"))

    finals = open_final_pairs(t) if finals is None else finals
    ia, ib = (tuple(x) for x in initial)
    exchange_ok = {}
    for fin in finals:
        tag = f"{_pair_tag((ia, ib))}->{_pair_tag(fin)}"
        try:
            spec = TransitionSpec.build(t, (ia, ib), fin)
        except EntscatError as exc:
            add(CheckResult(f"transition[{tag}]", False, math.nan, 0.0, str(exc)))
            continue

        idr = averaging_identity_check(t, spec)
        v = max(idr.integrated, idr.per_m)
        add(CheckResult(f"averaging_identity[{tag}]", v < tol.identity, v, tol.identity,
                        f"integrated={idr.integrated:.3e} per_m={idr.per_m:.3e} folded={idr.folded:.3e}"))

        dev_route = dev_gen = par = 0.0
        for m1p, m2p in spec.final_m_pairs():
            sm = spec.with_final_m(m1p, m2p)
            pm = {sign: pm_coefficients(t, sm, sign) for sign in (1, -1)}
            # a vanishing +/- amplitude is compared on the scale of its partner
            ref = max(_cmax(pm[1]), _cmax(pm[-1]))
            for sign in (1, -1):
                a = pm[sign]
                dev_route = max(dev_route, coefficient_deviation(a, outgoing_coefficients(t, sm, sign), ref))
                g = general_coefficients(t, sm, math.pi / 4, 0.0 if sign > 0 else math.pi)
                dev_gen = max(dev_gen, coefficient_deviation(a, g, ref))
                scale = math.sqrt(a.norm2())
                keep, drop = ((lambda l: l % 2 == 0), (lambda l: l % 2 == 1))
                if sign < 0:
                    keep, drop = drop, keep
                par = max(par, _is_zero(pm_coefficients(t, sm, sign, l_filter=drop), scale),
                          coefficient_deviation(a, pm_coefficients(t, sm, sign, l_filter=keep)) if scale else 0.0)
        add(CheckResult(f"route_equivalence[{tag}]", dev_route < tol.routes, dev_route, tol.routes,
                        "incoming vs outgoing symmetrization"))
        add(CheckResult(f"general_state_endpoints[{tag}]", dev_gen < tol.routes, dev_gen, tol.routes,
                        "alpha=pi/4, beta in {0, pi} vs +/-"))
        add(CheckResult(f"parity_exclusivity[{tag}]", par < tol.parity, par, tol.parity,
                        "wrong-parity partial waves removed / right-parity kept"))

        ket = (ia[0], ia[2], ib[0], ib[2])
        (jc, _, vc), (jd, _, vd) = fin
        bra = (jc, vc, jd, vd)
        if not _flag(t.meta.get("exchange_symmetric", True)):
            add(CheckResult(f"exchange_relation[{tag}]", None, math.nan, tol.exchange,
                            "set not exchange-symmetric"))
            exchange_ok[tuple(fin)] = False
        else:
            try:
                er = check_exchange_relation(t, bra, ket)
                ok = er.max_deviation < tol.exchange
                worst = "" if ok else f" worst: J={er.worst[0][1]} bra={er.worst[0][2]} ket={er.worst[0][3]}"
                add(CheckResult(f"exchange_relation[{tag}]", ok, er.max_deviation, tol.exchange,
                                f"{er.n_compared} elements compared{worst}"))
                exchange_ok[tuple(fin)] = ok
            except EntscatError as exc:
                add(CheckResult(f"exchange_relation[{tag}]", False, math.nan, tol.exchange, str(exc)))
                exchange_ok[tuple(fin)] = False

        if ((ia[0], ia[1]), (ib[0], ib[1])) == REDUCED_INITIAL and \
                ((jc, 0), (jd, 0)) == REDUCED_FINAL and vc == vd == ia[2] == ib[2]:
            if not exchange_ok.get(tuple(fin)):
                add(CheckResult(f"reduced_form[{tag}]", None, math.nan, tol.routes,
                                "exchange relation does not hold; reduced form not applicable"))
                continue
            dev = 0.0
            for m1p, m2p in spec.final_m_pairs():
                sm = spec.with_final_m(m1p, m2p)
                pm = {sign: pm_coefficients(t, sm, sign) for sign in (1, -1)}
                ref = max(_cmax(pm[1]), _cmax(pm[-1]))
                for sign in (1, -1):
                    dev = max(dev, coefficient_deviation(pm[sign], reduced_2020_coefficients(t, sm, sign), ref))
            add(CheckResult(f"reduced_form[{tag}]", dev < tol.routes, dev, tol.routes,
                            "reduced sum over even j12' vs full incoming symmetrization"))
    return rep


def _pair_tag(pair) -> str:
    (ja, _, va), (jb, _, vb) = pair
    return f"{ja}{va}{jb}{vb}"
