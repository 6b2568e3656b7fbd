"""Reference implementations that share no code with the package.

* coupling coefficients from sympy's exact Racah formulas;
* spherical harmonics from scipy and angular integrals by quadrature;
* a single-channel radial integrator (scipy DOP853) for phase shifts.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import spherical_jn, spherical_yn, sph_harm_y
from sympy import Rational
from sympy.physics import wigner

HBAR2_2AMU = 16.857629168087772  # hbar^2 / (2 amu angstrom^2) in cm^-1


def _r(x):
    return Rational(x).limit_denominator(2) if isinstance(x, float) else Rational(x)


def cg(j1, m1, j2, m2, j, m) -> float:
    return float(wigner.clebsch_gordan(_r(j1), _r(j2), _r(j), _r(m1), _r(m2), _r(m)))


def three_j(j1, j2, j3, m1, m2, m3) -> float:
    return float(wigner.wigner_3j(_r(j1), _r(j2), _r(j3), _r(m1), _r(m2), _r(m3)))


def six_j(*a) -> float:
    return float(wigner.wigner_6j(*(_r(x) for x in a)))


def nine_j(*a) -> float:
    return float(wigner.wigner_9j(*(_r(x) for x in a), prec=None))


# -- angular integrals by quadrature -------------------------------------------

@lru_cache(maxsize=None)
def _sphere_grid(n: int = 24):
    x, w = np.polynomial.legendre.leggauss(n)
    th = np.arccos(x)
    ph = np.arange(2 * n) * (math.pi / n)
    wt = np.outer(w, np.full(2 * n, math.pi / n))
    return np.meshgrid(th, ph, indexing="ij"), wt


def ylm(l, m, th, ph):
    return sph_harm_y(l, m, th, ph)


@lru_cache(maxsize=None)
def gaunt(lp, mp, k, q, l, m) -> complex:
    """Integral of conj(Y_lp^mp) Y_k^q Y_l^m over the sphere, by quadrature."""
    (th, ph), wt = _sphere_grid()
    f = np.conj(ylm(lp, mp, th, ph)) * ylm(k, q, th, ph) * ylm(l, m, th, ph)
    return complex(np.sum(wt * f))


@lru_cache(maxsize=None)
def gaunt_conj(lp, mp, k, q, l, m) -> complex:
    """Integral of conj(Y_lp^mp) conj(Y_k^q) Y_l^m over the sphere."""
    (th, ph), wt = _sphere_grid()
    f = np.conj(ylm(lp, mp, th, ph)) * np.conj(ylm(k, q, th, ph)) * ylm(l, m, th, ph)
    return complex(np.sum(wt * f))


def _coupled(j1, j2, j12, l, J, M):
    """Expansion of |(l, (j1 j2) j12) J M> over (ml, m1, m2)."""
    out = {}
    for ml in range(-l, l + 1):
        m12 = M - ml
        if abs(m12) > j12:
            continue
        c1 = cg(l, ml, j12, m12, J, M)
        if c1 == 0:
            continue
        for m1 in range(-j1, j1 + 1):
            m2 = m12 - m1
            if abs(m2) > j2:
                continue
            c2 = cg(j1, m1, j2, m2, j12, m12)
            if c2:
                out[(ml, m1, m2)] = c1 * c2
    return out


def angular_matrix_element(bra, ket, J, lam) -> float:
    """<(l', (j1' j2') j12') J M | G_lam | (l, (j1 j2) j12) J M> at M = 0 by brute force."""
    j1p, j2p, j12p, lp = bra
    j1, j2, j12, l = ket
    l1, l2, lt = lam
    pref = (4 * math.pi) ** 1.5 / math.sqrt(2 * lt + 1)
    b = _coupled(j1p, j2p, j12p, lp, J, 0)
    k = _coupled(j1, j2, j12, l, J, 0)
    total = 0j
    for (mlp, m1p, m2p), cb in b.items():
        for (ml, m1, m2), ck in k.items():
            q1, q2 = m1p - m1, m2p - m2  # fixed by the r1, r2 integrals
            q = q1 + q2
            if abs(q1) > l1 or abs(q2) > l2 or abs(q) > lt:
                continue
            c = cg(l1, q1, l2, q2, lt, q)
            if c == 0:
                continue
            total += cb * ck * c * gaunt(j1p, m1p, l1, q1, j1, m1) * gaunt(j2p, m2p, l2, q2, j2, m2) \
                * gaunt_conj(lp, mlp, lt, q, l, ml)
    return pref * total.real


# -- single-channel radial integration -------------------------------------------

def phase_shift_ivp(potential, l: int, energy: float, mu: float, R0: float = 1.5, R1: float = 30.0) -> float:
    """Phase shift in (-pi/2, pi/2] from a DOP853 integration of u'' = (l(l+1)/R^2 + (mu/c)(V - E)) u."""
    k = math.sqrt(mu * energy / HBAR2_2AMU)

    def rhs(R, y):
        v = float(potential(np.array([R]))[0])
        return [y[1], (l * (l + 1) / R ** 2 + mu / HBAR2_2AMU * (v - energy)) * y[0]]

    sol = solve_ivp(rhs, (R0, R1), [0.0, 1e-30], method="DOP853", rtol=1e-13, atol=1e-300,
                    first_step=1e-4)
    u, up = sol.y[0, -1], sol.y[1, -1]
    x = k * R1
    J = x * spherical_jn(l, x)
    Jp = k * (spherical_jn(l, x) + x * spherical_jn(l, x, True))
    N = x * spherical_yn(l, x)
    Np = k * (spherical_yn(l, x) + x * spherical_yn(l, x, True))
    Y = up / u
    return math.atan((Y * J - Jp) / (Y * N - Np))


# Phase shifts of the isotropic Lennard-Jones model (epsilon 25.5 cm^-1,
# sigma 2.95 A, mu = 1.00794 amu) from a DOP853 integration started at
# 1.5 A and matched at 30 A (phase_shift_ivp above), frozen.
PHASE_TABLE = [
    (0.5, 0, -1.0183938746670258),
    (0.5, 3, 0.00323744767533787),
    (0.9729438587881943, 0, -1.4007343695169094),
    (0.9729438587881943, 3, 0.013437172710787997),
    (1.8932395047073238, 0, 1.243310479687006),
    (1.8932395047073238, 3, 0.05823188684660114),
    (3.6840314986403864, 0, 0.6154657523614433),
    (3.6840314986403864, 3, 0.29197624175671627),
    (7.168711644368866, 0, -0.16159739402780823),
    (7.168711644368866, 3, 1.145135855342894),
    (13.949507939624215, 0, -1.1215647849184815),
    (13.949507939624215, 3, 1.3189053882441484),
    (27.144176165949066, 0, 0.8204158152354287),
    (27.144176165949066, 3, 0.730053519026101),
    (52.819519005050076, 0, -0.7020878200827755),
    (52.819519005050076, 3, -0.3717073448610238),
    (102.78085328021955, 0, 0.4813298857437776),
    (102.78085328021955, 3, 1.1204491571430328),
    (200.0, 0, 1.080719801531387),
    (200.0, 3, -1.191762859587344),
]
