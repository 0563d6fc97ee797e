"""Acceptance suite: one pass/fail line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the CRITERION lines
as they are produced; without ``-s`` they are still printed (capture is
disabled around each line).  Criteria 4, 6 and 7 run the real syntheses
(10 starts, seed 1729) and take several minutes in total.
"""

import functools
import time

import mpmath
import numpy as np
import pytest

from fixorder import benchmarks, plants
from fixorder.analysis import dc_gain, hinf_norm, spectral_abscissa
from fixorder.statespace import (
    AugmentedPlant,
    StateSpaceModel,
    close_loop,
    sensitivity_maps,
    ss_to_tf,
)
from fixorder.synthesis import SynthesisOptions, refine, synthesize

from gradcheck import draw_instance, gradient_error
from oracles import grid_hinf, random_stable

SEED = 1729
STARTS = 10


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@functools.lru_cache(maxsize=None)
def synthesis_outcome(case_name, order):
    """Synthesize one (case, order) with the benchmark budget; cached across criteria."""
    case = benchmarks.get_case(case_name)
    rep, results = benchmarks.run_case(case, orders=(order,), n_starts=STARTS, seed=SEED,
                                       refine_passes=1)
    return rep.outcomes[0], results.get(order)


# --- 1 -----------------------------------------------------------------------


def test_criterion_1_reference_regression(capsys):
    t0 = time.perf_counter()
    rows = benchmarks.reference_regression()
    bad = [r.label for r in rows if not r.passed]
    worst = ", ".join(f"{r.label}: err {r.error:.2e} (tol {r.tolerance:g})" for r in rows)
    report(capsys, 1, not bad, f"{len(rows)} rows in {time.perf_counter() - t0:.1f}s; {worst}")
    assert not bad


# --- 2 -----------------------------------------------------------------------


def test_criterion_2_hinf_oracle_equivalence(capsys):
    rng = np.random.default_rng(20240)
    worst, spent = 0.0, 0.0
    for _ in range(200):
        n, p, m = (int(rng.integers(1, 9)), int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        A, B, C, D = random_stable(rng, n, p, m)
        t0 = time.perf_counter()
        got = hinf_norm(StateSpaceModel(A, B, C, D)).norm
        spent += time.perf_counter() - t0
        ref = grid_hinf(A, B, C, D)
        worst = max(worst, abs(got - ref) / ref)
    ok = worst <= 1e-6 and spent < 120
    report(capsys, 2, ok, f"200 systems, worst rel err {worst:.2e} (tol 1e-6), "
                          f"hinf_norm time {spent:.1f}s (< 120s)")
    assert ok


# --- 3 -----------------------------------------------------------------------


def test_criterion_3_gradients(capsys):
    rng = np.random.default_rng(31)
    errs = {}
    for objective in ("spectral_abscissa", "hinf"):
        errs[objective] = []
        for _ in range(60):
            obj, theta = draw_instance(rng, objective)
            errs[objective].append(gradient_error(obj, theta)[0])
    count = sum(len(v) for v in errs.values())
    worst = max(max(v) for v in errs.values())
    ok = count >= 100 and worst <= 1e-5
    detail = ", ".join(f"{k} worst {max(v):.1e}" for k, v in errs.items())
    report(capsys, 3, ok, f"{count} smooth instances; {detail} (tol 1e-5)")
    assert ok


# --- 4 -----------------------------------------------------------------------

TARGETS = [
    ("ac1_sof", 0),
    ("two_mass_spring", 2),
    ("four_disk", 1),
    ("four_disk", 2),
    ("gahinet_order_drop", 2),
    ("kwakernaak_sensitivity", 1),
    ("himat", 3),
]


@pytest.mark.slow
def test_criterion_4_synthesis_targets(capsys):
    lines, ok = [], True
    for name, k in TARGETS:
        o, _ = synthesis_outcome(name, k)
        ok &= o.passed
        val = "stabilized" if name == "ac1_sof" else f"{o.achieved:.5g} <= {o.bound}"
        lines.append(f"{name}[{k}] {'ok' if o.passed else 'MISS'} {val} ({o.seconds:.0f}s)")
    report(capsys, 4, ok, "; ".join(lines))
    assert ok


# --- 5 -----------------------------------------------------------------------


def _exact_controller(mp):
    r15 = mp.sqrt(15)
    b2, b1, b0 = mp.mpf(43) / 5, -54 * r15 / 125, mp.mpf(-27) / 125
    a1, a0 = 6 * r15 / 5, mp.mpf(7)
    # controllable canonical form of (b2 s^2 + b1 s + b0) / (s^2 + a1 s + a0)
    Ak = [[-a1, -a0], [1, 0]]
    Bk = [[1], [0]]
    Ck = [[b1 - b2 * a1, b0 - b2 * a0]]
    Dk = [[b2]]
    return Ak, Bk, Ck, Dk


def test_criterion_5_analytic_optimum(capsys):
    mp = mpmath.mp
    with mpmath.workdps(60):
        Ak, Bk, Ck, Dk = _exact_controller(mp)
        F = np.array([[Dk[0][0], *Ck[0]],
                      [Bk[0][0], *Ak[0]],
                      [Bk[1][0], *Ak[1]]], dtype=object)
        # same interconnection code as close_loop, evaluated in 60-digit arithmetic
        Acl = AugmentedPlant(plants.two_mass_spring(), 2).close(F)[0]
        ev = mpmath.eig(mpmath.matrix(Acl.tolist()), left=False, right=False)
        target = -mpmath.sqrt(15) / 5
        err = max(abs(e - target) for e in ev)
        # the double-precision path must build the same matrix
        K = StateSpaceModel([[float(x) for x in r] for r in Ak], [[float(x) for x in r] for r in Bk],
                            [[float(x) for x in r] for r in Ck], [[float(Dk[0][0])]])
        Ad = close_loop(plants.two_mass_spring(), K).A
        mat_err = float(max(abs(mpmath.mpf(Ad[i, j]) - Acl[i, j])
                            for i in range(6) for j in range(6)))
    alpha = spectral_abscissa(Ad)[0]
    ok = len(ev) == 6 and err <= 1e-6 and mat_err <= 1e-13
    report(capsys, 5, ok, f"6 eigenvalues within {float(err):.1e} of -sqrt(15)/5 "
                          f"(60-digit, tol 1e-6); double close_loop matrix err {mat_err:.1e}; "
                          f"double-precision abscissa {alpha:.6f} (sextuple root, "
                          f"conditioning ~eps^(1/6))")
    assert ok


# --- 6 -----------------------------------------------------------------------


def _pole_zero_pairs(K):
    g = ss_to_tf(K)
    poles, zeros = np.roots(g.den), np.roots(np.trim_zeros(g.num, "f"))
    pairs = []
    for p in poles:
        if zeros.size:
            z = zeros[np.argmin(np.abs(zeros - p))]
            pairs.append((p, z, abs(p - z) / abs(p)))
    return pairs


@pytest.mark.slow
def test_criterion_6_order_drop(capsys):
    p = plants.gahinet()
    opts = SynthesisOptions(objective="hinf", n_starts=STARTS, rng_seed=SEED)
    t0 = time.perf_counter()
    res = synthesize(p, 3, opts)
    passes = 0
    while res.value > 21.60 and passes < 5:
        res = refine(p, 3, res, opts)
        passes += 1
    value = hinf_norm(close_loop(p, res.controller)).norm
    pairs = _pole_zero_pairs(res.controller)
    hits = [(pp, z, r) for pp, z, r in pairs if r <= 0.15 and abs(pp) >= 20]
    near = min(pairs, key=lambda t: t[2])
    ok = value <= 21.60 and bool(hits)
    report(capsys, 6, ok,
           f"order 3 value {value:.5f} (<= 21.60) after {passes} refine passes "
           f"({time.perf_counter() - t0:.0f}s); closest pair pole {near[0]:.4g}, "
           f"zero {near[1]:.4g}, ratio {near[2]:.2g}; pairs with ratio<=0.15 and "
           f"|pole|>=20: {len(hits)}")
    assert ok


# --- 7 -----------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_7_himat_dc_gain(capsys):
    o, res = synthesis_outcome("himat", 3)
    assert res is not None, o.error
    K = res.controller
    _, T = sensitivity_maps(plants.himat_plant(), K)
    alpha = spectral_abscissa(T)[0]
    T0 = dc_gain(T)
    dev = float(np.max(np.abs(np.diag(T0) - 1.0)))
    ok = alpha < 0 and dev <= 0.1
    report(capsys, 7, ok, f"order-3 HiMAT loop abscissa {alpha:.4g}; diag T(0) "
                          f"{np.round(np.diag(T0), 4).tolist()}, max |T_ii(0)-1| {dev:.2e} (tol 0.1)")
    assert ok
