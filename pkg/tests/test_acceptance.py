"""One test per acceptance criterion; each prints a single PASS/FAIL line.

Run with ``pytest -m acceptance -s`` to see the lines.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import comb

from riflab.blaschke import onedim_ratio, spread_zeros
from riflab.dirichlet import classify_membership, integral_norm_leq0, weighted_partial_sum
from riflab.embeddings import (
    cs_from_ps,
    holder_check,
    hp_embed_feasible,
    norm_interp_check,
)
from riflab.hardy import hp_norm_partial, levelset_threshold, omega_measure
from riflab.loja import loj_threshold, loja_probe, snapped_exponent
from riflab.polycore import MultiPoly, reflect
from riflab.rif import build_rif
from riflab.series import CoeffBox, diagonal, expand_ratio

from conftest import fav, random_poly, three_var_example

pytestmark = pytest.mark.acceptance


def verdict(label: str, ok: bool, elapsed: float, limit: float, detail: str) -> None:
    within = elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    print(f"\n[{status}] {label}: {detail}; {elapsed:.2f}s (limit {limit:g}s)")
    assert ok, detail
    assert within, f"took {elapsed:.2f}s, limit {limit:g}s"


def test_01_reflection_involution():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 5))
        p = random_poly(rng, n, int(rng.integers(1, 13)))
        back = reflect(reflect(p, p.multidegree), p.multidegree)
        for e, c in p:
            worst = max(worst, abs(back.coeff(e) - c) / abs(c))
        assert set(e for e, _ in back) == set(e for e, _ in p)
    verdict("reflection involution", worst <= 1e-12, time.perf_counter() - t0, 5, f"max rel err {worst:.1e} over 500")


def test_02_inner_validation():
    t0 = time.perf_counter()
    devs = {}
    for name, p in [("phi2", fav(2)), ("phi3", fav(3)), ("three-variable", three_var_example())]:
        dev, kept = build_rif(p).torus_deviation(10_000, seed=0)
        devs[name] = dev
    worst = max(devs.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in devs.items())
    verdict("inner validation", worst < 1e-9, time.perf_counter() - t0, 10, f"max ||phi|-1| {detail}")


def test_03_series_oracle():
    t0 = time.perf_counter()
    z1, z2 = MultiPoly.variables(2)
    box = expand_ratio(MultiPoly.constant(1, 2), 2 - z1 - z2, (30, 30))
    worst = 0.0
    for k1 in range(31):
        for k2 in range(31 - k1):
            exact = comb(k1 + k2, k1, exact=True) / 2 ** (k1 + k2 + 1)
            worst = max(worst, abs(box.coeffs[k1, k2] - exact) / exact)
    phi = build_rif(fav(2))
    c = expand_ratio(phi.ptilde, phi.p, (2, 2)).coeffs
    ok = worst <= 1e-12 and abs(c[1, 1] - 0.5) <= 1e-12 and abs(c[2, 2] - 0.125) <= 1e-12
    verdict("series oracle", ok, time.perf_counter() - t0, 5,
            f"binomial rel err {worst:.1e}; c11={c[1, 1].real:.15g}, c22={c[2, 2].real:.15g}")


def test_04_h1_norms_equal_degree():
    t0 = time.perf_counter()
    vals = {}
    phi2 = build_rif(fav(2))
    ex = build_rif(three_var_example())
    for k in range(2):
        vals[f"phi2 d{k + 1}"] = hp_norm_partial(phi2, k, 1.0).extrapolated_mean
    for k in range(3):
        vals[f"ex d{k + 1}"] = hp_norm_partial(ex, k, 1.0).extrapolated_mean
    ok = all(abs(v - 1) <= 0.01 for v in vals.values())
    detail = ", ".join(f"{k}={v:.5f}" for k, v in vals.items())
    verdict("H1 norms of partials", ok, time.perf_counter() - t0, 60, detail)


def test_05_membership_classifier():
    t0 = time.perf_counter()
    phi = build_rif(fav(2))
    box = expand_ratio(phi.ptilde, phi.p, (512, 512))
    got = {a: classify_membership(box, [a, a]).status for a in (0.5, 0.74, 1.0)}
    want = {0.5: "convergent", 0.74: "convergent", 1.0: "divergent"}
    d = np.abs(diagonal(box))
    ls = np.arange(20, 201)
    slope = float(np.polyfit(np.log(ls), np.log(d[ls]), 1)[0])
    ok = got == want and abs(slope + 1.5) <= 0.05
    verdict("membership classifier", ok, time.perf_counter() - t0, 60, f"{got}; diagonal slope {slope:.4f}")


def test_06_holder_suites():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    bad_h = bad_i = 0
    for _ in range(200):
        n = int(rng.integers(2, 5))
        box = CoeffBox.from_poly(random_poly(rng, n, int(rng.integers(1, 13))))
        cs = cs_from_ps(list(1.05 + 5 * rng.random(n - 1)))
        lhs, rhs, _ = holder_check(box, rng.uniform(-3, 3, n), cs)
        bad_h += not lhs <= rhs * (1 + 1e-9)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        box = CoeffBox.from_poly(random_poly(rng, n, int(rng.integers(1, 13))))
        a, V, U = (rng.uniform(-2, 2, n) for _ in range(3))
        lhs, rhs, _ = norm_interp_check(box, a, V, U, 1.01 + 4 * rng.random())
        bad_i += not lhs <= rhs * (1 + 1e-9)
    tele = all(cs_from_ps(list(range(n, 1, -1))) == (Fraction(n),) * n for n in range(2, 9))
    ok = bad_h == 0 and bad_i == 0 and tele
    verdict("Holder suites", ok, time.perf_counter() - t0, 10,
            f"holder failures {bad_h}/200, interpolation failures {bad_i}/200, telescoping exact {tele}")


def test_07_onedim_ratio_bounded():
    t0 = time.perf_counter()
    eps = np.logspace(-4, -1, 7)
    spreads = {}
    for p in (0.5, 1.5, 2.5):
        for d in (1, 2, 3):
            r = [onedim_ratio(spread_zeros(d, e), p) for e in eps]
            spreads[(p, d)] = max(r) / min(r)
    worst = max(spreads, key=spreads.get)
    over = sorted(k for k, v in spreads.items() if v >= 20)
    detail = f"worst max/min {spreads[worst]:.1f} at (p, degree)={worst}; over 20: {over}"
    verdict("one-variable ratio", not over, time.perf_counter() - t0, 10, detail)


def test_08_levelset_route():
    t0 = time.perf_counter()
    prof = omega_measure(build_rif(fav(2)), 0, m=100_000, seed=0)
    t = levelset_threshold(prof)
    ok = abs(prof.exponent + 0.5) <= 0.1 and abs(t - 1.5) <= 0.1
    verdict("level-set route", ok, time.perf_counter() - t0, 60,
            f"exponent {prof.exponent:.4f} +- {prof.half_width:.3f}, threshold {t:.4f}")


def test_09_loja_pipeline():
    t0 = time.perf_counter()
    qs = {n: loja_probe(fav(n), (1,) * n, seed=0) for n in (2, 3)}
    q_ok = all(abs(e.q_hat - 2) <= 0.15 for e in qs.values())
    snapped = {snapped_exponent(e) for e in qs.values()}
    q = Fraction(2) if snapped == {2} else None
    want = {2: Fraction(0), 3: Fraction(1, 3), 4: Fraction(1, 2), 5: Fraction(2, 5)}
    got = {n: loj_threshold(q, n)[1] for n in want} if q is not None else {}
    ok = q_ok and got == want
    detail = ", ".join(f"q({n})={e.q_hat:.4f}" for n, e in qs.items())
    detail += "; thresholds " + ", ".join(f"n={n}: {v}" for n, v in got.items())
    verdict("decay exponent pipeline", ok, time.perf_counter() - t0, 60, detail)


def test_10_quadrature_sanity():
    t0 = time.perf_counter()
    one = integral_norm_leq0(lambda z: np.ones(z.shape[0]), [-1, -1]).value
    rng = np.random.default_rng(10)
    ratios = []
    for _ in range(20):
        n = int(rng.integers(1, 4))
        p = random_poly(rng, n, int(rng.integers(1, 8)))
        e = integral_norm_leq0(p, [-1] * n)
        ratios.append(e.normalized / weighted_partial_sum(CoeffBox.from_poly(p), [-1] * n))
    rel = abs(one - math.pi**2) / math.pi**2
    ok = rel <= 1e-6 and all(0.25 <= r <= 4 for r in ratios)
    verdict("quadrature sanity", ok, time.perf_counter() - t0, 30,
            f"constant rel err {rel:.1e}; ratio range [{min(ratios):.3f}, {max(ratios):.3f}]")


def test_11_feasibility_region():
    t0 = time.perf_counter()
    thr = [1.5, 1.5, math.inf]
    got = [hp_embed_feasible(a, thr).feasible for a in ([0.7, 0.7, 100], [1.0, 0.45, 100], [0.8, 0.8, 1])]
    verdict("feasibility region", got == [True, True, False], time.perf_counter() - t0, 1, f"feasible {got}")
