"""Acceptance criteria, one test each.

Every test prints a single ``[criterion k] PASS|FAIL`` line with the
measured values, then asserts at the stated tolerance.  Run with
``pytest -v tests/test_acceptance.py``; the whole file takes roughly ten
minutes on one core.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from cornerlab import montecarlo as mc
from cornerlab.builders import cycle_from_pair_hikers, cycle_from_pair_trace
from cornerlab.contours import level_set_census, pair_of
from cornerlab.errors import CornerLabError
from cornerlab.excursions import (
    DOWN, UP, hit_prob_back, hit_prob_there, is_compatible, sample_pair, sample_paths,
    simulate_hits,
)
from cornerlab.lattice import WindowSpec, height_map, height_map_by_path, make_window
from cornerlab.rng import stream
from cornerlab.series import DELTA2, L_exact, L_sequence, T, fit_exponent, indicial_poly
from cornerlab.xor import REFERENCE_BANDS, variant_study

pytestmark = pytest.mark.slow

SEED = 20240
# violation counters gathered by every Monte Carlo run in this file
VIOLATIONS = {"both_crossings": 0, "degree": 0, "bijection": 0, "avoid_unbalanced": 0}


@pytest.fixture
def say(capsys):
    def _say(k, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {k:>2}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    return _say


def _within(x, target, se, k=3.0):
    return abs(x - target) <= k * se


# ---- exact series ------------------------------------------------------------------

def test_c01_exact_base_values(say):
    L = L_exact(2)
    mcr = mc.estimate_L_mc(2, 100_000, seed=SEED)
    exact_ok = L[1] == 4 and L[2] == Fraction(52, 3)
    mc_ok = _within(mcr.estimate, 52 / 3, mcr.stderr)
    ok = exact_ok and mc_ok
    say(1, "L(1), L(2) exact and by simulation", ok,
        f"L(1)={L[1]}, L(2)={L[2]}; MC L(2)={mcr.estimate:.4f} +- {mcr.stderr:.4f} "
        f"({mcr.samples} pairs) vs {52 / 3:.4f}")
    assert ok


def test_c02_exponent_from_exact_series(say):
    s = L_sequence(1024, exact_cutoff=64)
    fit = fit_exponent(s, h_lo=16)
    slope = s.slope(1024)
    monotone = all(a < b for a, b in zip(fit.slopes, fit.slopes[1:])) and fit.slopes[-1] < DELTA2
    ok = abs(slope - DELTA2) <= 0.1 and monotone and abs(fit.extrapolated - DELTA2) <= 0.03
    say(2, "growth exponent of L(h)", ok,
        f"slope(1024)={slope:.5f}, dyadic slopes {[round(v, 4) for v in fit.slopes]}, "
        f"extrapolated {fit.extrapolated:.5f} (1/h Richardson {fit.richardson:.5f}) vs {DELTA2:.5f}")
    assert ok


def test_c03_indicial_roots(say):
    r = math.sqrt(17)
    vals = {mu: abs(indicial_poly(mu)) for mu in (1.0, 4.0, (5 - r) / 2, (5 + r) / 2)}
    ok = all(v <= 1e-9 for v in vals.values())
    say(3, "indicial polynomial roots", ok, ", ".join(f"|p({m:.5f})|={v:.1e}" for m, v in vals.items()))
    assert ok


# ---- structure ---------------------------------------------------------------------

def test_c04_bijection_and_trichotomy(say):
    windows, cycles, bad_pair, bad_tri = 500, 0, 0, 0
    for k in range(windows):
        w = make_window(WindowSpec.centered(mc.sample_seed(SEED, "c4", k), 128))
        try:
            census = level_set_census(w)
        except CornerLabError:
            VIOLATIONS["degree"] += 1
            bad_pair += 1
            continue
        bad_tri += census.violations
        for c in census.cycles:
            cycles += 1
            try:
                p = pair_of(w, c)
                good = is_compatible(p.first, p.second) and p.level == c.level and p.direction == c.direction
            except (CornerLabError, ValueError):
                good = False
            bad_pair += not good
    VIOLATIONS["bijection"] += bad_pair
    ok = bad_pair == 0 and bad_tri == 0 and cycles > 0
    say(4, "cycle -> compatible pair with level identity; trichotomy", ok,
        f"{windows} windows 128x128, {cycles} cycles, {bad_pair} pair failures, "
        f"{bad_tri} trichotomy violations")
    assert ok


def test_c05_builder_equivalence(say):
    rng = stream(SEED, "c5")
    n, bad = 1000, 0
    for k in range(n):
        h = 1 + k % 20
        p = sample_pair(h, rng, UP if k % 2 == 0 else DOWN)
        try:
            bad += cycle_from_pair_hikers(p) != cycle_from_pair_trace(p)
        except CornerLabError:
            bad += 1
    ok = bad == 0
    say(5, "hikers build the traced cycle", ok, f"{n} pairs, h = 1..20, {bad} mismatches")
    assert ok


def test_c06_height_formula_vs_paths(say):
    faces, bad = 0, 0
    for k in range(200):
        w = make_window(WindowSpec.centered(mc.sample_seed(SEED, "c6", k), 64))
        H, P = height_map(w), height_map_by_path(w)
        faces += H.size
        bad += int((H != P).sum())
    ok = bad == 0
    say(6, "height formula equals crossing count", ok, f"200 windows 64x64, {faces} faces, {bad} mismatches")
    assert ok


# ---- calibration -------------------------------------------------------------------

def _spot_grid():
    cells = []
    for h in (2, 3, 4, 6, 8, 12, 16):
        js = sorted({max(2, (h + 1) // 2), h - 1} - {1})
        for j in js:
            for i in sorted({1, j - 1}):
                if 1 <= i < j <= h - 1:
                    cells.append(("there", h, j, i))
        for j in sorted({max(2, (h + 1) // 2), h}):
            for i in sorted({1, j - 1}):
                if 1 <= i < j:
                    cells.append(("back", h, i, j))
    return cells


def test_c07_conditioned_walk_calibration(say):
    runs = 100_000
    rng = stream(SEED, "c7")
    worst, fails, cells = 0.0, [], _spot_grid()
    for kind, h, a, b in cells:
        if kind == "there":
            p = float(hit_prob_there(a, b, h))
            k = simulate_hits("there", h, a, b, h, runs, rng)
        else:
            p = float(hit_prob_back(a, b, h))
            k = simulate_hits("back", h, a, b, 0, runs, rng)
        z = (k / runs - p) / math.sqrt(p * (1 - p) / runs)
        worst = max(worst, abs(z))
        if abs(z) > 3:
            fails.append((kind, h, a, b, round(z, 2)))
    lens = np.array([len(q) - 1 for q in sample_paths(2, runs, stream(SEED, "c7-len"))])
    m, se = lens.mean(), lens.std(ddof=1) / math.sqrt(runs)
    len_ok = _within(m, 14 / 3, se)
    ok = not fails and len_ok
    say(7, "hitting probabilities and mean excursion length", ok,
        f"{len(cells)} cells x {runs} runs, max |z| = {worst:.2f}, outside 3 sigma: {fails}; "
        f"mean length of height-2 excursions {m:.4f} +- {se:.4f} vs {14 / 3:.4f}")
    assert ok


def test_c08_level_edge_total(say):
    r = mc.estimate_T_mc(2, 50_000, seed=SEED)
    target = float(T(2))
    ok = _within(r.estimate, target, r.stderr)
    say(8, "level edges in the rectangle of a height-2 pair", ok,
        f"{r.estimate:.4f} +- {r.stderr:.4f} ({r.samples} pairs) vs 160/9 = {target:.4f}")
    assert ok


# ---- exponents -----------------------------------------------------------------------

def test_c09_scaling_relation(say):
    lvl = mc.estimate_level0_total((64, 128, 256, 512), samples=400, seed=SEED)
    P = mc.estimate_P((4, 8, 16, 32, 64), samples=20_000, seed=SEED)
    lbd = mc.estimate_length_by_diameter(samples=10_000, seed=SEED)
    g, d = mc.gamma_hat(P), lbd.exponent
    total_ok = 1.4 <= lvl.exponent <= 1.6
    band_ok = 0.3 <= P.exponent <= 0.6
    sum_ok = abs(g + d - 1.5) <= 0.1
    ok = total_ok and sum_ok and band_ok
    say(9, "level-0 total length exponent and gamma + delta", ok,
        f"level-0 exponent {lvl.exponent:.3f} (CI {lvl.exponent_ci[0]:.3f}..{lvl.exponent_ci[1]:.3f}); "
        f"2 gamma = {P.exponent:.3f} (CI {P.exponent_ci[0]:.3f}..{P.exponent_ci[1]:.3f}), "
        f"delta = {d:.3f} (CI {lbd.exponent_ci[0]:.3f}..{lbd.exponent_ci[1]:.3f}), "
        f"gamma + delta = {g + d:.3f}")
    assert ok


def test_c10_structural_zeros(say):
    runs = [mc.estimate_crossing(n, samples, seed=SEED) for n, samples in ((16, 2000), (64, 1000), (256, 500))]
    runs.append(mc.estimate_torus(8, 1000, seed=SEED))
    tot = mc.structural_violations(runs)
    for k, v in tot.items():
        VIOLATIONS[k] = VIOLATIONS.get(k, 0) + v
    big = runs[2]
    ok = not any(VIOLATIONS.values())
    say(10, "structural zeros over all runs", ok,
        f"{VIOLATIONS}; crossing(256) LR {big.estimate:.3f} UD {big.extra['ud_estimate']:.3f} "
        f"z {big.extra['z_lr_minus_ud']:.2f}; torus(8) non-contractible {runs[3].estimate:.3f}")
    assert ok


@pytest.mark.xfail(strict=True, reason="about 12% of origin contours are still open at window side "
                                       "2^14 because the diameter tail decays like n^-0.22; see README")
def test_c11_finiteness_evidence(say):
    r = mc.estimate_closure(10_000, seed=SEED, max_window=1 << 14)
    n, P = np.array(r.extra["tail_n"], float), np.array(r.extra["tail_P"])
    slope, se, icpt, _ = mc.fit_loglog(n[n >= 64], P[n >= 64], np.sqrt(P * (1 - P) / r.samples)[n >= 64])
    # the open fraction should match the tail extrapolated to half the final window
    predicted = math.exp(icpt) * (1 << 13) ** slope
    open_frac = 1 - r.estimate
    ok = r.estimate >= 0.999
    say(11, "origin contours close within window 2^14", ok,
        f"closed {r.estimate:.4f} ({r.censored} of {r.samples} open) vs required 0.999; "
        f"tail exponent {-slope:.3f} +- {se:.3f}, extrapolated P(diameter > 2^13) {predicted:.3f} "
        f"vs open fraction {open_frac:.3f}")
    assert ok


def test_c12_variants(say):
    tri = variant_study("trixor", size=256, samples=8, seed=SEED)
    four = variant_study("4xor", size=256, samples=8, seed=SEED)
    ok = tri["even_violations"] == 0

    def fmt(r, name):
        band = REFERENCE_BANDS[name]
        return (f"{name} gamma {r['gamma']:.3f} (CI {r['gamma_ci'][0]:.3f}..{r['gamma_ci'][1]:.3f}, "
                f"reference {band['gamma']}), delta {r['delta']:.3f} "
                f"(CI {r['delta_ci'][0]:.3f}..{r['delta_ci'][1]:.3f}, reference {band['delta']})")

    say(12, "xor variants (even constraint gated, exponents reported)", ok,
        f"trixor even-neighbourhood violations {tri['even_violations']}; {fmt(tri, 'trixor')}; "
        f"{fmt(four, '4xor')}")
    assert ok
