import json
import math

import numpy as np
import pytest

from cornerlab import montecarlo as mc
from cornerlab.errors import InsufficientData
from cornerlab.lattice import WindowSpec, make_window


def test_fit_loglog_recovers_power_law():
    x = np.array([4, 8, 16, 32, 64])
    y = 3.0 * x ** -0.7
    s, se, icpt, used = mc.fit_loglog(x, y, 0.01 * y)
    assert s == pytest.approx(-0.7, abs=1e-9) and used.all()
    assert math.exp(icpt) == pytest.approx(3.0)


def test_fit_loglog_drops_noisy_points():
    x = np.array([1, 2, 4, 8])
    y = np.array([1.0, 0.5, 0.25, 0.1])
    _, _, _, used = mc.fit_loglog(x, y, [0.01, 0.01, 0.01, 0.2], rel_bound=0.5)
    assert used.tolist() == [True, True, True, False]
    with pytest.raises(InsufficientData):
        mc.fit_loglog(x, y, [1.0, 1.0, 0.01, 1.0])


def test_L_mc_height_one_is_exact():
    r = mc.estimate_L_mc(1, 200, seed=1)
    assert r.estimate == 4 and r.stderr == 0


def test_L_mc_small_run_near_exact():
    r = mc.estimate_L_mc(3, 3000, seed=2)
    from cornerlab.series import L_exact
    assert abs(r.estimate - float(L_exact(3)[3])) < 4 * r.stderr


def test_reports_are_reproducible_and_serializable():
    a = mc.estimate_L_mc(4, 300, seed=5)
    b = mc.estimate_L_mc(4, 300, seed=5)
    assert a.estimate == b.estimate and a.stderr == b.stderr
    d = a.to_dict()
    assert d["schema_version"] == 1 and d["seed"] == 5 and d["params"] == {"h": 4}
    json.dumps(d)


def test_parallel_matches_serial():
    a = mc.estimate_torus(3, 64, seed=9, threads=1)
    b = mc.estimate_torus(3, 64, seed=9, threads=2)
    assert a.estimate == b.estimate and a.extra == b.extra


def test_height_tail_basic_properties():
    r = mc.estimate_P((0, 1, 2, 4, 8, 16), samples=400, seed=3, max_window=1 << 10)
    assert r.y[0] == 1.0
    assert all(a >= b for a, b in zip(r.y, r.y[1:]))
    assert r.censored >= 0 and len(r.extra["ambiguous"]) == 6
    assert r.target == pytest.approx(mc.TWO_GAMMA)


def test_diameter_tail_basic_properties():
    r = mc.estimate_diam_tail((0, 4, 16, 64), samples=300, seed=4, max_window=1 << 10)
    assert r.y[0] == 1.0
    assert all(a >= b for a, b in zip(r.y, r.y[1:]))
    t = r.extra["truncated_mean_diameter"]
    assert all(a <= b for a, b in zip(t, t[1:]))


def test_closure_report_counts_censoring():
    r = mc.estimate_closure(200, seed=1, max_window=64)
    assert r.censored == r.samples - round(r.estimate * r.samples)
    assert 0 < r.estimate < 1


def test_length_by_diameter_small():
    r = mc.estimate_length_by_diameter(n_bins=7, samples=600, seed=1, h_max=12, n_lo=2,
                                       n_hi=32, min_count=10)
    assert r.extra["bin1_lengths"] == [4]
    assert 1.0 < r.exponent < 1.6
    assert all(v >= 1.0 for v in r.extra["second_moment_ratio"].values())


def test_level0_total_small():
    r = mc.estimate_level0_total((4, 8, 16), samples=20, seed=1)
    assert all(v > 0 for v in r.y)
    assert r.exponent > 0


def test_crossing_structural_zero():
    r = mc.estimate_crossing(16, 300, seed=2)
    assert r.violations["both_crossings"] == 0
    assert r.violations["degree"] == 0
    with pytest.raises(ValueError):
        mc.estimate_crossing(1, 10)


def test_crossing_flags_on_small_windows():
    for s in range(300):
        lr, ud = mc.crossing_flags(make_window(WindowSpec(s, (0, 7), (0, 7))))
        assert not (lr and ud)


def test_torus_enumeration():
    avoid, bal, bad, total = mc.torus_enumerate(1)
    assert total == 16 and bad == 0
    assert avoid / total <= 0.25
    assert mc.balance_probability(1) == 0.25
    avoid2, bal2, bad2, total2 = mc.torus_enumerate(2)
    assert bad2 == 0 and avoid2 <= bal2
    assert bal2 / total2 == mc.balance_probability(2)


def test_torus_balance_helper():
    # alternating signs give +s[1] - s[0] over a period of two
    assert mc.torus_balanced([1, 1])
    assert not mc.torus_balanced([1, -1])
    assert mc.torus_balanced([1, 1, -1, -1]) and not mc.torus_balanced([1, -1, 1, -1])


def test_torus_estimate_trend():
    vals = [mc.estimate_torus(n, 300, seed=1).estimate for n in (1, 4, 16)]
    assert vals[0] < vals[2]


def test_biased_sweep_identity_case():
    a = mc.biased_sweep([0.5], "closure", {"samples": 50, "seed": 3, "max_window": 256}, "steps")
    b = mc.estimate_closure(50, seed=3, max_window=256, mode="steps")
    assert a[0].estimate == b.estimate
    with pytest.raises(ValueError):
        mc.biased_sweep([0.5], "nonsense")


def test_strongly_biased_steps_escape():
    r = mc.estimate_closure(60, seed=2, bias=0.9, mode="steps", max_window=256)
    assert r.estimate < 0.5


def test_structural_violation_sum():
    r1 = mc.estimate_crossing(8, 20, seed=0)
    r2 = mc.estimate_torus(2, 20, seed=0)
    tot = mc.structural_violations([r1, r2])
    assert set(tot) == {"both_crossings", "degree", "avoid_unbalanced"}
    assert not any(tot.values())
