import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cornerlab.builders import (
    HikeStats, cycle_from_pair_hikers, cycle_from_pair_trace, hike, hikers_result,
    level_edge_count, mountain_degrees, trace_length,
)
from cornerlab.contours import all_cycles, marginals, pair_of
from cornerlab.excursions import DOWN, UP, CompatiblePair, make_excursion, sample_pair
from cornerlab.lattice import WindowSpec
from cornerlab.rng import stream
from cornerlab.series import T


def _pair(h, seed, direction=UP):
    return sample_pair(h, stream(seed, "builders-test", h), direction)


def test_height_one_pair_is_a_square():
    a = make_excursion([0, 1, 0])
    p = CompatiblePair(a, a.shifted(base=-1))
    c = cycle_from_pair_trace(p)
    assert c.length == 4
    assert cycle_from_pair_hikers(p) == c


@given(st.integers(1, 14), st.integers(0, 2**32), st.sampled_from([UP, DOWN]))
@settings(max_examples=80, deadline=None)
def test_hikers_equal_trace(h, seed, direction):
    p = _pair(h, seed, direction)
    t = cycle_from_pair_trace(p)
    r = hikers_result(p)
    assert r.cycle == t
    assert t.length == trace_length(p)
    assert t.length == 2 * r.steps - r.shared + r.wrapped


def test_built_cycle_has_the_pair_as_marginals():
    for seed in range(30):
        p = _pair(1 + seed % 9, seed)
        c = cycle_from_pair_trace(p)
        r = c.rect
        assert (r.a, r.c) == (p.first.offset, p.first.end)
        assert (r.b, r.d) == (p.second.offset, p.second.end)
        assert c.direction == p.direction


def test_builders_reproduce_window_cycles():
    # a cycle traced in a window is rebuilt from its own marginals
    w = WindowSpec.centered(21, 64).build()
    for c in sorted(all_cycles(w), key=lambda c: -c.length)[:15]:
        p = pair_of(w, c)
        assert cycle_from_pair_trace(p) == c
        assert cycle_from_pair_hikers(p) == c


def test_level_edge_count_mean_close_to_T2():
    vals = [level_edge_count(_pair(2, s)) for s in range(3000)]
    m, se = np.mean(vals), np.std(vals) / np.sqrt(len(vals))
    assert abs(m - float(T(2))) < 4 * se


def test_mountain_degrees_simple():
    P = np.array([0, 1, 0])
    D = mountain_degrees(P, P)
    assert D[1, 1] == 4
    assert D[0, 0] == D[2, 2] == D[0, 2] == 1
    assert np.all(D[P[:, None] != P[None, :]] == -1)


def test_hike_climbs_a_mountain_pair():
    # both profiles rise from 0 to their common top 3 at the last index
    P = np.array([0, 1, 2, 1, 2, 3])
    R = np.array([0, 1, 2, 3])
    st_ = HikeStats()
    path = hike(P, R, 0, (0, 0), end=(5, 3), stats=st_)
    assert path[0] == (0, 0) and path[-1] == (5, 3)
    assert all(P[s] == R[t] for s, t in path)
    assert all(abs(a[0] - b[0]) == 1 and abs(a[1] - b[1]) == 1 for a, b in zip(path, path[1:]))


def test_pair_type_checked():
    with pytest.raises(TypeError):
        cycle_from_pair_trace((1, 2))
