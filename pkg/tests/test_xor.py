import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cornerlab.errors import InsufficientData, InvalidGeometry
from cornerlab.render import rle_decode, rle_encode
from cornerlab.xor import (
    FOURXOR_FAMILIES, REFERENCE_BANDS, TRIANGULAR_FAMILIES, cluster_table, even_zero_violations,
    gen_2xor, gen_kxor, gen_trixor, label_clusters, line_bits, variant_cluster_stats,
    variant_study,
)

WIN = ((-3, 4), (0, 6))


def test_2xor_zero_sequences_close_everything():
    nx, ny = 2 * 8 - 1, 2 * 7 - 1
    f = gen_2xor(WIN, xi=np.zeros(nx), eta=np.zeros(ny))
    assert not f.horizontal.any() and not f.vertical.any()
    assert f.horizontal.shape == (7, 7) and f.vertical.shape == (8, 6)
    with pytest.raises(ValueError):
        gen_2xor(((2, 1), (0, 0)))


@given(st.integers(0, 2**40))
@settings(max_examples=30, deadline=None)
def test_2xor_parallel_lines_agree_or_complement(seed):
    f = gen_2xor(WIN, seed)
    for j in range(f.horizontal.shape[1] - 1):
        d = f.horizontal[:, j] ^ f.horizontal[:, j + 1]
        assert d.all() or not d.any()
    for i in range(f.vertical.shape[0] - 1):
        d = f.vertical[i, :] ^ f.vertical[i + 1, :]
        assert d.all() or not d.any()


def test_2xor_is_window_independent():
    a = gen_2xor(((0, 10), (0, 10)), 5)
    b = gen_2xor(((3, 6), (2, 9)), 5)
    assert (a.horizontal[3:6, 2:10] == b.horizontal).all()
    assert (a.vertical[3:7, 2:9] == b.vertical).all()


def test_2xor_single_edge_frequency_and_pair_correlation():
    n = 20000
    h = np.empty(n, dtype=bool)
    v = np.empty(n, dtype=bool)
    h2 = np.empty(n, dtype=bool)
    for s in range(n):
        f = gen_2xor(((0, 1), (0, 1)), s)
        h[s], v[s], h2[s] = f.horizontal[0, 0], f.vertical[0, 0], f.horizontal[0, 1]
    assert abs(h.mean() - 0.5) < 3 * 0.5 / np.sqrt(n)
    for a, b in ((h, v), (h, h2), (v, h2)):
        c = np.corrcoef(a, b)[0, 1]
        assert abs(c) < 3 / np.sqrt(n)


def test_line_bits_consistent_across_blocks():
    a = line_bits(3, 0, -5000, 5000)
    b = line_bits(3, 0, 4000, 4200)
    assert (a[9000:9201] == b).all()
    assert set(np.unique(a)) == {0, 1}


def test_trixor_zero_sequences():
    f = gen_trixor(6, sequences=(np.zeros(6), np.zeros(6), np.zeros(11)))
    assert not f.states.any()
    with pytest.raises(ValueError):
        gen_trixor(0)


@given(st.integers(0, 2**40), st.integers(3, 40))
@settings(max_examples=40, deadline=None)
def test_trixor_even_zero_neighbours(seed, size):
    assert even_zero_violations(gen_trixor(size, seed).states) == 0


def test_even_check_detects_a_flip():
    s = gen_trixor(12, 1).states.copy()
    s[6, 6] ^= 1
    assert even_zero_violations(s) > 0


def test_trixor_equals_kxor():
    for seed in range(5):
        a = gen_trixor(20, seed)
        b = gen_kxor(3, TRIANGULAR_FAMILIES, (20, 20), seed)
        assert (a.states == b.states).all()
    with pytest.raises(ValueError):
        gen_kxor(2, TRIANGULAR_FAMILIES, (4, 4))


def test_trixor_single_site_frequency():
    n = 4000
    x = np.array([gen_trixor(3, s).states[1, 1] for s in range(n)])
    assert abs(x.mean() - 0.5) < 3 * 0.5 / np.sqrt(n)


def test_fourxor_indices_are_integral():
    f = gen_kxor(4, FOURXOR_FAMILIES, (9, 7), 2)
    assert f.states.shape == (9, 7) and set(np.unique(f.states)) <= {0, 1}
    # vertical lines sit at x = u + v/2: undoubled, the index is not integral
    with pytest.raises(InvalidGeometry):
        gen_kxor(1, [(1, "1/2")], (4, 4), 0)
    ok = gen_kxor(1, [(2, 1)], (4, 4), 0)
    assert ok.offsets == (0,)
    # rational coefficients are fine when every index comes out integral
    assert gen_kxor(1, [("1/2", "1/2")], (1, 1), 0).states.shape == (1, 1)
    with pytest.raises(InvalidGeometry):
        gen_kxor(1, [("1/2", "1/2")], (2, 1), 0)


def test_line_flip_locality():
    su, sv = 10, 8
    base = gen_kxor(4, FOURXOR_FAMILIES, (su, sv), 7)
    U, V = np.meshgrid(np.arange(su), np.arange(sv), indexing="ij")
    for f, (a, b) in enumerate(FOURXOR_FAMILIES):
        seqs = [(lo, bits.copy()) for lo, bits in zip(base.offsets, base.sequences)]
        lo, bits = seqs[f]
        line = lo + 5
        bits[5] ^= 1
        flipped = gen_kxor(4, FOURXOR_FAMILIES, (su, sv), sequences=seqs)
        changed = flipped.states != base.states
        assert (changed == (a * U + b * V == line)).all()


def test_all_zero_field_is_one_cluster():
    z = np.zeros((16, 16), dtype=np.int8)
    labels, n = label_clusters(z)
    assert n == 1 and (labels == 1).all()
    t = cluster_table(z)
    assert t.tolist() == [[256, 16, 0, 1]]


def test_cluster_table_boundary_accounting():
    s = gen_trixor(32, 4).states
    t = cluster_table(s)
    assert t[:, 0].sum() == s.size
    # every unlike bond is counted once on each side
    unlike = 0
    for du, dv in ((1, 0), (0, 1), (1, -1)):
        A = s[max(0, -du):s.shape[0] - max(0, du), max(0, -dv):s.shape[1] - max(0, dv)]
        B = s[max(0, du):, max(0, dv):][:A.shape[0], :A.shape[1]]
        unlike += int((A != B).sum())
    assert t[:, 2].sum() == 2 * unlike


def test_triangular_adjacency_in_labels():
    s = np.ones((3, 3), dtype=np.int8)
    s[0, 0] = s[1, 1] = 0  # offset (1, 1) is not a triangular neighbour
    _, n = label_clusters(s, value=0)
    assert n == 2
    s = np.ones((2, 2), dtype=np.int8)
    s[0, 1] = s[1, 0] = 0  # offset (1, -1) is a triangular neighbour
    _, n = label_clusters(s, value=0)
    assert n == 1


def test_variant_stats_and_rle():
    f = gen_trixor(64, 3)
    out = variant_cluster_stats([f, gen_trixor(64, 4)], seed=1, boot=30)
    assert out["fields"] == 2 and sum(out["size_hist"].values()) == out["clusters"]
    assert all(a >= b for a, b in zip(out["tail_P"], out["tail_P"][1:]))
    bits = f.states.ravel()
    assert (rle_decode(rle_encode(bits)) == bits).all()


def test_variant_study_reports_bands():
    r = variant_study("trixor", size=64, samples=3, seed=0)
    assert r["even_violations"] == 0
    assert r["reference"] == REFERENCE_BANDS["trixor"]
    assert np.isfinite(r["gamma"]) and len(r["gamma_ci"]) == 2
    r4 = variant_study("4xor", size=64, samples=2, seed=0)
    assert r4["even_violations"] is None
    with pytest.raises(ValueError):
        variant_study("2xor")
    with pytest.raises(InsufficientData):
        variant_study("trixor", samples=0)


def test_origin_tail_edge_and_isolated_sites():
    from cornerlab.xor import origin_tail
    z = np.zeros((32, 32), dtype=np.int8)
    assert origin_tail(z, [4, 8]).tolist() == [1.0, 1.0]
    # a 1 at every third site along both axes isolates it from the other 1s
    s = np.zeros((32, 32), dtype=np.int8)
    s[::3, ::3] = 1
    t = origin_tail(s, [2, 4])
    ones = s[8:24, 8:24].mean()
    assert t[0] == pytest.approx(1 - ones)
