import math
from fractions import Fraction

import numpy as np
import pytest

from cornerlab.errors import InsufficientData
from cornerlab.series import (
    DELTA2, L_direct, L_exact, L_float, L_sequence, M, N, T, U, V, fit_exponent,
    indicial_coefficients, indicial_poly, indicial_roots, indicial_roots_numeric,
    mean_excursion_length,
)


def test_small_building_blocks():
    assert V(2, 1) == Fraction(7, 3)
    assert U(2, 1) == Fraction(8, 3)
    assert N(2, 1, 2) == Fraction(4, 3)
    assert M(2, 1, 2) == Fraction(1, 3)
    assert T(2) == Fraction(160, 9)
    assert mean_excursion_length(2) == Fraction(14, 3)


def test_visits_and_crossings_consistent():
    # every step from i to i+1 or back ends at i or i+1: sum of V = length + 1
    for h in range(1, 12):
        assert sum(V(h, i) for i in range(h + 1)) == mean_excursion_length(h) + 1


def test_domain_errors():
    with pytest.raises(ValueError):
        V(3, 4)
    with pytest.raises(ValueError):
        N(3, 2, 2)
    with pytest.raises(ValueError):
        L_sequence(0)


def test_base_values():
    L = L_exact(2)
    assert L[1] == 4 and L[2] == Fraction(52, 3)


def test_grouped_recursion_matches_double_sums():
    a, b = L_direct(10), L_exact(10)
    for h in range(1, 11):
        assert Fraction(b[h]) == a[h]


def test_L_increasing():
    L = L_exact(40)
    assert all(L[h] < L[h + 1] for h in range(1, 40))


@pytest.mark.parametrize("h", [100, 250, 500, 1000])
def test_T_cubic_scaling(h):
    assert 1.0 <= float(T(h)) / h ** 3 <= 1.14


def test_float_path_matches_exact():
    ex = L_exact(64)
    fl, err = L_float(64)
    for h in range(1, 65):
        assert abs(float(fl[h]) / float(ex[h]) - 1) < 1e-13
    assert np.max(err[1:]) < 1e-12


def test_sequence_object():
    s = L_sequence(128, exact_cutoff=16)
    assert s.value(1) == 4 and s.value(2) == Fraction(52, 3)
    assert isinstance(s.value(16), Fraction)
    assert s.max_relative_error() < 1e-12
    assert s.K(2) == pytest.approx(52 / 3 * 4)
    csv = s.to_csv().splitlines()
    assert csv[0] == "h,L,K,slope,L_rational"
    assert csv[1].startswith("1,4.0,")
    slopes = [s.slope(h) for h in (16, 32, 64, 128)]
    assert all(a < b for a, b in zip(slopes, slopes[1:]))


def test_fit_needs_three_points():
    s = L_sequence(64, exact_cutoff=8)
    with pytest.raises(InsufficientData):
        fit_exponent(s, h_lo=32)
    f = fit_exponent(s, h_lo=8)
    assert f.h == [8, 16, 32, 64]
    assert f.target == pytest.approx(DELTA2)


def test_fit_accepts_callable():
    L = L_exact(64)
    f = fit_exponent(lambda h: float(L[h]), h_lo=8, h_hi=64)
    g = fit_exponent(L_sequence(64, 64), h_lo=8)
    assert f.slopes == pytest.approx(g.slopes, rel=1e-12)


def test_indicial_roots():
    r = math.sqrt(17)
    for mu in (1, 4, (5 - r) / 2, (5 + r) / 2):
        assert abs(indicial_poly(mu)) <= 1e-9
    assert sorted(indicial_roots()) == pytest.approx(sorted([1, 1, 4, 4, (5 - r) / 2, (5 + r) / 2]))
    num = indicial_roots_numeric()
    assert np.allclose(np.sort(num.real), sorted(indicial_roots()), atol=1e-5)
    assert np.allclose(np.polyval(indicial_coefficients(), 2.5), indicial_poly(2.5))
    assert 2 * ((1 + r) / 4) == pytest.approx(DELTA2)
