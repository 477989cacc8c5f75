"""Expected cycle length ``L(h)`` of a random compatible pair of height ``h``.

The building blocks are exact expectations for the conditioned excursion
of height ``h``: visits ``V(h, i)``, crossings ``U(h, i)``, and the
expected numbers ``N(h, i, j)`` of sub-up-excursions ``i -> j -> i`` and
``M(h, i, j)`` of sub-down-excursions ``j -> i -> j``.  ``L`` satisfies

    L(h) = T(h) - sum_{1<=i<j<=h-1} N(h,i,j) N(h,h-j,h-i) L(j-i)
                - sum_{1<=i<j<=h}   M(h,i,j) M(h,h+1-j,h+1-i) L(j-i),

with ``T(h) = 2 sum_{i=1}^{h} V(h,i) U(h,h-i)`` and ``L(1) = 4``.

Grouping the double sums by ``m = j - i`` turns each coefficient into a
self-convolution: for ``j < h`` both ``N`` and ``M`` factor as
``g(i) / (m (m+1))`` and ``f(j) / (m (m+1))`` with

    g(i) = i(h-i)/h + i(h+1-i)/(h+1),     f(j) = j(h-j)/h + j(h+1-j)/(h+1),

and ``f(h)`` also covers ``M(h, i, h)``, whose up-leg part vanishes.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np

from .errors import InsufficientData

DELTA2 = (1 + math.sqrt(17)) / 2
CORRECTION_EXPONENT = DELTA2 - 2


def _check(cond, msg):
    if not cond:
        raise ValueError(msg)


def V(h, i):
    """Expected number of visits to ``i`` (both endpoints count at 0)."""
    _check(h >= 1 and 0 <= i <= h, f"need 0 <= i <= h, got h={h}, i={i}")
    if i == 0:
        return Fraction(2)
    if i == h:
        return 2 * (1 - Fraction(1, h + 1))
    return Fraction(2 * i * (h - i), h) + Fraction(2 * i * (h + 1 - i), h + 1)


def U(h, i):
    """Expected number of steps between ``i`` and ``i + 1``."""
    _check(h >= 1 and 0 <= i <= h - 1, f"need 0 <= i <= h-1, got h={h}, i={i}")
    return Fraction(2 * (h - i) * (i + 1), h) + Fraction(2 * (h - i + 1) * (i + 1), h + 1) - 2


def N_there(h, i, j):
    return Fraction(i * (h - i), h * (j - i) * (j + 1 - i))


def N_back(h, i, j):
    return Fraction(i * (h + 1 - i), (h + 1) * (j - i) * (j + 1 - i))


def M_there(h, i, j):
    return Fraction((h - j) * j, h * (j - i) * (j + 1 - i))


def M_back(h, i, j):
    return Fraction((h + 1 - j) * j, (h + 1) * (j - i) * (j + 1 - i))


def N(h, i, j):
    """Expected number of sub-up-excursions with base ``i`` and top ``j``."""
    _check(1 <= i < j <= h, f"need 1 <= i < j <= h, got h={h}, i={i}, j={j}")
    if j == h:
        return 1 + N_back(h, i, j)
    return N_there(h, i, j) + N_back(h, i, j)


def M(h, i, j):
    """Expected number of sub-down-excursions with base ``j`` and bottom ``i``."""
    _check(1 <= i < j <= h, f"need 1 <= i < j <= h, got h={h}, i={i}, j={j}")
    if j == h:
        return M_back(h, i, j)
    return M_there(h, i, j) + M_back(h, i, j)


def T(h):
    """Expected number of level edges in the rectangle of a random height-``h`` pair."""
    _check(h >= 1, "h must be >= 1")
    return 2 * sum(V(h, i) * U(h, h - i) for i in range(1, h + 1))


def mean_excursion_length(h):
    """Exact mean length of the conditioned excursion, ``sum_i U(h, i)``."""
    return sum(U(h, i) for i in range(h))


# ---- recursion -------------------------------------------------------------

def L_direct(H):
    """``L(1..H)`` from the double sums as written, in exact arithmetic.

    Cubic in ``H`` per entry; used as an independent check of the grouped
    recursion for small ``H``.
    """
    L = {1: Fraction(4)}
    for h in range(2, H + 1):
        acc = T(h)
        for i in range(1, h - 1):
            for j in range(i + 1, h):
                acc -= N(h, i, j) * N(h, h - j, h - i) * L[j - i]
        for i in range(1, h):
            for j in range(i + 1, h + 1):
                acc -= M(h, i, j) * M(h, h + 1 - j, h + 1 - i) * L[j - i]
        L[h] = acc
    return L


def _T_exact(h):
    q = gmpy2.mpq
    tot = q(0)
    for i in range(1, h + 1):
        v = q(2) * (1 - q(1, h + 1)) if i == h else q(2 * i * (h - i), h) + q(2 * i * (h + 1 - i), h + 1)
        k = h - i
        u = q(2 * (h - k) * (k + 1), h) + q(2 * (h - k + 1) * (k + 1), h + 1) - 2
        tot += v * u
    return 2 * tot


def L_exact(H):
    """``L(1..H)`` in exact rational arithmetic via the grouped coefficients.

    Returns
    -------
    dict
        ``h -> Fraction``.
    """
    q = gmpy2.mpq
    L = [None, q(4)]
    for h in range(2, H + 1):
        g = [q(0)] + [q(i * (h - i), h) + q(i * (h + 1 - i), h + 1) for i in range(1, h)]
        f = [q(0)] + [q(j * (h - j), h) + q(j * (h + 1 - j), h + 1) for j in range(1, h + 1)]
        acc = _T_exact(h)
        for m in range(1, h):
            w = q(1, (m * (m + 1)) ** 2)
            K = h - m
            yn = sum((g[i] * g[K - i] for i in range(1, K)), q(0))
            ym = sum((f[a] * f[h + 1 + m - a] for a in range(m + 1, h + 1)), q(0))
            acc -= (yn + ym) * w * L[m]
        L.append(acc)
    return {h: Fraction(int(L[h].numerator), int(L[h].denominator)) for h in range(1, H + 1)}


def _T_float(h, dtype):
    i = np.arange(1, h + 1, dtype=dtype)
    hh = dtype(h)
    v = 2 * i * (hh - i) / hh + 2 * i * (hh + 1 - i) / (hh + 1)
    v[-1] = 2 * (1 - 1 / (hh + 1))
    k = hh - i
    u = 2 * (hh - k) * (k + 1) / hh + 2 * (hh - k + 1) * (k + 1) / (hh + 1) - 2
    return 2 * np.sum(v * u)


def L_float(H, dtype=np.longdouble, seed_values=None):
    """``L(1..H)`` in floating point via the grouped coefficients.

    Parameters
    ----------
    dtype : numpy float type
        ``np.longdouble`` (default) or ``np.float64``.
    seed_values : dict, optional
        Exact values to use for the first entries instead of recomputing.

    Returns
    -------
    L : ndarray
        ``L[h]`` for ``h = 0..H`` (``L[0]`` unused).
    bound : ndarray
        First-order rounding-error bound relative to ``L[h]``.
    """
    eps = np.finfo(dtype).eps
    L = np.zeros(H + 1, dtype=dtype)
    rel = np.zeros(H + 1, dtype=np.float64)
    L[1] = 4
    for h in range(2, H + 1):
        if seed_values is not None and h in seed_values:
            L[h] = dtype(seed_values[h].numerator) / dtype(seed_values[h].denominator)
            rel[h] = float(eps)
            continue
        hh = dtype(h)
        i = np.arange(1, h, dtype=dtype)
        g = i * (hh - i) / hh + i * (hh + 1 - i) / (hh + 1)
        j = np.arange(1, h + 1, dtype=dtype)
        f = j * (hh - j) / hh + j * (hh + 1 - j) / (hh + 1)
        cg = np.convolve(g, g)          # index k <-> i1 + i2 = k + 2
        cf = np.convolve(f, f)          # index k <-> a + b = k + 2
        m = np.arange(1, h, dtype=np.int64)
        w = 1 / (m.astype(dtype) * (m + 1)) ** 2
        yn = np.zeros(h - 1, dtype=dtype)
        if h >= 3:
            yn[:h - 2] = cg[h - m[:h - 2] - 2]
        ym = cf[h + m - 1]
        terms = (yn + ym) * w * L[1:h]
        t = _T_float(h, dtype)
        L[h] = t - np.sum(terms)
        # rounding in each term plus the error carried by the earlier L values
        mag = abs(t) + np.sum(np.abs(terms))
        carried = np.sum(np.abs(terms) * rel[1:h])
        rel[h] = float((mag * (4 * h) * eps + carried) / abs(L[h]))
    return L, rel


@dataclass
class ExactSeries:
    """``L(1..H_max)`` with exact entries up to ``exact_cutoff``.

    Attributes
    ----------
    L : dict
        ``h -> Fraction`` for ``h <= exact_cutoff`` and ``h -> float``
        (extended precision) beyond.
    L_float : ndarray
        Floating-point values for every ``h`` (``L_float[0]`` unused).
    error_bound : ndarray
        Relative rounding-error estimate of ``L_float``.
    """

    H_max: int
    exact_cutoff: int
    L: dict
    L_float: np.ndarray = field(repr=False)
    error_bound: np.ndarray = field(repr=False)

    def value(self, h):
        return self.L[h]

    def K(self, h):
        return h * h * self.L[h]

    def T(self, h):
        return T(h) if h <= self.exact_cutoff else _T_float(h, np.longdouble)

    def slope(self, h):
        """Local log-log slope ``log(L(h)/L(h-1)) / log(h/(h-1))``."""
        if not 2 <= h <= self.H_max:
            raise ValueError("slope needs 2 <= h <= H_max")
        a, b = self.L_float[h], self.L_float[h - 1]
        return float(np.log(a / b) / np.log(np.longdouble(h) / (h - 1)))

    def max_relative_error(self):
        return float(np.max(self.error_bound[1:]))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "L", "K", "slope", "L_rational"])
        for h in range(1, self.H_max + 1):
            lf = self.L_float[h]
            s = "" if h == 1 else repr(self.slope(h))
            exact = self.L[h] if isinstance(self.L[h], Fraction) else None
            w.writerow([h, repr(float(lf)), repr(float(lf * h * h)), s,
                        "" if exact is None else f"{exact.numerator}/{exact.denominator}"])
        return buf.getvalue()


def L_sequence(H_max=1024, exact_cutoff=64):
    """Compute ``L(1..H_max)``.

    Parameters
    ----------
    H_max : int
    exact_cutoff : int
        Entries up to this ``h`` are exact rationals; later ones are
        extended-precision floats seeded with the exact values.
    """
    if H_max < 1:
        raise ValueError("H_max must be >= 1")
    cut = min(exact_cutoff, H_max)
    exact = L_exact(cut) if cut >= 1 else {}
    Lf, rel = L_float(H_max, np.longdouble, seed_values=exact)
    L = dict(exact)
    for h in range(cut + 1, H_max + 1):
        L[h] = Lf[h]
    return ExactSeries(H_max, cut, L, Lf, rel)


# ---- exponent fit -----------------------------------------------------------

@dataclass
class ExponentFit:
    h: list
    slopes: list
    dyadic_ratio_slopes: list
    extrapolated: float
    coefficients: tuple
    richardson: float
    target: float = DELTA2

    def to_dict(self):
        return {"h": self.h, "slopes": self.slopes, "dyadic_ratio_slopes": self.dyadic_ratio_slopes,
                "extrapolated": self.extrapolated, "coefficients": list(self.coefficients),
                "richardson": self.richardson, "target": self.target,
                "fit_form": "slope(h) = s + a h^-c log h + b h^-c, c = (sqrt(17) - 3) / 2"}


def fit_exponent(series, h_lo=64, h_hi=None, correction=CORRECTION_EXPONENT):
    """Local slopes of ``log L`` at dyadic ``h`` and an extrapolated limit.

    Parameters
    ----------
    series : ExactSeries or callable
        Anything with ``slope(h)`` and ``H_max``, or a function ``h -> L(h)``.
    h_lo, h_hi : int
        Dyadic range; at least three powers of two are required.
    correction : float
        Exponent ``c`` of the correction terms in
        ``slope(h) = s + a h^-c log h + b h^-c``.  This form is a pragmatic
        choice; the result is reported next to the raw slopes and a
        ``1/h`` Richardson estimate, ``2 s(h) - s(h/2)``.
    """
    if callable(series) and not hasattr(series, "slope"):
        fn = series

        def slope(h):
            return float(np.log(fn(h) / fn(h - 1)) / np.log(h / (h - 1)))

        H = h_hi
    else:
        slope = series.slope
        H = series.H_max
    if h_hi is None:
        h_hi = H
    hs = [1 << k for k in range(1, 40) if h_lo <= (1 << k) <= min(h_hi, H)]
    if len(hs) < 3:
        raise InsufficientData(f"need at least 3 dyadic points in [{h_lo}, {h_hi}]")
    s = np.array([slope(h) for h in hs])
    x = np.array(hs, dtype=float)
    A = np.column_stack((np.ones_like(x), x ** -correction * np.log(x), x ** -correction))
    coef, *_ = np.linalg.lstsq(A, s, rcond=None)
    ratio = [None] * len(hs)
    if hasattr(series, "L_float"):
        ratio = [None] + [float(np.log(series.L_float[h] / series.L_float[h // 2]) / np.log(2))
                          for h in hs[1:]]
    rich = float(2 * s[-1] - s[-2])
    return ExponentFit(hs, [float(v) for v in s], ratio, float(coef[0]), tuple(float(c) for c in coef), rich)


# ---- indicial polynomial ----------------------------------------------------

def indicial_poly(mu):
    """``mu(mu-1)...(mu-5) + 8 mu(mu-1) - 32 mu + 32``."""
    p = 1
    for k in range(6):
        p = p * (mu - k)
    return p + 8 * mu * (mu - 1) - 32 * mu + 32


def indicial_coefficients():
    """Monomial coefficients of :func:`indicial_poly`, highest degree first."""
    c = np.poly(np.arange(6, dtype=float))
    c[-3:] += np.array([8.0, -8.0 - 32.0, 32.0])
    return c


def indicial_roots():
    """The six roots ``1, 1, 4, 4, (5 - sqrt 17)/2, (5 + sqrt 17)/2``."""
    r = math.sqrt(17)
    return [1.0, 1.0, 4.0, 4.0, (5 - r) / 2, (5 + r) / 2]


def indicial_roots_numeric():
    """Roots from the companion matrix, sorted by real part."""
    return np.sort_complex(np.roots(indicial_coefficients()))
