"""Linear-entropy variants: 2-xor bonds, trixor and k-xor sites.

Every variant assigns one fair bit to each line of some families of
parallel lines and gives a bond or site the xor of the bits of the lines
through it.  Bits for line ``i`` of family ``f`` come from a keyed block
of the master seed, so the bit of a line never depends on the window.

The triangular lattice uses axial coordinates ``(u, v)``: the site is at
``u + v/2, v*sqrt(3)/2`` and its six neighbours differ by ``(±1, 0)``,
``(0, ±1)``, ``(1, -1)`` and ``(-1, 1)``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import ndimage

from .errors import InsufficientData, InvalidGeometry
from .rng import BLOCK, stream

#: Index functionals ``(a, b) -> a*u + b*v`` of the three trixor line families.
TRIANGULAR_FAMILIES = ((1, 0), (0, 1), (1, 1))
#: Trixor families plus vertical lines, indexed by the doubled x-coordinate.
FOURXOR_FAMILIES = TRIANGULAR_FAMILIES + ((2, 1),)

#: Neighbour structure of the triangular lattice in axial array coordinates.
TRI_STRUCTURE = np.array([[0, 1, 1], [1, 1, 1], [1, 1, 0]], dtype=bool)
_TRI_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))

#: Reference bands for (gamma, delta) from published simulations.
REFERENCE_BANDS = {
    "trixor": {"gamma": (0.16, 0.2), "delta": (1.3, 1.34)},
    "4xor": {"gamma": (0.93, 1.05), "delta": (1.74, 1.76)},
}


def line_bits(seed, family, lo, hi):
    """Fair bits for lines ``lo..hi`` of one family."""
    parts = []
    for b in range(lo // BLOCK, hi // BLOCK + 1):
        bits = stream(seed, "xor", family, b).integers(0, 2, BLOCK, dtype=np.int8)
        s = max(lo - b * BLOCK, 0)
        e = min(hi - b * BLOCK, BLOCK - 1)
        parts.append(bits[s:e + 1])
    return np.concatenate(parts)


# ---- 2-xor ------------------------------------------------------------------------

@dataclass
class Xor2Field:
    """Open/closed bonds of a 2-xor configuration.

    ``horizontal[i, j]`` is the bond ``(x0+i, y0+j) - (x0+i+1, y0+j)`` and
    ``vertical[i, j]`` the bond ``(x0+i, y0+j) - (x0+i, y0+j+1)``.  The line
    sequences are indexed by doubled midpoint coordinates: ``xi[k]`` is the
    bit of the vertical line ``x = (k + 2*x0)/2``.
    """

    x_range: tuple
    y_range: tuple
    xi: np.ndarray
    eta: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray


def gen_2xor(window, seed=0, xi=None, eta=None):
    """Bond field ``zeta(e) = xi(x_e) + eta(y_e) mod 2`` on a vertex window.

    Parameters
    ----------
    window : tuple
        ``((x0, x1), (y0, y1))`` vertex ranges.
    seed : int
    xi, eta : array_like, optional
        Explicit bits on doubled coordinates ``2*x0 .. 2*x1`` (resp. y),
        replacing the random ones.
    """
    (x0, x1), (y0, y1) = window
    if x1 < x0 or y1 < y0:
        raise ValueError("empty window")
    xi = line_bits(seed, 0, 2 * x0, 2 * x1) if xi is None else np.asarray(xi, dtype=np.int8) % 2
    eta = line_bits(seed, 1, 2 * y0, 2 * y1) if eta is None else np.asarray(eta, dtype=np.int8) % 2
    # horizontal bond midpoint (x + 1/2, y): doubled (2x + 1, 2y)
    hor = (xi[1::2][:, None] ^ eta[0::2][None, :]).astype(bool)
    ver = (xi[0::2][:, None] ^ eta[1::2][None, :]).astype(bool)
    return Xor2Field((x0, x1), (y0, y1), xi, eta, hor, ver)


# ---- triangular variants ---------------------------------------------------------

@dataclass
class SiteField:
    """0/1 states on the axial window ``[0, size_u) x [0, size_v)``."""

    states: np.ndarray
    families: tuple
    offsets: tuple
    sequences: tuple


def gen_trixor(size, seed=0, sequences=None):
    """Trixor field ``tau(u, v) = xi(u) + eta(v) + zeta(u + v) mod 2``.

    Parameters
    ----------
    size : int
        Side of the axial window ``[0, size)**2``.
    sequences : tuple of array_like, optional
        Explicit bits for the three families, indexed from 0 (the third has
        length ``2*size - 1``).
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    if sequences is None:
        xi = line_bits(seed, 0, 0, size - 1)
        eta = line_bits(seed, 1, 0, size - 1)
        zeta = line_bits(seed, 2, 0, 2 * size - 2)
    else:
        xi, eta, zeta = (np.asarray(s, dtype=np.int8) % 2 for s in sequences)
    u = np.arange(size)
    st = xi[:, None] ^ eta[None, :] ^ zeta[u[:, None] + u[None, :]]
    return SiteField(st.astype(np.int8), TRIANGULAR_FAMILIES, (0, 0, 0), (xi, eta, zeta))


def _family_index(fam, U, V):
    a, b = (Fraction(c) for c in fam)
    if a.denominator == 1 and b.denominator == 1:
        return int(a) * U + int(b) * V
    # rational coefficients: the index must still be an integer at every site
    num = (a.numerator * (b.denominator) * U + b.numerator * a.denominator * V)
    den = a.denominator * b.denominator
    if np.any(num % den):
        raise InvalidGeometry(f"line family {fam} gives non-integral indices")
    return num // den


def gen_kxor(k, line_families, window, seed=0, sequences=None):
    """Xor of ``k`` line-family bits at every site of an axial window.

    Parameters
    ----------
    k : int
        Number of families; must match ``line_families``.
    line_families : sequence of (a, b)
        Family ``f`` puts site ``(u, v)`` on line ``a*u + b*v``.  Rational
        coefficients are allowed as long as every index is an integer.
    window : tuple
        ``(size_u, size_v)``.
    sequences : sequence of (lo, bits), optional
        Explicit bits per family starting at line ``lo``.

    Raises
    ------
    InvalidGeometry
        Some site gets a non-integral line index.
    """
    if k != len(line_families):
        raise ValueError(f"k = {k} but {len(line_families)} families given")
    su, sv = window
    U, V = np.meshgrid(np.arange(su), np.arange(sv), indexing="ij")
    st = np.zeros((su, sv), dtype=np.int8)
    seqs, offs = [], []
    for f, fam in enumerate(line_families):
        idx = _family_index(fam, U, V)
        lo, hi = int(idx.min()), int(idx.max())
        if sequences is None:
            bits = line_bits(seed, f, lo, hi)
        else:
            lo_given, bits = sequences[f]
            bits = np.asarray(bits, dtype=np.int8) % 2
            bits = bits[lo - lo_given:]
        st ^= bits[idx - lo]
        seqs.append(bits)
        offs.append(lo)
    return SiteField(st, tuple(line_families), tuple(offs), tuple(seqs))


def even_zero_violations(states):
    """Interior sites with an odd number of 0-labelled neighbours."""
    s = np.asarray(states)
    if min(s.shape) < 3:
        return 0
    zeros = np.zeros((s.shape[0] - 2, s.shape[1] - 2), dtype=np.int64)
    for du, dv in _TRI_OFFSETS:
        zeros += s[1 + du:s.shape[0] - 1 + du, 1 + dv:s.shape[1] - 1 + dv] == 0
    return int((zeros % 2).sum())


# ---- cluster statistics ------------------------------------------------------------

def label_clusters(states, value=None):
    """Label same-state clusters of a triangular site field.

    With ``value`` given only sites of that state are clustered; otherwise
    both states are labelled (0-clusters first).  Returns ``(labels, n)``.
    """
    s = np.asarray(states)
    if value is not None:
        return ndimage.label(s == value, structure=TRI_STRUCTURE)
    l0, n0 = ndimage.label(s == 0, structure=TRI_STRUCTURE)
    l1, n1 = ndimage.label(s == 1, structure=TRI_STRUCTURE)
    return np.where(l1 > 0, l1 + n0, l0), n0 + n1


def cluster_table(states):
    """Per-cluster rows ``(size, diameter, boundary, touches_edge)``.

    The diameter is the larger axial extent plus one; the boundary counts
    lattice bonds from the cluster to sites of the other state.
    """
    s = np.asarray(states)
    labels, n = label_clusters(s)
    if n == 0:
        return np.zeros((0, 4), dtype=np.int64)
    size = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    sl = ndimage.find_objects(labels)
    ext = np.array([max(a.stop - a.start, b.stop - b.start) for a, b in sl])
    touch = np.array([a.start == 0 or b.start == 0 or a.stop == s.shape[0] or b.stop == s.shape[1]
                      for a, b in sl])
    bnd = np.zeros(n + 1, dtype=np.int64)
    for du, dv in ((1, 0), (0, 1), (1, -1)):
        A = labels[max(0, -du):s.shape[0] - max(0, du), max(0, -dv):s.shape[1] - max(0, dv)]
        B = labels[max(0, du):, max(0, dv):][:A.shape[0], :A.shape[1]]
        diff = A != B
        bnd += np.bincount(A[diff], minlength=n + 1)
        bnd += np.bincount(B[diff], minlength=n + 1)
    return np.column_stack((size, ext, bnd[1:], touch)).astype(np.int64)


def origin_tail(states, ns):
    """``P(diameter of the origin's cluster > n)`` with the origin in the central half.

    Every site of the central half-window serves as an origin.  A cluster
    touching the window edge reaches at least a quarter side from such an
    origin, so for ``n`` below a quarter of the side it is counted as
    exceeding ``n`` without censoring bias.
    """
    s = np.asarray(states)
    labels, _ = label_clusters(s)
    sl = ndimage.find_objects(labels)
    ext = np.array([max(a.stop - a.start, b.stop - b.start) for a, b in sl])
    touch = np.array([a.start == 0 or b.start == 0 or a.stop == s.shape[0] or b.stop == s.shape[1]
                      for a, b in sl])
    qu, qv = s.shape[0] // 4, s.shape[1] // 4
    c = labels[qu:s.shape[0] - qu, qv:s.shape[1] - qv].ravel() - 1
    return np.array([np.mean((ext[c] > n) | touch[c]) for n in ns])


def variant_cluster_stats(field, seed=0, n_values=None, boot=200):
    """Cluster size / boundary statistics and exponent fits for one or more fields.

    ``gamma`` is the tail exponent of the diameter of the origin's cluster
    (see :func:`origin_tail`); ``delta`` is the log-log slope of the mean
    boundary length of clusters clear of the window edge against their
    diameter, over dyadic bins with at least five clusters.

    Parameters
    ----------
    field : SiteField, ndarray or list of them
        Several fields are pooled.
    seed : int
        Seeds the bootstrap over fields used for the confidence intervals
        (over clusters for ``delta`` when there is a single field; ``gamma``
        then has no interval).
    n_values : sequence of int, optional
        Diameters for the tail fit; defaults to ``8 .. side/4`` in powers of two.

    Returns
    -------
    dict
        ``size_hist``, ``boundary_hist`` (log2 bins), ``largest_fraction``,
        ``gamma`` and ``delta`` fits with 95% CIs.
    """
    fields = field if isinstance(field, (list, tuple)) else [field]
    states = [np.asarray(f.states if isinstance(f, SiteField) else f) for f in fields]
    tables = [cluster_table(s) for s in states]
    T = np.vstack(tables)
    side = min(min(s.shape) for s in states)
    if n_values is None:
        n_values = [1 << j for j in range(3, max(4, int(math.log2(max(side, 32))) - 1))]
    n_values = np.asarray(n_values, dtype=float)
    tails = np.array([origin_tail(s, n_values) for s in states])
    rng = stream(seed, "variant_boot")

    def gamma_fit(rows):
        y = rows.mean(axis=0)
        ok = y > 0
        if ok.sum() < 2:
            return np.nan
        return -np.polyfit(np.log(n_values[ok]), np.log(y[ok]), 1)[0]

    def delta_fit(tabs):
        # mean boundary length per dyadic diameter bin, bins of diameter 8 .. side/2
        TT = np.vstack(tabs)
        TT = TT[TT[:, 3] == 0]
        x, y = [], []
        for j in range(3, int(math.log2(max(side, 2)))):
            sel = (TT[:, 1] >= 1 << j) & (TT[:, 1] < 2 << j)
            if sel.sum() >= 5:
                x.append(math.sqrt((1 << j) * ((2 << j) - 1)))
                y.append(TT[sel, 2].mean())
        if len(x) < 2:
            return np.nan
        return np.polyfit(np.log(x), np.log(y), 1)[0]

    g0, d0 = gamma_fit(tails), delta_fit(tables)
    bs = []
    if len(states) > 1:
        for _ in range(boot):
            pick = rng.integers(0, len(states), len(states))
            bs.append((gamma_fit(tails[pick]), delta_fit([tables[i] for i in pick])))
    elif T.shape[0] > 1:
        for _ in range(boot):
            pick = rng.integers(0, T.shape[0], T.shape[0])
            bs.append((np.nan, delta_fit([T[pick]])))
    bs = np.array(bs, dtype=float).reshape(-1, 2)

    def ci(col):
        v = bs[:, col][np.isfinite(bs[:, col])]
        if v.size < 10:
            return (float("nan"), float("nan"))
        return (float(np.quantile(v, 0.025)), float(np.quantile(v, 0.975)))

    def hist(vals):
        vals = vals[vals > 0]
        if vals.size == 0:
            return {}
        b = np.floor(np.log2(vals)).astype(int)
        return {int(1 << k): int(c) for k, c in zip(*np.unique(b, return_counts=True))}

    sites = sum(s.size for s in states)
    return {
        "fields": len(states),
        "clusters": int(T.shape[0]),
        "size_hist": hist(T[:, 0]),
        "boundary_hist": hist(T[:, 2]),
        "largest_fraction": float(max(t[:, 0].max() / s.size for t, s in zip(tables, states))),
        "edge_touching_fraction": float(T[T[:, 3] == 1, 0].sum() / sites),
        "tail_n": [int(n) for n in n_values],
        "tail_P": [float(v) for v in tails.mean(axis=0)],
        "gamma": float(g0), "gamma_ci": ci(0),
        "delta": float(d0), "delta_ci": ci(1),
    }


def variant_study(variant, size=256, samples=8, seed=0):
    """Generate ``samples`` fields of a variant and pool their cluster statistics.

    ``variant`` is ``"trixor"`` or ``"4xor"``.  The result also carries the
    count of even-neighbourhood violations (trixor only; must be zero) and
    the reference bands for comparison.
    """
    if variant not in REFERENCE_BANDS:
        raise ValueError(f"unknown variant {variant!r}; choose trixor or 4xor")
    if samples < 1:
        raise InsufficientData("need at least one sample")
    fields, viol = [], 0
    for k in range(samples):
        s = int(stream(seed, variant, k).integers(1 << 62))
        if variant == "trixor":
            f = gen_trixor(size, s)
            viol += even_zero_violations(f.states)
        else:
            f = gen_kxor(4, FOURXOR_FAMILIES, (size, size), s)
        fields.append(f)
    out = variant_cluster_stats(fields, seed)
    out.update({"variant": variant, "size": size, "samples": samples, "seed": seed,
                "even_violations": viol if variant == "trixor" else None,
                "reference": REFERENCE_BANDS[variant]})
    return out
