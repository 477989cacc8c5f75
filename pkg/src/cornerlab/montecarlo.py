"""Sampling-based estimators.

Each estimator draws sample ``k`` from the keyed stream ``(seed, name, ..., k)``,
so a report is reproducible from its name, parameters, seed and sample count
no matter how the samples are split across worker processes.

Estimators return :class:`MCReport` (a single mean or proportion) or
:class:`FitReport` (a log-log exponent fit over several measurement points).
Both carry a ``violations`` dict of structural counters that must stay zero.
"""

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, _kernels
from .builders import level_edge_count, trace_length
from .contours import closed_components, level0_edge_count, trace_origin
from .errors import CorruptConfiguration, InsufficientData
from .excursions import UP, sample_pair
from .lattice import WindowSpec, gen_signs, make_window
from .rng import stream

SCHEMA_VERSION = 1

#: 2*gamma, the decay exponent of the height tail of the origin's cycle.
TWO_GAMMA = (5 - math.sqrt(17)) / 2
GAMMA = TWO_GAMMA / 2
#: delta, the growth exponent of cycle length against diameter.
DELTA = (1 + math.sqrt(17)) / 4


@dataclass
class MCReport:
    """A point estimate with its standard error."""

    name: str
    params: dict
    samples: int
    estimate: float
    stderr: float
    ci: tuple
    seed: int
    wall_time: float
    censored: int = 0
    violations: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["ci"] = list(self.ci)
        d["schema_version"] = SCHEMA_VERSION
        d["version"] = __version__
        return d


@dataclass
class FitReport:
    """Log-log fit of per-point estimates.

    ``x``, ``y`` and ``yerr`` hold every measured point; ``used`` flags the
    points whose relative error was below ``rel_bound`` and entered the fit.
    ``exponent`` is the fitted log-log slope (sign as measured) and
    ``target`` the value it is compared against.
    """

    name: str
    params: dict
    samples: int
    seed: int
    x: list
    y: list
    yerr: list
    used: list
    exponent: float
    exponent_se: float
    exponent_ci: tuple
    target: float
    target_label: str
    rel_bound: float
    wall_time: float
    censored: int = 0
    violations: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["exponent_ci"] = list(self.exponent_ci)
        d["schema_version"] = SCHEMA_VERSION
        d["version"] = __version__
        return d

    def to_csv(self):
        rows = ["x,y,yerr,used"]
        for x, y, e, u in zip(self.x, self.y, self.yerr, self.used):
            rows.append(f"{x!r},{y!r},{e!r},{int(u)}")
        return "\n".join(rows) + "\n"


# ---- plumbing -----------------------------------------------------------------

def sample_seed(seed, *key):
    """Derived 62-bit seed for one sample."""
    return int(stream(seed, *key).integers(1 << 62))


def default_threads():
    env = os.environ.get("CORNERLAB_THREADS")
    return max(1, int(env)) if env else 1


def _run_chunks(fn, samples, args, threads):
    """Apply ``fn(k0, k1, *args)`` over sample ranges and concatenate in order."""
    threads = max(1, int(threads or 1))
    if threads == 1 or samples < 2 * threads:
        return fn(0, samples, *args)
    step = -(-samples // (4 * threads))
    bounds = [(k, min(k + step, samples)) for k in range(0, samples, step)]
    with ProcessPoolExecutor(threads) as ex:
        parts = list(ex.map(fn, *zip(*[(a, b) + tuple(args) for a, b in bounds])))
    return np.concatenate(parts)


def _mean_report(name, params, values, seed, t0, **kw):
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MCReport(name, params, n, mean, se, (mean - 1.96 * se, mean + 1.96 * se), seed,
                    time.perf_counter() - t0, **kw)


def _prop_report(name, params, hits, n, seed, t0, **kw):
    p = hits / n
    se = math.sqrt(p * (1 - p) / n)
    return MCReport(name, params, n, p, se, (p - 1.96 * se, p + 1.96 * se), seed,
                    time.perf_counter() - t0, **kw)


def fit_loglog(x, y, yerr, rel_bound=0.5):
    """Weighted least-squares slope of ``log y`` against ``log x``.

    Points with ``y <= 0`` or relative error ``>= rel_bound`` are skipped; the
    weight of a point is ``(y / yerr)**2``, the inverse variance of ``log y``.

    Returns
    -------
    slope, stderr, intercept, used : float, float, float, ndarray of bool
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    e = np.asarray(yerr, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(y > 0, e / y, np.inf)
    used = (y > 0) & (x > 0) & (rel < rel_bound)
    if used.sum() < 2:
        raise InsufficientData(f"only {int(used.sum())} usable points for a log-log fit")
    lx, ly = np.log(x[used]), np.log(y[used])
    # zero-error points (exact values) get a floor instead of infinite weight
    s = np.maximum(rel[used], 1e-6)
    w = 1.0 / s ** 2
    A = np.column_stack((lx, np.ones_like(lx)))
    # solve on sqrt(w)-scaled rows; the normal equations are badly conditioned
    # when the weights span many decades
    As = A / s[:, None]
    (slope, icpt), *_ = np.linalg.lstsq(As, ly / s, rcond=None)
    cov = np.linalg.pinv(As.T @ As)
    if used.sum() > 2:
        # scale by the reduced chi-square when it exceeds one, so the CI
        # reflects scatter as well as the per-point errors
        resid = ly - (slope * lx + icpt)
        chi2 = float((w * resid ** 2).sum()) / (used.sum() - 2)
        cov = cov * max(1.0, chi2)
    return float(slope), float(math.sqrt(cov[0, 0])), float(icpt), used


def _fit_report(name, params, samples, seed, x, y, yerr, sign, target, label, rel_bound, t0, **kw):
    slope, se, _, used = fit_loglog(x, y, yerr, rel_bound)
    exp_ = sign * slope
    return FitReport(name, params, samples, seed, [float(v) for v in x], [float(v) for v in y],
                     [float(v) for v in yerr], [bool(u) for u in used], exp_, se,
                     (exp_ - 1.96 * se, exp_ + 1.96 * se), target, label, rel_bound,
                     time.perf_counter() - t0, **kw)


# ---- origin-cycle tails -----------------------------------------------------

def _origin_chunk(k0, k1, seed, name, bias, mode, start, max_window, stop_h, stop_d):
    out = np.empty((k1 - k0, 5), dtype=np.int64)
    for r, k in enumerate(range(k0, k1)):
        spec = WindowSpec(sample_seed(seed, name, k), (0, 0), (0, 0), bias, bias, mode)
        t = trace_origin(spec, start, max_window, stop_height=stop_h, stop_diameter=stop_d)
        out[r] = (t.closed, t.height if t.closed else -1, t.height_lower, t.diameter, t.length)
    return out


def origin_samples(samples, seed, name="origin", bias=0.5, mode="signs", start_size=32,
                   max_window=1 << 14, stop_height=None, stop_diameter=None, threads=1):
    """Raw origin-cycle records.

    Returns an int array with rows ``(closed, height, height_lower,
    diameter, length)``; ``height`` is -1 and the others are lower bounds
    for samples still open when the search stopped.
    """
    return _run_chunks(_origin_chunk, samples,
                       (seed, name, bias, mode, start_size, max_window, stop_height, stop_diameter),
                       threads)


def _tail(rows, col_known, col_lower, t):
    closed = rows[:, 0] == 1
    known = np.where(closed, rows[:, col_known], -1)
    exceed = (closed & (known > t)) | (~closed & (rows[:, col_lower] > t))
    ambiguous = ~closed & (rows[:, col_lower] <= t)
    return int(exceed.sum()), int(ambiguous.sum())


def estimate_P(h_values=(4, 8, 16, 32, 64), samples=20000, seed=0, bias=0.5, mode="signs",
               max_window=1 << 14, rel_bound=0.5, threads=1):
    """Tail of the marginal height of the origin's cycle.

    ``P(h)`` counts cycles of height ``> h``.  Samples still open at the
    window budget have height above their walked range; those whose lower
    bound does not settle the comparison are counted as exceeding (upper
    bound) and reported in ``extra["ambiguous"]``.  The fitted exponent is
    ``-d log P / d log h``, compared with ``2*gamma``.
    """
    t0 = time.perf_counter()
    h_values = [int(h) for h in h_values]
    rows = origin_samples(samples, seed, "P", bias, mode, 32, max_window,
                          stop_height=max(h_values), threads=threads)
    y, e, amb, lower = [], [], [], []
    for h in h_values:
        ex, ab = _tail(rows, 1, 2, h)
        p = (ex + ab) / samples
        y.append(p)
        e.append(math.sqrt(max(p * (1 - p), 1.0 / samples) / samples))
        amb.append(ab)
        lower.append(ex / samples)
    params = {"h_values": h_values, "bias": bias, "mode": mode, "max_window": max_window}
    return _fit_report("P", params, samples, seed, h_values, y, e, -1, TWO_GAMMA,
                       "2*gamma = (5 - sqrt 17)/2", rel_bound, t0,
                       censored=int((rows[:, 0] == 0).sum()),
                       extra={"ambiguous": amb, "lower": lower})


def gamma_hat(report):
    """``gamma`` from a height-tail fit (half the fitted exponent)."""
    return report.exponent / 2


def estimate_diam_tail(n_values=(4, 16, 64, 256, 1024), samples=5000, seed=0, bias=0.5,
                       mode="signs", max_window=1 << 14, rel_bound=0.5, threads=1):
    """Tail of the diameter of the origin's cycle.

    Besides the fit (compared with ``gamma``), ``extra`` holds
    ``P(n) * sqrt(n)`` per point and the mean diameter truncated at each
    ``n``, which keeps growing because the mean diameter is infinite.
    """
    t0 = time.perf_counter()
    n_values = [int(n) for n in n_values]
    rows = origin_samples(samples, seed, "diam", bias, mode, 32, max_window,
                          stop_diameter=max(n_values), threads=threads)
    y, e, amb = [], [], []
    for n in n_values:
        ex, ab = _tail(rows, 3, 3, n)
        p = (ex + ab) / samples
        y.append(p)
        e.append(math.sqrt(max(p * (1 - p), 1.0 / samples) / samples))
        amb.append(ab)
    diam = rows[:, 3]
    trunc = [float(np.minimum(diam, n).mean()) for n in n_values]
    params = {"n_values": n_values, "bias": bias, "mode": mode, "max_window": max_window}
    return _fit_report("diam_tail", params, samples, seed, n_values, y, e, -1, GAMMA,
                       "gamma = (5 - sqrt 17)/4", rel_bound, t0,
                       censored=int((rows[:, 0] == 0).sum()),
                       extra={"ambiguous": amb,
                              "P_sqrt_n": [p * math.sqrt(n) for p, n in zip(y, n_values)],
                              "truncated_mean_diameter": trunc})


def estimate_closure(samples=10000, seed=0, bias=0.5, mode="signs", max_window=1 << 14,
                     threads=1):
    """Fraction of origin components that close within the window budget.

    ``extra["open_diameter_lower"]`` lists how far the open components got,
    and ``extra["tail_fit"]`` the diameter tail of the closed ones measured
    at dyadic points up to a quarter of the budget, for comparing the open
    fraction with a polynomial tail.
    """
    t0 = time.perf_counter()
    rows = origin_samples(samples, seed, "closure", bias, mode, 32, max_window, threads=threads)
    closed = int(rows[:, 0].sum())
    ns = [1 << j for j in range(2, max(3, int(math.log2(max_window)) - 1))]
    tail = []
    for n in ns:
        ex, ab = _tail(rows, 3, 3, n)
        tail.append((ex + ab) / samples)
    params = {"bias": bias, "mode": mode, "max_window": max_window}
    return _prop_report("closure", params, closed, samples, seed, t0,
                        censored=samples - closed,
                        extra={"tail_n": ns, "tail_P": tail})


# ---- built cycles -------------------------------------------------------------

def _pair_chunk(k0, k1, seed, name, h, what):
    out = np.empty(k1 - k0, dtype=np.int64)
    for r, k in enumerate(range(k0, k1)):
        pair = sample_pair(h, stream(seed, name, h, k), UP)
        out[r] = trace_length(pair) if what == 0 else level_edge_count(pair)
    return out


def estimate_L_mc(h, samples=100000, seed=0, threads=1):
    """Mean contour length of a compatible pair of height-``h`` excursions."""
    t0 = time.perf_counter()
    if h < 1:
        raise ValueError("h must be >= 1")
    vals = _run_chunks(_pair_chunk, samples, (seed, "L_mc", int(h), 0), threads)
    return _mean_report("L_mc", {"h": int(h)}, vals, seed, t0)


def estimate_T_mc(h, samples=100000, seed=0, threads=1):
    """Mean number of level edges inside the rectangle of a height-``h`` pair.

    This counts the contour itself plus every other same-level contour edge
    in its rectangle, the quantity the exact ``T(h)`` term accounts for.
    """
    t0 = time.perf_counter()
    vals = _run_chunks(_pair_chunk, samples, (seed, "T_mc", int(h), 1), threads)
    return _mean_report("T_mc", {"h": int(h)}, vals, seed, t0)


def _lbd_chunk(k0, k1, seed, h_max):
    out = np.empty((k1 - k0, 3), dtype=np.int64)
    for r, k in enumerate(range(k0, k1)):
        rng = stream(seed, "lbd", k)
        # log-uniform height on 1..h_max
        h = int(min(h_max, math.floor(math.exp(rng.random() * math.log(h_max + 1)))))
        h = max(h, 1)
        pair = sample_pair(h, rng, UP)
        out[r] = (h, trace_length(pair), max(pair.first.length, pair.second.length) - 1)
    return out


def length_by_diameter_samples(samples, seed=0, h_max=64, threads=1):
    """Rows ``(h, length, diameter)`` of built cycles with log-uniform ``h``."""
    return _run_chunks(_lbd_chunk, samples, (seed, int(h_max)), threads)


def _h_weight(h):
    # plane density of height-h cycles over the sampling density 1/h
    h = np.asarray(h, dtype=float)
    return (1.0 / h - 1.0 / (h + 1)) ** 2 * h


def estimate_length_by_diameter(n_bins=11, samples=20000, seed=0, h_max=64, n_lo=16,
                                n_hi=1024, rel_bound=0.5, min_count=20, threads=1):
    """Mean length of a typical cycle of diameter ``n``, binned dyadically.

    Heights are drawn log-uniformly on ``1..h_max`` and each built cycle is
    reweighted to the density of height-``h`` cycles in the plane, which is
    proportional to ``(1/h - 1/(h+1))**2``.  Bin ``j`` holds diameters in
    ``[2**j, 2**(j+1))``; the fit uses bins whose lower edge lies in
    ``[n_lo, n_hi]`` and is compared with ``delta``.
    """
    t0 = time.perf_counter()
    rows = length_by_diameter_samples(samples, seed, h_max, threads)
    h, L, D = rows[:, 0], rows[:, 1].astype(float), rows[:, 2]
    w = _h_weight(h)
    x, y, e, counts = [], [], [], []
    for j in range(n_bins):
        sel = (D >= (1 << j)) & (D < (2 << j))
        c = int(sel.sum())
        counts.append(c)
        if c < min_count:
            if c and n_lo <= (1 << j) <= n_hi:
                warnings.warn(f"diameter bin {1 << j} has only {c} samples; excluded")
            continue
        ws, ls = w[sel], L[sel]
        m = float((ws * ls).sum() / ws.sum())
        # ratio-estimator standard error
        se = float(math.sqrt((ws ** 2 * (ls - m) ** 2).sum()) / ws.sum())
        x.append(float(math.sqrt((1 << j) * ((2 << j) - 1))))
        y.append(m)
        e.append(max(se, 1e-12 * m))
    x_arr = np.array(x)
    fit_sel = (x_arr >= n_lo) & (x_arr <= 2 * n_hi)
    if fit_sel.sum() < 2:
        raise InsufficientData("fewer than two populated diameter bins in the fit range")
    xs, ys, es = x_arr[fit_sel], np.array(y)[fit_sel], np.array(e)[fit_sel]
    second = {}
    for hv in np.unique(h):
        ls = L[h == hv]
        if ls.size >= 30:
            second[int(hv)] = float((ls ** 2).mean() / ls.mean() ** 2)
    conc = {}
    big = h >= 2
    for K in (2, 4, 8, 16):
        lo_, hi_ = h[big] ** 2 / K, K * h[big] ** 2
        out = (D[big] < lo_) | (D[big] > hi_)
        conc[K] = float(out.mean()) if big.any() else 0.0
    params = {"n_bins": n_bins, "h_max": h_max, "n_lo": n_lo, "n_hi": n_hi}
    bin1 = L[D == 1]
    return _fit_report("length_by_diameter", params, samples, seed, xs, ys, es, 1, DELTA,
                       "delta = (1 + sqrt 17)/4", rel_bound, t0,
                       extra={"all_bins_x": x, "all_bins_y": y, "bin_counts": counts,
                              "second_moment_ratio": second, "outside_fraction": conc,
                              "bin1_lengths": sorted(set(int(v) for v in bin1))})


# ---- level-0 total ----------------------------------------------------------------

def _level0_chunk(k0, k1, seed, N, bias, mode):
    out = np.empty(k1 - k0, dtype=np.int64)
    for r, k in enumerate(range(k0, k1)):
        spec = WindowSpec(sample_seed(seed, "level0", N, k), (-N, N), (-N, N), bias, bias, mode)
        out[r] = level0_edge_count(make_window(spec), 0)
    return out


def estimate_level0_total(N_values=(64, 128, 256, 512), samples=200, seed=0, bias=0.5,
                          mode="signs", gamma=None, delta=None, rel_bound=0.5, threads=1):
    """Total number of level-0 contour edges in the box ``[-N, N]**2``.

    Counted edge by edge, so arcs of contours that leave the box are
    included.  If ``gamma`` and ``delta`` estimates are given, their sum is
    reported in ``extra`` next to the fitted exponent (both target 3/2).
    """
    t0 = time.perf_counter()
    N_values = [int(n) for n in N_values]
    y, e = [], []
    for N in N_values:
        v = _run_chunks(_level0_chunk, samples, (seed, N, bias, mode), threads).astype(float)
        y.append(float(v.mean()))
        e.append(float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0)
    extra = {}
    if gamma is not None and delta is not None:
        extra = {"gamma_hat": gamma, "delta_hat": delta, "gamma_plus_delta": gamma + delta}
    params = {"N_values": N_values, "bias": bias, "mode": mode}
    return _fit_report("level0_total", params, samples, seed, N_values, y, e, 1, 1.5, "3/2",
                       rel_bound, t0, extra=extra)


# ---- crossings and the torus ----------------------------------------------------

def crossing_flags(window):
    """``(left-right, up-down)`` crossing flags of the window's vertex square.

    Every vertex has one horizontal and one vertical edge, so an open arc of
    the window graph leaves the square through exactly two exit edges. A
    left-right crossing is an arc exiting through the left and right sides.
    Two such arcs in orthogonal directions would have to share a vertex, so
    the flags are never both set. Arcs that merely touch a side do not count.
    """
    labels, _ = closed_components(window)
    V = window.vertical_edges()
    E = window.horizontal_edges()
    hdeg = np.zeros(labels.shape, dtype=np.int64)
    hdeg[:-1, :] += E
    hdeg[1:, :] += E
    vdeg = np.zeros(labels.shape, dtype=np.int64)
    vdeg[:, :-1] += V
    vdeg[:, 1:] += V
    left = labels[0, :][hdeg[0, :] == 0]
    right = labels[-1, :][hdeg[-1, :] == 0]
    bottom = labels[:, 0][vdeg[:, 0] == 0]
    top = labels[:, -1][vdeg[:, -1] == 0]
    lr = bool(np.intersect1d(left, right).size)
    ud = bool(np.intersect1d(bottom, top).size)
    return lr, ud


def _crossing_chunk(k0, k1, seed, n, bias, mode):
    out = np.empty((k1 - k0, 3), dtype=np.int64)
    for r, k in enumerate(range(k0, k1)):
        spec = WindowSpec(sample_seed(seed, "crossing", n, k), (0, n - 1), (0, n - 1), bias, bias, mode)
        try:
            lr, ud = crossing_flags(make_window(spec))
            out[r] = (lr, ud, 0)
        except CorruptConfiguration:
            out[r] = (0, 0, 1)
    return out


def estimate_crossing(n, samples=2000, seed=0, bias=0.5, mode="signs", threads=1):
    """Probability of a left-right crossing of the ``n`` x ``n`` vertex square.

    ``violations["both_crossings"]`` counts samples with both a left-right
    and an up-down crossing; ``extra`` has the up-down estimate and the
    z-score of the difference.
    """
    t0 = time.perf_counter()
    if n < 2:
        raise ValueError("n must be >= 2")
    rows = _run_chunks(_crossing_chunk, samples, (seed, int(n), bias, mode), threads)
    lr, ud = rows[:, 0], rows[:, 1]
    both = int((lr & ud).sum())
    p_lr, p_ud = lr.mean(), ud.mean()
    # the two events are disjoint, so var(lr - ud) = p_lr + p_ud - (p_lr - p_ud)^2
    var = (p_lr + p_ud - (p_lr - p_ud) ** 2) / samples
    z = float((p_lr - p_ud) / math.sqrt(var)) if var > 0 else 0.0
    params = {"n": int(n), "bias": bias, "mode": mode}
    return _prop_report("crossing", params, int(lr.sum()), samples, seed, t0,
                        violations={"both_crossings": both, "degree": int(rows[:, 2].sum())},
                        extra={"ud_estimate": float(p_ud), "z_lr_minus_ud": z})


def torus_components(xi, eta):
    """Rows ``(length, wind_x, wind_y)`` for a periodic configuration.

    ``xi`` and ``eta`` are the signs at indices ``0..2n-1`` of one period.
    """
    xi = np.asarray(xi, dtype=np.int8)
    eta = np.asarray(eta, dtype=np.int8)
    p = xi.size
    if p % 2 or eta.size != p:
        raise ValueError("torus signs need equal even periods")
    return _kernels.trace_torus(xi, eta, p, np.zeros((p, p), dtype=np.bool_))


def torus_balanced(signs):
    """Whether the walk of one period returns to its start."""
    s = np.asarray(signs, dtype=np.int64)
    j = np.arange(1, s.size + 1)
    # index 2n coincides with index 0 of the period
    star = np.where(j % 2 == 1, 1, -1) * s[j % s.size]
    return int(star.sum()) == 0


def balance_probability(n):
    """Exact probability that both period-``2n`` walks return to their start."""
    from fractions import Fraction

    return Fraction(math.comb(2 * n, n), 4 ** n) ** 2


def torus_enumerate(n):
    """Exhaustive avoidance statistics on the ``2n`` x ``2n`` torus.

    Returns ``(avoid, balanced, avoid_not_balanced, total)`` counts over all
    sign assignments; the middle entry is always checked against the claim
    that avoiding noncontractible cycles forces both walks to balance.
    """
    import itertools

    p = 2 * n
    avoid = bal = bad = total = 0
    for bits in itertools.product((1, -1), repeat=2 * p):
        xi, eta = np.array(bits[:p]), np.array(bits[p:])
        comps = torus_components(xi, eta)
        a = not np.any(comps[:, 1:] != 0)
        b = torus_balanced(xi) and torus_balanced(eta)
        avoid += a
        bal += b
        bad += a and not b
        total += 1
    return avoid, bal, bad, total


def _torus_chunk(k0, k1, seed, n, bias):
    out = np.empty((k1 - k0, 2), dtype=np.int64)
    p = 2 * n
    for r, k in enumerate(range(k0, k1)):
        s = sample_seed(seed, "torus", n, k)
        xi = gen_signs("xi", (0, p - 1), bias, s).values
        eta = gen_signs("eta", (0, p - 1), bias, s).values
        comps = torus_components(xi, eta)
        out[r] = (np.any(comps[:, 1:] != 0), torus_balanced(xi) and torus_balanced(eta))
    return out


def estimate_torus(n, samples=2000, seed=0, bias=0.5, threads=1):
    """Probability of a noncontractible cycle on the ``2n`` x ``2n`` torus.

    ``violations["avoid_unbalanced"]`` counts samples with no
    noncontractible cycle although a walk fails to balance, which cannot
    happen.  ``extra["balance_probability"]`` is the exact upper bound on
    the avoidance probability.
    """
    t0 = time.perf_counter()
    if n < 1:
        raise ValueError("n must be >= 1")
    rows = _run_chunks(_torus_chunk, samples, (seed, int(n), bias), threads)
    nc, bal = rows[:, 0].astype(bool), rows[:, 1].astype(bool)
    bad = int((~nc & ~bal).sum())
    return _prop_report("torus", {"n": int(n), "bias": bias}, int(nc.sum()), samples, seed, t0,
                        violations={"avoid_unbalanced": bad},
                        extra={"balance_probability": float(balance_probability(n)),
                               "balanced_fraction": float(bal.mean())})


# ---- biased coins ------------------------------------------------------------------

ESTIMATORS = {
    "P": estimate_P,
    "diam_tail": estimate_diam_tail,
    "closure": estimate_closure,
    "crossing": estimate_crossing,
    "level0_total": estimate_level0_total,
}


def biased_sweep(bias_values, estimator="closure", params=None, variant="signs"):
    """Re-run a bias-aware estimator across ``bias_values``.

    ``variant="signs"`` biases the signs themselves; ``variant="steps"``
    biases the walk increments directly, which at ``p != 1/2`` gives walks
    with drift.  At ``p = 1/2`` both variants have the law of the unbiased
    model.
    """
    try:
        fn = ESTIMATORS[estimator]
    except KeyError:
        raise ValueError(f"unknown estimator {estimator!r}; choose from {sorted(ESTIMATORS)}") from None
    params = dict(params or {})
    return [fn(bias=float(p), mode=variant, **params) for p in bias_values]


def structural_violations(reports):
    """Sum every violation counter over a list of reports."""
    tot = {}
    for r in reports:
        for k, v in r.violations.items():
            tot[k] = tot.get(k, 0) + int(v)
    return tot
