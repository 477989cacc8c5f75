"""Excursions of simple random walks and the height-conditioned sampler.

An up-excursion of height ``h`` is a segment ``X_a..X_c`` with
``X_a = X_c``, ``X_j > X_a`` strictly inside and ``max - X_a = h``; a
down-excursion is the mirror image.  :func:`sample_excursion` draws an
up-excursion conditioned to have height exactly ``h`` by running the
walk in two legs: an up-leg from 1 conditioned to reach ``h`` before 0,
and a return leg from ``h`` conditioned to reach 0 before ``h + 1``.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from . import _kernels
from .errors import InsufficientData

UP, DOWN = "up", "down"


@dataclass(frozen=True, eq=False)
class Excursion:
    """A finite excursion segment.

    Attributes
    ----------
    direction : {"up", "down"}
    offset : int
        Walk index ``a`` of the first value.
    base : int
        Value at both endpoints.
    steps : ndarray of int64
        The ``2k + 1`` walk values ``X_a..X_{a+2k}``.
    """

    direction: str
    offset: int
    base: int
    steps: np.ndarray = field(repr=False)

    @property
    def length(self):
        return len(self.steps) - 1

    @property
    def height(self):
        return int(np.max(np.abs(self.steps - self.base)))

    @property
    def end(self):
        return self.offset + self.length

    def shifted(self, offset=None, base=None):
        """Same shape moved to a new offset and/or base value."""
        off = self.offset if offset is None else offset
        b = self.base if base is None else base
        return Excursion(self.direction, off, b, self.steps - self.base + b)

    def relative(self):
        """Values measured from the base, positive for up, negative for down."""
        return self.steps - self.base

    def extrema(self):
        """Relative indices where the excursion reaches its height."""
        r = np.abs(self.relative())
        return np.flatnonzero(r == self.height)

    def __eq__(self, other):
        if not isinstance(other, Excursion):
            return NotImplemented
        return (self.direction, self.offset, self.base) == (other.direction, other.offset, other.base) \
            and np.array_equal(self.steps, other.steps)

    def to_dict(self):
        return {"direction": self.direction, "offset": self.offset, "base": self.base,
                "height": self.height, "length": self.length,
                "steps": [int(v) for v in self.steps]}


def excursion_direction(values):
    """``"up"``/``"down"`` if ``values`` is an excursion, else None."""
    v = np.asarray(values, dtype=np.int64)
    if v.size < 3 or (v.size - 1) % 2:
        return None
    if np.any(np.abs(np.diff(v)) != 1) or v[0] != v[-1]:
        return None
    inner = v[1:-1] - v[0]
    if np.all(inner > 0):
        return UP
    if np.all(inner < 0):
        return DOWN
    return None


def make_excursion(values, offset=0):
    """Wrap walk values as an :class:`Excursion`, validating the shape."""
    v = np.asarray(values, dtype=np.int64)
    d = excursion_direction(v)
    if d is None:
        raise ValueError("values do not form an excursion")
    return Excursion(d, int(offset), int(v[0]), v.copy())


@dataclass(frozen=True)
class CompatiblePair:
    """Column marginal ``first`` and row marginal ``second`` of one contour."""

    first: Excursion
    second: Excursion

    def __post_init__(self):
        if not is_compatible(self.first, self.second):
            raise ValueError("excursions are not a compatible pair")

    @property
    def direction(self):
        return self.first.direction

    @property
    def height(self):
        return self.first.height

    @property
    def level(self):
        """Height of the black faces along the contour."""
        s = self.first.base + self.second.base
        h = self.height
        if self.direction == UP:
            return (s + h) // 2
        return (s - h - 1) // 2


def is_compatible(e1, e2):
    """Same direction, same height, and the base parity rule.

    ``X_a + Y_b + h`` must be even for up-excursions and odd for
    down-excursions.
    """
    if e1.direction != e2.direction or e1.height != e2.height:
        return False
    parity = (e1.base + e2.base + e1.height) % 2
    return parity == (0 if e1.direction == UP else 1)


def _matched_pairs(values, opener):
    # Bracket matching of walk steps: a step in direction ``opener`` opens,
    # the opposite step closes.  Yields (start, end, depth) with depth 0 for
    # excursions not contained in a larger one inside the segment.
    steps = np.diff(values)
    stack = []
    out = []
    for t, s in enumerate(steps):
        if s == opener:
            stack.append(t)
        elif stack:
            a = stack.pop()
            out.append((a, t + 1, len(stack)))
    return out


def detect_excursions(walk, range=None, direction=None, nested=False):
    """List the excursions contained in a walk segment.

    Parameters
    ----------
    walk : Walk or array_like
        A :class:`~cornerlab.lattice.Walk` or plain values (offset 0).
    range : tuple of int, optional
        Inclusive index range to scan; the whole walk by default.
    direction : {"up", "down", None}
        Restrict to one direction.
    nested : bool
        If False only maximal excursions are returned, i.e. those not
        contained in a longer excursion of the same direction inside the
        range.  If True every excursion is returned.

    Returns
    -------
    list of Excursion
        Sorted by offset, then by decreasing length.
    """
    if hasattr(walk, "segment"):
        lo, hi = (walk.lo, walk.hi) if range is None else range
        vals = np.asarray(walk.segment(lo, hi), dtype=np.int64)
    else:
        vals = np.asarray(walk, dtype=np.int64)
        lo = 0
        if range is not None:
            lo = range[0]
            vals = vals[range[0]:range[1] + 1]
    dirs = (UP, DOWN) if direction is None else (direction,)
    found = []
    for d in dirs:
        for a, c, depth in _matched_pairs(vals, 1 if d == UP else -1):
            if nested or depth == 0:
                seg = vals[a:c + 1]
                found.append(Excursion(d, lo + a, int(seg[0]), seg.copy()))
    found.sort(key=lambda e: (e.offset, -e.length))
    return found


def bracket_string(signs, rule="step", offset=0):
    """Bracket word of the sign list ``sign(offset+1), sign(offset+2), ...``.

    A ``+1`` sign becomes a parenthesis and a ``-1`` sign a square bracket.

    Parameters
    ----------
    rule : {"step", "count"}
        With ``"step"`` a symbol opens when the walk step at its position
        goes in the same direction as the first step, and closes otherwise.
        With ``"count"`` the k-th symbol of each type opens for odd k and
        closes for even k.  The count rule is balanced on excursions of
        height at most 2 but not beyond (``0,1,2,3,2,1,0`` gives
        ``([)(])``); the step rule characterises excursions exactly, see
        :func:`is_irreducible`.
    offset : int
        Walk index just before the first sign; sets the step parity.
    """
    signs = [int(s) for s in signs]
    out = []
    if rule == "count":
        kp = km = 0
        for s in signs:
            if s > 0:
                kp += 1
                out.append("(" if kp % 2 else ")")
            else:
                km += 1
                out.append("[" if km % 2 else "]")
        return "".join(out)
    if rule != "step":
        raise ValueError("rule must be 'step' or 'count'")
    first = None
    for t, s in enumerate(signs):
        n = offset + 1 + t
        step = s if n % 2 == 1 else -s
        if first is None:
            first = step
        opening = step == first
        if s > 0:
            out.append("(" if opening else ")")
        else:
            out.append("[" if opening else "]")
    return "".join(out)


def is_balanced(word):
    """Whether a word over ``()[]`` is a well-nested bracketing."""
    match = {")": "(", "]": "["}
    stack = []
    for ch in word:
        if ch in "([":
            stack.append(ch)
        elif not stack or stack.pop() != match[ch]:
            return False
    return not stack


def is_irreducible(word):
    """Balanced, with the first bracket closed only by the last one."""
    if not is_balanced(word) or not word:
        return False
    depth = 0
    for ch in word[:-1]:
        depth += 1 if ch in "([" else -1
        if depth == 0:
            return False
    return True


def signs_of_segment(values, offset):
    """Signs ``sign(n) = (-1)**(n+1) * (X_n - X_{n-1})`` for ``n = offset+1..``."""
    steps = np.diff(np.asarray(values, dtype=np.int64))
    n = np.arange(offset + 1, offset + 1 + steps.size)
    return steps * np.where(n % 2 == 1, 1, -1)


# ---- hitting probabilities -----------------------------------------------

def _prob(p, i):
    if callable(p):
        return Fraction(p(i))
    if isinstance(p, Mapping):
        return Fraction(p[i])
    return Fraction(p[i])


def phi(up_probs, down_probs, x, ref):
    """Scale function ``sum_{m=ref}^{x-1} prod_{i=ref+1}^{m} q_i / p_i``."""
    total = Fraction(0)
    prod = Fraction(1)
    for m in range(ref, x):
        if m > ref:
            prod *= _prob(down_probs, m) / _prob(up_probs, m)
        total += prod
    return total


def birth_death_hitting(up_probs, down_probs, x, a, b):
    """``P_x(T_a < T_b)`` for a nearest-neighbour chain on ``a..b``.

    Parameters
    ----------
    up_probs, down_probs : callable, mapping or sequence
        ``p_i`` and ``q_i`` for interior states ``a < i < b``; each may be a
        function of the state, a dict, or a list indexed by the state.
    x, a, b : int
        Start and the two absorbing states, ``a <= x <= b``.

    Returns
    -------
    Fraction
    """
    if not a <= x <= b:
        raise ValueError(f"need a <= x <= b, got a={a}, x={x}, b={b}")
    if a == b:
        return Fraction(1)
    fb = phi(up_probs, down_probs, b, a)
    fx = phi(up_probs, down_probs, x, a)
    return (fb - fx) / fb


def p_there_down(i):
    """Down-probability of the up-leg at state ``i``; does not involve ``h``."""
    return Fraction(i - 1, 2 * i)


def p_back_down(j, h):
    """Down-probability of the return leg at state ``j`` for height ``h``."""
    return Fraction(h + 2 - j, 2 * (h + 1 - j))


def hit_prob_there(j, i, h):
    """Up-leg from ``j``: probability of hitting ``i`` before ``h``."""
    if not 1 <= i <= j <= h:
        raise ValueError(f"need 1 <= i <= j <= h, got i={i}, j={j}, h={h}")
    if i == j:
        return Fraction(1)
    return Fraction((h - j) * i, (h - i) * j)


def hit_prob_back(i, j, h):
    """Return leg from ``i``: probability of hitting ``j`` before 0."""
    if not 0 <= i <= j <= h:
        raise ValueError(f"need 0 <= i <= j <= h, got i={i}, j={j}, h={h}")
    if i == j:
        return Fraction(1)
    return Fraction((h + 1 - j) * i, (h + 1 - i) * j)


def simulate_hits(kind, h, start, target, other, runs, rng):
    """Monte Carlo count of chain runs hitting ``target`` before ``other``."""
    code = 0 if kind == "there" else 1
    n = max(64, runs * 8)
    u = rng.random(n)
    while True:
        hits, used = _kernels.chain_hits(code, h, start, target, other, runs, u)
        if used >= 0:
            return int(hits)
        u = np.concatenate((u, rng.random(u.size)))


# ---- sampling --------------------------------------------------------------

def sample_paths(h, count, rng):
    """``count`` conditioned up-excursion paths of height ``h`` (relative values)."""
    if h < 1:
        raise ValueError("h must be >= 1")
    if count == 0:
        return []
    nu = max(64, int(count * (2.0 * h * h + 8)))
    u = rng.random(nu)
    cap = max(64, int(count * (2.5 * h * h + 8)))
    while True:
        paths, offs, used = _kernels.excursions_batch(h, count, u, cap)
        if used >= 0:
            return [paths[offs[c]:offs[c + 1]].copy() for c in range(count)]
        u = np.concatenate((u, rng.random(u.size)))
        cap *= 2


def sample_excursion(h, direction=UP, rng=None, offset=0, base=0):
    """One excursion of height exactly ``h``.

    Parameters
    ----------
    h : int
    direction : {"up", "down"}
        Down-excursions are negated up-excursions.
    rng : numpy.random.Generator
    offset, base : int
        Placement of the returned segment.
    """
    if rng is None:
        rng = np.random.default_rng()
    return sample_excursions(h, 1, rng, direction, offset, base)[0]


def sample_excursions(h, count, rng, direction=UP, offset=0, base=0):
    """List of ``count`` independent excursions of height ``h``."""
    sign = 1 if direction == UP else -1
    if direction not in (UP, DOWN):
        raise ValueError("direction must be 'up' or 'down'")
    return [Excursion(direction, offset, base, sign * p + base)
            for p in sample_paths(h, count, rng)]


def sample_pair(h, rng, direction=UP):
    """A compatible pair of independent height-``h`` excursions.

    The column marginal starts at index 0 with base 0 and the row marginal
    at base ``-h`` (up) or ``1 - h`` (down) so that the parity rule holds.
    The row marginal starts at index 0 or 1, whichever has the parity of
    its base, as walk values always share the parity of their index; this
    keeps the pair's geometry consistent with the face colouring.
    """
    e1, e2 = sample_excursions(h, 2, rng, direction)
    b2 = -h if direction == UP else 1 - h
    return CompatiblePair(e1, e2.shifted(offset=b2 % 2, base=b2))


# ---- sub-excursion statistics ----------------------------------------------

def subexcursions(path, i, j):
    """Index pairs ``(s, e)`` of the up-excursions with base ``i`` and top ``j``.

    ``path`` holds relative values of an up-excursion.
    """
    path = np.asarray(path, dtype=np.int64)
    out = []
    for a, c, _ in _matched_pairs(path, 1):
        if path[a] == i and path[a + 1:c].max() == j:
            out.append((a, c))
    out.sort()
    return out


def down_subexcursions(path, i, j):
    """Index pairs ``(s, e)`` of the down-excursions with base ``j`` and bottom ``i``."""
    path = np.asarray(path, dtype=np.int64)
    out = []
    for a, c, _ in _matched_pairs(path, -1):
        if path[a] == j and path[a + 1:c].min() == i:
            out.append((a, c))
    out.sort()
    return out


@dataclass
class SubexcursionReport:
    h: int
    i: int
    j: int
    q: int
    n_extracted: int
    n_direct: int
    length_pvalue: float
    maxpos_pvalue: float
    alpha: float
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def _two_sample_pvalue(a, b, min_expected=5):
    # chi-square homogeneity test on pooled categories; tail merged so every
    # expected count is at least ``min_expected``
    a = np.asarray(a)
    b = np.asarray(b)
    vals = np.union1d(a, b)
    if vals.size == 1:
        return 1.0
    ca = np.array([np.sum(a == v) for v in vals], dtype=float)
    cb = np.array([np.sum(b == v) for v in vals], dtype=float)
    tot = ca + cb
    frac = a.size / (a.size + b.size)
    rows_a, rows_b = [], []
    acc_a = acc_b = 0.0
    for x, y, t in zip(ca, cb, tot):
        acc_a += x
        acc_b += y
        if (acc_a + acc_b) * min(frac, 1 - frac) >= min_expected:
            rows_a.append(acc_a)
            rows_b.append(acc_b)
            acc_a = acc_b = 0.0
    if acc_a + acc_b > 0:
        if rows_a:
            rows_a[-1] += acc_a
            rows_b[-1] += acc_b
        else:
            rows_a.append(acc_a)
            rows_b.append(acc_b)
    if len(rows_a) < 2:
        return 1.0
    table = np.array([rows_a, rows_b])
    return float(stats.chi2_contingency(table)[1])


def subexcursion_distribution_check(h, i, j, q, samples, seed=0, alpha=0.01, min_count=50):
    """Compare q-th sub-excursions of type ``i -> j -> i`` with direct samples.

    Draws ``samples`` excursions of height ``h``, extracts from each the
    ``q``-th up-excursion with base ``i`` and top exactly ``j`` (when it
    exists), and compares its length law and the position of its first
    maximum with ``samples`` direct draws of height ``j - i`` using
    chi-square homogeneity tests.  The check passes when both p-values
    exceed ``alpha / 2``.

    Raises
    ------
    InsufficientData
        Fewer than ``min_count`` samples contain a ``q``-th sub-excursion.
    """
    from .rng import stream

    if not 0 <= i < j <= h:
        raise ValueError("need 0 <= i < j <= h")
    rng = stream(seed, "subexcursion", h, i, j, q)
    ext_len, ext_pos = [], []
    for p in sample_paths(h, samples, rng):
        subs = subexcursions(p, i, j)
        if len(subs) >= q:
            s, e = subs[q - 1]
            seg = p[s:e + 1]
            ext_len.append(e - s)
            ext_pos.append(int(np.argmax(seg)))
    if len(ext_len) < min_count:
        raise InsufficientData(f"only {len(ext_len)} samples contain a sub-excursion number {q}")
    direct = sample_paths(j - i, samples, stream(seed, "subexcursion-direct", h, i, j, q))
    d_len = [len(p) - 1 for p in direct]
    d_pos = [int(np.argmax(p)) for p in direct]
    p_len = _two_sample_pvalue(ext_len, d_len)
    p_pos = _two_sample_pvalue(ext_pos, d_pos)
    ok = p_len > alpha / 2 and p_pos > alpha / 2
    return SubexcursionReport(h, i, j, q, len(ext_len), len(d_len), p_len, p_pos, alpha, ok)
