"""Sign sequences, their walks, the corner edge rule and the height function.

Conventions
-----------
Vertices are integer pairs ``(x, y)``.  A face is stored as the integer pair
``(n, m)`` of its lower-left corner, so face ``(n, m)`` is the unit square
centred at ``(n + 1/2, m + 1/2)``; it is black when ``n + m`` is even.

The vertical edge ``{(n, m), (n, m + 1)}`` is present iff
``xi(n) * (-1)**m == +1`` and the horizontal edge ``{(n, m), (n + 1, m)}`` is
present iff ``eta(m) * (-1)**n == +1``.  Every vertex therefore has exactly
one vertical and one horizontal incident edge.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRange
from .rng import block_uniforms

SIGN_MODES = ("signs", "steps")


@dataclass(frozen=True, eq=False)
class SignSequence:
    """A window ``lo..hi`` of +/-1 symbols for one axis.

    Attributes
    ----------
    axis : str
        ``"xi"`` (columns) or ``"eta"`` (rows).
    lo, hi : int
        Inclusive index range.
    values : ndarray of int8
        ``values[n - lo]`` is the symbol at index ``n``.
    bias : float
        Probability of ``+1`` (of the sign, or of the walk step when
        ``mode == "steps"``).
    seed : int or None
        Master seed; None for hand-built sequences.
    mode : str
        ``"signs"`` draws i.i.d. signs, ``"steps"`` draws i.i.d. walk steps
        and converts them to signs.
    """

    axis: str
    lo: int
    hi: int
    values: np.ndarray = field(repr=False)
    bias: float = 0.5
    seed: int | None = None
    mode: str = "signs"

    def __len__(self):
        return self.hi - self.lo + 1

    def __getitem__(self, n):
        if not self.lo <= n <= self.hi:
            raise OutOfRange(f"index {n} outside [{self.lo}, {self.hi}]")
        return int(self.values[n - self.lo])

    def __eq__(self, other):
        if not isinstance(other, SignSequence):
            return NotImplemented
        return (self.axis, self.lo, self.hi) == (other.axis, other.lo, other.hi) and \
            np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.axis, self.lo, self.hi, self.values.tobytes()))


@dataclass(frozen=True, eq=False)
class Walk:
    """Integer path ``values[n - lo] = X_n`` with ``X_0 = 0``."""

    lo: int
    hi: int
    values: np.ndarray = field(repr=False)

    def __len__(self):
        return self.hi - self.lo + 1

    def __getitem__(self, n):
        if not self.lo <= n <= self.hi:
            raise OutOfRange(f"index {n} outside [{self.lo}, {self.hi}]")
        return int(self.values[n - self.lo])

    def segment(self, a, c):
        """Values ``X_a..X_c`` as an int64 array."""
        if not (self.lo <= a <= c <= self.hi):
            raise OutOfRange(f"segment [{a}, {c}] outside [{self.lo}, {self.hi}]")
        return self.values[a - self.lo:c - self.lo + 1]


def _alternating(lo, hi):
    # (-1)**(n+1) for n in lo..hi
    n = np.arange(lo, hi + 1)
    return np.where(n % 2 == 1, 1, -1).astype(np.int8)


def gen_signs(axis, range, bias=0.5, seed=0, mode="signs"):
    """Generate a deterministic sign window.

    Parameters
    ----------
    axis : {"xi", "eta"}
    range : tuple of int
        Inclusive ``(lo, hi)``.
    bias : float
        Probability of ``+1``; 0 and 1 give constant sequences.
    seed : int
    mode : {"signs", "steps"}
        With ``"steps"`` the walk increments are i.i.d. with
        ``P(+1) = bias`` and the signs are recovered from them.

    Returns
    -------
    SignSequence
    """
    lo, hi = int(range[0]), int(range[1])
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    if not 0.0 <= bias <= 1.0:
        raise ValueError(f"bias must lie in [0, 1], got {bias}")
    if mode not in SIGN_MODES:
        raise ValueError(f"mode must be one of {SIGN_MODES}")
    u = block_uniforms(seed, axis, lo, hi)
    vals = np.where(u < bias, 1, -1).astype(np.int8)
    if mode == "steps":
        vals = vals * _alternating(lo, hi)
    return SignSequence(axis, lo, hi, vals, float(bias), seed, mode)


def signs_from_values(axis, lo, values):
    """Wrap explicit +/-1 values starting at index ``lo``."""
    vals = np.asarray(values, dtype=np.int8)
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("values must be a nonempty 1-d sequence")
    if not np.all(np.abs(vals) == 1):
        raise ValueError("values must be +1 or -1")
    return SignSequence(axis, int(lo), int(lo) + vals.size - 1, vals, 0.5, None)


def walk_from_signs(signs):
    """Walk with steps ``X_n - X_{n-1} = (-1)**(n+1) * sign(n)`` and ``X_0 = 0``.

    Parameters
    ----------
    signs : SignSequence
        Must cover an index range containing 0.

    Returns
    -------
    Walk
        Covers ``signs.lo - 1 .. signs.hi``: the step at index ``lo`` also
        fixes ``X_{lo-1}``.  For negative indices this is the mirrored sum
        ``X_{-n} = -(step(-n+1) + ... + step(0))``.
    """
    lo, hi = signs.lo, signs.hi
    if not lo <= 0 <= hi:
        raise ValueError(f"sign range [{lo}, {hi}] must contain 0")
    steps = signs.values.astype(np.int64) * _alternating(lo, hi)
    # X_n for n in lo-1..hi, then shift so that X_0 = 0; X_{lo-1} uses step(lo)
    cum = np.concatenate(([0], np.cumsum(steps)))
    cum -= cum[0 - (lo - 1)]
    return Walk(lo - 1, hi, cum)


@dataclass(frozen=True)
class WindowSpec:
    """Serializable recipe for a window: seed, biases and vertex ranges."""

    seed: int
    x_range: tuple
    y_range: tuple
    bias_xi: float = 0.5
    bias_eta: float = 0.5
    mode: str = "signs"

    def to_json(self):
        return json.dumps({
            "seed": self.seed, "bias_xi": self.bias_xi, "bias_eta": self.bias_eta,
            "x_range": list(self.x_range), "y_range": list(self.y_range),
            "mode": self.mode,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text) if isinstance(text, str) else dict(text)
        return cls(int(d["seed"]), tuple(d["x_range"]), tuple(d["y_range"]),
                   float(d.get("bias_xi", 0.5)), float(d.get("bias_eta", 0.5)),
                   d.get("mode", "signs"))

    @classmethod
    def centered(cls, seed, size, bias=0.5, mode="signs"):
        """``size`` x ``size`` vertex window containing the origin near its centre."""
        lo = -(size // 2)
        rng_ = (lo, lo + size - 1)
        return cls(seed, rng_, rng_, bias, bias, mode)

    def build(self):
        return make_window(self)


class LatticeWindow:
    """Signs, walks and vertex rectangle of one finite window.

    Signs are stored on ``[min(x0 - 1, 0), max(x1, 0)]`` (and likewise for
    rows) so that the walk values of every face touching the window are
    known, including the ring of faces just outside it.
    """

    def __init__(self, xi, eta, x_range, y_range, spec=None):
        self.xi = xi
        self.eta = eta
        self.X = walk_from_signs(xi)
        self.Y = walk_from_signs(eta)
        self.x_range = (int(x_range[0]), int(x_range[1]))
        self.y_range = (int(y_range[0]), int(y_range[1]))
        self.spec = spec
        x0, x1 = self.x_range
        y0, y1 = self.y_range
        if x1 < x0 or y1 < y0:
            raise ValueError("empty window")
        if xi.lo > x0 - 1 or xi.hi < x1 or eta.lo > y0 - 1 or eta.hi < y1:
            raise ValueError("sign sequences do not cover the window")

    def __repr__(self):
        return f"LatticeWindow(x_range={self.x_range}, y_range={self.y_range})"

    @property
    def shape(self):
        return (self.x_range[1] - self.x_range[0] + 1, self.y_range[1] - self.y_range[0] + 1)

    @property
    def face_x_range(self):
        return (self.x_range[0] - 1, self.x_range[1])

    @property
    def face_y_range(self):
        return (self.y_range[0] - 1, self.y_range[1])

    def contains_vertex(self, v):
        x, y = v
        return self.x_range[0] <= x <= self.x_range[1] and self.y_range[0] <= y <= self.y_range[1]

    def contains_face(self, f):
        n, m = f
        fx, fy = self.face_x_range, self.face_y_range
        return fx[0] <= n <= fx[1] and fy[0] <= m <= fy[1]

    # ---- vectorized views -------------------------------------------------
    def xi_slice(self, lo, hi):
        return self.xi.values[lo - self.xi.lo:hi - self.xi.lo + 1]

    def eta_slice(self, lo, hi):
        return self.eta.values[lo - self.eta.lo:hi - self.eta.lo + 1]

    def vertical_edges(self):
        """Boolean array ``V[i, j]``: edge ``{(x0+i, y0+j), (x0+i, y0+j+1)}`` present."""
        x0, x1 = self.x_range
        y0, y1 = self.y_range
        xi = self.xi_slice(x0, x1).astype(np.int64)
        par = np.where(np.arange(y0, y1) % 2 == 0, 1, -1)
        return (xi[:, None] * par[None, :]) == 1

    def horizontal_edges(self):
        """Boolean array ``E[i, j]``: edge ``{(x0+i, y0+j), (x0+i+1, y0+j)}`` present."""
        x0, x1 = self.x_range
        y0, y1 = self.y_range
        eta = self.eta_slice(y0, y1).astype(np.int64)
        par = np.where(np.arange(x0, x1) % 2 == 0, 1, -1)
        return (par[:, None] * eta[None, :]) == 1


def make_window(spec):
    """Build a :class:`LatticeWindow` from a :class:`WindowSpec`."""
    x0, x1 = spec.x_range
    y0, y1 = spec.y_range
    xi = gen_signs("xi", (min(x0 - 1, 0), max(x1, 0)), spec.bias_xi, spec.seed, spec.mode)
    eta = gen_signs("eta", (min(y0 - 1, 0), max(y1, 0)), spec.bias_eta, spec.seed, spec.mode)
    return LatticeWindow(xi, eta, spec.x_range, spec.y_range, spec)


def window_from_signs(xi_values, eta_values, x_range, y_range, xi_lo=None, eta_lo=None):
    """Window built from explicit sign arrays.

    ``xi_values[k]`` is the sign at index ``xi_lo + k``; by default the arrays
    are assumed to start at ``min(x0 - 1, 0)`` (resp. ``min(y0 - 1, 0)``).
    """
    if xi_lo is None:
        xi_lo = min(x_range[0] - 1, 0)
    if eta_lo is None:
        eta_lo = min(y_range[0] - 1, 0)
    xi = signs_from_values("xi", xi_lo, xi_values)
    eta = signs_from_values("eta", eta_lo, eta_values)
    return LatticeWindow(xi, eta, x_range, y_range)


def constant_window(x_range, y_range, xi_sign=1, eta_sign=1):
    """Window whose signs are all ``xi_sign`` / ``eta_sign``."""
    xlo, xhi = min(x_range[0] - 1, 0), max(x_range[1], 0)
    ylo, yhi = min(y_range[0] - 1, 0), max(y_range[1], 0)
    return window_from_signs(np.full(xhi - xlo + 1, xi_sign), np.full(yhi - ylo + 1, eta_sign),
                             x_range, y_range)


def _vertical_present(window, n, m):
    return window.xi[n] * (1 if m % 2 == 0 else -1) == 1


def _horizontal_present(window, n, m):
    return window.eta[m] * (1 if n % 2 == 0 else -1) == 1


def edge_present(window, edge):
    """Whether the unit edge ``((x1, y1), (x2, y2))`` belongs to the configuration.

    Raises
    ------
    OutOfRange
        If an endpoint lies outside the window.
    ValueError
        If the two points are not lattice neighbours.
    """
    (xa, ya), (xb, yb) = edge
    for v in edge:
        if not window.contains_vertex(v):
            raise OutOfRange(f"vertex {v} outside window")
    if xa == xb and abs(ya - yb) == 1:
        return _vertical_present(window, xa, min(ya, yb))
    if ya == yb and abs(xa - xb) == 1:
        return _horizontal_present(window, min(xa, xb), ya)
    raise ValueError(f"{edge} is not a unit lattice edge")


def neighbours(window, v):
    """The two configuration neighbours of ``v`` (vertical partner first).

    Partners are computed from the signs even when they fall outside the
    vertex window.
    """
    x, y = v
    vy = y + 1 if _vertical_present(window, x, y) else y - 1
    hx = x + 1 if _horizontal_present(window, x, y) else x - 1
    return (x, vy), (hx, y)


def degree(window, v):
    """Number of present window edges at ``v`` (2 for interior vertices)."""
    x, y = v
    d = 0
    for w in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
        if window.contains_vertex(w) and edge_present(window, (v, w)):
            d += 1
    return d


def face_color(face):
    """``"black"`` when ``n + m`` is even, else ``"white"``."""
    return "black" if (face[0] + face[1]) % 2 == 0 else "white"


def _check_face(window, face):
    if not window.contains_face(face):
        raise OutOfRange(f"face {face} outside window faces "
                         f"{window.face_x_range} x {window.face_y_range}")


def tilde_height(window, face):
    """``X_n + Y_m`` for face ``(n, m)``."""
    _check_face(window, face)
    n, m = face
    return window.X[n] + window.Y[m]


def height(window, face):
    """Height of a face, ``ceil((X_n + Y_m) / 2)``.

    Black faces (even ``X_n + Y_m``) sit at ``S / 2``; a white face with
    ``S = 2L + 1`` sits one above its black neighbour at ``S = 2L``.  This is
    the rounding that agrees with the crossing definition, see
    :func:`height_by_path`.
    """
    s = tilde_height(window, face)
    return (s + 1) // 2


def _crossing_delta(window, f, g):
    # Height change when stepping from face f to the adjacent face g.
    (n, m), (p, q) = f, g
    if q == m and abs(p - n) == 1:
        present = _vertical_present(window, max(n, p), m)
    elif p == n and abs(q - m) == 1:
        present = _horizontal_present(window, n, max(m, q))
    else:
        raise ValueError(f"faces {f} and {g} are not adjacent")
    if not present:
        return 0
    return 1 if (n + m) % 2 == 0 else -1


def monotone_path(face, order="hv"):
    """Faces of a monotone dual path from ``(0, 0)`` to ``face``.

    ``order="hv"`` moves horizontally first, ``"vh"`` vertically first.
    """
    n, m = face
    sx = 1 if n >= 0 else -1
    sy = 1 if m >= 0 else -1
    path = [(0, 0)]
    legs = [("x", n), ("y", m)] if order == "hv" else [("y", m), ("x", n)]
    for ax, target in legs:
        cx, cy = path[-1]
        if ax == "x":
            path.extend((x, cy) for x in range(cx + sx, target + sx, sx))
        else:
            path.extend((cx, y) for y in range(cy + sy, target + sy, sy))
    return path


def height_by_path(window, face, path="hv"):
    """Height obtained by accumulating contour crossings along a dual path.

    Starting from 0 at face ``(0, 0)``, crossing a present edge from its
    black face to its white face adds 1 and the reverse subtracts 1.

    Parameters
    ----------
    path : {"hv", "vh"} or sequence of faces
        A named monotone path or an explicit face sequence from ``(0, 0)``.
    """
    _check_face(window, face)
    if not window.contains_face((0, 0)):
        raise OutOfRange("face (0, 0) is not inside the window")
    faces = monotone_path(face, path) if isinstance(path, str) else list(path)
    if tuple(faces[0]) != (0, 0) or tuple(faces[-1]) != tuple(face):
        raise ValueError("path must run from (0, 0) to the target face")
    h = 0
    for f, g in zip(faces[:-1], faces[1:]):
        if not window.contains_face(g):
            raise OutOfRange(f"path leaves the window at {g}")
        h += _crossing_delta(window, tuple(f), tuple(g))
    return h


def tilde_height_map(window):
    """Array ``S[i, j] = X_n + Y_m`` over all window faces."""
    fx, fy = window.face_x_range, window.face_y_range
    X = window.X.segment(*fx)
    Y = window.Y.segment(*fy)
    return X[:, None] + Y[None, :]


def height_map(window):
    """Vectorized :func:`height` over all window faces."""
    return (tilde_height_map(window) + 1) // 2


def height_map_by_path(window):
    """Vectorized crossing-count heights over all window faces.

    Heights are accumulated along the face row through ``(0, 0)`` and then
    up and down every column, using only edge presence and face colours.
    """
    fx, fy = window.face_x_range, window.face_y_range
    if not window.contains_face((0, 0)):
        raise OutOfRange("face (0, 0) is not inside the window")
    ns = np.arange(fx[0], fx[1] + 1)
    ms = np.arange(fy[0], fy[1] + 1)
    # step (n, 0) -> (n + 1, 0) crosses the vertical edge at x = n + 1
    vpres = window.xi_slice(fx[0] + 1, fx[1]) == 1
    vsign = np.where(ns[:-1] % 2 == 0, 1, -1)
    dx = np.where(vpres, vsign, 0)
    row = np.concatenate(([0], np.cumsum(dx)))
    row -= row[0 - fx[0]]
    # step (n, m) -> (n, m + 1) crosses the horizontal edge at y = m + 1
    eta = window.eta_slice(fy[0] + 1, fy[1]).astype(np.int64)
    xpar = np.where(ns % 2 == 0, 1, -1)
    hpres = (xpar[:, None] * eta[None, :]) == 1
    color = np.where((ns[:, None] + ms[None, :-1]) % 2 == 0, 1, -1)
    dy = np.where(hpres, color, 0)
    col = np.concatenate((np.zeros((ns.size, 1), dtype=np.int64), np.cumsum(dy, axis=1)), axis=1)
    col -= col[:, [0 - fy[0]]]
    return row[:, None] + col
