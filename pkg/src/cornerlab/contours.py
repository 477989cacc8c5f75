"""Contour cycles: tracing, rectangles, marginals, classification and census.

Every connected component of the configuration is a cycle that turns at
each vertex.  A cycle's smallest enclosing rectangle ``[a+1, c] x [b+1, d]``
(vertex coordinates) determines the marginal walk segments ``X[a, c]`` and
``Y[b, d]``, which form a compatible pair of excursions.
"""

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .errors import (BijectionViolation, BudgetExceeded, CorruptConfiguration,
                     WindowEscape)
from .excursions import UP, DOWN, CompatiblePair, excursion_direction, Excursion, is_compatible
from .lattice import WindowSpec, height, make_window

DEFAULT_MAX_STEPS = 1 << 40


@dataclass(frozen=True)
class Rect:
    """Enclosing rectangle; the cycle's vertices span ``[a+1, c] x [b+1, d]``."""

    a: int
    c: int
    b: int
    d: int

    @property
    def width(self):
        return self.c - self.a - 1

    @property
    def height(self):
        return self.d - self.b - 1

    def contains_vertex(self, v):
        return self.a + 1 <= v[0] <= self.c and self.b + 1 <= v[1] <= self.d

    def contains_rect(self, other, strict=False):
        inside = self.a <= other.a and other.c <= self.c and self.b <= other.b and other.d <= self.d
        if strict:
            return inside and self != other
        return inside

    def as_list(self):
        return [self.a, self.c, self.b, self.d]


def canonical_vertices(verts):
    """Counterclockwise order starting from the lexicographically smallest vertex."""
    v = np.asarray(verts, dtype=np.int64)
    x, y = v[:, 0], v[:, 1]
    area2 = np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    if area2 < 0:
        v = v[::-1]
    k = int(np.lexsort((v[:, 1], v[:, 0]))[0])
    return np.roll(v, -k, axis=0)


def _edge_key(p, q):
    return (p, q) if p <= q else (q, p)


class Cycle:
    """A closed contour.

    Parameters
    ----------
    vertices : array_like, shape (L, 2)
        Closed vertex sequence (last vertex adjacent to the first, not
        repeated).  Stored in canonical order.
    level : int, optional
        Height of the black faces along the contour, when known.
    seed : int, optional
        Seed of the configuration the cycle came from, for serialization.
    """

    def __init__(self, vertices, level=None, seed=None):
        self.vertices = canonical_vertices(vertices)
        self.level = level
        self.seed = seed
        v = self.vertices
        step = np.abs(np.diff(np.vstack((v, v[:1])), axis=0)).sum(axis=1)
        if len(v) < 4 or len(v) % 2 or np.any(step != 1):
            raise CorruptConfiguration("vertex list is not a closed lattice cycle")

    def __repr__(self):
        return (f"Cycle(length={self.length}, rect={self.rect.as_list()}, "
                f"direction={self.direction!r}, level={self.level})")

    def __eq__(self, other):
        if not isinstance(other, Cycle):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash(self.vertices.tobytes())

    @property
    def length(self):
        return len(self.vertices)

    @cached_property
    def rect(self):
        v = self.vertices
        return Rect(int(v[:, 0].min()) - 1, int(v[:, 0].max()),
                    int(v[:, 1].min()) - 1, int(v[:, 1].max()))

    @property
    def diameter(self):
        r = self.rect
        return max(r.width, r.height)

    def edges(self):
        """Frozen set of edges ``((x1, y1), (x2, y2))`` with sorted endpoints."""
        v = [tuple(int(t) for t in p) for p in self.vertices]
        return frozenset(_edge_key(p, q) for p, q in zip(v, v[1:] + v[:1]))

    def vertical_edges(self):
        """``(x, y)`` for every cycle edge ``{(x, y), (x, y+1)}``."""
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        vert = v[:, 0] == w[:, 0]
        lo = np.minimum(v[:, 1], w[:, 1])
        return np.column_stack((v[vert, 0], lo[vert]))

    @cached_property
    def interior(self):
        """Boolean mask over rectangle faces ``(n, m)``, ``n = a+1..c-1``, ``m = b+1..d-1``.

        Computed by ray-casting parity: a face is inside when an odd number
        of cycle edges lie on its row to its left.
        """
        r = self.rect
        nx, ny = r.c - r.a - 1, r.d - r.b - 1
        cnt = np.zeros((nx, ny), dtype=np.int64)
        ve = self.vertical_edges()
        # a vertical edge at x crosses the face row m=y and lies left of faces
        # n >= x; edges on the right side x=c are left of no rectangle face
        ve = ve[ve[:, 0] < r.c]
        np.add.at(cnt, (ve[:, 0] - (r.a + 1), ve[:, 1] - (r.b + 1)), 1)
        return (np.cumsum(cnt, axis=0) % 2) == 1

    @property
    def direction(self):
        """``"up"`` when the faces just outside the contour are black.

        The leftmost column of vertical cycle edges has its outside face in
        column ``a``; the colour of that face decides.
        """
        return self.direction_for_coloring(0)

    def direction_for_coloring(self, coloring=0):
        ve = self.vertical_edges()
        x = ve[:, 0].min()
        y = ve[ve[:, 0] == x, 1][0]
        black_outside = (x - 1 + y + coloring) % 2 == 0
        return UP if black_outside else DOWN

    @cached_property
    def passages(self):
        """Full rectangle columns and rows lying inside the cycle.

        Returns a list of ``("col", n)`` and ``("row", m)`` tuples; ``n`` and
        ``m`` are face indices.
        """
        r = self.rect
        inside = self.interior
        cols = [("col", int(r.a + 1 + i)) for i in np.flatnonzero(inside.all(axis=1))]
        rows = [("row", int(r.b + 1 + j)) for j in np.flatnonzero(inside.all(axis=0))]
        return cols + rows

    def touches_all_sides(self):
        r = self.rect
        v = self.vertices
        return bool(np.any(v[:, 0] == r.a + 1) and np.any(v[:, 0] == r.c)
                    and np.any(v[:, 1] == r.b + 1) and np.any(v[:, 1] == r.d))

    def to_dict(self, include_vertices=False):
        d = {"seed": self.seed, "rect": self.rect.as_list(), "direction": self.direction,
             "level": self.level, "length": self.length, "diameter": self.diameter,
             "passages": [[k, int(i)] for k, i in self.passages]}
        if include_vertices:
            d["vertices"] = self.vertices.tolist()
        return d

    def to_json(self, include_vertices=False):
        return json.dumps(self.to_dict(include_vertices), sort_keys=True)


def cycle_from_edges(edges, level=None):
    """Order an edge set forming one simple cycle into a :class:`Cycle`."""
    adj = {}
    for p, q in edges:
        adj.setdefault(p, []).append(q)
        adj.setdefault(q, []).append(p)
    if any(len(n) != 2 for n in adj.values()):
        raise CorruptConfiguration("edge set is not 2-regular")
    start = min(adj)
    order = [start]
    prev, cur = start, adj[start][0]
    while cur != start:
        order.append(cur)
        a, b = adj[cur]
        prev, cur = cur, (b if a == prev else a)
    if len(order) != len(adj):
        raise CorruptConfiguration("edge set has more than one component")
    return Cycle(order, level=level)


# ---- tracing -------------------------------------------------------------

def _kernel_args(window):
    x0, x1 = window.x_range
    y0, y1 = window.y_range
    return (window.xi.values, window.xi.lo, window.eta.values, window.eta.lo, x0, x1, y0, y1)


def trace_cycle(window, start, max_steps=DEFAULT_MAX_STEPS):
    """Trace the component of ``start`` inside the window.

    Returns
    -------
    Cycle
        With ``level`` filled in from the window heights.

    Raises
    ------
    WindowEscape
        The component leaves the window before closing.
    """
    if not window.contains_vertex(start):
        raise WindowEscape(f"start {start} outside window")
    st, length, xmin, xmax, ymin, ymax, verts = _kernels.trace(
        *_kernel_args(window), int(start[0]), int(start[1]), True, max_steps)
    if st != _kernels.CLOSED:
        raise WindowEscape("component leaves the window", length, (xmin, xmax, ymin, ymax))
    cyc = Cycle(verts, seed=window.spec.seed if window.spec else None)
    cyc.level = _level_from_heights(window, cyc)
    return cyc


def _level_from_heights(window, cycle):
    ve = cycle.vertical_edges()
    x = int(ve[:, 0].min())
    y = int(ve[ve[:, 0] == x, 1][0])
    # faces on the two sides of the edge {(x, y), (x, y+1)}
    left, right = (x - 1, y), (x, y)
    black = left if (left[0] + left[1]) % 2 == 0 else right
    return height(window, black)


def classify(window, cycle, coloring=0):
    """Direction and level of a traced cycle.

    Parameters
    ----------
    coloring : int
        0 for the standard chessboard colouring, 1 for the swapped one.

    Returns
    -------
    dict
        ``{"direction": ..., "level": ...}``; the level is the common height
        of the black faces along the contour.
    """
    return {"direction": cycle.direction_for_coloring(coloring),
            "level": _level_from_heights(window, cycle)}


def passages(window, cycle):
    """Rows and columns of the rectangle interior lying inside ``cycle``."""
    return cycle.passages


def marginals(window, cycle):
    """The excursions ``X[a, c]`` and ``Y[b, d]`` of a traced cycle.

    Raises
    ------
    BijectionViolation
        If either segment is not an excursion or the two are not a
        compatible pair of the cycle's direction.
    """
    r = cycle.rect
    xs = window.X.segment(r.a, r.c)
    ys = window.Y.segment(r.b, r.d)
    dx, dy = excursion_direction(xs), excursion_direction(ys)
    if dx is None or dy is None:
        raise BijectionViolation(f"marginals of {cycle!r} are not excursions")
    e1 = Excursion(dx, r.a, int(xs[0]), xs.copy())
    e2 = Excursion(dy, r.b, int(ys[0]), ys.copy())
    if not is_compatible(e1, e2) or dx != cycle.direction:
        raise BijectionViolation(f"marginals of {cycle!r} are not a compatible {cycle.direction} pair")
    return e1, e2


def pair_of(window, cycle):
    """:class:`CompatiblePair` of a traced cycle's marginals."""
    return CompatiblePair(*marginals(window, cycle))


# ---- cycle of the origin -----------------------------------------------------

@dataclass
class OriginTrace:
    """Outcome of an adaptive search for the component of the origin.

    ``closed`` is False when the window budget was exhausted; then the
    bounding box and length describe the part walked inside the last window
    and ``height_lower`` bounds the marginal height from below.
    """

    closed: bool
    length: int
    bbox: tuple
    window_size: int
    height: int | None
    height_lower: int

    @property
    def diameter(self):
        xmin, xmax, ymin, ymax = self.bbox
        return max(xmax - xmin, ymax - ymin)


def _range_of(walk, lo, hi):
    seg = walk.segment(lo, hi)
    return int(seg.max() - seg.min())


def trace_origin(spec, start_size=32, max_window=1 << 14, stop_height=None, stop_diameter=None):
    """Trace the origin's component with a doubling window.

    Parameters
    ----------
    spec : WindowSpec
        Seed, biases and sign mode; the ranges are ignored.
    start_size, max_window : int
        First and largest window side (vertices).
    stop_height : int, optional
        Stop early once the marginal height is known to exceed this value.
    stop_diameter : int, optional
        Stop early once the diameter is known to exceed this value.

    Returns
    -------
    OriginTrace
    """
    size = start_size
    while True:
        w = make_window(WindowSpec(spec.seed, *_centered_ranges(size), spec.bias_xi,
                                   spec.bias_eta, spec.mode))
        st, length, xmin, xmax, ymin, ymax, _ = _kernels.trace(
            *_kernel_args(w), 0, 0, False, DEFAULT_MAX_STEPS)
        if st == _kernels.CLOSED:
            hx = _range_of(w.X, xmin - 1, xmax)
            return OriginTrace(True, int(length), (xmin, xmax, ymin, ymax), size, hx, hx)
        lower = max(_range_of(w.X, xmin - 1, xmax), _range_of(w.Y, ymin - 1, ymax))
        known_diam = max(xmax - xmin, ymax - ymin)
        if (stop_height is not None and lower > stop_height) or \
                (stop_diameter is not None and known_diam > stop_diameter):
            return OriginTrace(False, int(length), (xmin, xmax, ymin, ymax), size, None, lower)
        if size >= max_window:
            return OriginTrace(False, int(length), (xmin, xmax, ymin, ymax), size, None, lower)
        size = min(size * 2, max_window)


def _centered_ranges(size):
    lo = -(size // 2)
    return (lo, lo + size - 1), (lo, lo + size - 1)


def cycle_of_origin(window_spec, start_size=32, max_window=1 << 14):
    """The cycle through the origin, found by doubling the window.

    Raises
    ------
    BudgetExceeded
        The component is still open at ``max_window``.
    """
    res = trace_origin(window_spec, start_size, max_window)
    if not res.closed:
        raise BudgetExceeded(f"origin component still open at window {max_window}",
                             max_window, res)
    w = make_window(WindowSpec(window_spec.seed, *_centered_ranges(res.window_size),
                               window_spec.bias_xi, window_spec.bias_eta, window_spec.mode))
    return trace_cycle(w, (0, 0))


# ---- level-set census --------------------------------------------------------

def closed_components(window):
    """Label every window vertex by component and flag the closed ones.

    Returns
    -------
    labels : ndarray, shape (nx, ny)
    closed : ndarray of bool, indexed by label
    """
    nx, ny = window.shape
    idx = np.arange(nx * ny).reshape(nx, ny)
    V = window.vertical_edges()
    E = window.horizontal_edges()
    rows = np.concatenate((idx[:, :-1][V], idx[:-1, :][E]))
    cols = np.concatenate((idx[:, 1:][V], idx[1:, :][E]))
    g = coo_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(nx * ny, nx * ny))
    ncomp, labels = connected_components(g, directed=False)
    deg = np.zeros((nx, ny), dtype=np.int64)
    deg[:, :-1] += V
    deg[:, 1:] += V
    deg[:-1, :] += E
    deg[1:, :] += E
    if np.any(deg > 2):
        raise CorruptConfiguration("vertex of degree > 2")
    open_lab = np.unique(labels[(deg < 2).ravel()])
    closed = np.ones(ncomp, dtype=bool)
    closed[open_lab] = False
    return labels.reshape(nx, ny), closed


def all_cycles(window):
    """Every closed cycle inside the window, with levels."""
    labels, closed = closed_components(window)
    x0, y0 = window.x_range[0], window.y_range[0]
    flat = labels.ravel()
    first = np.full(closed.size, -1, dtype=np.int64)
    # first vertex (in raster order) of each component
    order = np.arange(flat.size)[::-1]
    first[flat[order]] = order
    ny = window.shape[1]
    cycles = []
    for lab in np.flatnonzero(closed):
        k = int(first[lab])
        cycles.append(trace_cycle(window, (x0 + k // ny, y0 + k % ny)))
    return cycles


@dataclass
class Census:
    level: int | None
    cycles: list
    total_length: int
    nesting_forest: dict
    violations: int

    def to_dict(self):
        return {"level": self.level, "n_cycles": len(self.cycles), "total_length": self.total_length,
                "violations": self.violations,
                "nesting_forest": {str(k): v for k, v in self.nesting_forest.items()}}


def _interval_relation(a, c, a2, c2):
    # "disjoint" allows a shared endpoint; "in"/"out" is containment
    if c <= a2 or c2 <= a:
        return "disjoint"
    if a2 <= a and c <= c2:
        return "in"
    if a <= a2 and c2 <= c:
        return "out"
    return "cross"


def trichotomy_holds(r1, r2):
    """Whether two same-level rectangles satisfy the nesting trichotomy.

    Either one pair of marginal intervals is disjoint, or the first
    rectangle is strictly inside the second in both coordinates, or the
    other way round.
    """
    rx = _interval_relation(r1.a, r1.c, r2.a, r2.c)
    ry = _interval_relation(r1.b, r1.d, r2.b, r2.d)
    if rx == "disjoint" or ry == "disjoint":
        return True
    if rx == ry == "in":
        return r1.a > r2.a and r1.c < r2.c and r1.b > r2.b and r1.d < r2.d
    if rx == ry == "out":
        return r2.a > r1.a and r2.c < r1.c and r2.b > r1.b and r2.d < r1.d
    return False


def _inside_polygon(cycle, point):
    # ray casting to the left along the row through face containing point+(1/2,1/2)
    n, m = point
    ve = cycle.vertical_edges()
    return int(np.sum((ve[:, 1] == m) & (ve[:, 0] <= n))) % 2 == 1


def check_level_cycles(cycles, labels=None, window=None):
    """Count trichotomy and rectangle-intersection violations among same-level cycles.

    Returns ``(violations, forest)`` where ``forest`` maps each cycle index to
    the index of its smallest enclosing same-level cycle (or None).
    """
    violations = 0
    n = len(cycles)
    rects = [c.rect for c in cycles]
    forest = {}
    for i in range(n):
        for j in range(i + 1, n):
            if not trichotomy_holds(rects[i], rects[j]):
                violations += 1
    if labels is not None and window is not None:
        x0, y0 = window.x_range[0], window.y_range[0]
        lab_of = {}
        for k, c in enumerate(cycles):
            v = c.vertices[0]
            lab_of[int(labels[v[0] - x0, v[1] - y0])] = k
        for j, r in enumerate(rects):
            sub = labels[r.a + 1 - x0:r.c + 1 - x0, r.b + 1 - y0:r.d + 1 - y0]
            for lab in np.unique(sub):
                k = lab_of.get(int(lab))
                if k is None or k == j:
                    continue
                if not rects[j].contains_rect(rects[k], strict=True):
                    violations += 1
    for j, c in enumerate(cycles):
        best, best_area = None, None
        for i, r in enumerate(rects):
            if i != j and r.contains_rect(rects[j], strict=True):
                area = (r.c - r.a) * (r.d - r.b)
                if (best_area is None or area < best_area) and \
                        _inside_polygon(cycles[i], tuple(c.vertices[0])):
                    best, best_area = i, area
        forest[j] = best
    return violations, forest


def level_set_census(window, level=None, cycles=None):
    """All closed cycles of one level with their structural checks.

    Parameters
    ----------
    level : int or None
        Height of the black faces; None checks every level separately and
        returns all cycles.
    cycles : list of Cycle, optional
        Pre-traced cycles of the window (saves re-tracing).

    Returns
    -------
    Census
        ``violations`` counts trichotomy failures and cycles meeting the
        rectangle of a same-level cycle they are not nested in.
    """
    if cycles is None:
        cycles = all_cycles(window)
    labels, _ = closed_components(window)
    levels = sorted({c.level for c in cycles}) if level is None else [level]
    chosen, forest, viol = [], {}, 0
    for lev in levels:
        cs = [c for c in cycles if c.level == lev]
        v, f = check_level_cycles(cs, labels, window)
        base = len(chosen)
        for k, p in f.items():
            forest[base + k] = None if p is None else base + p
        chosen.extend(cs)
        viol += v
    return Census(level, chosen, int(sum(c.length for c in chosen)), forest, viol)


def level0_edge_count(window, level=0):
    """Number of contour edges of the given level inside the window.

    An edge is on a level-``L`` contour iff it separates faces with
    ``X_n + Y_m`` equal to ``2L`` and ``2L + 1``.
    """
    from .lattice import tilde_height_map

    S = tilde_height_map(window)
    lo, hi = 2 * level, 2 * level + 1
    a = (S == lo)
    b = (S == hi)
    # vertical edges between horizontally adjacent faces; window faces cover
    # the ring just outside the vertex window, so edges on the boundary lines count
    hx = (a[:-1, :] & b[1:, :]) | (b[:-1, :] & a[1:, :])
    vy = (a[:, :-1] & b[:, 1:]) | (b[:, :-1] & a[:, 1:])
    # drop edges whose endpoints leave the window: a vertical edge between face
    # columns i, i+1 runs along face row m, i.e. from y=m to m+1; rows 0 and -1
    # of the face grid are outside the vertex window
    return int(hx[:, 1:-1].sum() + vy[1:-1, :].sum())
