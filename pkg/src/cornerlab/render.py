"""Deterministic SVG drawings and report serialization.

Drawings use lattice units scaled by ``scale`` pixels, with the y-axis
pointing up.  All numbers are written as integers and all collections are
emitted in sorted order, so identical input gives byte-identical output.
"""

import csv
import io
import json

import numpy as np

from . import __version__
from .contours import all_cycles, closed_components
from .errors import RenderRefused
from .lattice import height_map

SCHEMA_VERSION = 1
DEFAULT_BUDGET = 4_000_000
_MARGIN = 1


class _Canvas:
    def __init__(self, x_lo, x_hi, y_lo, y_hi, scale, budget):
        self.x_lo, self.y_hi = x_lo - _MARGIN, y_hi + _MARGIN
        self.s = int(scale)
        self.w = (x_hi - x_lo + 2 * _MARGIN) * self.s
        self.h = (y_hi - y_lo + 2 * _MARGIN) * self.s
        if budget is not None and self.w * self.h > budget:
            # largest scale that fits, possibly zero
            fit = int((budget / ((x_hi - x_lo + 2 * _MARGIN) * (y_hi - y_lo + 2 * _MARGIN))) ** 0.5)
            raise RenderRefused(
                f"drawing needs {self.w}x{self.h} = {self.w * self.h} pixels, budget {budget}; "
                f"use scale <= {fit} or a smaller window", self.w * self.h, budget)
        self.parts = []

    def px(self, x, y):
        return (x - self.x_lo) * self.s, (self.y_hi - y) * self.s

    def pts(self, verts):
        return " ".join("%d,%d" % self.px(int(x), int(y)) for x, y in verts)

    def add(self, text):
        self.parts.append(text)

    def document(self, title):
        head = ('<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                f'width="{self.w}" height="{self.h}" viewBox="0 0 {self.w} {self.h}">')
        return "\n".join([head, f"<title>{title}</title>"] + self.parts + ["</svg>"]) + "\n"


def _edge_path(canvas, segs):
    # segs: (x, y, dx, dy) unit segments, already sorted
    d = " ".join("M%d %d l%d %d" % (*canvas.px(x, y), dx * canvas.s, -dy * canvas.s)
                 for x, y, dx, dy in segs)
    return d


def render_cycle_svg(cycle, scale=16, budget=DEFAULT_BUDGET):
    """One cycle as a closed polyline (first vertex repeated at the end)."""
    r = cycle.rect
    cv = _Canvas(r.a + 1, r.c, r.b + 1, r.d, scale, budget)
    v = cycle.vertices
    cv.add(f'<polyline class="cycle" fill="none" stroke="black" stroke-width="2" '
           f'data-length="{cycle.length}" data-direction="{cycle.direction}" '
           f'points="{cv.pts(np.vstack((v, v[:1])))}"/>')
    return cv.document(f"cycle length {cycle.length}")


def render_window_svg(window, scale=8, budget=DEFAULT_BUDGET):
    """Present edges of a window; closed cycles are drawn as one polyline each.

    Edges of components that leave the window are drawn as a single
    ``<path class="arcs">``.
    """
    (x0, x1), (y0, y1) = window.x_range, window.y_range
    cv = _Canvas(x0, x1, y0, y1, scale, budget)
    labels, closed = closed_components(window)
    V = window.vertical_edges()
    E = window.horizontal_edges()
    open_v = V & ~closed[labels[:, :-1]]
    open_h = E & ~closed[labels[:-1, :]]
    segs = sorted([(x0 + i, y0 + j, 0, 1) for i, j in zip(*np.nonzero(open_v))]
                  + [(x0 + i, y0 + j, 1, 0) for i, j in zip(*np.nonzero(open_h))])
    if segs:
        cv.add(f'<path class="arcs" fill="none" stroke="grey" stroke-width="1" '
               f'd="{_edge_path(cv, segs)}"/>')
    cycles = sorted(all_cycles(window), key=lambda c: tuple(c.vertices[0]))
    for c in cycles:
        v = c.vertices
        colour = "blue" if c.direction == "up" else "red"
        cv.add(f'<polyline class="cycle" fill="none" stroke="{colour}" stroke-width="1" '
               f'data-level="{c.level}" points="{cv.pts(np.vstack((v, v[:1])))}"/>')
    return cv.document(f"window x {x0}..{x1}, y {y0}..{y1}, {len(cycles)} cycles")


def _palette(k, n):
    # blue -> white -> red ramp
    if n <= 1:
        return "#ffffff"
    t = k / (n - 1)
    if t < 0.5:
        a = int(round(255 * t * 2))
        return "#%02x%02xff" % (a, a)
    a = int(round(255 * (1 - t) * 2))
    return "#ff%02x%02x" % (a, a)


def render_height_svg(window, scale=8, budget=DEFAULT_BUDGET):
    """Face heights as coloured unit squares, with a legend.

    Face ``(n, m)`` is the square with lower-left corner ``(n, m)``.  Present
    edges are overlaid so that colour changes can be read against them.
    """
    fx, fy = window.face_x_range, window.face_y_range
    H = height_map(window)
    vals = sorted(int(v) for v in np.unique(H))
    cv = _Canvas(fx[0], fx[1] + 1, fy[0], fy[1] + 1 + len(vals), scale, budget)
    col = {v: _palette(k, len(vals)) for k, v in enumerate(vals)}
    for i in range(H.shape[0]):
        for j in range(H.shape[1]):
            x, y = cv.px(fx[0] + i, fy[0] + j + 1)
            cv.add(f'<rect class="face" x="{x}" y="{y}" width="{cv.s}" height="{cv.s}" '
                   f'fill="{col[int(H[i, j])]}" data-height="{int(H[i, j])}"/>')
    (x0, _), (y0, _) = window.x_range, window.y_range
    V = window.vertical_edges()
    E = window.horizontal_edges()
    segs = sorted([(x0 + i, y0 + j, 0, 1) for i, j in zip(*np.nonzero(V))]
                  + [(x0 + i, y0 + j, 1, 0) for i, j in zip(*np.nonzero(E))])
    if segs:
        cv.add(f'<path class="edges" fill="none" stroke="black" stroke-width="1" '
               f'd="{_edge_path(cv, segs)}"/>')
    cv.add('<g class="legend">')
    for k, v in enumerate(vals):
        x, y = cv.px(fx[0], fy[1] + 2 + k)
        cv.add(f'<rect x="{x}" y="{y}" width="{cv.s}" height="{cv.s}" fill="{col[v]}"/>'
               f'<text x="{x + 2 * cv.s}" y="{y + cv.s}" font-size="{cv.s}">{v}</text>')
    cv.add("</g>")
    return cv.document("height map")


# ---- reports ------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def report_json(payload, timing=False):
    """Serialize a report dict with a schema version and the package version.

    ``wall_time`` fields are dropped unless ``timing`` is set, so that the
    same invocation always produces the same bytes.
    """
    d = _clean(dict(payload))
    if not timing:
        d.pop("wall_time", None)
    d.setdefault("schema_version", SCHEMA_VERSION)
    d.setdefault("version", __version__)
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


def rows_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def rle_encode(bits):
    """Run-length encoding of a 0/1 grid in row-major order."""
    a = np.asarray(bits).astype(np.int8).ravel()
    if a.size == 0:
        return {"shape": list(np.shape(bits)), "first": 0, "runs": []}
    cut = np.flatnonzero(np.diff(a)) + 1
    edges = np.concatenate(([0], cut, [a.size]))
    return {"shape": list(np.shape(bits)), "first": int(a[0]), "runs": np.diff(edges).tolist()}


def rle_decode(enc):
    out = np.empty(sum(enc["runs"]), dtype=np.int8)
    v, p = enc["first"], 0
    for r in enc["runs"]:
        out[p:p + r] = v
        v ^= 1
        p += r
    return out.reshape(enc["shape"])
