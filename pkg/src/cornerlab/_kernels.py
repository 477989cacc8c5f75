"""Compiled inner loops (numba).

Everything here works on plain arrays and integers; the public modules wrap
these with argument checking and Python objects.
"""

import numpy as np
from numba import njit

CLOSED = 0
ESCAPED = 1
BUDGET = 2


@njit(cache=True)
def _vpartner(xi, xi_lo, x, y):
    s = xi[x - xi_lo]
    if y % 2 != 0:
        s = -s
    return y + 1 if s == 1 else y - 1


@njit(cache=True)
def _hpartner(eta, eta_lo, x, y):
    s = eta[y - eta_lo]
    if x % 2 != 0:
        s = -s
    return x + 1 if s == 1 else x - 1


@njit(cache=True)
def trace(xi, xi_lo, eta, eta_lo, x0, x1, y0, y1, sx, sy, store, max_steps):
    """Follow the component of ``(sx, sy)``, vertical edge first.

    Returns ``(status, length, xmin, xmax, ymin, ymax, verts)``.  ``verts``
    holds the visited vertices in order when ``store`` is true (the closing
    return to the start is not repeated).  On escape, ``length`` and the
    bounding box describe the part walked before leaving the window.
    """
    cap = 64 if store else 1
    verts = np.empty((cap, 2), dtype=np.int64)
    n = 0
    x, y = sx, sy
    xmin = xmax = sx
    ymin = ymax = sy
    length = 0
    status = CLOSED
    while True:
        if store:
            if n == cap:
                cap *= 2
                nv = np.empty((cap, 2), dtype=np.int64)
                nv[:n] = verts[:n]
                verts = nv
            verts[n, 0] = x
            verts[n, 1] = y
            n += 1
        if length >= max_steps:
            status = BUDGET
            break
        # vertical step
        y = _vpartner(xi, xi_lo, x, y)
        length += 1
        if y < y0 or y > y1:
            status = ESCAPED
            break
        if y < ymin:
            ymin = y
        if y > ymax:
            ymax = y
        if store:
            if n == cap:
                cap *= 2
                nv = np.empty((cap, 2), dtype=np.int64)
                nv[:n] = verts[:n]
                verts = nv
            verts[n, 0] = x
            verts[n, 1] = y
            n += 1
        # horizontal step
        x = _hpartner(eta, eta_lo, x, y)
        length += 1
        if x < x0 or x > x1:
            status = ESCAPED
            break
        if x < xmin:
            xmin = x
        if x > xmax:
            xmax = x
        if x == sx and y == sy:
            break
    return status, length, xmin, xmax, ymin, ymax, verts[:n]


@njit(cache=True)
def trace_torus(xi, eta, period, visited):
    """Trace every component of the periodic configuration on a torus.

    ``xi`` and ``eta`` have length ``period`` (even).  Returns an array of
    rows ``(length, wind_x, wind_y)``, one per component, where the winding
    numbers are the lifted displacement divided by ``period``.
    """
    out = np.empty((period * period, 3), dtype=np.int64)
    k = 0
    for sx in range(period):
        for sy in range(period):
            if visited[sx, sy]:
                continue
            x, y = sx, sy
            ux, uy = sx, sy
            length = 0
            while True:
                visited[x, y] = True
                s = xi[x]
                if y % 2 != 0:
                    s = -s
                dy = 1 if s == 1 else -1
                uy += dy
                y = (y + dy) % period
                visited[x, y] = True
                s = eta[y]
                if x % 2 != 0:
                    s = -s
                dx = 1 if s == 1 else -1
                ux += dx
                x = (x + dx) % period
                length += 2
                if x == sx and y == sy:
                    break
            out[k, 0] = length
            out[k, 1] = (ux - sx) // period
            out[k, 2] = (uy - sy) // period
            k += 1
    return out[:k]


@njit(cache=True)
def excursions_batch(h, count, u, path_cap):
    """Draw ``count`` conditioned excursions of height ``h`` from uniforms ``u``.

    The up-leg starts at 1 and moves down with probability ``(i-1)/(2i)``
    until it hits ``h``; the return leg moves down with probability
    ``(h+2-j)/(2(h+1-j))`` until it hits 0.  Forced moves consume no
    uniforms.  Returns ``(paths, offsets, used)``; ``used`` is -1 when ``u``
    or ``path_cap`` ran out, in which case the caller retries with more.
    """
    paths = np.empty(path_cap, dtype=np.int64)
    offsets = np.empty(count + 1, dtype=np.int64)
    pos = 0
    w = 0
    nu = u.shape[0]
    for c in range(count):
        offsets[c] = w
        if w + 2 > path_cap:
            return paths, offsets, -1
        paths[w] = 0
        paths[w + 1] = 1
        w += 2
        x = 1
        while x < h:
            if x == 1:
                x = 2
            else:
                if pos >= nu:
                    return paths, offsets, -1
                r = u[pos]
                pos += 1
                if r < (x - 1) / (2.0 * x):
                    x -= 1
                else:
                    x += 1
            if w >= path_cap:
                return paths, offsets, -1
            paths[w] = x
            w += 1
        while x > 0:
            if x == h:
                x = h - 1
            else:
                if pos >= nu:
                    return paths, offsets, -1
                r = u[pos]
                pos += 1
                if r < (h + 2 - x) / (2.0 * (h + 1 - x)):
                    x -= 1
                else:
                    x += 1
            if w >= path_cap:
                return paths, offsets, -1
            paths[w] = x
            w += 1
    offsets[count] = w
    return paths, offsets, pos


@njit(cache=True)
def chain_hits(kind, h, start, target, other, runs, u):
    """Count runs of a there/back chain that reach ``target`` before ``other``.

    ``kind`` 0 is the up-leg chain (down-probability ``(i-1)/(2i)``), 1 is
    the return-leg chain for height ``h``.  Returns ``(hits, used)`` with
    ``used = -1`` when the uniforms ran out.
    """
    hits = 0
    pos = 0
    nu = u.shape[0]
    for _ in range(runs):
        x = start
        while x != target and x != other:
            if kind == 0:
                pd = (x - 1) / (2.0 * x)
            else:
                pd = (h + 2 - x) / (2.0 * (h + 1 - x))
            if pd <= 0.0:
                x += 1
                continue
            if pd >= 1.0:
                x -= 1
                continue
            if pos >= nu:
                return hits, -1
            r = u[pos]
            pos += 1
            if r < pd:
                x -= 1
            else:
                x += 1
        if x == target:
            hits += 1
    return hits, pos
