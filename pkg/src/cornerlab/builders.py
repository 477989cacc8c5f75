"""Build the contour of a compatible excursion pair, two independent ways.

Both builders work in the normalised frame of an up-pair: with
``P_i = u * (X_{a+i} - X_a)`` and ``Q_j = u * (Y_{b+j} - Y_b) - h``
(``u = -1`` for down-pairs), the contour separates the faces where
``P_i + Q_j`` equals 0 from those where it equals 1, and its interior is
the positive side.  Face ``(i, j)`` of the frame is the lattice face
``(a + i, b + j)``.

:func:`cycle_from_pair_trace` labels the positive component that contains
the cross ``{P_i = h} U {Q_j = 0}`` and returns its outer boundary.

:func:`cycle_from_pair_hikers` walks the zero faces instead.  Consecutive
zero faces of the contour are diagonal neighbours, so each piece of the
contour is a path in the graph of pairs ``(i, j)`` with ``P(i) = R(j)``
for two "mountain" profiles.  At a vertex where four such paths meet, the
profile whose orientation agrees with the original walk ("Xavier") turns
back when both profiles sit at a local minimum, the other one ("Yvonne")
turns back at a local maximum, and a revisited vertex is left through its
one unused edge.  The pieces are cut at the maxima of the two marginals
and between consecutive maxima the rule is applied recursively to smaller
mountains.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .contours import Cycle, cycle_from_edges
from .errors import AlgorithmViolation
from .excursions import UP, CompatiblePair, is_compatible


def _frame(pair):
    if not isinstance(pair, CompatiblePair):
        raise TypeError("expected a CompatiblePair")
    if not is_compatible(pair.first, pair.second):
        raise ValueError("pair is not compatible")
    u = 1 if pair.direction == UP else -1
    h = pair.height
    P = u * pair.first.relative()
    Q = u * pair.second.relative() - h
    return P.astype(np.int64), Q.astype(np.int64), h


def _edge_between(f, g):
    # lattice edge shared by adjacent faces f and g (lower-left corner convention)
    (n, m), (p, q) = f, g
    if m == q:
        x = max(n, p)
        return ((x, m), (x, m + 1))
    y = max(m, q)
    return ((n, y), (n + 1, y))


# ---- lattice-trace builder ---------------------------------------------------

def _positive_region(P, Q, h):
    S = P[:, None] + Q[None, :]
    pos = S > 0
    cross = np.zeros_like(pos)
    cross[P == h, :] = True
    cross[:, Q == 0] = True
    cross &= pos
    lab, _ = ndimage.label(pos)
    keep = np.unique(lab[cross])
    keep = keep[keep > 0]
    if keep.size != 1:
        raise AlgorithmViolation("cross is not contained in one positive component")
    return ndimage.binary_fill_holes(lab == keep[0])


def _boundary_edges(region, a, b):
    R = np.pad(region, 1)
    edges = []
    # vertical edges: R[i] != R[i+1] along axis 0; padded index i <-> face a+i-1
    di = np.argwhere(R[:-1, :] != R[1:, :])
    for i, j in di:
        x = a + i          # boundary between face columns a+i-1 and a+i
        y = b + j - 1
        edges.append(((int(x), int(y)), (int(x), int(y) + 1)))
    dj = np.argwhere(R[:, :-1] != R[:, 1:])
    for i, j in dj:
        x = a + i - 1
        y = b + j
        edges.append(((int(x), int(y)), (int(x) + 1, int(y))))
    return edges


def cycle_from_pair_trace(pair):
    """Contour of a compatible pair as the boundary of a labelled positive set.

    Returns
    -------
    Cycle
        In lattice coordinates given by the excursions' offsets, with the
        pair's level.
    """
    P, Q, h = _frame(pair)
    region = _positive_region(P, Q, h)
    edges = _boundary_edges(region, pair.first.offset, pair.second.offset)
    return cycle_from_edges(edges, level=pair.level)


def trace_length(pair):
    """Edge count of the contour of a pair, without ordering the edges."""
    P, Q, h = _frame(pair)
    R = np.pad(_positive_region(P, Q, h), 1)
    return int(np.count_nonzero(R[:-1, :] != R[1:, :]) + np.count_nonzero(R[:, :-1] != R[:, 1:]))


def level_edge_count(pair):
    """Edges of the rectangle separating frame faces with values 0 and 1.

    This counts every contour edge of the pair's level inside the
    rectangle, the contour itself included.
    """
    P, Q, _ = _frame(pair)
    S = P[:, None] + Q[None, :]
    a = S == 0
    b = S == 1
    return int(np.count_nonzero((a[:-1] & b[1:]) | (b[:-1] & a[1:]))
               + np.count_nonzero((a[:, :-1] & b[:, 1:]) | (b[:, :-1] & a[:, 1:])))


# ---- hikers -------------------------------------------------------------------

def mountain_degrees(P, R):
    """Degree of every vertex of the graph ``{(i, j): P(i) = R(j)}``.

    Returns an int array with -1 at non-vertices.
    """
    Z = P[:, None] == R[None, :]
    D = np.zeros(Z.shape, dtype=np.int64)
    for di in (-1, 1):
        for dj in (-1, 1):
            sh = np.zeros_like(Z)
            src = Z[max(di, 0):Z.shape[0] + min(di, 0), max(dj, 0):Z.shape[1] + min(dj, 0)]
            sh[max(-di, 0):Z.shape[0] + min(-di, 0), max(-dj, 0):Z.shape[1] + min(-dj, 0)] = src
            D += sh & Z
    return np.where(Z, D, -1)


@dataclass
class HikeStats:
    steps: int = 0
    choices: int = 0
    revisits: int = 0


def hike(P, R, xavier, start, prev=None, end=None, stop=None, stats=None, max_steps=None):
    """Follow the hikers' rule on the mountain pair ``(P, R)``.

    Parameters
    ----------
    P, R : ndarray
        Profiles indexed by the first and second coordinate.
    xavier : {0, 1}
        Which coordinate belongs to the cautious-going-up hiker.
    start : tuple
        Starting vertex.
    prev : tuple, optional
        Vertex the path arrived from (for pieces that start mid-contour).
    end : tuple, optional
        Stop on arrival at this vertex.
    stop : tuple of two vertices, optional
        ``(v, w)``: stop at ``v`` when the rule would move on to ``w``.

    Returns
    -------
    list of tuple
        The visited vertices, ``start`` first.

    Raises
    ------
    AlgorithmViolation
        A vertex of unexpected degree, a forced move leaving the graph, or a
        revisit without exactly one unused edge.
    """
    nP, nR = len(P), len(R)
    if max_steps is None:
        max_steps = 4 * nP * nR + 8
    stats = stats if stats is not None else HikeStats()

    def nbrs(v):
        s, t = v
        out = []
        for ds in (-1, 1):
            for dt in (-1, 1):
                s2, t2 = s + ds, t + dt
                if 0 <= s2 < nP and 0 <= t2 < nR and P[s2] == R[t2]:
                    out.append((s2, t2))
        return out

    if P[start[0]] != R[start[1]]:
        raise AlgorithmViolation(f"start {start} is not a vertex")
    path = [start]
    used = set()
    seen = set()
    cur, pv = start, prev
    for _ in range(max_steps):
        if end is not None and cur == end:
            return path
        nb = nbrs(cur)
        deg = len(nb)
        first_visit = cur not in seen
        seen.add(cur)
        if deg == 1:
            if pv is not None:
                raise AlgorithmViolation(f"dead end at {cur}")
            nxt = nb[0]
        elif deg == 2:
            cand = [w for w in nb if w != pv]
            if len(cand) != 1:
                raise AlgorithmViolation(f"ambiguous degree-2 move at {cur}")
            nxt = cand[0]
        elif deg == 4:
            if pv is None:
                raise AlgorithmViolation(f"hike starts at degree-4 vertex {cur}")
            if first_visit:
                stats.choices += 1
                s, t = cur
                ds, dt = cur[0] - pv[0], cur[1] - pv[1]
                upward = P[s - 1] > P[s]
                back = xavier if upward else 1 - xavier
                nxt = (s - ds, t + dt) if back == 0 else (s + ds, t - dt)
                if nxt not in nb or frozenset((cur, nxt)) in used:
                    raise AlgorithmViolation(f"rule points to a missing edge at {cur}")
            else:
                stats.revisits += 1
                cand = [w for w in nb if w != pv and frozenset((cur, w)) not in used]
                if len(cand) != 1:
                    raise AlgorithmViolation(f"no unique unused edge at revisited {cur}")
                nxt = cand[0]
        else:
            raise AlgorithmViolation(f"vertex {cur} has degree {deg}")
        if stop is not None and cur == stop[0] and nxt == stop[1]:
            return path
        used.add(frozenset((cur, nxt)))
        if pv is not None:
            used.add(frozenset((pv, cur)))
        pv, cur = cur, nxt
        path.append(cur)
        stats.steps += 1
    raise AlgorithmViolation("hike did not terminate")


def _check_mountain_degrees(P, R):
    D = mountain_degrees(P, R)
    ends = {(0, 0), (len(P) - 1, len(R) - 1)}
    bad = np.argwhere((D == 1) | (D == 3) | (D > 4))
    for s, t in bad:
        if (int(s), int(t)) not in ends or D[s, t] != 1:
            raise AlgorithmViolation(f"mountain graph vertex {(int(s), int(t))} has degree {D[s, t]}")
    for v in ends:
        if D[v] != 1:
            raise AlgorithmViolation(f"mountain graph endpoint {v} has degree {D[v]}")
    return D


def _m_piece(P, R, xavier, stats, check):
    """Hike from ``(0, 0)`` to the far corner of a mountain pair."""
    if check:
        _check_mountain_degrees(P, R)
    return hike(P, R, xavier, (0, 0), end=(len(P) - 1, len(R) - 1), stats=stats)


def _e_piece(U, W, xavier, stats, check):
    """Path from ``(0, 0)`` to ``(len(U) - 1, 0)`` for a hill ``U`` over an ascent ``W``.

    ``U`` starts and ends at 0 and is positive inside; ``W`` starts at 0,
    is positive afterwards and exceeds ``max(U)`` somewhere.
    """
    D = len(U) - 1
    Hp = int(U.max())
    peaks = np.flatnonzero(U == Hp)
    p1, pr = int(peaks[0]), int(peaks[-1])
    q = int(np.flatnonzero(W == Hp)[0])
    first = _m_piece(U[:p1 + 1], W[:q + 1], xavier, stats, check)
    Urev = U[::-1][:D - pr + 1]
    last = _m_piece(Urev, W[:q + 1], xavier, stats, check)
    last = [(D - s, t) for s, t in reversed(last)]
    if W[q + 1] == Hp + 1:
        # the ascent passes straight through level Hp: the path visits the
        # peaks in order and descends into each valley in between
        path = list(first)
        for pa, pb in zip(peaks[:-1], peaks[1:]):
            pa, pb = int(pa), int(pb)
            Ua = Hp - U[pa:pb + 1]
            Wa = Hp - W[q::-1]
            sub = _e_piece(Ua, Wa, 1 - xavier, stats, check)
            path.extend((pa + s, q - t) for s, t in sub[1:])
        path.extend(last[1:])
        return path
    # ascent turns back at level Hp: hike the whole box from the first peak
    # until the path is about to leave the last peak downwards
    mid = hike(U, W, xavier, (p1, q), prev=first[-2], stop=((pr, q), (pr + 1, q - 1)), stats=stats)
    return list(first) + mid[1:] + last[1:]


@dataclass
class HikersResult:
    cycle: Cycle
    faces: list
    steps: int
    shared: int
    wrapped: int
    choices: int


def hikers_faces(pair, check=True, stats=None):
    """Closed sequence of zero faces (frame coordinates) visited by the hikers."""
    P, Q, h = _frame(pair)
    stats = stats if stats is not None else HikeStats()
    K, L = len(P) - 1, len(Q) - 1
    ms = np.flatnonzero(P == h)
    ns = np.flatnonzero(Q == 0)
    m1, mS = int(ms[0]), int(ms[-1])
    n1, nT = int(ns[0]), int(ns[-1])
    loop = []

    def add(seq):
        if loop:
            if loop[-1] != seq[0]:
                raise AlgorithmViolation(f"pieces do not join: {loop[-1]} vs {seq[0]}")
            loop.extend(seq[1:])
        else:
            loop.extend(seq)

    # lower-left corner: (0, n1) -> (m1, 0)
    lower = -Q[n1::-1]
    ll = _m_piece(P[:m1 + 1], lower, 0, stats, check)
    add([(i, n1 - j) for i, j in ll])
    # bottom side between consecutive column maxima
    for ma, mb in zip(ms[:-1], ms[1:]):
        ma, mb = int(ma), int(mb)
        e = _e_piece(h - P[ma:mb + 1], Q[:n1 + 1] + h, 1, stats, check)
        add([(ma + u, w) for u, w in e])
    # lower-right corner: (mS, 0) -> (K, n1)
    lr = _m_piece(P[::-1][:K - mS + 1], lower, 0, stats, check)
    add([(K - i, n1 - j) for i, j in reversed(lr)])
    # right side between consecutive row maxima
    for na, nb in zip(ns[:-1], ns[1:]):
        na, nb = int(na), int(nb)
        e = _e_piece(-Q[na:nb + 1], P[::-1][:K - mS + 1], 1, stats, check)
        add([(K - w, na + u) for u, w in e])
    # upper-right corner: (K, nT) -> (mS, L)
    upper = -Q[nT:]
    ur = _m_piece(P[::-1][:K - mS + 1], upper, 0, stats, check)
    add([(K - i, nT + j) for i, j in ur])
    # top side, right to left
    for ma, mb in reversed(list(zip(ms[:-1], ms[1:]))):
        ma, mb = int(ma), int(mb)
        e = _e_piece(h - P[ma:mb + 1], Q[::-1][:L - nT + 1] + h, 1, stats, check)
        add([(ma + u, L - w) for u, w in reversed(e)])
    # upper-left corner: (m1, L) -> (0, nT)
    ul = _m_piece(P[:m1 + 1], upper, 0, stats, check)
    add([(i, nT + j) for i, j in reversed(ul)])
    # left side, top to bottom
    for na, nb in reversed(list(zip(ns[:-1], ns[1:]))):
        na, nb = int(na), int(nb)
        e = _e_piece(-Q[na:nb + 1], P[:m1 + 1], 1, stats, check)
        add([(w, na + u) for u, w in reversed(e)])
    if loop[0] != loop[-1]:
        raise AlgorithmViolation("hikers' loop does not close")
    return loop[:-1], P, Q, stats


def _faces_to_edges(loop, P, Q, a, b):
    """Contour edges from the closed zero-face loop.

    A step from zero face ``A`` to the diagonal zero face ``B`` passes the
    +1 face ``F`` between them and marks the edges ``A|F`` and ``F|B``.
    When two consecutive steps pass +1 faces on opposite sides of ``B``,
    the contour wraps around ``B`` and the edge between ``B`` and its
    third +1 neighbour is marked as well.

    Returns
    -------
    edges : set
    shared : int
        Consecutive steps passing the same +1 face (one edge marked twice).
    wrapped : int
        Zero faces wrapped on three sides.

    The contour length is ``2T - shared + wrapped`` for a loop of ``T`` steps.
    """
    edges = set()
    shared = wrapped = 0
    n = len(loop)
    passed = []
    for k in range(n):
        A, B = loop[k], loop[(k + 1) % n]
        if abs(A[0] - B[0]) != 1 or abs(A[1] - B[1]) != 1:
            raise AlgorithmViolation(f"faces {A}, {B} are not diagonal neighbours")
        F1, F2 = (A[0], B[1]), (B[0], A[1])
        s1, s2 = P[F1[0]] + Q[F1[1]], P[F2[0]] + Q[F2[1]]
        if {int(s1), int(s2)} != {1, -1}:
            raise AlgorithmViolation(f"step {A} -> {B} does not straddle a +1 and a -1 face")
        F = F1 if s1 == 1 else F2
        passed.append(F)
        for f, g in ((A, F), (F, B)):
            edges.add(_edge_between((a + f[0], b + f[1]), (a + g[0], b + g[1])))
    for k in range(n):
        B = loop[(k + 1) % n]
        F, G = passed[k], passed[(k + 1) % n]
        if F == G:
            shared += 1
        elif F[0] == G[0] or F[1] == G[1]:
            # opposite sides of B: the contour goes round the remaining +1 side
            i, j = B
            if F[0] == G[0]:
                side = [(i - 1, j), (i + 1, j)]
            else:
                side = [(i, j - 1), (i, j + 1)]
            pos = [f for f in side if 0 <= f[0] < len(P) and 0 <= f[1] < len(Q)
                   and P[f[0]] + Q[f[1]] == 1]
            if len(pos) != 1:
                raise AlgorithmViolation(f"zero face {B} cannot be wrapped")
            wrapped += 1
            edges.add(_edge_between((a + i, b + j), (a + pos[0][0], b + pos[0][1])))
    return edges, shared, wrapped


def hikers_result(pair, check=True):
    """Run the hikers and return the cycle with path statistics."""
    loop, P, Q, stats = hikers_faces(pair, check)
    edges, shared, wrapped = _faces_to_edges(loop, P, Q, pair.first.offset, pair.second.offset)
    cyc = cycle_from_edges(edges, level=pair.level)
    return HikersResult(cyc, loop, len(loop), shared, wrapped, stats.choices)


def cycle_from_pair_hikers(pair, check=True):
    """Contour of a compatible pair built by the two cautious hikers.

    Each step between diagonal zero faces marks the two lattice edges that
    separate them from the +1 face in between; the union of the marked
    edges is the contour.

    Parameters
    ----------
    check : bool
        Assert the degree structure of every mountain graph used.
    """
    return hikers_result(pair, check).cycle
