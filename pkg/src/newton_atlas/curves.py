"""Polyline geometry: distances, winding numbers, decimation, crossings.

All metric quantities are chordal, computed through the stereographic
embedding into R^3 where chordal distance is plain Euclidean distance.
Winding numbers are taken in a Moebius chart T(z) = 1/(z - base) chosen
so the walk stays bounded; T(infinity) = 0 makes walks through the
infinity vertex ordinary closed polylines.
"""

from __future__ import annotations

import numpy as np

from newton_atlas.sphere import embed_r3, embed_point, chordal


def point_polyline_distance(z, points: np.ndarray) -> float:
    """Chordal distance from a sphere point to a finite polyline."""
    p = embed_point(z)
    segs_a = embed_r3(points[:-1])
    segs_b = embed_r3(points[1:])
    return float(np.min(_point_segments_dist(p, segs_a, segs_b)))


def _point_segments_dist(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    ap = p[None, :] - a
    denom = np.sum(ab * ab, axis=1)
    t = np.divide(np.sum(ap * ab, axis=1), denom,
                  out=np.zeros_like(denom), where=denom > 0)
    t = np.clip(t, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.sqrt(np.sum((p[None, :] - proj) ** 2, axis=1))


def polyline_min_gap(pa: np.ndarray, pb: np.ndarray) -> float:
    """Smallest chordal distance between two finite polylines."""
    a3 = embed_r3(pa)
    best = np.inf
    sa = embed_r3(pb[:-1])
    sb = embed_r3(pb[1:])
    for p in a3:
        d = np.min(_point_segments_dist(p, sa, sb))
        if d < best:
            best = float(d)
    b3 = embed_r3(pb)
    sa = embed_r3(pa[:-1])
    sb = embed_r3(pa[1:])
    for p in b3:
        d = np.min(_point_segments_dist(p, sa, sb))
        if d < best:
            best = float(d)
    return best


def decimate(points: np.ndarray, tol: float) -> np.ndarray:
    """Ramer-Douglas-Peucker on the sphere embedding (chordal tolerance)."""
    if len(points) <= 2:
        return points
    emb = embed_r3(points)
    keep = np.zeros(len(points), dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, len(points) - 1)]
    while stack:
        i, j = stack.pop()
        if j <= i + 1:
            continue
        a, b = emb[i], emb[j]
        ab = b - a
        denom = float(ab @ ab)
        pts = emb[i + 1:j]
        if denom == 0:
            d = np.sqrt(np.sum((pts - a) ** 2, axis=1))
        else:
            t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
            proj = a + t[:, None] * ab
            d = np.sqrt(np.sum((pts - proj) ** 2, axis=1))
        m = int(np.argmax(d))
        if d[m] > tol:
            keep[i + 1 + m] = True
            stack.append((i, i + 1 + m))
            stack.append((i + 1 + m, j))
    return points[keep]


def winding_number(walk: np.ndarray, q: complex) -> int:
    """Winding number of a closed planar polyline around a finite point."""
    v = walk - q
    if np.min(np.abs(v)) == 0:
        raise ValueError("query point lies on the walk")
    ang = np.angle(v[1:] / v[:-1])
    total = float(np.sum(ang))
    return int(np.rint(total / (2 * np.pi)))


def chart_points(points, base: complex) -> np.ndarray:
    """Apply T(z) = 1/(z - base); entries may include None for infinity."""
    out = np.empty(len(points), dtype=complex)
    for i, z in enumerate(points):
        if z is None:
            out[i] = 0j
        else:
            d = z - base
            out[i] = 1.0 / d if d != 0 else 1e300
    return out


def winding_in_chart(walk_points: list, base: complex, q) -> int:
    """Winding of a sphere walk around q, in the chart sending base -> inf.

    walk_points entries are complex or None (= infinity); the walk is
    closed implicitly (last joins first).
    """
    w = chart_points(walk_points, base)
    if q is None:
        tq = 0j
    else:
        d = q - base
        if d == 0:
            raise ValueError("query equals the chart base")
        tq = 1.0 / d
    w = np.append(w, w[0])
    return winding_number(w, tq)


def segment_crossings(pa: np.ndarray, pb: np.ndarray, eps: float = 0.0):
    """Transversal crossings between two planar polylines.

    Returns a list of (i, j, t, s, point): segment i of pa crosses segment
    j of pb at parameters t, s in (0, 1).  Endpoint touches within eps are
    ignored.  Intended for finite local geometry (truncation circles).
    """
    out = []
    a0, a1 = pa[:-1], pa[1:]
    b0, b1 = pb[:-1], pb[1:]
    # bounding-box prefilter
    ax_min = np.minimum(a0.real, a1.real)[:, None]
    ax_max = np.maximum(a0.real, a1.real)[:, None]
    ay_min = np.minimum(a0.imag, a1.imag)[:, None]
    ay_max = np.maximum(a0.imag, a1.imag)[:, None]
    bx_min = np.minimum(b0.real, b1.real)[None, :]
    bx_max = np.maximum(b0.real, b1.real)[None, :]
    by_min = np.minimum(b0.imag, b1.imag)[None, :]
    by_max = np.maximum(b0.imag, b1.imag)[None, :]
    pad = 1e-12
    cand = ((ax_min <= bx_max + pad) & (bx_min <= ax_max + pad) &
            (ay_min <= by_max + pad) & (by_min <= ay_max + pad))
    ii, jj = np.nonzero(cand)
    for i, j in zip(ii.tolist(), jj.tolist()):
        p, r = a0[i], a1[i] - a0[i]
        q, s = b0[j], b1[j] - b0[j]
        denom = cross2(r, s)
        if denom == 0:
            continue
        qp = q - p
        t = cross2(qp, s) / denom
        u = cross2(qp, r) / denom
        lo, hi = eps, 1.0 - eps
        if lo < t < hi and lo < u < hi:
            out.append((i, j, float(t), float(u), p + t * r))
    return out


def cross2(r: complex, s: complex) -> float:
    return r.real * s.imag - r.imag * s.real
