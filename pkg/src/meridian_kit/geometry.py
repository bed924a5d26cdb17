"""Vectorised planar primitives on complex coordinates."""

import numpy as np


def cross(a, b):
    """z-component of the cross product of complex vectors ``a`` and ``b``."""
    return a.real * b.imag - a.imag * b.real


def dot(a, b):
    return a.real * b.real + a.imag * b.imag


def point_segment_distance(p, a, b):
    """Distance from points ``p`` to segments ``[a, b]`` (broadcasting)."""
    p, a, b = np.broadcast_arrays(np.asarray(p, complex), np.asarray(a, complex),
                                  np.asarray(b, complex))
    d = b - a
    dd = dot(d, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(dd > 0, dot(p - a, d) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(p - (a + t * d))


def closest_point_on_segment(p, a, b):
    p, a, b = np.broadcast_arrays(np.asarray(p, complex), np.asarray(a, complex),
                                  np.asarray(b, complex))
    d = b - a
    dd = dot(d, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(dd > 0, dot(p - a, d) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return a + t * d, t


def segments_intersect(a, b, c, d):
    """Closed-segment intersection test for ``[a, b]`` against ``[c, d]``."""
    a, b, c, d = np.broadcast_arrays(*(np.asarray(x, complex) for x in (a, b, c, d)))
    d1 = cross(b - a, c - a)
    d2 = cross(b - a, d - a)
    d3 = cross(d - c, a - c)
    d4 = cross(d - c, b - c)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)

    def on_seg(p, q, r, o):
        return (o == 0) & (np.minimum(p.real, q.real) <= r.real) & (r.real <= np.maximum(p.real, q.real)) \
            & (np.minimum(p.imag, q.imag) <= r.imag) & (r.imag <= np.maximum(p.imag, q.imag))

    touch = on_seg(a, b, c, d1) | on_seg(a, b, d, d2) | on_seg(c, d, a, d3) | on_seg(c, d, b, d4)
    return proper | touch


def segment_segment_distance(a, b, c, d):
    a, b, c, d = np.broadcast_arrays(*(np.asarray(x, complex) for x in (a, b, c, d)))
    dist = np.minimum.reduce([
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    ])
    return np.where(segments_intersect(a, b, c, d), 0.0, dist)


def point_in_polygon(p, verts):
    """Crossing-number test; ``verts`` is an open vertex ring."""
    p = np.asarray(p, complex)
    v = np.asarray(verts, complex)
    a = v
    b = np.roll(v, -1)
    pe = p[..., None]
    cond = (a.imag <= pe.imag) != (b.imag <= pe.imag)
    with np.errstate(invalid="ignore", divide="ignore"):
        xint = a.real + (pe.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
    hits = cond & (pe.real < xint)
    return (np.count_nonzero(hits, axis=-1) % 2) == 1


def polygon_area(verts):
    v = np.asarray(verts, complex)
    return 0.5 * float(np.sum(cross(v, np.roll(v, -1))))


def polygon_is_simple(verts):
    v = np.asarray(verts, complex)
    n = len(v)
    a = v
    b = np.roll(v, -1)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(a[i], b[i], a[j], b[j]):
                return False
    return True


def point_in_triangle(p, a, b, c):
    """Closed triangle membership (either orientation), broadcasting.

    Zero-area triangles contain nothing; callers measure distance to their edges.
    """
    d1 = cross(b - a, p - a)
    d2 = cross(c - b, p - b)
    d3 = cross(a - c, p - c)
    neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
    pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
    return ~(neg & pos) & (cross(b - a, c - a) != 0)


def point_in_quad_hull(p, a, b, c, d):
    """Is ``p`` inside the convex hull of four points?"""
    return (point_in_triangle(p, a, b, c) | point_in_triangle(p, a, b, d)
            | point_in_triangle(p, a, c, d) | point_in_triangle(p, b, c, d))


def quad_hull_distance(p, a, b, c, d):
    """Distance from ``p`` to the convex hull of four points (zero inside)."""
    dist = np.minimum.reduce([
        point_segment_distance(p, a, b), point_segment_distance(p, a, c),
        point_segment_distance(p, a, d), point_segment_distance(p, b, c),
        point_segment_distance(p, b, d), point_segment_distance(p, c, d),
    ])
    return np.where(point_in_quad_hull(p, a, b, c, d), 0.0, dist)


def point_box_distance(p, x0, y0, x1, y1):
    p = np.asarray(p, complex)
    dx = np.maximum.reduce([x0 - p.real, np.zeros_like(x0 - p.real), p.real - x1])
    dy = np.maximum.reduce([y0 - p.imag, np.zeros_like(y0 - p.imag), p.imag - y1])
    return np.hypot(dx, dy)
