"""Winding numbers, separation predicates, homology and self-intersections.

Faces of the plane cut along a curve come from a noded arrangement built
with shapely; everything else is plain numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import shapely
from shapely.geometry import LineString, Point as ShPoint
from shapely.ops import polygonize, unary_union

from . import geometry as geo
from .curves import PolyCurve
from .domain import Cap, Domain, Separation
from .errors import CurveMeetsComplement, PointOnCurve

ON_CURVE_RTOL = 1e-12
EXACT_RTOL = 1e-9
UNBOUNDED_FACE = -1


def _scale(v: np.ndarray) -> float:
    return max(float(np.max(np.abs(v))), 1.0)


def _exact_orientation(a: complex, b: complex, z: complex) -> int:
    ax, ay = Fraction(a.real), Fraction(a.imag)
    bx, by = Fraction(b.real), Fraction(b.imag)
    zx, zy = Fraction(z.real), Fraction(z.imag)
    val = (bx - ax) * (zy - ay) - (by - ay) * (zx - ax)
    return (val > 0) - (val < 0)


def winding_numbers(curve: PolyCurve, points) -> np.ndarray:
    """Winding number of ``curve`` about each of ``points``.

    Signed crossings of the rightward horizontal ray; vertices on the ray
    count as lying above it, and near-degenerate orientation tests are
    redone in exact rational arithmetic.
    """
    pts = np.atleast_1d(np.asarray(points, complex))
    a, b = curve.segments()
    scale = _scale(curve.vertices)
    out = np.zeros(pts.shape, int)
    flat = pts.ravel()
    res = out.ravel()
    for k, z in enumerate(flat):
        if np.min(geo.point_segment_distance(z, a, b)) <= ON_CURVE_RTOL * scale:
            raise PointOnCurve(f"point {z} lies on the curve")
        up = (a.imag <= z.imag) & (b.imag > z.imag)
        down = (b.imag <= z.imag) & (a.imag > z.imag)
        cand = np.flatnonzero(up | down)
        if cand.size == 0:
            continue
        o = geo.cross(b[cand] - a[cand], z - a[cand])
        tol = EXACT_RTOL * np.abs(b[cand] - a[cand]) * scale
        sign = np.sign(o).astype(int)
        for j in np.flatnonzero(np.abs(o) <= tol):
            sign[j] = _exact_orientation(complex(a[cand[j]]), complex(b[cand[j]]), complex(z))
            if sign[j] == 0:
                raise PointOnCurve(f"point {z} lies on the curve")
        res[k] = int(np.sum(up[cand] & (sign > 0)) - np.sum(down[cand] & (sign < 0)))
    return out


def winding_number(curve: PolyCurve, z: complex) -> int:
    return int(winding_numbers(curve, [z])[0])


# -- faces -------------------------------------------------------------------

def _check_avoids(curve: PolyCurve, domain: Domain):
    a, b = curve.segments()
    if np.any(domain.segment_distance(a, b) <= 0):
        raise CurveMeetsComplement("curve meets a complement component")


def face_labels(curve: PolyCurve, points) -> np.ndarray:
    """Index of the face of the curve's complement containing each point.

    Bounded faces are numbered from 0 in a deterministic order; the
    unbounded face is ``UNBOUNDED_FACE``.
    """
    pts = np.atleast_1d(np.asarray(points, complex))
    v = curve.vertices
    ring = LineString([(z.real, z.imag) for z in np.r_[v, v[:1]]])
    grid = ON_CURVE_RTOL * _scale(v)
    noded = unary_union(shapely.set_precision(ring, grid))
    faces = list(polygonize(noded))
    faces.sort(key=lambda f: (round(f.area, 12), f.representative_point().coords[0]))
    labels = np.full(pts.shape, UNBOUNDED_FACE, int)
    for idx, z in np.ndenumerate(pts):
        q = ShPoint(z.real, z.imag)
        for k, f in enumerate(faces):
            if f.contains(q):
                labels[idx] = k
                break
    return labels


def _component_faces(curve: PolyCurve, domain: Domain, probes: int = 8) -> list:
    """Set of faces met by each complement component (singletons for valid curves)."""
    out = []
    for comp in domain.components:
        if isinstance(comp, Cap):
            out.append({UNBOUNDED_FACE})
            continue
        out.append(set(face_labels(curve, comp.probes(probes)).tolist()))
    return out


def _side_faces(curve, domain, sep, probes):
    faces = _component_faces(curve, domain, probes)
    fe = set().union(*(faces[i] for i in sep.E))
    ff = set().union(*(faces[i] for i in sep.F)) if sep.F else set()
    if domain.cap is None:
        ff.add(UNBOUNDED_FACE)
    return fe, ff


def separates(curve: PolyCurve, domain: Domain, sep: Separation, probes: int = 8) -> bool:
    """No face of the curve's complement contains points of both E and F."""
    _check_avoids(curve, domain)
    fe, ff = _side_faces(curve, domain, sep, probes)
    return not (fe & ff)


def separates_simply(curve: PolyCurve, domain: Domain, sep: Separation, probes: int = 8) -> bool:
    """Separates, with one side lying in a single face."""
    _check_avoids(curve, domain)
    fe, ff = _side_faces(curve, domain, sep, probes)
    return not (fe & ff) and (len(fe) == 1 or len(ff) == 1)


def separates_by_parity(curve: PolyCurve, domain: Domain, sep: Separation) -> bool:
    """Odd winding about every point of E, even about every point of F.

    Infinity (or the cap) always has winding 0, so F is necessarily the
    even side.
    """
    _check_avoids(curve, domain)
    w = winding_numbers(curve, [c.representative for c in domain.components])
    return all(w[i] % 2 == 1 for i in sep.E) and all(w[i] % 2 == 0 for i in sep.F)


# -- homology ------------------------------------------------------------------

@dataclass(frozen=True)
class HomologyClass:
    """Winding numbers about the bounded complement components, in index order."""

    indices: tuple
    windings: tuple

    def as_dict(self) -> dict:
        return dict(zip(self.indices, self.windings))

    def to_json(self) -> dict:
        return {"components": list(self.indices), "windings": list(self.windings)}

    def is_zero(self) -> bool:
        return not any(self.windings)


def homology_class(curve: PolyCurve, domain: Domain) -> HomologyClass:
    _check_avoids(curve, domain)
    idx = domain.bounded_indices
    w = winding_numbers(curve, [domain.components[i].representative for i in idx])
    return HomologyClass(tuple(idx), tuple(int(x) for x in w))


def homology_of_separation(domain: Domain, sep: Separation) -> HomologyClass:
    """Homology of a simple curve enclosing exactly E (winding 1 on E, 0 on F)."""
    idx = domain.bounded_indices
    return HomologyClass(tuple(idx), tuple(1 if i in sep.E else 0 for i in idx))


# -- self-intersections ----------------------------------------------------------

@dataclass(frozen=True)
class Crossing:
    point: complex
    segments: tuple
    transversal: bool
    overlap: bool = False


@dataclass(frozen=True)
class IntersectionReport:
    crossings: tuple

    @property
    def simple(self) -> bool:
        return not self.crossings

    @property
    def transversal_count(self) -> int:
        return sum(c.transversal for c in self.crossings)

    def __len__(self):
        return len(self.crossings)


def _candidate_pairs(a, b):
    xlo, xhi = np.minimum(a.real, b.real), np.maximum(a.real, b.real)
    ylo, yhi = np.minimum(a.imag, b.imag), np.maximum(a.imag, b.imag)
    order = np.argsort(xlo, kind="stable")
    pairs = []
    # sweep on x; keeps the pair count near-linear for curves of moderate size
    for pos, i in enumerate(order):
        rest = order[pos + 1:]
        rest = rest[xlo[rest] <= xhi[i]]
        hit = rest[(ylo[rest] <= yhi[i]) & (yhi[rest] >= ylo[i])]
        for j in hit:
            pairs.append((min(i, j), max(i, j)))
    if not pairs:
        return np.zeros((0, 2), int)
    return np.array(sorted(pairs), int).reshape(-1, 2)


def _branch(a, b, i, pt, tol):
    """Incoming and outgoing directions of the curve through ``pt`` on segment ``i``."""
    n = len(a)
    if abs(pt - a[i]) <= tol:
        return a[i - 1] - a[i], b[i] - a[i]
    if abs(pt - b[i]) <= tol:
        j = (i + 1) % n
        return a[i] - b[i], b[j] - a[j]
    return a[i] - b[i], b[i] - a[i]


def _branches_cross(br1, br2) -> bool:
    """Do two curve branches through one point cross rather than touch?"""
    base = np.angle(br1[0])
    ang = lambda w: (np.angle(w) - base) % (2 * np.pi)
    cut = ang(br1[1])
    s2 = [ang(w) for w in br2]
    if any(min(abs(x), abs(x - cut), 2 * np.pi - x) < 1e-12 for x in s2):
        return False
    return (0 < s2[0] < cut) != (0 < s2[1] < cut)


def self_intersections(curve: PolyCurve) -> IntersectionReport:
    """All self-crossings, touches and collinear overlaps of a closed polygon.

    Transversal crossings and touches are merged by location; each pair of
    collinearly overlapping segments is reported separately, and touches at
    an overlap's endpoints are absorbed into it.
    """
    v = curve.vertices
    n = len(v)
    a, b = curve.segments()
    scale = _scale(v)
    tol = ON_CURVE_RTOL * scale
    pairs = _candidate_pairs(a, b)
    points: dict = {}
    overlaps = []
    for i, j in pairs:
        adjacent = j == i + 1 or (i == 0 and j == n - 1)
        p, q, r, s = a[i], b[i], a[j], b[j]
        d1 = geo.cross(q - p, r - p)
        d2 = geo.cross(q - p, s - p)
        collinear = abs(d1) <= tol * abs(q - p) and abs(d2) <= tol * abs(q - p)
        if collinear:
            u = q - p
            uu = geo.dot(u, u)
            if uu == 0:
                continue
            t0, t1 = sorted((geo.dot(r - p, u) / uu, geo.dot(s - p, u) / uu))
            lo, hi = max(t0, 0.0), min(t1, 1.0)
            if hi - lo > tol / abs(u):
                overlaps.append(Crossing(complex(p + 0.5 * (lo + hi) * u), (int(i), int(j)), False, True))
                continue
            if adjacent or hi < lo - tol / abs(u):
                continue
            pt = complex(p + lo * u)
        else:
            if adjacent:
                continue
            if not geo.segments_intersect(p, q, r, s):
                continue
            d3 = geo.cross(s - r, p - r)
            d4 = geo.cross(s - r, q - r)
            transversal = bool(d1 * d2 < 0 and d3 * d4 < 0)
            den = geo.cross(q - p, s - r)
            if den != 0:
                t = geo.cross(r - p, s - r) / den
                pt = complex(p + np.clip(t, 0, 1) * (q - p))
            else:
                pt = complex(p)
            if not transversal:
                # crossing through a vertex: compare the two branches
                transversal = bool(_branches_cross(_branch(a, b, i, pt, tol), _branch(a, b, j, pt, tol)))
            key = (round(pt.real / tol), round(pt.imag / tol)) if tol > 0 else (pt.real, pt.imag)
            if key not in points or (transversal and not points[key].transversal):
                points[key] = Crossing(pt, (int(i), int(j)), transversal)
            continue
        key = (round(pt.real / tol), round(pt.imag / tol))
        points.setdefault(key, Crossing(pt, (int(i), int(j)), False))
    if overlaps:
        ends = []
        for c in overlaps:
            i, j = c.segments
            ends += [a[i], b[i], a[j], b[j]]
        ends = np.array(ends)
        points = {k: c for k, c in points.items()
                  if c.transversal or np.min(np.abs(ends - c.point)) > tol}
    crossings = sorted(points.values(), key=lambda c: c.segments) + overlaps
    return IntersectionReport(tuple(crossings))


def is_simple(curve: PolyCurve) -> bool:
    return self_intersections(curve).simple


def simple_representative(curve: PolyCurve, tau: float) -> PolyCurve | None:
    """Boundary of the morphological closing (radius ``tau``) of the odd-winding region.

    Where two strands of a curve run within ``tau`` of each other and cross
    back and forth, the closing glues the thin pieces between them into one
    band, and its boundary is a simple polygon within about ``tau`` of the
    curve.  A final dilation by ``tau / 1000`` keeps the strands of that
    boundary apart.  Returns ``None`` when the closed region is not a single disk.
    The caller is responsible for checking homology, distance and length.
    """
    v = curve.vertices
    ring = LineString([(z.real, z.imag) for z in np.r_[v, v[:1]]])
    grid = ON_CURVE_RTOL * _scale(v)
    faces = list(polygonize(unary_union(shapely.set_precision(ring, grid))))
    if not faces:
        return None
    reps = [f.representative_point() for f in faces]
    try:
        w = winding_numbers(curve, [complex(p.x, p.y) for p in reps])
    except PointOnCurve:
        return None
    odd = [f for f, k in zip(faces, w) if k % 2]
    if not odd:
        return None
    region = unary_union(odd).buffer(tau, quad_segs=4).buffer(-tau, quad_segs=4)
    # a slight dilation keeps glued strands a resolvable distance apart
    region = region.buffer(1e-3 * tau, quad_segs=4)
    if region.geom_type != "Polygon" or region.is_empty or len(region.interiors):
        return None
    xy = np.asarray(region.exterior.coords)[:-1]
    out = PolyCurve(xy[:, 0] + 1j * xy[:, 1])
    area = sum(f.area * k for f, k in zip(faces, w) if k % 2)
    if (out.orientation > 0) != (area > 0):
        out = out.reversed()
    return out
