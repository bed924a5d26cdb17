"""Plane domains described by their complement components, and separations.

A domain ``U`` is the complement in the Riemann sphere of finitely many
closed sets: disks, single points (punctures), simple polygons and at most
one unbounded cap ``{|z| >= R}`` which always contains infinity.  Without a
cap, infinity itself is an isolated point of the complement.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import geometry as geo
from .errors import (BadCap, InvalidComponent, NotHyperbolic, OverlappingComponents,
                     TrivialSeparation)

DEFAULT_MIN_GAP = 1e-9


def _as_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InvalidComponent(f"expected [x, y], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _xy(z: complex) -> list:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float
    kind = "disk"
    point_count = math.inf

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise InvalidComponent(f"disk radius must be positive, got {self.radius}")

    @property
    def representative(self) -> complex:
        return self.center

    @property
    def extent(self) -> float:
        return abs(self.center) + self.radius

    def distance(self, z):
        return np.maximum(np.abs(np.asarray(z, complex) - self.center) - self.radius, 0.0)

    def signed_distance(self, z):
        return np.abs(np.asarray(z, complex) - self.center) - self.radius

    def contains(self, z):
        return np.abs(np.asarray(z, complex) - self.center) <= self.radius

    def segment_distance(self, a, b):
        return np.maximum(geo.point_segment_distance(self.center, a, b) - self.radius, 0.0)

    def box_distance(self, x0, y0, x1, y1):
        return np.maximum(geo.point_box_distance(self.center, x0, y0, x1, y1) - self.radius, 0.0)

    def probes(self, count: int = 8) -> np.ndarray:
        ang = 2 * np.pi * np.arange(count) / count
        ring = self.center + 0.999 * self.radius * np.exp(1j * ang)
        return np.concatenate([[self.center], ring])

    def singular_distance(self, z):
        # (rho^2 - r^2) / 2r: vanishes on the circle, carries the curvature term
        w = np.asarray(z, complex) - self.center
        r = self.radius
        delta = (w.real ** 2 + w.imag ** 2 - r * r) / (2 * r)
        return delta, w / r, np.full(w.shape, 2.0 / r)

    def to_json(self) -> dict:
        return {"kind": "disk", "center": _xy(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Point:
    location: complex
    kind = "point"
    point_count = 1

    def __post_init__(self):
        object.__setattr__(self, "location", complex(self.location))

    @property
    def representative(self) -> complex:
        return self.location

    @property
    def extent(self) -> float:
        return abs(self.location)

    def distance(self, z):
        return np.abs(np.asarray(z, complex) - self.location)

    signed_distance = distance

    def contains(self, z):
        return np.asarray(z, complex) == self.location

    def segment_distance(self, a, b):
        return geo.point_segment_distance(self.location, a, b)

    def box_distance(self, x0, y0, x1, y1):
        return geo.point_box_distance(self.location, x0, y0, x1, y1)

    def probes(self, count: int = 8) -> np.ndarray:
        return np.array([self.location])

    def singular_distance(self, z):
        w = np.asarray(z, complex) - self.location
        rho = np.abs(w)
        with np.errstate(divide="ignore", invalid="ignore"):
            return rho, w / rho, 1.0 / rho

    def to_json(self) -> dict:
        return {"kind": "point", "location": _xy(self.location)}


@dataclass(frozen=True)
class Polygon:
    vertices: tuple
    kind = "polygon"
    point_count = math.inf

    def __post_init__(self):
        verts = tuple(complex(v) for v in self.vertices)
        if len(verts) < 3:
            raise InvalidComponent("polygon needs at least 3 vertices")
        if not geo.polygon_is_simple(verts):
            raise InvalidComponent("polygon is not simple")
        area = geo.polygon_area(verts)
        if area == 0:
            raise InvalidComponent("polygon is degenerate")
        if area < 0:
            verts = verts[::-1]
        object.__setattr__(self, "vertices", verts)

    @property
    def _v(self) -> np.ndarray:
        return np.asarray(self.vertices, complex)

    @property
    def representative(self) -> complex:
        v = self._v
        # an interior point: midpoint of a short diagonal-ish chord nudged inward
        c = complex(v.mean())
        if geo.point_in_polygon(c, v):
            return c
        for i in range(len(v)):
            m = (v[i - 1] + v[i] + v[(i + 1) % len(v)]) / 3
            if geo.point_in_polygon(m, v):
                return complex(m)
        return complex(v[0])

    @property
    def extent(self) -> float:
        return float(np.max(np.abs(self._v)))

    def _edge_distance(self, z):
        z = np.asarray(z, complex)
        v = self._v
        d = geo.point_segment_distance(z[..., None], v, np.roll(v, -1))
        return d.min(axis=-1)

    def contains(self, z):
        z = np.asarray(z, complex)
        return geo.point_in_polygon(z, self._v) | (self._edge_distance(z) == 0)

    def distance(self, z):
        z = np.asarray(z, complex)
        return np.where(self.contains(z), 0.0, self._edge_distance(z))

    def signed_distance(self, z):
        z = np.asarray(z, complex)
        d = self._edge_distance(z)
        return np.where(geo.point_in_polygon(z, self._v), -d, d)

    def segment_distance(self, a, b):
        a = np.asarray(a, complex)
        b = np.asarray(b, complex)
        v = self._v
        d = geo.segment_segment_distance(a[..., None], b[..., None], v, np.roll(v, -1)).min(axis=-1)
        inside = geo.point_in_polygon(a, v)
        return np.where(inside, 0.0, d)

    def box_distance(self, x0, y0, x1, y1):
        x0, y0, x1, y1 = np.broadcast_arrays(*(np.asarray(t, float) for t in (x0, y0, x1, y1)))
        corners = [x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1]
        best = np.full(x0.shape, np.inf)
        for k in range(4):
            best = np.minimum(best, self.segment_distance(corners[k], corners[(k + 1) % 4]))
        v = self._v
        inside_box = ((v.real >= x0[..., None]) & (v.real <= x1[..., None])
                      & (v.imag >= y0[..., None]) & (v.imag <= y1[..., None])).any(axis=-1)
        return np.where(inside_box, 0.0, best)

    def probes(self, count: int = 8) -> np.ndarray:
        v = self._v
        rep = self.representative
        idx = np.linspace(0, len(v), count, endpoint=False).astype(int)
        ring = rep + 0.999 * (v[idx] - rep)
        ring = ring[geo.point_in_polygon(ring, v)]
        return np.concatenate([[rep], ring])

    def singular_distance(self, z):
        z = np.asarray(z, complex)
        v = self._v
        a = v
        b = np.roll(v, -1)
        foot, t = geo.closest_point_on_segment(z[..., None], a, b)
        d = np.abs(z[..., None] - foot)
        k = np.argmin(d, axis=-1)
        near = np.take_along_axis(foot, k[..., None], axis=-1)[..., 0]
        tk = np.take_along_axis(t, k[..., None], axis=-1)[..., 0]
        delta = np.abs(z - near)
        with np.errstate(divide="ignore", invalid="ignore"):
            grad = (z - near) / delta
            at_vertex = (tk <= 0) | (tk >= 1)
            lap = np.where(at_vertex, 1.0 / delta, 0.0)
        return delta, grad, lap

    def to_json(self) -> dict:
        return {"kind": "polygon", "vertices": [_xy(v) for v in self.vertices]}


@dataclass(frozen=True)
class Cap:
    """The closed set ``{|z| >= radius}`` together with infinity."""

    radius: float
    kind = "unbounded_cap"
    point_count = math.inf

    def __post_init__(self):
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise InvalidComponent("cap radius must be positive")

    @property
    def representative(self) -> complex:
        return complex(2 * self.radius)

    def distance(self, z):
        return np.maximum(self.radius - np.abs(np.asarray(z, complex)), 0.0)

    def signed_distance(self, z):
        return self.radius - np.abs(np.asarray(z, complex))

    def contains(self, z):
        return np.abs(np.asarray(z, complex)) >= self.radius

    def segment_distance(self, a, b):
        return np.maximum(self.radius - np.maximum(np.abs(a), np.abs(b)), 0.0)

    def box_distance(self, x0, y0, x1, y1):
        far = np.maximum(np.hypot(x0, y0), np.hypot(x1, y0))
        far = np.maximum(far, np.maximum(np.hypot(x1, y1), np.hypot(x0, y1)))
        return np.maximum(self.radius - far, 0.0)

    def probes(self, count: int = 8) -> np.ndarray:
        ang = 2 * np.pi * np.arange(count) / count
        return 1.001 * self.radius * np.exp(1j * ang)

    def singular_distance(self, z):
        z = np.asarray(z, complex)
        R = self.radius
        delta = (R * R - (z.real ** 2 + z.imag ** 2)) / (2 * R)
        return delta, -z / R, np.full(z.shape, -2.0 / R)

    def to_json(self) -> dict:
        return {"kind": "unbounded_cap", "radius": self.radius}


ComplementComponent = Union[Disk, Point, Polygon, Cap]


def component_distance(p: ComplementComponent, q: ComplementComponent) -> float:
    """Euclidean distance between two closed components (0 if they meet)."""
    if isinstance(q, Cap) and not isinstance(p, Cap):
        p, q = q, p
    if isinstance(p, Cap):
        if isinstance(q, Cap):
            return 0.0
        return max(p.radius - q.extent, 0.0)
    if isinstance(p, Disk):
        if isinstance(q, Disk):
            return max(abs(p.center - q.center) - p.radius - q.radius, 0.0)
        return max(float(q.distance(p.center)) - p.radius, 0.0)
    if isinstance(p, Point):
        return float(q.distance(p.location))
    # polygon against point/disk/polygon
    if isinstance(q, (Point, Disk)):
        return component_distance(q, p)
    a = p._v
    b = q._v
    d = geo.segment_segment_distance(a[:, None], np.roll(a, -1)[:, None], b[None, :], np.roll(b, -1)[None, :])
    if geo.point_in_polygon(a[0], b) or geo.point_in_polygon(b[0], a):
        return 0.0
    return float(d.min())


def component_from_json(rec: dict) -> ComplementComponent:
    kind = rec.get("kind")
    try:
        if kind == "disk":
            return Disk(_as_complex(rec["center"]), float(rec["radius"]))
        if kind == "point":
            return Point(_as_complex(rec["location"]))
        if kind == "polygon":
            return Polygon(tuple(_as_complex(v) for v in rec["vertices"]))
        if kind in ("unbounded_cap", "cap"):
            return Cap(float(rec["radius"]))
    except KeyError as exc:
        raise InvalidComponent(f"component {kind!r} missing field {exc}") from None
    raise InvalidComponent(f"unknown component kind {kind!r}")


@dataclass(frozen=True)
class Domain:
    components: tuple
    min_gap: float = DEFAULT_MIN_GAP

    @property
    def cap(self):
        for c in self.components:
            if isinstance(c, Cap):
                return c
        return None

    @property
    def cap_index(self):
        for i, c in enumerate(self.components):
            if isinstance(c, Cap):
                return i
        return None

    @property
    def bounded_indices(self) -> tuple:
        return tuple(i for i, c in enumerate(self.components) if not isinstance(c, Cap))

    @property
    def connectivity(self) -> int:
        """Number of complement components (infinity counts when there is no cap)."""
        return len(self.components) + (0 if self.cap is not None else 1)

    @property
    def point_indices(self) -> tuple:
        return tuple(i for i, c in enumerate(self.components) if isinstance(c, Point))

    @property
    def is_degenerate(self) -> bool:
        return bool(self.point_indices) or self.cap is None

    @property
    def window_radius(self) -> float:
        cap = self.cap
        if cap is not None:
            return cap.radius
        return 1.5 * max(c.extent for c in self.components) + 1.0

    def distance(self, z, indices: Iterable[int] | None = None):
        """Euclidean distance from ``z`` to the complement (or to the given components)."""
        z = np.asarray(z, complex)
        idx = range(len(self.components)) if indices is None else indices
        out = np.full(z.shape, np.inf)
        for i in idx:
            out = np.minimum(out, self.components[i].distance(z))
        return out

    def contains(self, z):
        """True where ``z`` lies in U (strictly off every component)."""
        return self.distance(z) > 0

    def segment_distance(self, a, b, indices=None):
        a = np.asarray(a, complex)
        b = np.asarray(b, complex)
        idx = range(len(self.components)) if indices is None else indices
        out = np.full(np.broadcast(a, b).shape, np.inf)
        for i in idx:
            out = np.minimum(out, self.components[i].segment_distance(a, b))
        return out

    def to_json(self) -> dict:
        return {"components": [c.to_json() for c in self.components]}

    def content_hash(self) -> str:
        text = json.dumps(self.to_json(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()


def make_domain(components: Sequence[ComplementComponent], min_gap: float = DEFAULT_MIN_GAP) -> Domain:
    """Validate ``components`` and return an immutable :class:`Domain`.

    Raises ``OverlappingComponents`` when two components are closer than
    ``min_gap``, ``BadCap`` for several caps or a cap that does not enclose
    every bounded component, and ``NotHyperbolic`` when the complement has
    fewer than three points.
    """
    comps = tuple(components)
    if not comps:
        raise ValueError("a domain needs at least one complement component")
    caps = [c for c in comps if isinstance(c, Cap)]
    if len(caps) > 1:
        raise BadCap("at most one unbounded cap is allowed")
    if caps:
        R = caps[0].radius
        for c in comps:
            if not isinstance(c, Cap) and c.extent >= R:
                raise BadCap(f"component {c.to_json()} is not strictly inside D(0, {R})")
    for (i, p), (j, q) in itertools.combinations(enumerate(comps), 2):
        gap = component_distance(p, q)
        if gap < min_gap:
            raise OverlappingComponents(f"components {i} and {j} are {gap:.3g} apart")
    points = sum(c.point_count for c in comps) + (0 if caps else 1)
    if points < 3:
        raise NotHyperbolic("the complement must contain at least three points")
    return Domain(comps, min_gap)


def domain_from_json(data: dict) -> Domain:
    if "components" not in data or not isinstance(data["components"], list):
        raise InvalidComponent("domain config needs a 'components' array")
    return make_domain([component_from_json(r) for r in data["components"]],
                       float(data.get("min_gap", DEFAULT_MIN_GAP)))


def load_domain(path) -> Domain:
    with open(path) as fh:
        return domain_from_json(json.load(fh))


@dataclass(frozen=True)
class Separation:
    """Partition of complement component indices; ``F`` holds infinity."""

    E: frozenset
    F: frozenset

    def to_json(self) -> dict:
        return {"E": sorted(self.E), "F": sorted(self.F)}

    @property
    def label(self) -> str:
        return "E=" + ",".join(str(i) for i in sorted(self.E))


def _side_points(domain: Domain, side: Iterable[int], with_infinity: bool) -> float:
    return sum(domain.components[i].point_count for i in side) + (1 if with_infinity else 0)


def make_separation(domain: Domain, e_indices: Iterable[int]) -> Separation:
    E = frozenset(int(i) for i in e_indices)
    all_idx = frozenset(range(len(domain.components)))
    if not E:
        raise TrivialSeparation("E is empty")
    if not E <= all_idx:
        raise IndexError(f"component indices out of range: {sorted(E - all_idx)}")
    if domain.cap_index is not None and domain.cap_index in E:
        raise TrivialSeparation("the unbounded cap must lie on the F side")
    F = all_idx - E
    infinity_in_F = domain.cap is None
    if not F and not infinity_in_F:
        raise TrivialSeparation("F is empty")
    if _side_points(domain, E, False) < 2:
        raise TrivialSeparation("E is a single point")
    if _side_points(domain, F, infinity_in_F) < 2:
        raise TrivialSeparation("F is a single point")
    return Separation(E, F)


def gap_distance(domain: Domain, sep: Separation) -> float:
    """Euclidean distance between the closed sets E and F."""
    return min(component_distance(domain.components[i], domain.components[j])
               for i in sep.E for j in sep.F) if sep.F else math.inf
