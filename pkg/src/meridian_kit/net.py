"""Lattice curves separating two closed sets of complement components.

The plane is tiled by squares of side ``s``.  The boundaries of all squares
meeting E, with shared edges cancelled, form a cycle winding once around E
and never around F; it splits into simple rectilinear curves which are then
merged into a single simple curve by opening corridors between them.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from . import geometry as geo
from .curves import PolyCurve
from .domain import Cap, Domain, Separation, gap_distance
from .errors import MalformedCycle, NoPath

CORRIDOR_ROUNDS = 200


@dataclass(frozen=True)
class LatticeCycle:
    """Cancelled sum of directed lattice edges ``((i, j), (k, l))``.

    Vertex ``(i, j)`` sits at ``offset + s * (i + 1j * j)``.
    """

    s: float
    edges: frozenset
    offset: complex = 0j

    def point(self, ij) -> complex:
        return self.offset + self.s * complex(ij[0], ij[1])

    def degrees(self) -> dict:
        deg = defaultdict(lambda: [0, 0])
        for a, b in self.edges:
            deg[a][1] += 1
            deg[b][0] += 1
        return dict(deg)

    def is_balanced(self) -> bool:
        return all(i == o and i + o in (2, 4) for i, o in self.degrees().values())


def _cell_edges(i, j):
    """Counter-clockwise boundary of lattice cell ``[i, i+1] x [j, j+1]``."""
    c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
    return [(c[k], c[(k + 1) % 4]) for k in range(4)]


def cycle_from_cells(cells, s: float, offset: complex = 0j) -> LatticeCycle:
    """Boundary of the union of ``cells`` (repeated cells count once)."""
    count = defaultdict(int)
    for i, j in sorted(set(cells)):
        for a, b in _cell_edges(i, j):
            if count[(b, a)] > 0:
                count[(b, a)] -= 1
            else:
                count[(a, b)] += 1
    return LatticeCycle(float(s), frozenset(e for e, k in count.items() if k > 0), complex(offset))


def _side_box_distance(domain: Domain, indices, x0, y0, x1, y1):
    out = np.full(np.shape(x0), np.inf)
    for i in indices:
        out = np.minimum(out, domain.components[i].box_distance(x0, y0, x1, y1))
    return out


def _bounded_extent(domain: Domain, indices):
    lo = complex(np.inf, np.inf)
    hi = complex(-np.inf, -np.inf)
    for i in indices:
        c = domain.components[i]
        if isinstance(c, Cap):
            continue
        if hasattr(c, "radius"):
            r, z = c.radius, c.center
        elif hasattr(c, "location"):
            r, z = 0.0, c.location
        else:
            v = c._v
            z = complex(0.5 * (v.real.min() + v.real.max()), 0.5 * (v.imag.min() + v.imag.max()))
            r = 0.5 * max(v.real.max() - v.real.min(), v.imag.max() - v.imag.min())
        lo = complex(min(lo.real, z.real - r), min(lo.imag, z.imag - r))
        hi = complex(max(hi.real, z.real + r), max(hi.imag, z.imag + r))
    return lo, hi


def default_cell_size(domain: Domain, sep: Separation) -> float:
    return gap_distance(domain, sep) / 2


def square_net_cycle(domain: Domain, sep: Separation, s: float | None = None) -> LatticeCycle:
    """Cancelled boundary of every closed lattice cell meeting E."""
    s = default_cell_size(domain, sep) if s is None else float(s)
    lo, hi = _bounded_extent(domain, sep.E)
    i0, i1 = math.floor(lo.real / s) - 1, math.ceil(hi.real / s) + 1
    j0, j1 = math.floor(lo.imag / s) - 1, math.ceil(hi.imag / s) + 1
    I, J = np.meshgrid(np.arange(i0, i1), np.arange(j0, j1), indexing="ij")
    d = _side_box_distance(domain, sep.E, I * s, J * s, (I + 1) * s, (J + 1) * s)
    cells = list(zip(I[d <= 0].tolist(), J[d <= 0].tolist()))
    return cycle_from_cells(cells, s)


def _turn_rank(din, dout) -> int:
    # 0 = left, 1 = straight, 2 = right, 3 = back
    c = din[0] * dout[1] - din[1] * dout[0]
    d = din[0] * dout[0] + din[1] * dout[1]
    if c > 0:
        return 0
    if c == 0 and d > 0:
        return 1
    if c < 0:
        return 2
    return 3


def _simplify(points):
    """Drop vertices where the chain continues straight on."""
    pts = list(points)
    changed = True
    while changed and len(pts) > 3:
        changed = False
        out = []
        n = len(pts)
        for k in range(n):
            p, q, r = pts[k - 1], pts[k], pts[(k + 1) % n]
            if (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]) == 0 and \
                    (q[0] - p[0]) * (r[0] - q[0]) + (q[1] - p[1]) * (r[1] - q[1]) > 0:
                changed = True
                continue
            out.append(q)
        pts = out
    return pts


def decompose_cycle(cycle: LatticeCycle) -> list:
    """Split a balanced cycle into simple closed curves that touch but never cross.

    At a vertex with two outgoing edges the tracer takes the leftmost turn,
    so each curve hugs its own cells and strands meeting at a pinch vertex
    turn away from one another.
    """
    out_edges = defaultdict(list)
    for a, b in cycle.edges:
        out_edges[a].append(b)
    for a, lst in out_edges.items():
        lst.sort()
    for v, (i, o) in cycle.degrees().items():
        if i != o or i not in (1, 2):
            raise MalformedCycle(f"vertex {v} has in-degree {i} and out-degree {o}")
    used = set()
    curves = []
    for start in sorted(cycle.edges):
        if start in used:
            continue
        loop = [start[0]]
        e = start
        while True:
            used.add(e)
            a, b = e
            din = (b[0] - a[0], b[1] - a[1])
            choices = [c for c in out_edges[b] if (b, c) not in used or (b, c) == start]
            if not choices:
                raise MalformedCycle("dangling edge while tracing")
            nxt = min(choices, key=lambda c: (_turn_rank(din, (c[0] - b[0], c[1] - b[1])), c))
            if (b, nxt) == start:
                break
            if (b, nxt) in used:
                raise MalformedCycle("tracing revisited an edge")
            loop.append(b)
            e = (b, nxt)
        pts = _simplify(loop)
        curves.append(PolyCurve(np.array([cycle.point(p) for p in pts])))
    return curves


# --------------------------------------------------------------------------
# merging

@dataclass
class _Raster:
    """Fine cells of side ``t`` indexed ``[p, q]`` with lower-left ``origin + t * (p + iq)``."""

    t: float
    origin: complex
    shape: tuple

    def corners(self):
        P, Q = np.meshgrid(np.arange(self.shape[0]), np.arange(self.shape[1]), indexing="ij")
        x0 = self.origin.real + P * self.t
        y0 = self.origin.imag + Q * self.t
        return x0, y0, x0 + self.t, y0 + self.t

    def centers(self):
        x0, y0, x1, y1 = self.corners()
        return 0.5 * (x0 + x1) + 0.5j * (y0 + y1)


def _cells_inside(curves, centers) -> np.ndarray:
    parity = np.zeros(centers.shape, bool)
    flat = centers.ravel()
    for c in curves:
        inside = np.zeros(flat.shape, bool)
        for k in range(0, len(flat), 8192):
            inside[k:k + 8192] = geo.point_in_polygon(flat[k:k + 8192], c.vertices)
        parity ^= inside.reshape(centers.shape)
    return parity


def _pinches(R: np.ndarray):
    """Lower-left indices of 2x2 blocks with a diagonal-only pattern."""
    a = R[:-1, :-1]
    b = R[1:, :-1]
    c = R[:-1, 1:]
    d = R[1:, 1:]
    diag = (a & d & ~b & ~c) | (b & c & ~a & ~d)
    return np.argwhere(diag)


def _grid_graph(allowed: np.ndarray, weight: np.ndarray):
    """4-neighbour graph on all cells; entering a cell costs its weight, forbidden cells are unreachable."""
    n0, n1 = allowed.shape
    idx = np.arange(allowed.size).reshape(allowed.shape)
    rows, cols, vals = [], [], []
    for sa, sb in (((slice(None, -1), slice(None)), (slice(1, None), slice(None))),
                   ((slice(None), slice(None, -1)), (slice(None), slice(1, None)))):
        u, v = idx[sa].ravel(), idx[sb].ravel()
        for x, y in ((u, v), (v, u)):
            ok = allowed.ravel()[y]
            rows.append(x[ok])
            cols.append(y[ok])
            vals.append(weight.ravel()[y[ok]])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return coo_matrix((vals, (rows, cols)), shape=(allowed.size, allowed.size)).tocsr()


def _shortest_path(allowed, weight, sources, targets):
    """Cells on a cheapest path from any source to any target (both ends included)."""
    graph = _grid_graph(allowed | sources | targets, weight)
    src = np.flatnonzero(sources.ravel())
    dist, pred, origin = dijkstra(graph, directed=True, indices=src, min_only=True,
                                  return_predecessors=True)
    tgt = np.flatnonzero(targets.ravel())
    if tgt.size == 0:
        return None
    best = tgt[np.argmin(dist[tgt])]
    if not np.isfinite(dist[best]):
        return None
    path = []
    k = best
    while k >= 0:
        path.append(k)
        k = pred[k]
    out = np.zeros(allowed.shape, bool)
    out.ravel()[path] = True
    return out


def _boundary_curve(R: np.ndarray, raster: _Raster) -> PolyCurve:
    cells = list(zip(*np.nonzero(R)))
    cyc = cycle_from_cells([(int(p), int(q)) for p, q in cells], raster.t, raster.origin)
    curves = decompose_cycle(cyc)
    if len(curves) != 1:
        raise NoPath(f"region boundary has {len(curves)} components")
    return curves[0]


def merge_to_single(curves, domain: Domain, sep: Separation, s: float,
                    rng: np.random.Generator | None = None) -> PolyCurve:
    """Join nested or disjoint lattice curves into one simple separating curve.

    Works on the region of half-size cells enclosed by the curves (plus
    every half-cell within ``s/4`` of E).  Components of that region are
    linked by corridors of cells staying ``s/4`` away from F, holes
    containing F are opened to the outside by corridors staying ``s/4``
    away from E, empty holes are filled and diagonal pinches repaired.  The
    boundary of the resulting simply connected region is the answer.
    ``rng`` randomises corridor routing; ``None`` gives the shortest route.
    """
    curves = list(curves)
    if len(curves) == 1 and _is_simple_lattice(curves[0]):
        return curves[0]
    return region_curve(curves, domain, sep, s, rng)


def region_curve(curves, domain: Domain, sep: Separation, s: float,
                 rng: np.random.Generator | None = None) -> PolyCurve:
    """Corridor construction of :func:`merge_to_single`, applied unconditionally.

    Unlike the single-curve shortcut this also pushes the curve ``s/4`` away
    from E.
    """
    t = s / 2
    keep = s / 4
    lo, hi = _bounded_extent(domain, domain.bounded_indices)
    for c in curves:
        v = c.vertices
        lo = complex(min(lo.real, v.real.min()), min(lo.imag, v.imag.min()))
        hi = complex(max(hi.real, v.real.max()), max(hi.imag, v.imag.max()))
    margin = 3 * t
    p0 = math.floor((lo.real - margin) / t)
    q0 = math.floor((lo.imag - margin) / t)
    p1 = math.ceil((hi.real + margin) / t)
    q1 = math.ceil((hi.imag + margin) / t)
    raster = _Raster(t, complex(p0 * t, q0 * t), (p1 - p0, q1 - q0))
    x0, y0, x1, y1 = raster.corners()
    dE = _side_box_distance(domain, sep.E, x0, y0, x1, y1)
    f_idx = list(sep.F)
    dF = _side_box_distance(domain, f_idx, x0, y0, x1, y1) if f_idx else np.full(dE.shape, np.inf)
    must = dE < keep           # never removed
    may_add = dF >= keep       # may join the region
    may_remove = ~must
    R = _cells_inside(curves, raster.centers()) | must
    if np.any(R & ~may_add):
        raise NoPath("input curves come closer than s/4 to F")
    if rng is None:
        weight = np.ones(R.shape)
    else:
        weight = 1.0 + rng.random(R.shape)

    for _ in range(CORRIDOR_ROUNDS):
        changed = False
        # diagonal pinches
        for p, q in _pinches(R):
            block = [(p, q), (p + 1, q), (p, q + 1), (p + 1, q + 1)]
            zeros = [b for b in block if not R[b] and may_add[b]]
            ones = [b for b in block if R[b] and may_remove[b]]
            if zeros:
                R[zeros[0]] = True
            elif ones:
                R[ones[0]] = False
            else:
                raise NoPath("unresolvable pinch")
            changed = True
            break
        if changed:
            continue
        # holes: complement components not reaching the raster border
        outside, nout = ndimage.label(~R)
        border = set(np.unique(np.r_[outside[0], outside[-1], outside[:, 0], outside[:, -1]]).tolist())
        holes = [k for k in range(1, nout + 1) if k not in border]
        if holes:
            hole = outside == holes[0]
            if np.all(may_add[hole]):
                R[hole] = True
            else:
                ext = (~R) & np.isin(outside, list(border))
                path = _shortest_path(R & may_remove, weight, hole, ext)
                if path is None:
                    raise NoPath("no corridor from a hole to the outside")
                R[path & R] = False
            continue
        parts, nparts = ndimage.label(R)
        if nparts > 1:
            sizes = ndimage.sum(np.ones_like(parts), parts, index=np.arange(1, nparts + 1))
            first = parts == 1 + int(np.argmax(sizes))
            path = _shortest_path(~R & may_add, weight, first, R & ~first)
            if path is None:
                raise NoPath("no corridor between region components")
            R |= path
            continue
        break
    else:
        raise NoPath("corridor construction did not settle")
    return _boundary_curve(R, raster)


def _is_simple_lattice(curve: PolyCurve) -> bool:
    from .topology import is_simple
    return is_simple(curve)


def separating_curve(domain: Domain, sep: Separation, s: float | None = None,
                     rng: np.random.Generator | None = None, refinements: int = 4) -> PolyCurve:
    """Net construction end to end, halving the cell size on ``NoPath``."""
    s = default_cell_size(domain, sep) if s is None else float(s)
    last = None
    for _ in range(refinements + 1):
        try:
            cyc = square_net_cycle(domain, sep, s)
            return region_curve(decompose_cycle(cyc), domain, sep, s, rng)
        except NoPath as exc:
            last = exc
            s /= 2
    raise NoPath(f"net construction failed after refinement: {last}")


def component_loop(domain: Domain, index: int, rng: np.random.Generator | None = None) -> PolyCurve:
    """Counter-clockwise lattice curve around the single component ``index``.

    Works for point components too, where no valid separation exists.
    """
    others = frozenset(range(len(domain.components))) - {index}
    sep = Separation(frozenset({index}), others)
    s = gap_distance(domain, sep) / 2
    cyc = square_net_cycle(domain, sep, s)
    return region_curve(decompose_cycle(cyc), domain, sep, s, rng)


def clear_path(domain: Domain, a: complex, b: complex, clearance: float) -> np.ndarray:
    """Polyline from ``a`` to ``b`` keeping ``clearance`` away from every component.

    A straight segment is used when possible, otherwise a cheapest route
    through lattice cells of side ``clearance``.
    """
    if domain.segment_distance(a, b) > clearance:
        return np.array([a, b])
    t = clearance
    lo, hi = _bounded_extent(domain, domain.bounded_indices)
    lo = complex(min(lo.real, a.real, b.real), min(lo.imag, a.imag, b.imag))
    hi = complex(max(hi.real, a.real, b.real), max(hi.imag, a.imag, b.imag))
    p0, q0 = math.floor(lo.real / t) - 3, math.floor(lo.imag / t) - 3
    p1, q1 = math.ceil(hi.real / t) + 3, math.ceil(hi.imag / t) + 3
    raster = _Raster(t, complex(p0 * t, q0 * t), (p1 - p0, q1 - q0))
    x0, y0, x1, y1 = raster.corners()
    free = _side_box_distance(domain, range(len(domain.components)), x0, y0, x1, y1) >= clearance / 2
    centers = raster.centers()
    src = np.zeros(free.shape, bool)
    dst = np.zeros(free.shape, bool)
    src[np.unravel_index(np.argmin(np.abs(centers - a)), free.shape)] = True
    dst[np.unravel_index(np.argmin(np.abs(centers - b)), free.shape)] = True
    path = _shortest_path(free, np.ones(free.shape), src, dst)
    if path is None:
        raise NoPath("no clear path between the given points")
    # walk the path cells from a to b
    cells = {tuple(x) for x in np.argwhere(path)}
    cur = tuple(np.argwhere(src)[0])
    order = [cur]
    cells.discard(cur)
    while cells:
        nxt = next((c for c in ((cur[0] + 1, cur[1]), (cur[0] - 1, cur[1]),
                                (cur[0], cur[1] + 1), (cur[0], cur[1] - 1)) if c in cells), None)
        if nxt is None:
            break
        order.append(nxt)
        cells.discard(nxt)
        cur = nxt
    mids = np.array([centers[c] for c in order])
    return np.concatenate([[a], mids, [b]])
