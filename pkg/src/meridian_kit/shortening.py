"""Discrete hyperbolic geodesics by constrained length minimisation.

A closed polygon is shortened by L-BFGS on its vertex coordinates.  Every
accepted step moves each vertex by less than half its distance to the
boundary and is checked to sweep no complement component, so the whole
evolution is a homotopy in U.  The polygon is periodically resampled so
that segments stay shorter than both a Euclidean and a hyperbolic step.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import geometry as geo
from .curves import PolyCurve, aligned_distance, resample_uniform
from .domain import Cap, Disk, Domain, Point
from .errors import CurveMeetsComplement, FieldDomainMismatch
from .metric import GAUSS_POINTS, DensityField, segment_lengths
from .topology import homology_class

CONVERGED = "Converged"
PUNCTURE_COLLAPSE = "PunctureCollapse"
MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class ShortenOptions:
    """Tuning knobs for :func:`shorten`.

    ``h_curve`` defaults to twice the metric grid spacing.
    """

    tol: float = 1e-4
    max_iter: int = 3000
    collapse_threshold: float = 0.05
    contractible_threshold: float = 1e-3
    h_curve: float | None = None
    hyp_step: float = 0.2
    resample_every: int = 40
    memory: int = 8
    min_vertices: int = 12
    quadrature: int = 4


@dataclass(frozen=True, eq=False)
class ShorteningResult:
    curve: PolyCurve
    length: float
    status: str
    residual: float
    history: tuple
    iterations: int = 0
    puncture: int | None = None
    collapse_log_scale: float = 0.0
    seed_index: int = 0
    multiplicity: int = 1

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "puncture": self.puncture,
            "length": self.length,
            "residual": self.residual,
            "iterations": self.iterations,
            "collapse_log_scale": self.collapse_log_scale,
            "seed_index": self.seed_index,
            "multiplicity": self.multiplicity,
            "history": list(self.history),
            "curve": self.curve.to_json(),
        }


# --------------------------------------------------------------------------
# length functional

def length_and_gradient(v: np.ndarray, field: DensityField, points: int = 4):
    """Quadrature length of the closed polygon ``v`` and its gradient per vertex."""
    x, w = GAUSS_POINTS[points]
    t = 0.5 * (x + 1)
    w = 0.5 * w
    a = v
    b = np.roll(v, -1)
    d = b - a
    ell = np.abs(d)
    pts = a[:, None] + t[None, :] * d[:, None]
    u, gu = field.log_density(pts, grad=True)
    wl = np.exp(u) * w
    mean_lam = wl.sum(axis=1)
    # exactly rounded, so dropping a zero-length segment is length-neutral
    total = math.fsum(ell * mean_lam)
    unit = np.divide(d, ell, out=np.zeros_like(d), where=ell > 0)
    gl = wl * gu
    ga = ell * (gl * (1 - t)).sum(axis=1) - mean_lam * unit
    gb = ell * (gl * t).sum(axis=1) + mean_lam * unit
    return total, ga + np.roll(gb, 1), mean_lam


def _curve_length(v, field, points):
    return math.fsum(segment_lengths(v, np.roll(v, -1), field, points))


def _normal_part(v, g):
    """Component of the per-vertex gradient normal to the chord through the neighbours."""
    chord = np.roll(v, -1) - np.roll(v, 1)
    n = 1j * np.divide(chord, np.abs(chord), out=np.zeros_like(chord), where=chord != 0)
    return (g.real * n.real + g.imag * n.imag) * n


def geodesic_residual(curve: PolyCurve, field: DensityField, points: int = 4) -> float:
    """Largest discrete geodesic-curvature proxy ``|grad_v L . n_v| / (lambda_v^2 l_v)``.

    ``n_v`` is the unit normal to the chord through the neighbours of v and
    ``l_v`` the mean length of the two segments at v, so the ratio
    approximates the hyperbolic curvature at that vertex.  The tangential
    part of the gradient only redistributes vertices along the curve and is
    ignored.
    """
    v = curve.vertices
    _, g, mean_lam = length_and_gradient(v, field, points)
    ell = np.abs(np.roll(v, -1) - v)
    lv = 0.5 * (ell + np.roll(ell, 1))
    lam_v = 0.5 * (mean_lam + np.roll(mean_lam, 1))
    return float(np.max(np.abs(_normal_part(v, g)) / (lam_v ** 2 * lv)))


def open_path_residual(points: np.ndarray, field: DensityField, quad: int = 4) -> float:
    """Residual at the interior vertices of an open path with pinned endpoints."""
    v = np.asarray(points, complex)
    x, w = GAUSS_POINTS[quad]
    t = 0.5 * (x + 1)
    w = 0.5 * w
    a, b = v[:-1], v[1:]
    d = b - a
    ell = np.abs(d)
    pts = a[:, None] + t[None, :] * d[:, None]
    u, gu = field.log_density(pts, grad=True)
    wl = np.exp(u) * w
    mean_lam = wl.sum(axis=1)
    unit = d / ell
    ga = ell * (wl * gu * (1 - t)).sum(axis=1) - mean_lam * unit
    gb = ell * (wl * gu * t).sum(axis=1) + mean_lam * unit
    g = ga[1:] + gb[:-1]
    lv = 0.5 * (ell[1:] + ell[:-1])
    lam_v = 0.5 * (mean_lam[1:] + mean_lam[:-1])
    return float(np.max(np.abs(g) / (lam_v ** 2 * lv)))


# --------------------------------------------------------------------------
# homotopy gate

def _hull_meets(domain: Domain, a, b, c, d) -> bool:
    for comp in domain.components:
        if isinstance(comp, Cap):
            if np.any(np.maximum(np.abs(a), np.abs(c)) >= comp.radius):
                return True
        elif isinstance(comp, Point):
            if np.any(geo.quad_hull_distance(comp.location, a, b, c, d) <= 0):
                return True
        elif isinstance(comp, Disk):
            if np.any(geo.quad_hull_distance(comp.center, a, b, c, d) <= comp.radius):
                return True
        else:
            verts = comp._v
            if np.any(geo.quad_hull_distance(verts[:, None], a, b, c, d) <= 0):
                return True
            for p, q in ((a, b), (a, c), (a, d), (b, c), (b, d), (c, d)):
                if np.any(comp.segment_distance(p, q) <= 0):
                    return True
    return False


def step_cap_preserves_homotopy(curve: PolyCurve, proposed: PolyCurve, domain: Domain) -> bool:
    """Is the straight-line interpolation from ``curve`` to ``proposed`` a homotopy in U?

    Each vertex must move less than its distance to the boundary and no
    quadrilateral swept by a segment may meet a complement component.
    """
    old = curve.vertices
    new = proposed.vertices
    if len(old) != len(new):
        raise ValueError("curves must have equal vertex counts")
    if np.any(np.abs(new - old) >= domain.distance(old)):
        return False
    return not _hull_meets(domain, old, np.roll(old, -1), new, np.roll(new, -1))


# --------------------------------------------------------------------------
# shortening

def _resample(v, field, opts, h_curve):
    a = v
    b = np.roll(v, -1)
    ell = np.abs(b - a)
    seg = segment_lengths(a, b, field, opts.quadrature)
    cost = np.maximum(ell / h_curve, seg / opts.hyp_step)
    n = max(opts.min_vertices, int(math.ceil(cost.sum())))
    return resample_uniform(v, n, weights=np.maximum(cost, 1e-300)), cost


def _remesh(v, field, domain, hc0, opts, h_curve, L):
    """Drop near-coincident vertices, else resample; ``None`` unless the length does not grow."""
    ell = np.abs(np.roll(v, -1) - v)
    short = ell < 1e-3 * h_curve
    tries = []
    if short.any() and (~short).sum() >= 3:
        # dropping either end of each short segment
        tries += [v[~short], v[~np.roll(short, 1)]]
    tries.append(_resample(v, field, opts, h_curve)[0])
    for nv in tries:
        cand = PolyCurve(nv)
        if np.any(domain.segment_distance(*cand.segments()) <= 0) or homology_class(cand, domain) != hc0:
            continue
        Ln, gn, mln = length_and_gradient(nv, field, opts.quadrature)
        if Ln <= L:
            return nv, Ln, gn, mln
    return None


def _needs_resample(cost) -> bool:
    return bool(cost.max() > 1.5 or cost.min() < 0.25)


def _collapse_length(v, p, a_model, K, points):
    x, w = GAUSS_POINTS[points]
    t = 0.5 * (x + 1)
    w = 0.5 * w
    d = np.roll(v, -1) - v
    pts = v[:, None] + t[None, :] * d[:, None]
    rho = np.abs(pts - p)
    dens = 1.0 / (rho * (a_model + K - np.log(rho)))
    return float(np.abs(d) @ (dens @ w))


def _analytic_collapse(v, patch, threshold, points):
    """Scale exponent ``K`` with the image under ``z -> p + e^-K (z - p)`` shorter than ``threshold``.

    Inside the patch the metric is exactly the punctured-disk model, whose
    length functional transforms explicitly under dilation about ``p``.
    """
    p, a = patch.center, patch.a
    target = 0.99 * threshold
    lo, hi = 0.0, 1.0
    while _collapse_length(v, p, a, hi, points) > target:
        lo, hi = hi, 2 * hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _collapse_length(v, p, a, mid, points) > target:
            lo = mid
        else:
            hi = mid
    return hi, _collapse_length(v, p, a, hi, points)


def _unit_puncture(domain, hc):
    nz = [(i, w) for i, w in zip(hc.indices, hc.windings) if w]
    if len(nz) == 1 and abs(nz[0][1]) == 1 and nz[0][0] in domain.point_indices:
        return nz[0][0]
    return None


def _check_field(field: DensityField, domain: Domain):
    if field.domain is not domain and field.domain.content_hash() != domain.content_hash():
        raise FieldDomainMismatch("density field was solved for a different domain")


def _lbfgs_direction(g, S, Y, precond):
    q = g.copy()
    alphas = []
    for s, y in reversed(list(zip(S, Y))):
        rho = 1.0 / np.dot(y, s)
        al = rho * np.dot(s, q)
        alphas.append((rho, al, s, y))
        q -= al * y
    r = precond * q
    for rho, al, s, y in reversed(alphas):
        be = rho * np.dot(y, r)
        r += s * (al - be)
    return -r


def shorten(curve: PolyCurve, field: DensityField, domain: Domain,
            options: ShortenOptions | None = None, **overrides) -> ShorteningResult:
    """Shorten ``curve`` within its homotopy class in U.

    Stops with ``Converged`` when the geodesic residual drops below
    ``tol``; with ``PunctureCollapse`` when the curve is a loop around a
    single puncture and has been drawn into its model patch (the reported
    length is that of a dilated copy below ``collapse_threshold``); and
    with ``MaxIterations`` otherwise, including contractible loops that
    shrink below ``contractible_threshold``.
    """
    opts = replace(options or ShortenOptions(), **overrides)
    _check_field(field, domain)
    if np.any(domain.segment_distance(*curve.segments()) <= 0):
        raise CurveMeetsComplement("seed curve meets the complement")
    h_curve = opts.h_curve or 2 * field.h
    hc0 = homology_class(curve, domain)
    puncture = _unit_puncture(domain, hc0)
    patch = next((p for p in field.patches if p.index == puncture), None)

    v, cost = _resample(curve.vertices, field, opts, h_curve)
    cand = PolyCurve(v)
    if np.any(domain.segment_distance(*cand.segments()) <= 0) or homology_class(cand, domain) != hc0:
        v = curve.refined(4).vertices
    L, g, mean_lam = length_and_gradient(v, field, opts.quadrature)
    history = [L]
    S, Y = [], []
    status = MAX_ITERATIONS
    residual = float("inf")
    since_resample = 0
    it = 0
    for it in range(1, opts.max_iter + 1):
        cur = PolyCurve(v)
        ell = np.abs(np.roll(v, -1) - v)
        lv = 0.5 * (ell + np.roll(ell, 1))
        lam_v = 0.5 * (mean_lam + np.roll(mean_lam, 1))
        gn_v = _normal_part(v, g)
        residual = float(np.max(np.abs(gn_v) / (lam_v ** 2 * lv)))
        if residual < opts.tol:
            status = CONVERGED
            break
        if patch is not None and np.max(np.abs(v - patch.center)) < 0.75 * patch.radius:
            if L < opts.collapse_threshold:
                K, Lc = 0.0, L
            else:
                K, Lc = _analytic_collapse(v, patch, opts.collapse_threshold, opts.quadrature)
                history.append(Lc)
            return ShorteningResult(cur, Lc, PUNCTURE_COLLAPSE, residual, tuple(history), it,
                                    puncture, K)
        if puncture is None and hc0.is_zero() and L < opts.contractible_threshold:
            break

        # resampling keeps the polygon resolution matched to the metric
        since_resample += 1
        if since_resample >= opts.resample_every:
            since_resample = 0
            nv, _ = _resample(v, field, opts, h_curve)
            cost = np.maximum(np.abs(np.roll(v, -1) - v) / h_curve,
                              segment_lengths(v, np.roll(v, -1), field, opts.quadrature) / opts.hyp_step)
            if _needs_resample(cost):
                cand = PolyCurve(nv)
                if np.all(domain.segment_distance(*cand.segments()) > 0) \
                        and homology_class(cand, domain) == hc0:
                    Ln, gn, mln = length_and_gradient(nv, field, opts.quadrature)
                    if Ln <= L:
                        v, L, g, mean_lam = nv, Ln, gn, mln
                        history.append(L)
                        S, Y = [], []
                        continue

        # only the normal part moves the curve; spacing is left to resampling
        xg = np.concatenate([gn_v.real, gn_v.imag])
        precond_v = 1.0 / (lam_v * (1.0 / np.maximum(ell, 1e-300) + 1.0 / np.maximum(np.roll(ell, 1), 1e-300)))
        precond = np.concatenate([precond_v, precond_v])
        direction = _lbfgs_direction(xg, S, Y, precond) if S else -precond * xg
        if np.dot(direction, xg) >= 0:
            S, Y = [], []
            direction = -precond * xg
        dz = direction[:len(v)] + 1j * direction[len(v):]
        delta = domain.distance(v)
        mag = np.abs(dz)
        cap = 0.5 * delta
        scale = np.where(mag > cap, cap / np.maximum(mag, 1e-300), 1.0)
        dz = dz * scale
        slope = float(np.dot(np.concatenate([dz.real, dz.imag]), xg))
        if slope >= 0:
            dz = -(precond_v * gn_v)
            mag = np.abs(dz)
            dz = dz * np.where(mag > cap, cap / np.maximum(mag, 1e-300), 1.0)
            slope = float(np.dot(np.concatenate([dz.real, dz.imag]), xg))
            S, Y = [], []
        step = 1.0
        accepted = False
        for _ in range(40):
            nv = v + step * dz
            cand = PolyCurve(nv)
            if step_cap_preserves_homotopy(cur, cand, domain):
                Ln = _curve_length(nv, field, opts.quadrature)
                if Ln <= L + 1e-4 * step * slope:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            if S:
                S, Y = [], []
                continue
            # a stalled search usually means near-coincident vertices; remesh if that is not longer
            remeshed = _remesh(v, field, domain, hc0, opts, h_curve, L)
            if remeshed is None:
                break
            v, L, g, mean_lam = remeshed
            history.append(L)
            continue
        # keep the length that passed the descent test so the history is monotone
        _, gn, mln = length_and_gradient(nv, field, opts.quadrature)
        sv = np.concatenate([(nv - v).real, (nv - v).imag])
        gnn = _normal_part(nv, gn)
        yv = np.concatenate([(gnn - gn_v).real, (gnn - gn_v).imag])
        if np.dot(sv, yv) > 1e-12 * np.linalg.norm(sv) * np.linalg.norm(yv):
            S.append(sv)
            Y.append(yv)
            if len(S) > opts.memory:
                S.pop(0)
                Y.pop(0)
        v, L, g, mean_lam = nv, Ln, gn, mln
        history.append(L)
    return ShorteningResult(PolyCurve(v), float(L), status, residual, tuple(history), it)


def _shorten_job(args):
    k, seed, field, domain, options = args
    return replace(shorten(seed, field, domain, options), seed_index=k)


def dedupe_results(results, tol: float):
    """Merge results closer than ``tol`` (in seed order), then sort by length."""
    kept = []
    for r in sorted(results, key=lambda r: r.seed_index):
        match = None
        for k, other in enumerate(kept):
            if r.status == PUNCTURE_COLLAPSE or other.status == PUNCTURE_COLLAPSE:
                if r.status == other.status and r.puncture == other.puncture:
                    match = k
                    break
                continue
            if aligned_distance(r.curve, other.curve) < tol:
                match = k
                break
        if match is None:
            kept.append(r)
        else:
            other = kept[match]
            best = r if r.length < other.length else other
            kept[match] = replace(best, seed_index=other.seed_index,
                                  multiplicity=other.multiplicity + 1)
    return sorted(kept, key=lambda r: (r.length, r.seed_index))


def multi_start_shorten(seeds, field: DensityField, domain: Domain,
                        options: ShortenOptions | None = None, jobs: int = 1,
                        dedup_tol: float | None = None) -> list:
    """Shorten every seed and return the distinct results sorted by length.

    Results are merged when their aligned distance is below ``dedup_tol``
    (default three curve resolutions).  Output does not depend on ``jobs``.
    """
    seeds = list(seeds)
    if not seeds:
        return []
    opts = options or ShortenOptions()
    tol = dedup_tol if dedup_tol is not None else 3 * (opts.h_curve or 2 * field.h)
    tasks = [(k, s, field, domain, opts) for k, s in enumerate(seeds)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_shorten_job, tasks))
    else:
        results = [_shorten_job(t) for t in tasks]
    return dedupe_results(results, tol)
