"""Meridian classes of finitely connected domains and their geodesics.

A meridian is a shortest simple closed geodesic separating a given pair
(E, F) of complement sets.  Classes are the nonempty subsets E of bounded
components (the unbounded cap always sits in F), so an n-connected domain
has ``2**(n-1) - 1`` of them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np
import shapely
from shapely.geometry import LineString

from . import geometry as geo
from .curves import PolyCurve
from .domain import Domain, Separation, component_distance, make_separation
from .errors import (DegenerateDomain, DomainError, MeridianKitError, NoPath,
                     NotSimpleAfterShortening, PunctureCollapseError)
from .metric import DensityField, hyperbolic_length
from .net import clear_path, component_loop, separating_curve
from .shortening import (CONVERGED, PUNCTURE_COLLAPSE, ShortenOptions, ShorteningResult,
                         multi_start_shorten, shorten)
from .topology import (homology_class, is_simple, self_intersections, separates,
                       separates_by_parity, separates_simply, simple_representative,
                       winding_numbers)


def count_classes(n: int) -> int:
    """Number of meridian classes ``2**(n-1) - 1`` of an n-connected domain."""
    if n < 1:
        raise ValueError("connectivity must be at least 1")
    return 2 ** (n - 1) - 1


def count_principal(n: int) -> int:
    """Number of principal classes ``min(n, 2**(n-1) - 1)``."""
    return min(n, count_classes(n))


def enumerate_separations(domain: Domain) -> list:
    """All ``(E, Separation or None)`` pairs in lexicographic order of E.

    E runs over nonempty subsets of bounded components; ``None`` marks a
    trivial split (one side is a single point).
    """
    idx = domain.bounded_indices
    out = []
    for k in range(1, len(idx) + 1):
        for E in itertools.combinations(idx, k):
            try:
                sep = make_separation(domain, E)
            except DomainError:
                sep = None
            out.append((tuple(E), sep))
    out.sort(key=lambda item: item[0])
    return out


def is_principal(domain: Domain, sep: Separation) -> bool:
    """One side is a single component (infinity counts on the F side)."""
    f_size = len(sep.F) + (1 if domain.cap is None else 0)
    return len(sep.E) == 1 or f_size == 1


@dataclass(frozen=True, eq=False)
class MeridianReport:
    separation: Separation
    curve: PolyCurve
    length: float
    simple: bool
    principal: bool
    unique_evidence: int
    nesting_ok: bool = True
    residual: float = float("nan")
    status: str = CONVERGED
    homology: tuple = ()
    candidate_lengths: tuple = ()
    candidates: tuple = field(default=(), repr=False)
    simple_curve: PolyCurve | None = field(default=None, repr=False)
    crossings_resolved: int = 0

    @property
    def nesting_curve(self) -> PolyCurve:
        return self.simple_curve if self.simple_curve is not None else self.curve

    def to_json(self, with_curve: bool = True) -> dict:
        out = {
            "E": sorted(self.separation.E),
            "F": sorted(self.separation.F),
            "length": self.length,
            "simple": self.simple,
            "principal": self.principal,
            "unique_evidence": self.unique_evidence,
            "nesting_ok": self.nesting_ok,
            "residual": self.residual,
            "status": self.status,
            "homology": list(self.homology),
            "candidate_lengths": list(self.candidate_lengths),
            "crossings_resolved": self.crossings_resolved,
        }
        if with_curve:
            out["curve"] = self.curve.to_json()
            if self.crossings_resolved:
                out["simple_curve"] = self.simple_curve.to_json()
        return out


def meridian_seeds(domain: Domain, sep: Separation, count: int = 8, random_seed: int = 0) -> list:
    """Net-construction seeds; the first uses shortest corridors, the rest random ones."""
    seeds = [separating_curve(domain, sep)]
    for k in range(1, count):
        seeds.append(separating_curve(domain, sep, rng=np.random.default_rng([random_seed, k])))
    return seeds


def resolution_scale(field: DensityField, options: ShortenOptions | None = None) -> float:
    """Distance below which two strands of a discrete geodesic are not resolved."""
    opts = options or ShortenOptions()
    return 0.25 * (opts.h_curve or 2 * field.h)


def certify_simple(curve: PolyCurve, domain: Domain, field: DensityField, tau: float,
                   length_rtol: float = 1e-3):
    """A simple curve standing in for ``curve``, and the number of crossings removed.

    A simple curve is returned unchanged.  Otherwise the crossings must all
    come from strands closer than ``tau``: the closing of the odd-winding
    region has to give a simple curve in U with the same homology, within
    Hausdorff distance ``2 tau`` and with hyperbolic length within
    ``length_rtol``.  Returns ``(None, count)`` when that fails.
    """
    rep = self_intersections(curve)
    if rep.simple:
        return curve, 0
    cand = simple_representative(curve, tau)
    if cand is None or not is_simple(cand):
        return None, len(rep)
    if np.any(domain.segment_distance(*cand.segments()) <= 0):
        return None, len(rep)
    if homology_class(cand, domain) != homology_class(curve, domain):
        return None, len(rep)
    line = lambda c: LineString(np.c_[np.r_[c.vertices, c.vertices[:1]].real,
                                      np.r_[c.vertices, c.vertices[:1]].imag])
    if shapely.hausdorff_distance(line(curve), line(cand)) > 2 * tau:
        return None, len(rep)
    L0 = hyperbolic_length(curve, field)
    if abs(hyperbolic_length(cand, field) - L0) > length_rtol * L0:
        return None, len(rep)
    return cand, len(rep)


def find_meridian(domain: Domain, sep: Separation, field: DensityField, seeds: int = 8,
                  options: ShortenOptions | None = None, random_seed: int = 0, jobs: int = 1,
                  extra_seeds=(), dedup_tol: float | None = None) -> MeridianReport:
    """Shortest simple geodesic separating ``sep`` from a multi-start search.

    ``unique_evidence`` is the number of distinct converged simple
    geodesics found; it is evidence about uniqueness, not a proof.
    """
    if len(sep.E) == 1 and sep.E <= set(domain.point_indices):
        raise PunctureCollapseError("E is a single puncture; loops around it collapse")
    pool = meridian_seeds(domain, sep, seeds, random_seed) + list(extra_seeds)
    results = multi_start_shorten(pool, field, domain, options, jobs=jobs, dedup_tol=dedup_tol)
    tau = resolution_scale(field, options)
    good, certs = [], []
    for r in results:
        if r.status != CONVERGED:
            continue
        simple_curve, count = certify_simple(r.curve, domain, field, tau)
        if simple_curve is not None:
            good.append(r)
            certs.append((simple_curve, count))
    if not good:
        converged = [r for r in results if r.status == CONVERGED]
        if converged:
            raise NotSimpleAfterShortening(
                f"no simple geodesic among {len(converged)} converged results for {sep.label}")
        best, cert = results[0], (None, 0)
    else:
        best, cert = good[0], certs[0]
    hc = homology_class(best.curve, domain)
    return MeridianReport(
        separation=sep,
        curve=best.curve,
        length=best.length,
        simple=cert[0] is not None,
        principal=is_principal(domain, sep),
        unique_evidence=len(good),
        residual=best.residual,
        status=best.status,
        homology=hc.windings,
        candidate_lengths=tuple(r.length for r in good),
        candidates=tuple(good),
        simple_curve=cert[0],
        crossings_resolved=cert[1],
    )


# -- nesting -------------------------------------------------------------------

def curves_cross(c1: PolyCurve, c2: PolyCurve) -> bool:
    a1, b1 = c1.segments()
    a2, b2 = c2.segments()
    for k in range(0, len(a1), 256):
        if np.any(geo.segments_intersect(a1[k:k + 256, None], b1[k:k + 256, None], a2, b2)):
            return True
    return False


def _sides(domain: Domain, sep: Separation):
    f = set(sep.F) | ({"inf"} if domain.cap is None else set())
    return set(sep.E), f


def _wrong_side_depth(c1: PolyCurve, c2: PolyCurve, want_inside: bool) -> float:
    """Largest distance to ``c2`` of a vertex of ``c1`` on the wrong side of it."""
    w = winding_numbers(c2, c1.vertices)
    wrong = c1.vertices[(w != 0) != want_inside]
    if wrong.size == 0:
        return 0.0
    a, b = c2.segments()
    return max(float(np.min(geo.point_segment_distance(z, a, b))) for z in wrong)


def nesting_violations(domain: Domain, reports, tol: float = 0.0) -> list:
    """Pairs ``(i, j)`` of report indices breaking the nesting property.

    For a principal meridian ``i`` whose single-component side X is
    strictly contained in a side Y of meridian ``j``, curve ``i`` must lie
    in the face of curve ``j`` holding Y.  Vertices of ``i`` on the wrong
    side count only when they are farther than ``tol`` from curve ``j``,
    so tangential contacts below the curve resolution are tolerated.
    """
    bad = []
    for i, r1 in enumerate(reports):
        if not r1.principal or not r1.simple:
            continue
        e1, f1 = _sides(domain, r1.separation)
        singles = [s for s in (e1, f1) if len(s) == 1]
        for j, r2 in enumerate(reports):
            if i == j or not r2.simple:
                continue
            e2, f2 = _sides(domain, r2.separation)
            for x in singles:
                if x < e2:
                    want_inside = True
                elif x < f2:
                    want_inside = False
                else:
                    continue
                if _wrong_side_depth(r1.nesting_curve, r2.nesting_curve, want_inside) > tol:
                    bad.append((i, j))
    return bad


def flag_nesting(domain: Domain, reports, tol: float = 0.0) -> list:
    """Copies of ``reports`` with ``nesting_ok`` cleared on every violating pair."""
    bad = nesting_violations(domain, reports, tol)
    flagged = {k for pair in bad for k in pair}
    return [r if k not in flagged else replace(r, nesting_ok=False) for k, r in enumerate(reports)]


def principal_system(domain: Domain, field: DensityField, seeds: int = 8,
                     options: ShortenOptions | None = None, random_seed: int = 0,
                     jobs: int = 1) -> list:
    """The principal meridians, checked to be pairwise disjoint and nested.

    Domains with point components raise :class:`DegenerateDomain`, whose
    ``partial`` attribute holds the meridians of the non-principal classes.
    """
    seps = [(E, s) for E, s in enumerate_separations(domain)]
    if domain.point_indices:
        partial = []
        for E, sep in seps:
            if sep is None or is_principal(domain, sep):
                continue
            partial.append(find_meridian(domain, sep, field, seeds, options, random_seed, jobs))
        raise DegenerateDomain(
            f"{len(domain.point_indices)} point component(s): principal system not defined; "
            f"{len(partial)} non-principal classes computed",
            flag_nesting(domain, partial, resolution_scale(field, options)))
    reports = [find_meridian(domain, sep, field, seeds, options, random_seed, jobs)
               for E, sep in seps if sep is not None and is_principal(domain, sep)]
    return flag_nesting(domain, reports, resolution_scale(field, options))


def all_meridians(domain: Domain, field: DensityField, seeds: int = 8,
                  options: ShortenOptions | None = None, random_seed: int = 0,
                  jobs: int = 1) -> list:
    """Meridian reports for every non-trivial class, in lexicographic order of E."""
    reports = []
    for E, sep in enumerate_separations(domain):
        if sep is None:
            continue
        reports.append(find_meridian(domain, sep, field, seeds, options, random_seed, jobs))
    return flag_nesting(domain, reports, resolution_scale(field, options))


# -- separating geodesics outside the simple class ------------------------------------

@dataclass(frozen=True)
class WindingPattern:
    """Seed recipe: a simple curve around ``(E - flipped) | added`` plus
    clockwise loops around the ``flipped`` components."""

    flipped: tuple = ()
    added: tuple = ()

    @property
    def label(self) -> str:
        return f"flip={list(self.flipped)} add={list(self.added)}"


def winding_patterns(domain: Domain, sep: Separation, budget: int = 16, max_flip: int = 3) -> list:
    """Candidate seed recipes in deterministic order, capped at ``budget``.

    Recipes whose base curve would enclose an added F component together
    with an unflipped E component are skipped: a simple base curve puts
    them in one face, so the result could not separate.
    """
    e_idx = sorted(sep.E)
    f_idx = sorted(i for i in sep.F if i in domain.bounded_indices)
    pats = []
    for k in range(0, min(max_flip, len(e_idx)) + 1):
        for flipped in itertools.combinations(e_idx, k):
            rest = [i for i in e_idx if i not in flipped]
            for m in range(0, len(f_idx) + 1):
                for added in itertools.combinations(f_idx, m):
                    if added and rest:
                        continue
                    if not rest and not added:
                        continue
                    pats.append(WindingPattern(tuple(flipped), tuple(added)))
    pats.sort(key=lambda p: (len(p.flipped) + len(p.added), p.flipped, p.added))
    return pats[:budget]


def _splice(base: np.ndarray, loop: np.ndarray, domain: Domain, used: set, clearance: float):
    """Insert ``loop`` into ``base`` through a doubled slit from the nearest usable vertex."""
    d = np.abs(base[:, None] - loop[None, :])
    order = np.argsort(d, axis=None, kind="stable")
    for flat in order[:2000]:
        i, j = np.unravel_index(flat, d.shape)
        if i in used:
            continue
        if domain.segment_distance(base[i], loop[j]) > 0:
            path = np.array([base[i], loop[j]])
            break
    else:
        i, j = np.unravel_index(order[0], d.shape)
        path = clear_path(domain, base[i], loop[j], clearance)
    lp = np.roll(loop, -j)
    go = path[1:-1]
    piece = np.concatenate([[base[i]], go, lp, [lp[0]], go[::-1]])
    new = np.concatenate([base[:i], piece, base[i + 1:]])
    shift = len(piece) - 1
    used = {u if u < i else u + shift for u in used} | {i, i + shift}
    return new, used


def pattern_seed(domain: Domain, sep: Separation, pattern: WindingPattern,
                 rng: np.random.Generator | None = None) -> PolyCurve:
    """Seed curve with winding -1 on flipped, +1 on the rest of E and on added, 0 elsewhere."""
    inside = sorted((set(sep.E) - set(pattern.flipped)) | set(pattern.added))
    outside = frozenset(range(len(domain.components))) - set(inside)
    base_sep = Separation(frozenset(inside), outside)
    base = separating_curve(domain, base_sep, rng=rng).vertices
    used: set = set()
    for c in pattern.flipped:
        loop = component_loop(domain, c).reversed().vertices
        base, used = _splice(base, loop, domain, used, clearance=0.25 * _clearance(domain, c))
    curve = PolyCurve(base)
    want = {i: (1 if i in inside else -1 if i in pattern.flipped else 0) for i in domain.bounded_indices}
    got = homology_class(curve, domain).as_dict()
    if got != want:
        raise NoPath(f"seed for {pattern.label} has windings {got}, expected {want}")
    return curve


def _clearance(domain, index):
    comps = domain.components
    return min(component_distance(comps[index], q) for k, q in enumerate(comps) if k != index)


@dataclass(frozen=True, eq=False)
class SeparatingCandidate:
    pattern: WindingPattern
    result: ShorteningResult
    separates: bool
    separates_by_parity: bool
    separates_simply: bool
    simple: bool
    homology: tuple
    crossings_resolved: int = 0


def separating_candidates(domain: Domain, sep: Separation, field: DensityField,
                          seed_budget: int = 16, options: ShortenOptions | None = None,
                          random_seed: int = 0) -> list:
    """Shorten one seed per winding pattern and classify the resulting geodesics."""
    out = []
    tau = resolution_scale(field, options)
    for pat in winding_patterns(domain, sep, seed_budget):
        try:
            seed = pattern_seed(domain, sep, pat)
        except (NoPath, MeridianKitError):
            continue
        res = shorten(seed, field, domain, options)
        if res.status == PUNCTURE_COLLAPSE:
            continue
        simple_curve, count = certify_simple(res.curve, domain, field, tau)
        # face-wise predicates are read off the resolved curve when there is one
        c = simple_curve if simple_curve is not None else res.curve
        out.append(SeparatingCandidate(
            pat, res, separates(c, domain, sep), separates_by_parity(c, domain, sep),
            separates_simply(c, domain, sep), simple_curve is not None,
            homology_class(c, domain).windings, count if simple_curve is not None else 0))
    return out


def shortest_separating_geodesic(domain: Domain, sep: Separation, field: DensityField,
                                 seed_budget: int = 16, options: ShortenOptions | None = None,
                                 random_seed: int = 0) -> ShorteningResult | None:
    """Shortest converged geodesic separating E from F over all seed patterns.

    Separation is tested face-wise, not by parity.  ``None`` when no
    candidate separates.
    """
    best = best_separating(separating_candidates(domain, sep, field, seed_budget, options, random_seed))
    return best.result if best is not None else None


def best_separating(candidates):
    ok = [c for c in candidates if c.separates and c.result.status == CONVERGED]
    return min(ok, key=lambda c: c.result.length) if ok else None
