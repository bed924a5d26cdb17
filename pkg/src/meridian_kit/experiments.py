"""Desk-scale reproductions of two counterexample domains.

``thm12`` uses three punctures on the circle of radius ``1 + eps`` between
the closed unit disk and the outside of the circle of radius ``(1 + eps)**2``.
Separating the punctures from the rest, it compares the simple meridian
with the shortest separating geodesic found over winding patterns, and
checks that the inversion ``z -> (1 + eps)**2 / z`` carries that geodesic
to a second one of the same length.

``thm14`` uses two small disks at ``+-3.5i`` between the disk of radius 2
and the outside of the circle of radius 5.  The class separating the small
disks from the rest has two meridians exchanged by ``z -> -z``; every
other class has a unique one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .curves import PolyCurve, aligned_distance
from .domain import Cap, Disk, Domain, Point, make_domain, make_separation
from .meridians import (all_meridians, best_separating, curves_cross, find_meridian,
                        separating_candidates)
from .metric import DensityField, load_or_solve
from .shortening import CONVERGED, ShortenOptions, shorten
from .topology import homology_class, separates, winding_numbers

SCHEMA_VERSION = 1
EPS_SCAN = (0.1, 0.05, 0.02)


@dataclass(frozen=True)
class Assertion:
    """One checked claim.

    ``margin`` is signed so that positive means the claim holds with room
    to spare; for yes/no claims it is +1 or -1.
    """

    name: str
    passed: bool
    margin: float
    tolerance: float
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "margin": self.margin,
                "tolerance": self.tolerance, "detail": self.detail}


def _flag(name, ok, detail=""):
    return Assertion(name, bool(ok), 1.0 if ok else -1.0, 0.0, detail)


@dataclass(frozen=True)
class CurveRecord:
    curve: PolyCurve
    length: float
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"length": self.length, **self.info, "curve": self.curve.to_json()}


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    name: str
    domain: Domain
    params: dict
    curves: dict
    assertions: tuple
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def failures(self) -> list:
        return [a for a in self.assertions if not a.passed]

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.name,
            "passed": self.passed,
            "params": self.params,
            "domain": self.domain.to_json(),
            "assertions": [a.to_json() for a in self.assertions],
            "curves": {k: v.to_json() for k, v in self.curves.items()},
            "extras": self.extras,
        }


# -- three punctures ------------------------------------------------------------------

def build_three_puncture_domain(eps: float) -> Domain:
    """Points ``(1+eps) e^{2 pi i k/3}``, the closed unit disk, and the cap ``|z| >= (1+eps)^2``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    r = 1 + eps
    pts = [Point(complex(r * np.cos(2 * np.pi * k / 3), r * np.sin(2 * np.pi * k / 3)))
           for k in range(3)]
    return make_domain(pts + [Disk(0j, 1.0), Cap(r * r)])


def _field(domain, field_, h, tol, cache_dir):
    if field_ is not None:
        return field_
    return load_or_solve(domain, h, tol=tol, cache_dir=cache_dir)[0]


def _h_curve(field_: DensityField, options: ShortenOptions) -> float:
    return options.h_curve or 2 * field_.h


def invert_curve(curve: PolyCurve, eps: float, domain: Domain) -> PolyCurve:
    """Image of ``curve`` under ``z -> (1+eps)^2 / z``, refined until it avoids the complement."""
    c2 = (1 + eps) ** 2
    for factor in (1, 2, 4, 8):
        img = curve.refined(factor).mapped(lambda z: c2 / z) if factor > 1 \
            else curve.mapped(lambda z: c2 / z)
        if np.all(domain.segment_distance(*img.segments()) > 0):
            return img
    raise ValueError("inverted curve meets the complement at every refinement")


def run_three_puncture(eps: float = 0.02, h: float | None = None, seeds: int = 4, seed_budget: int = 16,
              options: ShortenOptions | None = None, random_seed: int = 0, jobs: int = 1,
              length_rtol: float = 0.01, solver_tol: float = 1e-8,
              field: DensityField | None = None, cache_dir=None) -> ExperimentReport:
    """Simple meridian versus shortest separating geodesic for the three punctures."""
    opts = options or ShortenOptions()
    dom = build_three_puncture_domain(eps)
    fld = _field(dom, field, h, solver_tol, cache_dir)
    sep = make_separation(dom, [0, 1, 2])

    simple = find_meridian(dom, sep, fld, seeds, opts, random_seed, jobs)
    l1 = simple.length
    cands = separating_candidates(dom, sep, fld, seed_budget, opts, random_seed)
    best = best_separating(cands)
    curves = {"simple_meridian": CurveRecord(simple.curve, l1, {
        "homology": list(simple.homology), "simple": simple.simple,
        "crossings_resolved": simple.crossings_resolved, "residual": simple.residual})}
    table = [{"pattern": c.pattern.label, "length": c.result.length, "status": c.result.status,
              "separates": c.separates, "separates_by_parity": c.separates_by_parity,
              "separates_simply": c.separates_simply, "simple": c.simple,
              "homology": list(c.homology)} for c in cands]
    asserts = []
    if best is None:
        asserts.append(_flag("separating_geodesic_found", False, "no candidate separates"))
        return ExperimentReport("thm12", dom, _params(eps, fld, opts, seeds, random_seed),
                                curves, tuple(asserts), {"candidates": table})
    l2 = best.result.length
    curves["best_separating"] = CurveRecord(best.result.curve, l2, {
        "pattern": best.pattern.label, "homology": list(best.homology),
        "residual": best.result.residual})

    margin = (l1 - l2) / l1
    asserts.append(Assertion("shorter_than_simple_meridian", margin > 0, margin, 0.0,
                             f"l1={l1:.6f} l2={l2:.6f}"))
    asserts.append(_flag("best_is_non_simple", not best.simple,
                         f"pattern {best.pattern.label}"))
    asserts.append(_flag("separates_not_by_parity_not_simply",
                         best.separates and not best.separates_by_parity and not best.separates_simply,
                         f"separates={best.separates} parity={best.separates_by_parity} "
                         f"simply={best.separates_simply}"))

    img_seed = invert_curve(best.result.curve, eps, dom)
    img = shorten(img_seed, fld, dom, opts)
    rel = abs(img.length - l2) / l2
    asserts.append(Assertion("inversion_image_equal_length",
                             img.status == CONVERGED and rel <= length_rtol, length_rtol - rel,
                             length_rtol, f"image length {img.length:.6f} status {img.status}"))
    # the image hugs the same circle, so distinctness is read off homology
    w_best = tuple(best.homology)
    w_img = homology_class(img.curve, dom).windings
    distinct = w_img != w_best and w_img != tuple(-w for w in w_best)
    dist = aligned_distance(img.curve, best.result.curve)
    asserts.append(_flag("inversion_image_distinct", distinct,
                         f"windings {list(w_best)} vs {list(w_img)}; aligned distance {dist:.6f}"))
    curves["inversion_image"] = CurveRecord(img.curve, img.length, {
        "homology": list(w_img), "residual": img.residual})
    return ExperimentReport("thm12", dom, _params(eps, fld, opts, seeds, random_seed),
                            curves, tuple(asserts), {"candidates": table, "margin": margin})


def _params(eps, fld, opts, seeds, random_seed) -> dict:
    out = {"h": fld.h, "h_curve": _h_curve(fld, opts), "tol": opts.tol, "max_iter": opts.max_iter,
           "seeds": seeds, "random_seed": random_seed}
    if eps is not None:
        out = {"eps": eps, **out}
    return out


def run_three_puncture_scan(eps_values=EPS_SCAN, **kwargs) -> ExperimentReport:
    """Run :func:`run_three_puncture` over ``eps_values`` and check the margin trend.

    The threshold reported is the largest scanned ``eps`` at which the
    separating geodesic is strictly shorter than the simple meridian.
    """
    eps_values = sorted(eps_values, reverse=True)
    runs = [run_three_puncture(e, **kwargs) for e in eps_values]
    margins = [r.extras.get("margin", float("-inf")) for r in runs]
    holds = [e for e, m in zip(eps_values, margins) if m > 0]
    steps = np.diff(margins) if len(margins) > 1 else np.array([0.0])
    trend = float(np.min(steps))
    asserts = (
        Assertion("inequality_found_in_scan", bool(holds), max(margins), 0.0,
                  f"threshold eps={max(holds) if holds else None}"),
        Assertion("margin_grows_as_eps_decreases", trend > 0, trend, 0.0,
                  "smallest margin increase between consecutive eps"),
    )
    extras = {"eps": list(eps_values), "margins": margins,
              "threshold": max(holds) if holds else None,
              "runs": [{"eps": e, "passed": r.passed,
                        "assertions": [a.to_json() for a in r.assertions]}
                       for e, r in zip(eps_values, runs)]}
    return ExperimentReport("thm12_scan", runs[-1].domain, {"eps_values": list(eps_values)},
                            {}, asserts, extras)


# -- four components ------------------------------------------------------------------

def build_four_component_domain() -> Domain:
    """Disks of radius 1/2 at +-3.5i, the disk of radius 2, and the cap ``|z| >= 5``."""
    return make_domain([Disk(3.5j, 0.5), Disk(-3.5j, 0.5), Disk(0j, 2.0), Cap(5.0)])


def _negate(curve: PolyCurve) -> PolyCurve:
    return curve.mapped(lambda z: -z)


def run_four_component(h: float | None = None, seeds: int = 8, options: ShortenOptions | None = None,
              random_seed: int = 0, jobs: int = 1, length_rtol: float = 0.01,
              symmetry_factor: float = 3.0, solver_tol: float = 1e-8,
              field: DensityField | None = None, cache_dir=None) -> ExperimentReport:
    """Two symmetric meridians for the small disks; unique principal meridians; full class scan."""
    opts = options or ShortenOptions()
    dom = build_four_component_domain()
    fld = _field(dom, field, h, solver_tol, cache_dir)
    sym_tol = symmetry_factor * _h_curve(fld, opts)
    reports = all_meridians(dom, fld, seeds, opts, random_seed, jobs)
    by_e = {tuple(sorted(r.separation.E)): r for r in reports}
    asserts = []
    curves = {}
    for r in reports:
        key = "class_E=" + ",".join(str(i) for i in sorted(r.separation.E))
        curves[key] = CurveRecord(r.curve, r.length, {
            "homology": list(r.homology), "simple": r.simple, "principal": r.principal,
            "unique_evidence": r.unique_evidence, "nesting_ok": r.nesting_ok})

    pair = by_e[(0, 1)]
    lmin = pair.length
    near = [c for c in pair.candidates if c.length <= (1 + length_rtol) * lmin]
    asserts.append(Assertion("two_meridians_for_small_disks", len(near) == 2,
                             1.0 if len(near) == 2 else -1.0, 0.0,
                             f"{len(near)} distinct geodesics within {length_rtol:.0%} of {lmin:.6f}"))
    if len(near) >= 2:
        g1, g2 = near[0], near[1]
        curves["meridian_small_disks_a"] = CurveRecord(g1.curve, g1.length)
        curves["meridian_small_disks_b"] = CurveRecord(g2.curve, g2.length)
        d_sym = aligned_distance(g2.curve, _negate(g1.curve))
        asserts.append(Assertion("pair_exchanged_by_negation", d_sym < sym_tol, sym_tol - d_sym,
                                 sym_tol, f"aligned distance {d_sym:.6f}"))
        rel = abs(g1.length - g2.length) / min(g1.length, g2.length)
        asserts.append(Assertion("pair_equal_length", rel <= length_rtol, length_rtol - rel,
                                 length_rtol, f"lengths {g1.length:.6f} {g2.length:.6f}"))
        d_inv = min(aligned_distance(g.curve, _negate(g.curve)) for g in (g1, g2))
        asserts.append(Assertion("pair_not_negation_invariant", d_inv > sym_tol, d_inv - sym_tol,
                                 sym_tol, f"smallest self-distance {d_inv:.6f}"))
    # a symmetric separating curve would have to wind around the middle disk
    bad = 0
    for c in pair.candidates:
        if not separates(c.curve, dom, pair.separation):
            continue
        w_mid = int(winding_numbers(c.curve, [dom.components[2].representative])[0])
        if w_mid == 0 and aligned_distance(c.curve, _negate(c.curve)) < sym_tol:
            bad += 1
    asserts.append(_flag("no_symmetric_separating_curve_in_pool", bad == 0,
                         f"{bad} of {len(pair.candidates)} pool curves are symmetric, "
                         "separating and avoid the middle disk"))

    principal = [r for r in reports if r.principal]
    for r in principal:
        asserts.append(Assertion(f"principal_unique_E={sorted(r.separation.E)}",
                                 r.unique_evidence == 1, 1.0 if r.unique_evidence == 1 else -1.0,
                                 0.0, f"unique_evidence={r.unique_evidence} over {seeds} starts"))
    crossing = [(sorted(a.separation.E), sorted(b.separation.E))
                for a, b in itertools.combinations(principal, 2)
                if curves_cross(a.nesting_curve, b.nesting_curve)]
    asserts.append(_flag("principal_meridians_disjoint", not crossing, f"crossing pairs {crossing}"))
    asserts.append(_flag("nesting", all(r.nesting_ok for r in reports),
                         f"{sum(not r.nesting_ok for r in reports)} reports flagged"))
    asserts.append(_flag("all_classes_simple", len(reports) == 7 and all(r.simple for r in reports),
                         f"{sum(r.simple for r in reports)} simple of {len(reports)} classes"))
    homs = [tuple(r.homology) for r in reports]
    asserts.append(_flag("homology_classes_distinct", len(set(homs)) == len(homs),
                         f"{len(set(homs))} distinct of {len(homs)}"))
    table = [r.to_json(with_curve=False) for r in reports]
    return ExperimentReport("thm14", dom, _params(None, fld, opts, seeds, random_seed),
                            curves, tuple(asserts), {"classes": table})


EXPERIMENTS = {"thm12": run_three_puncture, "thm14": run_four_component}
