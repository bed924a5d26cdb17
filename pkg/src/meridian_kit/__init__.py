"""Hyperbolic metric, closed geodesics and meridians of finitely connected plane domains."""

from .curves import PolyCurve, aligned_distance, circle
from .domain import (Cap, Disk, Domain, Point, Polygon, Separation, domain_from_json,
                     gap_distance, load_domain, make_domain, make_separation)
from .errors import (CurveMeetsComplement, CurveTouchesBoundary, DegenerateDomain, DomainError,
                     FieldDomainMismatch, GridTooCoarse, MeridianKitError, NoConvergence,
                     NotHyperbolic, NotSimpleAfterShortening, OverlappingComponents,
                     PointOnCurve, PunctureCollapseError, TrivialSeparation)
from .experiments import (ExperimentReport, build_three_puncture_domain, build_four_component_domain, run_three_puncture,
                          run_three_puncture_scan, run_four_component)
from .meridians import (MeridianReport, all_meridians, count_classes, count_principal,
                        enumerate_separations, find_meridian, principal_system,
                        shortest_separating_geodesic)
from .metric import (DensityField, closed_form_density, density_at, hyperbolic_length,
                     boundary_bounds_check, load_or_solve, read_cache, solve_density, write_cache)
from .net import merge_to_single, separating_curve, square_net_cycle
from .shortening import ShortenOptions, ShorteningResult, multi_start_shorten, shorten
from .topology import (HomologyClass, homology_class, is_simple, self_intersections, separates,
                       separates_by_parity, separates_simply, winding_number, winding_numbers)

__version__ = "0.1.0"

__all__ = [
    "Cap",
    "CurveMeetsComplement",
    "CurveTouchesBoundary",
    "DegenerateDomain",
    "DensityField",
    "Disk",
    "Domain",
    "DomainError",
    "ExperimentReport",
    "FieldDomainMismatch",
    "GridTooCoarse",
    "HomologyClass",
    "MeridianKitError",
    "MeridianReport",
    "NoConvergence",
    "NotHyperbolic",
    "NotSimpleAfterShortening",
    "OverlappingComponents",
    "Point",
    "PointOnCurve",
    "PolyCurve",
    "Polygon",
    "PunctureCollapseError",
    "Separation",
    "ShortenOptions",
    "ShorteningResult",
    "TrivialSeparation",
    "aligned_distance",
    "all_meridians",
    "build_three_puncture_domain",
    "build_four_component_domain",
    "circle",
    "closed_form_density",
    "count_classes",
    "count_principal",
    "density_at",
    "domain_from_json",
    "enumerate_separations",
    "find_meridian",
    "gap_distance",
    "homology_class",
    "hyperbolic_length",
    "is_simple",
    "boundary_bounds_check",
    "load_domain",
    "load_or_solve",
    "make_domain",
    "make_separation",
    "merge_to_single",
    "multi_start_shorten",
    "principal_system",
    "read_cache",
    "run_three_puncture",
    "run_three_puncture_scan",
    "run_four_component",
    "self_intersections",
    "separates",
    "separates_by_parity",
    "separates_simply",
    "separating_curve",
    "shorten",
    "shortest_separating_geodesic",
    "solve_density",
    "square_net_cycle",
    "winding_number",
    "winding_numbers",
    "write_cache",
]
