"""Command-line entry point ``meridian-kit``.

Subcommands::

    meridian-kit density DOMAIN.json      solve (or load) the density, check it
    meridian-kit meridians DOMAIN.json    scan every meridian class
    meridian-kit experiment {thm12,thm14} run a counterexample harness

Reports are JSON with a ``schema_version`` field, written with sorted keys
and no timestamps, so the same inputs give byte-identical files.  Exit
codes: 0 success, 1 usage or input error, 2 numerical failure, 3 failed
assertion.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import svg
from .domain import Domain, load_domain
from .errors import (DomainError, MeridianKitError, NotSimpleAfterShortening,
                     PunctureCollapseError)
from .experiments import SCHEMA_VERSION, run_three_puncture, run_three_puncture_scan, run_four_component
from .meridians import (count_classes, enumerate_separations, find_meridian, flag_nesting,
                        resolution_scale)
from .metric import discrete_residual, boundary_bounds_check, load_or_solve
from .shortening import ShortenOptions

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_ASSERT = 0, 1, 2, 3
CACHE_ENV = "MERIDIAN_KIT_CACHE_DIR"


@dataclass(frozen=True)
class RunConfig:
    """Every numeric default of the tool lives here.

    ``grid_h`` of ``None`` picks the spacing from the domain geometry;
    ``tol`` is the geodesic residual tolerance of the shortener and
    ``solver_tol`` the relative residual tolerance of the density solver.
    """

    command: str
    domain_path: str | None = None
    grid_h: float | None = None
    solver_tol: float = 1e-8
    solver_max_iter: int = 60
    tol: float = 1e-4
    max_iter: int = 3000
    collapse_threshold: float = 0.05
    dedup_tol: float | None = None
    seeds: int = 8
    jobs: int = 1
    cache: str | None = None
    out: str = "."
    svg: bool = False
    random_seed: int = 0
    eps: float = 0.02
    scan: bool = False

    def __post_init__(self):
        for name in ("solver_tol", "tol", "collapse_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("grid_h", "dedup_tol"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("solver_max_iter", "max_iter", "seeds", "jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def shorten_options(self) -> ShortenOptions:
        return ShortenOptions(tol=self.tol, max_iter=self.max_iter,
                              collapse_threshold=self.collapse_threshold)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--grid-h", type=float, default=None, help="metric grid spacing (default: from geometry)")
    p.add_argument("--solver-tol", type=float, default=1e-8, help="density solver relative residual")
    p.add_argument("--cache", default=None, help=f"density cache directory (default: ${CACHE_ENV})")
    p.add_argument("--out", default=".", help="output directory for reports and figures")
    p.add_argument("--svg", action="store_true", help="also write an SVG figure")


def _shortening(p, seeds_default=8):
    p.add_argument("--tol", type=float, default=1e-4, help="geodesic residual tolerance")
    p.add_argument("--max-iter", type=int, default=3000, help="shortening iteration cap")
    p.add_argument("--seeds", type=int, default=seeds_default, help="multi-start seed count")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for multi-start")
    p.add_argument("--random-seed", type=int, default=0, help="seed for randomised corridors")
    p.add_argument("--collapse-threshold", type=float, default=0.05,
                   help="length below which a puncture loop counts as collapsed")
    p.add_argument("--dedup-tol", type=float, default=None,
                   help="merge distance for multi-start results (default: 3 curve resolutions)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="meridian-kit", description="Hyperbolic meridians of plane domains.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("density", help="solve the hyperbolic density of a domain")
    p.add_argument("domain", help="domain JSON file")
    _common(p)
    p.add_argument("--tol", dest="solver_tol_alias", type=float, default=None,
                   help="same as --solver-tol")
    p.add_argument("--max-iter", type=int, default=60, help="Newton iteration cap")

    p = sub.add_parser("meridians", help="compute a meridian for every class")
    p.add_argument("domain", help="domain JSON file")
    _common(p)
    _shortening(p)

    p = sub.add_parser("experiment", help="run a counterexample harness")
    p.add_argument("name", choices=["thm12", "thm14"])
    _common(p)
    _shortening(p, seeds_default=None)
    p.add_argument("--eps", type=float, default=0.02, help="thm12 puncture offset")
    p.add_argument("--scan", action="store_true", help="thm12: scan eps over 0.1, 0.05, 0.02")
    return parser


def config_from_args(ns) -> RunConfig:
    cache = ns.cache if ns.cache is not None else os.environ.get(CACHE_ENV) or None
    kw = dict(command=ns.command, grid_h=ns.grid_h, solver_tol=ns.solver_tol, cache=cache,
              out=ns.out, svg=ns.svg)
    if ns.command == "density":
        kw.update(domain_path=ns.domain, solver_max_iter=ns.max_iter)
        if ns.solver_tol_alias is not None:
            kw["solver_tol"] = ns.solver_tol_alias
    else:
        kw.update(tol=ns.tol, max_iter=ns.max_iter, jobs=ns.jobs, random_seed=ns.random_seed,
                  collapse_threshold=ns.collapse_threshold, dedup_tol=ns.dedup_tol)
        if ns.seeds is not None:
            kw["seeds"] = ns.seeds
        if ns.command == "meridians":
            kw["domain_path"] = ns.domain
        else:
            kw.update(eps=ns.eps, scan=ns.scan)
    return RunConfig(**kw)


# -- output ----------------------------------------------------------------------

def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True) + "\n"


def _write_report(cfg: RunConfig, name: str, body: dict) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.json"
    params = {k: v for k, v in asdict(cfg).items() if k not in ("cache", "out", "jobs")}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dumps({"schema_version": SCHEMA_VERSION, "command": cfg.command,
                         "config": params, **body}))
    return path


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _field(cfg: RunConfig, domain: Domain):
    fld, cached = load_or_solve(domain, cfg.grid_h, tol=cfg.solver_tol,
                                max_iter=cfg.solver_max_iter, cache_dir=cfg.cache)
    _info(f"density: h={fld.h:g} {'loaded from cache' if cached else f'solved in {fld.iterations} Newton steps'}")
    return fld


# -- commands -----------------------------------------------------------------------

def cmd_density(cfg: RunConfig) -> int:
    domain = load_domain(cfg.domain_path)
    fld = _field(cfg, domain)
    summary = {"h": fld.h, "grid": list(fld.shape), "residual": discrete_residual(fld),
               "boundary_bounds": boundary_bounds_check(fld),
               "punctures": [{"index": p.index, "graft_radius": p.radius, "a": p.a}
                             for p in fld.patches]}
    path = _write_report(cfg, "density", {"domain": domain.to_json(), "density": summary})
    lb = summary["boundary_bounds"]
    print(f"residual {summary['residual']:.3e}  grid {fld.shape[0]}x{fld.shape[1]}  h {fld.h:g}")
    print(f"near-boundary bounds (K={lb['K']:g}): {lb['passed']}/{lb['checked']} nodes")
    if cfg.svg:
        svg.write(Path(cfg.out) / "density.svg", domain, (), "log density",
                  (fld.coords, fld.log_density_grid()))
    _info(f"report: {path}")
    return EXIT_OK


def _row(rep) -> str:
    E = ",".join(str(i) for i in sorted(rep.separation.E))
    return (f"{E:>9}  {rep.length:14.6f}  {str(rep.simple):>6}  {str(rep.principal):>9}  "
            f"{rep.unique_evidence:>6}  {str(rep.nesting_ok):>7}")


def cmd_meridians(cfg: RunConfig) -> int:
    domain = load_domain(cfg.domain_path)
    n = domain.connectivity
    if count_classes(n) == 0:
        print(f"connectivity {n}: no meridian classes")
        _write_report(cfg, "meridians", {"domain": domain.to_json(), "classes": [], "skipped": []})
        return EXIT_OK
    fld = _field(cfg, domain)
    opts = cfg.shorten_options()
    reports, skipped = [], []
    for E, sep in enumerate_separations(domain):
        if sep is None:
            skipped.append({"E": list(E), "reason": "trivial separation"})
            continue
        try:
            rep = _find_with_reseed(cfg, domain, sep, fld, opts)
        except PunctureCollapseError as exc:
            skipped.append({"E": list(E), "reason": f"puncture: {exc}"})
            continue
        reports.append(rep)
    reports = flag_nesting(domain, reports, resolution_scale(fld, opts))
    body = {"domain": domain.to_json(), "h": fld.h,
            "classes": [r.to_json() for r in reports], "skipped": skipped}
    path = _write_report(cfg, "meridians", body)
    print(f"{'E':>9}  {'length':>14}  {'simple':>6}  {'principal':>9}  {'unique':>6}  {'nesting':>7}")
    for r in reports:
        print(_row(r))
    for s in skipped:
        print(f"{','.join(map(str, s['E'])):>9}  skipped ({s['reason']})")
    if cfg.svg:
        curves = [("E=" + ",".join(map(str, sorted(r.separation.E))), r.curve, r.length)
                  for r in reports]
        svg.write(Path(cfg.out) / "meridians.svg", domain, curves, "meridians")
    _info(f"report: {path}")
    return EXIT_OK


def _find_with_reseed(cfg, domain, sep, fld, opts):
    try:
        return find_meridian(domain, sep, fld, cfg.seeds, opts, cfg.random_seed, cfg.jobs,
                             dedup_tol=cfg.dedup_tol)
    except NotSimpleAfterShortening:
        _info(f"class {sep.label}: no simple geodesic, retrying with {2 * cfg.seeds} seeds")
        return find_meridian(domain, sep, fld, 2 * cfg.seeds, opts, cfg.random_seed + 1, cfg.jobs,
                             dedup_tol=cfg.dedup_tol)


def cmd_experiment(cfg: RunConfig, name: str) -> int:
    opts = cfg.shorten_options()
    common = dict(h=cfg.grid_h, options=opts, random_seed=cfg.random_seed, jobs=cfg.jobs,
                  solver_tol=cfg.solver_tol, cache_dir=cfg.cache)
    if name == "thm14":
        report = run_four_component(seeds=cfg.seeds, **common)
    elif cfg.scan:
        report = run_three_puncture_scan(seeds=min(cfg.seeds, 4), **common)
    else:
        report = run_three_puncture(cfg.eps, seeds=min(cfg.seeds, 4), **common)
    label = f"experiment_{report.name}"
    path = _write_report(cfg, label, {"report": report.to_json()})
    for a in report.assertions:
        print(f"{'PASS' if a.passed else 'FAIL'}  {a.name}  margin {a.margin:+.6g}  "
              f"tolerance {a.tolerance:g}  {a.detail}")
    if cfg.svg and report.curves:
        curves = [(k, c.curve, c.length) for k, c in report.curves.items()]
        svg.write(Path(cfg.out) / f"{label}.svg", report.domain, curves, report.name)
    _info(f"report: {path}")
    return EXIT_OK if report.passed else EXIT_ASSERT


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ValueError as exc:
        print(f"meridian-kit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if cfg.command == "density":
            return cmd_density(cfg)
        if cfg.command == "meridians":
            return cmd_meridians(cfg)
        return cmd_experiment(cfg, ns.name)
    except (json.JSONDecodeError, DomainError, OSError) as exc:
        print(f"meridian-kit: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MeridianKitError, ArithmeticError, ValueError) as exc:
        print(f"meridian-kit: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
