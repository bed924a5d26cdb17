import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from meridian_kit.curves import PolyCurve, circle
from meridian_kit.domain import Cap, Disk, Point, make_domain
from meridian_kit.errors import CurveTouchesBoundary, GridTooCoarse, OutsideDomain, OutsideModel
from meridian_kit.metric import (INTERIOR, DensityModel, cache_key, closed_form_density, density_at,
                                 hyperbolic_length, boundary_bounds_check, load_or_solve,
                                 puncture_graft_radius, read_cache, solve_density, write_cache)

from conftest import annulus


# -- independent oracles ---------------------------------------------------------

def annulus_density_oracle(rho, r):
    # curvature -1 density of {r < |z| < 1}
    L = math.log(1 / r)
    return math.pi / (rho * L * math.sin(math.pi * math.log(rho / r) / L))


def equator_length_oracle(r):
    rho = math.sqrt(r)
    val, _ = quad(lambda t: annulus_density_oracle(rho, r) * rho, 0.0, 2 * math.pi)
    return val


def interior_far_nodes(field, factor=5.0):
    z = field.node_points()
    d = field.domain.distance(z)
    return z[(field.mask == INTERIOR) & (d > factor * field.h)]


# -- closed forms ------------------------------------------------------------------

def test_closed_form_examples():
    assert closed_form_density(DensityModel.disk(), 0j) == pytest.approx(2.0)
    assert closed_form_density(DensityModel.punctured_disk(), math.exp(-1)) == pytest.approx(math.e)
    assert closed_form_density(DensityModel.annulus(0j, 0.25, 1.0), 0.5) == pytest.approx(4.5324, abs=1e-4)
    with pytest.raises(OutsideModel):
        closed_form_density(DensityModel.disk(), 1.0)
    with pytest.raises(OutsideModel):
        closed_form_density(DensityModel.punctured_disk(), 0j)


@pytest.mark.parametrize("model, z", [
    (DensityModel.disk(0.3j, 2.0), 0.4 + 0.1j),
    (DensityModel.punctured_disk(0j, 1.0), 0.3 - 0.2j),
    (DensityModel.annulus(0j, 0.25, 1.0), 0.1 + 0.6j),
])
def test_closed_forms_solve_liouville(model, z):
    # five-point Laplacian of log(lambda) against lambda**2
    e = 1e-3
    u = lambda w: math.log(float(closed_form_density(model, w)))
    lap = (u(z + e) + u(z - e) + u(z + 1j * e) + u(z - 1j * e) - 4 * u(z)) / e ** 2
    lam2 = float(closed_form_density(model, z)) ** 2
    assert lap == pytest.approx(lam2, rel=1e-5)


@pytest.mark.parametrize("r, expected", [(1 / 9, 8.9830), (1 / 4, 14.2382), (1 / 2, 28.4765)])
def test_equator_lengths_by_quadrature(r, expected):
    # the quoted values are truncated to four decimals
    assert equator_length_oracle(r) == pytest.approx(expected, rel=1e-4)
    assert equator_length_oracle(r) == pytest.approx(2 * math.pi ** 2 / math.log(1 / r), rel=1e-12)


# -- solver against closed forms -----------------------------------------------------

def test_annulus_field(annulus_quarter):
    dom, fld = annulus_quarter
    assert fld.residual < 1e-8
    assert float(density_at(fld, 0.5)) == pytest.approx(4.5324, rel=0.02)
    z = interior_far_nodes(fld)
    ref = closed_form_density(DensityModel.annulus(0j, 0.25, 1.0), z)
    assert np.max(np.abs(density_at(fld, z) / ref - 1)) < 0.02


def test_annulus_fine_grid():
    fld = solve_density(annulus(0.25), h=0.005)
    assert float(density_at(fld, 0.5)) == pytest.approx(4.5324, rel=0.02)


def test_disk_field(disk_domain):
    dom, fld = disk_domain
    z = interior_far_nodes(fld)
    ref = closed_form_density(DensityModel.disk(), z)
    assert np.max(np.abs(density_at(fld, z) / ref - 1)) < 0.02


def test_punctured_disk_field(punctured_disk):
    dom, fld = punctured_disk
    rim = puncture_graft_radius(dom, 0)
    z = interior_far_nodes(fld)
    z = z[np.abs(z) > rim]
    ref = closed_form_density(DensityModel.punctured_disk(), z)
    assert np.max(np.abs(density_at(fld, z) / ref - 1)) < 0.02


@pytest.mark.parametrize("R", [1.5, 3.0])
def test_punctured_disk_of_other_radius(R):
    dom = make_domain([Point(0j), Cap(R)])
    fld = solve_density(dom)
    assert fld.patches[0].a == pytest.approx(math.log(R), abs=0.01)
    z = interior_far_nodes(fld)
    z = z[np.abs(z) > puncture_graft_radius(dom, 0)]
    ref = closed_form_density(DensityModel.punctured_disk(0j, R), z)
    assert np.max(np.abs(density_at(fld, z) / ref - 1)) < 0.02


def test_puncture_patch_is_continuous(punctured_disk):
    dom, fld = punctured_disk
    rim = puncture_graft_radius(dom, 0)
    ang = np.exp(1j * np.linspace(0, 2 * np.pi, 16, endpoint=False))
    inside = density_at(fld, (1 - 1e-6) * rim * ang)
    outside = density_at(fld, (1 + 1e-6) * rim * ang)
    assert np.max(np.abs(inside / outside - 1)) < 0.05
    half = density_at(fld, 0.5 * rim * ang)
    ref = closed_form_density(DensityModel.punctured_disk(), 0.5 * rim * ang)
    assert np.max(np.abs(half / ref - 1)) < 0.05


def test_boundary_bounds_on_four_component_domain(four_component):
    _, fld = four_component
    rep = boundary_bounds_check(fld, K=20.0)
    assert rep["checked"] > 100
    assert rep["passed"] == rep["checked"]


def test_schwarz_pick_monotonicity(annulus_quarter, punctured_disk, disk_domain):
    # A(1/4, 1) is contained in D(0,1) minus 0, which is contained in D(0,1)
    _, small = annulus_quarter
    _, mid = punctured_disk
    _, big = disk_domain
    z = interior_far_nodes(small)
    z = z[np.abs(z) > 2 * puncture_graft_radius(mid.domain, 0)]
    lam_small, lam_mid, lam_big = (density_at(f, z) for f in (small, mid, big))
    assert np.all(lam_small >= 0.98 * lam_mid)
    assert np.all(lam_mid >= 0.98 * lam_big)


def test_density_queries_outside_raise(annulus_quarter):
    _, fld = annulus_quarter
    with pytest.raises(OutsideDomain):
        density_at(fld, 0.1)
    with pytest.raises(OutsideDomain):
        density_at(fld, 1.5)


def test_grid_too_coarse():
    dom = make_domain([Disk(0j, 0.25), Disk(0.4, 0.1), Cap(1.0)])
    with pytest.raises(GridTooCoarse):
        solve_density(dom, h=0.05)


# -- lengths ------------------------------------------------------------------------

def test_equator_length(annulus_quarter):
    _, fld = annulus_quarter
    assert hyperbolic_length(circle(0j, 0.5, 64), fld) == pytest.approx(14.2382, rel=0.02)


def test_punctured_circle_length(punctured_disk):
    _, fld = punctured_disk
    assert hyperbolic_length(circle(0j, math.exp(-1), 64), fld) == pytest.approx(2 * math.pi, rel=0.01)


def test_repeated_vertex_counts_two_segments(annulus_quarter):
    _, fld = annulus_quarter
    a, b = 0.5 + 0j, 0.5j
    tri = PolyCurve([a, a, b])
    two = hyperbolic_length(PolyCurve([a, b, b]), fld)
    assert hyperbolic_length(tri, fld) == pytest.approx(two, rel=1e-12)


def test_curve_through_complement_raises(annulus_quarter):
    _, fld = annulus_quarter
    with pytest.raises(CurveTouchesBoundary):
        hyperbolic_length(circle(0j, 0.2, 32), fld)


@settings(max_examples=40, deadline=None)
@given(shift=st.integers(0, 63), radius=st.floats(0.35, 0.8), wobble=st.floats(0.0, 0.05))
def test_length_invariant_under_shift_and_reversal(annulus_quarter, shift, radius, wobble):
    _, fld = annulus_quarter
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    curve = PolyCurve(radius * (1 + wobble * np.sin(3 * t)) * np.exp(1j * t))
    L = hyperbolic_length(curve, fld)
    assert hyperbolic_length(curve.shifted(shift), fld) == pytest.approx(L, rel=1e-12)
    assert hyperbolic_length(curve.reversed(), fld) == pytest.approx(L, rel=1e-12)


# -- cache ---------------------------------------------------------------------------

def test_cache_round_trip_is_bit_identical(tmp_path, annulus_quarter):
    dom, fld = annulus_quarter
    path = tmp_path / "f.mkdf"
    write_cache(fld, path)
    back = read_cache(path, dom)
    assert np.array_equal(back.log_density_grid(), fld.log_density_grid())
    z = np.array([0.5, 0.3 + 0.4j, -0.7j])
    assert np.array_equal(density_at(back, z), density_at(fld, z))
    with pytest.raises(ValueError):
        read_cache(path, make_domain([Disk(0j, 0.25), Cap(2.0)]))


def test_load_or_solve_uses_cache(tmp_path):
    dom = annulus(0.5)
    f1, hit1 = load_or_solve(dom, h=1 / 64, cache_dir=tmp_path)
    f2, hit2 = load_or_solve(dom, h=1 / 64, cache_dir=tmp_path)
    assert (hit1, hit2) == (False, True)
    assert (tmp_path / f"{cache_key(dom, 1 / 64)}.mkdf").exists()
    assert np.array_equal(f1.log_density_grid(), f2.log_density_grid())
