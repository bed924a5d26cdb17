import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from meridian_kit.domain import Cap, Disk, Point, Separation, make_domain, make_separation
from meridian_kit.errors import MalformedCycle
from meridian_kit.experiments import build_three_puncture_domain, build_four_component_domain
from meridian_kit.net import (LatticeCycle, component_loop, cycle_from_cells, decompose_cycle,
                              default_cell_size, merge_to_single, separating_curve, square_net_cycle)
from meridian_kit.topology import homology_class, is_simple, winding_numbers

from oracles import brute_windings, net_output_problems, side_probes
from randdomains import random_domain, random_separation


# -- square net ----------------------------------------------------------------------

def test_point_on_lattice_lines_gives_two_by_two_block():
    dom = make_domain([Point(0j), Disk(3 + 0j, 0.5), Cap(10.0)])
    sep = Separation(frozenset({0}), frozenset({1, 2}))
    cyc = square_net_cycle(dom, sep, 1.0)
    assert len(cyc.edges) == 8
    curves = decompose_cycle(cyc)
    assert len(curves) == 1
    assert brute_windings(curves, [0j])[0] == 1


def test_annulus_net_is_one_simple_cycle():
    dom = make_domain([Disk(0j, 0.25), Cap(1.0)])
    sep = make_separation(dom, [0])
    assert default_cell_size(dom, sep) == pytest.approx(0.375)
    curves = decompose_cycle(square_net_cycle(dom, sep))
    assert len(curves) == 1 and is_simple(curves[0])
    assert brute_windings(curves, [0j, 0.2, 0.95, -0.95j]).tolist() == [1, 1, 0, 0]


def test_three_point_net_winds_once_about_each_point():
    dom = build_three_puncture_domain(0.5)
    sep = make_separation(dom, [0, 1, 2])
    cyc = square_net_cycle(dom, sep)
    assert cyc.is_balanced()
    curves = decompose_cycle(cyc)
    assert len(curves) >= 1
    pts = side_probes(dom, [0, 1, 2])
    assert brute_windings(curves, pts).tolist() == [1, 1, 1]
    assert not brute_windings(curves, side_probes(dom, [3])).any()


# -- decomposition -----------------------------------------------------------------

def test_single_cell():
    curves = decompose_cycle(cycle_from_cells([(0, 0)], 1.0))
    assert len(curves) == 1
    assert sorted(map(complex, curves[0].vertices), key=lambda z: (z.real, z.imag)) == [0, 1j, 1, 1 + 1j]


def test_two_blocks_give_two_rectangles():
    curves = decompose_cycle(cycle_from_cells([(0, 0), (1, 0), (5, 5), (5, 6)], 1.0))
    assert len(curves) == 2
    assert all(len(c) == 4 and is_simple(c) for c in curves)


def test_pinch_vertex_splits_without_crossing():
    # diagonal cells share only the vertex (1, 1)
    curves = decompose_cycle(cycle_from_cells([(0, 0), (1, 1)], 1.0))
    assert len(curves) == 2
    assert all(is_simple(c) for c in curves)
    # each curve lies on one side of the other apart from the shared vertex
    for a, b in (curves, curves[::-1]):
        mids = (b.vertices + np.roll(b.vertices, -1)) / 2
        assert not brute_windings([a], mids).any()


def test_unbalanced_cycle_rejected():
    with pytest.raises(MalformedCycle):
        decompose_cycle(LatticeCycle(1.0, frozenset({((0, 0), (1, 0))})))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=25))
def test_cancellation_and_degrees(cells):
    cyc = cycle_from_cells(cells, 1.0)
    edges = set(cyc.edges)
    assert not any((b, a) in edges for a, b in edges)
    assert cyc.is_balanced()
    curves = decompose_cycle(cyc)
    assert all(is_simple(c) for c in curves)
    centers = [complex(i + 0.5, j + 0.5) for i in range(-1, 8) for j in range(-1, 8)]
    expected = [1 if (int(np.floor(z.real)), int(np.floor(z.imag))) in set(cells) else 0 for z in centers]
    assert brute_windings(curves, centers).tolist() == expected


# -- merging ------------------------------------------------------------------------

def test_single_curve_returned_unchanged():
    dom = make_domain([Disk(0j, 0.25), Cap(1.0)])
    sep = make_separation(dom, [0])
    s = default_cell_size(dom, sep)
    curves = decompose_cycle(square_net_cycle(dom, sep, s))
    assert merge_to_single(curves, dom, sep, s) is curves[0]


def test_two_point_squares_merge():
    dom = build_three_puncture_domain(0.5)
    sep = make_separation(dom, [0, 1])
    s = default_cell_size(dom, sep)
    curves = decompose_cycle(square_net_cycle(dom, sep, s))
    assert len(curves) == 2
    merged = merge_to_single(curves, dom, sep, s)
    assert is_simple(merged)
    assert homology_class(merged, dom).windings == (1, 1, 0, 0)


def test_two_small_disks_merge_to_one_simple_curve():
    dom = build_four_component_domain()
    sep = make_separation(dom, [0, 1])
    c = separating_curve(dom, sep)
    assert is_simple(c)
    assert homology_class(c, dom).windings == (1, 1, 0)


def test_component_loop_around_puncture():
    dom = build_three_puncture_domain(0.5)
    c = component_loop(dom, 1)
    assert is_simple(c)
    assert homology_class(c, dom).windings == (0, 1, 0, 0)


def check_net_output(dom, sep, curve):
    assert net_output_problems(dom, sep, curve) == []


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_domains_end_to_end(seed):
    rng = np.random.default_rng(seed)
    dom = random_domain(rng)
    sep = random_separation(rng, dom)
    assume(sep is not None)
    check_net_output(dom, sep, separating_curve(dom, sep))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_corridors_keep_quarter_cell_clearance(seed):
    rng = np.random.default_rng(seed)
    dom = random_domain(rng, 4, 6)
    sep = random_separation(rng, dom)
    assume(sep is not None)
    s = default_cell_size(dom, sep)
    curves = decompose_cycle(square_net_cycle(dom, sep, s))
    assume(len(curves) > 1)
    merged = merge_to_single(curves, dom, sep, s)
    a, b = merged.segments()
    assert np.min(dom.segment_distance(a, b)) >= s / 4 - 1e-12
    # corridors add nothing to the homology
    total = sum(np.array(homology_class(c, dom).windings) for c in curves)
    assert tuple(total) == homology_class(merged, dom).windings


def test_randomised_routing_still_separates():
    dom = build_four_component_domain()
    sep = make_separation(dom, [0, 1])
    for k in range(4):
        c = separating_curve(dom, sep, rng=np.random.default_rng(k))
        check_net_output(dom, sep, c)
    assert list(winding_numbers(c, [0j])) == [0]
