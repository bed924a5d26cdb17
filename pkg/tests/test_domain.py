import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from meridian_kit.domain import (Cap, Disk, Point, Polygon, component_from_json, domain_from_json,
                                 gap_distance, make_domain, make_separation)
from meridian_kit.errors import (BadCap, InvalidComponent, NotHyperbolic, OverlappingComponents,
                                 TrivialSeparation)
from meridian_kit.experiments import build_three_puncture_domain, build_four_component_domain

from randdomains import random_domain, random_separation


def test_four_disk_domain_is_valid():
    dom = make_domain([Disk(2j * 0, 2.0), Disk(3.5j, 0.5), Disk(-3.5j, 0.5), Cap(5.0)])
    assert dom.connectivity == 4
    assert not dom.is_degenerate


def test_annulus_is_valid():
    dom = make_domain([Disk(0j, 0.25), Cap(1.0)])
    assert dom.connectivity == 2


def test_overlapping_disks_rejected():
    with pytest.raises(OverlappingComponents):
        make_domain([Disk(0j, 2.0), Disk(1 + 0j, 2.0)])


def test_tangent_disks_rejected_by_min_gap():
    with pytest.raises(OverlappingComponents):
        make_domain([Disk(0j, 1.0), Disk(2 + 0j, 1.0), Cap(5.0)])


def test_cap_must_enclose_components():
    with pytest.raises(BadCap):
        make_domain([Disk(0j, 1.0), Cap(1.0)])
    with pytest.raises(BadCap):
        make_domain([Disk(0j, 0.1), Cap(1.0), Cap(2.0)])


def test_two_points_and_infinity_is_not_hyperbolic():
    with pytest.raises(NotHyperbolic):
        make_domain([Point(0j)])
    make_domain([Point(0j), Point(1 + 0j)])


def test_polygon_must_be_simple():
    with pytest.raises(InvalidComponent):
        Polygon((0j, 1 + 1j, 1 + 0j, 1j))
    with pytest.raises(InvalidComponent):
        Polygon((0j, 1 + 0j))


def test_json_round_trip_and_unknown_kind():
    dom = build_four_component_domain()
    assert domain_from_json(json.loads(json.dumps(dom.to_json()))) == dom
    with pytest.raises(InvalidComponent):
        component_from_json({"kind": "blob"})
    # the legacy spelling of the cap kind is accepted
    assert component_from_json({"kind": "cap", "radius": 2.0}) == Cap(2.0)


def test_separation_examples():
    dom = build_four_component_domain()
    sep = make_separation(dom, [0, 1])
    assert sep.E == {0, 1} and sep.F == {2, 3}
    ann = make_domain([Disk(0j, 0.25), Cap(1.0)])
    assert make_separation(ann, [0]).F == {1}
    with pytest.raises(TrivialSeparation):
        make_separation(make_domain([Point(0j), Disk(1 + 0j, 0.2), Cap(3.0)]), [0])
    with pytest.raises(TrivialSeparation):
        make_separation(ann, [1])


def test_gap_distance_examples():
    ann = make_domain([Disk(0j, 0.25), Cap(1.0)])
    assert gap_distance(ann, make_separation(ann, [0])) == pytest.approx(0.75, abs=1e-12)
    dom = build_four_component_domain()
    assert gap_distance(dom, make_separation(dom, [0, 1])) == pytest.approx(1.0, abs=1e-12)
    d12 = build_three_puncture_domain(0.1)
    assert gap_distance(d12, make_separation(d12, [0, 1, 2])) == pytest.approx(0.1, abs=1e-12)


def test_three_puncture_domain_geometry():
    d = build_three_puncture_domain(0.1)
    pts = [c.location for c in d.components[:3]]
    assert np.allclose(np.abs(pts), 1.1)
    assert d.cap.radius == pytest.approx(1.21)
    d = build_three_puncture_domain(0.5)
    assert d.cap.radius == pytest.approx(2.25)
    with pytest.raises(ValueError):
        build_three_puncture_domain(1.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_domains_revalidate_and_gaps(seed):
    rng = np.random.default_rng(seed)
    dom = random_domain(rng)
    # validation is idempotent
    assert make_domain(dom.components, dom.min_gap) == dom
    sep = random_separation(rng, dom)
    if sep is None:
        return
    gap = gap_distance(dom, sep)
    assert gap > 0
    # swapping sides keeps the gap when infinity can be re-rooted
    if dom.cap is None:
        try:
            other = make_separation(dom, sep.F)
        except TrivialSeparation:
            return
        assert gap_distance(dom, other) == pytest.approx(gap)
