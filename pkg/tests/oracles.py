"""Independent checks shared by the unit and acceptance suites."""

import numpy as np

from meridian_kit.domain import Cap, Point
from meridian_kit.topology import self_intersections


def brute_windings(curves, points):
    """Sum over ``curves`` of the angle-summation winding about each point."""
    total = np.zeros(len(points), int)
    for c in curves:
        for k, z in enumerate(points):
            a = c.vertices - z
            total[k] += int(np.rint(np.angle(np.roll(a, -1) / a).sum() / (2 * np.pi)))
    return total


def side_probes(domain, indices):
    """A representative point of each component, plus boundary probes of extended ones."""
    pts = []
    for i in indices:
        comp = domain.components[i]
        pts += [comp.representative] + (list(comp.probes(4)) if not isinstance(comp, (Point, Cap)) else [])
    return pts


def net_output_problems(dom, sep, curve):
    """Reasons the curve fails to be a simple curve in U winding once about E only."""
    out = []
    a, b = curve.segments()
    if not np.all(dom.segment_distance(a, b) > 0):
        out.append("meets the complement")
    if not self_intersections(curve).simple:
        out.append("not simple")
    E = sorted(sep.E)
    F = [i for i in sorted(sep.F) if not isinstance(dom.components[i], Cap)]
    if set(brute_windings([curve], side_probes(dom, E)).tolist()) != {1}:
        out.append("winding on E is not 1")
    if set(brute_windings([curve], side_probes(dom, F)).tolist()) - {0}:
        out.append("nonzero winding on F")
    if dom.cap is not None:
        far = dom.cap.radius * 1.01
        if brute_windings([curve], [far, -far, 1j * far]).any():
            out.append("nonzero winding on the cap")
    return out
