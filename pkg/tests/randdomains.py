"""Random domain generator shared by the property tests."""

import numpy as np

from meridian_kit.domain import Cap, Disk, Point, Polygon, make_domain, make_separation
from meridian_kit.errors import DomainError


def random_polygon(rng, center, size):
    k = int(rng.integers(3, 8))
    # jittered angles keep the star-shaped polygon well away from degenerate
    ang = 2 * np.pi * (np.arange(k) + rng.uniform(0.1, 0.9, k)) / k
    rad = size * rng.uniform(0.4, 1.0, k)
    return Polygon(tuple(center + rad * np.exp(1j * ang)))


def random_domain(rng, n_min=2, n_max=6, cap_prob=0.8):
    """Domain with ``n_min..n_max`` complement components inside the box [-4, 4]^2."""
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        with_cap = rng.random() < cap_prob
        bounded = []
        tries = 0
        while len(bounded) < n - (1 if with_cap else 0) and tries < 200:
            tries += 1
            c = complex(*rng.uniform(-3.5, 3.5, 2))
            size = float(rng.uniform(0.1, 1.2))
            kind = rng.choice(["disk", "point", "polygon"], p=[0.45, 0.25, 0.3])
            if kind == "disk":
                comp = Disk(c, size)
            elif kind == "point":
                comp = Point(c)
                size = 0.0
            else:
                comp = random_polygon(rng, c, size)
            if all(abs(c - b[1]) > size + b[2] + 0.15 for b in bounded):
                bounded.append((comp, c, size))
        comps = [b[0] for b in bounded]
        if with_cap:
            comps.append(Cap(float(max(abs(b[1]) + b[2] for b in bounded) + rng.uniform(0.3, 2.0))))
        try:
            return make_domain(comps)
        except DomainError:
            continue


def random_separation(rng, domain):
    idx = list(domain.bounded_indices)
    for _ in range(100):
        k = int(rng.integers(1, len(idx) + 1))
        E = rng.choice(idx, size=k, replace=False).tolist()
        try:
            return make_separation(domain, E)
        except DomainError:
            continue
    return None
