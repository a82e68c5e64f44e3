"""Shared random-geometry generators and independent oracles."""

import itertools
import math

import numpy as np

from setmarkov import lattice as lat
from setmarkov.families import rect_family


def random_corner(rng, dim, low=0.3, high=3.0):
    return tuple(rng.uniform(low, high, dim))


def random_rect_increment(rng, dim=None, max_parts=4, family=None):
    """A random rectangle increment with extremal parts inside the apex."""
    if family is None:
        dim = dim or int(rng.integers(1, 4))
        family = rect_family(dim)
    dim = family.dim
    apex = family.rect(*random_corner(rng, dim, 0.5, 3.0))
    count = int(rng.integers(1, max_parts + 1))
    parts = [family.rect(*(np.array(apex.corner) * rng.uniform(0.1, 0.98, dim)))
             for _ in range(count)]
    return family, lat.make_increment(family, apex, parts)


def random_staircase(rng, family, steps):
    """A strictly interleaved two-dimensional staircase increment."""
    xs = np.sort(rng.uniform(0.2, 2.0, steps))
    ys = np.sort(rng.uniform(0.2, 2.0, steps))[::-1]
    apex = family.rect(float(xs[-1] + rng.uniform(0.2, 1.0)),
                       float(ys[0] + rng.uniform(0.2, 1.0)))
    parts = [family.rect(float(x), float(y)) for x, y in zip(xs, ys)]
    return lat.make_increment(family, apex, parts)


def random_cut(rng, family, inc):
    """A random splitting set overlapping the increment geometry."""
    scale = np.array(inc.apex.corner) * rng.uniform(0.1, 1.2, family.dim)
    return family.rect(*scale)


def box_union_volume(corners):
    """Exact volume of a union of boxes [0, c] by cell decomposition.

    Independent of the inclusion-exclusion route: the coordinate grid cut
    by all corners makes every cell lie fully inside or outside the union.
    """
    corners = [tuple(c) for c in corners]
    dim = len(corners[0])
    axes = []
    for j in range(dim):
        vals = sorted({0.0, *[c[j] for c in corners]})
        axes.append(list(zip(vals, vals[1:])))
    total = 0.0
    for cell in itertools.product(*axes):
        hi = [b for (_, b) in cell]
        if any(all(hi[j] <= c[j] for j in range(dim)) for c in corners):
            total += math.prod(b - a for a, b in cell)
    return total


def brute_closure_keys(corners):
    """Fixed-point pairwise-min closure on corner tuples (plus the origin)."""
    dim = len(corners[0])
    pool = {tuple(c) for c in corners} | {(0.0,) * dim}
    while True:
        fresh = {tuple(min(a, b) for a, b in zip(x, y))
                 for x, y in itertools.combinations(pool, 2)} - pool
        if not fresh:
            return pool
        pool |= fresh


def subset_coefficients(corners):
    """Brute-force signed subset enumeration keyed by intersection corner."""
    out = {}
    for r in range(1, len(corners) + 1):
        sign = 1 if r % 2 == 1 else -1
        for group in itertools.combinations(corners, r):
            key = tuple(min(c[j] for c in group) for j in range(len(group[0])))
            out[key] = out.get(key, 0) + sign
    return {k: v for k, v in out.items()}
