"""Increment combinatorics on an indexing collection.

The objects here are purely deterministic and side-effect free:

* ``Increment``: a set difference ``A \\ (A_1 u ... u A_k)`` with the union
  stored through its extremal (irredundant) parts;
* ``Semilattice``: a finite intersection-closed list of index sets with a
  consistent numbering (containment implies smaller index);
* ``Frontier``: the boundary sets of an increment together with their
  inclusion-exclusion signs and the pairing map used by the pseudo-norms.

Everything downstream (kernels, samplers, verification) conditions on
frontier values, so the sign/interior bookkeeping in this module is cross
checked against a brute-force subset enumeration and raises
``ConsistencyError`` on any mismatch.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConsistencyError, FamilyError

MAX_UNION_PARTS = 20
DEFAULT_CLOSURE_CAP = 4096
NEGATIVE_MEASURE_TOL = 1e-12


# ---------------------------------------------------------------------------
# Extremal representations and increments
# ---------------------------------------------------------------------------

def extremal_representation(family, parts, reference=None):
    """Reduce ``parts`` to its maximal elements under containment.

    Duplicates are removed.  The result is ordered by increasing Hausdorff
    distance to ``reference`` when one is given (ties on the canonical key),
    otherwise by canonical key alone.
    """
    parts = list(dict.fromkeys(parts))
    keep = []
    for p in parts:
        if any(p != q and family.is_subset(p, q) for q in parts):
            continue
        keep.append(p)
    if reference is not None:
        keep.sort(key=lambda s: (family.hausdorff(reference, s),
                                 family.canonical_key(s)))
    else:
        keep.sort(key=family.canonical_key)
    return keep


@dataclass(frozen=True)
class Increment:
    """The difference ``apex \\ union(parts)`` with extremal ``parts``.

    ``parts`` are contained in ``apex`` and pairwise incomparable, ordered
    by increasing Hausdorff distance to the apex.  ``empty`` flags the case
    ``union(parts) == apex`` explicitly.
    """

    apex: object
    parts: tuple
    empty: bool

    def __post_init__(self):
        if not self.parts:
            raise FamilyError("an increment needs at least one union part")


def make_increment(family, apex, parts):
    """Build an increment, normalizing the parts.

    Parts are intersected down into the apex, reduced to maximal elements
    and sorted by distance to the apex.  If a part swallows the apex, the
    increment is the empty set and is flagged as such.
    """
    family.check(apex, *parts)
    inside = [family.intersect(p, apex) for p in parts]
    reduced = extremal_representation(family, inside, reference=apex)
    empty = len(reduced) == 1 and reduced[0] == apex
    return Increment(apex, tuple(reduced), empty)


def simple_increment(family, apex, base=None):
    """The one-part increment ``apex \\ base`` (``base`` defaults to the
    minimal set)."""
    if base is None:
        base = family.empty_prime()
    return make_increment(family, apex, [base])


def shift_increment(family, inc, u):
    """Apply the family shift to the apex and every part."""
    return make_increment(family, family.shift(inc.apex, u),
                          [family.shift(p, u) for p in inc.parts])


# ---------------------------------------------------------------------------
# Measure of an increment
# ---------------------------------------------------------------------------

def _check_part_count(parts):
    if len(parts) > MAX_UNION_PARTS:
        raise CapacityError("too many union parts (%d > %d)"
                            % (len(parts), MAX_UNION_PARTS))


def union_measure(family, parts):
    """Measure of a finite union via inclusion-exclusion over the parts."""
    _check_part_count(parts)
    total = 0.0
    for r in range(1, len(parts) + 1):
        sign = 1.0 if r % 2 == 1 else -1.0
        for subset in itertools.combinations(parts, r):
            inter = subset[0]
            for s in subset[1:]:
                inter = family.intersect(inter, s)
            total += sign * family.set_measure(inter)
    return total


def increment_measure(family, inc):
    """Measure of the increment, clamped at zero.

    A value below ``-1e-12`` signals a broken family implementation and
    raises instead of being clamped.
    """
    if inc.empty:
        return 0.0
    value = family.set_measure(inc.apex) - union_measure(family, inc.parts)
    if value < -NEGATIVE_MEASURE_TOL:
        raise ConsistencyError("negative increment measure %g" % value)
    return max(value, 0.0)


# ---------------------------------------------------------------------------
# Semilattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Semilattice:
    """Intersection-closed sets with a consistent numbering.

    ``sets[0]`` is the minimal set; ``sets[j] <= sets[i]`` implies
    ``j <= i``.
    """

    family: object
    sets: tuple

    def __len__(self):
        return len(self.sets)

    def index(self, s):
        return self.sets.index(s)

    def left_neighborhood(self, i):
        """The increment ``sets[i] \\ (sets[0] u ... u sets[i-1])``."""
        if not 1 <= i < len(self.sets):
            raise IndexError("left neighborhoods exist for 1 <= i <= %d"
                             % (len(self.sets) - 1))
        apex = self.sets[i]
        return make_increment(self.family, apex, self.sets[:i])

    def validate(self):
        """Exhaustively check closure and numbering (for tests)."""
        fam, sets = self.family, self.sets
        members = set(sets)
        for a, b in itertools.combinations(sets, 2):
            if fam.intersect(a, b) not in members:
                raise ConsistencyError("closure violated by %r, %r" % (a, b))
        for i, a in enumerate(sets):
            for j, b in enumerate(sets):
                if fam.is_subset(b, a) and j > i:
                    raise ConsistencyError("numbering violated at %d, %d" % (i, j))
        if sets[0] != fam.empty_prime():
            raise ConsistencyError("minimal set must come first")
        return True


def semilattice_closure(family, sets, cap=DEFAULT_CLOSURE_CAP,
                        tie_break="canonical"):
    """Smallest intersection-closed collection containing the inputs.

    The minimal set is always adjoined.  Numbering is consistent; among
    sets not ordered by containment the canonical key decides, ascending
    for ``tie_break='canonical'`` and descending for ``'reversed'`` (both
    orders are valid numberings, which the sampler exploits to test
    numbering invariance).
    """
    if not sets:
        raise FamilyError("semilattice_closure needs at least one set")
    family.check(*sets)
    pool = dict.fromkeys([family.empty_prime(), *sets])
    frontier_items = list(pool)
    while frontier_items:
        fresh = []
        for a, b in itertools.product(frontier_items, list(pool)):
            c = family.intersect(a, b)
            if c not in pool:
                pool[c] = None
                fresh.append(c)
                if len(pool) > cap:
                    raise CapacityError("semilattice closure exceeds cap %d" % cap)
        frontier_items = fresh

    elements = list(pool)
    n = len(elements)
    below = [set() for _ in range(n)]
    above = [set() for _ in range(n)]
    for i, j in itertools.permutations(range(n), 2):
        if family.is_subset(elements[i], elements[j]):
            below[j].add(i)
            above[i].add(j)

    sign = 1 if tie_break == "canonical" else -1
    if tie_break not in ("canonical", "reversed"):
        raise FamilyError("unknown tie_break %r" % tie_break)

    def heap_key(i):
        key = family.canonical_key(elements[i])
        return tuple(sign * k for k in key)

    pending = [len(below[i]) for i in range(n)]
    heap = [(heap_key(i), i) for i in range(n) if pending[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, i = heapq.heappop(heap)
        order.append(elements[i])
        for j in above[i]:
            pending[j] -= 1
            if pending[j] == 0:
                heapq.heappush(heap, (heap_key(j), j))
    if len(order) != n:
        raise ConsistencyError("containment relation is not acyclic")
    return Semilattice(family, tuple(order))


def left_neighborhood(sl, i):
    return sl.left_neighborhood(i)


# ---------------------------------------------------------------------------
# Inclusion-exclusion coefficients and frontiers
# ---------------------------------------------------------------------------

def incl_excl_coefficients(family, inc):
    """Net inclusion-exclusion coefficient of every distinct intersection.

    For each nonempty subset S of the parts, the intersection of S picks up
    ``(-1)^(|S|+1)``; coefficients of equal intersections accumulate.  This
    is the brute-force oracle for frontier signs: surviving sets carry +-1
    and interior sets cancel to 0.
    """
    parts = inc.parts
    _check_part_count(parts)
    coeffs = {}
    for r in range(1, len(parts) + 1):
        sign = 1 if r % 2 == 1 else -1
        for subset in itertools.combinations(parts, r):
            inter = subset[0]
            for s in subset[1:]:
                inter = family.intersect(inter, s)
            coeffs[inter] = coeffs.get(inter, 0) + sign
    return coeffs


@dataclass(frozen=True)
class Frontier:
    """Boundary sets of an increment with signs and the pairing map.

    ``sets[0]`` is the part closest to the apex.  ``psi`` maps positions
    ``{0, 1, ..., p}`` into ``{1, ..., p}`` (position 0 denotes the apex);
    it pairs every boundary set with a later one sharing the same
    intersection with ``sets[0]``, the device behind the increment
    pseudo-norms.
    """

    apex: object
    sets: tuple
    signs: tuple
    psi: dict

    def __len__(self):
        return len(self.sets)

    def sign_of(self, s):
        return self.signs[self.sets.index(s)]

    def delta(self, values):
        """Signed combination ``sum_i signs[i] * values[i]`` of boundary data."""
        total = None
        for sign, v in zip(self.signs, values):
            term = v if sign == 1 else -v
            total = term if total is None else total + term
        return total


def psi_map(family, inc, ordered_sets):
    """Pairing map over the ordered frontier sets.

    Position 0 (the apex) and position 1 both map to 1.  For i >= 2, the
    image is the smallest j > i whose intersection with ``ordered_sets[0]``
    agrees with that of position i; that position becomes a fixed point.
    Failure to find such a j means the sign bookkeeping is broken.
    """
    head = ordered_sets[0]
    p = len(ordered_sets)
    psi = {0: 1, 1: 1}
    for i in range(2, p + 1):
        if i in psi:
            continue
        v = family.intersect(head, ordered_sets[i - 1])
        for j in range(i + 1, p + 1):
            if j not in psi and family.intersect(head, ordered_sets[j - 1]) == v:
                psi[i] = j
                psi[j] = j
                break
        else:
            raise ConsistencyError(
                "no pairing partner for frontier position %d" % i)
    return psi


def frontier(family, inc):
    """Boundary sets, signs and pairing map of an increment.

    Builds the semilattice of all subset intersections of the parts,
    removes the sets lying in the interior of the union, orders the
    survivors (closest part first, then by distance to the apex) and
    attaches the inclusion-exclusion signs.  The interior test and the
    coefficient oracle must designate the same sets; any disagreement
    raises ``ConsistencyError``.
    """
    coeffs = incl_excl_coefficients(family, inc)
    survivors = [u for u in coeffs
                 if not family.inside_union_interior(u, inc.parts)]
    for u, c in coeffs.items():
        if u in survivors:
            if c not in (1, -1):
                raise ConsistencyError(
                    "boundary set %r has coefficient %d" % (u, c))
        elif c != 0:
            raise ConsistencyError(
                "interior set %r has nonzero coefficient %d" % (u, c))

    head = inc.parts[0]
    rest = [u for u in survivors if u != head]
    rest.sort(key=lambda s: (family.hausdorff(inc.apex, s),
                             family.canonical_key(s)))
    ordered = [head, *rest]
    signs = tuple(coeffs[u] for u in ordered)
    psi = psi_map(family, inc, ordered)
    return Frontier(inc.apex, tuple(ordered), signs, psi)


# ---------------------------------------------------------------------------
# Pseudo-norms
# ---------------------------------------------------------------------------

def increment_norm(family, inc, front=None):
    """Geometric pseudo-norm: largest Hausdorff gap bridged by the pairing."""
    if front is None:
        front = frontier(family, inc)
    at = lambda i: inc.apex if i == 0 else front.sets[i - 1]
    return max(family.hausdorff(at(i), at(front.psi[i]))
               for i in range(len(front.sets) + 1))


def value_norm(front, apex_value, values):
    """Data pseudo-norm: largest value gap bridged by the pairing."""
    at = lambda i: apex_value if i == 0 else values[i - 1]
    gaps = [np.max(np.abs(np.asarray(at(i)) - np.asarray(at(front.psi[i]))))
            for i in range(len(front.sets) + 1)]
    return float(max(gaps))


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------

def split(family, inc, a_prime):
    """Split an increment along a set into inner and outer halves.

    Returns ``(inner, outer)`` with ``inner`` the intersection of the
    increment with ``a_prime`` and ``outer`` the rest.  Degenerate cases
    (``a_prime`` swallowed by the union, or containing the apex) yield an
    empty half.  Measures always satisfy
    ``m(inc) == m(inner) + m(outer)``.
    """
    family.check(a_prime)
    cut = family.intersect(inc.apex, a_prime)
    inner = make_increment(family, cut, [family.intersect(p, cut)
                                         for p in inc.parts])
    outer = make_increment(family, inc.apex, [*inc.parts, cut])
    if inc.empty:
        inner = make_increment(family, cut, [cut])
    return inner, outer
