"""Indexing collections: rectangles, tree branches and their products.

An index family plays the role of time for a set-indexed process.  It is a
collection of compact sets closed under intersection, with a minimal element
``empty_prime`` standing in for the origin.  Three kinds are implemented:

* ``RectFamily``: lower-left rectangles ``[0, t]`` of ``R^N_+``, identified
  by the upper corner ``t``;
* ``TreeFamily``: root-to-node branches of a finite rooted tree, identified
  by the node id;
* ``ProductFamily``: Cartesian products of factor families.

Each family carries the measure used by transition kernels, the metric used
by increment pseudo-norms, shift operators where they exist, and a dyadic
outer approximation for rectangle families.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .errors import FamilyError


# ---------------------------------------------------------------------------
# Index sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rect:
    """The rectangle [0, corner] of R^N_+, identified by its upper corner."""

    corner: tuple

    def __repr__(self):
        return "Rect(%s)" % (",".join(repr(c) for c in self.corner))


@dataclass(frozen=True)
class TreeBranch:
    """The branch from the root down to ``node`` in a rooted tree."""

    node: int

    def __repr__(self):
        return "TreeBranch(%d)" % self.node


@dataclass(frozen=True)
class ProdSet:
    """A Cartesian product of factor index sets, one per factor family."""

    factors: tuple

    def __repr__(self):
        return "ProdSet(%s)" % (" x ".join(repr(f) for f in self.factors))


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureSpec:
    """Measure attached to a family.

    kind:
      * ``lebesgue``  - volume of the set (product of corner coordinates for
        rectangles, product of factor measures for product families);
      * ``weighted``  - anisotropic volume ``prod_i weights[i] * t_i``
        (rectangle families only);
      * ``additive``  - axis sum ``sum_i weights[i] * t_i`` for rectangles,
        or ``sum_i weights[i] * m_i(A_i)`` for product families;
      * ``depth``     - edge count of a branch plus ``root_mass``
        (tree families only).
    """

    kind: str = "lebesgue"
    weights: tuple = None
    root_mass: float = 0.0


def lebesgue():
    return MeasureSpec("lebesgue")


def weighted_lebesgue(weights):
    return MeasureSpec("weighted", tuple(float(w) for w in weights))


def additive_measure(weights):
    return MeasureSpec("additive", tuple(float(w) for w in weights))


def depth_measure(root_mass=0.0):
    return MeasureSpec("depth", None, float(root_mass))


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

class IndexFamily:
    """Common interface for the three family kinds."""

    kind = None

    # -- membership and order ------------------------------------------------
    def contains(self, s):
        raise NotImplementedError

    def check(self, *sets):
        for s in sets:
            if not self.contains(s):
                raise FamilyError("set %r does not belong to this %s family"
                                  % (s, self.kind))
        return sets if len(sets) != 1 else sets[0]

    def empty_prime(self):
        """The minimal set of the collection (the analogue of time 0)."""
        raise NotImplementedError

    def intersect(self, a, b):
        raise NotImplementedError

    def is_subset(self, a, b):
        """True iff the set ``a`` is contained in the set ``b``."""
        raise NotImplementedError

    # -- geometry -------------------------------------------------------------
    def set_measure(self, a):
        raise NotImplementedError

    def hausdorff(self, a, b):
        raise NotImplementedError

    def shift(self, a, u):
        raise FamilyError("shift operators are not defined for %s families"
                          % self.kind)

    def dyadic_approx(self, a, level):
        raise FamilyError("dyadic approximation is not defined for %s families"
                          % self.kind)

    def bounding(self, n):
        """The n-th element of the increasing sequence exhausting the space."""
        raise NotImplementedError

    def strictly_inside(self, inner, outer):
        """True iff ``inner`` lies in the interior of ``outer``."""
        raise NotImplementedError

    def canonical_key(self, a):
        """Deterministic sort key; containment-free ties are broken with it."""
        raise NotImplementedError

    def label(self, a):
        """Short human/CSV label for a set."""
        raise NotImplementedError

    # -- interior of a finite union ------------------------------------------
    def inside_union_interior(self, a, parts):
        """True iff ``a`` is contained in the interior of ``union(parts)``.

        Operationalized as: some part contains ``a`` strictly in every
        direction.  See ``strictly_inside`` per family kind.
        """
        return any(self.strictly_inside(a, p) for p in parts)

    # -- exact membership machinery for union containment ---------------------
    def _point_candidates(self, a, covers):
        raise NotImplementedError

    def _point_in(self, point, s):
        raise NotImplementedError


class RectFamily(IndexFamily):
    kind = "rect"

    def __init__(self, dim, measure=None):
        if dim < 1:
            raise FamilyError("rectangle family needs dim >= 1")
        self.dim = int(dim)
        self.measure = measure or lebesgue()
        if self.measure.kind not in ("lebesgue", "weighted", "additive"):
            raise FamilyError("unsupported measure %r for rect family"
                              % (self.measure.kind,))
        if self.measure.kind in ("weighted", "additive"):
            if self.measure.weights is None or len(self.measure.weights) != dim:
                raise FamilyError("measure weights must have one entry per axis")

    def rect(self, *corner):
        if len(corner) == 1 and isinstance(corner[0], (tuple, list)):
            corner = tuple(corner[0])
        return self.check(Rect(tuple(float(c) for c in corner)))

    def contains(self, s):
        return (isinstance(s, Rect) and len(s.corner) == self.dim
                and all(math.isfinite(c) and c >= 0 for c in s.corner))

    def empty_prime(self):
        return Rect((0.0,) * self.dim)

    def intersect(self, a, b):
        self.check(a, b)
        return Rect(tuple(min(x, y) for x, y in zip(a.corner, b.corner)))

    def is_subset(self, a, b):
        self.check(a, b)
        return all(x <= y for x, y in zip(a.corner, b.corner))

    def set_measure(self, a):
        self.check(a)
        m = self.measure
        if m.kind == "lebesgue":
            return math.prod(a.corner)
        if m.kind == "weighted":
            return math.prod(w * c for w, c in zip(m.weights, a.corner))
        return sum(w * c for w, c in zip(m.weights, a.corner))

    def hausdorff(self, a, b):
        self.check(a, b)
        return max(abs(x - y) for x, y in zip(a.corner, b.corner))

    def shift(self, a, u):
        self.check(a, u)
        return Rect(tuple(x + y for x, y in zip(a.corner, u.corner)))

    def dyadic_approx(self, a, level):
        self.check(a)
        if not self.is_subset(a, self.bounding(level)):
            raise FamilyError("set %r exceeds the level-%d bound" % (a, level))
        step = 2.0 ** level
        return Rect(tuple((math.floor(c * step) + 1.0) / step for c in a.corner))

    def bounding(self, n):
        return Rect((float(n),) * self.dim)

    def strictly_inside(self, inner, outer):
        return all(x < y for x, y in zip(inner.corner, outer.corner))

    def canonical_key(self, a):
        return a.corner

    def label(self, a):
        return "A(%s)" % ",".join(repr(c) for c in a.corner)

    def _point_candidates(self, a, covers):
        axes = []
        for j in range(self.dim):
            vals = {a.corner[j]}
            for c in covers:
                t = c.corner[j]
                if t < a.corner[j]:
                    vals.add(math.nextafter(t, math.inf))
            axes.append(sorted(vals))
        return itertools.product(*axes)

    def _point_in(self, point, s):
        return all(x <= y for x, y in zip(point, s.corner))


class TreeFamily(IndexFamily):
    """Branches of a finite rooted tree, one branch per node."""

    kind = "tree"

    def __init__(self, parents, root=0, measure=None):
        self.parents = tuple(int(p) for p in parents)
        self.root = int(root)
        n = len(self.parents)
        if not (0 <= self.root < n) or self.parents[self.root] != self.root:
            raise FamilyError("parents[root] must equal root")
        self.depths = [0] * n
        order = sorted(range(n), key=self._raw_depth)
        for v in order:
            if v != self.root:
                self.depths[v] = self.depths[self.parents[v]] + 1
        self.measure = measure or depth_measure()
        if self.measure.kind != "depth":
            raise FamilyError("tree families use the depth measure")

    @classmethod
    def from_edges(cls, n_nodes, edges, root=0, measure=None):
        parents = [root] * n_nodes
        adj = {v: [] for v in range(n_nodes)}
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {root}
        stack = [root]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    parents[v] = u
                    seen.add(v)
                    stack.append(v)
        if len(seen) != n_nodes:
            raise FamilyError("edge list does not span the tree")
        return cls(parents, root, measure)

    def _raw_depth(self, v):
        d = 0
        while v != self.root:
            v = self.parents[v]
            d += 1
            if d > len(self.parents):
                raise FamilyError("parent array contains a cycle")
        return d

    def branch(self, node):
        return self.check(TreeBranch(int(node)))

    def contains(self, s):
        return isinstance(s, TreeBranch) and 0 <= s.node < len(self.parents)

    def empty_prime(self):
        return TreeBranch(self.root)

    def path_nodes(self, s):
        self.check(s)
        path, v = [], s.node
        while True:
            path.append(v)
            if v == self.root:
                return path
            v = self.parents[v]

    def _lca(self, u, v):
        du, dv = self.depths[u], self.depths[v]
        while du > dv:
            u = self.parents[u]
            du -= 1
        while dv > du:
            v = self.parents[v]
            dv -= 1
        while u != v:
            u, v = self.parents[u], self.parents[v]
        return u

    def intersect(self, a, b):
        self.check(a, b)
        return TreeBranch(self._lca(a.node, b.node))

    def is_subset(self, a, b):
        self.check(a, b)
        return self._lca(a.node, b.node) == a.node

    def set_measure(self, a):
        self.check(a)
        return self.depths[a.node] + self.measure.root_mass

    def hausdorff(self, a, b):
        self.check(a, b)
        lca = self._lca(a.node, b.node)
        return float(self.depths[a.node] + self.depths[b.node]
                     - 2 * self.depths[lca])

    def bounding(self, n):
        deepest = max(range(len(self.parents)), key=lambda v: (self.depths[v], -v))
        return TreeBranch(deepest)

    def strictly_inside(self, inner, outer):
        # Discrete collection: a branch sits in the interior of a part only
        # when it is a strict prefix with at least two edges of slack.
        return (self.is_subset(inner, outer) and inner != outer
                and self.depths[outer.node] - self.depths[inner.node] >= 2)

    def canonical_key(self, a):
        return (self.depths[a.node], a.node)

    def label(self, a):
        return "A(node=%d)" % a.node

    def _point_candidates(self, a, covers):
        return [(v,) for v in self.path_nodes(a)]

    def _point_in(self, point, s):
        return self._lca(point[0], s.node) == point[0]


class ProductFamily(IndexFamily):
    kind = "product"

    def __init__(self, factors, measure=None):
        self.factors = tuple(factors)
        if len(self.factors) < 1:
            raise FamilyError("product family needs at least one factor")
        self.measure = measure or lebesgue()
        if self.measure.kind not in ("lebesgue", "additive"):
            raise FamilyError("unsupported measure %r for product family"
                              % (self.measure.kind,))
        if self.measure.kind == "additive":
            if (self.measure.weights is None
                    or len(self.measure.weights) != len(self.factors)):
                raise FamilyError("measure weights must have one entry per factor")

    @property
    def arity(self):
        return len(self.factors)

    def prod(self, *factor_sets):
        if len(factor_sets) == 1 and isinstance(factor_sets[0], (tuple, list)):
            factor_sets = tuple(factor_sets[0])
        return self.check(ProdSet(tuple(factor_sets)))

    def contains(self, s):
        return (isinstance(s, ProdSet) and len(s.factors) == self.arity
                and all(f.contains(x) for f, x in zip(self.factors, s.factors)))

    def empty_prime(self):
        return ProdSet(tuple(f.empty_prime() for f in self.factors))

    def intersect(self, a, b):
        self.check(a, b)
        return ProdSet(tuple(f.intersect(x, y) for f, x, y
                             in zip(self.factors, a.factors, b.factors)))

    def is_subset(self, a, b):
        self.check(a, b)
        return all(f.is_subset(x, y) for f, x, y
                   in zip(self.factors, a.factors, b.factors))

    def set_measure(self, a):
        self.check(a)
        parts = [f.set_measure(x) for f, x in zip(self.factors, a.factors)]
        if self.measure.kind == "lebesgue":
            return math.prod(parts)
        return sum(w * m for w, m in zip(self.measure.weights, parts))

    def factor_measure(self, i, a_i):
        return self.factors[i].set_measure(a_i)

    def hausdorff(self, a, b):
        self.check(a, b)
        return max(f.hausdorff(x, y) for f, x, y
                   in zip(self.factors, a.factors, b.factors))

    def shift(self, a, u):
        self.check(a, u)
        return ProdSet(tuple(f.shift(x, y) for f, x, y
                             in zip(self.factors, a.factors, u.factors)))

    def dyadic_approx(self, a, level):
        self.check(a)
        return ProdSet(tuple(f.dyadic_approx(x, level) for f, x
                             in zip(self.factors, a.factors)))

    def bounding(self, n):
        return ProdSet(tuple(f.bounding(n) for f in self.factors))

    def strictly_inside(self, inner, outer):
        return all(f.strictly_inside(x, y) for f, x, y
                   in zip(self.factors, inner.factors, outer.factors))

    def canonical_key(self, a):
        key = ()
        for f, x in zip(self.factors, a.factors):
            key = key + tuple(f.canonical_key(x))
        return key

    def label(self, a):
        inner = ",".join(f.label(x)[1:] for f, x in zip(self.factors, a.factors))
        return "A%s" % inner

    def _point_candidates(self, a, covers):
        per_factor = []
        for i, f in enumerate(self.factors):
            sub_covers = [c.factors[i] for c in covers]
            per_factor.append(list(f._point_candidates(a.factors[i], sub_covers)))
        return itertools.product(*per_factor)

    def _point_in(self, point, s):
        return all(f._point_in(p, x) for f, p, x
                   in zip(self.factors, point, s.factors))


# ---------------------------------------------------------------------------
# Constructors and union machinery
# ---------------------------------------------------------------------------

def rect_family(dim, measure=None):
    return RectFamily(dim, measure)


def tree_family(parents, root=0, measure=None):
    return TreeFamily(parents, root, measure)


def product_family(*factors, measure=None):
    """Combine factor families into their product indexing collection."""
    if len(factors) == 1 and isinstance(factors[0], (tuple, list)):
        factors = tuple(factors[0])
    return ProductFamily(factors, measure)


def union_subset(family, a, covers):
    """Exact test of ``a`` being contained in the union of ``covers``.

    Works by enumerating a finite witness grid: if any grid point lies in
    ``a`` but escapes every cover, the containment fails.  Exponential in
    the dimension and number of covers, intended for small instances.
    """
    covers = list(covers)
    if not covers:
        raise FamilyError("union_subset needs at least one cover")
    family.check(a, *covers)
    if any(family.is_subset(a, c) for c in covers):
        return True
    for point in family._point_candidates(a, covers):
        if not any(family._point_in(point, c) for c in covers):
            return False
    return True


def shape_check(family, a, covers):
    """Validate the covering property on one instance.

    Returns True when ``a`` inside the union of ``covers`` implies ``a``
    inside a single cover (vacuously true if ``a`` escapes the union).
    Families constructed here satisfy this for every instance; the check is
    a randomized validator for new family implementations.
    """
    if not union_subset(family, a, covers):
        return True
    return any(family.is_subset(a, c) for c in covers)
