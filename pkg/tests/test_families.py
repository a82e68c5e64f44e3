import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setmarkov.errors import FamilyError
from setmarkov.families import (additive_measure, product_family, rect_family,
                                shape_check, tree_family, union_subset,
                                weighted_lebesgue)

# the 7-node example tree: 0 -> (1, 2), 1 -> (3, 4), 2 -> (5, 6)
SEVEN = [0, 0, 0, 1, 1, 2, 2]


@pytest.fixture
def fam2():
    return rect_family(2)


@pytest.fixture
def tree():
    return tree_family(SEVEN)


def brute_branch_meet(tree_fam, u, v):
    # oracle: intersect the two root paths and take the deepest common node
    pu = set(tree_fam.path_nodes(tree_fam.branch(u)))
    pv = set(tree_fam.path_nodes(tree_fam.branch(v)))
    common = pu & pv
    return max(common, key=lambda n: tree_fam.depths[n])


class TestIntersect:
    def test_componentwise_min(self, fam2):
        assert fam2.intersect(fam2.rect(2, 1), fam2.rect(1, 2)) == fam2.rect(1, 1)

    def test_idempotent(self, fam2):
        a = fam2.rect(1.3, 0.7)
        assert fam2.intersect(a, a) == a

    def test_tree_meets_match_path_oracle(self, tree):
        for u in range(7):
            for v in range(7):
                got = tree.intersect(tree.branch(u), tree.branch(v))
                assert got.node == brute_branch_meet(tree, u, v)

    def test_mixed_kinds_rejected(self, fam2, tree):
        with pytest.raises(FamilyError):
            fam2.intersect(fam2.rect(1, 1), tree.branch(2))


class TestSubset:
    def test_rect(self, fam2):
        assert fam2.is_subset(fam2.rect(1, 1), fam2.rect(2, 2))
        assert not fam2.is_subset(fam2.rect(2, 1), fam2.rect(1, 2))

    def test_product_factorwise(self):
        pf = product_family(rect_family(1), rect_family(1))
        a = pf.prod(pf.factors[0].rect(1.0), pf.factors[1].rect(3.0))
        b = pf.prod(pf.factors[0].rect(2.0), pf.factors[1].rect(2.0))
        assert not pf.is_subset(a, b)
        assert pf.is_subset(pf.intersect(a, b), b)

    def test_tree_prefix(self, tree):
        assert tree.is_subset(tree.branch(1), tree.branch(3))
        assert not tree.is_subset(tree.branch(3), tree.branch(4))


class TestMeasure:
    def test_lebesgue_volume(self, fam2):
        assert fam2.set_measure(fam2.rect(2, 2)) == 4.0

    def test_weighted_volume(self):
        fam = rect_family(2, weighted_lebesgue([2.0, 3.0]))
        assert fam.set_measure(fam.rect(1, 1)) == 6.0

    def test_additive_axis_sum_on_product(self):
        # one-point factor sets: 2*1 + 3*1 = 5
        pf = product_family(rect_family(1), rect_family(1),
                            measure=additive_measure([2.0, 3.0]))
        a = pf.prod(pf.factors[0].rect(1.0), pf.factors[1].rect(1.0))
        assert pf.set_measure(a) == 5.0

    def test_tree_depth(self, tree):
        assert tree.set_measure(tree.empty_prime()) == 0.0
        assert tree.set_measure(tree.branch(5)) == 2.0


class TestHausdorff:
    def test_examples(self, fam2):
        assert fam2.hausdorff(fam2.rect(1, 1), fam2.rect(1, 1)) == 0.0
        assert fam2.hausdorff(fam2.rect(2, 1), fam2.rect(1, 2)) == 1.0
        assert fam2.hausdorff(fam2.rect(0, 0), fam2.rect(3, 1)) == 3.0

    def test_tree_path_metric(self, tree):
        # siblings at depth 2 below node 1: up 1 edge and down 1
        assert tree.hausdorff(tree.branch(3), tree.branch(4)) == 2.0
        assert tree.hausdorff(tree.branch(3), tree.branch(5)) == 4.0


class TestShift:
    def test_corner_addition(self, fam2):
        assert fam2.shift(fam2.rect(2, 2), fam2.rect(1, 1)) == fam2.rect(3, 3)

    def test_zero_shift(self, fam2):
        a = fam2.rect(1.2, 0.4)
        assert fam2.shift(a, fam2.empty_prime()) == a

    def test_shifting_the_origin_gives_the_shift(self, fam2):
        u = fam2.rect(0.7, 1.9)
        assert fam2.shift(fam2.empty_prime(), u) == u

    def test_trees_unsupported(self, tree):
        with pytest.raises(FamilyError):
            tree.shift(tree.branch(1), tree.branch(2))


class TestDyadic:
    def test_level_two(self):
        fam = rect_family(2)
        got = fam.dyadic_approx(fam.rect(0.3, 0.5), 2)
        # 0.5 is already dyadic and still moves up one slot for strictness
        assert got == fam.rect(0.5, 0.75)

    def test_out_of_bound(self):
        fam = rect_family(1)
        with pytest.raises(FamilyError):
            fam.dyadic_approx(fam.rect(5.0), 2)

    def test_double_application_is_one_grid_step(self):
        fam = rect_family(1)
        a = fam.rect(0.3)
        once = fam.dyadic_approx(a, 3)
        twice = fam.dyadic_approx(once, 3)
        assert fam.is_subset(once, twice)
        assert fam.hausdorff(once, twice) == pytest.approx(2.0 ** -3)

    @settings(max_examples=60, deadline=None)
    @given(st.tuples(st.floats(0.0, 0.9), st.floats(0.0, 0.9)),
           st.integers(1, 6))
    def test_chain_and_rate(self, corner, level):
        fam = rect_family(2)
        a = fam.rect(*corner)
        outer = fam.dyadic_approx(a, level)
        inner = fam.dyadic_approx(a, level + 1)
        assert fam.strictly_inside(a, outer)
        assert fam.is_subset(inner, outer)
        assert fam.hausdorff(a, outer) <= 2.0 ** -level


class TestUnionsAndShape:
    def test_union_subset_detects_escape(self, fam2):
        covers = [fam2.rect(2, 1), fam2.rect(1, 2)]
        assert union_subset(fam2, fam2.rect(1, 1), covers)
        assert not union_subset(fam2, fam2.rect(1.5, 1.5), covers)

    def test_shape_on_random_rects(self, fam2):
        rng = np.random.default_rng(1)
        for _ in range(50):
            a = fam2.rect(*rng.uniform(0, 2, 2))
            covers = [fam2.rect(*rng.uniform(0, 2, 2)) for _ in range(3)]
            assert shape_check(fam2, a, covers)

    def test_shape_on_tree_prefixes(self, tree):
        rng = np.random.default_rng(2)
        nodes = range(7)
        for _ in range(50):
            a = tree.branch(rng.choice(nodes))
            covers = [tree.branch(v) for v in rng.choice(nodes, 3)]
            assert shape_check(tree, a, covers)


class TestProductFamily:
    def test_behaves_like_rect2(self):
        pf = product_family(rect_family(1), rect_family(1))
        fam2 = rect_family(2)
        rng = np.random.default_rng(3)

        def lift(c):
            return pf.prod(pf.factors[0].rect(c[0]), pf.factors[1].rect(c[1]))

        for _ in range(50):
            a, b = rng.uniform(0, 3, 2), rng.uniform(0, 3, 2)
            pa, pb = lift(a), lift(b)
            ra, rb = fam2.rect(*a), fam2.rect(*b)
            assert pf.intersect(pa, pb) == lift(fam2.intersect(ra, rb).corner)
            assert pf.is_subset(pa, pb) == fam2.is_subset(ra, rb)
            assert pf.set_measure(pa) == pytest.approx(fam2.set_measure(ra))
            assert pf.hausdorff(pa, pb) == fam2.hausdorff(ra, rb)
            assert pf.shift(pa, pb) == lift(fam2.shift(ra, rb).corner)
            assert pf.strictly_inside(pa, pb) == fam2.strictly_inside(ra, rb)

    def test_minimal_set(self):
        pf = product_family(rect_family(1), tree_family(SEVEN))
        bottom = pf.empty_prime()
        assert bottom.factors[0].corner == (0.0,)
        assert bottom.factors[1].node == 0
