import itertools
import math

import numpy as np
import pytest

import support
from setmarkov import lattice as lat
from setmarkov.errors import CapacityError, FamilyError
from setmarkov.families import rect_family, tree_family


@pytest.fixture
def fam2():
    return rect_family(2)


def staircase(fam2):
    return lat.make_increment(fam2, fam2.rect(2, 2),
                              [fam2.rect(2, 1), fam2.rect(1, 2)])


class TestClosure:
    def test_two_corner_example(self, fam2):
        sl = lat.semilattice_closure(fam2, [fam2.rect(2, 1), fam2.rect(1, 2)])
        assert sl.sets[0] == fam2.empty_prime()
        assert set(sl.sets) == {fam2.rect(0, 0), fam2.rect(1, 1),
                                fam2.rect(2, 1), fam2.rect(1, 2)}
        sl.validate()

    def test_singleton(self, fam2):
        a = fam2.rect(1.5, 0.5)
        sl = lat.semilattice_closure(fam2, [a])
        assert sl.sets == (fam2.empty_prime(), a)

    def test_three_corner_staircase(self, fam2):
        corners = [(3, 1), (2, 2), (1, 3)]
        sl = lat.semilattice_closure(fam2, [fam2.rect(*c) for c in corners])
        assert len(sl.sets) == 7
        for c in [(2, 1), (1, 2), (1, 1)]:
            assert fam2.rect(*c) in sl.sets
        sl.validate()

    def test_matches_brute_force_fixpoint(self, fam2):
        rng = np.random.default_rng(11)
        for _ in range(25):
            corners = [support.random_corner(rng, 2) for _ in range(4)]
            sl = lat.semilattice_closure(fam2, [fam2.rect(*c) for c in corners])
            expect = support.brute_closure_keys(corners)
            assert {s.corner for s in sl.sets} == expect
            sl.validate()

    def test_reversed_tie_break_is_also_consistent(self, fam2):
        sets = [fam2.rect(2, 1), fam2.rect(1, 2), fam2.rect(3, 0.5)]
        a = lat.semilattice_closure(fam2, sets, tie_break="canonical")
        b = lat.semilattice_closure(fam2, sets, tie_break="reversed")
        a.validate()
        b.validate()
        assert set(a.sets) == set(b.sets)
        assert a.sets != b.sets

    def test_cap(self, fam2):
        rng = np.random.default_rng(0)
        sets = [fam2.rect(*rng.uniform(0, 1, 2)) for _ in range(8)]
        with pytest.raises(CapacityError):
            lat.semilattice_closure(fam2, sets, cap=10)


class TestLeftNeighborhood:
    def test_reduction_example(self, fam2):
        sl = lat.Semilattice(fam2, (fam2.rect(0, 0), fam2.rect(1, 1),
                                    fam2.rect(2, 1), fam2.rect(1, 2)))
        inc = sl.left_neighborhood(3)
        assert inc.apex == fam2.rect(1, 2)
        assert inc.parts == (fam2.rect(1, 1),)

    def test_first_neighborhood_is_anchored_at_bottom(self, fam2):
        sl = lat.semilattice_closure(fam2, [fam2.rect(1.5, 2.5)])
        inc = sl.left_neighborhood(1)
        assert inc.parts == (fam2.empty_prime(),)

    def test_last_staircase_neighborhood(self, fam2):
        rng = np.random.default_rng(5)
        inc0 = support.random_staircase(rng, fam2, 3)
        sl = lat.semilattice_closure(fam2, [inc0.apex, *inc0.parts])
        inc = sl.left_neighborhood(len(sl.sets) - 1)
        assert inc.apex == inc0.apex
        # oracle: maximal elements among all earlier sets intersected down
        meets = [fam2.intersect(s, inc0.apex) for s in sl.sets[:-1]]
        keep = [m for m in meets
                if not any(m != o and fam2.is_subset(m, o) for o in meets)]
        assert set(inc.parts) == set(keep)


class TestExtremal:
    def test_containment_removed(self, fam2):
        got = lat.extremal_representation(
            fam2, [fam2.rect(1, 1), fam2.rect(2, 1)])
        assert got == [fam2.rect(2, 1)]

    def test_incomparable_kept(self, fam2):
        parts = [fam2.rect(2, 1), fam2.rect(1, 2)]
        assert set(lat.extremal_representation(fam2, parts)) == set(parts)

    def test_chains_collapse(self, fam2):
        rng = np.random.default_rng(9)
        for _ in range(20):
            top = np.asarray(support.random_corner(rng, 2))
            chain = [fam2.rect(*(top * f))
                     for f in sorted(rng.uniform(0.1, 1.0, 5))]
            assert lat.extremal_representation(fam2, chain) == [chain[-1]]


class TestMeasure:
    def test_staircase_inclusion_exclusion(self, fam2):
        # oracle: 4 - (2 + 2 - 1) = 1
        inc = staircase(fam2)
        assert lat.increment_measure(fam2, inc) == pytest.approx(1.0)

    def test_empty_increment(self, fam2):
        a = fam2.rect(1, 2)
        inc = lat.make_increment(fam2, a, [a])
        assert inc.empty
        assert lat.increment_measure(fam2, inc) == 0.0

    def test_against_grid_volume_oracle(self, fam2):
        rng = np.random.default_rng(21)
        for _ in range(40):
            _, inc = support.random_rect_increment(rng, dim=2)
            expect = (fam2.set_measure(inc.apex)
                      - support.box_union_volume([p.corner for p in inc.parts]))
            assert lat.increment_measure(fam2, inc) == pytest.approx(expect)

    def test_part_count_guard(self, fam2):
        apex = fam2.rect(30, 30)
        parts = [fam2.rect(i + 1, 25 - i) for i in range(21)]
        inc = lat.make_increment(fam2, apex, parts)
        with pytest.raises(CapacityError):
            lat.increment_measure(fam2, inc)

    def test_parts_required(self, fam2):
        with pytest.raises(FamilyError):
            lat.Increment(fam2.rect(1, 1), (), False)


class TestCoefficients:
    def test_two_part_staircase(self, fam2):
        inc = staircase(fam2)
        got = lat.incl_excl_coefficients(fam2, inc)
        assert got == {fam2.rect(2, 1): 1, fam2.rect(1, 2): 1,
                       fam2.rect(1, 1): -1}

    def test_single_part(self, fam2):
        inc = lat.make_increment(fam2, fam2.rect(2, 2), [fam2.rect(1, 1)])
        assert lat.incl_excl_coefficients(fam2, inc) == {fam2.rect(1, 1): 1}

    def test_three_part_staircase_cancellation(self, fam2):
        inc = lat.make_increment(
            fam2, fam2.rect(4, 4),
            [fam2.rect(3, 1), fam2.rect(2, 2), fam2.rect(1, 3)])
        got = lat.incl_excl_coefficients(fam2, inc)
        assert got[fam2.rect(1, 1)] == 0
        kept = {s: c for s, c in got.items() if c != 0}
        assert set(kept.values()) == {1, -1}
        assert len(kept) == 5

    def test_matches_subset_enumeration_oracle(self, fam2):
        rng = np.random.default_rng(33)
        for _ in range(30):
            _, inc = support.random_rect_increment(rng, dim=2)
            got = lat.incl_excl_coefficients(fam2, inc)
            expect = support.subset_coefficients([p.corner for p in inc.parts])
            assert {s.corner: c for s, c in got.items()} == expect


class TestFrontier:
    def test_three_neighbor_pattern(self, fam2):
        apex = fam2.rect(2, 2)
        inc = lat.make_increment(
            fam2, apex,
            [fam2.rect(1, 1), fam2.rect(2, 1), fam2.rect(1, 2)])
        front = lat.frontier(fam2, inc)
        assert set(front.sets) == {fam2.rect(2, 1), fam2.rect(1, 2),
                                   fam2.rect(1, 1)}
        assert front.sign_of(fam2.rect(1, 1)) == -1
        assert front.sign_of(fam2.rect(2, 1)) == 1

    def test_single_part(self, fam2):
        inc = lat.make_increment(fam2, fam2.rect(2, 2), [fam2.rect(1, 1)])
        front = lat.frontier(fam2, inc)
        assert front.sets == (fam2.rect(1, 1),)
        assert front.signs == (1,)
        assert front.psi == {0: 1, 1: 1}

    def test_interior_sets_are_dropped(self, fam2):
        inc = lat.make_increment(
            fam2, fam2.rect(4, 4),
            [fam2.rect(3, 1), fam2.rect(2, 2), fam2.rect(1, 3)])
        front = lat.frontier(fam2, inc)
        assert len(front.sets) == 5
        assert fam2.rect(1, 1) not in front.sets

    def test_tree_frontier_is_the_deepest_part(self):
        tree = tree_family([0, 0, 0, 1, 1, 2, 2])
        inc = lat.make_increment(tree, tree.branch(5),
                                 [tree.branch(2), tree.branch(0)])
        front = lat.frontier(tree, inc)
        assert front.sets == (tree.branch(2),)
        assert front.signs == (1,)

    def test_frontier_support_equals_nonzero_coefficients(self):
        rng = np.random.default_rng(17)
        for _ in range(150):
            family, inc = support.random_rect_increment(rng)
            front = lat.frontier(family, inc)
            coeffs = lat.incl_excl_coefficients(family, inc)
            nonzero = {s: c for s, c in coeffs.items() if c != 0}
            assert dict(zip(front.sets, front.signs)) == nonzero


class TestPsi:
    def test_two_part_staircase_pairing(self, fam2):
        front = lat.frontier(fam2, staircase(fam2))
        assert front.psi == {0: 1, 1: 1, 2: 3, 3: 3}

    def test_singleton_pairing(self, fam2):
        front = lat.frontier(fam2, lat.make_increment(
            fam2, fam2.rect(1, 1), [fam2.empty_prime()]))
        assert front.psi == {0: 1, 1: 1}

    def test_idempotent_on_image(self, fam2):
        rng = np.random.default_rng(13)
        for _ in range(60):
            inc = support.random_staircase(rng, fam2, int(rng.integers(1, 5)))
            front = lat.frontier(fam2, inc)
            for i, j in front.psi.items():
                assert front.psi[j] == j

    def test_telescoping_identity(self):
        rng = np.random.default_rng(29)
        for _ in range(200):
            family, inc = support.random_rect_increment(rng)
            front = lat.frontier(family, inc)
            vals = rng.normal(size=len(front.sets))
            apex_val = rng.normal()
            at = lambda i: apex_val if i == 0 else vals[i - 1]
            delta = apex_val - front.delta(vals)
            tele = (at(0) - at(front.psi[0])) - sum(
                s * (at(i + 1) - at(front.psi[i + 1]))
                for i, s in enumerate(front.signs))
            assert delta == pytest.approx(tele, abs=1e-12)


class TestNorms:
    def test_single_part_norm_is_the_gap_to_the_part(self, fam2):
        inc = lat.make_increment(fam2, fam2.rect(2, 3), [fam2.rect(1, 1)])
        assert lat.increment_norm(fam2, inc) == fam2.hausdorff(
            fam2.rect(2, 3), fam2.rect(1, 1))

    def test_empty_increment_norm(self, fam2):
        a = fam2.rect(1, 1)
        inc = lat.make_increment(fam2, a, [a])
        assert lat.increment_norm(fam2, inc) == 0.0

    def test_staircase_norm(self, fam2):
        assert lat.increment_norm(fam2, staircase(fam2)) == 1.0

    def test_value_norm(self, fam2):
        front = lat.frontier(fam2, staircase(fam2))
        vals = [1.0, 2.0, 5.0]
        got = lat.value_norm(front, 0.5, vals)
        at = lambda i: 0.5 if i == 0 else vals[i - 1]
        expect = max(abs(at(i) - at(front.psi[i])) for i in range(4))
        assert got == expect


class TestSplit:
    def test_definition_trace(self, fam2):
        inc = lat.make_increment(fam2, fam2.rect(2, 2), [fam2.empty_prime()])
        inner, outer = lat.split(fam2, inc, fam2.rect(1, 1))
        assert inner.apex == fam2.rect(1, 1)
        assert inner.parts == (fam2.empty_prime(),)
        assert outer.apex == fam2.rect(2, 2)
        assert outer.parts == (fam2.rect(1, 1),)

    def test_cut_inside_the_union(self, fam2):
        inc = staircase(fam2)
        inner, outer = lat.split(fam2, inc, fam2.rect(0.5, 0.5))
        assert inner.empty
        assert not outer.empty
        assert set(outer.parts) == set(inc.parts)

    def test_cut_above_the_apex(self, fam2):
        inc = staircase(fam2)
        inner, outer = lat.split(fam2, inc, fam2.rect(5, 5))
        assert outer.empty
        assert inner.apex == inc.apex
        assert set(inner.parts) == set(inc.parts)

    def test_measure_partition(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            family, inc = support.random_rect_increment(rng)
            cut = support.random_cut(rng, family, inc)
            inner, outer = lat.split(family, inc, cut)
            total = (lat.increment_measure(family, inner)
                     + lat.increment_measure(family, outer))
            whole = lat.increment_measure(family, inc)
            assert total == pytest.approx(whole, rel=1e-10, abs=1e-12)


class TestDyadicChain:
    def test_monotone_outer_approximation(self):
        fam = rect_family(2)
        rng = np.random.default_rng(3)
        for _ in range(40):
            a = fam.rect(*rng.uniform(0, 0.95, 2))
            for level in range(1, 7):
                outer = fam.dyadic_approx(a, level)
                finer = fam.dyadic_approx(a, level + 1)
                assert fam.is_subset(a, finer)
                assert fam.is_subset(finer, outer)
                assert fam.hausdorff(a, outer) <= 2.0 ** -level
