import random
from math import log2

from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from abtrees.core import ABTree, refresh_root_paths
from abtrees.counters import WorkCounters
from abtrees.exceptions import OrderViolationError, PreconditionError
from abtrees.sequential import (
    erase_sorted,
    join2,
    join_many_seq,
    preprocess_spines,
    search_sorted,
    split_at,
    union_sorted,
)
from abtrees.spine_join import join2_preprocessed
from abtrees.spines import LEFT, RIGHT, spine_nodes
from .helpers import TreeAssertionsMixin, leaf, random_keys, random_slices, tree_of


class FingerUpdateTests(TreeAssertionsMixin, SimpleTestCase):

    def test_union_with_empty_batch_visits_nothing(self):
        tree = tree_of(range(100))
        counters = WorkCounters()
        self.assertIs(union_sorted(tree, [], counters), tree)
        self.assertEqual(counters.visited_nodes, 0)

    def test_union_into_empty_tree(self):
        tree = union_sorted(ABTree(), range(1, 501))
        self.assertValidTree(tree, range(1, 501))

    def test_union_rejects_unsorted_batch(self):
        with self.assertRaises(PreconditionError):
            union_sorted(tree_of(range(10)), [5, 3])

    def test_union_matches_oracle_and_visit_bound(self):
        rng = random.Random(11)
        m, k = 2 ** 16, 2 ** 8
        initial = random_keys(m, rng, upper=2 ** 24)
        batch = random_keys(k, rng, upper=2 ** 24)
        tree = tree_of(initial)
        counters = WorkCounters()
        union_sorted(tree, batch, counters)
        self.assertValidTree(tree, set(initial) | set(batch))
        self.assertLessEqual(counters.visited_nodes, 4 * k * (1 + log2(m / k)))

    def test_visit_constant_stable_across_sizes(self):
        rng = random.Random(21)
        ratios = {}
        for m in (2 ** 12, 2 ** 14, 2 ** 16, 2 ** 18):
            for k in (2 ** 4, 2 ** 8, 2 ** 12):
                total = 0
                for _ in range(3):
                    initial = random_keys(m, rng, upper=2 ** 28)
                    batch = random_keys(k, rng, upper=2 ** 28)
                    counters = WorkCounters()
                    union_sorted(tree_of(initial), batch, counters)
                    total += counters.visited_nodes
                ratios[m, k] = total / (3 * k * (1 + log2(m / k)))
        fitted = ratios[2 ** 12, 2 ** 4]
        for cell, ratio in ratios.items():
            self.assertLessEqual(ratio, 2 * fitted, cell)

    def test_union_with_overlapping_batch(self):
        tree = tree_of(range(0, 400, 2), 2, 4)
        union_sorted(tree, range(0, 400, 3))
        self.assertValidTree(tree, set(range(0, 400, 2)) | set(range(0, 400, 3)))

    def test_erase_everything(self):
        tree = tree_of(range(1, 301))
        erase_sorted(tree, range(1, 301))
        self.assertTrue(tree.is_empty())
        self.assertValidTree(tree, [])

    def test_erase_matches_oracle(self):
        rng = random.Random(5)
        initial = random_keys(3000, rng)
        doomed = sorted(rng.sample(initial, 1200) + random_keys(100, rng, upper=10 ** 6))
        doomed = sorted(set(doomed))
        tree = tree_of(initial, 2, 4)
        erase_sorted(tree, doomed)
        self.assertValidTree(tree, set(initial) - set(doomed))

    def test_search_sorted_reports_present_keys(self):
        tree = tree_of(range(0, 1000, 5))
        self.assertEqual(search_sorted(tree, list(range(0, 50))), list(range(0, 50, 5)))
        self.assertEqual(search_sorted(ABTree(), [1, 2]), [])

    @hypothesis_settings(max_examples=40, deadline=None)
    @given(st.sets(st.integers(0, 2000), max_size=300),
           st.sets(st.integers(0, 2000), max_size=200),
           st.sets(st.integers(0, 2000), max_size=200))
    def test_union_then_erase_agree_with_sets(self, initial, added, removed):
        tree = tree_of(initial, 2, 4)
        union_sorted(tree, sorted(added))
        erase_sorted(tree, sorted(removed))
        self.assertValidTree(tree, (initial | added) - removed)


class JoinSplitTests(TreeAssertionsMixin, SimpleTestCase):

    def test_join_with_empty_tree(self):
        tree = tree_of(range(10))
        self.assertIs(join2(tree, ABTree()), tree)

    def test_join_two_leaves(self):
        tree = join2(tree_of([1]), tree_of([2]))
        self.assertValidTree(tree, [1, 2])

    def test_join_taller_left_walks_rank_difference(self):
        left, right = tree_of(range(1, 1001)), tree_of(range(1001, 1011))
        steps = left.rank - right.rank
        counters = WorkCounters()
        tree = join2(left, right, counters=counters)
        self.assertValidTree(tree, range(1, 1011))
        self.assertEqual(counters.visited_nodes, steps + 1)

    def test_join_taller_right(self):
        tree = join2(tree_of(range(5)), tree_of(range(5, 2000), 4, 8))
        self.assertValidTree(tree, range(2000))

    def test_join_rejects_overlap(self):
        with self.assertRaises(OrderViolationError):
            join2(tree_of([1, 5]), tree_of([3, 4]))

    def test_join_rejects_mismatched_parameters(self):
        with self.assertRaises(PreconditionError):
            join2(tree_of([1], 2, 4), tree_of([2], 4, 8))

    def test_split_example(self):
        left, right = split_at(tree_of(range(1, 101)), 40)
        self.assertValidTree(left, range(1, 41))
        self.assertValidTree(right, range(41, 101))

    def test_split_below_minimum(self):
        tree = tree_of(range(1, 101))
        left, right = split_at(tree, 0)
        self.assertTrue(left.is_empty())
        self.assertValidTree(right, range(1, 101))

    def test_split_above_maximum(self):
        left, right = split_at(tree_of(range(1, 101)), 500)
        self.assertValidTree(left, range(1, 101))
        self.assertTrue(right.is_empty())

    def test_split_consumes_input(self):
        tree = tree_of(range(50))
        split_at(tree, 20)
        self.assertTrue(tree.is_empty())

    @hypothesis_settings(max_examples=60, deadline=None)
    @given(st.sets(st.integers(0, 5000), min_size=1, max_size=600), st.integers(-10, 5010),
           st.sampled_from([(2, 4), (3, 7), (4, 8)]))
    def test_split_then_join_restores_elements(self, keys, x, params):
        left, right = split_at(tree_of(keys, *params), x)
        self.assertValidTree(left, [k for k in keys if k <= x])
        self.assertValidTree(right, [k for k in keys if k > x])
        self.assertValidTree(join2(left, right, splitter=x), keys)


class PreprocessTests(TreeAssertionsMixin, SimpleTestCase):

    def assertNoFullSpineNodes(self, tree):
        for side in (LEFT, RIGHT):
            for node in spine_nodes(tree, side):
                if node is not tree.root:
                    self.assertLess(node.degree, tree.b)

    def test_tree_without_full_spine_nodes_is_unchanged(self):
        tree = tree_of(range(60), 4, 8)
        before = [node.keys[:] for node in spine_nodes(tree, RIGHT)]
        counters = WorkCounters()
        preprocess_spines(tree, counters)
        self.assertEqual(counters.preprocess_splits, 0)
        self.assertEqual([node.keys for node in spine_nodes(tree, RIGHT)], before)
        self.assertTrue(tree.is_preprocessed())

    def test_full_spine_nodes_are_split(self):
        rng = random.Random(2)
        for _ in range(20):
            keys = random_keys(rng.randint(1, 3000), rng)
            tree = tree_of([], 2, 4)
            union_sorted(tree, keys)
            preprocess_spines(tree)
            self.assertValidTree(tree, keys)
            self.assertNoFullSpineNodes(tree)
            self.assertTrue(tree.is_preprocessed())

    def test_join_many_requires_preprocessing(self):
        with self.assertRaises(PreconditionError):
            join_many_seq([tree_of(range(10)), tree_of(range(10, 20))])

    def test_join_many_single_tree(self):
        tree = preprocess_spines(tree_of(range(10)))
        self.assertIs(join_many_seq([tree]), tree)

    def test_join_many_concatenates_slices(self):
        rng = random.Random(8)
        keys = random_keys(5000, rng)
        slices = random_slices(keys, 40, rng)
        trees = [preprocess_spines(tree_of(part, 2, 4)) for part in slices]
        result = join_many_seq(trees)
        self.assertTrue(result.augmented)
        self.assertValidTree(result, keys)
        for i in rng.sample(range(1, len(keys) + 1), 200):
            self.assertEqual(result.select_ith(i), keys[i - 1])

    def test_join_many_of_leaves(self):
        trees = [preprocess_spines(ABTree.from_root(leaf(i), 1, 2, 4)) for i in range(200)]
        result = join_many_seq(trees)
        self.assertValidTree(result, range(200))
        self.assertEqual(result.select_ith(150), 149)

    def test_join_many_with_saved_leaves_sizes_to_caller(self):
        rng = random.Random(9)
        keys = random_keys(3000, rng)
        trees = [preprocess_spines(tree_of(part, 2, 4)) for part in random_slices(keys, 50, rng)]
        saved = []
        result = join_many_seq(trees, saved=saved)
        self.assertTrue(saved)
        refresh_root_paths(result, saved)
        self.assertValidTree(result, keys)

    def test_preprocessed_join_keeps_sizes(self):
        left = preprocess_spines(tree_of(range(3000), 2, 4))
        right = preprocess_spines(tree_of(range(3000, 3050), 2, 4))
        result = join2_preprocessed(left, right)
        self.assertValidTree(result, range(3050))
        self.assertEqual(result.select_ith(3040), 3039)

        left = preprocess_spines(tree_of(range(20), 2, 4))
        right = preprocess_spines(tree_of(range(20, 4000), 2, 4))
        result = join2_preprocessed(left, right)
        self.assertValidTree(result, range(4000))
        self.assertEqual(result.select_ith(10), 9)
