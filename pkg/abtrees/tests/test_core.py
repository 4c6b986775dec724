import random

from django.test import SimpleTestCase, override_settings
from hypothesis import given, settings as hypothesis_settings, strategies as st

from abtrees.core import ABTree, even_chunks, node_fuse, node_split
from abtrees.exceptions import (
    AugmentationRequiredError,
    IndexOutOfRangeError,
    InvalidNodeError,
    OrderViolationError,
    PreconditionError,
)
from .helpers import TreeAssertionsMixin, internal, leaf, tree_by_inserts, tree_of


class NodeOperationsTests(SimpleTestCase):

    def test_split_leaf_keeps_left_half_in_place(self):
        node = leaf(1, 2, 3, 4, 5)
        first, second, splitter = node_split(node)
        self.assertIs(first, node)
        self.assertEqual(first.keys, [1, 2])
        self.assertEqual(second.keys, [3, 4, 5])
        self.assertEqual(splitter, 2)

    def test_split_internal_node_can_keep_right_half(self):
        children = [leaf(1, 2), leaf(3, 4), leaf(5, 6), leaf(7, 8)]
        node = internal([2, 4, 6], children)
        first, second, splitter = node_split(node, keep='right')
        self.assertIs(second, node)
        self.assertEqual(first.keys, [2])
        self.assertEqual(second.keys, [6])
        self.assertEqual(splitter, 4)
        self.assertEqual((first.size, second.size), (4, 4))
        self.assertTrue(all(child.parent is first for child in first.children))
        self.assertTrue(all(child.parent is second for child in second.children))

    def test_split_needs_two_children(self):
        with self.assertRaises(InvalidNodeError):
            node_split(leaf(1))

    def test_fuse_internal_nodes_inserts_splitter(self):
        left = internal([2], [leaf(1, 2), leaf(3, 4)])
        right = internal([6], [leaf(5, 6), leaf(7, 8)])
        fused = node_fuse(left, right, 4)
        self.assertIs(fused, left)
        self.assertEqual(fused.keys, [2, 4, 6])
        self.assertEqual(fused.size, 8)
        self.assertEqual(right.keys, [])

    def test_fuse_leaves_drops_splitter(self):
        fused = node_fuse(leaf(1, 2), leaf(5, 6), 3, into='right')
        self.assertEqual(fused.keys, [1, 2, 5, 6])

    def test_fuse_rejects_misplaced_splitter(self):
        with self.assertRaises(OrderViolationError):
            node_fuse(leaf(1, 5), leaf(6, 7), 3)

    def test_fuse_rejects_leaf_with_internal_node(self):
        with self.assertRaises(InvalidNodeError):
            node_fuse(leaf(1, 2), internal([4], [leaf(3, 4), leaf(5, 6)]), 2)


class ABTreeTests(TreeAssertionsMixin, SimpleTestCase):

    def test_search_finds_present_key(self):
        tree = tree_of(range(1, 101))
        self.assertEqual(tree.search(37), 37)
        self.assertIn(37, tree)

    def test_search_misses_absent_key(self):
        tree = tree_of(range(2, 201, 2))
        self.assertIsNone(tree.search(3))
        self.assertIsNone(ABTree().search(3))

    def test_rejects_parameters_below_two_a(self):
        with self.assertRaises(PreconditionError):
            ABTree(4, 7)

    @override_settings(ABTREE_DEFAULT_A=3, ABTREE_DEFAULT_B=6)
    def test_defaults_come_from_settings(self):
        tree = ABTree()
        self.assertEqual((tree.a, tree.b), (3, 6))

    def test_duplicate_insert_and_missing_delete_return_false(self):
        tree = tree_of([1, 2, 3])
        self.assertFalse(tree.insert(2))
        self.assertFalse(tree.delete(9))
        self.assertEqual(len(tree), 3)

    def test_small_bulk_load_is_a_single_leaf(self):
        for n in range(1, 9):
            tree = tree_of(range(n))
            self.assertEqual(tree.rank, 1)
            self.assertTrue(tree.root.is_leaf)

    def test_even_chunks_stay_within_degree_bounds(self):
        for n in range(9, 400):
            sizes = [end - start for start, end in even_chunks(n, 4, 8)]
            self.assertEqual(sum(sizes), n)
            self.assertTrue(all(4 <= size <= 8 for size in sizes), (n, sizes))

    def test_random_inserts_then_deletes_empty_the_tree(self):
        rng = random.Random(7)
        keys = rng.sample(range(10 ** 6), 10 ** 4)
        tree = tree_by_inserts(keys)
        self.assertValidTree(tree, keys)
        rng.shuffle(keys)
        for key in keys:
            self.assertTrue(tree.delete(key))
        self.assertTrue(tree.is_empty())
        self.assertEqual(tree.rank, 0)
        self.assertValidTree(tree, [])

    def test_select_ith_matches_sorted_order(self):
        rng = random.Random(3)
        keys = sorted(rng.sample(range(5000), 700))
        tree = tree_by_inserts(keys, 2, 4)
        for i in range(1, len(keys) + 1):
            self.assertEqual(tree.select_ith(i), keys[i - 1])

    def test_select_ith_errors(self):
        tree = tree_of(range(10))
        with self.assertRaises(IndexOutOfRangeError):
            tree.select_ith(0)
        with self.assertRaises(IndexOutOfRangeError):
            tree.select_ith(11)
        with self.assertRaises(AugmentationRequiredError):
            tree_of(range(10), augmented=False).select_ith(1)

    def test_validate_reports_overfull_leaf(self):
        tree = tree_of(range(1, 200))
        node = tree.root
        while not node.is_leaf:
            node = node.children[0]
        node.keys[1:1] = [node.keys[0] + i / 100 for i in range(1, tree.b)]
        report = tree.validate()
        self.assertFalse(report.ok)
        self.assertIn('degree-max', report.rules())

    def test_validate_reports_unordered_routers(self):
        root = internal([5], [leaf(1, 2, 6), leaf(7, 8)])
        tree = ABTree.from_root(root, 2, 2, 4)
        self.assertIn('key-order', tree.validate().rules())

    def test_validate_reports_stale_subtree_size(self):
        tree = tree_of(range(100))
        tree.root.children[0].size += 1
        self.assertIn('subtree-size', tree.validate().rules())

    def test_clone_is_independent(self):
        tree = tree_of(range(50))
        copy = tree.clone()
        copy.insert(1000)
        tree.delete(0)
        self.assertValidTree(copy, list(range(50)) + [1000])
        self.assertValidTree(tree, range(1, 50))

    @hypothesis_settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.booleans(), st.integers(0, 300)), max_size=400),
           st.sampled_from([(2, 4), (3, 6), (4, 8)]))
    def test_operations_agree_with_set_oracle(self, ops, params):
        tree = ABTree(*params)
        oracle = set()
        for is_insert, key in ops:
            if is_insert:
                self.assertEqual(tree.insert(key), key not in oracle)
                oracle.add(key)
            else:
                self.assertEqual(tree.delete(key), key in oracle)
                oracle.discard(key)
        self.assertValidTree(tree, oracle)
        if oracle:
            self.assertEqual(tree.min_key(), min(oracle))
            self.assertEqual(tree.max_key(), max(oracle))
