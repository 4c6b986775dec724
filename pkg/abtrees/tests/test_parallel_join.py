import random
from math import log2

from django.test import SimpleTestCase

from abtrees.core import ABTree
from abtrees.counters import WorkCounters
from abtrees.exceptions import PreconditionError
from abtrees.parallel_join import (
    JoinRoundState,
    coin_flips,
    initiates_join,
    lightweight_par_join,
    optimal_par_join,
    pairwise_par_join,
    plain_members,
    repair_subtree_sizes,
)
from abtrees.sequential import join2, preprocess_spines
from .helpers import TreeAssertionsMixin, random_keys, random_slices, tree_of


def slice_trees(keys, parts, rng, a=4, b=8, preprocess=False):
    trees = [tree_of(part, a, b) for part in random_slices(keys, parts, rng)]
    if preprocess:
        for tree in trees:
            preprocess_spines(tree)
    return trees


class JoinConditionTests(SimpleTestCase):

    def test_local_minimum_joins(self):
        for coins in ([0, 0, 0], [1, 1, 1], [0, 1, 0]):
            self.assertTrue(initiates_join(1, [3, 1, 2], coins))

    def test_taller_left_neighbour_blocks_right_rise(self):
        self.assertFalse(initiates_join(1, [1, 2, 3], [1, 1, 1]))

    def test_adjacent_trees_never_both_join(self):
        rng = random.Random(17)
        for _ in range(500):
            n = rng.randint(2, 40)
            ranks = [rng.randint(1, 4) for _ in range(n)]
            coins = [rng.randint(0, 1) for _ in range(n)]
            flags = [initiates_join(i, ranks, coins) for i in range(n)]
            for i in range(n - 1):
                self.assertFalse(flags[i] and flags[i + 1], (ranks, coins, i))

    def test_plain_members(self):
        self.assertEqual(plain_members([3, 2, 2, 2, 1, 4, 4]), [1, 2, 3, 5, 6])
        self.assertEqual(plain_members([1, 2, 3]), [])

    def test_coins_are_reproducible(self):
        self.assertEqual(coin_flips(7, 3, 64), coin_flips(7, 3, 64))
        self.assertNotEqual(coin_flips(7, 3, 64), coin_flips(7, 4, 64))
        self.assertTrue(set(coin_flips(1, 1, 200)) <= {0, 1})

    def test_plain_run_shrinks_by_a_constant_share(self):
        ranks = [2] * 1024
        for seed in range(10):
            coins = coin_flips(seed, 1, len(ranks))
            joined = sum(initiates_join(i, ranks, coins) for i in range(len(ranks)))
            self.assertGreaterEqual(joined / len(ranks), 0.15)


class PairwiseJoinTests(TreeAssertionsMixin, SimpleTestCase):

    def test_single_tree(self):
        tree = tree_of(range(10))
        self.assertIs(pairwise_par_join([tree], workers=2), tree)

    def test_two_trees(self):
        result = pairwise_par_join([tree_of(range(10)), tree_of(range(10, 30))], workers=2)
        self.assertValidTree(result, range(30))

    def test_thirty_one_slices_take_five_rounds(self):
        rng = random.Random(1)
        keys = random_keys(10000, rng)
        counters = WorkCounters()
        result = pairwise_par_join(slice_trees(keys, 31, rng), workers=4, counters=counters)
        self.assertEqual(counters.rounds, 5)
        self.assertValidTree(result, keys)
        self.assertEqual(result.select_ith(len(keys) // 2), keys[len(keys) // 2 - 1])


class LightweightJoinTests(TreeAssertionsMixin, SimpleTestCase):

    def test_needs_preprocessed_trees(self):
        with self.assertRaises(PreconditionError):
            lightweight_par_join([tree_of(range(10)), tree_of(range(10, 20))], workers=2)

    def test_single_tree(self):
        tree = preprocess_spines(tree_of(range(10)))
        self.assertIs(lightweight_par_join([tree], workers=2), tree)

    def test_empty_trees_are_skipped(self):
        trees = [ABTree(), preprocess_spines(tree_of(range(10))), ABTree(),
                 preprocess_spines(tree_of(range(10, 20)))]
        self.assertValidTree(lightweight_par_join(trees, workers=2), range(20))

    def test_thirty_one_slices(self):
        rng = random.Random(2)
        keys = random_keys(8000, rng)
        counters = WorkCounters()
        state = JoinRoundState(0, [], [])
        result = lightweight_par_join(slice_trees(keys, 31, rng, preprocess=True),
                                      workers=4, seed=5, counters=counters, state=state)
        self.assertValidTree(result, keys)
        self.assertEqual(counters.iterations, state.iteration)
        self.assertGreater(state.iteration, 0)
        for ranks in state.attach_log.values():
            self.assertEqual(ranks, sorted(ranks))

    def test_sizes_repaired_for_order_statistics(self):
        rng = random.Random(3)
        keys = random_keys(20000, rng)
        result = lightweight_par_join(slice_trees(keys, 256, rng, 2, 4, preprocess=True),
                                      workers=8, seed=11)
        self.assertValidTree(result, keys)
        for i in rng.sample(range(1, len(keys) + 1), 300):
            self.assertEqual(result.select_ith(i), keys[i - 1])

    def test_same_seed_same_rounds(self):
        rng = random.Random(4)
        keys = random_keys(4000, rng)
        slices = random_slices(keys, 64, rng)
        rounds = []
        for _ in range(2):
            state = JoinRoundState(0, [], [])
            trees = [preprocess_spines(tree_of(part)) for part in slices]
            lightweight_par_join(trees, workers=4, seed=9, state=state)
            rounds.append(state.rounds)
        self.assertEqual(rounds[0], rounds[1])

    def test_iterations_logarithmic_and_plain_runs_shrink(self):
        for count in (2 ** 6, 2 ** 8, 2 ** 10):
            keys = list(range(16 * count))
            m = len(keys)
            iterations, shrinkage = [], []
            for seed in range(6):
                trees = [preprocess_spines(tree_of(keys[i:i + 16])) for i in range(0, m, 16)]
                state = JoinRoundState(seed, [], [])
                result = lightweight_par_join(trees, workers=8, seed=seed, state=state)
                self.assertValidTree(result, keys)
                iterations.append(state.iteration)
                shrinkage.append(state.plain_shrinkage())
            self.assertLessEqual(sum(iterations) / len(iterations), 8 * (log2(m) + log2(count)), count)
            self.assertGreaterEqual(sum(shrinkage) / len(shrinkage), 0.15, count)


class OptimalJoinTests(TreeAssertionsMixin, SimpleTestCase):

    def test_two_hundred_fifty_six_slices(self):
        rng = random.Random(6)
        keys = random_keys(30000, rng)
        result = optimal_par_join(slice_trees(keys, 256, rng, 2, 4), workers=8, seed=3)
        self.assertFalse(result.augmented)
        self.assertValidTree(result, keys)

    def test_two_trees(self):
        trees = [tree_of(range(i * 10, i * 10 + 10)) for i in range(2)]
        result = optimal_par_join(trees, workers=2)
        self.assertValidTree(result, range(20))

    def test_algorithms_agree(self):
        rng = random.Random(7)
        for instance in range(20):
            keys = random_keys(rng.randint(200, 6000), rng)
            slices = random_slices(keys, rng.randint(2, 60), rng)
            sequential = tree_of(slices[0])
            for part in slices[1:]:
                sequential = join2(sequential, tree_of(part))
            results = {
                'SJ': sequential,
                'PPJ': pairwise_par_join([tree_of(part) for part in slices], workers=4),
                'PJ': lightweight_par_join(
                    [preprocess_spines(tree_of(part)) for part in slices], workers=4, seed=instance,
                ),
                'OPJ': optimal_par_join([tree_of(part) for part in slices], workers=4, seed=instance),
            }
            for name, result in results.items():
                with self.subTest(instance=instance, algo=name):
                    self.assertValidTree(result, keys)
            self.assertEqual(len({tuple(result) for result in results.values()}), 1)


class RepairTests(SimpleTestCase):

    def test_nothing_saved(self):
        self.assertEqual(repair_subtree_sizes(tree_of(range(100)), []), 0)

    def test_stale_path_is_recounted(self):
        tree = tree_of(range(1000))
        node = tree.root
        path = [node]
        while not node.is_leaf:
            node = node.children[-1]
            path.append(node)
        for stale in path[:-1]:
            stale.size = 0
        recounted = repair_subtree_sizes(tree, [path[-1]], workers=2)
        self.assertEqual(recounted, len(path))
        self.assertTrue(tree.validate().ok)
