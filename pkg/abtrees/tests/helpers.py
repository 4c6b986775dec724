import random
from typing import List, Optional

from abtrees.core import ABTree, Node


def tree_of(keys, a: int = 4, b: int = 8, augmented: bool = True) -> ABTree:
    return ABTree.from_keys(keys, a, b, augmented)


def tree_by_inserts(keys, a: int = 4, b: int = 8) -> ABTree:
    tree = ABTree(a, b)
    for key in keys:
        tree.insert(key)
    return tree


def leaf(*keys) -> Node:
    return Node(list(keys))


def internal(keys: List, children: List[Node]) -> Node:
    return Node(list(keys), list(children))


def random_slices(keys: List[int], parts: int, rng: random.Random) -> List[List[int]]:
    """Cut sorted keys into ``parts`` non-empty consecutive runs"""
    keys = sorted(keys)
    cuts = sorted(rng.sample(range(1, len(keys)), parts - 1))
    bounds = [0] + cuts + [len(keys)]
    return [keys[bounds[i]:bounds[i + 1]] for i in range(parts)]


def random_keys(n: int, rng: random.Random, upper: Optional[int] = None) -> List[int]:
    return sorted(rng.sample(range(upper or 10 * n + 10), n))


class TreeAssertionsMixin:
    """Assertions shared by the tree test cases"""

    def assertValidTree(self, tree: ABTree, expected=None):
        report = tree.validate()
        self.assertTrue(report.ok, report.violations[:5])
        if expected is not None:
            expected = sorted(set(expected))
            self.assertEqual(list(tree), expected)
            self.assertEqual(len(tree), len(expected))
