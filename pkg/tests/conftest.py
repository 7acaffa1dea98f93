import random

import pytest

from prunex.gen import gen_random, random_tree


def small_instance(seed: int, reasonable: bool = True):
    """Random instance with n <= 12, d <= 3, s <= 7."""
    rng = random.Random(seed)
    n = rng.randint(3, 12)
    d = rng.randint(1, 3)
    if reasonable:
        return gen_random(seed, n=n, d=d, value_range=4, max_depth=3)
    data, _ = gen_random(seed, n=n, d=d, value_range=4)
    return data, random_tree(rng, data, rng.randint(0, 7), relabel=rng.random() < 0.7)


@pytest.fixture
def instances():
    return small_instance
