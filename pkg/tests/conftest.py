"""Shared fixtures and the seeded query sampler used by several modules."""

import random

import pytest
from hypothesis import settings

from haltongain import GainQuery, PrimeBasis, first_primes

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")

QUERY_SEED = 20260822
QUERY_COUNT = 500


def sample_queries(
    count: int = QUERY_COUNT, seed: int = QUERY_SEED
) -> list[GainQuery]:
    """Random (u, k, n) queries with d <= 4, levels <= 2, n <= 5000.

    One fixed seed, so every module that consumes these sees the same
    sample and failures reproduce exactly.
    """
    rng = random.Random(seed)
    basis = first_primes(4)
    out = []
    for _ in range(count):
        size = rng.randint(1, 4)
        u = sorted(rng.sample(range(1, 5), size))
        levels = tuple(rng.randint(0, 2) for _ in u)
        n = rng.randint(1, 5000)
        out.append(GainQuery.build(u, levels, n, basis))
    return out


@pytest.fixture(scope="session")
def queries() -> list[GainQuery]:
    return sample_queries()


@pytest.fixture(scope="session")
def basis2() -> PrimeBasis:
    return first_primes(2)


@pytest.fixture(scope="session")
def basis3() -> PrimeBasis:
    return first_primes(3)


@pytest.fixture(scope="session")
def basis4() -> PrimeBasis:
    return first_primes(4)


@pytest.fixture(scope="session")
def basis5() -> PrimeBasis:
    return first_primes(5)
