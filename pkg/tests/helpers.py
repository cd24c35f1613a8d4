"""Shared generators for the test suite."""

import numpy as np
from hypothesis import strategies as st

from spatial_coupling.profiles import Grid, ProfilePair, random_monotone_profile, random_profile

COARSE = Grid.from_bounds(-8.0, 8.0, 1 / 16)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def monotone_pair(seed: int, grid: Grid = COARSE) -> ProfilePair:
    rng = np.random.default_rng(seed)
    return ProfilePair(random_monotone_profile(rng, grid), random_monotone_profile(rng, grid))


def scrambled_pair(seed: int, grid: Grid = COARSE) -> ProfilePair:
    rng = np.random.default_rng(seed)
    return ProfilePair(random_profile(rng, grid), random_profile(rng, grid))


def two_monotone_pairs(seed: int, grid: Grid = COARSE):
    rng = np.random.default_rng(seed)
    draw = lambda: random_monotone_profile(rng, grid)  # noqa: E731
    return ProfilePair(draw(), draw()), ProfilePair(draw(), draw())
