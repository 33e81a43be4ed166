from functools import lru_cache

import pytest

from x0plus.modeldb import LEVELS, load_model

SINGLE_PATCH = (137, 173, 199, 251, 311, 157, 181, 227, 263, 163, 269, 271)
TWO_PATCH = (197, 211, 223, 359)


@lru_cache(maxsize=None)
def model(level):
    return load_model(level)


@lru_cache(maxsize=None)
def fp_points(level, p):
    from x0plus.points import enumerate_fp_points
    return enumerate_fp_points(model(level), p).points


def all_patches():
    return [(N, i) for N in LEVELS for i in range(len(model(N).patches))]


@pytest.fixture(scope="session")
def m137():
    return model(137)
