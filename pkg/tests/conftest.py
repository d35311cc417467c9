import os

import pytest

from upwardplanar import oracle


def corpus_seed():
    return int(os.environ.get("UPT_SEED", oracle.CORPUS_SEED))


@pytest.fixture(scope="session")
def small_corpus():
    return [tuple(e) for e in oracle.exhaustive_small_corpus()]


@pytest.fixture(scope="session")
def random_corpus_small():
    """A slice of the random corpus for mid-weight tests."""
    return [tuple(e) for e in oracle.random_corpus(60, seed=corpus_seed())]
