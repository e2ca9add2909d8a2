import random

import pytest
from hypothesis import settings

from connsum.space import random_space, standard_space

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def std():
    return standard_space()


@pytest.fixture
def dspace():
    """A random space with a non-zero differential."""
    return random_space(random.Random(5), with_diff=True)
