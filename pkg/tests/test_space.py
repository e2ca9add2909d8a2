import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from connsum.space import (DgSymplecticSpace, OmegaAntisymmetryError, OmegaDegreeError, qme_space,
                           random_space, standard_space)


def test_standard_space(std):
    assert std.labels == ("a", "b") or list(std.labels) == ["a", "b"]
    assert [std.cov_degree(i) for i in range(2)] == [0, -1]
    assert not std.has_differential


def test_qme_space_is_valid():
    sp = qme_space()
    assert sp.dim == 4


def test_omega_must_have_degree_minus_one():
    with pytest.raises(OmegaDegreeError):
        DgSymplecticSpace([0, 0], [[0, 1], [-1, 0]])


def test_omega_must_be_graded_antisymmetric():
    with pytest.raises(OmegaAntisymmetryError):
        DgSymplecticSpace([0, 1], [[0, 1], [1, 0]])


@given(st.integers(0, 10_000))
def test_random_spaces_round_trip(seed):
    sp = random_space(random.Random(seed), with_diff=seed % 2 == 0)
    again = DgSymplecticSpace.from_json(json.loads(sp.dumps()))
    assert again == sp
