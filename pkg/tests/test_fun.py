import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from connsum.checks import nonzero_invariant
from connsum.endo import EndoOperad
from connsum.fun import (Fun, fun_bracket, fun_d, fun_delta, fun_sharp, fun_star, invariant_basis,
                         is_invariant, random_invariant, random_theta)
from connsum.series import OrbitFun
from connsum.space import random_space, standard_space
from connsum.surfaces import QC, QO

SPACES = [standard_space(), random_space(random.Random(5), with_diff=True)]
FUNS = [Fun(P, EndoOperad(sp)) for P in (QC, QO) for sp in SPACES]
IDS = ["QC-std", "QC-diff", "QO-std", "QO-diff"]


def _pair(fun, seed, nx=3, ny=2):
    rng = random.Random(seed)
    X = nonzero_invariant(fun, rng, rng.randint(1, nx), 1)
    Y = nonzero_invariant(fun, rng, rng.randint(1, ny), 1)
    return X, Y


@pytest.mark.parametrize("fun", FUNS, ids=IDS)
@given(seed=st.integers(0, 10_000))
def test_orbit_form_matches_expanded(fun, seed):
    of = OrbitFun(fun)
    X, Y = _pair(fun, seed)
    cX, cY = of.compress(X), of.compress(Y)
    assert of.expand(cX) == X
    assert of.expand(of.d(cX)) == fun_d(fun, X)
    assert of.expand(of.delta(cX)) == fun_delta(fun, X)
    assert of.expand(of.sharp(cX)) == fun_sharp(fun, X)
    assert of.expand(of.bracket(cX, cY)) == fun_bracket(fun, X, Y)
    assert of.expand(of.star(cX, cY)) == fun_star(fun, X, Y)


@pytest.mark.parametrize("fun", FUNS, ids=IDS)
@given(seed=st.integers(0, 10_000))
def test_outputs_are_invariant_and_graded(fun, seed):
    X, Y = _pair(fun, seed)
    for Z in (fun_delta(fun, X), fun_bracket(fun, X, Y), fun_star(fun, X, Y)):
        assert is_invariant(fun, Z)
    n = next(iter(X.terms))[0]
    for k in fun_delta(fun, X).terms:
        assert k[0] == n - 2
    if not fun_delta(fun, X).is_zero():
        assert fun_delta(fun, X).degree == X.degree + 1


@pytest.mark.parametrize("fun", FUNS, ids=IDS)
@given(seed=st.integers(0, 10_000))
def test_delta_does_not_depend_on_theta(fun, seed):
    rng = random.Random(seed)
    X = random_invariant(fun, rng, rng.randint(2, 4), max_genus=1)
    assert fun_delta(fun, X, theta=random_theta(rng, range(2, 5))) == fun_delta(fun, X)


@pytest.mark.parametrize("fun", FUNS, ids=IDS)
def test_bd_deviation_oracle(fun):
    """The bracket recovered from the deviation of Delta from a derivation."""
    for seed in range(15):
        X, Y = _pair(fun, seed)
        x = X.degree
        s = -1 if x % 2 else 1
        lhs = fun_sharp(fun, fun_bracket(fun, X, Y)).scale(s)
        rhs = (fun_delta(fun, fun_star(fun, X, Y)) - fun_star(fun, fun_delta(fun, X), Y)
               - fun_star(fun, X, fun_delta(fun, Y)).scale(s))
        assert lhs == rhs


def test_invariant_basis_is_invariant():
    fun = FUNS[1]
    basis = invariant_basis(fun, 3, 1)
    assert basis and all(is_invariant(fun, b) for b in basis)
