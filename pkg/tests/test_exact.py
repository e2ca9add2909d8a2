from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from connsum.exact import LinComb, Permutation, graded_sort, koszul_sign, reorder_sign

perms = st.integers(1, 6).flatmap(lambda n: st.permutations(list(range(n))))
coeffs = st.fractions(min_value=-50, max_value=50, max_denominator=7)
combs = st.dictionaries(st.sampled_from("abcde"), coeffs, max_size=5).map(LinComb)


def test_lincomb_drops_zeros():
    x = LinComb({"a": 1, "b": 0})
    assert dict(x) == {"a": Fraction(1)}
    assert (x - x).is_zero()


def test_lincomb_scale_and_coeff():
    x = LinComb.single("a", Fraction(2, 3)).scale(3)
    assert x.coeff("a") == 2
    assert x.coeff("z") == 0


@given(combs, combs, combs)
def test_lincomb_vector_space_laws(x, y, z):
    assert x + y == y + x
    assert (x + y) + z == x + (y + z)
    assert (x + y).scale(Fraction(1, 3)) == x.scale(Fraction(1, 3)) + y.scale(Fraction(1, 3))


@given(perms)
def test_permutation_inverse(images):
    p = Permutation(images)
    assert p * p.inverse() == Permutation.identity(len(images))


@given(perms, perms)
def test_koszul_sign_is_multiplicative(a, b):
    n = min(len(a), len(b))
    p = Permutation([i for i in a if i < n])
    q = Permutation([i for i in b if i < n])
    degs = [1, 0, 1, 1, 2, 3][:n]
    # moving by q then by p equals moving by p*q, with the degrees carried along
    moved = q.act(degs)
    assert koszul_sign(p * q, degs) == koszul_sign(q, degs) * koszul_sign(p, moved)


def test_transposition_of_odd_factors():
    assert koszul_sign(Permutation([1, 0]), [1, 1]) == -1
    assert koszul_sign(Permutation([1, 0]), [1, 2]) == 1
    assert reorder_sign([2, 0, 1], [True, False, True]) == -1


def test_graded_sort_sign_and_repeat():
    assert graded_sort((2, 1), lambda x: True) == ((1, 2), -1)
    assert graded_sort((2, 1), lambda x: False) == ((1, 2), 1)
    assert graded_sort((1, 1), lambda x: True)[1] == 0
