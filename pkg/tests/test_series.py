import json
import random
from fractions import Fraction

import pytest

from connsum.checks import nonzero_invariant, sample_spaces
from connsum.endo import EndoOperad
from connsum.fun import Fun
from connsum.series import (UNIT, FunExp, SharpNotInjectiveError, WeightError, key_weight2,
                            random_series, require_injective_sharp)
from connsum.surfaces import QC, QO, TOY

SPACE = sample_spaces(1)[1]


@pytest.fixture(params=[QC, QO], ids=["QC", "QO"])
def fx(request):
    return FunExp(Fun(request.param, EndoOperad(SPACE)), cutoff=6)


def test_exp_of_zero_is_one(fx):
    assert fx.exp(fx.ofun.zero()) == fx.ofun.unit()


def test_exp_log_inverse(fx):
    for i in range(8):
        X = random_series(fx, random.Random(i))
        assert fx.equal(fx.log(fx.exp(X)), X)
        assert fx.equal(fx.exp(fx.log(fx.ofun.unit() + X)), fx.ofun.unit() + X)


def test_delta_of_exponential(fx):
    of = fx.ofun
    for i in range(8):
        X = random_series(fx, random.Random(100 + i))
        E = fx.exp(X)
        inner = fx.series(of.delta(X) + of.kappa(of.bracket(X, X)).scale(Fraction(1, 2)))
        assert fx.equal(fx.delta(E), fx.star(inner, E))


def test_sharp_and_kappa_agree_in_normal_form(fx):
    of = fx.ofun
    for i in range(10):
        A = of.compress(nonzero_invariant(fx.fun, random.Random(i), 2, 1))
        assert fx.equal(fx.series(of.sharp(A)), fx.series(of.kappa(A)))


def test_iota_lands_above_weight_two(fx):
    for i in range(10):
        A = fx.ofun.compress(nonzero_invariant(fx.fun, random.Random(i), 1 + i % 3, 1))
        image = fx.iota(A)
        assert all(key_weight2(k) > 4 for k in image.terms)
        assert not A.is_zero() and min(A.weights2()) <= fx.hi2
        assert not image.is_zero()


def test_exp_rejects_a_constant_term(fx):
    with pytest.raises(WeightError):
        fx.exp(fx.ofun.unit())


def test_bracket_rejects_low_weight(fx):
    X = random_series(fx, random.Random(0))
    low = X.filter_weight(None, 1)
    if not low.is_zero():
        with pytest.raises(WeightError):
            fx.bracket(low, low)


def test_cutoff_must_be_half_integer():
    with pytest.raises(WeightError):
        FunExp(Fun(QC, EndoOperad(SPACE)), cutoff=Fraction(1, 3))


def test_json_shape(fx):
    X = fx.exp(random_series(fx, random.Random(3)))
    doc = fx.to_json(X)
    assert doc["schema"] == "fun-series/1"
    assert doc["weight_floor"] == "1/2"
    assert json.dumps(doc, sort_keys=True) == json.dumps(fx.to_json(X), sort_keys=True)
    assert X.terms.coeff(UNIT) == 1


def test_flat_operads_pass_the_probe():
    for P in (QC, QO):
        require_injective_sharp(Fun(P, EndoOperad(SPACE)))


def test_toy_operad_is_not_flat():
    fun = Fun(TOY, EndoOperad(SPACE))
    with pytest.raises(SharpNotInjectiveError):
        require_injective_sharp(fun)
    fx = FunExp(fun)
    A = fx.ofun.compress(nonzero_invariant(fun, random.Random(0), 3, 1))
    assert fx.ofun.sharp(A).is_zero()
    with pytest.raises(SharpNotInjectiveError):
        fx.iota(A)
