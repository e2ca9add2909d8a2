import random

import pytest

from connsum.endo import EndoOperad
from connsum.fun import Fun, FunError
from connsum.qme import construct_solution, qme_check, qme_residual, qme_samples
from connsum.series import OrbitFun
from connsum.space import qme_space, standard_space
from connsum.surfaces import QC


@pytest.fixture
def fun():
    return Fun(QC, EndoOperad(qme_space()))


def test_zero_action_solves(fun):
    res = qme_check(fun, OrbitFun(fun).zero(), cutoff=4)
    assert res["residual_zero"] and res["exp_zero"] and res["agree"] and res["identity"]


def test_odd_action_is_rejected():
    fun = Fun(QC, EndoOperad(standard_space()))
    of = OrbitFun(fun)
    S = of.rep(1, 2, 0, (1,))  # phi^b has degree -1
    with pytest.raises(FunError):
        qme_residual(of, S)


def test_constructed_solution_solves(fun):
    of = OrbitFun(fun)
    S = construct_solution(of, random.Random(2), top2=10, max_legs=6)
    assert qme_residual(of, S).filter_weight(None, 10).is_zero()
    assert qme_check(fun, S, cutoff=3)["exp_zero"]


def test_samples_agree_at_small_cutoff(fun):
    samples = qme_samples(fun, seed=1, count=5, cutoff=3)
    assert [expected for _, _, expected in samples] == [True, True, False, False, True]
    for label, S, expected in samples:
        res = qme_check(fun, S, cutoff=3)
        assert res["agree"] and res["identity"]
        assert res["residual_zero"] == expected, label


def test_samples_agree_on_qo():
    from connsum.surfaces import QO
    fun = Fun(QO, EndoOperad(qme_space()))
    for label, S, expected in qme_samples(fun, seed=3, count=5, cutoff=1):
        res = qme_check(fun, S, cutoff=1)
        assert res["agree"] and res["identity"]
        assert res["residual_zero"] == expected, label
