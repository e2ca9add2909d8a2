import random

import pytest

from connsum.endo import EndoOperad
from connsum.exact import LinComb
from connsum.expr import Context, evaluate, evaluate_text
from connsum.fuzz import dumps_report, exhaustive, fuzz
from connsum.operad import CorollaError, LegError, OperadElement, compose, is_stable
from connsum.space import random_space
from connsum.surfaces import QC, QO, QCOperad


@pytest.mark.parametrize("expr, value", [
    ("compose(1, 4, QC{1,2,3}^g=0, QC{4,5}^g=1)", "QC{2,3,5}^g=1"),
    ("selfcompose(1, 2, QC{1,2,3}^g=0)", "QC{3}^g=1"),
    ("cs2(QC{1}^g=1, QC{2,3}^g=0)", "QC{1,2,3}^g=1"),
    ("cs1(QC{1,2}^g=0)", "QC{1,2}^g=1"),
    ("compose(1, 4, QO{(1 2 3)}^g=0, QO{(4 5)}^g=0)", "QO{(2 3 5)}^g=0"),
    ("selfcompose(1, 2, QO{(1 2 3)}^g=0)", "QO{()(3)}^g=0"),
    ("selfcompose(1, 3, QO{(1 2)(3 4)}^g=0)", "QO{(2 4)}^g=1"),
    ("cs2(QO{(1 2)}^g=0, QO{(3)}^g=1)", "QO{(3)(1 2)}^g=1"),
    ("cs1(QO{(1 2)}^g=0)", "QO{(1 2)}^g=1"),
    ("relabel(QO{(1 2 3)}^g=0, {1->3, 2->1, 3->2})", "QO{(1 2 3)}^g=0"),
    ("compose(1, 3, T{1:phi^a, 2:phi^b}, T{3:phi^b, 4:phi^a})", "T{2:phi^b, 4:phi^a}^G=0"),
    ("selfcompose(1, 2, T{1:phi^a, 2:phi^b, 3:phi^a})", "-T{3:phi^a}^G=1"),
    ("cs1(T{1:phi^a})", "T{1:phi^a}^G=2"),
])
def test_golden_compositions(expr, value):
    assert evaluate_text(expr) == value


def test_stability():
    assert not is_stable(0, 0) and not is_stable(1, 0) and not is_stable(2, 0)
    assert is_stable(3, 0) and is_stable(1, 2) and is_stable(0, 4)


def test_compose_needs_the_legs():
    x = OperadElement.single(QC, (1, 2, 3), 0)
    y = OperadElement.single(QC, (4, 5), 1)
    with pytest.raises((LegError, CorollaError, ValueError)):
        compose(QC, 9, 4, x, y)


@pytest.mark.parametrize("op", [QC, QO], ids=["QC", "QO"])
@pytest.mark.parametrize("suite", ["mo", "cs"])
def test_exhaustive_small(op, suite):
    rep = exhaustive(op, suite, max_legs=4, max_genus=1)
    assert rep["passed"], rep["failures"][:3]
    assert all(v > 0 for v in rep["checked"].values())


@pytest.mark.parametrize("suite", ["mo", "cs"])
def test_endo_random(suite):
    op = EndoOperad(random_space(random.Random(9), with_diff=True))
    rep = fuzz(op, suite, seed=2, cases=40)
    assert rep["passed"], rep["failures"][:3]


def test_fuzz_is_deterministic():
    a = dumps_report(fuzz(QO, "cs", seed=11, cases=30))
    b = dumps_report(fuzz(QO, "cs", seed=11, cases=30))
    assert a == b


class WrongConnectedSum(QCOperad):
    """QC with #2 scaled by 2; it breaks the connected sum axioms."""

    def cs2_keys(self, kx, lx, ky, ly):
        return LinComb.single(kx + ky, 2)


def test_repro_replays_the_failure():
    bad = WrongConnectedSum()
    rep = fuzz(bad, "cs", seed=0, cases=20)
    assert not rep["passed"]
    ctx = Context(operads={"QC": bad})
    for f in rep["failures"][:5]:
        diff = evaluate(f["repro"], ctx)
        assert not diff.is_zero()
        assert diff == evaluate(f["lhs"], ctx) - evaluate(f["rhs"], ctx)
        # the honest operad does not fail on the same input
        assert evaluate(f["repro"]).is_zero()
