import random
from fractions import Fraction

import pytest

from connsum.checks import cross_check, rank_check, sample_spaces
from connsum.endo import EndoOperad
from connsum.expr import evaluate, evaluate_text
from connsum.fun import Fun, random_invariant
from connsum.models import CycModel, SymModel, orbit_decompose, orbit_reassemble
from connsum.space import random_space


def test_sym_values_in_the_standard_space():
    # omega^{ab} = -1 and |phi^a| = 0, so 2 (-1)^{|a|} omega^{ab} = -2
    assert evaluate_text("delta(phi^a * phi^b)") == "-2"
    assert evaluate_text("bracket(phi^a, phi^b)") == "-2"


def test_cyc_values_in_the_standard_space():
    assert evaluate_text("bracket((phi^a), (phi^b))") == "-2*xi"
    assert evaluate_text("delta((phi^a phi^a phi^b))") == "-4*(phi^a)*xi"
    # contracting both letters of a two-letter word leaves two empty cycles
    assert evaluate_text("delta((phi^a phi^b))") == "-2*xi^2"


def test_operadic_quadratic_value():
    # the orbit sum of C_2^g (x) phi^a phi^b; Delta gives 2 (-1)^{|a|} omega^{ab} C_0^{g+1}
    assert evaluate_text("delta(orb(QC{1,2}^g=0 @ T{1:phi^a, 2:phi^b}))") == "-2*orb(QC{}^g=1 @ T{})"
    assert evaluate_text("psi(orb(QC{}^g=1 @ T{}))") == "k"


@pytest.mark.parametrize("Model", [SymModel, CycModel])
def test_model_bd_deviation(Model):
    sp = random_space(random.Random(7), with_diff=True)
    m = Model(sp)
    rng = random.Random(1)
    for _ in range(20):
        words = [tuple(rng.randrange(sp.dim) for _ in range(rng.randint(1, 3))) for _ in range(2)]
        if Model is SymModel:
            x, y = m.monomial(words[0]), m.monomial(words[1])
        else:
            x, y = m.word(words[0]), m.word(words[1])
        if x.is_zero() or y.is_zero():
            continue
        s = -1 if x.degree % 2 else 1
        lhs = m.bd_delta(x * y)
        rhs = m.bd_delta(x) * y + (x * m.bd_delta(y)).scale(s) + m.kappa(m.bracket(x, y)).scale(s)
        assert lhs == rhs


@pytest.mark.parametrize("kind", ["psi", "theta"])
def test_cross_check_small(kind):
    rep = cross_check(kind, seed=4, cases=12, max_legs=4, max_genus=1)
    assert rep["passed"], rep["failures"][:2]
    assert rep["nonzero"].get("bracket", 0) > 0


@pytest.mark.parametrize("kind", ["psi", "theta"])
def test_rank_injective(kind):
    rep = rank_check(kind, sample_spaces(0)[1], max_legs=3, max_twoG=3)
    assert rep["injective"]
    assert rep["corollas"]


def test_orbit_decomposition_round_trip():
    from connsum.surfaces import QO
    fun = Fun(QO, EndoOperad(sample_spaces(2)[1]))
    rng = random.Random(3)
    for _ in range(10):
        X = random_invariant(fun, rng, rng.randint(1, 4), max_genus=1)
        assert orbit_reassemble(fun, orbit_decompose(fun, X)) == X


def test_theta_of_a_two_cycle():
    v = evaluate("theta(QO{(1 2)}^g=0 @ T{1:phi^a, 2:phi^b})")
    assert v.terms.coeff(next(iter(v.terms))) == Fraction(1, 2)
