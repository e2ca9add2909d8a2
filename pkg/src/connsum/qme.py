"""The quantum master equation and its exponential form.

``S`` (degree 0, orbit-sum form) solves the QME when
``dS + Delta S + 1/2 {S, S} = 0``.  The exponential form says
``(d + Delta) exp(iota(S)/kappa) = (iota(R)/kappa) exp(iota(S)/kappa)``
with ``R`` the residual, so the exponential vanishes through weight ``W``
exactly when ``R`` vanishes on weights ``<= W + 2``.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations_with_replacement, product

from .exact import LinComb
from .fun import Fun, FunError, _legs
from .linalg import kernel, solve
from .operad import is_stable
from .series import DEFAULT_CUTOFF, FunExp, OrbitElement, OrbitFun
from .surfaces import QCOperad


def qme_residual(ofun: OrbitFun, S: OrbitElement) -> OrbitElement:
    """``dS + Delta S + 1/2 {S, S}`` (with the normalized bracket)."""
    if S.degrees() - {0}:
        raise FunError("the quantum master equation needs a degree 0 action")
    return ofun.d(S) + ofun.delta(S) + ofun.bracket(S, S).scale(Fraction(1, 2))


def qme_exp_side(fx: FunExp, S: OrbitElement) -> tuple[OrbitElement, OrbitElement]:
    """``(d + Delta) E`` and ``E = exp(iota(S)/kappa)`` through the cutoff."""
    if S.degrees() - {0}:
        raise FunError("the quantum master equation needs a degree 0 action")
    E = fx.exp(fx.iota(S, -1))
    return fx.truncate(fx.normalize(fx.d(E) + fx.delta(E))), E


def qme_check(fun: Fun, S: OrbitElement, cutoff=DEFAULT_CUTOFF) -> dict:
    """Compare the residual on weights ``<= cutoff + 2`` with the exponential form.

    ``identity`` records whether ``(d + Delta) E == (iota(R)/kappa) E`` holds
    through the cutoff; ``agree`` whether both verdicts coincide.
    """
    fx = FunExp(fun, cutoff)
    R = qme_residual(fx.ofun, S).filter_weight(None, fx.hi2 + 4)
    lhs, E = qme_exp_side(fx, S)
    rhs = fx.star(fx.series(fx.ofun.kappa(R, -1)), E) if not R.is_zero() else fx.ofun.zero()
    residual_zero, exp_zero = R.is_zero(), lhs.is_zero()
    return {
        "cutoff": fx.cutoff,
        "residual_zero": residual_zero,
        "exp_zero": exp_zero,
        "agree": residual_zero == exp_zero,
        "identity": fx.equal(lhs, rhs),
        "residual_terms": len(R.terms),
        "exp_terms": len(lhs.terms),
        "lowest_residual_weight": Fraction(min(R.weights2()), 2) if not R.is_zero() else None,
    }


# -- orbit bases and constructed solutions ---------------------------------------

def _words(space, n, degree, sorted_only):
    degs = [-d for d in space.degrees]  # covector degrees
    lo, hi = min(degs), max(degs)
    gen = combinations_with_replacement(range(space.dim), n) if sorted_only else product(range(space.dim), repeat=n)
    if degree is None:
        yield from gen
        return
    if not lo * n <= degree <= hi * n:
        return
    for w in gen:
        if sum(degs[i] for i in w) == degree:
            yield w


def orbit_basis(ofun: OrbitFun, n: int, twoG: int, degree: int | None = None) -> list:
    """Canonical representatives of the non-vanishing orbit sums in ``Fun(n, G)``."""
    if not is_stable(n, twoG):
        return []
    P, Q = ofun.P, ofun.Q
    legs = _legs(n)
    out = set()
    for pk in P.basis(legs, twoG):
        want = None if degree is None else degree - P.degree(pk)
        for w in _words(Q.space, n, want, isinstance(P, QCOperad)):
            key, s = ofun.canon(n, twoG, pk, w, 0)
            if s:
                out.add(key)
    return sorted(out, key=repr)


def corollas_of_weight(P, w2: int, max_legs: int) -> list:
    """Stable ``(n, twoG)`` with ``2 * weight == w2`` on which ``P`` has generators."""
    out = []
    for n in range(0, max_legs + 1):
        twoG = w2 - n - 2
        if twoG >= 0 and is_stable(n, twoG) and P.basis(_legs(n), twoG):
            out.append((n, twoG))
    return out


def weight_basis(ofun: OrbitFun, w2: int, max_legs: int, degree: int = 0) -> list:
    return [k for n, twoG in corollas_of_weight(ofun.P, w2, max_legs)
            for k in orbit_basis(ofun, n, twoG, degree)]


class Obstructed(FunError):
    """The order-by-order construction met a non-exact residual."""


def construct_solution(ofun: OrbitFun, rng: random.Random, top2: int, max_legs: int,
                       density: float = 0.5) -> OrbitElement:
    """Solve the QME weight by weight up to ``2 * weight <= top2``.

    At each weight the new part ``T`` only enters the residual through
    ``(d + Delta) T`` (brackets push higher), so it is found by a linear
    solve plus a random kernel element.
    """
    S = ofun.zero()
    for w2 in range(5, top2 + 1):
        basis = weight_basis(ofun, w2, max_legs)
        if not basis:
            continue
        R = qme_residual(ofun, S).filter_weight(w2, w2)
        cols = []
        for k in basis:
            b = ofun.element(LinComb.single(k))
            cols.append((ofun.d(b) + ofun.delta(b)).terms)
        x = solve(cols, (-R).terms)
        if x is None:
            raise Obstructed(f"no correction exists at weight {Fraction(w2, 2)}")
        for v in kernel(cols):
            if rng.random() < density:
                r = rng.choice([1, -1, 2, Fraction(1, 2), -3])
                x = [a + r * b for a, b in zip(x, v)]
        T = ofun.element(LinComb._wrap({k: Fraction(c) for k, c in zip(basis, x) if c}))
        S = S + T
    return S


def qme_samples(fun: Fun, seed: int, count: int = 20, cutoff=DEFAULT_CUTOFF) -> list:
    """A deterministic mix of constructed solutions and perturbed non-solutions.

    Returns ``(label, S, expected_solution)`` triples; perturbations placed
    above weight ``cutoff + 2`` stay invisible to the check and are labelled
    as solutions.
    """
    ofun = OrbitFun(fun)
    top2 = int(2 * Fraction(cutoff)) + 4
    max_legs = top2 // 2 + 1
    out = []
    for i in range(count):
        rng = random.Random(f"{seed}:qme:{i}")
        S = None
        for _ in range(40):
            try:
                T = construct_solution(ofun, rng, top2, max_legs)
            except Obstructed:
                continue
            if not (ofun.delta(T).is_zero() and ofun.bracket(T, T).is_zero()):
                S = T  # an interacting solution, not a trivially closed one
                break
        if S is None:
            raise Obstructed("could not construct an interacting solution")
        kind = i % 5
        if kind in (0, 1):
            out.append(("solution", S, True))
            continue
        if kind in (2, 3):
            # a perturbation inside the window that changes the residual
            cands = [k for w2 in range(5, top2 + 1) for k in weight_basis(ofun, w2, max_legs)]
            rng.shuffle(cands)
            for k in cands:
                S2 = S + ofun.element(LinComb.single(k, rng.choice([1, -1, 2])))
                if not qme_residual(ofun, S2).filter_weight(None, top2).is_zero():
                    out.append(("perturbed", S2, False))
                    break
            else:
                out.append(("solution", S, True))
            continue
        # a perturbation just above the window
        extra = weight_basis(ofun, top2 + 1, max_legs + 1) or weight_basis(ofun, top2 + 2, max_legs + 2)
        S2 = S + ofun.element(LinComb.single(rng.choice(extra), 1)) if extra else S
        out.append(("above-window", S2, True))
    return out
