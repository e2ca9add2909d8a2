"""Seeded property checks shared by the command line and the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from .endo import EndoOperad
from .expr import format_orbit
from .fun import (Fun, fun_bracket, fun_d, fun_delta, fun_sharp, fun_star, invariant_basis,
                  random_invariant)
from .linalg import rank
from .models import CycModel, SymModel, psi, theta
from .operad import is_stable
from .series import OrbitFun
from .space import random_space, standard_space
from .surfaces import QC, QO

CROSS_SCHEMA = "cross-check/1"


def sample_spaces(seed, count: int = 3) -> list:
    """The standard space followed by seeded random spaces with a differential."""
    out = [standard_space()]
    i = 0
    while len(out) < count:
        sp = random_space(random.Random(f"{seed}:space:{i}"), max_dim=6, with_diff=True)
        i += 1
        if sp.dim >= 4 and sp.has_differential:
            out.append(sp)
    return out


def _setup(kind, space):
    P, mp, M = (QC, psi, SymModel) if kind == "psi" else (QO, theta, CycModel)
    fun = Fun(P, EndoOperad(space))
    return fun, mp, M(space)


def nonzero_invariant(fun, rng, n, max_genus, tries=20):
    """A random invariant with ``n`` legs, redrawn a few times if it vanishes."""
    for _ in range(tries):
        X = random_invariant(fun, rng, n, max_genus=max_genus, terms=2)
        if not X.is_zero():
            return X
    return X


def cross_check(kind: str, seed: int, cases: int, spaces=None, max_legs: int = 5,
                max_genus: int = 2) -> dict:
    """Operadic operations against the model operations through ``psi`` or ``theta``.

    Each case draws ``X`` (up to ``max_legs`` legs) and ``Y`` (so that the
    bracket and product stay within ``max_legs + 1`` legs) and compares the
    product, ``#``, ``Delta``, the bracket and ``d``.
    """
    if kind not in ("psi", "theta"):
        raise ValueError("cross-check kind is psi or theta")
    spaces = spaces or sample_spaces(seed)
    setups = [_setup(kind, sp) for sp in spaces]
    checked: dict = {}
    nonzero: dict = {}
    failures = []
    for case in range(cases):
        rng = random.Random(f"{seed}:{kind}:{case}")
        fun, mp, M = setups[case % len(setups)]
        nx = rng.randint(1, max_legs)
        ny = rng.randint(1, max(1, min(3, max_legs + 3 - nx)))
        X = nonzero_invariant(fun, rng, nx, max_genus)
        Y = nonzero_invariant(fun, rng, ny, max_genus)
        mX, mY = mp(fun, X), mp(fun, Y)
        pairs = {
            "star": (mp(fun, fun_star(fun, X, Y)), M.mul(mX, mY), "{m}({x}*{y}) - {m}({x})*{m}({y})"),
            "sharp": (mp(fun, fun_sharp(fun, X)), M.kappa(mX), "{m}(sharp({x})) - k*{m}({x})"),
            "delta": (mp(fun, fun_delta(fun, X)), M.bd_delta(mX),
                      "{m}(delta({x})) - k*delta({m}({x}))" if kind == "psi" else "{m}(delta({x})) - delta({m}({x}))"),
            "bracket": (mp(fun, fun_bracket(fun, X, Y)), M.bracket(mX, mY),
                        "{m}(bracket({x}, {y})) - bracket({m}({x}), {m}({y}))"),
            "d": (mp(fun, fun_d(fun, X)), M.d(mX), "{m}(d({x})) - d({m}({x}))"),
        }
        for name, (lhs, rhs, tmpl) in pairs.items():
            checked[name] = checked.get(name, 0) + 1
            if not lhs.is_zero():
                nonzero[name] = nonzero.get(name, 0) + 1
            if lhs != rhs:
                of = OrbitFun(fun)
                text = tmpl.format(m=kind, x="(" + format_orbit(of.compress(X)) + ")",
                                   y="(" + format_orbit(of.compress(Y)) + ")")
                failures.append({"case": case, "operation": name, "space": fun.Q.space.to_json(),
                                 "repro": text})
    return {
        "schema": CROSS_SCHEMA,
        "map": kind,
        "seed": seed,
        "cases": cases,
        "spaces": [sp.to_json() for sp in spaces],
        "checked": checked,
        "nonzero": nonzero,
        "failures": failures,
        "passed": not failures,
    }


def rank_check(kind: str, space=None, max_legs: int = 4, max_twoG: int = 4) -> dict:
    """Rank of the images of the invariant basis, corolla by corolla.

    The map is injective on a corolla exactly when the rank equals the
    number of basis elements.
    """
    fun, mp, _ = _setup(kind, space or standard_space())
    rows = []
    for n in range(max_legs + 1):
        for twoG in range(max_twoG + 1):
            if not is_stable(n, twoG):
                continue
            basis = invariant_basis(fun, n, twoG)
            if not basis:
                continue
            r = rank([mp(fun, b).terms for b in basis])
            rows.append({"n": n, "twoG": twoG, "dim": len(basis), "rank": r})
    return {
        "schema": "rank-check/1",
        "map": kind,
        "space": fun.Q.space.to_json(),
        "corollas": rows,
        "injective": all(r["rank"] == r["dim"] for r in rows),
    }


# -- identity suites ---------------------------------------------------------------

def _sgn(e: int) -> int:
    return -1 if e % 2 else 1


def _unnormalized(ops, X, Y):
    """The bracket without the ``(-1)^{|X|} 2`` normalization."""
    return ops.bracket(X, Y).scale(Fraction(_sgn(X.degree), 2))


def _sampler(fun, ofun, rng, max_legs, max_genus, min_legs=0):
    def draw():
        return ofun.compress(nonzero_invariant(fun, rng, rng.randint(min_legs, max_legs), max_genus))
    return draw


def _barannikov(ops, X, Y, Z):
    # the compatibilities hold literally for the unnormalized bracket; the
    # normalized bracket {X,Y} = (-1)^{|X|} 2 B(X,Y) obeys the shifted form
    x, y = X.degree, Y.degree
    B = lambda a, b: _unnormalized(ops, a, b)  # noqa: E731
    return {
        "d^2": ops.d(ops.d(X)),
        "Delta^2": ops.delta(ops.delta(X)),
        "d Delta + Delta d": ops.d(ops.delta(X)) + ops.delta(ops.d(X)),
        "d-bracket": ops.d(B(X, Y)) + B(ops.d(X), Y) + B(X, ops.d(Y)).scale(_sgn(x)),
        "Delta-bracket": ops.delta(B(X, Y)) + B(ops.delta(X), Y) + B(X, ops.delta(Y)).scale(_sgn(x)),
        "d-bracket normalized": (ops.d(ops.bracket(X, Y)) - ops.bracket(ops.d(X), Y)
                                 + ops.bracket(X, ops.d(Y)).scale(_sgn(x))),
        "Delta-bracket normalized": (ops.delta(ops.bracket(X, Y)) - ops.bracket(ops.delta(X), Y)
                                     + ops.bracket(X, ops.delta(Y)).scale(_sgn(x))),
        "antisymmetry": ops.bracket(X, Y) + ops.bracket(Y, X).scale(_sgn((x + 1) * (y + 1))),
        "Jacobi": (ops.bracket(X, ops.bracket(Y, Z)) - ops.bracket(ops.bracket(X, Y), Z)
                   - ops.bracket(Y, ops.bracket(X, Z)).scale(_sgn((x + 1) * (y + 1)))),
    }


def _theorem(ops, X, Y, Z):
    x, y = X.degree, Y.degree
    st, sh, br, dl, d = ops.star, ops.sharp, ops.bracket, ops.delta, ops.d
    return {
        "1 commutative": st(X, Y) - st(Y, X).scale(_sgn(x * y)),
        "1 associative": st(st(X, Y), Z) - st(X, st(Y, Z)),
        "2 BD deviation": (dl(st(X, Y)) - st(dl(X), Y) - st(X, dl(Y)).scale(_sgn(x))
                           - sh(br(X, Y)).scale(_sgn(x))),
        "3 Leibniz": br(X, st(Y, Z)) - st(br(X, Y), Z) - st(Y, br(X, Z)).scale(_sgn(x * y + y)),
        "4 d of star": d(st(X, Y)) - st(d(X), Y) - st(X, d(Y)).scale(_sgn(x)),
        "4 d of sharp": d(sh(X)) - sh(d(X)),
        "5 Delta sharp": dl(sh(X)) - sh(dl(X)),
        "5 bracket sharp right": br(X, sh(Y)) - sh(br(X, Y)),
        "5 bracket sharp left": br(sh(X), Y) - sh(br(X, Y)),
        "5 star sharp right": st(X, sh(Y)) - sh(st(X, Y)),
        "5 star sharp left": st(sh(X), Y) - sh(st(X, Y)),
    }


def identity_suite(suite: str, operad: str, seed: int, samples: int, max_legs: int = 5,
                   max_genus: int = 2, space=None) -> dict:
    """Check the ``barannikov`` or ``theorem`` identities on random invariants.

    Samples cycle through the standard space and two random spaces with a
    differential.  Elements are kept in orbit-sum form; each sample draws ``X, Y, Z`` with
    at most ``max_legs`` legs (``X`` and ``Y`` with at least one leg so that
    the bracket is not trivially zero).
    """
    P = {"qc": QC, "qo": QO}[operad]
    spaces = [space] if space is not None else sample_spaces(seed)
    setups = [(f, OrbitFun(f)) for f in (Fun(P, EndoOperad(sp)) for sp in spaces)]
    run = {"barannikov": _barannikov, "theorem": _theorem}[suite]
    checked: dict = {}
    nonzero: dict = {}
    failures = []
    for i in range(samples):
        rng = random.Random(f"{seed}:{suite}:{operad}:{i}")
        fun, ofun = setups[i % len(setups)]
        draw = _sampler(fun, ofun, rng, max_legs, max_genus, min_legs=1)
        X, Y = draw(), draw()
        Z = _sampler(fun, ofun, rng, max(1, max_legs - 2), max_genus, min_legs=1)()
        for name, value in run(ofun, X, Y, Z).items():
            checked[name] = checked.get(name, 0) + 1
            if not value.is_zero():
                failures.append({"sample": i, "identity": name,
                                 "X": format_orbit(X), "Y": format_orbit(Y), "Z": format_orbit(Z)})
        for name, value in _witnesses(ofun, X, Y, Z, suite).items():
            if not value.is_zero():
                nonzero[name] = nonzero.get(name, 0) + 1
    return {"schema": "identity-suite/1", "suite": suite, "operads": [P.name, "E_V"], "seed": seed,
            "samples": samples, "spaces": [sp.to_json() for sp in spaces], "checked": checked, "nonzero": nonzero,
            "failures": failures, "passed": not failures}


def _witnesses(ofun, X, Y, Z, suite):
    """Terms whose non-vanishing shows an identity was not checked vacuously."""
    if suite == "barannikov":
        return {"d": ofun.d(X), "Delta": ofun.delta(X), "bracket": ofun.bracket(X, Y),
                "Jacobi inner": ofun.bracket(X, ofun.bracket(Y, Z))}
    return {"star": ofun.star(X, Y), "sharp": ofun.sharp(X), "Delta(X*Y)": ofun.delta(ofun.star(X, Y)),
            "bracket": ofun.bracket(X, ofun.star(Y, Z))}
