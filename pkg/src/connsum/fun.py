"""Barannikov's space ``Fun(P, Q)`` of invariant tensors, stored fully expanded.

A term is keyed by ``(n, twoG, pkey, qkey, q)``: a basis tensor
``p (x) q`` on the legs ``1..n`` of the corolla ``(n, G)``, times ``kappa^q``.
Elements are linear combinations of such terms; the operations below act
term-wise and assume (or, for :func:`symmetrize`, produce) invariance under
the diagonal action of the symmetric group.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations

from .exact import LinComb, accumulate, sorted_labels
from .operad import CorollaError, ModularOperad, OperadElement, differential, is_stable, relabel


class FunError(ValueError):
    pass


def weight2(n: int, twoG: int, q: int = 0) -> int:
    """Twice the weight ``n/2 + G + 2q + 1``."""
    return n + twoG + 4 * q + 2


class Fun:
    """The pair ``(P, Q)`` of an even and an odd modular operad."""

    def __init__(self, P: ModularOperad, Q: ModularOperad):
        if P.odd or not Q.odd:
            raise FunError("Fun(P, Q) needs P even and Q odd")
        self.P, self.Q = P, Q

    @property
    def name(self) -> str:
        return f"Fun({self.P.name},{self.Q.name})"

    def element(self, terms) -> "FunElement":
        return FunElement(self, terms)

    def zero(self) -> "FunElement":
        return FunElement(self, LinComb.zero())

    def term_degree(self, key) -> int:
        n, twoG, pk, qk, q = key
        return self.P.degree(pk) + self.Q.degree(qk)

    def __eq__(self, other) -> bool:
        return isinstance(other, Fun) and self.P == other.P and self.Q == other.Q

    def __hash__(self) -> int:
        return hash((self.P.name, self.Q.name))

    def __repr__(self) -> str:
        return self.name


class FunElement:
    __slots__ = ("fun", "terms")

    def __init__(self, fun: Fun, terms):
        self.fun = fun
        self.terms = terms if isinstance(terms, LinComb) else LinComb(terms)

    def is_zero(self) -> bool:
        return self.terms.is_zero()

    def _same(self, other):
        if self.fun != other.fun:
            raise FunError("elements of different function spaces")

    def __add__(self, other):
        self._same(other)
        return FunElement(self.fun, self.terms + other.terms)

    def __sub__(self, other):
        self._same(other)
        return FunElement(self.fun, self.terms - other.terms)

    def __neg__(self):
        return FunElement(self.fun, -self.terms)

    def scale(self, s):
        return FunElement(self.fun, self.terms.scale(s))

    def __eq__(self, other):
        if not isinstance(other, FunElement):
            return NotImplemented
        return self.fun == other.fun and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def degrees(self) -> set:
        return {self.fun.term_degree(k) for k in self.terms}

    @property
    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise FunError("element is not homogeneous")
        return ds.pop() if ds else 0

    def components(self) -> dict:
        """Split by ``(n, twoG, q)``."""
        out: dict = {}
        for k, c in self.terms.items():
            out.setdefault((k[0], k[1], k[4]), {})[k] = c
        return {ck: FunElement(self.fun, LinComb._wrap(v)) for ck, v in out.items()}

    def weights2(self) -> set:
        return {weight2(k[0], k[1], k[4]) for k in self.terms}

    def homogeneous_parts(self) -> dict:
        """Split by degree."""
        out: dict = {}
        for k, c in self.terms.items():
            out.setdefault(self.fun.term_degree(k), {})[k] = c
        return {d: FunElement(self.fun, LinComb._wrap(v)) for d, v in out.items()}

    def __repr__(self):
        from .expr import format_fun
        return f"<{self.fun.name}: {format_fun(self)}>"


# -- helpers ------------------------------------------------------------------

def _legs(n: int) -> tuple:
    return tuple(range(1, n + 1))


@lru_cache(maxsize=1 << 18)
def _relabel_key(op, key, legs: tuple, images: tuple):
    """Key-level relabelling ``legs[i] -> images[i]``: ``(new_key, sign, new_legs)``."""
    new_key, sign = op.relabel_key(key, legs, dict(zip(legs, images)))
    return new_key, sign, sorted_labels(images)


def _expect_corolla(op, out: LinComb, legs: tuple, twoG: int) -> None:
    for k in out:
        tg = op.key_twoG(k, legs)
        if tg is not None and tg != twoG:
            raise CorollaError(f"{op.name} produced a term off the expected corolla")


def _pe(op, n, twoG, key) -> OperadElement:
    return OperadElement(op, _legs(n), twoG, LinComb._wrap({key: Fraction(1)}))


def _acc_tensor(acc, xp: OperadElement, xq: OperadElement, coeff, q: int):
    """Accumulate ``coeff * xp (x) xq`` (both on the same corolla)."""
    n = len(xp.legs)
    for pk, pc in xp.terms.items():
        for qk, qc in xq.terms.items():
            accumulate(acc, (n, xp.twoG, pk, qk, q), coeff * pc * qc)


def _acc_keys(acc, n, twoG, rp: LinComb, rq: LinComb, coeff, q: int):
    for pk, pc in rp.items():
        for qk, qc in rq.items():
            accumulate(acc, (n, twoG, pk, qk, q), coeff * pc * qc)


def _relabel_pair(fun, mapping, n, twoG, pk, qk):
    return (relabel(fun.P, mapping, _pe(fun.P, n, twoG, pk)),
            relabel(fun.Q, mapping, _pe(fun.Q, n, twoG, qk)))


def _group(X: "FunElement") -> dict:
    out: dict = {}
    for k, c in X.terms.items():
        out.setdefault(k[0], []).append((k, c))
    return out


# -- constructors -------------------------------------------------------------

def tensor(fun: Fun, p: OperadElement, q: OperadElement, kappa: int = 0) -> FunElement:
    """The raw (not yet symmetrized) tensor ``p (x) q`` on legs ``1..n``."""
    if p.legs != q.legs or p.legs != _legs(len(p.legs)):
        raise FunError("both factors must live on the legs 1..n")
    if p.twoG != q.twoG:
        raise FunError("both factors must live on the same corolla")
    acc: dict = {}
    _acc_tensor(acc, p, q, Fraction(1), kappa)
    return FunElement(fun, LinComb._wrap(acc))


def act(fun: Fun, sigma: dict, X: FunElement) -> FunElement:
    """Diagonal action of a permutation of ``1..n`` (a dict) on every component."""
    acc: dict = {}
    for (n, twoG, pk, qk, q), c in X.terms.items():
        sp, sq = _relabel_pair(fun, {i: sigma.get(i, i) for i in _legs(n)}, n, twoG, pk, qk)
        _acc_tensor(acc, sp, sq, c, q)
    return FunElement(fun, LinComb._wrap(acc))


def symmetrize(fun: Fun, X: FunElement) -> FunElement:
    """Projector ``(1/n!) sum_sigma (sigma (x) sigma)`` onto invariants."""
    acc: dict = {}
    for (n, twoG, pk, qk, q), c in X.terms.items():
        w = c / math.factorial(n)
        for perm in permutations(_legs(n)):
            sp, sq = _relabel_pair(fun, dict(zip(_legs(n), perm)), n, twoG, pk, qk)
            _acc_tensor(acc, sp, sq, w, q)
    return FunElement(fun, LinComb._wrap(acc))


def is_invariant(fun: Fun, X: FunElement) -> bool:
    ns = {k[0] for k in X.terms}
    for n in ns:
        if n < 2:
            continue
        part = FunElement(fun, X.terms.filter(lambda k: k[0] == n))
        swap = {1: 2, 2: 1}
        cyc = {i: i % n + 1 for i in _legs(n)}
        if act(fun, swap, part) != part or act(fun, cyc, part) != part:
            return False
    return True


# -- operations ---------------------------------------------------------------

def kappa(fun: Fun, X: FunElement, power: int = 1) -> FunElement:
    return FunElement(fun, X.terms.rekey(lambda k: (k[0], k[1], k[2], k[3], k[4] + power)))


def fun_d(fun: Fun, X: FunElement) -> FunElement:
    """``d = d_P (x) 1 - 1 (x) d_Q`` with the Koszul sign of ``d_Q`` passing ``p``."""
    acc: dict = {}
    for (n, twoG, pk, qk, q), c in X.terms.items():
        xp, xq = _pe(fun.P, n, twoG, pk), _pe(fun.Q, n, twoG, qk)
        dp = differential(fun.P, xp)
        if not dp.is_zero():
            _acc_tensor(acc, dp, xq, c, q)
        dq = differential(fun.Q, xq)
        if not dq.is_zero():
            s = -1 if fun.P.degree(pk) % 2 == 0 else 1
            _acc_tensor(acc, xp, dq, c * s, q)
    return FunElement(fun, LinComb._wrap(acc))


def fun_delta(fun: Fun, X: FunElement, theta: dict | None = None) -> FunElement:
    """``Delta = (o_ab (x) o_ab)(theta (x) theta)``; ``theta`` sends ``1..n`` into ``1..n-2, a, b``.

    The default ``theta`` is order preserving, with ``n-1 -> a`` and ``n -> b``.
    An explicit ``theta`` is a dict on ``1..n`` per arity ``n``: ``{n: {...}}``.
    """
    P, Q = fun.P, fun.Q
    acc: dict = {}
    for (n, twoG, pk, qk, q), c in X.terms.items():
        if n < 2:
            continue
        legs = _legs(n)
        if theta is not None and n in theta:
            images = tuple(theta[n][i] for i in legs)
        else:
            images = legs[:-2] + ("a", "b")
        pk2, sp, pl = _relabel_key(P, pk, legs, images)
        qk2, sq, ql = _relabel_key(Q, qk, legs, images)
        rp = P.self_compose_key("a", "b", pk2, pl)
        if rp.is_zero():
            continue
        _expect_corolla(P, rp, legs[:-2], twoG + 2)
        rq = Q.self_compose_key("a", "b", qk2, ql)
        s = sp * sq * (-1 if P.degree(pk) % 2 else 1)  # o_ab on Q has degree 1, passing p
        _acc_keys(acc, n - 2, twoG + 2, rp, rq, c * s, q)
    return FunElement(fun, LinComb._wrap(acc))


def random_theta(rng: random.Random, ns) -> dict:
    """Random bijections ``1..n -> {1..n-2, a, b}`` for each arity in ``ns``."""
    out = {}
    for n in ns:
        if n < 2:
            continue
        targets = list(range(1, n - 1)) + ["a", "b"]
        rng.shuffle(targets)
        out[n] = dict(zip(_legs(n), targets))
    return out


def _splits(N: int, n1: int):
    legs = _legs(N)
    for c1 in combinations(legs, n1):
        c2 = tuple(l for l in legs if l not in c1)
        yield c1, c2


def fun_bracket(fun: Fun, X: FunElement, Y: FunElement) -> FunElement:
    """``{X,Y} = (-1)^{|X|} 2 sum_{C1,C2} (o_{a,b} (x) o_{a,b})(theta1 theta2 theta1 theta2)(1 tau 1)(X (x) Y)``.

    ``theta1`` sends ``1..n1+1`` order-preservingly onto ``C1 + {a}`` with
    ``a`` the largest label, and likewise for ``theta2`` and ``b``.
    """
    P, Q = fun.P, fun.Q
    acc: dict = {}
    gx_, gy_ = _group(X), _group(Y)
    for nx, xs in gx_.items():
        if nx < 1:
            continue
        for ny, ys in gy_.items():
            if ny < 1:
                continue
            N = nx + ny - 2
            a, b = N + 1, N + 2
            for c1, c2 in _splits(N, nx - 1):
                xr = [(k, c, _relabel_key(P, k[2], _legs(nx), c1 + (a,)),
                       _relabel_key(Q, k[3], _legs(nx), c1 + (a,))) for k, c in xs]
                yr = [(k, c, _relabel_key(P, k[2], _legs(ny), c2 + (b,)),
                       _relabel_key(Q, k[3], _legs(ny), c2 + (b,))) for k, c in ys]
                for (kx, cx, (px, spx, lx), (qx, sqx, _)) in xr:
                    dpx, dqx = P.degree(kx[2]), Q.degree(kx[3])
                    for (ky, cy, (py, spy, ly), (qy, sqy, _)) in yr:
                        rp = P.compose_keys(a, b, px, lx, py, ly)
                        if rp.is_zero():
                            continue
                        rq = Q.compose_keys(a, b, qx, lx, qy, ly)
                        if rq.is_zero():
                            continue
                        twoG = kx[1] + ky[1]
                        _expect_corolla(P, rp, _legs(N), twoG)
                        dpy = P.degree(ky[2])
                        e = (dpx + dqx) + dqx * dpy + dpx + dpy
                        coeff = cx * cy * 2 * spx * sqx * spy * sqy * (-1 if e % 2 else 1)
                        _acc_keys(acc, N, twoG, rp, rq, coeff, kx[4] + ky[4])
    return FunElement(fun, LinComb._wrap(acc))


def fun_star(fun: Fun, X: FunElement, Y: FunElement) -> FunElement:
    """``X * Y = sum_{C1,C2} (#2 (x) #2)(theta1 theta2 theta1 theta2)(1 tau 1)(X (x) Y)``."""
    P, Q = fun.P, fun.Q
    acc: dict = {}
    gx_, gy_ = _group(X), _group(Y)
    for nx, xs in gx_.items():
        for ny, ys in gy_.items():
            N = nx + ny
            for c1, c2 in _splits(N, nx):
                xr = [(k, c, _relabel_key(P, k[2], _legs(nx), c1),
                       _relabel_key(Q, k[3], _legs(nx), c1)) for k, c in xs]
                yr = [(k, c, _relabel_key(P, k[2], _legs(ny), c2),
                       _relabel_key(Q, k[3], _legs(ny), c2)) for k, c in ys]
                for (kx, cx, (px, spx, lx), (qx, sqx, _)) in xr:
                    dqx = Q.degree(kx[3])
                    for (ky, cy, (py, spy, ly), (qy, sqy, _)) in yr:
                        rp = P.cs2_keys(px, lx, py, ly)
                        if rp.is_zero():
                            continue
                        twoG = kx[1] + ky[1] + 2
                        _expect_corolla(P, rp, _legs(N), twoG)
                        rq = Q.cs2_keys(qx, lx, qy, ly)
                        s = -1 if dqx * P.degree(ky[2]) % 2 else 1
                        _acc_keys(acc, N, twoG, rp, rq, cx * cy * spx * sqx * spy * sqy * s, kx[4] + ky[4])
    return FunElement(fun, LinComb._wrap(acc))


def fun_sharp(fun: Fun, X: FunElement) -> FunElement:
    """``# = #1 (x) #1``."""
    acc: dict = {}
    for (n, twoG, pk, qk, q), c in X.terms.items():
        rp = fun.P.cs1_key(pk, _legs(n))
        if rp.is_zero():
            continue
        _expect_corolla(fun.P, rp, _legs(n), twoG + 4)
        _acc_keys(acc, n, twoG + 4, rp, fun.Q.cs1_key(qk, _legs(n)), c, q)
    return FunElement(fun, LinComb._wrap(acc))


# -- sampling and bases -------------------------------------------------------

def _random_pair(fun: Fun, rng, n, max_genus, degree=None, twoG=None, tries=50):
    legs = _legs(n)
    kw = {"max_genus": max_genus}
    for _ in range(tries):
        pk = fun.P.random_key(rng, legs, twoG=twoG, **kw)
        if pk is None:
            continue
        tg = fun.P.key_twoG(pk, legs)
        if tg is None:
            tg = twoG if twoG is not None else rng.randint(0, 4)
        if tg < 0 or not is_stable(n, tg):
            continue
        want = None if degree is None else degree - fun.P.degree(pk)
        qk = fun.Q.random_key(rng, legs, degree=want, **kw)
        if qk is None:
            continue
        if want is not None and fun.Q.degree(qk) != want:
            continue
        return pk, qk, tg
    return None


def random_invariant(fun: Fun, rng: random.Random, n: int, max_genus: int = 2, terms: int = 2,
                     degree: int | None = None, twoG: int | None = None, q: int = 0) -> FunElement:
    """Symmetrization of a few random basis tensors of one arity and (if possible) one corolla."""
    acc: dict = {}
    for _ in range(terms):
        got = _random_pair(fun, rng, n, max_genus, degree, twoG)
        if got is None:
            continue
        pk, qk, tg = got
        twoG = tg
        if degree is None:
            degree = fun.P.degree(pk) + fun.Q.degree(qk)
        accumulate(acc, (n, tg, pk, qk, q), Fraction(rng.choice([1, -1, 2, -2, 3, Fraction(1, 2)])))
    return symmetrize(fun, FunElement(fun, LinComb._wrap(acc)))


def invariant_basis(fun: Fun, n: int, twoG: int, degree: int | None = None) -> list[FunElement]:
    """A basis of the invariant subspace of ``P(n,G) (x) Q(n,G)`` (orbit sums, deduplicated)."""
    legs = _legs(n)
    out, seen = [], set()
    for pk in fun.P.basis(legs, twoG):
        for qk in fun.Q.basis(legs, twoG):
            if degree is not None and fun.P.degree(pk) + fun.Q.degree(qk) != degree:
                continue
            if (pk, qk) in seen:
                continue
            x = symmetrize(fun, FunElement(fun, LinComb.single((n, twoG, pk, qk, 0))))
            for k in x.terms:
                seen.add((k[2], k[3]))
            if not x.is_zero():
                out.append(x)
    return out
