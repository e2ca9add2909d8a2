"""Orbit-sum form of ``Fun(P, Q)``, the quotient ``Fun_Exp``, exponentials and the QME.

An invariant element is ``sum_O a_O OrbitSum(rep_O)`` where
``OrbitSum(t) = sum_{sigma in S_n} sigma t`` and ``rep_O`` is a canonical
representative of the orbit.  All operations act on representatives:

* ``OrbitSum(x) * OrbitSum(y) = OrbitSum(x #2 y')`` (``y'`` has shifted legs),
* ``Delta OrbitSum(x) = sum_{i != j} (-1)^{|x_P|} OrbitSum(o_ij x)``,
* ``{OrbitSum(x), OrbitSum(y)} = (-1)^{|X|} 2 sum_{i, j} sign OrbitSum(x o_{i,j} y')``.

This keeps series with many legs tractable; :func:`compress` and
:func:`expand` translate to and from the expanded form of :mod:`connsum.fun`.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

from .exact import LinComb, accumulate, graded_sort, reorder_sign
from .fun import Fun, FunElement, FunError, _legs, _relabel_key, weight2
from .models import canonical_word
from .operad import LegError, is_stable
from .surfaces import QCOperad, QOOperad


class SharpNotInjectiveError(FunError):
    """``#`` has a kernel, so ``Fun_Exp`` is not flat and ``iota`` is not injective."""


class WeightError(FunError):
    """A series operation left the range where it is defined."""


UNIT = ("unit",)


def key_weight2(key) -> int:
    if key == UNIT:
        return 0
    n, twoG, pk, qk, q = key
    return weight2(n, twoG, q)


# -- canonical orbit representatives ---------------------------------------------

def _qc_canon(fun: Fun, n, pk, qk):
    degs = fun.Q.space.degrees
    word, s = graded_sort(qk, lambda i: bool(degs[i] & 1))
    return pk, word, s


def _qo_canon(fun: Fun, n, pk, qk):
    degs = fun.Q.space.degrees
    cycles, g = pk
    empty = sum(1 for c in cycles if not c)
    full = [c for c in cycles if c]
    order = [l - 1 for c in full for l in c]
    sign = reorder_sign(order, [bool(degs[i] & 1) for i in qk])
    blocks = []
    for c in full:
        letters = tuple(qk[l - 1] for l in c)
        best, s = canonical_word(degs, letters)
        if not s:
            return None, None, 0
        sign *= s
        blocks.append(best)
    srt, s = graded_sort(tuple(blocks), lambda w: bool(sum(degs[i] for i in w) & 1),
                         key=lambda w: (len(w), w))
    if not s:
        return None, None, 0
    sign *= s
    new_cycles, nxt = [()] * empty, 1
    for w in srt:
        new_cycles.append(tuple(range(nxt, nxt + len(w))))
        nxt += len(w)
    return QOOperad.make_key(new_cycles, g), tuple(i for w in srt for i in w), sign


def _brute_canon(fun: Fun, n, pk, qk):
    legs = _legs(n)
    best, best_sign, stab_bad = None, 0, False
    for perm in permutations(legs):
        p2, sp, _ = _relabel_key(fun.P, pk, legs, perm)
        q2, sq, _ = _relabel_key(fun.Q, qk, legs, perm)
        cand = (repr(p2), repr(q2))
        if best is None or cand < best[0]:
            best, best_sign = (cand, p2, q2), sp * sq
        elif cand == best[0] and sp * sq != best_sign:
            stab_bad = True
    if stab_bad:
        return None, None, 0
    return best[1], best[2], best_sign


def canonicalizer(fun: Fun):
    if isinstance(fun.P, QCOperad):
        return _qc_canon
    if isinstance(fun.P, QOOperad):
        return _qo_canon
    return _brute_canon


class OrbitElement:
    """An invariant element in orbit-sum form (optionally a truncated series)."""

    __slots__ = ("fun", "terms")

    def __init__(self, fun: Fun, terms):
        self.fun = fun
        self.terms = terms if isinstance(terms, LinComb) else LinComb(terms)

    def is_zero(self):
        return self.terms.is_zero()

    def __add__(self, other):
        return OrbitElement(self.fun, self.terms + other.terms)

    def __sub__(self, other):
        return OrbitElement(self.fun, self.terms - other.terms)

    def __neg__(self):
        return OrbitElement(self.fun, -self.terms)

    def scale(self, s):
        return OrbitElement(self.fun, self.terms.scale(s))

    def __eq__(self, other):
        if not isinstance(other, OrbitElement):
            return NotImplemented
        return self.fun == other.fun and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def weights2(self) -> set:
        return {key_weight2(k) for k in self.terms}

    def degree_of(self, key) -> int:
        if key == UNIT:
            return 0
        return self.fun.P.degree(key[2]) + self.fun.Q.degree(key[3])

    def degrees(self) -> set:
        return {self.degree_of(k) for k in self.terms}

    @property
    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise FunError("element is not homogeneous")
        return ds.pop() if ds else 0

    def filter_weight(self, lo2=None, hi2=None) -> "OrbitElement":
        def keep(k):
            w = key_weight2(k)
            return (lo2 is None or w >= lo2) and (hi2 is None or w <= hi2)
        return OrbitElement(self.fun, self.terms.filter(keep))

    def by_weight(self) -> dict:
        out: dict = {}
        for k, c in self.terms.items():
            out.setdefault(key_weight2(k), {})[k] = c
        return {w: OrbitElement(self.fun, LinComb._wrap(v)) for w, v in sorted(out.items())}

    def __repr__(self):
        from .expr import format_orbit
        return format_orbit(self)


class OrbitFun:
    """Orbit-sum arithmetic for a fixed ``Fun(P, Q)``."""

    def __init__(self, fun: Fun):
        self.fun = fun
        self.P, self.Q = fun.P, fun.Q
        self._canon = canonicalizer(fun)

    def element(self, terms) -> OrbitElement:
        return OrbitElement(self.fun, terms)

    def zero(self) -> OrbitElement:
        return OrbitElement(self.fun, LinComb.zero())

    def unit(self) -> OrbitElement:
        return OrbitElement(self.fun, LinComb._wrap({UNIT: Fraction(1)}))

    def canon(self, n, twoG, pk, qk, q):
        """``(key, sign)`` of the canonical representative; sign 0 if the orbit sum vanishes."""
        return _canon_cached(self, n, twoG, pk, qk, q)

    def rep(self, n, twoG, pk, qk, q=0, coeff=1) -> OrbitElement:
        key, s = self.canon(n, twoG, pk, qk, q)
        return self.element(LinComb._wrap({key: Fraction(coeff) * s} if s else {}))

    # conversions ---------------------------------------------------------

    def compress(self, X: FunElement) -> OrbitElement:
        acc: dict = {}
        for (n, twoG, pk, qk, q), c in X.terms.items():
            key, s = self.canon(n, twoG, pk, qk, q)
            if s:
                accumulate(acc, key, c * s / math.factorial(n))
        return self.element(LinComb._wrap(acc))

    def expand(self, A: OrbitElement) -> FunElement:
        from .fun import symmetrize
        acc: dict = {}
        for k, c in A.terms.items():
            if k == UNIT:
                raise FunError("the unit has no expanded form")
            accumulate(acc, k, c * math.factorial(k[0]))
        return symmetrize(self.fun, FunElement(self.fun, LinComb._wrap(acc)))

    # operations -------------------------------------------------------------

    def _finish(self, acc, n, twoG, rp, rq, legs, coeff, q):
        """Relabel a composite onto ``1..n`` (order preserving) and canonicalize."""
        std = _legs(n)
        for pk, pc in rp.items():
            pk2, sp, _ = _relabel_key(self.P, pk, legs, std)
            for qk, qc in rq.items():
                qk2, sq, _ = _relabel_key(self.Q, qk, legs, std)
                key, s = self.canon(n, twoG, pk2, qk2, q)
                if s:
                    accumulate(acc, key, coeff * pc * qc * sp * sq * s)

    def d(self, A: OrbitElement) -> OrbitElement:
        from .operad import OperadElement, differential
        acc: dict = {}
        for k, c in A.terms.items():
            if k == UNIT:
                continue
            n, twoG, pk, qk, q = k
            legs = _legs(n)
            dq = self.Q.differential_key(qk, legs)
            if not dq.is_zero():
                s = -1 if self.P.degree(pk) % 2 == 0 else 1
                self._finish(acc, n, twoG, LinComb._wrap({pk: Fraction(1)}), dq, legs, c * s, q)
            dp = self.P.differential_key(pk, legs)
            if not dp.is_zero():
                self._finish(acc, n, twoG, dp, LinComb._wrap({qk: Fraction(1)}), legs, c, q)
        return self.element(LinComb._wrap(acc))

    def delta(self, A: OrbitElement) -> OrbitElement:
        acc: dict = {}
        for k, c in A.terms.items():
            if k == UNIT or k[0] < 2:
                continue
            n, twoG, pk, qk, q = k
            legs = _legs(n)
            s = -1 if self.P.degree(pk) % 2 else 1
            for i in legs:
                for j in legs:
                    if i >= j:
                        continue
                    # o_ij = o_ji, so each unordered pair counts twice
                    rp = self.P.self_compose_key(i, j, pk, legs)
                    if rp.is_zero():
                        continue
                    rq = self.Q.self_compose_key(i, j, qk, legs)
                    rest = tuple(l for l in legs if l not in (i, j))
                    self._finish(acc, n - 2, twoG + 2, rp, rq, rest, 2 * c * s, q)
        return self.element(LinComb._wrap(acc))

    def _shifted(self, k, offset):
        n, twoG, pk, qk, q = k
        legs = _legs(n)
        new = tuple(l + offset for l in legs)
        pk2, sp, _ = _relabel_key(self.P, pk, legs, new)
        qk2, sq, _ = _relabel_key(self.Q, qk, legs, new)
        return pk2, qk2, new, sp * sq

    def bracket(self, A: OrbitElement, B: OrbitElement) -> OrbitElement:
        P, Q = self.P, self.Q
        acc: dict = {}
        for kx, cx in A.terms.items():
            if kx == UNIT or kx[0] < 1:
                continue
            nx, gx, px, qx, qqx = kx
            lx = _legs(nx)
            dpx, dqx = P.degree(px), Q.degree(qx)
            for ky, cy in B.terms.items():
                if ky == UNIT or ky[0] < 1:
                    continue
                ny, gy, _, _, qqy = ky
                py, qy, ly, sy = self._shifted(ky, nx)
                dpy = P.degree(ky[2])
                e = (dpx + dqx) + dqx * dpy + dpx + dpy
                coeff = cx * cy * 2 * sy * (-1 if e % 2 else 1)
                for i in lx:
                    for j in ly:
                        rp = P.compose_keys(i, j, px, lx, py, ly)
                        if rp.is_zero():
                            continue
                        rq = Q.compose_keys(i, j, qx, lx, qy, ly)
                        if rq.is_zero():
                            continue
                        rest = tuple(l for l in lx + ly if l not in (i, j))
                        self._finish(acc, nx + ny - 2, gx + gy, rp, rq, rest, coeff, qqx + qqy)
        return self.element(LinComb._wrap(acc))

    def star(self, A: OrbitElement, B: OrbitElement, hi2: int | None = None) -> OrbitElement:
        P, Q = self.P, self.Q
        acc: dict = {}
        for kx, cx in A.terms.items():
            wx = key_weight2(kx)
            for ky, cy in B.terms.items():
                if hi2 is not None and wx + key_weight2(ky) > hi2:
                    continue
                if kx == UNIT:
                    accumulate(acc, ky, cx * cy)
                    continue
                if ky == UNIT:
                    accumulate(acc, kx, cx * cy)
                    continue
                nx, gx, px, qx, qqx = kx
                lx = _legs(nx)
                py, qy, ly, sy = self._shifted(ky, nx)
                rp = P.cs2_keys(px, lx, py, ly)
                if rp.is_zero():
                    continue
                rq = Q.cs2_keys(qx, lx, qy, ly)
                s = -1 if Q.degree(qx) * P.degree(ky[2]) % 2 else 1
                self._finish(acc, nx + ky[0], gx + ky[1] + 2, rp, rq, lx + ly, cx * cy * sy * s, qqx + ky[4])
        return self.element(LinComb._wrap(acc))

    def sharp(self, A: OrbitElement) -> OrbitElement:
        acc: dict = {}
        for k, c in A.terms.items():
            if k == UNIT:
                raise FunError("# is not defined on the unit")
            n, twoG, pk, qk, q = k
            legs = _legs(n)
            rp = self.P.cs1_key(pk, legs)
            if rp.is_zero():
                continue
            self._finish(acc, n, twoG + 4, rp, self.Q.cs1_key(qk, legs), legs, c, q)
        return self.element(LinComb._wrap(acc))

    def kappa(self, A: OrbitElement, power: int = 1) -> OrbitElement:
        if any(k == UNIT for k in A.terms) and power:
            raise FunError("kappa powers of the unit are not tracked")
        return self.element(A.terms.rekey(lambda k: k if k == UNIT else k[:4] + (k[4] + power,)))


@lru_cache(maxsize=1 << 18)
def _canon_cached(ofun: OrbitFun, n, twoG, pk, qk, q):
    p2, q2, s = ofun._canon(ofun.fun, n, pk, qk)
    if not s:
        return None, 0
    return (n, twoG, p2, q2, q), s


# -- Fun_Exp ------------------------------------------------------------------------

DEFAULT_CUTOFF = 8
FLOOR2 = 1  # weights >= 1/2


class FunExp:
    """Truncated series in ``Fun_Exp(P, Q)`` with a mandatory weight cutoff ``W``.

    Elements are :class:`OrbitElement` values kept in normal form: every term
    that is a ``#``-image of a stable term is traded for a power of ``kappa``.
    """

    def __init__(self, fun: Fun, cutoff=DEFAULT_CUTOFF):
        self.ofun = OrbitFun(fun)
        self.fun = fun
        self.cutoff = Fraction(cutoff)
        self.hi2 = int(2 * self.cutoff)
        if self.hi2 != 2 * self.cutoff:
            raise WeightError("the cutoff must be a half-integer")

    # normal form --------------------------------------------------------

    def _reduce_key(self, key):
        P, Q = self.fun.P, self.fun.Q
        n, twoG, pk, qk, q = key
        legs = _legs(n)
        while twoG >= 4 and is_stable(n, twoG - 4):
            p0 = P.cs1_preimage(pk, legs)
            q0 = Q.cs1_preimage(qk, legs)
            if p0 is None or q0 is None:
                break
            pk, qk, twoG, q = p0, q0, twoG - 4, q + 1
        return n, twoG, pk, qk, q

    def normalize(self, A: OrbitElement) -> OrbitElement:
        acc: dict = {}
        for k, c in A.terms.items():
            accumulate(acc, k if k == UNIT else self._reduce_key(k), c)
        return self.ofun.element(LinComb._wrap(acc))

    def truncate(self, A: OrbitElement) -> OrbitElement:
        return A.filter_weight(None, self.hi2)

    def series(self, A: OrbitElement) -> OrbitElement:
        for k in A.terms:
            if k != UNIT and key_weight2(k) < FLOOR2:
                raise WeightError("Fun_Exp only holds weights >= 1/2")
        return self.truncate(self.normalize(A))

    def iota(self, S: OrbitElement, kappa_power: int = 0) -> OrbitElement:
        """The natural map from ``Fun`` followed by ``kappa^kappa_power``.

        The power is applied before truncating, so ``iota(S, -1)`` keeps the
        terms of ``S`` up to weight ``W + 2``.
        """
        require_injective_sharp(self.fun)
        for k in S.terms:
            if k == UNIT or k[4] != 0:
                raise FunError("iota takes plain elements of Fun")
        return self.series(self.ofun.kappa(S, kappa_power))

    def equal(self, A: OrbitElement, B: OrbitElement) -> bool:
        return self.truncate(self.normalize(A - B)).is_zero()

    # operations -----------------------------------------------------------

    def kappa(self, A: OrbitElement, power: int = 1) -> OrbitElement:
        out = self.ofun.kappa(A, power)
        if power < 0:
            for k in out.terms:
                if k != UNIT and key_weight2(k) < FLOOR2:
                    raise WeightError("dividing by kappa left the weight >= 1/2 range")
        return self.series(out)

    def star(self, A, B):
        return self.truncate(self.normalize(self.ofun.star(A, B, self.hi2)))

    def delta(self, A):
        return self.normalize(self.ofun.delta(A))

    def d(self, A):
        return self.normalize(self.ofun.d(A))

    def bracket(self, A, B):
        for ka in A.terms:
            for kb in B.terms:
                if UNIT in (ka, kb):
                    continue
                if key_weight2(ka) + key_weight2(kb) < 5:
                    raise WeightError("the bracket on Fun_Exp needs total weight >= 5/2")
        return self.truncate(self.normalize(self.ofun.bracket(A, B)))

    def exp(self, X: OrbitElement) -> OrbitElement:
        """``1 + X + X^2/2! + ...`` through the cutoff."""
        self._check_positive(X)
        result = self.ofun.unit()
        term = self.ofun.unit()
        k = 0
        while True:
            k += 1
            term = self.star(term, X).scale(Fraction(1, k))
            if term.is_zero():
                return result
            result = result + term

    def log(self, Y: OrbitElement) -> OrbitElement:
        """``log(1 + X) = X - X^2/2 + X^3/3 - ...`` through the cutoff."""
        if Y.terms.coeff(UNIT) != 1:
            raise WeightError("log needs a series of the form 1 + X")
        X = Y.filter_weight(1, None)
        X = OrbitElement(self.fun, X.terms.filter(lambda k: k != UNIT))
        self._check_positive(X)
        result = self.ofun.zero()
        power = self.ofun.unit()
        k = 0
        while True:
            k += 1
            power = self.star(power, X)
            if power.is_zero():
                return result
            result = result + power.scale(Fraction((-1) ** (k + 1), k))

    def _check_positive(self, X):
        for k in X.terms:
            if k == UNIT or key_weight2(k) < FLOOR2:
                raise WeightError("exp and log need a series of weight >= 1/2 (non-positive weight floor)")

    # (de)serialization --------------------------------------------------------

    def to_json(self, A: OrbitElement) -> dict:
        from .expr import key_to_json
        comps: dict = {}
        for k, c in A.terms.items():
            if k == UNIT:
                comps.setdefault((0, -2, 0), []).append({"p_gen": "1", "q_monomial": "1", "coeff": _frac(c)})
                continue
            n, twoG, pk, qk, q = k
            comps.setdefault((n, twoG, q), []).append(
                {**key_to_json(self.fun, n, twoG, pk, qk), "coeff": _frac(c)})
        body = [{"n": n, "twoG": twoG, "q": q, "terms": sorted(ts, key=lambda t: json.dumps(t, sort_keys=True))}
                for (n, twoG, q), ts in sorted(comps.items())]
        return {"schema": "fun-series/1", "operads": [self.fun.P.name, self.fun.Q.name],
                "cutoff": _frac(self.cutoff), "weight_floor": "1/2", "components": body}


def _frac(c) -> str:
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


# -- flatness ------------------------------------------------------------------

def require_injective_sharp(fun: Fun, max_legs: int = 3, max_twoG: int = 6) -> None:
    """Raise :class:`SharpNotInjectiveError` if ``#1`` is visibly non-injective.

    ``#1`` is tested on the basis keys of ``P`` over small corollas; the
    operads shipped here satisfy it, the toy operad does not.
    """
    bad = _sharp_kernel_witness(fun.P, max_legs, max_twoG)
    if bad is not None:
        raise SharpNotInjectiveError(
            f"#1 of {fun.P.name} kills {fun.P.format_key(bad[1], bad[0])}; Fun_Exp is not flat")


@lru_cache(maxsize=64)
def _sharp_kernel_witness(P, max_legs, max_twoG):
    for n in range(max_legs + 1):
        legs = _legs(n)
        for twoG in range(max_twoG + 1):
            if not is_stable(n, twoG):
                continue
            for k in P.basis(legs, twoG):
                if P.cs1_key(k, legs).is_zero():
                    return legs, k
    return None


def random_series(fx: FunExp, rng, terms: int = 3, degree: int = 0, max_legs: int = 4,
                  max_genus: int = 1) -> OrbitElement:
    """A few random orbit sums with weights in ``[1/2, W]`` (``kappa`` powers may be negative)."""
    from .fun import _random_pair
    acc: dict = {}
    for _ in range(terms * 4):
        if len(acc) >= terms:
            break
        n = rng.randint(0, max_legs)
        got = _random_pair(fx.fun, rng, n, max_genus, degree)
        if got is None:
            continue
        pk, qk, twoG = got
        base = weight2(n, twoG, 0)
        qs = [q for q in range(-3, 3) if FLOOR2 <= base + 4 * q <= fx.hi2]
        if not qs:
            continue
        key, s = fx.ofun.canon(n, twoG, pk, qk, rng.choice(qs))
        if s:
            accumulate(acc, key, Fraction(rng.choice([1, -1, 2, Fraction(1, 3), Fraction(-3, 2)])))
    return fx.series(fx.ofun.element(LinComb._wrap(acc)))
