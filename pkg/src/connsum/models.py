"""The concrete BD algebras ``Fun_sym(V)`` and ``Fun_cyc(V)`` and the maps into them.

``Fun_sym`` keys are ``(word, q)``: a graded-sorted tuple of covector indices
times ``kappa^q``.  ``Fun_cyc`` keys are ``(words, xi, q)``: a graded-sorted
tuple of canonical cyclic words times ``xi^xi kappa^q``.  Both kinds of
element are :class:`ModelElement` values tagged with their model.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .exact import LinComb, accumulate, graded_sort
from .fun import Fun, FunElement, _legs, symmetrize
from .space import DgSymplecticSpace
from .surfaces import QC, QO


class ModelError(ValueError):
    pass


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


class ModelElement:
    __slots__ = ("model", "terms")

    def __init__(self, model, terms):
        self.model = model
        self.terms = terms if isinstance(terms, LinComb) else LinComb(terms)

    def _same(self, other):
        if self.model is not other.model and self.model != other.model:
            raise ModelError("elements of different models")

    def __add__(self, other):
        self._same(other)
        return ModelElement(self.model, self.terms + other.terms)

    def __sub__(self, other):
        self._same(other)
        return ModelElement(self.model, self.terms - other.terms)

    def __neg__(self):
        return ModelElement(self.model, -self.terms)

    def scale(self, s):
        return ModelElement(self.model, self.terms.scale(s))

    def __mul__(self, other):
        return self.model.mul(self, other)

    def is_zero(self) -> bool:
        return self.terms.is_zero()

    def __eq__(self, other):
        if not isinstance(other, ModelElement):
            return NotImplemented
        return self.model == other.model and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    @property
    def degree(self) -> int:
        ds = {self.model.key_degree(k) for k in self.terms}
        if len(ds) > 1:
            raise ModelError("element is not homogeneous")
        return ds.pop() if ds else 0

    def __repr__(self):
        from .expr import format_model
        return format_model(self)


class _Model:
    """Shared BD-algebra plumbing; subclasses supply products and generators."""

    def __init__(self, space: DgSymplecticSpace):
        self.space = space

    def __eq__(self, other):
        return type(self) is type(other) and self.space == other.space

    def __hash__(self):
        return hash((type(self).__name__, self.space))

    def cov_odd(self, i: int) -> bool:
        return bool(self.space.degrees[i] & 1)

    def element(self, terms) -> ModelElement:
        return ModelElement(self, terms)

    def zero(self) -> ModelElement:
        return ModelElement(self, LinComb.zero())

    def _lift(self, fn, *xs) -> ModelElement:
        acc: dict = {}
        if len(xs) == 1:
            for k, c in xs[0].terms.items():
                for k2, c2 in fn(k).items():
                    accumulate(acc, k2, c * c2)
        else:
            for k1, c1 in xs[0].terms.items():
                for k2, c2 in xs[1].terms.items():
                    for k3, c3 in fn(k1, k2).items():
                        accumulate(acc, k3, c1 * c2 * c3)
        return ModelElement(self, LinComb._wrap(acc))

    def mul(self, x: ModelElement, y: ModelElement) -> ModelElement:
        return self._lift(self.mul_keys, x, y)

    def kappa(self, x: ModelElement, power: int = 1) -> ModelElement:
        return ModelElement(self, x.terms.rekey(lambda k: k[:-1] + (k[-1] + power,)))

    def deviation(self, x: ModelElement, y: ModelElement) -> ModelElement:
        """``(-1)^{|X|}(Delta(XY) - Delta(X)Y - (-1)^{|X|} X Delta(Y))`` for the BD operator."""
        s = _sign(x.degree)
        bd = self.bd_delta
        return (bd(self.mul(x, y)) - self.mul(bd(x), y) - self.mul(x, bd(y)).scale(s)).scale(s)


# -- Fun_sym -------------------------------------------------------------------

class SymModel(_Model):
    """``prod_n Sym^n(V*) [[kappa]]`` with ``Delta`` from the inverse form."""

    name = "sym"

    def key_degree(self, key) -> int:
        return sum(self.space.cov_degree(i) for i in key[0])

    def monomial(self, indices, q: int = 0, coeff=1) -> ModelElement:
        word, s = graded_sort(tuple(indices), self.cov_odd)
        c = Fraction(coeff) * s
        return ModelElement(self, LinComb._wrap({(word, q): c} if c else {}))

    def mul_keys(self, k1, k2) -> LinComb:
        word, s = graded_sort(k1[0] + k2[0], self.cov_odd)
        return LinComb._wrap({(word, k1[1] + k2[1]): Fraction(s)} if s else {})

    def deriv_keys(self, i: int, key) -> LinComb:
        """Left derivative ``d/d phi^i``."""
        word, q = key
        acc: dict = {}
        par = 0
        odd_i = self.cov_odd(i)
        for p, j in enumerate(word):
            if j == i:
                accumulate(acc, (word[:p] + word[p + 1:], q), -1 if odd_i and par else 1)
            par ^= self.cov_odd(j)
        return LinComb._wrap(acc)

    def deriv(self, i: int, x: ModelElement) -> ModelElement:
        return self._lift(lambda k: self.deriv_keys(i, k), x)

    def delta(self, x: ModelElement) -> ModelElement:
        """``(-1)^{|phi^i|} w^{ij} d^2/(d phi^i d phi^j)``."""
        out = self.zero()
        winv = self.space.omega_inv
        for i in range(self.space.dim):
            for j in range(self.space.dim):
                if winv[i][j]:
                    out = out + self.deriv(i, self.deriv(j, x)).scale(winv[i][j] * _sign(self.space.cov_degree(i)))
        return out

    def bd_delta(self, x: ModelElement) -> ModelElement:
        return self.kappa(self.delta(x))

    def bracket(self, x: ModelElement, y: ModelElement) -> ModelElement:
        """``2 (-1)^{|phi^i| + |X|(|phi^j|+1)} w^{ij} (dX/d phi^i)(dY/d phi^j)``.

        The factor 2 makes it the deviation of ``Delta`` from a derivation.
        """
        out = self.zero()
        winv = self.space.omega_inv
        for dx, xpart in _by_degree(self, x).items():
            for i in range(self.space.dim):
                di = self.deriv(i, xpart)
                if di.is_zero():
                    continue
                for j in range(self.space.dim):
                    if not winv[i][j]:
                        continue
                    e = self.space.cov_degree(i) + dx * (self.space.cov_degree(j) + 1)
                    out = out + self.mul(di, self.deriv(j, y)).scale(2 * winv[i][j] * _sign(e))
        return out

    def d(self, x: ModelElement) -> ModelElement:
        """``(-1)^{|phi^i|} (phi^i o d_V) d/d phi^i``."""
        out = self.zero()
        for i in range(self.space.dim):
            pull = self.space.pullback_table[i]
            if not pull:
                continue
            lin = ModelElement(self, LinComb._wrap({((l,), 0): Fraction(c) for l, c in pull.items()}))
            out = out + self.mul(lin, self.deriv(i, x)).scale(_sign(self.space.cov_degree(i)))
        return out


def _by_degree(model, x: ModelElement) -> dict:
    out: dict = {}
    for k, c in x.terms.items():
        out.setdefault(model.key_degree(k), {})[k] = c
    return {d: ModelElement(model, LinComb._wrap(v)) for d, v in out.items()}


# -- cyclic words ---------------------------------------------------------------

def rotation_sign(degs, word, m: int) -> int:
    """Sign ``s`` with ``(w) = s (w[m:] w[:m])`` for the cyclic word ``w``."""
    head = sum(degs[i] for i in word[:m])
    tail = sum(degs[i] for i in word[m:])
    return _sign(head * tail)


def canonical_word(degs, word) -> tuple[tuple, int]:
    """Minimal rotation and its sign; sign 0 if the word equals minus itself."""
    word = tuple(word)
    if not word:
        return (), 1
    best, sign = None, 0
    for m in range(len(word)):
        rot = word[m:] + word[:m]
        s = rotation_sign(degs, word, m)
        if best is None or rot < best:
            best, sign = rot, s
        elif rot == best and s != sign:
            return best, 0
    return best, sign


class CycModel(_Model):
    """``prod_n Sym^n(+_k Cyc_k(V*)) [[kappa, xi]]``."""

    name = "cyc"

    def word_degree(self, word) -> int:
        return sum(self.space.cov_degree(i) for i in word)

    def word_odd(self, word) -> bool:
        return bool(self.word_degree(word) & 1)

    def key_degree(self, key) -> int:
        return sum(self.word_degree(w) for w in key[0])

    def _degs(self):
        return self.space.degrees

    def product_key(self, words, xi: int = 0, q: int = 0) -> tuple[tuple, int]:
        """Canonical key for a product of (not yet canonical) cyclic words; sign 0 means zero."""
        sign = 1
        canon = []
        for w in words:
            if not w:
                xi += 1
                continue
            cw, s = canonical_word(self._degs(), w)
            if not s:
                return None, 0
            sign *= s
            canon.append(cw)
        srt, s = graded_sort(tuple(canon), self.word_odd, key=lambda w: (len(w), w))
        if not s:
            return None, 0
        return (srt, xi, q), sign * s

    def word(self, *words, xi: int = 0, q: int = 0, coeff=1) -> ModelElement:
        key, s = self.product_key(words, xi, q)
        c = Fraction(coeff) * s
        return ModelElement(self, LinComb._wrap({key: c} if c else {}))

    def mul_keys(self, k1, k2) -> LinComb:
        srt, s = graded_sort(k1[0] + k2[0], self.word_odd, key=lambda w: (len(w), w))
        if not s:
            return LinComb.zero()
        return LinComb._wrap({(srt, k1[1] + k2[1], k1[2] + k2[2]): Fraction(s)})

    # single-cycle operations ---------------------------------------------

    def _rotations(self, word):
        for m in range(len(word)):
            yield word[m:] + word[:m], rotation_sign(self._degs(), word, m)

    def delta_word(self, word) -> LinComb:
        return _cyc_delta_word(self, word)

    def bracket_words(self, w1, w2) -> LinComb:
        return _cyc_bracket_words(self, w1, w2)

    # extension to products -------------------------------------------------

    def _key_elem(self, key) -> ModelElement:
        return ModelElement(self, LinComb._wrap({key: Fraction(1)}))

    def _split(self, key):
        """``key = first * rest`` with ``first`` a single cycle."""
        words, xi, q = key
        return ((words[0],), 0, 0), (words[1:], xi, q)

    def delta_key(self, key) -> ModelElement:
        words, xi, q = key
        if not words:
            return self.zero()
        if len(words) == 1:
            return ModelElement(self, self.delta_word(words[0]).rekey(
                lambda k: (k[0], k[1] + xi, k[2] + q)))
        first, rest = self._split(key)
        s = _sign(self.word_degree(words[0]))
        X, R = self._key_elem(first), self._key_elem(rest)
        return (self.mul(self.delta_key(first), R) + self.mul(X, self.delta_key(rest)).scale(s)
                + self.kappa(self.bracket(X, R)).scale(s))

    def delta(self, x: ModelElement) -> ModelElement:
        out = self.zero()
        for k, c in x.terms.items():
            out = out + self.delta_key(k).scale(c)
        return out

    bd_delta = delta

    def bracket_key(self, k1, k2) -> ModelElement:
        w1, w2 = k1[0], k2[0]
        scal = (k1[1] + k2[1], k1[2] + k2[2])
        if not w1 or not w2:
            return self.zero()
        if len(w1) == 1 and len(w2) == 1:
            return ModelElement(self, self.bracket_words(w1[0], w2[0]).rekey(
                lambda k: (k[0], k[1] + scal[0], k[2] + scal[1])))
        if len(w2) > 1:
            # {X, YZ} = {X,Y}Z + (-1)^{(|X|+1)|Y|} Y{X,Z}
            X = self._key_elem((w1, k1[1], k1[2]))
            Y = self._key_elem(((w2[0],), 0, 0))
            Z = self._key_elem((w2[1:], k2[1], k2[2]))
            e = (self.key_degree(k1) + 1) * self.word_degree(w2[0])
            return self.mul(self.bracket(X, Y), Z) + self.mul(Y, self.bracket(X, Z)).scale(_sign(e))
        # {X, Y} = -(-1)^{(|X|+1)(|Y|+1)} {Y, X}
        e = (self.key_degree(k1) + 1) * (self.key_degree(k2) + 1)
        return self.bracket_key(k2, k1).scale(-_sign(e))

    def bracket(self, x: ModelElement, y: ModelElement) -> ModelElement:
        out = self.zero()
        for k1, c1 in x.terms.items():
            for k2, c2 in y.terms.items():
                out = out + self.bracket_key(k1, k2).scale(c1 * c2)
        return out

    def d(self, x: ModelElement) -> ModelElement:
        """Derivation extending ``phi^i -> (-1)^{|phi^i|} phi^i o d_V`` letter by letter."""
        acc: dict = {}
        pull = self.space.pullback_table
        for (words, xi, q), c in x.terms.items():
            par = 0
            for wi, w in enumerate(words):
                for p, i in enumerate(w):
                    for l, dc in pull[i].items():
                        nw = w[:p] + (l,) + w[p + 1:]
                        key, s = self.product_key(words[:wi] + (nw,) + words[wi + 1:], xi, q)
                        if s:
                            e = par + self.space.cov_degree(i)
                            accumulate(acc, key, c * dc * s * _sign(e))
                    par += self.space.cov_degree(i)
        return ModelElement(self, LinComb._wrap(acc))


@lru_cache(maxsize=1 << 16)
def _cyc_delta_word(model: CycModel, word) -> LinComb:
    """``sum_k (-1)^{|phi^{i1}| + |phi^{i(k+2)}|(|phi^{i2}|+...+|phi^{i(k+1)}|)} w^{i1 i(k+2)} (..)(..) + cycl.``"""
    sp = model.space
    cd = sp.cov_degree
    winv = sp.omega_inv
    acc: dict = {}
    n = len(word)
    for rot, rs in model._rotations(word):
        for k in range(0, n - 1):
            i1, ik = rot[0], rot[k + 1]
            w = winv[i1][ik]
            if not w:
                continue
            mid, tail = rot[1:k + 1], rot[k + 2:]
            e = cd(i1) + cd(ik) * sum(cd(i) for i in mid)
            key, s = model.product_key((mid, tail))
            if s:
                accumulate(acc, key, w * rs * s * _sign(e))
    return LinComb._wrap(acc)


@lru_cache(maxsize=1 << 16)
def _cyc_bracket_words(model: CycModel, w1, w2) -> LinComb:
    """``2 (-1)^{|phi^{i1}| + |w1|(|phi^{j1}|+1)} w^{i1 j1} (phi^{i2}..phi^{j2}..) + cycl. x cycl.``"""
    sp = model.space
    cd = sp.cov_degree
    winv = sp.omega_inv
    acc: dict = {}
    d1 = model.word_degree(w1)
    for r1, s1 in model._rotations(w1):
        for r2, s2 in model._rotations(w2):
            w = winv[r1[0]][r2[0]]
            if not w:
                continue
            e = cd(r1[0]) + d1 * (cd(r2[0]) + 1)
            key, s = model.product_key((r1[1:] + r2[1:],))
            if s:
                accumulate(acc, key, 2 * w * s1 * s2 * s * _sign(e))
    return LinComb._wrap(acc)


# -- the comparison maps ----------------------------------------------------------

def _endo_space(fun: Fun) -> DgSymplecticSpace:
    return fun.Q.space


def psi(fun: Fun, X: FunElement) -> ModelElement:
    """``C_n^g (x) w -> [w] kappa^g / n!`` on ``Fun(QC, E_V)``."""
    if fun.P is not QC:
        raise ModelError("psi is defined on Fun(QC, E_V)")
    model = SymModel(_endo_space(fun))
    acc: dict = {}
    for (n, twoG, g, word, q), c in X.terms.items():
        srt, s = graded_sort(word, model.cov_odd)
        if s:
            accumulate(acc, (srt, g + q), c * s / math.factorial(n))
    return ModelElement(model, LinComb._wrap(acc))


def orbit_of(cycles) -> tuple:
    """``(b_0, b_1, ...)`` for a tuple of cycles (trailing zeros dropped)."""
    if not cycles:
        return (0,)
    top = max(len(c) for c in cycles)
    b = [0] * (top + 1)
    for c in cycles:
        b[len(c)] += 1
    return tuple(b)


def standard_cycles(b) -> tuple:
    """The orbit representative ``x_b``: empty cycles, singletons, then consecutive blocks."""
    out, nxt = [], 1
    for length, count in enumerate(b):
        for _ in range(count):
            out.append(tuple(range(nxt, nxt + length)))
            nxt += length
    return tuple(out)


def stabilizer_order(b) -> int:
    return math.prod(i ** bi * math.factorial(bi) for i, bi in enumerate(b) if i >= 1)


def orbit_decompose(fun: Fun, X: FunElement) -> list[tuple]:
    """``[(b, g, q, twoG, w_b)]`` with ``w_b`` the tensor sitting on ``x_b`` (a LinComb of words)."""
    if fun.P is not QO:
        raise ModelError("orbit decomposition is defined on Fun(QO, E_V)")
    parts: dict = {}
    for (n, twoG, (cycles, g), word, q), c in X.terms.items():
        b = orbit_of(cycles)
        if cycles == standard_cycles(b):
            parts.setdefault((b, g, q, twoG, n), {})[word] = c
    out = [(b, g, q, twoG, LinComb._wrap(ws)) for (b, g, q, twoG, n), ws in parts.items()]
    out.sort(key=lambda t: (t[3], t[0], t[1], t[2]))
    return out


def orbit_reassemble(fun: Fun, parts) -> FunElement:
    """Inverse of :func:`orbit_decompose`: ``sum_{sigma in S_n / Stab} sigma x_b (x) sigma w_b``."""
    total = fun.zero()
    for b, g, q, twoG, ws in parts:
        n = sum(i * bi for i, bi in enumerate(b))
        key_p = QO.make_key(standard_cycles(b), g)
        raw = FunElement(fun, LinComb._wrap({(n, twoG, key_p, w, q): c for w, c in ws.items()}))
        factor = Fraction(math.factorial(n), stabilizer_order(b))
        total = total + symmetrize(fun, raw).scale(factor)
    return total


def theta(fun: Fun, X: FunElement) -> ModelElement:
    """``sum sigma x_b (x) sigma w_b -> [w_b] kappa^g xi^{b_0} / prod_i i^{b_i} b_i!`` on ``Fun(QO, E_V)``."""
    model = CycModel(_endo_space(fun))
    acc: dict = {}
    for b, g, q, twoG, ws in orbit_decompose(fun, X):
        norm = Fraction(1, stabilizer_order(b))
        blocks = standard_cycles(b)
        for word, c in ws.items():
            words = [tuple(word[l - 1] for l in blk) for blk in blocks if blk]
            key, s = model.product_key(words, b[0], g + q)
            if s:
                accumulate(acc, key, c * s * norm)
    return ModelElement(model, LinComb._wrap(acc))


def in_psi_image(key) -> bool:
    word, q = key
    return 2 * q + len(word) > 2


def in_theta_image(key) -> bool:
    words, xi, q = key
    n = sum(len(w) for w in words)
    return 4 * q + 2 * (xi + len(words)) + n > 4
