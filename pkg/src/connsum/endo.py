"""The odd endomorphism operad ``E_V`` of a dg odd symplectic space.

A key is a tuple of dual-basis indices ``(i_1, ..., i_n)`` read against the
sorted order of the leg set: it stands for ``phi^{i_1} (x) ... (x) phi^{i_n}``
with the ``j``-th factor sitting on the ``j``-th smallest leg.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from .exact import LinComb, accumulate, graded_sort, label_key, reorder_sign
from .operad import LegError, ModularOperad
from .space import DgSymplecticSpace


def _prefix_parity(space: DgSymplecticSpace, word, upto: int) -> int:
    return sum(space.degrees[i] for i in word[:upto]) & 1


def sort_by_legs(space: DgSymplecticSpace, word, legs) -> tuple[tuple, tuple, int]:
    """Reorder ``word`` (aligned with ``legs``) into sorted leg order with its Koszul sign."""
    order = sorted(range(len(legs)), key=lambda i: label_key(legs[i]))
    odd = [space.degrees[i] & 1 for i in word]
    sign = reorder_sign(order, odd)
    return tuple(word[i] for i in order), tuple(legs[i] for i in order), sign


class EndoOperad(ModularOperad):
    """``E_V(C, G) = (x)_C V*``; every ``G`` carries the same component."""

    odd = True

    def __init__(self, space: DgSymplecticSpace):
        self.space = space
        self.name = "E_V"

    def __eq__(self, other) -> bool:
        return isinstance(other, EndoOperad) and self.space == other.space

    def __hash__(self) -> int:
        return hash(("E_V", self.space))

    # covectors have degree -|e_i|
    def degree(self, key) -> int:
        return -sum(self.space.degrees[i] for i in key)

    def check_key(self, key, legs):
        if len(key) != len(legs) or any(not 0 <= i < self.space.dim for i in key):
            raise ValueError("E_V key must assign one covector index to each leg")

    # positional derivative on a single word --------------------------------

    def derivative(self, c, vec: dict, word: tuple, legs: tuple) -> LinComb:
        """``d^{(c)}_v`` of a pure tensor; ``vec`` maps basis indices to coefficients.

        The slot of ``c`` is moved to the front (Koszul sign), then ``v`` is
        evaluated as ``alpha -> (-1)^{|v||alpha|} alpha(v)``.
        """
        if c not in legs:
            raise LegError(f"leg {c!r} is missing")
        p = legs.index(c)
        idx = word[p]
        coeff = vec.get(idx)
        if not coeff:
            return LinComb.zero()
        deg = self.space.degrees
        sign = -1 if (deg[idx] & 1) and _prefix_parity(self.space, word, p) else 1
        if deg[idx] & 1:  # |v||phi^idx| = |e_idx|^2
            sign = -sign
        return LinComb._wrap({word[:p] + word[p + 1:]: Fraction(coeff) * sign})

    def _deriv_coeff(self, p: int, word: tuple) -> int:
        """Sign of evaluating ``e_{word[p]}`` at slot ``p`` (coefficient one)."""
        deg = self.space.degrees
        idx = word[p]
        if not deg[idx] & 1:
            return 1
        return 1 if _prefix_parity(self.space, word, p) else -1

    # structure maps ----------------------------------------------------

    def relabel_key(self, key, legs, mapping):
        new_legs = [mapping[l] for l in legs]
        word, _, sign = sort_by_legs(self.space, key, new_legs)
        return word, sign

    def compose_keys(self, a, b, kx, lx, ky, ly):
        """``f o_{a,b} g = sum_k (-1)^{|f||e^k|} (d^{(a)}_{e_k} f) (x) (d^{(b)}_{e^k} g)``."""
        sp = self.space
        pa, pb = lx.index(a), ly.index(b)
        k, l = kx[pa], ky[pb]
        r = sp.raised[k].get(l)
        if not r:
            return LinComb.zero()
        coeff = r * self._deriv_coeff(pa, kx) * self._deriv_coeff(pb, ky)
        if (self.degree(kx) & 1) and (sp.raised_degree(k) & 1):
            coeff = -coeff
        word = kx[:pa] + kx[pa + 1:] + ky[:pb] + ky[pb + 1:]
        legs = lx[:pa] + lx[pa + 1:] + ly[:pb] + ly[pb + 1:]
        word, _, sign = sort_by_legs(sp, word, legs)
        return LinComb._wrap({word: coeff * sign})

    def self_compose_key(self, a, b, k, legs):
        """``o_{ab} f = sum_k d^{(a)}_{e_k} d^{(b)}_{e^k} f``."""
        sp = self.space
        pa, pb = legs.index(a), legs.index(b)
        ka, kb = k[pa], k[pb]
        r = sp.raised[ka].get(kb)
        if not r:
            return LinComb.zero()
        s1 = self._deriv_coeff(pb, k)
        w1 = k[:pb] + k[pb + 1:]
        pa1 = pa if pa < pb else pa - 1
        s2 = self._deriv_coeff(pa1, w1)
        return LinComb._wrap({w1[:pa1] + w1[pa1 + 1:]: r * s1 * s2})

    def cs2_keys(self, kx, lx, ky, ly):
        word, _, sign = sort_by_legs(self.space, kx + ky, lx + ly)
        return LinComb._wrap({word: Fraction(sign)})

    def cs1_key(self, k, legs):
        return LinComb._wrap({k: Fraction(1)})

    def cs1_preimage(self, k, legs):
        return k

    def differential_key(self, k, legs):
        """Koszul derivation of ``d(phi^i) = (-1)^{|phi^i|+1} sum_l D[i][l] phi^l``."""
        sp = self.space
        acc: dict = {}
        par = 0
        for p, i in enumerate(k):
            for l, c in sp.dual_diff_table[i].items():
                accumulate(acc, k[:p] + (l,) + k[p + 1:], -c if par else c)
            par ^= sp.degrees[i] & 1
        return LinComb._wrap(acc)

    # sampling ----------------------------------------------------------

    def random_key(self, rng, legs, degree=None, tries=20, **kw):
        n, dim = len(legs), self.space.dim
        for _ in range(tries if degree is not None else 1):
            w = tuple(rng.randrange(dim) for _ in range(n))
            if degree is None or self.degree(w) == degree:
                return w
        return None

    def basis(self, legs, twoG):
        return list(product(range(self.space.dim), repeat=len(legs)))

    def format_key(self, key, legs):
        lab = self.space.labels
        return "T{" + ", ".join(f"{l}:phi^{lab[i]}" for l, i in zip(legs, key)) + "}"


def positional_derivative(op: EndoOperad, c, v: dict, f):
    """Element-level ``d^{(c)}_v`` on an :class:`OperadElement` of ``E_V``."""
    from .operad import OperadElement
    if c not in f.legs:
        raise LegError(f"leg {c!r} is missing")
    legs = tuple(l for l in f.legs if l != c)
    acc: dict = {}
    for k, coeff in f.terms.items():
        for k2, c2 in op.derivative(c, v, k, f.legs).items():
            accumulate(acc, k2, coeff * c2)
    return OperadElement(op, legs, f.twoG, LinComb._wrap(acc))


def symmetric_word(space: DgSymplecticSpace, word) -> tuple[tuple, int]:
    """Graded-commutative normal form of a word of covectors."""
    return graded_sort(tuple(word), lambda i: bool(space.degrees[i] & 1))
