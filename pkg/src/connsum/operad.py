"""Stable corollas, the modular-operad interface with connected sum, and elements.

A concrete operad works on *keys*: hashable canonical basis elements of a
component ``P(C, G)``.  The leg set ``C`` travels next to the key (sorted by
:func:`label_key`), and ``G`` is stored doubled as ``twoG``.  The functions in
this module lift the key-level maps to linear combinations and check the
corolla bookkeeping on every call.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Hashable, Iterable, Mapping

from .exact import LinComb, accumulate, bijection, sorted_labels


class LegError(ValueError):
    """Leg sets violate the preconditions of an operation."""


class CorollaError(ValueError):
    """An operation landed on a corolla other than the one its signature requires."""


def is_stable(n_legs: int, twoG: int) -> bool:
    """Stability ``2(G - 1) + |C| > 0``."""
    return twoG - 2 + n_legs > 0


class Corolla:
    __slots__ = ("legs", "twoG")

    def __init__(self, legs: Iterable, twoG: int):
        self.legs = sorted_labels(set(legs))
        if twoG < 0:
            raise CorollaError("G must be non-negative")
        self.twoG = int(twoG)

    @property
    def stable(self) -> bool:
        return is_stable(len(self.legs), self.twoG)

    def __eq__(self, other) -> bool:
        return isinstance(other, Corolla) and (self.legs, self.twoG) == (other.legs, other.twoG)

    def __hash__(self) -> int:
        return hash((self.legs, self.twoG))

    def __repr__(self) -> str:
        return f"Corolla({list(self.legs)}, G={Fraction(self.twoG, 2)})"


class ModularOperad:
    """Key-level interface of a modular operad with connected sum.

    ``odd`` selects the twisted variant whose compositions have degree 1.
    Methods returning several keys return a :class:`LinComb`; relabelling
    returns a ``(key, sign)`` pair.
    """

    name = "operad"
    odd = False

    # basic data
    def degree(self, key) -> int:
        return 0

    def key_twoG(self, key, legs: tuple) -> int | None:
        """The ``2G`` a key forces on its corolla, or ``None`` if any ``G`` works."""
        return None

    def check_key(self, key, legs: tuple) -> None:
        pass

    # structure maps
    def relabel_key(self, key, legs: tuple, mapping: Mapping) -> tuple[Hashable, int]:
        raise NotImplementedError

    def compose_keys(self, a, b, kx, lx: tuple, ky, ly: tuple) -> LinComb:
        raise NotImplementedError

    def self_compose_key(self, a, b, k, legs: tuple) -> LinComb:
        raise NotImplementedError

    def cs2_keys(self, kx, lx: tuple, ky, ly: tuple) -> LinComb:
        raise NotImplementedError

    def cs1_key(self, k, legs: tuple) -> LinComb:
        raise NotImplementedError

    def cs1_preimage(self, k, legs: tuple):
        """A key ``k0`` with ``#1 k0 == k`` (coefficient 1), or ``None``."""
        return None

    def differential_key(self, k, legs: tuple) -> LinComb:
        return LinComb.zero()

    # sampling and enumeration
    def random_key(self, rng: random.Random, legs: tuple, **kw):
        raise NotImplementedError

    def basis(self, legs: tuple, twoG: int) -> list:
        raise NotImplementedError

    def format_key(self, key, legs: tuple) -> str:
        return repr(key)

    def __repr__(self) -> str:
        return self.name


class OperadElement:
    """A linear combination of basis keys of ``P(C, G)``."""

    __slots__ = ("op", "legs", "twoG", "terms")

    def __init__(self, op: ModularOperad, legs: Iterable, twoG: int, terms: LinComb | Mapping):
        self.op = op
        self.legs = sorted_labels(legs)
        if len(set(self.legs)) != len(self.legs):
            raise LegError("repeated leg label")
        self.twoG = int(twoG)
        if self.twoG < 0:
            raise CorollaError("G must be non-negative")
        self.terms = terms if isinstance(terms, LinComb) else LinComb(terms)
        for k in self.terms:
            tg = op.key_twoG(k, self.legs)
            if tg is not None and tg != self.twoG:
                raise CorollaError(f"{op.format_key(k, self.legs)} does not live on G={Fraction(self.twoG, 2)}")

    @classmethod
    def single(cls, op, legs, key, coeff=1, twoG=None) -> "OperadElement":
        legs = sorted_labels(legs)
        if twoG is None:
            twoG = op.key_twoG(key, legs)
            if twoG is None:
                raise CorollaError("G must be given explicitly for this operad")
        return cls(op, legs, twoG, LinComb.single(key, coeff))

    @property
    def corolla(self) -> Corolla:
        return Corolla(self.legs, self.twoG)

    @property
    def stable(self) -> bool:
        return is_stable(len(self.legs), self.twoG)

    def degrees(self) -> set:
        return {self.op.degree(k) for k in self.terms}

    @property
    def degree(self) -> int:
        """Degree of a homogeneous element (0 for the zero element)."""
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError("element is not homogeneous")
        return ds.pop() if ds else 0

    def is_zero(self) -> bool:
        return self.terms.is_zero()

    def _same(self, other: "OperadElement") -> None:
        if self.op is not other.op or self.legs != other.legs or self.twoG != other.twoG:
            raise CorollaError("elements live on different corollas")

    def __add__(self, other: "OperadElement") -> "OperadElement":
        self._same(other)
        return OperadElement(self.op, self.legs, self.twoG, self.terms + other.terms)

    def __sub__(self, other: "OperadElement") -> "OperadElement":
        self._same(other)
        return OperadElement(self.op, self.legs, self.twoG, self.terms - other.terms)

    def __neg__(self) -> "OperadElement":
        return OperadElement(self.op, self.legs, self.twoG, -self.terms)

    def scale(self, s) -> "OperadElement":
        return OperadElement(self.op, self.legs, self.twoG, self.terms.scale(s))

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperadElement):
            return NotImplemented
        return (self.op is other.op and self.legs == other.legs and self.twoG == other.twoG
                and self.terms == other.terms)

    def __hash__(self) -> int:
        return hash((self.legs, self.twoG, self.terms))

    def __repr__(self) -> str:
        if self.terms.is_zero():
            body = "0"
        else:
            body = " + ".join(f"{c}*{self.op.format_key(k, self.legs)}"
                              for k, c in self.terms.sorted_items())
        return f"<{self.op.name} on {list(self.legs)}, G={Fraction(self.twoG, 2)}: {body}>"


# -- element-level operations -----------------------------------------------

def _expect(op: ModularOperad, x: OperadElement) -> None:
    if x.op is not op:
        raise TypeError(f"element of {x.op} passed to {op}")


def _check_output(op: ModularOperad, out: LinComb, legs: tuple, twoG: int, shift_deg: int | None,
                  in_degs: int | None) -> None:
    for k in out:
        tg = op.key_twoG(k, legs)
        if tg is not None and tg != twoG:
            raise CorollaError(f"operation produced {op.format_key(k, legs)} off G={Fraction(twoG, 2)}")
        if in_degs is not None and op.degree(k) != in_degs + shift_deg:
            raise CorollaError("operation produced a term of the wrong degree")


def relabel(op: ModularOperad, mapping: Mapping, x: OperadElement) -> OperadElement:
    """Action of a bijection ``legs(x) -> D``; ``G`` is unchanged."""
    _expect(op, x)
    mapping = dict(mapping)
    if set(mapping) != set(x.legs):
        raise LegError("bijection domain differs from the leg set")
    if len(set(mapping.values())) != len(mapping):
        raise LegError("mapping is not injective")
    new_legs = sorted_labels(mapping.values())
    acc: dict = {}
    for k, c in x.terms.items():
        nk, s = op.relabel_key(k, x.legs, mapping)
        if s:
            accumulate(acc, nk, c * s)
    return OperadElement(op, new_legs, x.twoG, LinComb._wrap(acc))


def compose(op: ModularOperad, a, b, x: OperadElement, y: OperadElement) -> OperadElement:
    """``x o_{a,b} y`` on ``(C1 + C2, G1 + G2)``."""
    _expect(op, x)
    _expect(op, y)
    if a not in x.legs or a in y.legs:
        raise LegError(f"leg {a!r} must belong to the first argument only")
    if b not in y.legs or b in x.legs:
        raise LegError(f"leg {b!r} must belong to the second argument only")
    rest_x = [l for l in x.legs if l != a]
    rest_y = [l for l in y.legs if l != b]
    if set(rest_x) & set(rest_y):
        raise LegError("leg sets overlap")
    legs = sorted_labels(rest_x + rest_y)
    twoG = x.twoG + y.twoG
    acc: dict = {}
    for kx, cx in x.terms.items():
        for ky, cy in y.terms.items():
            part = op.compose_keys(a, b, kx, x.legs, ky, y.legs)
            _check_output(op, part, legs, twoG, int(op.odd), op.degree(kx) + op.degree(ky))
            for k, c in part.items():
                accumulate(acc, k, c * cx * cy)
    return OperadElement(op, legs, twoG, LinComb._wrap(acc))


def self_compose(op: ModularOperad, a, b, x: OperadElement) -> OperadElement:
    """``o_{ab} x`` on ``(C, G + 1)``."""
    _expect(op, x)
    if a == b or a not in x.legs or b not in x.legs:
        raise LegError("self-composition needs two distinct legs of the argument")
    legs = tuple(l for l in x.legs if l not in (a, b))
    twoG = x.twoG + 2
    acc: dict = {}
    for k, c in x.terms.items():
        part = op.self_compose_key(a, b, k, x.legs)
        _check_output(op, part, legs, twoG, int(op.odd), op.degree(k))
        for k2, c2 in part.items():
            accumulate(acc, k2, c * c2)
    return OperadElement(op, legs, twoG, LinComb._wrap(acc))


def cs2(op: ModularOperad, x: OperadElement, y: OperadElement) -> OperadElement:
    """Binary connected sum on ``(C + C', G + G' + 1)``."""
    _expect(op, x)
    _expect(op, y)
    if set(x.legs) & set(y.legs):
        raise LegError("connected sum needs disjoint leg sets")
    legs = sorted_labels(x.legs + y.legs)
    twoG = x.twoG + y.twoG + 2
    acc: dict = {}
    for kx, cx in x.terms.items():
        for ky, cy in y.terms.items():
            part = op.cs2_keys(kx, x.legs, ky, y.legs)
            _check_output(op, part, legs, twoG, 0, op.degree(kx) + op.degree(ky))
            for k, c in part.items():
                accumulate(acc, k, c * cx * cy)
    return OperadElement(op, legs, twoG, LinComb._wrap(acc))


def cs1(op: ModularOperad, x: OperadElement) -> OperadElement:
    """Unary connected sum on ``(C, G + 2)``."""
    _expect(op, x)
    twoG = x.twoG + 4
    acc: dict = {}
    for k, c in x.terms.items():
        part = op.cs1_key(k, x.legs)
        _check_output(op, part, x.legs, twoG, 0, op.degree(k))
        for k2, c2 in part.items():
            accumulate(acc, k2, c * c2)
    return OperadElement(op, x.legs, twoG, LinComb._wrap(acc))


def differential(op: ModularOperad, x: OperadElement) -> OperadElement:
    _expect(op, x)
    acc: dict = {}
    for k, c in x.terms.items():
        for k2, c2 in op.differential_key(k, x.legs).items():
            accumulate(acc, k2, c * c2)
    return OperadElement(op, x.legs, x.twoG, LinComb._wrap(acc))


def random_element(op: ModularOperad, rng: random.Random, legs: Iterable, twoG: int | None = None,
                   terms: int = 2, **kw) -> OperadElement:
    """A random homogeneous element on ``legs``.

    For operads whose keys fix ``G`` the first sampled key decides it and
    further keys are drawn from the same corolla and degree.
    """
    legs = sorted_labels(legs)
    k0 = op.random_key(rng, legs, twoG=twoG, **kw)
    tg = op.key_twoG(k0, legs)
    if tg is None:
        tg = twoG if twoG is not None else rng.randint(0, 4)
    deg = op.degree(k0)
    acc: dict = {}
    accumulate(acc, k0, Fraction(rng.choice([1, -1, 2, -3, Fraction(1, 2)])))
    for _ in range(4 * terms):
        if len(acc) >= terms:
            break
        k = op.random_key(rng, legs, twoG=tg, degree=deg, **kw)
        if k is None or op.degree(k) != deg:
            continue
        ktg = op.key_twoG(k, legs)
        if ktg is not None and ktg != tg:
            continue
        accumulate(acc, k, Fraction(rng.randint(-3, 3)))
    return OperadElement(op, legs, tg, LinComb._wrap(acc))


def order_preserving(domain: Iterable, codomain: Iterable) -> dict:
    return bijection(domain, codomain)
