"""Exact scalars, Koszul signs, label bijections and sparse linear combinations.

Everything downstream is built on :class:`LinComb`, a finite map from
hashable canonical keys to nonzero :class:`fractions.Fraction` coefficients.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

Scalar = Fraction


def as_scalar(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating point coefficients are not allowed")
    return Fraction(x)


def label_key(label):
    """Total order on opaque labels: integers first, then strings."""
    if isinstance(label, bool):
        raise TypeError("bool is not a label")
    if isinstance(label, int):
        return (0, label, "")
    if isinstance(label, str):
        return (1, 0, label)
    raise TypeError(f"unsupported label {label!r}")


def sorted_labels(labels: Iterable) -> tuple:
    return tuple(sorted(labels, key=label_key))


# -- signs -------------------------------------------------------------------

def reorder_sign(order: Sequence[int], odd: Sequence[bool]) -> int:
    """Sign of rearranging graded factors.

    ``order[i]`` is the old position of the factor placed at new position
    ``i``; ``odd[p]`` is the parity of the factor at old position ``p``.
    """
    pos = [p for p in order if odd[p]]
    inv = 0
    for i in range(len(pos)):
        pi = pos[i]
        for j in range(i + 1, len(pos)):
            if pi > pos[j]:
                inv += 1
    return -1 if inv & 1 else 1


class Permutation:
    """A bijection of ``{0, ..., n-1}``; ``images[i]`` is where ``i`` goes.

    Acting on a sequence moves the entry at position ``i`` to position
    ``images[i]``.  Composition follows functions: ``(s * r)(i) == s(r(i))``.
    """

    __slots__ = ("images",)

    def __init__(self, images: Iterable[int]):
        images = tuple(images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        self.images = images

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def from_cycle(cls, n: int, cycle: Sequence[int]) -> "Permutation":
        images = list(range(n))
        for i, c in enumerate(cycle):
            images[c] = cycle[(i + 1) % len(cycle)]
        return cls(images)

    def __len__(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if len(self) != len(other):
            raise ValueError("size mismatch")
        return Permutation(self.images[j] for j in other.images)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(inv)

    def act(self, seq: Sequence) -> tuple:
        out = [None] * len(seq)
        for i, x in enumerate(seq):
            out[self.images[i]] = x
        return tuple(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        return f"Permutation({list(self.images)})"


def koszul_sign(perm: Permutation, degrees: Sequence[int]) -> int:
    """Koszul sign of moving graded factors according to ``perm``.

    Every pair of factors whose relative order is reversed contributes
    ``(-1)**(d1*d2)``.
    """
    if len(degrees) != len(perm):
        raise ValueError(
            f"permutation of size {len(perm)} applied to {len(degrees)} degrees")
    inv = perm.inverse().images  # new position -> old position
    return reorder_sign(inv, [d % 2 == 1 for d in degrees])


def bijection(domain: Iterable, codomain: Iterable, mapping: Mapping | None = None) -> dict:
    """Validated label bijection; order preserving when ``mapping`` is None."""
    dom = sorted_labels(domain)
    cod = sorted_labels(codomain)
    if len(dom) != len(cod):
        raise ValueError("domain and codomain differ in size")
    if mapping is None:
        return dict(zip(dom, cod))
    mapping = dict(mapping)
    if set(mapping) != set(dom) or sorted_labels(mapping.values()) != cod:
        raise ValueError("mapping is not a bijection between the given sets")
    return mapping


def compose_bijections(s: Mapping, r: Mapping) -> dict:
    """``s`` after ``r``."""
    return {x: s[y] for x, y in r.items()}


def invert_bijection(s: Mapping) -> dict:
    return {y: x for x, y in s.items()}


def subsets(labels: Sequence, k: int) -> Iterator[tuple]:
    return combinations(labels, k)


# -- linear combinations -----------------------------------------------------

Canon = Callable[[Hashable], "tuple[Hashable | None, int]"]


def accumulate(acc: dict, key, coeff) -> None:
    """In-place ``acc[key] += coeff`` dropping zeros (for builders only)."""
    c = acc.get(key)
    if c is None:
        if coeff:
            acc[key] = coeff
    else:
        c = c + coeff
        if c:
            acc[key] = c
        else:
            del acc[key]


class LinComb(Mapping):
    """Immutable finite linear combination with exact coefficients.

    Zero coefficients are never stored, so equality of elements is equality
    of the underlying maps.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | Iterable = (), canon: Canon | None = None):
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, coeff in items:
            coeff = as_scalar(coeff)
            if not coeff:
                continue
            if canon is not None:
                key, sign = canon(key)
                if key is None or not sign:
                    continue
                coeff = coeff * sign
            accumulate(acc, key, coeff)
        self._terms = acc
        self._hash = None

    @classmethod
    def _wrap(cls, acc: dict) -> "LinComb":
        # caller guarantees: Fraction values, nonzero, canonical keys
        obj = cls.__new__(cls)
        obj._terms = acc
        obj._hash = None
        return obj

    @classmethod
    def single(cls, key, coeff=1) -> "LinComb":
        return cls({key: coeff})

    @classmethod
    def zero(cls) -> "LinComb":
        return cls._wrap({})

    # Mapping protocol
    def __getitem__(self, key):
        return self._terms[key]

    def __iter__(self):
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coeff(self, key) -> Fraction:
        return self._terms.get(key, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, LinComb):
            return self._terms == other._terms
        if isinstance(other, int) and other == 0:
            return not self._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __add__(self, other: "LinComb") -> "LinComb":
        if not isinstance(other, LinComb):
            return NotImplemented
        acc = dict(self._terms)
        for k, c in other._terms.items():
            accumulate(acc, k, c)
        return LinComb._wrap(acc)

    def __sub__(self, other: "LinComb") -> "LinComb":
        if not isinstance(other, LinComb):
            return NotImplemented
        acc = dict(self._terms)
        for k, c in other._terms.items():
            accumulate(acc, k, -c)
        return LinComb._wrap(acc)

    def __neg__(self) -> "LinComb":
        return LinComb._wrap({k: -c for k, c in self._terms.items()})

    def scale(self, s) -> "LinComb":
        s = as_scalar(s)
        if not s:
            return LinComb.zero()
        return LinComb._wrap({k: c * s for k, c in self._terms.items()})

    def __mul__(self, s) -> "LinComb":
        if isinstance(s, (int, Fraction)):
            return self.scale(s)
        return NotImplemented

    __rmul__ = __mul__

    def map_keys(self, fn: Canon) -> "LinComb":
        """Apply a key map that may emit a sign (or kill the term)."""
        return LinComb(((k, c) for k, c in self._terms.items()), canon=fn)

    def rekey(self, fn: Callable[[Hashable], Hashable]) -> "LinComb":
        """Apply an injective, sign-free key map."""
        return LinComb._wrap({fn(k): c for k, c in self._terms.items()})

    def filter(self, pred: Callable[[Hashable], bool]) -> "LinComb":
        return LinComb._wrap({k: c for k, c in self._terms.items() if pred(k)})

    def sorted_items(self, key=None) -> list:
        return sorted(self._terms.items(), key=(lambda kc: key(kc[0])) if key else (lambda kc: repr(kc[0])))

    def __repr__(self) -> str:
        if not self._terms:
            return "LinComb(0)"
        body = " + ".join(f"{c}*{k!r}" for k, c in self.sorted_items())
        return f"LinComb({body})"


def lincomb_add(x: LinComb, y: LinComb) -> LinComb:
    return x + y


def lincomb_scale(x: LinComb, s) -> LinComb:
    return x.scale(s)


def lincomb_tensor(x: LinComb, y: LinComb, canon: Canon | None = None) -> LinComb:
    """Bilinear tensor product; keys are pairs, optionally canonicalized."""
    acc: dict = {}
    for kx, cx in x.items():
        for ky, cy in y.items():
            key, coeff = (kx, ky), cx * cy
            if canon is not None:
                key, sign = canon(key)
                if key is None or not sign:
                    continue
                coeff = coeff * sign
            accumulate(acc, key, coeff)
    return LinComb._wrap(acc)


def graded_sort(seq: Sequence, odd: Callable[[object], bool], key=None) -> tuple[tuple, int]:
    """Sort graded factors, returning the sorted tuple and its Koszul sign.

    Returns sign 0 when an odd factor repeats (graded-commutative algebras).
    """
    idx = sorted(range(len(seq)), key=(lambda i: key(seq[i])) if key else (lambda i: seq[i]))
    out = tuple(seq[i] for i in idx)
    flags = [odd(x) for x in seq]
    for a, b in zip(out, out[1:]):
        if a == b and odd(a):
            return out, 0
    return out, reorder_sign(idx, flags)
