"""Finite dg odd symplectic vector spaces ``(V, d, omega)``.

Basis vectors are indexed ``0..dim-1``; the dual basis covector ``phi^k``
has degree ``-deg(e_k)``.  The differential is stored as a matrix ``D`` with
``d(e_k) = sum_j D[j][k] e_j``.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from . import linalg
from .exact import as_scalar


class SpaceValidationError(ValueError):
    """Base class for invalid space descriptions."""


class OmegaDegreeError(SpaceValidationError):
    pass


class OmegaAntisymmetryError(SpaceValidationError):
    pass


class SingularBlockError(SpaceValidationError):
    pass


class DifferentialDegreeError(SpaceValidationError):
    pass


class DifferentialSquareError(SpaceValidationError):
    pass


class DifferentialOmegaError(SpaceValidationError):
    pass


def _zeros(n: int) -> list[list[Fraction]]:
    return [[Fraction(0)] * n for _ in range(n)]


def _matmul(a, b):
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    return [[sum((a[i][k] * b[k][j] for k in range(m)), Fraction(0)) for j in range(p)] for i in range(n)]


def _transpose(a):
    return [list(r) for r in zip(*a)]


class DgSymplecticSpace:
    """A validated dg odd symplectic vector space."""

    def __init__(self, degrees: Sequence[int], omega, diff=None, labels: Sequence | None = None):
        self.degrees = tuple(int(d) for d in degrees)
        n = len(self.degrees)
        self.labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        if len(self.labels) != n or len(set(self.labels)) != n:
            raise SpaceValidationError("labels must be distinct, one per basis vector")
        self.omega = tuple(tuple(as_scalar(x) for x in row) for row in omega)
        self.diff = tuple(tuple(as_scalar(x) for x in row) for row in diff) if diff is not None \
            else tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))
        if len(self.omega) != n or any(len(r) != n for r in self.omega):
            raise SpaceValidationError("omega must be a dim x dim matrix")
        if len(self.diff) != n or any(len(r) != n for r in self.diff):
            raise SpaceValidationError("diff must be a dim x dim matrix")
        self._validate()

    # -- basic data ------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def degree(self, k: int) -> int:
        return self.degrees[k]

    def cov_degree(self, k: int) -> int:
        return -self.degrees[k]

    def index(self, label) -> int:
        return self.labels.index(label)

    def _validate(self) -> None:
        n, deg, w, d = self.dim, self.degrees, self.omega, self.diff
        for k in range(n):
            for l in range(n):
                if w[k][l] and deg[k] + deg[l] != 1:
                    raise OmegaDegreeError(f"omega[{k}][{l}] pairs degrees {deg[k]} and {deg[l]}")
                if w[k][l] != -w[l][k]:
                    raise OmegaAntisymmetryError(f"omega[{k}][{l}] != -omega[{l}][{k}]")
        for j in sorted(set(deg)):
            rows = [k for k in range(n) if deg[k] == j]
            cols = [l for l in range(n) if deg[l] == 1 - j]
            if len(rows) != len(cols):
                raise SingularBlockError(f"degree {j} and {1 - j} blocks differ in size")
            block = [[w[k][l] for l in cols] for k in rows]
            if linalg.rank_matrix(block) < len(rows):
                raise SingularBlockError(f"omega block pairing degrees {j} and {1 - j} is singular")
        for j in range(n):
            for k in range(n):
                if d[j][k] and deg[j] != deg[k] + 1:
                    raise DifferentialDegreeError(f"d(e_{k}) has a component on e_{j} of wrong degree")
        if any(any(x for x in row) for row in _matmul(d, d)):
            raise DifferentialSquareError("d^2 != 0")
        # omega(du, v) + (-1)^{|u|} omega(u, dv) == 0
        for u in range(n):
            for v in range(n):
                val = sum((d[j][u] * w[j][v] for j in range(n)), Fraction(0))
                val += (-1) ** (deg[u] % 2) * sum((d[j][v] * w[u][j] for j in range(n)), Fraction(0))
                if val:
                    raise DifferentialOmegaError(f"d(omega) != 0 on (e_{u}, e_{v})")

    # -- derived data ----------------------------------------------------

    @cached_property
    def omega_inv(self) -> tuple[tuple[Fraction, ...], ...]:
        """``w^{kl}`` with ``sum_l w^{kl} w_{lm} = delta^k_m``, inverted block by block."""
        n, deg, w = self.dim, self.degrees, self.omega
        inv = _zeros(n)
        for j in sorted(set(deg)):
            ks = [k for k in range(n) if deg[k] == j]
            ls = [l for l in range(n) if deg[l] == 1 - j]
            block = [[w[l][m] for m in ks] for l in ls]
            b_inv = linalg.inverse(block)
            for a, k in enumerate(ks):
                for b, l in enumerate(ls):
                    inv[k][l] = b_inv[a][b]
        return tuple(tuple(r) for r in inv)

    @cached_property
    def raised(self) -> tuple[dict, ...]:
        """``e^k = sum_l (-1)^{|e_l|} w^{kl} e_l`` as sparse ``{l: coeff}`` maps."""
        out = []
        for k in range(self.dim):
            vec = {}
            for l in range(self.dim):
                c = self.omega_inv[k][l]
                if c:
                    vec[l] = -c if self.degrees[l] % 2 else c
            out.append(vec)
        return tuple(out)

    def raised_degree(self, k: int) -> int:
        return 1 - self.degrees[k]

    @cached_property
    def dual_diff_table(self) -> tuple[dict, ...]:
        """``d(phi^k) = sum_l (-1)^{|phi^k|+1} D[k][l] phi^l``."""
        out = []
        for k in range(self.dim):
            sign = -1 if (self.cov_degree(k) + 1) % 2 else 1
            out.append({l: sign * self.diff[k][l] for l in range(self.dim) if self.diff[k][l]})
        return tuple(out)

    @cached_property
    def pullback_table(self) -> tuple[dict, ...]:
        """``phi^k o d_V = sum_l D[k][l] phi^l``."""
        return tuple({l: self.diff[k][l] for l in range(self.dim) if self.diff[k][l]}
                     for k in range(self.dim))

    @property
    def has_differential(self) -> bool:
        return any(any(r) for r in self.diff)

    def canonical_tensor(self) -> dict:
        """``sum_k e_k (x) e^k`` as ``{(k, l): coeff}``."""
        out = {}
        for k in range(self.dim):
            for l, c in self.raised[k].items():
                out[(k, l)] = out.get((k, l), 0) + c
        return {kl: c for kl, c in out.items() if c}

    def dual_pairing(self, k: int, vec: dict) -> Fraction:
        return Fraction(vec.get(k, 0))

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        n = self.dim
        return {
            "schema": "dg-symplectic-space/1",
            "basis": [{"label": self.labels[k], "degree": self.degrees[k]} for k in range(n)],
            "omega": [[self.labels[k], self.labels[l], str(self.omega[k][l])]
                      for k in range(n) for l in range(n) if self.omega[k][l]],
            "diff": [[self.labels[k], self.labels[j], str(self.diff[j][k])]
                     for k in range(n) for j in range(n) if self.diff[j][k]],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DgSymplecticSpace":
        basis = data["basis"]
        labels = [str(b["label"]) for b in basis]
        degrees = [int(b["degree"]) for b in basis]
        n = len(labels)
        idx = {lab: i for i, lab in enumerate(labels)}
        omega = _zeros(n)
        given = set()
        for a, b, v in data.get("omega", []):
            i, j = idx[str(a)], idx[str(b)]
            omega[i][j] = Fraction(v)
            given.add((i, j))
        for i, j in list(given):
            if (j, i) not in given:
                omega[j][i] = -omega[i][j]
        diff = _zeros(n)
        for src, dst, v in data.get("diff", []):
            diff[idx[str(dst)]][idx[str(src)]] = Fraction(v)
        return cls(degrees, omega, diff, labels)

    @classmethod
    def load(cls, path) -> "DgSymplecticSpace":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def __eq__(self, other) -> bool:
        return isinstance(other, DgSymplecticSpace) and self.to_json() == other.to_json()

    def __hash__(self) -> int:
        return hash(self.dumps())

    def __repr__(self) -> str:
        return f"DgSymplecticSpace(degrees={list(self.degrees)})"


def standard_space() -> DgSymplecticSpace:
    """Two-dimensional space: ``|e_a| = 0``, ``|e_b| = 1``, ``omega(e_a, e_b) = 1``."""
    return DgSymplecticSpace([0, 1], [[0, 1], [-1, 0]], labels=["a", "b"])


def qme_space() -> DgSymplecticSpace:
    """Four-dimensional space with degrees (0, 1, -1, 2) and zero differential."""
    w = _zeros(4)
    w[0][1], w[1][0] = Fraction(1), Fraction(-1)
    w[2][3], w[3][2] = Fraction(1), Fraction(-1)
    return DgSymplecticSpace([0, 1, -1, 2], w, labels=["x", "y", "u", "v"])


def _random_invertible(rng: random.Random, m: int) -> list[list[Fraction]]:
    lower = [[Fraction(int(i == j) if i <= j else rng.randint(-2, 2)) for j in range(m)] for i in range(m)]
    upper = [[Fraction(rng.choice([1, -1, 2]) if i == j else (rng.randint(-1, 1) if i < j else 0))
              for j in range(m)] for i in range(m)]
    return _matmul(lower, upper)


def random_space(rng: random.Random, max_dim: int = 6, window: tuple[int, int] = (-2, 3),
                 with_diff: bool | None = None) -> DgSymplecticSpace:
    """Random valid space: standard pairs, a degree-0 change of basis, optional ``d``."""
    lo, hi = window
    ks = [k for k in range(lo, hi + 1) if lo <= 1 - k <= hi]
    npairs = rng.randint(1, max(1, max_dim // 2))
    degrees: list[int] = []
    for _ in range(npairs):
        k = rng.choice(ks)
        degrees += [k, 1 - k]
    n = len(degrees)
    w = _zeros(n)
    for p in range(npairs):
        w[2 * p][2 * p + 1] = Fraction(1)
        w[2 * p + 1][2 * p] = Fraction(-1)
    d = _zeros(n)
    if with_diff is None:
        with_diff = rng.random() < 0.5
    if with_diff:
        # d(u) = c v and d(v*) = c' u* for pairs (u, u*), (v, v*) with |v| = |u| + 1
        cands = []
        for p in range(npairs):
            for q in range(npairs):
                if p == q:
                    continue
                for u in (2 * p, 2 * p + 1):
                    for v in (2 * q, 2 * q + 1):
                        if degrees[v] == degrees[u] + 1:
                            cands.append((u, u ^ 1, v, v ^ 1))
        if cands:
            u, us, v, vs = rng.choice(cands)
            c = Fraction(rng.choice([1, -1, 2, Fraction(1, 2)]))
            cp = -(-1) ** (degrees[u] % 2) * c * w[v][vs] / w[u][us]
            d[v][u] = c
            d[us][vs] = cp
    # degree-0 change of basis, block by degree
    a = _zeros(n)
    for deg in sorted(set(degrees)):
        idx = [i for i in range(n) if degrees[i] == deg]
        blk = _random_invertible(rng, len(idx))
        for r, i in enumerate(idx):
            for s, j in enumerate(idx):
                a[i][j] = blk[r][s]
    a_inv = linalg.inverse(a)
    w2 = _matmul(_matmul(_transpose(a), w), a)
    d2 = _matmul(_matmul(a_inv, d), a)
    return DgSymplecticSpace(degrees, w2, d2, labels=[f"e{i}" for i in range(n)])
