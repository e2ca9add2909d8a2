"""The quantum closed and quantum open operads.

Both are concentrated in degree 0 with zero differential, so no Koszul
signs ever arise from their factors.

``QC`` keys are genera ``g``; the generator ``C^g`` lives on
``G = 2g + |C|/2 - 1``.  ``QO`` keys are pairs ``(cycles, g)`` where
``cycles`` is a canonically ordered tuple of cyclic label words (empty
cycles allowed) and ``G = 2g + b - 1`` with ``b`` the number of cycles.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations

from .exact import LinComb, label_key, sorted_labels
from .operad import LegError, ModularOperad


class QCOperad(ModularOperad):
    name = "QC"
    odd = False

    def key_twoG(self, key, legs):
        return 4 * key + len(legs) - 2

    def check_key(self, key, legs):
        if not isinstance(key, int) or key < 0:
            raise ValueError("QC key is a non-negative genus")

    def relabel_key(self, key, legs, mapping):
        return key, 1

    def compose_keys(self, a, b, kx, lx, ky, ly):
        return LinComb._wrap({kx + ky: _ONE})

    def self_compose_key(self, a, b, k, legs):
        return LinComb._wrap({k + 1: _ONE})

    def cs2_keys(self, kx, lx, ky, ly):
        return LinComb._wrap({kx + ky: _ONE})

    def cs1_key(self, k, legs):
        return LinComb._wrap({k + 1: _ONE})

    def cs1_preimage(self, k, legs):
        return k - 1 if k >= 1 else None

    def random_key(self, rng, legs, twoG=None, max_genus=3, **kw):
        if twoG is not None:
            g, r = divmod(twoG - len(legs) + 2, 4)
            return g if r == 0 and g >= 0 else None
        return rng.randint(0, max_genus)

    def basis(self, legs, twoG):
        g, r = divmod(twoG - len(legs) + 2, 4)
        return [g] if r == 0 and g >= 0 else []

    def genus(self, key) -> int:
        return key

    def format_key(self, key, legs):
        return "QC{" + ",".join(str(l) for l in legs) + "}^g=" + str(key)


def canonical_cycle(cycle) -> tuple:
    """Rotate a cyclic word of distinct labels so that its least label comes first."""
    cycle = tuple(cycle)
    if not cycle:
        return ()
    i = min(range(len(cycle)), key=lambda j: label_key(cycle[j]))
    return cycle[i:] + cycle[:i]


def _cycle_sort_key(cycle):
    return (len(cycle), tuple(label_key(l) for l in cycle))


def canonical_cycles(cycles) -> tuple:
    return tuple(sorted((canonical_cycle(c) for c in cycles), key=_cycle_sort_key))


def _rotate_to(cycle: tuple, label) -> tuple:
    i = cycle.index(label)
    return cycle[i:] + cycle[:i]


class QOOperad(ModularOperad):
    name = "QO"
    odd = False

    def key_twoG(self, key, legs):
        cycles, g = key
        return 2 * (2 * g + len(cycles) - 1)

    def check_key(self, key, legs):
        cycles, g = key
        flat = [l for c in cycles for l in c]
        if sorted_labels(flat) != tuple(legs) or len(set(flat)) != len(flat):
            raise ValueError("cycles must partition the leg set")
        if canonical_cycles(cycles) != cycles:
            raise ValueError("cycles are not in canonical form")

    @staticmethod
    def make_key(cycles, g: int):
        return (canonical_cycles(cycles), int(g))

    def _find(self, cycles, label):
        for i, c in enumerate(cycles):
            if label in c:
                return i
        raise LegError(f"leg {label!r} is not on any boundary")

    def relabel_key(self, key, legs, mapping):
        cycles, g = key
        return (canonical_cycles(tuple(mapping[l] for l in c) for c in cycles), g), 1

    def compose_keys(self, a, b, kx, lx, ky, ly):
        (cx, gx), (cy, gy) = kx, ky
        i, j = self._find(cx, a), self._find(cy, b)
        u = _rotate_to(cx[i], a)[1:]
        v = _rotate_to(cy[j], b)[1:]
        rest = [c for t, c in enumerate(cx) if t != i] + [c for t, c in enumerate(cy) if t != j]
        return LinComb._wrap({self.make_key(rest + [u + v], gx + gy): _ONE})

    def self_compose_key(self, a, b, k, legs):
        cycles, g = k
        i, j = self._find(cycles, a), self._find(cycles, b)
        if i == j:
            c = _rotate_to(cycles[i], a)
            p = c.index(b)
            rest = [c2 for t, c2 in enumerate(cycles) if t != i]
            return LinComb._wrap({self.make_key(rest + [c[1:p], c[p + 1:]], g): _ONE})
        u = _rotate_to(cycles[i], a)[1:]
        v = _rotate_to(cycles[j], b)[1:]
        rest = [c2 for t, c2 in enumerate(cycles) if t not in (i, j)]
        return LinComb._wrap({self.make_key(rest + [u + v], g + 1): _ONE})

    def cs2_keys(self, kx, lx, ky, ly):
        return LinComb._wrap({self.make_key(kx[0] + ky[0], kx[1] + ky[1]): _ONE})

    def cs1_key(self, k, legs):
        return LinComb._wrap({(k[0], k[1] + 1): _ONE})

    def cs1_preimage(self, k, legs):
        return (k[0], k[1] - 1) if k[1] >= 1 else None

    def random_key(self, rng, legs, twoG=None, max_genus=2, max_empty=2, **kw):
        legs = list(legs)
        rng.shuffle(legs)
        cycles = []
        while legs:
            size = rng.randint(1, len(legs))
            cycles.append(tuple(legs[:size]))
            legs = legs[size:]
        if twoG is not None:
            # G = 2g + b - 1 fixes the remaining freedom
            need = twoG // 2 + 1 - len(cycles)
            if twoG % 2 or need < 0:
                return None
            g = rng.randint(0, need // 2)
            cycles += [()] * (need - 2 * g)
            return self.make_key(cycles, g)
        cycles += [()] * rng.randint(0, max_empty)
        return self.make_key(cycles, rng.randint(0, max_genus))

    def basis(self, legs, twoG):
        if twoG % 2:
            return []
        total = twoG // 2 + 1  # 2g + b
        out = set()
        for cycles in cycle_partitions(tuple(legs)):
            for g in range(0, total // 2 + 1):
                b0 = total - 2 * g - len(cycles)
                if b0 >= 0:
                    out.add(self.make_key(list(cycles) + [()] * b0, g))
        return sorted(out, key=lambda k: (k[1], [_cycle_sort_key(c) for c in k[0]]))

    def genus(self, key) -> int:
        return key[1]

    def format_key(self, key, legs):
        cycles, g = key
        body = "".join("(" + " ".join(str(l) for l in c) + ")" for c in cycles)
        return "QO{" + body + "}^g=" + str(g)


def cycle_partitions(labels: tuple):
    """All ways to arrange ``labels`` into non-empty cycles (one per permutation)."""
    if not labels:
        yield ()
        return
    first, rest = labels[0], labels[1:]
    n = len(rest)
    for size in range(0, n + 1):
        for mates in combinations(rest, size):
            remaining = tuple(l for l in rest if l not in mates)
            for order in permutations(mates):
                for tail in cycle_partitions(remaining):
                    yield ((first,) + order,) + tail


_ONE = Fraction(1)

QC = QCOperad()
QO = QOOperad()


class FlatteningToy(QCOperad):
    """``QC`` compositions with both connected sums set to zero.

    Still a modular operad (every connected-sum axiom reads ``0 = 0``), but
    ``#1`` is far from injective; it exists to exercise the failure path of
    the flatness requirement.
    """

    name = "QC0"

    def cs2_keys(self, kx, lx, ky, ly):
        return LinComb.zero()

    def cs1_key(self, k, legs):
        return LinComb.zero()

    def cs1_preimage(self, k, legs):
        return None


TOY = FlatteningToy()
