"""Seeded and exhaustive checking of the modular-operad and connected-sum axioms.

Each axiom is a function returning ``(lhs, rhs, repro)`` for concrete inputs;
``repro()`` renders an expression that evaluates to ``lhs - rhs``.  Reports are
plain dictionaries that serialize deterministically.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable

from .operad import (CorollaError, ModularOperad, OperadElement, compose, cs1, cs2, is_stable, random_element,
                     relabel, self_compose)

REPORT_SCHEMA = "fuzz-report/1"


def _sgn(cond: bool) -> int:
    return -1 if cond else 1


def _odd(op: ModularOperad) -> bool:
    return bool(op.odd)


def _fmt(x: OperadElement) -> str:
    from .expr import format_element
    return "(" + format_element(x) + ")"


def _fmt_map(m: dict) -> str:
    return "{" + ", ".join(f"{k}->{v}" for k, v in m.items()) + "}"


def _signed(s: int, expr: str) -> str:
    return expr if s == 1 else f"(-1)*{expr}"


@dataclass(frozen=True)
class Axiom:
    name: str
    arity: int
    # number of distinguished legs each input needs: tuple per input
    marks: tuple
    fn: Callable


# Each function receives (op, xs, marks) where marks[i] lists the labels of
# the distinguished legs of input i, and a relabelling map when needed.

def _mo1(op, xs, mk, maps):
    x, y = xs
    (a,), (b,) = mk
    rho, sig = maps
    lhs_inner = compose(op, a, b, x, y)
    restricted = {l: rho[l] for l in x.legs if l != a}
    restricted.update({l: sig[l] for l in y.legs if l != b})
    lhs = relabel(op, restricted, lhs_inner)
    rhs = compose(op, rho[a], sig[b], relabel(op, rho, x), relabel(op, sig, y))
    expr = lambda: (f"relabel(compose({a}, {b}, {_fmt(x)}, {_fmt(y)}), {_fmt_map(restricted)})"
            f" - compose({rho[a]}, {sig[b]}, relabel({_fmt(x)}, {_fmt_map(rho)}),"
            f" relabel({_fmt(y)}, {_fmt_map(sig)}))")
    return lhs, rhs, expr


def _mo2(op, xs, mk, maps):
    (x,), ((a, b),), (rho,) = xs, mk, maps
    lhs = relabel(op, {l: rho[l] for l in x.legs if l not in (a, b)}, self_compose(op, a, b, x))
    rhs = self_compose(op, rho[a], rho[b], relabel(op, rho, x))
    restricted = {l: rho[l] for l in x.legs if l not in (a, b)}
    expr = lambda: (f"relabel(selfcompose({a}, {b}, {_fmt(x)}), {_fmt_map(restricted)})"
            f" - selfcompose({rho[a]}, {rho[b]}, relabel({_fmt(x)}, {_fmt_map(rho)}))")
    return lhs, rhs, expr


def _mo3(op, xs, mk, maps):
    x, y = xs
    (a,), (b,) = mk
    s = _sgn(x.degree * y.degree % 2 == 1)
    lhs = compose(op, a, b, x, y)
    rhs = compose(op, b, a, y, x).scale(s)
    expr = lambda: f"compose({a}, {b}, {_fmt(x)}, {_fmt(y)}) - " + _signed(s, f"compose({b}, {a}, {_fmt(y)}, {_fmt(x)})")
    return lhs, rhs, expr


def _mo_sym(op, xs, mk, maps):
    (x,), ((a, b),) = xs, mk
    lhs = self_compose(op, a, b, x)
    rhs = self_compose(op, b, a, x)
    return lhs, rhs, lambda: f"selfcompose({a}, {b}, {_fmt(x)}) - selfcompose({b}, {a}, {_fmt(x)})"


def _mo4(op, xs, mk, maps):
    (x,), ((a, b, c, d),) = xs, mk
    s = _sgn(_odd(op))
    lhs = self_compose(op, a, b, self_compose(op, c, d, x))
    rhs = self_compose(op, c, d, self_compose(op, a, b, x)).scale(s)
    expr = lambda: (f"selfcompose({a}, {b}, selfcompose({c}, {d}, {_fmt(x)})) - "
            + _signed(s, f"selfcompose({c}, {d}, selfcompose({a}, {b}, {_fmt(x)}))"))
    return lhs, rhs, expr


def _mo5(op, xs, mk, maps):
    x, y = xs
    (a, c), (b, d) = mk
    s = _sgn(_odd(op))
    lhs = self_compose(op, a, b, compose(op, c, d, x, y))
    rhs = self_compose(op, c, d, compose(op, a, b, x, y)).scale(s)
    expr = lambda: (f"selfcompose({a}, {b}, compose({c}, {d}, {_fmt(x)}, {_fmt(y)})) - "
            + _signed(s, f"selfcompose({c}, {d}, compose({a}, {b}, {_fmt(x)}, {_fmt(y)}))"))
    return lhs, rhs, expr


def _mo6(op, xs, mk, maps):
    x, y = xs
    (a, c, d), (b,) = mk
    s = _sgn(_odd(op))
    lhs = compose(op, a, b, self_compose(op, c, d, x), y)
    rhs = self_compose(op, c, d, compose(op, a, b, x, y)).scale(s)
    expr = lambda: (f"compose({a}, {b}, selfcompose({c}, {d}, {_fmt(x)}), {_fmt(y)}) - "
            + _signed(s, f"selfcompose({c}, {d}, compose({a}, {b}, {_fmt(x)}, {_fmt(y)}))"))
    return lhs, rhs, expr


def _mo7(op, xs, mk, maps):
    x, y, z = xs
    (a,), (b, c), (d,) = mk
    s_left = _sgn(_odd(op) and x.degree % 2 == 1)
    s = _sgn(_odd(op))
    lhs = compose(op, a, b, x, compose(op, c, d, y, z)).scale(s_left)
    rhs = compose(op, c, d, compose(op, a, b, x, y), z).scale(s)
    expr = lambda: (_signed(s_left, f"compose({a}, {b}, {_fmt(x)}, compose({c}, {d}, {_fmt(y)}, {_fmt(z)}))") + " - "
            + _signed(s, f"compose({c}, {d}, compose({a}, {b}, {_fmt(x)}, {_fmt(y)}), {_fmt(z)})"))
    return lhs, rhs, expr


def _cs1a(op, xs, mk, maps):
    x, y = xs
    rho, sig = maps
    both = dict(rho)
    both.update(sig)
    lhs = relabel(op, both, cs2(op, x, y))
    rhs = cs2(op, relabel(op, rho, x), relabel(op, sig, y))
    expr = lambda: (f"relabel(cs2({_fmt(x)}, {_fmt(y)}), {_fmt_map(both)}) - "
            f"cs2(relabel({_fmt(x)}, {_fmt_map(rho)}), relabel({_fmt(y)}, {_fmt_map(sig)}))")
    return lhs, rhs, expr


def _cs1b(op, xs, mk, maps):
    (x,), (rho,) = xs, maps
    lhs = relabel(op, rho, cs1(op, x))
    rhs = cs1(op, relabel(op, rho, x))
    return lhs, rhs, lambda: f"relabel(cs1({_fmt(x)}), {_fmt_map(rho)}) - cs1(relabel({_fmt(x)}, {_fmt_map(rho)}))"


def _cs2(op, xs, mk, maps):
    x, y = xs
    s = _sgn(x.degree * y.degree % 2 == 1)
    lhs = cs2(op, x, y)
    rhs = cs2(op, y, x).scale(s)
    return lhs, rhs, lambda: f"cs2({_fmt(x)}, {_fmt(y)}) - " + _signed(s, f"cs2({_fmt(y)}, {_fmt(x)})")


def _cs3a(op, xs, mk, maps):
    x, y, z = xs
    lhs = cs2(op, x, cs2(op, y, z))
    rhs = cs2(op, cs2(op, x, y), z)
    return lhs, rhs, lambda: f"cs2({_fmt(x)}, cs2({_fmt(y)}, {_fmt(z)})) - cs2(cs2({_fmt(x)}, {_fmt(y)}), {_fmt(z)})"


def _cs3b(op, xs, mk, maps):
    x, y = xs
    lhs = cs2(op, cs1(op, x), y)
    rhs = cs1(op, cs2(op, x, y))
    return lhs, rhs, lambda: f"cs2(cs1({_fmt(x)}), {_fmt(y)}) - cs1(cs2({_fmt(x)}, {_fmt(y)}))"


def _cs4(op, xs, mk, maps):
    (x,), ((a, b),) = xs, mk
    lhs = self_compose(op, a, b, cs1(op, x))
    rhs = cs1(op, self_compose(op, a, b, x))
    return lhs, rhs, lambda: f"selfcompose({a}, {b}, cs1({_fmt(x)})) - cs1(selfcompose({a}, {b}, {_fmt(x)}))"


def _cs5a1(op, xs, mk, maps):
    x, y = xs
    ((a, b), ()) = mk
    lhs = self_compose(op, a, b, cs2(op, x, y))
    rhs = cs2(op, self_compose(op, a, b, x), y)
    return lhs, rhs, lambda: f"selfcompose({a}, {b}, cs2({_fmt(x)}, {_fmt(y)})) - cs2(selfcompose({a}, {b}, {_fmt(x)}), {_fmt(y)})"


def _cs5a2(op, xs, mk, maps):
    x, y = xs
    ((), (a, b)) = mk
    s = _sgn(_odd(op) and x.degree % 2 == 1)
    lhs = self_compose(op, a, b, cs2(op, x, y))
    rhs = cs2(op, x, self_compose(op, a, b, y)).scale(s)
    return lhs, rhs, lambda: (f"selfcompose({a}, {b}, cs2({_fmt(x)}, {_fmt(y)})) - "
                      + _signed(s, f"cs2({_fmt(x)}, selfcompose({a}, {b}, {_fmt(y)}))"))


def _cs5a3(op, xs, mk, maps):
    x, y = xs
    (a,), (b,) = mk
    lhs = self_compose(op, a, b, cs2(op, x, y))
    rhs = cs1(op, compose(op, a, b, x, y))
    return lhs, rhs, lambda: f"selfcompose({a}, {b}, cs2({_fmt(x)}, {_fmt(y)})) - cs1(compose({a}, {b}, {_fmt(x)}, {_fmt(y)}))"


def _cs5a4(op, xs, mk, maps):
    x, y = xs
    (b,), (a,) = mk
    lhs = self_compose(op, a, b, cs2(op, x, y))
    rhs = cs1(op, compose(op, b, a, x, y))
    return lhs, rhs, lambda: f"selfcompose({a}, {b}, cs2({_fmt(x)}, {_fmt(y)})) - cs1(compose({b}, {a}, {_fmt(x)}, {_fmt(y)}))"


def _cs5b(op, xs, mk, maps):
    x, y = xs
    (a,), (b,) = mk
    lhs = compose(op, a, b, cs1(op, x), y)
    rhs = cs1(op, compose(op, a, b, x, y))
    return lhs, rhs, lambda: f"compose({a}, {b}, cs1({_fmt(x)}), {_fmt(y)}) - cs1(compose({a}, {b}, {_fmt(x)}, {_fmt(y)}))"


def _cs6a(op, xs, mk, maps):
    x, y, z = xs
    (a,), (b,), () = mk
    lhs = compose(op, a, b, x, cs2(op, y, z))
    rhs = cs2(op, compose(op, a, b, x, y), z)
    return lhs, rhs, lambda: (f"compose({a}, {b}, {_fmt(x)}, cs2({_fmt(y)}, {_fmt(z)})) - "
                      f"cs2(compose({a}, {b}, {_fmt(x)}, {_fmt(y)}), {_fmt(z)})")


def _cs6b(op, xs, mk, maps):
    x, y, z = xs
    (a,), (), (b,) = mk
    e = x.degree * y.degree + (y.degree if _odd(op) else 0)
    s = _sgn(e % 2 == 1)
    lhs = compose(op, a, b, x, cs2(op, y, z))
    rhs = cs2(op, y, compose(op, a, b, x, z)).scale(s)
    return lhs, rhs, lambda: (f"compose({a}, {b}, {_fmt(x)}, cs2({_fmt(y)}, {_fmt(z)})) - "
                      + _signed(s, f"cs2({_fmt(y)}, compose({a}, {b}, {_fmt(x)}, {_fmt(z)}))"))


MO_AXIOMS = [
    Axiom("MO1", 2, (1, 1), _mo1),
    Axiom("MO2", 1, (2,), _mo2),
    Axiom("MO3", 2, (1, 1), _mo3),
    Axiom("MO-sym", 1, (2,), _mo_sym),
    Axiom("MO4", 1, (4,), _mo4),
    Axiom("MO5", 2, (2, 2), _mo5),
    Axiom("MO6", 2, (3, 1), _mo6),
    Axiom("MO7", 3, (1, 2, 1), _mo7),
]

CS_AXIOMS = [
    Axiom("CS1a", 2, (0, 0), _cs1a),
    Axiom("CS1b", 1, (0,), _cs1b),
    Axiom("CS2", 2, (0, 0), _cs2),
    Axiom("CS3a", 3, (0, 0, 0), _cs3a),
    Axiom("CS3b", 2, (0, 0), _cs3b),
    Axiom("CS4", 1, (2,), _cs4),
    Axiom("CS5a-1", 2, (2, 0), _cs5a1),
    Axiom("CS5a-2", 2, (0, 2), _cs5a2),
    Axiom("CS5a-3", 2, (1, 1), _cs5a3),
    Axiom("CS5a-4", 2, (1, 1), _cs5a4),
    Axiom("CS5b", 2, (1, 1), _cs5b),
    Axiom("CS6a", 3, (1, 1, 0), _cs6a),
    Axiom("CS6b", 3, (1, 0, 1), _cs6b),
]

SUITES = {"mo": MO_AXIOMS, "cs": CS_AXIOMS}


# -- input generation --------------------------------------------------------

def _label_blocks(sizes) -> list[tuple]:
    out, start = [], 1
    for s in sizes:
        out.append(tuple(range(start, start + s)))
        start += s
    return out


def _fresh_map(rng: random.Random | None, legs: tuple, offset: int) -> dict:
    targets = [offset + i for i in range(len(legs))]
    if rng is not None:
        rng.shuffle(targets)
    else:
        targets.reverse()
    return dict(zip(legs, targets))


def _relabel_maps(axiom: Axiom, legs_list, rng):
    if axiom.name in ("MO1", "CS1a"):
        return (_fresh_map(rng, legs_list[0], 100), _fresh_map(rng, legs_list[1], 200))
    if axiom.name in ("MO2", "CS1b"):
        return (_fresh_map(rng, legs_list[0], 100),)
    return ()


def _case_rng(seed: int, case: int) -> random.Random:
    return random.Random(f"{seed}:{case}")


def sample_inputs(op: ModularOperad, axiom: Axiom, rng: random.Random, max_legs: int = 6,
                  max_genus: int = 3, terms: int = 2):
    """Random inputs meeting the axiom's leg preconditions."""
    sizes = [rng.randint(m, max(m, max_legs)) for m in axiom.marks]
    legs_list = _label_blocks(sizes)
    xs, marks = [], []
    kw = {"max_genus": max_genus} if op.name in ("QC", "QO") else {}
    for legs, m in zip(legs_list, axiom.marks):
        xs.append(_stable_element(op, rng, legs, terms, kw))
        marks.append(tuple(rng.sample(legs, m)))
    maps = _relabel_maps(axiom, legs_list, rng)
    return xs, tuple(marks), maps


def _stable_element(op, rng, legs, terms, kw):
    while True:
        try:
            x = random_element(op, rng, legs, terms=terms, **kw)
        except CorollaError:
            continue
        if x.stable:
            return x


def run_axiom(op: ModularOperad, axiom: Axiom, xs, marks, maps):
    """Evaluate one axiom instance; returns ``None`` on success or a failure record."""
    lhs, rhs, expr = axiom.fn(op, xs, marks, maps)
    if lhs == rhs:
        return None
    from .expr import format_element
    return {
        "axiom": axiom.name,
        "inputs": [format_element(x) for x in xs],
        "marks": [list(m) for m in marks],
        "lhs": format_element(lhs),
        "rhs": format_element(rhs),
        "repro": expr(),
    }


def _random_case(args):
    op, suite, seed, case, max_legs, max_genus = args
    rng = _case_rng(seed, case)
    out = []
    for axiom in SUITES[suite]:
        xs, marks, maps = sample_inputs(op, axiom, rng, max_legs, max_genus)
        fail = run_axiom(op, axiom, xs, marks, maps)
        if fail is not None:
            fail["case"] = case
        out.append((axiom.name, fail))
    return out


def fuzz(op: ModularOperad, suite: str, seed: int, cases: int, max_legs: int = 6, max_genus: int = 3,
         jobs: int = 1, extra: dict | None = None) -> dict:
    """Seeded random check of an axiom suite; deterministic for a given seed."""
    tasks = [(op, suite, seed, c, max_legs, max_genus) for c in range(cases)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_random_case, tasks, chunksize=max(1, cases // (4 * jobs))))
    else:
        results = [_random_case(t) for t in tasks]
    return _report(op, suite, "random", seed, cases, results, extra)


def _report(op, suite, mode, seed, cases, results, extra=None) -> dict:
    checked: dict = {a.name: 0 for a in SUITES[suite]}
    failures = []
    for per_case in results:
        for name, fail in per_case:
            checked[name] += 1
            if fail is not None:
                failures.append(fail)
    failures.sort(key=lambda f: (f.get("case", 0), f["axiom"], f["repro"]))
    report = {
        "schema": REPORT_SCHEMA,
        "operad": op.name,
        "suite": suite,
        "mode": mode,
        "seed": seed,
        "cases": cases,
        "checked": checked,
        "failures": failures,
        "passed": not failures,
    }
    if hasattr(op, "space"):
        report["space"] = op.space.to_json()
    if extra:
        report.update(extra)
    return report


# -- exhaustive enumeration for the surface operads --------------------------

def _stable_keys(op, legs, max_genus, max_empty):
    keys = []
    for twoG in range(0, 4 * max_genus + 2 * len(legs) + 2 * max_empty + 4):
        if not is_stable(len(legs), twoG):
            continue
        for k in op.basis(legs, twoG):
            if op.genus(k) > max_genus:
                continue
            if op.name == "QO" and sum(1 for c in k[0] if not c) > max_empty:
                continue
            keys.append(k)
    return keys


def exhaustive(op: ModularOperad, suite: str, max_legs: int = 5, max_genus: int = 2,
               max_empty: int = 1) -> dict:
    """Every stable basis input with total legs ``<= max_legs`` and genus ``<= max_genus``."""
    results = []
    count = 0
    for axiom in SUITES[suite]:
        per = []
        for sizes in product(range(0, max_legs + 1), repeat=axiom.arity):
            if sum(sizes) > max_legs or any(s < m for s, m in zip(sizes, axiom.marks)):
                continue
            legs_list = _label_blocks(sizes)
            key_lists = [_stable_keys(op, legs, max_genus, max_empty) for legs in legs_list]
            mark_lists = [list(_ordered_marks(legs, m)) for legs, m in zip(legs_list, axiom.marks)]
            maps = _relabel_maps(axiom, legs_list, None)
            for keys in product(*key_lists):
                xs = [OperadElement.single(op, legs, k) for legs, k in zip(legs_list, keys)]
                for marks in product(*mark_lists):
                    count += 1
                    per.append((axiom.name, run_axiom(op, axiom, xs, marks, maps)))
        results.append(per)
    rep = _report(op, suite, "exhaustive", 0, count, results)
    rep["bounds"] = {"max_legs": max_legs, "max_genus": max_genus, "max_empty": max_empty}
    return rep


def _ordered_marks(legs, m):
    from itertools import permutations
    return permutations(legs, m)


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1)
