"""A small expression language for the objects of this package.

Values are exact scalars, formal monomials in ``k`` (kappa) and ``xi``,
operad elements, elements of the symmetric and cyclic models, elements of
``Fun(P, E_V)`` in orbit-sum form and truncated ``Fun_Exp`` series.

Literals::

    3/2  k  k^-1  xi^2                    scalars and formal variables
    phi^a  phi0                           a covector by label or by index
    phi^a*phi^b                           a symmetric monomial
    (phi^a phi^b)  cyc{phi^a phi^b}       a cyclic word
    QC{1,2,3}^g=1  QO{(1 2)(3)()}^g=0     generators of the surface operads
    T{1:phi^a, 2:phi^b}^G=1               a covector tensor of E_V (G defaults to 0)
    zero(QC{1,2}^G=1)                     the zero element of a component

A parenthesis holding nothing but covectors separated by spaces is a cyclic
word; anything else in parentheses is grouping.  ``p @ t`` pairs a surface
generator with a tensor on the same legs and symmetrizes; ``orb(X)`` is the
orbit sum ``n! X`` of an invariant element of arity ``n`` and is how such
elements print.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import LinComb, accumulate
from .operad import OperadElement, compose, cs1, cs2, differential, relabel, self_compose


class ExprError(ValueError):
    """Base class for errors carrying a source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message, self.line, self.col = message, line, col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)


class ParseError(ExprError):
    pass


class EvalError(ExprError):
    pass


# -- printing values ----------------------------------------------------------

def format_scalar(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _join_terms(parts: list[tuple[Fraction, str]]) -> str:
    if not parts:
        return "0"
    out = []
    for i, (c, body) in enumerate(parts):
        mag = abs(c)
        coeff = "" if mag == 1 and body else format_scalar(mag) + ("*" if body else "")
        sign = ("-" if c < 0 else "") if i == 0 else (" - " if c < 0 else " + ")
        out.append(sign + coeff + body)
    return "".join(out)


def _format_G(twoG: int) -> str:
    return format_scalar(Fraction(twoG, 2))


def format_generator(op, key, legs, twoG) -> str:
    text = op.format_key(key, legs)
    if op.key_twoG(key, legs) is None:
        text += "^G=" + _format_G(twoG)
    return text


def _op_word(op) -> str:
    return "T" if op.odd else op.name


def format_element(x: OperadElement) -> str:
    """Linear combination of generators; the zero element keeps its corolla."""
    if x.is_zero():
        legs = ",".join(str(l) for l in x.legs)
        return f"zero({_op_word(x.op)}{{{legs}}}^G={_format_G(x.twoG)})"
    return _join_terms([(c, format_generator(x.op, k, x.legs, x.twoG)) for k, c in x.terms.sorted_items()])


def _power(name: str, e: int) -> list[str]:
    if e == 0:
        return []
    return [name if e == 1 else f"{name}^{e}"]


def format_covector(space, i: int) -> str:
    return f"phi^{space.labels[i]}"


def format_model(x) -> str:
    model = x.model
    sp = model.space
    parts = []
    if model.name == "sym":
        for (word, q), c in x.terms.sorted_items(key=lambda k: (len(k[0]), k)):
            parts.append((c, "*".join([format_covector(sp, i) for i in word] + _power("k", q))))
    else:
        def order(k):
            return (sum(len(w) for w in k[0]) + k[1], k)
        for (words, xi, q), c in x.terms.sorted_items(key=order):
            body = ["(" + " ".join(format_covector(sp, i) for i in w) + ")" for w in words]
            parts.append((c, "*".join(body + _power("xi", xi) + _power("k", q))))
    return _join_terms(parts)


def format_orbit(A) -> str:
    from .series import UNIT
    fun = A.fun

    def order(k):
        return (0,) if k == UNIT else (1, k[0], k[1], k[4], repr(k))
    parts = []
    for k, c in A.terms.sorted_items(key=order):
        if k == UNIT:
            parts.append((c, ""))
            continue
        n, twoG, pk, qk, q = k
        legs = tuple(range(1, n + 1))
        body = f"orb({format_generator(fun.P, pk, legs, twoG)} @ {fun.Q.format_key(qk, legs)})"
        parts.append((c, "*".join(_power("k", q) + [body])))
    return _join_terms(parts)


def key_to_json(fun, n, twoG, pk, qk) -> dict:
    legs = tuple(range(1, n + 1))
    return {"p_gen": format_generator(fun.P, pk, legs, twoG), "q_monomial": fun.Q.format_key(qk, legs)}


# -- tokens -----------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str   # NUM IDENT COV SYM END
    text: str
    line: int
    col: int
    value: object = None


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+|\n)
  | (?P<cov>phi(?:\^[A-Za-z0-9_]+|[0-9]+))
  | (?P<num>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>->|[-+*/^=@:,(){}])
""", re.VERBOSE)


def tokenize(text: str) -> list[Token]:
    out, pos, line, col = [], 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "cov":
            val = ("label", s[4:]) if s[3] == "^" else ("index", int(s[3:]))
            out.append(Token("COV", s, line, col, val))
        elif kind == "num":
            out.append(Token("NUM", s, line, col, int(s)))
        elif kind == "ident":
            out.append(Token("IDENT", s, line, col))
        elif kind == "sym":
            out.append(Token("SYM", s, line, col))
        if s == "\n":
            line, col = line + 1, 1
        else:
            col += len(s)
        pos = m.end()
    out.append(Token("END", "", line, col))
    return out


# -- syntax tree -------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Num(Node):
    value: Fraction = Fraction(0)


@dataclass(frozen=True)
class Var(Node):
    name: str = "k"      # "k" or "xi"
    power: int = 1


@dataclass(frozen=True)
class Cov(Node):
    ref: tuple = ()      # ("label", str) or ("index", int)


@dataclass(frozen=True)
class Cycle(Node):
    covs: tuple = ()


@dataclass(frozen=True)
class Gen(Node):
    op: str = "QC"
    legs: tuple = ()     # QC legs; QO cycles; T (leg, Cov) pairs
    g: int | None = None
    twoG: int | None = None


@dataclass(frozen=True)
class Zero(Node):
    op: str = "QC"
    legs: tuple = ()
    twoG: int = 0


@dataclass(frozen=True)
class Call(Node):
    name: str = ""
    args: tuple = ()


@dataclass(frozen=True)
class Label(Node):
    value: object = None


@dataclass(frozen=True)
class MapLit(Node):
    pairs: tuple = ()


@dataclass(frozen=True)
class BinOp(Node):
    op: str = "+"
    left: Node = None
    right: Node = None


@dataclass(frozen=True)
class Neg(Node):
    arg: Node = None


FUNCTIONS = {
    "delta": 1, "d": 1, "bracket": 2, "star": 2, "sharp": 1, "exp": 1, "log": 1,
    "psi": 1, "theta": 1, "iota": 1, "orb": 1,
    "compose": 4, "selfcompose": 3, "cs2": 2, "cs1": 1, "relabel": 2,
}
FORMAL = {"k": "k", "kappa": "k", "xi": "xi"}


# -- parser ------------------------------------------------------------------------

class Parser:
    """Recursive descent with one token of lookahead, except for the cycle test."""

    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def _err(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def _next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def _is(self, text) -> bool:
        return self.tok.kind in ("SYM", "IDENT") and self.tok.text == text

    def _expect(self, text) -> Token:
        if not self._is(text):
            found = self.tok.text or "end of input"
            raise self._err(f"expected {text!r}, found {found!r}")
        return self._next()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "END":
            raise self._err(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self._is("+") or self._is("-"):
            t = self._next()
            node = BinOp(t.line, t.col, t.text, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self._is("*") or self._is("/"):
            t = self._next()
            node = BinOp(t.line, t.col, t.text, node, self.unary())
        return node

    def unary(self) -> Node:
        if self._is("-"):
            t = self._next()
            return Neg(t.line, t.col, self.unary())
        return self.pair()

    def pair(self) -> Node:
        node = self.atom()
        if self._is("@"):
            t = self._next()
            node = BinOp(t.line, t.col, "@", node, self.atom())
        return node

    def _int(self) -> int:
        neg = False
        if self._is("-"):
            self._next()
            neg = True
        if self.tok.kind != "NUM":
            raise self._err("expected an integer")
        v = self._next().value
        return -v if neg else v

    def _fraction(self) -> Fraction:
        v = Fraction(self._int())
        if self._is("/"):
            self._next()
            den = self._int()
            if den == 0:
                raise self._err("division by zero")
            v /= den
        return v

    def _label(self):
        t = self.tok
        if t.kind == "NUM":
            return self._next().value
        if t.kind == "IDENT":
            return self._next().text
        raise self._err("expected a leg label")

    def _is_cycle(self) -> bool:
        j = self.i + 1
        while self.toks[j].kind == "COV":
            j += 1
        return j > self.i + 1 and self.toks[j].kind == "SYM" and self.toks[j].text == ")"

    def _covs_until(self, close) -> tuple:
        covs = []
        while self.tok.kind == "COV":
            c = self._next()
            covs.append(Cov(c.line, c.col, c.value))
        self._expect(close)
        return tuple(covs)

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "NUM":
            self._next()
            return Num(t.line, t.col, Fraction(t.value))
        if t.kind == "COV":
            self._next()
            return Cov(t.line, t.col, t.value)
        if self._is("("):
            if self._is_cycle():
                self._next()
                return Cycle(t.line, t.col, self._covs_until(")"))
            self._next()
            node = self.expr()
            self._expect(")")
            return node
        if t.kind != "IDENT":
            raise self._err(f"unexpected {t.text or 'end of input'!r}")
        name = t.text
        nxt = self.toks[self.i + 1]
        if name in FORMAL:
            self._next()
            power = 1
            if self._is("^"):
                self._next()
                power = self._int()
            return Var(t.line, t.col, FORMAL[name], power)
        if name == "cyc" and nxt.text == "{":
            self._next()
            self._next()
            return Cycle(t.line, t.col, self._covs_until("}"))
        if nxt.kind == "SYM" and nxt.text == "{":
            return self.generator()
        if name == "zero":
            self._next()
            self._expect("(")
            node = self.corolla()
            self._expect(")")
            return node
        if name in FUNCTIONS:
            self._next()
            self._expect("(")
            args = []
            if name in ("compose", "selfcompose"):
                for _ in range(2):
                    lt = self.tok
                    args.append(Label(lt.line, lt.col, self._label()))
                    self._expect(",")
            if not self._is(")"):
                args.append(self.argument())
                while self._is(","):
                    self._next()
                    args.append(self.argument())
            self._expect(")")
            if len(args) != FUNCTIONS[name]:
                raise ParseError(f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", t.line, t.col)
            return Call(t.line, t.col, name, tuple(args))
        raise self._err(f"unknown symbol {name!r}")

    def argument(self) -> Node:
        if self._is("{"):
            t = self._next()
            pairs = []
            while not self._is("}"):
                a = self._label()
                self._expect("->")
                pairs.append((a, self._label()))
                if not self._is(","):
                    break
                self._next()
            self._expect("}")
            return MapLit(t.line, t.col, tuple(pairs))
        return self.expr()

    def _suffix(self):
        """``^g=INT`` or ``^G=FRACTION``; returns ``(g, twoG)``."""
        if not self._is("^"):
            return None, None
        self._next()
        which = self.tok
        if which.kind != "IDENT" or which.text not in ("g", "G"):
            raise self._err("expected g= or G=")
        self._next()
        self._expect("=")
        if which.text == "g":
            return self._int(), None
        v = self._fraction()
        if (2 * v).denominator != 1:
            raise self._err("G must be a half-integer")
        return None, int(2 * v)

    def _labels_until(self, close) -> tuple:
        out = []
        while not self._is(close):
            out.append(self._label())
            if not self._is(","):
                break
            self._next()
        return tuple(out)

    def generator(self) -> Node:
        t = self._next()
        self._expect("{")
        if t.text == "QO":
            cycles = []
            while self._is("("):
                self._next()
                cyc = []
                while not self._is(")"):
                    cyc.append(self._label())
                self._expect(")")
                cycles.append(tuple(cyc))
            legs = tuple(cycles)
        elif t.text == "T":
            pairs = []
            while not self._is("}"):
                leg = self._label()
                self._expect(":")
                c = self.tok
                if c.kind != "COV":
                    raise self._err("expected a covector")
                self._next()
                pairs.append((leg, Cov(c.line, c.col, c.value)))
                if not self._is(","):
                    break
                self._next()
            legs = tuple(pairs)
        else:
            legs = self._labels_until("}")
        self._expect("}")
        g, twoG = self._suffix()
        if t.text != "T" and g is None:
            raise ParseError(f"{t.text} generator needs ^g=", t.line, t.col)
        return Gen(t.line, t.col, t.text, legs, g, twoG)

    def corolla(self) -> Node:
        t = self.tok
        if t.kind != "IDENT":
            raise self._err("expected an operad name")
        self._next()
        self._expect("{")
        legs = self._labels_until("}")
        self._expect("}")
        _, twoG = self._suffix()
        if twoG is None:
            raise ParseError("zero(...) needs ^G=", t.line, t.col)
        return Zero(t.line, t.col, t.text, legs, twoG)


def parse(text: str) -> Node:
    return Parser(text).parse()


# -- printing syntax trees ----------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "@": 4}


def _ref(ref) -> str:
    return f"phi^{ref[1]}" if ref[0] == "label" else f"phi{ref[1]}"


def format_ast(node: Node, prec: int = 0) -> str:
    """Canonical text of a syntax tree; ``parse(format_ast(t)) == t``."""
    if isinstance(node, Num):
        return format_scalar(node.value)
    if isinstance(node, Var):
        return node.name if node.power == 1 else f"{node.name}^{node.power}"
    if isinstance(node, Cov):
        return _ref(node.ref)
    if isinstance(node, Cycle):
        return "(" + " ".join(_ref(c.ref) for c in node.covs) + ")" if node.covs else "cyc{}"
    if isinstance(node, Gen):
        if node.op == "QO":
            body = "".join("(" + " ".join(str(l) for l in c) + ")" for c in node.legs)
        elif node.op == "T":
            body = ", ".join(f"{l}:{_ref(c.ref)}" for l, c in node.legs)
        else:
            body = ",".join(str(l) for l in node.legs)
        if node.g is not None:
            suffix = f"^g={node.g}"
        elif node.twoG is not None:
            suffix = f"^G={_format_G(node.twoG)}"
        else:
            suffix = ""
        return f"{node.op}{{{body}}}{suffix}"
    if isinstance(node, Zero):
        return f"zero({node.op}{{{','.join(str(l) for l in node.legs)}}}^G={_format_G(node.twoG)})"
    if isinstance(node, Label):
        return str(node.value)
    if isinstance(node, MapLit):
        return "{" + ", ".join(f"{a}->{b}" for a, b in node.pairs) + "}"
    if isinstance(node, Call):
        return f"{node.name}(" + ", ".join(format_ast(a) for a in node.args) + ")"
    if isinstance(node, Neg):
        s = "-" + format_ast(node.arg, 3)
        return f"({s})" if prec >= 2 else s
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = format_ast(node.left, p)
        right = format_ast(node.right, p + 1)
        sep = f" {node.op} " if node.op in "+-@" else node.op
        s = left + sep + right
        return f"({s})" if p < prec else s
    raise TypeError(f"unknown node {node!r}")


# -- values --------------------------------------------------------------------------

class Formal:
    """Polynomial in ``k`` (any integer power) and ``xi``; keys are ``(q, xi)``."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = terms if isinstance(terms, LinComb) else LinComb(terms)

    @classmethod
    def monomial(cls, q=0, xi=0, c=1):
        return cls(LinComb.single((q, xi), c))

    def __add__(self, o):
        return Formal(self.terms + o.terms)

    def scale(self, s):
        return Formal(self.terms.scale(s))

    def __mul__(self, o):
        acc: dict = {}
        for (q1, x1), c1 in self.terms.items():
            for (q2, x2), c2 in o.terms.items():
                accumulate(acc, (q1 + q2, x1 + x2), c1 * c2)
        return Formal(LinComb._wrap(acc))

    def scalar(self):
        """The value as a plain scalar, or ``None`` if a formal variable occurs."""
        if all(k == (0, 0) for k in self.terms):
            return self.terms.coeff((0, 0))
        return None

    def __eq__(self, o):
        return isinstance(o, Formal) and self.terms == o.terms

    def __hash__(self):
        return hash(self.terms)


def format_formal(f: Formal) -> str:
    parts = [(c, "*".join(_power("xi", xi) + _power("k", q)))
             for (q, xi), c in f.terms.sorted_items(key=lambda k: (k[1], k[0]))]
    return _join_terms(parts)


@dataclass
class Series:
    """An element of ``Fun_Exp`` together with the context that truncates it."""
    fx: object
    value: object

    def scale(self, s):
        return Series(self.fx, self.value.scale(s))

    def __eq__(self, other):
        return isinstance(other, Series) and self.fx.equal(self.value, other.value)


def format_value(v) -> str:
    from .models import ModelElement
    from .series import OrbitElement
    if isinstance(v, Formal):
        return format_formal(v)
    if isinstance(v, OperadElement):
        return format_element(v)
    if isinstance(v, ModelElement):
        return format_model(v)
    if isinstance(v, Series):
        return format_orbit(v.value)
    if isinstance(v, OrbitElement):
        return format_orbit(v)
    if isinstance(v, (int, Fraction)):
        return format_scalar(v)
    raise TypeError(f"cannot format {type(v).__name__}")


def value_kind(v) -> str:
    from .models import ModelElement
    from .series import OrbitElement
    if isinstance(v, Formal):
        return "scalar" if v.scalar() is not None else "formal"
    if isinstance(v, OperadElement):
        return "operad"
    if isinstance(v, ModelElement):
        return v.model.name
    if isinstance(v, Series):
        return "series"
    if isinstance(v, OrbitElement):
        return "fun"
    return type(v).__name__


def is_zero_value(v) -> bool:
    if isinstance(v, Series):
        return v.fx.truncate(v.fx.normalize(v.value)).is_zero()
    if isinstance(v, Formal):
        return v.terms.is_zero()
    return v.is_zero()


# -- evaluation ------------------------------------------------------------------------

class Context:
    """Everything an expression needs: the space, the cutoff and the operads.

    ``operads`` maps generator names to operad instances; passing a modified
    operad lets a reproduction expression be replayed against it.
    """

    def __init__(self, space=None, cutoff=8, operads: dict | None = None):
        from .endo import EndoOperad
        from .space import standard_space
        from .surfaces import QC, QO, TOY
        self.space = space if space is not None else standard_space()
        self.cutoff = Fraction(cutoff)
        self.operads = {"QC": QC, "QO": QO, "QC0": TOY}
        self.operads.update(operads or {})
        if "T" not in self.operads:
            self.operads["T"] = EndoOperad(self.space)
        self.endo = self.operads["T"]
        if getattr(self.endo, "space", self.space) != self.space:
            self.space = self.endo.space
        self._cache: dict = {}

    def _cached(self, key, make):
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    def fun(self, P):
        from .fun import Fun
        return self._cached(("fun", P.name), lambda: Fun(P, self.endo))

    def ofun(self, fun):
        from .series import OrbitFun
        return self._cached(("orbit", fun.P.name), lambda: OrbitFun(fun))

    def fx(self, fun):
        from .series import FunExp
        return self._cached(("exp", fun.P.name), lambda: FunExp(fun, self.cutoff))

    def model(self, name):
        from .models import CycModel, SymModel
        return self._cached(("model", name), lambda: (SymModel if name == "sym" else CycModel)(self.space))

    def cov_index(self, node: Cov) -> int:
        kind, v = node.ref
        if kind == "index":
            if not 0 <= v < self.space.dim:
                raise EvalError(f"no basis covector with index {v}", node.line, node.col)
            return v
        if v not in self.space.labels:
            raise EvalError(f"no basis covector labelled {v!r}", node.line, node.col)
        return self.space.index(v)


def evaluate(source, ctx: Context | None = None):
    """Parse (if given text) and evaluate an expression."""
    ctx = ctx or Context()
    node = parse(source) if isinstance(source, str) else source
    return _Evaluator(ctx).ev(node)


def evaluate_text(text: str, ctx: Context | None = None) -> str:
    return format_value(evaluate(text, ctx))


class _Evaluator:
    def __init__(self, ctx: Context):
        self.ctx = ctx

    def err(self, node, msg):
        return EvalError(msg, node.line, node.col)

    def ev(self, node):
        try:
            return getattr(self, "ev_" + type(node).__name__)(node)
        except ExprError:
            raise
        except (ValueError, ZeroDivisionError, KeyError, TypeError) as e:
            raise self.err(node, str(e)) from None

    # literals ---------------------------------------------------------------

    def ev_Num(self, node):
        return Formal.monomial(c=node.value)

    def ev_Var(self, node):
        if node.name == "xi":
            if node.power < 0:
                raise self.err(node, "xi has no negative powers")
            return Formal.monomial(xi=node.power)
        return Formal.monomial(q=node.power)

    def ev_Cov(self, node):
        return self.ctx.model("sym").monomial([self.ctx.cov_index(node)])

    def ev_Cycle(self, node):
        return self.ctx.model("cyc").word(tuple(self.ctx.cov_index(c) for c in node.covs))

    def _op(self, node, name):
        op = self.ctx.operads.get(name)
        if op is None:
            raise self.err(node, f"unknown operad {name!r}")
        return op

    def ev_Gen(self, node):
        from .endo import sort_by_legs
        op = self._op(node, node.op)
        if node.op == "QO":
            flat = [l for c in node.legs for l in c]
            return OperadElement.single(op, flat, op.make_key(node.legs, node.g))
        if node.op == "T":
            legs = [l for l, _ in node.legs]
            if len(set(legs)) != len(legs):
                raise self.err(node, "repeated leg label")
            word = [self.ctx.cov_index(c) for _, c in node.legs]
            word, legs, sign = sort_by_legs(self.ctx.space, word, legs)
            return OperadElement(op, legs, node.twoG or 0, LinComb.single(word, sign))
        return OperadElement.single(op, node.legs, node.g)

    def ev_Zero(self, node):
        return OperadElement(self._op(node, node.op), node.legs, node.twoG, LinComb.zero())

    def ev_Label(self, node):
        raise self.err(node, "a bare leg label is not a value")

    def ev_MapLit(self, node):
        raise self.err(node, "a relabelling map is only allowed as the second argument of relabel")

    # arithmetic ---------------------------------------------------------------

    def ev_Neg(self, node):
        return self.ev(node.arg).scale(Fraction(-1))

    def ev_BinOp(self, node):
        a, b = self.ev(node.left), self.ev(node.right)
        if node.op == "+":
            return self.add(node, a, b)
        if node.op == "-":
            return self.add(node, a, b.scale(Fraction(-1)))
        if node.op == "*":
            return self.mul(node, a, b)
        if node.op == "/":
            s = b.scalar() if isinstance(b, Formal) else None
            if s is None:
                raise self.err(node, "can only divide by a scalar")
            if s == 0:
                raise self.err(node, "division by zero")
            return a.scale(1 / s)
        return self.pair(node, a, b)

    def lift(self, node, f: Formal, like):
        """Interpret a formal polynomial inside the type of ``like``."""
        from .series import UNIT
        k = value_kind(like)
        if k == "sym":
            if any(xi for _, xi in f.terms):
                raise self.err(node, "xi does not occur in the symmetric model")
            return like.model.element(LinComb._wrap({((), q): c for (q, _), c in f.terms.items()}))
        if k == "cyc":
            return like.model.element(LinComb._wrap({((), xi, q): c for (q, xi), c in f.terms.items()}))
        if k in ("fun", "series"):
            s = f.scalar()
            if s is None:
                raise self.err(node, "only scalars add to elements of Fun (multiply by k instead)")
            el = like.value if k == "series" else like
            out = type(el)(el.fun, LinComb._wrap({UNIT: s} if s else {}))
            return Series(like.fx, out) if k == "series" else out
        if k == "operad" and f.scalar() == 0:
            return like.scale(0)
        raise self.err(node, f"cannot combine a scalar with {k}")

    def add(self, node, a, b):
        ka, kb = value_kind(a), value_kind(b)
        if isinstance(a, Formal) and isinstance(b, Formal):
            return a + b
        if isinstance(a, Formal):
            a = self.lift(node, a, b)
        elif isinstance(b, Formal):
            b = self.lift(node, b, a)
        ka, kb = value_kind(a), value_kind(b)
        if {ka, kb} == {"fun", "series"}:
            a, b = self.as_series(node, a), self.as_series(node, b)
            ka = kb = "series"
        if ka != kb:
            raise self.err(node, f"cannot add {ka} and {kb}")
        if ka == "series":
            return Series(a.fx, a.value + b.value)
        if ka == "fun" and a.fun != b.fun:
            raise self.err(node, "elements of different Fun spaces")
        return a + b

    def mul(self, node, a, b):
        if isinstance(a, Formal) and isinstance(b, Formal):
            return a * b
        if isinstance(a, Formal) or isinstance(b, Formal):
            f, x = (a, b) if isinstance(a, Formal) else (b, a)
            s = f.scalar()
            if s is not None:
                return x.scale(s)
            kx = value_kind(x)
            if kx in ("sym", "cyc"):
                return x.model.mul(self.lift(node, f, x), x)
            if kx in ("fun", "series"):
                return self.kappa_times(node, f, x)
            raise self.err(node, f"cannot multiply {kx} by a formal variable")
        ka, kb = value_kind(a), value_kind(b)
        if ka in ("sym", "cyc") and ka == kb:
            return a.model.mul(a, b)
        if {ka, kb} <= {"fun", "series"}:
            return self.star(node, a, b)
        raise self.err(node, f"cannot multiply {ka} and {kb}; use cs2 or compose for operad elements")

    def kappa_times(self, node, f, x):
        out = None
        for (q, xi), c in f.terms.items():
            if xi:
                raise self.err(node, "xi does not act on Fun")
            if isinstance(x, Series):
                part = Series(x.fx, x.fx.kappa(x.value, q).scale(c))
            else:
                part = self.ctx.ofun(x.fun).kappa(x, q).scale(c)
            out = part if out is None else self.add(node, out, part)
        return out

    def pair(self, node, p, t):
        """``p @ t``: the symmetrized tensor of a surface generator and a covector tensor."""
        from .fun import _relabel_key
        if value_kind(p) != "operad" or value_kind(t) != "operad" or p.op.odd or not t.op.odd:
            raise self.err(node, "@ pairs an element of QC or QO with a tensor T{...}")
        if p.legs != t.legs:
            raise self.err(node, "both sides of @ need the same legs")
        ofun = self.ctx.ofun(self.ctx.fun(p.op))
        n = len(p.legs)
        std = tuple(range(1, n + 1))
        acc: dict = {}
        for pk, pc in p.terms.items():
            pk2, sp, _ = _relabel_key(p.op, pk, p.legs, std)
            for tk, tc in t.terms.items():
                tk2, st, _ = _relabel_key(t.op, tk, t.legs, std)
                key, s = ofun.canon(n, p.twoG, pk2, tk2, 0)
                if s:
                    accumulate(acc, key, pc * tc * sp * st * s / math.factorial(n))
        return ofun.element(LinComb._wrap(acc))

    # functions -------------------------------------------------------------------

    def ev_Call(self, node):
        name = node.name
        if name == "relabel":
            x = self.ev(node.args[0])
            m = node.args[1]
            if not isinstance(m, MapLit):
                raise self.err(m, "relabel needs a map {a->b, ...}")
            self.need(node, x, "operad")
            return relabel(x.op, dict(m.pairs), x)
        if name in ("compose", "selfcompose"):
            labels = [self.label(a) for a in node.args[:2]]
            xs = [self.ev(a) for a in node.args[2:]]
            for x in xs:
                self.need(node, x, "operad")
            if name == "compose":
                return compose(xs[0].op, labels[0], labels[1], xs[0], xs[1])
            return self_compose(xs[0].op, labels[0], labels[1], xs[0])
        args = [self.ev(a) for a in node.args]
        return getattr(self, "fn_" + name)(node, *args)

    def label(self, node):
        if isinstance(node, Label):
            return node.value
        raise self.err(node, "expected a leg label")

    def need(self, node, x, *kinds):
        if value_kind(x) not in kinds:
            raise self.err(node, f"{node.name} does not apply to {value_kind(x)}")

    def as_series(self, node, x):
        if isinstance(x, Series):
            return x
        if value_kind(x) != "fun":
            raise self.err(node, f"expected an element of Fun, got {value_kind(x)}")
        fx = self.ctx.fx(x.fun)
        return Series(fx, fx.series(x))

    def fn_delta(self, node, x):
        k = value_kind(x)
        if k in ("sym", "cyc"):
            return x.model.delta(x)
        if k == "fun":
            return self.ctx.ofun(x.fun).delta(x)
        if k == "series":
            return Series(x.fx, x.fx.delta(x.value))
        raise self.err(node, f"delta does not apply to {k}")

    def fn_d(self, node, x):
        k = value_kind(x)
        if k in ("sym", "cyc"):
            return x.model.d(x)
        if k == "operad":
            return differential(x.op, x)
        if k == "fun":
            return self.ctx.ofun(x.fun).d(x)
        if k == "series":
            return Series(x.fx, x.fx.d(x.value))
        raise self.err(node, f"d does not apply to {k}")

    def fn_bracket(self, node, x, y):
        kx, ky = value_kind(x), value_kind(y)
        if kx in ("sym", "cyc") and kx == ky:
            return x.model.bracket(x, y)
        if kx == ky == "fun":
            return self.ctx.ofun(x.fun).bracket(x, y)
        if {kx, ky} <= {"fun", "series"}:
            x, y = self.as_series(node, x), self.as_series(node, y)
            return Series(x.fx, x.fx.bracket(x.value, y.value))
        raise self.err(node, f"bracket does not apply to {kx} and {ky}")

    def star(self, node, x, y):
        if value_kind(x) == value_kind(y) == "fun":
            if x.fun != y.fun:
                raise self.err(node, "elements of different Fun spaces")
            return self.ctx.ofun(x.fun).star(x, y)
        x, y = self.as_series(node, x), self.as_series(node, y)
        return Series(x.fx, x.fx.star(x.value, y.value))

    def fn_star(self, node, x, y):
        for v in (x, y):
            self.need(node, v, "fun", "series")
        return self.star(node, x, y)

    def fn_sharp(self, node, x):
        k = value_kind(x)
        if k == "operad":
            return cs1(x.op, x)
        if k == "fun":
            return self.ctx.ofun(x.fun).sharp(x)
        if k == "series":
            return Series(x.fx, x.fx.normalize(x.fx.ofun.sharp(x.value)))
        raise self.err(node, f"sharp does not apply to {k}")

    def fn_cs1(self, node, x):
        self.need(node, x, "operad")
        return cs1(x.op, x)

    def fn_cs2(self, node, x, y):
        self.need(node, x, "operad")
        self.need(node, y, "operad")
        return cs2(x.op, x, y)

    def fn_iota(self, node, x):
        self.need(node, x, "fun")
        fx = self.ctx.fx(x.fun)
        return Series(fx, fx.iota(x))

    def fn_exp(self, node, x):
        x = self.as_series(node, x)
        return Series(x.fx, x.fx.exp(x.value))

    def fn_log(self, node, x):
        x = self.as_series(node, x)
        return Series(x.fx, x.fx.log(x.value))

    def fn_orb(self, node, x):
        from .series import UNIT
        self.need(node, x, "fun")
        return type(x)(x.fun, LinComb._wrap({k: c * (1 if k == UNIT else math.factorial(k[0]))
                                             for k, c in x.terms.items()}))

    def _expanded(self, node, x):
        from .series import UNIT
        self.need(node, x, "fun")
        if UNIT in x.terms:
            raise self.err(node, f"{node.name} does not apply to the unit")
        return self.ctx.ofun(x.fun).expand(x)

    def _zero_model(self, x, name):
        from .models import ModelElement
        if isinstance(x, Formal) and is_zero_value(x):
            return ModelElement(self.ctx.model(name), LinComb())
        return None

    def fn_psi(self, node, x):
        from .models import psi
        z = self._zero_model(x, "sym")
        return z if z is not None else psi(x.fun, self._expanded(node, x))

    def fn_theta(self, node, x):
        from .models import theta
        z = self._zero_model(x, "cyc")
        return z if z is not None else theta(x.fun, self._expanded(node, x))
