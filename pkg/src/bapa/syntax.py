"""Concrete syntax: lexer, parser and printer for the formula language.

The grammar is ASCII-only and keyword-based.  Connectives are ``~ & | => <=>``
with the usual precedences; quantifiers are written ``ex y:set. F`` (the form
``ex set y. F`` is also accepted) and extend as far right as possible, so they
must be parenthesized when used as an operand.  Set terms use ``union``,
``inter`` and ``compl(b)``; ``union`` and ``inter`` have equal precedence and
mixing them without parentheses is rejected rather than silently picking a
reading.  Set relations have their own keywords (``seteq``, ``subseteq``) so
``=`` and ``<`` always mean integer comparison, except that ``b1 < b2``
between set terms is accepted as strict-inclusion sugar.

Integer comparisons ``<= > >=``, two-sided set inclusion via ``<``, and
``eqcard(b1,b2)`` are parsing sugar only; the AST stores ``=`` and ``<``.
Open formulas must declare their variables in a ``free x:set, k:int.``
preamble; the printer regenerates that preamble, so printing and parsing
round-trip, including for open formulas.  ``#`` starts a comment to the end
of the line.
"""

from __future__ import annotations

from dataclasses import dataclass

from bapa.core import (
    Add, And, Card, Compl, Dvd, EmptySet, Exists, FalseF, Fin, FinUniv,
    Forall, Formula, Iff, Implies, IntConst, IntEq, IntLt, IntTerm, IntVar,
    Inter, MaxCard, Mul, Not, Or, ParseError, PropVar, SetEq, SetTerm, SetVar,
    Sort, Sub, SubsetEq, TrueF, Union, UnivSet, free_vars,
)

import re


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int


KEYWORDS = {
    "free", "ex", "all", "set", "int", "prop", "true", "false",
    "fin", "finU", "seteq", "subseteq", "union", "inter", "compl",
    "empty", "univ", "card", "dvd", "eqcard", "MAXC",
}

_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r\n]+)
      | (?P<comment>\#[^\n]*)
      | (?P<int>\d+)
      | (?P<name>[A-Za-z_][A-Za-z0-9_]*'?)
      | (?P<op><=>|=>|<=|>=|:=|[()<>=~&|+\-*,.:;{}])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "name", "op", "eof"
    text: str
    span: SourceSpan


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line = 1
    linestart = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(pos, pos + 1, line, pos - linestart + 1)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        tok = m.group()
        if kind in ("ws", "comment"):
            for i, ch in enumerate(tok):
                if ch == "\n":
                    line += 1
                    linestart = pos + i + 1
        else:
            span = SourceSpan(pos, m.end(), line, pos - linestart + 1)
            tokens.append(Token(kind, tok, span))
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(pos, pos, line, pos - linestart + 1)))
    return tokens


class _Fail(Exception):
    """Internal backtracking signal; never escapes the parser."""

    def __init__(self, message: str, pos: int):
        self.message = message
        self.pos = pos


_SORTS = {"set": Sort.SET, "int": Sort.INT, "prop": Sort.PROP}


class Parser:
    """Recursive-descent parser with backtracking over a token list.

    Alternatives are tried in grammar order; when everything fails, the
    error reported is the one from the alternative that got furthest.
    Variable references are resolved against the sorts currently in scope,
    which is what disambiguates e.g. ``x < y`` between the set and integer
    readings.
    """

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.worst: tuple[int, str] = (-1, "syntax error")

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def fail(self, message: str) -> "_Fail":
        if self.pos > self.worst[0]:
            self.worst = (self.pos, message)
        return _Fail(message, self.pos)

    def expect_op(self, text: str) -> Token:
        t = self.peek()
        if t.kind == "op" and t.text == text:
            return self.next()
        raise self.fail(f"expected {text!r}")

    def at_op(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "op" and t.text == text

    def at_word(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "name" and t.text == word

    def take_word(self, word: str) -> bool:
        if self.at_word(word):
            self.next()
            return True
        return False

    def error(self) -> ParseError:
        pos, message = self.worst
        tok = self.tokens[min(max(pos, 0), len(self.tokens) - 1)]
        at = f" (at {tok.text!r})" if tok.kind != "eof" else " (at end of input)"
        return ParseError(message + at, tok.span)

    # -- declarations ------------------------------------------------------

    def parse_decl_list(self) -> list[tuple[str, Sort]]:
        """Either ``x:set, k:int`` or ``set x, int k`` (forms can't mix)."""
        decls = []
        sort_first = self.peek().kind == "name" and self.peek().text in _SORTS
        while True:
            if sort_first:
                t = self.next()
                if t.kind != "name" or t.text not in _SORTS:
                    raise self.fail("expected a sort (set, int or prop)")
                sort = _SORTS[t.text]
                name = self.parse_varname()
            else:
                name = self.parse_varname()
                self.expect_op(":")
                t = self.next()
                if t.kind != "name" or t.text not in _SORTS:
                    raise self.fail("expected a sort (set, int or prop)")
                sort = _SORTS[t.text]
            if any(name == seen for seen, _ in decls):
                raise self.fail(f"'{name}' is already declared in this list")
            decls.append((name, sort))
            if not self.at_op(","):
                break
            self.next()
        return decls

    def parse_varname(self) -> str:
        t = self.peek()
        if t.kind == "name" and t.text not in KEYWORDS:
            return self.next().text
        raise self.fail("expected a variable name")

    # -- formulas ----------------------------------------------------------

    def parse_input(self) -> Formula:
        env: dict[str, Sort] = {}
        if self.at_word("free"):
            self.next()
            for name, sort in self.parse_decl_list():
                env[name] = sort
            self.expect_op(".")
        f = self.parse_formula(env)
        if self.peek().kind != "eof":
            raise self.fail("unexpected trailing input")
        return f

    def parse_formula(self, env: dict[str, Sort]) -> Formula:
        if self.at_word("ex") or self.at_word("all"):
            kind = self.next().text
            decls = self.parse_decl_list()
            self.expect_op(".")
            body = self.parse_formula({**env, **dict(decls)})
            ctor = Exists if kind == "ex" else Forall
            for name, sort in reversed(decls):
                body = ctor(name, sort, body)
            return body
        return self.parse_iff(env)

    def parse_iff(self, env) -> Formula:
        f = self.parse_imp(env)
        while self.at_op("<=>"):
            self.next()
            f = Iff(f, self.parse_imp(env))
        return f

    def parse_imp(self, env) -> Formula:
        f = self.parse_or(env)
        if self.at_op("=>"):
            self.next()
            return Implies(f, self.parse_imp(env))
        return f

    def parse_or(self, env) -> Formula:
        f = self.parse_and(env)
        while self.at_op("|"):
            self.next()
            f = Or(f, self.parse_and(env))
        return f

    def parse_and(self, env) -> Formula:
        f = self.parse_not(env)
        while self.at_op("&"):
            self.next()
            f = And(f, self.parse_not(env))
        return f

    def parse_not(self, env) -> Formula:
        if self.at_op("~"):
            self.next()
            return Not(self.parse_not(env))
        # An atom and a parenthesized formula can both start with "(";
        # try the atom reading first, then the formula reading.
        save = self.pos
        try:
            return self.parse_atom(env)
        except _Fail:
            self.pos = save
        if self.at_op("("):
            self.next()
            f = self.parse_formula(env)
            self.expect_op(")")
            return f
        raise self.fail("expected a formula")

    def parse_atom(self, env) -> Formula:
        t = self.peek()
        if t.kind == "name":
            if t.text == "true":
                self.next()
                return TrueF()
            if t.text == "false":
                self.next()
                return FalseF()
            if t.text == "finU":
                self.next()
                return FinUniv()
            if t.text == "fin":
                self.next()
                self.expect_op("(")
                b = self.parse_setterm(env)
                self.expect_op(")")
                return Fin(b)
            if t.text == "dvd":
                self.next()
                self.expect_op("(")
                c = self.peek()
                if c.kind != "int":
                    raise self.fail("expected an integer divisor")
                self.next()
                self.expect_op(",")
                arg = self.parse_intterm(env)
                self.expect_op(")")
                if int(c.text) <= 0:
                    raise ParseError("divisor must be positive", c.span)
                return Dvd(int(c.text), arg)
            if t.text == "eqcard":
                self.next()
                self.expect_op("(")
                b1 = self.parse_setterm(env)
                self.expect_op(",")
                b2 = self.parse_setterm(env)
                self.expect_op(")")
                return IntEq(Card(b1), Card(b2))
        save = self.pos
        try:
            a = self.parse_setterm(env)
            if self.take_word("seteq"):
                return SetEq(a, self.parse_setterm(env))
            if self.take_word("subseteq"):
                return SubsetEq(a, self.parse_setterm(env))
            if self.at_op("<"):
                self.next()
                b = self.parse_setterm(env)
                return And(SubsetEq(a, b), Not(SetEq(a, b)))
            raise self.fail("expected seteq or subseteq")
        except _Fail:
            self.pos = save
        try:
            a = self.parse_intterm(env)
            t = self.peek()
            if t.kind == "op" and t.text in ("=", "<", "<=", ">", ">="):
                self.next()
                b = self.parse_intterm(env)
                return {
                    "=": lambda: IntEq(a, b),
                    "<": lambda: IntLt(a, b),
                    "<=": lambda: IntLt(a, Add(b, IntConst(1))),
                    ">": lambda: IntLt(b, a),
                    ">=": lambda: IntLt(b, Add(a, IntConst(1))),
                }[t.text]()
            raise self.fail("expected an integer comparison")
        except _Fail:
            self.pos = save
        # last resort: a propositional variable
        t = self.peek()
        if t.kind == "name" and t.text not in KEYWORDS:
            sort = env.get(t.text)
            if sort is Sort.PROP:
                self.next()
                return PropVar(t.text)
            if sort is None:
                raise self.fail(f"unbound variable {t.text!r}")
        raise self.fail("expected an atom")

    # -- terms -------------------------------------------------------------

    def parse_setterm(self, env) -> SetTerm:
        a = self.parse_setatom(env)
        op = None
        while self.at_word("union") or self.at_word("inter"):
            word = self.next().text
            if op is not None and word != op:
                raise ParseError(
                    "mixed union/inter chain needs parentheses",
                    self.tokens[self.pos - 1].span)
            op = word
            b = self.parse_setatom(env)
            a = Union(a, b) if word == "union" else Inter(a, b)
        return a

    def parse_setatom(self, env) -> SetTerm:
        t = self.peek()
        if t.kind == "name":
            if t.text == "empty":
                self.next()
                return EmptySet()
            if t.text == "univ":
                self.next()
                return UnivSet()
            if t.text == "compl":
                self.next()
                self.expect_op("(")
                b = self.parse_setterm(env)
                self.expect_op(")")
                return Compl(b)
            if t.text not in KEYWORDS:
                sort = env.get(t.text)
                if sort is Sort.SET:
                    self.next()
                    return SetVar(t.text)
                if sort is None:
                    raise self.fail(f"unbound variable {t.text!r}")
                raise self.fail(f"{t.text!r} is not a set variable")
        if self.at_op("("):
            self.next()
            b = self.parse_setterm(env)
            self.expect_op(")")
            return b
        raise self.fail("expected a set term")

    def parse_intterm(self, env) -> IntTerm:
        a = self.parse_intatom(env)
        while self.at_op("+") or self.at_op("-"):
            op = self.next().text
            b = self.parse_intatom(env)
            a = Add(a, b) if op == "+" else Sub(a, b)
        return a

    def parse_intatom(self, env) -> IntTerm:
        t = self.peek()
        neg = False
        if t.kind == "op" and t.text == "-":
            # a literal negative constant (only constants can be negated)
            nxt = self.tokens[self.pos + 1]
            if nxt.kind == "int":
                self.next()
                t = self.peek()
                neg = True
            else:
                raise self.fail("expected an integer term")
        if t.kind == "int":
            self.next()
            value = -int(t.text) if neg else int(t.text)
            if self.at_op("*"):
                self.next()
                return Mul(value, self.parse_intatom(env))
            return IntConst(value)
        if t.kind == "name":
            if t.text == "MAXC":
                self.next()
                return MaxCard()
            if t.text == "card":
                self.next()
                self.expect_op("(")
                b = self.parse_setterm(env)
                self.expect_op(")")
                return Card(b)
            if t.text not in KEYWORDS:
                sort = env.get(t.text)
                if sort is Sort.INT:
                    self.next()
                    return IntVar(t.text)
                if sort is None:
                    raise self.fail(f"unbound variable {t.text!r}")
                raise self.fail(f"{t.text!r} is not an integer variable")
        if self.at_op("("):
            self.next()
            a = self.parse_intterm(env)
            self.expect_op(")")
            return a
        raise self.fail("expected an integer term")


def parse_formula(text: str) -> Formula:
    parser = Parser(tokenize(text))
    try:
        return parser.parse_input()
    except _Fail:
        raise parser.error() from None


# ------------------------------------------------------------------ printing

# precedence levels: 0 quantifier, 1 iff, 2 imp, 3 or, 4 and, 5 not, 6 atom
def _fmt(f: Formula, minprec: int) -> str:
    if isinstance(f, (Exists, Forall)):
        kw = "ex" if isinstance(f, Exists) else "all"
        s = f"{kw} {f.var}:{f.sort}. {_fmt(f.body, 0)}"
        return f"({s})" if minprec > 0 else s
    if isinstance(f, Iff):
        s = f"{_fmt(f.a, 1)} <=> {_fmt(f.b, 2)}"
        return f"({s})" if minprec > 1 else s
    if isinstance(f, Implies):
        s = f"{_fmt(f.a, 3)} => {_fmt(f.b, 2)}"
        return f"({s})" if minprec > 2 else s
    if isinstance(f, Or):
        s = f"{_fmt(f.a, 3)} | {_fmt(f.b, 4)}"
        return f"({s})" if minprec > 3 else s
    if isinstance(f, And):
        s = f"{_fmt(f.a, 4)} & {_fmt(f.b, 5)}"
        return f"({s})" if minprec > 4 else s
    if isinstance(f, Not):
        return f"~{_fmt(f.a, 5)}"
    return _fmt_atom(f)


def _fmt_atom(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, FinUniv):
        return "finU"
    if isinstance(f, PropVar):
        return f.name
    if isinstance(f, Fin):
        return f"fin({_fmt_set(f.arg, 0)})"
    if isinstance(f, SetEq):
        return f"{_fmt_set(f.a, 0)} seteq {_fmt_set(f.b, 0)}"
    if isinstance(f, SubsetEq):
        return f"{_fmt_set(f.a, 0)} subseteq {_fmt_set(f.b, 0)}"
    if isinstance(f, IntEq):
        return f"{_fmt_int(f.a, 0)} = {_fmt_int(f.b, 0)}"
    if isinstance(f, IntLt):
        return f"{_fmt_int(f.a, 0)} < {_fmt_int(f.b, 0)}"
    if isinstance(f, Dvd):
        return f"dvd({f.c}, {_fmt_int(f.t, 0)})"
    raise TypeError(f"cannot print {f!r}")


def _fmt_set(t: SetTerm, minprec: int) -> str:
    # precedence: 0 top, 1 operand of union/inter chain
    if isinstance(t, SetVar):
        return t.name
    if isinstance(t, EmptySet):
        return "empty"
    if isinstance(t, UnivSet):
        return "univ"
    if isinstance(t, Compl):
        return f"compl({_fmt_set(t.a, 0)})"
    if isinstance(t, (Union, Inter)):
        word = "union" if isinstance(t, Union) else "inter"
        # chains of one operator print flat; anything else gets parens
        left = t.a
        lefts = type(t) is type(left)
        a = _fmt_set(left, 0 if lefts else 1)
        b = _fmt_set(t.b, 1)
        s = f"{a} {word} {b}"
        return f"({s})" if minprec > 0 else s
    raise TypeError(f"cannot print set term {t!r}")


def _fmt_int(t: IntTerm, minprec: int) -> str:
    # precedence: 0 top, 1 operand of +/- chain, 2 operand of *
    if isinstance(t, IntVar):
        return t.name
    if isinstance(t, IntConst):
        s = str(t.value)
        return f"({s})" if t.value < 0 and minprec > 1 else s
    if isinstance(t, MaxCard):
        return "MAXC"
    if isinstance(t, Card):
        return f"card({_fmt_set(t.arg, 0)})"
    if isinstance(t, Mul):
        s = f"{t.coeff} * {_fmt_int(t.a, 2)}"
        return f"({s})" if minprec > 1 else s
    if isinstance(t, (Add, Sub)):
        op = "+" if isinstance(t, Add) else "-"
        lefts = isinstance(t.a, (Add, Sub))
        a = _fmt_int(t.a, 0 if lefts else 1)
        b = _fmt_int(t.b, 1)
        s = f"{a} {op} {b}"
        return f"({s})" if minprec > 0 else s
    raise TypeError(f"cannot print int term {t!r}")


def print_formula(f: Formula) -> str:
    """Render f back to text; open formulas get a ``free`` preamble."""
    fv = free_vars(f)
    prefix = ""
    if fv:
        decls = ", ".join(f"{name}:{sort}" for name, sort in fv.items())
        prefix = f"free {decls}. "
    return prefix + _fmt(f, 0)
