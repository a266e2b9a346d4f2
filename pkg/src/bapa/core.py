"""Term and formula representation for sets with cardinality constraints.

The language has three sorts: sets (subsets of an unnamed universe), integers,
and propositions.  Set terms are built from variables, the empty set, the
universe, union, intersection and complement.  Integer terms are linear:
variables, constants, the universe cardinality ``maxc``, sums, differences,
constant multiples, and cardinalities ``card(b)`` of set terms.  Atoms compare
set terms (equality, inclusion), compare integer terms (equality, strict
less-than), or assert divisibility by a positive constant.  On top of that the
usual connectives and quantifiers over all three sorts.

Everything is an immutable tree node; equality and hashing are structural, so
nodes can be shared and used as dictionary keys.  Hash values are cached on
first use because the same subterm tends to be hashed many times once trees
get large.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import Iterable, Iterator


class BapaError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(BapaError):
    def __init__(self, message: str, span=None):
        self.span = span  # a syntax.SourceSpan when raised by the parser
        if span is not None:
            message = f"{span.line}:{span.column}: {message}"
        super().__init__(message)


class SortError(BapaError):
    """A name is used at more than one sort, or at the wrong sort."""


class FreeVarsError(BapaError):
    """An operation that needs a closed formula received an open one."""


class ContractViolation(BapaError):
    """Input falls outside the fragment an operation is defined on."""


class ResourceError(BapaError):
    """A guard refused to start a computation whose cost estimate is too high."""


class Sort(enum.Enum):
    SET = "set"
    INT = "int"
    PROP = "prop"

    def __str__(self) -> str:
        return self.value


def _node_hash(self):
    h = self.__dict__.get("_hashcache")
    if h is None:
        fields = tuple(getattr(self, f.name) for f in dataclasses.fields(self))
        h = hash((type(self).__name__, fields))
        object.__setattr__(self, "_hashcache", h)
    return h


def _node(cls):
    cls = dataclass(frozen=True)(cls)
    cls.__hash__ = _node_hash
    return cls


class SetTerm:
    pass


class IntTerm:
    pass


class Formula:
    pass


# ---------------------------------------------------------------- set terms

@_node
class SetVar(SetTerm):
    name: str


@_node
class EmptySet(SetTerm):
    pass


@_node
class UnivSet(SetTerm):
    pass


@_node
class Union(SetTerm):
    a: SetTerm
    b: SetTerm


@_node
class Inter(SetTerm):
    a: SetTerm
    b: SetTerm


@_node
class Compl(SetTerm):
    a: SetTerm


# ------------------------------------------------------------ integer terms

@_node
class IntVar(IntTerm):
    name: str


@_node
class IntConst(IntTerm):
    value: int


@_node
class MaxCard(IntTerm):
    """The cardinality of the universe, written ``maxc``."""


@_node
class Add(IntTerm):
    a: IntTerm
    b: IntTerm


@_node
class Sub(IntTerm):
    a: IntTerm
    b: IntTerm


@_node
class Mul(IntTerm):
    """Multiplication by an integer constant; the language is linear."""

    coeff: int
    a: IntTerm


@_node
class Card(IntTerm):
    arg: SetTerm


# -------------------------------------------------------------------- formulas

@_node
class TrueF(Formula):
    pass


@_node
class FalseF(Formula):
    pass


@_node
class PropVar(Formula):
    name: str


@_node
class FinUniv(Formula):
    """Proposition that the universe is finite, written ``finu``."""


@_node
class Fin(Formula):
    """Finiteness of a set term, written ``fin(b)``."""

    arg: SetTerm


@_node
class SetEq(Formula):
    a: SetTerm
    b: SetTerm


@_node
class SubsetEq(Formula):
    a: SetTerm
    b: SetTerm


@_node
class IntEq(Formula):
    a: IntTerm
    b: IntTerm


@_node
class IntLt(Formula):
    a: IntTerm
    b: IntTerm


@_node
class Dvd(Formula):
    """``dvd(c, t)``: the positive constant c divides the term t."""

    c: int
    t: IntTerm


@_node
class Not(Formula):
    a: Formula


@_node
class And(Formula):
    a: Formula
    b: Formula


@_node
class Or(Formula):
    a: Formula
    b: Formula


@_node
class Implies(Formula):
    a: Formula
    b: Formula


@_node
class Iff(Formula):
    a: Formula
    b: Formula


@_node
class Exists(Formula):
    var: str
    sort: Sort
    body: Formula


@_node
class Forall(Formula):
    var: str
    sort: Sort
    body: Formula


TRUE = TrueF()
FALSE = FalseF()

QUANTIFIERS = (Exists, Forall)


def conj(parts: Iterable[Formula]) -> Formula:
    """Left-associated conjunction; the empty conjunction is true."""
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    """Left-associated disjunction; the empty disjunction is false."""
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def conjuncts(f: Formula) -> list[Formula]:
    """Flatten nested conjunctions into a list (the inverse of conj)."""
    out: list[Formula] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, And):
            stack.append(g.b)
            stack.append(g.a)
        else:
            out.append(g)
    return out


def disjuncts(f: Formula) -> list[Formula]:
    out: list[Formula] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Or):
            stack.append(g.b)
            stack.append(g.a)
        else:
            out.append(g)
    return out


# ------------------------------------------------------------- traversal

def _term_vars(t: SetTerm | IntTerm, bound: frozenset[str], out: dict[str, Sort]) -> None:
    if isinstance(t, SetVar):
        if t.name not in bound and t.name not in out:
            out[t.name] = Sort.SET
    elif isinstance(t, (Union, Inter)):
        _term_vars(t.a, bound, out)
        _term_vars(t.b, bound, out)
    elif isinstance(t, Compl):
        _term_vars(t.a, bound, out)
    elif isinstance(t, IntVar):
        if t.name not in bound and t.name not in out:
            out[t.name] = Sort.INT
    elif isinstance(t, (Add, Sub)):
        _term_vars(t.a, bound, out)
        _term_vars(t.b, bound, out)
    elif isinstance(t, Mul):
        _term_vars(t.a, bound, out)
    elif isinstance(t, Card):
        _term_vars(t.arg, bound, out)
    # EmptySet, UnivSet, IntConst, MaxCard: nothing


def free_vars(f: Formula) -> dict[str, Sort]:
    """Free variables of f with their sorts, in first-occurrence order."""
    out: dict[str, Sort] = {}

    def walk(g: Formula, bound: frozenset[str]) -> None:
        if isinstance(g, (SetEq, SubsetEq)):
            _term_vars(g.a, bound, out)
            _term_vars(g.b, bound, out)
        elif isinstance(g, (IntEq, IntLt)):
            _term_vars(g.a, bound, out)
            _term_vars(g.b, bound, out)
        elif isinstance(g, Dvd):
            _term_vars(g.t, bound, out)
        elif isinstance(g, Fin):
            _term_vars(g.arg, bound, out)
        elif isinstance(g, PropVar):
            if g.name not in bound and g.name not in out:
                out[g.name] = Sort.PROP
        elif isinstance(g, Not):
            walk(g.a, bound)
        elif isinstance(g, (And, Or, Implies, Iff)):
            walk(g.a, bound)
            walk(g.b, bound)
        elif isinstance(g, QUANTIFIERS):
            walk(g.body, bound | {g.var})
        # TrueF, FalseF, FinUniv: nothing

    walk(f, frozenset())
    return out


def subformulas(f: Formula) -> Iterator[Formula]:
    """All formula nodes of f, preorder."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Not):
            stack.append(g.a)
        elif isinstance(g, (And, Or, Implies, Iff)):
            stack.append(g.b)
            stack.append(g.a)
        elif isinstance(g, QUANTIFIERS):
            stack.append(g.body)


def _term_size(t) -> int:
    if isinstance(t, (SetVar, EmptySet, UnivSet, IntVar, IntConst, MaxCard)):
        return 1
    if isinstance(t, (Union, Inter, Add, Sub)):
        return 1 + _term_size(t.a) + _term_size(t.b)
    if isinstance(t, (Compl, Mul)):
        return 1 + _term_size(t.a)
    if isinstance(t, Card):
        return 1 + _term_size(t.arg)
    raise TypeError(f"not a term: {t!r}")


def size(f: Formula) -> int:
    """Number of AST nodes, terms included."""
    n = 0
    for g in subformulas(f):
        n += 1
        if isinstance(g, (SetEq, SubsetEq, IntEq, IntLt)):
            n += _term_size(g.a) + _term_size(g.b)
        elif isinstance(g, Dvd):
            n += _term_size(g.t)
        elif isinstance(g, Fin):
            n += _term_size(g.arg)
    return n


def _prefix_kinds(f: Formula, pol: bool, out: list[tuple[str, Sort]]) -> None:
    # The quantifier kinds of f as they would appear after prenexing, with
    # polarity applied (a Forall under negation surfaces as an Exists).  Iff
    # is counted as the pair of implications prenexing would expand it to.
    if isinstance(f, Forall):
        out.append(("A" if pol else "E", f.sort))
        _prefix_kinds(f.body, pol, out)
    elif isinstance(f, Exists):
        out.append(("E" if pol else "A", f.sort))
        _prefix_kinds(f.body, pol, out)
    elif isinstance(f, Not):
        _prefix_kinds(f.a, not pol, out)
    elif isinstance(f, (And, Or)):
        _prefix_kinds(f.a, pol, out)
        _prefix_kinds(f.b, pol, out)
    elif isinstance(f, Implies):
        _prefix_kinds(f.a, not pol, out)
        _prefix_kinds(f.b, pol, out)
    elif isinstance(f, Iff):
        if any(isinstance(g, QUANTIFIERS) for g in subformulas(f)):
            _prefix_kinds(f.a, not pol, out)
            _prefix_kinds(f.b, pol, out)
            _prefix_kinds(f.b, not pol, out)
            _prefix_kinds(f.a, pol, out)


@dataclass(frozen=True)
class Measure:
    size: int
    set_vars: int
    int_vars: int
    alternations: int

    def as_dict(self) -> dict[str, int]:
        return dataclasses.asdict(self)


def measure(f: Formula) -> Measure:
    """Size and quantifier statistics of a formula.

    ``set_vars``/``int_vars`` count quantifier occurrences of each sort (a
    propositional quantifier counts as an int quantifier for this purpose,
    since that is how it is decided).  ``alternations`` is the number of
    kind switches in the quantifier prefix the formula would have after
    prenexing, so an exists nested under a negation counts as a forall.
    """
    kinds: list[tuple[str, Sort]] = []
    _prefix_kinds(f, True, kinds)
    alts = sum(1 for i in range(1, len(kinds)) if kinds[i][0] != kinds[i - 1][0])
    nset = sum(1 for _, s in kinds if s is Sort.SET)
    nint = len(kinds) - nset
    return Measure(size=size(f), set_vars=nset, int_vars=nint, alternations=alts)


# --------------------------------------------------------------- check_sorted

def check_sorted(f: Formula, env: dict[str, Sort] | None = None) -> None:
    """Check that every name is used at a single sort.

    ``env`` fixes sorts for free variables; free names not in env adopt the
    sort of their first use.  Raises SortError on any clash, including a
    bound variable used at the wrong sort inside its own scope.
    """
    seen: dict[str, Sort] = dict(env or {})

    def use(name: str, sort: Sort, scope: dict[str, Sort]) -> None:
        if name in scope:
            if scope[name] is not sort:
                raise SortError(f"{name} is {scope[name]} here, used as {sort}")
        elif name in seen:
            if seen[name] is not sort:
                raise SortError(f"{name} used as both {seen[name]} and {sort}")
        else:
            seen[name] = sort

    def walk_t(t, scope: dict[str, Sort]) -> None:
        if isinstance(t, SetVar):
            use(t.name, Sort.SET, scope)
        elif isinstance(t, IntVar):
            use(t.name, Sort.INT, scope)
        elif isinstance(t, (Union, Inter, Add, Sub)):
            walk_t(t.a, scope)
            walk_t(t.b, scope)
        elif isinstance(t, (Compl, Mul)):
            walk_t(t.a, scope)
        elif isinstance(t, Card):
            walk_t(t.arg, scope)

    def walk(g: Formula, scope: dict[str, Sort]) -> None:
        if isinstance(g, (SetEq, SubsetEq, IntEq, IntLt)):
            walk_t(g.a, scope)
            walk_t(g.b, scope)
        elif isinstance(g, Dvd):
            walk_t(g.t, scope)
        elif isinstance(g, Fin):
            walk_t(g.arg, scope)
        elif isinstance(g, PropVar):
            use(g.name, Sort.PROP, scope)
        elif isinstance(g, Not):
            walk(g.a, scope)
        elif isinstance(g, (And, Or, Implies, Iff)):
            walk(g.a, scope)
            walk(g.b, scope)
        elif isinstance(g, QUANTIFIERS):
            walk(g.body, {**scope, g.var: g.sort})

    walk(f, {})


# ----------------------------------------------------------------- substitute

def fresh(base: str, avoid: Iterable[str]) -> str:
    """base if unused, else base1, base2, ... (first name not in avoid)."""
    avoid = set(avoid)
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


Replacement = "SetTerm | IntTerm | Formula"


def substitute(f: Formula, name: str, sort: Sort, repl) -> Formula:
    """Capture-avoiding substitution of repl for the free variable name.

    The replacement must match the sort: a SetTerm for SET, an IntTerm for
    INT, a Formula for PROP.  Binders that would capture a free variable of
    the replacement are renamed first.
    """
    wanted = {Sort.SET: SetTerm, Sort.INT: IntTerm, Sort.PROP: Formula}[sort]
    if not isinstance(repl, wanted):
        raise SortError(
            f"replacement for {sort.name.lower()} variable '{name}' must be "
            f"a {wanted.__name__}, got {type(repl).__name__}")
    if sort is Sort.PROP:
        repl_free = set(free_vars(repl))
    else:
        repl_free = _collect_names(repl)

    def sub_t(t):
        if isinstance(t, SetVar):
            return repl if (sort is Sort.SET and t.name == name) else t
        if isinstance(t, IntVar):
            return repl if (sort is Sort.INT and t.name == name) else t
        if isinstance(t, Union):
            return Union(sub_t(t.a), sub_t(t.b))
        if isinstance(t, Inter):
            return Inter(sub_t(t.a), sub_t(t.b))
        if isinstance(t, Compl):
            return Compl(sub_t(t.a))
        if isinstance(t, Add):
            return Add(sub_t(t.a), sub_t(t.b))
        if isinstance(t, Sub):
            return Sub(sub_t(t.a), sub_t(t.b))
        if isinstance(t, Mul):
            return Mul(t.coeff, sub_t(t.a))
        if isinstance(t, Card):
            return Card(sub_t(t.arg))
        return t

    def sub(g: Formula) -> Formula:
        if isinstance(g, (TrueF, FalseF, FinUniv)):
            return g
        if isinstance(g, PropVar):
            return repl if (sort is Sort.PROP and g.name == name) else g
        if isinstance(g, SetEq):
            return SetEq(sub_t(g.a), sub_t(g.b))
        if isinstance(g, SubsetEq):
            return SubsetEq(sub_t(g.a), sub_t(g.b))
        if isinstance(g, IntEq):
            return IntEq(sub_t(g.a), sub_t(g.b))
        if isinstance(g, IntLt):
            return IntLt(sub_t(g.a), sub_t(g.b))
        if isinstance(g, Dvd):
            return Dvd(g.c, sub_t(g.t))
        if isinstance(g, Fin):
            return Fin(sub_t(g.arg))
        if isinstance(g, Not):
            return Not(sub(g.a))
        if isinstance(g, And):
            return And(sub(g.a), sub(g.b))
        if isinstance(g, Or):
            return Or(sub(g.a), sub(g.b))
        if isinstance(g, Implies):
            return Implies(sub(g.a), sub(g.b))
        if isinstance(g, Iff):
            return Iff(sub(g.a), sub(g.b))
        if isinstance(g, QUANTIFIERS):
            if g.var == name:
                return g
            if g.var in repl_free:
                # rename the binder out of the way before descending
                taken = repl_free | set(free_vars(g.body)) | {name}
                v2 = fresh(g.var, taken)
                vrepl = {Sort.SET: SetVar(v2), Sort.INT: IntVar(v2),
                         Sort.PROP: PropVar(v2)}[g.sort]
                body = substitute(g.body, g.var, g.sort, vrepl)
                return type(g)(v2, g.sort, sub(body))
            return type(g)(g.var, g.sort, sub(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return sub(f)


def _collect_names(t) -> set[str]:
    out: dict[str, Sort] = {}
    _term_vars(t, frozenset(), out)
    return set(out)


# ---------------------------------------------------------------- transform

def transform(f: Formula, *, term_set=None, term_int=None, form=None) -> Formula:
    """Rebuild f bottom-up, applying the given hooks at each node.

    Hooks receive an already-rebuilt node and return a replacement (or the
    node itself).  This is purely structural -- it does not know about
    binding, so hooks should only introduce closed terms or names that are
    globally fresh.
    """
    ts = term_set or (lambda t: t)
    ti = term_int or (lambda t: t)
    ff = form or (lambda g: g)

    def rt_s(t):
        if isinstance(t, Union):
            t = Union(rt_s(t.a), rt_s(t.b))
        elif isinstance(t, Inter):
            t = Inter(rt_s(t.a), rt_s(t.b))
        elif isinstance(t, Compl):
            t = Compl(rt_s(t.a))
        return ts(t)

    def rt_i(t):
        if isinstance(t, Add):
            t = Add(rt_i(t.a), rt_i(t.b))
        elif isinstance(t, Sub):
            t = Sub(rt_i(t.a), rt_i(t.b))
        elif isinstance(t, Mul):
            t = Mul(t.coeff, rt_i(t.a))
        elif isinstance(t, Card):
            t = Card(rt_s(t.arg))
        return ti(t)

    def walk(g: Formula) -> Formula:
        if isinstance(g, SetEq):
            g = SetEq(rt_s(g.a), rt_s(g.b))
        elif isinstance(g, SubsetEq):
            g = SubsetEq(rt_s(g.a), rt_s(g.b))
        elif isinstance(g, IntEq):
            g = IntEq(rt_i(g.a), rt_i(g.b))
        elif isinstance(g, IntLt):
            g = IntLt(rt_i(g.a), rt_i(g.b))
        elif isinstance(g, Dvd):
            g = Dvd(g.c, rt_i(g.t))
        elif isinstance(g, Fin):
            g = Fin(rt_s(g.arg))
        elif isinstance(g, Not):
            g = Not(walk(g.a))
        elif isinstance(g, And):
            g = And(walk(g.a), walk(g.b))
        elif isinstance(g, Or):
            g = Or(walk(g.a), walk(g.b))
        elif isinstance(g, Implies):
            g = Implies(walk(g.a), walk(g.b))
        elif isinstance(g, Iff):
            g = Iff(walk(g.a), walk(g.b))
        elif isinstance(g, QUANTIFIERS):
            g = type(g)(g.var, g.sort, walk(g.body))
        return ff(g)

    return walk(f)


# --------------------------------------------------------------- alpha_equal

def alpha_equal(f: Formula, g: Formula) -> bool:
    """Structural equality up to consistent renaming of bound variables."""

    def eq_t(a, b, env: dict[str, str]) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, SetVar) or isinstance(a, IntVar):
            if a.name in env:
                return env[a.name] == b.name
            return a.name == b.name and b.name not in env.values()
        if isinstance(a, (EmptySet, UnivSet, MaxCard)):
            return True
        if isinstance(a, IntConst):
            return a.value == b.value
        if isinstance(a, (Union, Inter, Add, Sub)):
            return eq_t(a.a, b.a, env) and eq_t(a.b, b.b, env)
        if isinstance(a, Compl):
            return eq_t(a.a, b.a, env)
        if isinstance(a, Mul):
            return a.coeff == b.coeff and eq_t(a.a, b.a, env)
        if isinstance(a, Card):
            return eq_t(a.arg, b.arg, env)
        raise TypeError(f"not a term: {a!r}")

    def eq(a: Formula, b: Formula, env: dict[str, str]) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, (TrueF, FalseF, FinUniv)):
            return True
        if isinstance(a, PropVar):
            if a.name in env:
                return env[a.name] == b.name
            return a.name == b.name and b.name not in env.values()
        if isinstance(a, (SetEq, SubsetEq, IntEq, IntLt)):
            return eq_t(a.a, b.a, env) and eq_t(a.b, b.b, env)
        if isinstance(a, Dvd):
            return a.c == b.c and eq_t(a.t, b.t, env)
        if isinstance(a, Fin):
            return eq_t(a.arg, b.arg, env)
        if isinstance(a, Not):
            return eq(a.a, b.a, env)
        if isinstance(a, (And, Or, Implies, Iff)):
            return eq(a.a, b.a, env) and eq(a.b, b.b, env)
        if isinstance(a, QUANTIFIERS):
            if a.sort is not b.sort:
                return False
            env2 = {k: v for k, v in env.items() if k != a.var}
            env2 = {k: v for k, v in env2.items() if v != b.var}
            env2[a.var] = b.var
            return eq(a.body, b.body, env2)
        raise TypeError(f"not a formula: {a!r}")

    return eq(f, g, {})
