"""Annotated program schemas and their verification conditions.

A schema declares global state variables, named invariants, and procedures
whose bodies are built from transition formulas, assignments, sequencing,
nondeterministic choice, procedure calls and local variables.  A body
reduces to a single transition formula relating unprimed (pre-state) to
primed (post-state) variables, and the correctness condition for a
procedure is the universal closure of ``pre & body => post`` — a sentence
the rest of the pipeline can decide.

Concrete syntax, extending the formula grammar::

    var NAME : (set|int);
    invariant NAME <=> FORMULA;
    procedure NAME [(p : sort, ...)] [maintains I, ...]
        requires FORMULA ensures FORMULA { STMT* }

    STMT := NAME := TERM ;                assignment
          | FORMULA ;                     arbitrary transition formula
          | assume FORMULA ;              condition on the pre-state
          | skip ;                        identity transition
          | call NAME ;                   replaced by the callee's spec
          | choice { STMT* } or { STMT* }
          | local NAME : (set|int) { STMT* }

Assignment desugars to a functional update with frame conjuncts
(``x := t`` becomes ``x' = t  &  y' = y`` for every other state variable
``y``), and a run of consecutive assignments is composed into one such
update, substituting earlier right-hand sides into later ones.  All other
sequencing goes through fresh intermediate state: ``F1 ; F2`` becomes
``ex z. F1[x':=z] & F2[x:=z]``.  Calls are replaced by the callee's
``pre => post`` (assume-guarantee; recursion needs no fixpoints), choice
is disjunction, and a local variable existentially binds both of its
copies.

Procedure parameters are read-only: they get no primed copy and no frame
conjunct, and they are quantified first in the correctness condition.
Invariants listed in a ``maintains`` clause are conjoined to the
precondition as written and to the postcondition with every state
variable primed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (Add, And, Card, Compl, ContractViolation, Exists, Forall,
                   Formula, FreeVarsError, Implies, Inter, IntEq, IntTerm,
                   IntVar, Mul, Or, ParseError, SetEq, SetTerm, SetVar, Sort,
                   Sub, Union, conj, conjuncts, free_vars, fresh, substitute)
from .syntax import Parser, _Fail, _SORTS, tokenize

__all__ = [
    "Assign", "Assume", "Call", "Choice", "Local", "Seq", "Skip",
    "Transition", "Stmt", "Proc", "Schema",
    "parse_schema", "body_to_formula", "correctness_vc",
]


# ------------------------------------------------------------------ statements

@dataclass(frozen=True)
class Assign:
    target: str
    term: "SetTerm | IntTerm"


@dataclass(frozen=True)
class Transition:
    formula: Formula


@dataclass(frozen=True)
class Assume:
    formula: Formula


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Call:
    proc: str


@dataclass(frozen=True)
class Choice:
    left: "Seq"
    right: "Seq"


@dataclass(frozen=True)
class Local:
    name: str
    sort: Sort
    body: "Seq"


@dataclass(frozen=True)
class Seq:
    stmts: "tuple[Stmt, ...]"


Stmt = "Assign | Transition | Assume | Skip | Call | Choice | Local | Seq"


@dataclass(frozen=True)
class Proc:
    """A procedure with its maintained invariants already conjoined in."""

    name: str
    params: tuple[tuple[str, Sort], ...]
    pre: Formula
    post: Formula
    maintains: tuple[str, ...]
    body: Seq


@dataclass(frozen=True, eq=False)
class Schema:
    vars: tuple[tuple[str, Sort], ...]
    invariants: dict[str, Formula] = field(default_factory=dict)
    procs: dict[str, Proc] = field(default_factory=dict)


# ------------------------------------------------------------------- reduction

def _prime_var(name: str, sort: Sort) -> "SetTerm | IntTerm":
    return SetVar(name + "'") if sort is Sort.SET else IntVar(name + "'")


def _prime_eq(name: str, sort: Sort, rhs=None) -> Formula:
    """v' = rhs, or the frame conjunct v' = v when rhs is None."""
    if rhs is None:
        rhs = SetVar(name) if sort is Sort.SET else IntVar(name)
    if sort is Sort.SET:
        return SetEq(SetVar(name + "'"), rhs)
    return IntEq(IntVar(name + "'"), rhs)


def _prime_formula(f: Formula, state) -> Formula:
    for name, sort in state:
        f = substitute(f, name, sort, _prime_var(name, sort))
    return f


def _subst_term(t, name: str, sort: Sort, repl):
    # terms have no binders, so plain structural replacement suffices
    if isinstance(t, SetVar):
        return repl if sort is Sort.SET and t.name == name else t
    if isinstance(t, IntVar):
        return repl if sort is Sort.INT and t.name == name else t
    if isinstance(t, (Union, Inter, Add, Sub)):
        return type(t)(_subst_term(t.a, name, sort, repl),
                       _subst_term(t.b, name, sort, repl))
    if isinstance(t, Compl):
        return Compl(_subst_term(t.a, name, sort, repl))
    if isinstance(t, Mul):
        return Mul(t.coeff, _subst_term(t.a, name, sort, repl))
    if isinstance(t, Card):
        return Card(_subst_term(t.arg, name, sort, repl))
    return t


def _update_formula(assigns, state) -> Formula:
    """One parallel functional update for a run of consecutive assignments.

    Later right-hand sides read the state left by earlier assignments, so
    pending updates are substituted into them; the result is a conjunct
    v' = term (or the frame v' = v) for every state variable in
    declaration order.
    """
    sorts = dict(state)
    upd: dict = {}
    for a in assigns:
        t = a.term
        for v, r in upd.items():
            t = _subst_term(t, v, sorts[v], r)
        upd[a.target] = t
    return conj(_prime_eq(v, s, upd.get(v)) for v, s in state)


def _skip_formula(state) -> Formula:
    return conj(_prime_eq(v, s) for v, s in state)


def _compose(f1: Formula, f2: Formula, state) -> Formula:
    """ex z. f1[x':=z] & f2[x:=z] with one fresh z per state variable."""
    avoid = set(free_vars(f1)) | set(free_vars(f2))
    for v, _ in state:
        avoid.update((v, v + "'"))
    mids = []
    for v, s in state:
        mid = fresh(v + "0", avoid)
        avoid.add(mid)
        repl = SetVar(mid) if s is Sort.SET else IntVar(mid)
        f1 = substitute(f1, v + "'", s, repl)
        f2 = substitute(f2, v, s, repl)
        mids.append((mid, s))
    out = And(f1, f2)
    for mid, s in reversed(mids):
        out = Exists(mid, s, out)
    return out


def _stmt_formula(s, state, schema: Schema, assume_conj: bool) -> Formula:
    if isinstance(s, Transition):
        return s.formula
    if isinstance(s, Skip):
        return _skip_formula(state)
    if isinstance(s, Assume):
        frame = _skip_formula(state)
        if assume_conj:
            return And(s.formula, frame)
        return Implies(s.formula, frame)
    if isinstance(s, Assign):
        return _update_formula([s], state)
    if isinstance(s, Call):
        p = schema.procs.get(s.proc)
        if p is None:
            raise ContractViolation(f"call to unknown procedure {s.proc!r}")
        if p.params:
            raise ContractViolation(
                f"procedure {s.proc!r} takes parameters and cannot be called")
        return Implies(p.pre, p.post)
    if isinstance(s, Choice):
        return Or(_seq_formula(s.left.stmts, state, schema, assume_conj),
                  _seq_formula(s.right.stmts, state, schema, assume_conj))
    if isinstance(s, Local):
        inner_state = state + ((s.name, s.sort),)
        inner = _seq_formula(s.body.stmts, inner_state, schema, assume_conj)
        return Exists(s.name, s.sort,
                      Exists(s.name + "'", s.sort, inner))
    if isinstance(s, Seq):
        return _seq_formula(s.stmts, state, schema, assume_conj)
    raise ContractViolation(f"not a statement: {s!r}")


def _seq_formula(stmts, state, schema: Schema, assume_conj: bool) -> Formula:
    groups: list[Formula] = []
    i = 0
    while i < len(stmts):
        if isinstance(stmts[i], Assign):
            j = i
            while j < len(stmts) and isinstance(stmts[j], Assign):
                j += 1
            groups.append(_update_formula(stmts[i:j], state))
            i = j
        else:
            groups.append(_stmt_formula(stmts[i], state, schema, assume_conj))
            i += 1
    if not groups:
        return _skip_formula(state)  # the empty body does nothing
    out = groups[0]
    for g in groups[1:]:
        out = _compose(out, g, state)
    return out


def body_to_formula(s, schema: Schema, state=None,
                    assume_conjunctive: bool = False) -> Formula:
    """Reduce a statement (or whole body) to one transition formula."""
    if state is None:
        state = schema.vars
    stmts = s.stmts if isinstance(s, Seq) else (s,)
    return _seq_formula(tuple(stmts), tuple(state), schema, assume_conjunctive)


def correctness_vc(schema: Schema, proc: "str | Proc",
                   assume_conjunctive: bool = False) -> Formula:
    """The sentence whose validity means the procedure meets its contract.

    Universal closure, over the parameters and then both copies of each
    state variable, of ``pre & body => post``.
    """
    if isinstance(proc, str):
        p = schema.procs.get(proc)
        if p is None:
            raise ContractViolation(f"unknown procedure {proc!r}")
    else:
        p = proc
    fbody = body_to_formula(p.body, schema,
                            assume_conjunctive=assume_conjunctive)
    matrix = Implies(conj(conjuncts(p.pre) + conjuncts(fbody)), p.post)
    occurring = free_vars(matrix)
    order = list(p.params)
    for v, s in schema.vars:
        order.append((v, s))
        order.append((v + "'", s))
    out = matrix
    for v, s in reversed([d for d in order if d[0] in occurring]):
        out = Forall(v, s, out)
    covered = {d[0] for d in order}
    stray = [v for v in free_vars(out) if v not in covered]
    if stray:
        raise FreeVarsError(
            f"verification condition mentions undeclared variables: {stray}")
    return out


# --------------------------------------------------------------------- parsing

_STATE_SORTS = {"set": Sort.SET, "int": Sort.INT}


class _SchemaParser(Parser):
    def __init__(self, tokens):
        super().__init__(tokens)
        self.vars: list[tuple[str, Sort]] = []
        self.invariants: dict[str, Formula] = {}
        self.procs: dict[str, Proc] = {}
        self.call_sites: list[tuple[str, object]] = []

    def parse_schema(self) -> Schema:
        while self.peek().kind != "eof":
            if self.take_word("var"):
                self.parse_var()
            elif self.take_word("invariant"):
                self.parse_invariant()
            elif self.take_word("procedure"):
                self.parse_proc()
            else:
                raise self.fail("expected var, invariant or procedure")
        for name, span in self.call_sites:
            if name not in self.procs:
                raise ParseError(f"call to unknown procedure {name!r}", span)
        return Schema(tuple(self.vars), self.invariants, self.procs)

    def parse_state_name(self, taken) -> str:
        tok = self.peek()
        name = self.parse_varname()
        if name.endswith("'"):
            raise ParseError(
                "a declared name may not end with a prime; the prime marks "
                "the post-state copy", tok.span)
        if name in taken:
            raise ParseError(f"{name!r} is already declared", tok.span)
        return name

    def parse_state_sort(self) -> Sort:
        t = self.next()
        if t.kind == "name" and t.text in _STATE_SORTS:
            return _STATE_SORTS[t.text]
        raise self.fail("expected a sort (set or int)")

    def parse_var(self) -> None:
        name = self.parse_state_name({v for v, _ in self.vars})
        self.expect_op(":")
        sort = self.parse_state_sort()
        self.expect_op(";")
        self.vars.append((name, sort))

    def parse_invariant(self) -> None:
        tok = self.peek()
        name = self.parse_varname()
        if name in self.invariants:
            raise ParseError(f"invariant {name!r} is already defined", tok.span)
        self.expect_op("<=>")
        f = self.parse_formula(dict(self.vars))
        self.expect_op(";")
        self.invariants[name] = f

    def parse_proc(self) -> None:
        tok = self.peek()
        name = self.parse_varname()
        if name in self.procs:
            raise ParseError(f"procedure {name!r} is already defined", tok.span)
        params: list[tuple[str, Sort]] = []
        if self.at_op("("):
            self.next()
            taken = {v for v, _ in self.vars}
            while True:
                pname = self.parse_state_name(taken)
                taken.add(pname)
                self.expect_op(":")
                params.append((pname, self.parse_state_sort()))
                if not self.at_op(","):
                    break
                self.next()
            self.expect_op(")")
        maintains: list[str] = []
        if self.take_word("maintains"):
            while True:
                itok = self.peek()
                iname = self.parse_varname()
                if iname not in self.invariants:
                    raise ParseError(f"unknown invariant {iname!r}", itok.span)
                maintains.append(iname)
                if not self.at_op(","):
                    break
                self.next()
        if not self.take_word("requires"):
            raise self.fail("expected 'requires'")
        env_pre = {**dict(self.vars), **dict(params)}
        env_post = {**env_pre, **{v + "'": s for v, s in self.vars}}
        requires = self.parse_formula(env_pre)
        if not self.take_word("ensures"):
            raise self.fail("expected 'ensures'")
        ensures = self.parse_formula(env_post)
        self.expect_op("{")
        body = self.parse_stmts(dict(params), list(self.vars))
        self.expect_op("}")
        invs = [self.invariants[i] for i in maintains]
        pre = conj([requires] + invs)
        post = conj([ensures] + [_prime_formula(f, self.vars) for f in invs])
        self.procs[name] = Proc(name, tuple(params), pre, post,
                                tuple(maintains), body)

    def parse_stmts(self, params, state) -> Seq:
        out: list = []
        while not self.at_op("}"):
            out.append(self.parse_stmt(params, state))
        return Seq(tuple(out))

    def parse_stmt(self, params, state):
        env_now = {**params, **dict(state)}
        env_full = {**env_now, **{v + "'": s for v, s in state}}
        if self.take_word("choice"):
            self.expect_op("{")
            left = self.parse_stmts(params, state)
            self.expect_op("}")
            if not self.take_word("or"):
                raise self.fail("expected 'or' between choice branches")
            self.expect_op("{")
            right = self.parse_stmts(params, state)
            self.expect_op("}")
            if self.at_op(";"):
                self.next()
            return Choice(left, right)
        if self.take_word("local"):
            name = self.parse_state_name(set(env_now))
            self.expect_op(":")
            sort = self.parse_state_sort()
            self.expect_op("{")
            body = self.parse_stmts(params, state + [(name, sort)])
            self.expect_op("}")
            if self.at_op(";"):
                self.next()
            return Local(name, sort, body)
        if self.take_word("call"):
            tok = self.peek()
            name = self.parse_varname()
            self.call_sites.append((name, tok.span))
            self.expect_op(";")
            return Call(name)
        if self.take_word("assume"):
            f = self.parse_formula(env_now)
            self.expect_op(";")
            return Assume(f)
        if self.take_word("skip"):
            self.expect_op(";")
            return Skip()
        t = self.peek()
        nxt = self.tokens[self.pos + 1] if t.kind == "name" else None
        if nxt is not None and nxt.kind == "op" and nxt.text == ":=":
            name = self.parse_varname()
            if name in params:
                raise ParseError(f"cannot assign to parameter {name!r}", t.span)
            sort = dict(state).get(name)
            if sort is None:
                raise ParseError(f"unknown state variable {name!r}", t.span)
            self.next()  # :=
            term = (self.parse_setterm(env_now) if sort is Sort.SET
                    else self.parse_intterm(env_now))
            self.expect_op(";")
            return Assign(name, term)
        f = self.parse_formula(env_full)
        self.expect_op(";")
        return Transition(f)


def parse_schema(text: str) -> Schema:
    parser = _SchemaParser(tokenize(text))
    try:
        return parser.parse_schema()
    except _Fail:
        raise parser.error() from None
