"""Formula normalization: NNF, prenex form, atom purification, simplification.

These are the generic front-end steps shared by the quantifier-elimination
drivers.  Purification rewrites the set-relational atoms into cardinality
atoms (``b1 subseteq b2`` becomes ``card(b1 inter compl(b2)) = 0``), after
which set terms occur only under ``card`` or ``fin`` and the rest of the
pipeline only has to reason about integers.
"""

from __future__ import annotations

from dataclasses import dataclass

from bapa.core import (
    Add, And, Card, Compl, Dvd, EmptySet, Exists, FalseF, Fin, FinUniv,
    Forall, Formula, Iff, Implies, IntConst, IntEq, IntLt, Inter, Mul, Not,
    Or, QUANTIFIERS, SetEq, Sort, Sub, SubsetEq, SetVar, IntVar, PropVar,
    TrueF, Union, UnivSet, FALSE, TRUE, free_vars, fresh, subformulas,
    substitute, transform,
)


def to_nnf(f: Formula) -> Formula:
    """Push negations to the atoms; Implies/Iff are expanded away.

    Quantifiers stay in place (a negated quantifier flips kind); atoms are
    left intact under a single Not.
    """

    def pos(g: Formula) -> Formula:
        if isinstance(g, Not):
            return neg(g.a)
        if isinstance(g, And):
            return And(pos(g.a), pos(g.b))
        if isinstance(g, Or):
            return Or(pos(g.a), pos(g.b))
        if isinstance(g, Implies):
            return Or(neg(g.a), pos(g.b))
        if isinstance(g, Iff):
            return And(pos(Implies(g.a, g.b)), pos(Implies(g.b, g.a)))
        if isinstance(g, QUANTIFIERS):
            return type(g)(g.var, g.sort, pos(g.body))
        return g

    def neg(g: Formula) -> Formula:
        if isinstance(g, TrueF):
            return FALSE
        if isinstance(g, FalseF):
            return TRUE
        if isinstance(g, Not):
            return pos(g.a)
        if isinstance(g, And):
            return Or(neg(g.a), neg(g.b))
        if isinstance(g, Or):
            return And(neg(g.a), neg(g.b))
        if isinstance(g, Implies):
            return And(pos(g.a), neg(g.b))
        if isinstance(g, Iff):
            return Or(And(pos(g.a), neg(g.b)), And(pos(g.b), neg(g.a)))
        if isinstance(g, Exists):
            return Forall(g.var, g.sort, neg(g.body))
        if isinstance(g, Forall):
            return Exists(g.var, g.sort, neg(g.body))
        return Not(g)

    return pos(f)


@dataclass(frozen=True)
class PrenexForm:
    """Quantifier prefix (outermost first) over a quantifier-free matrix."""

    prefix: tuple[tuple[str, str, Sort], ...]  # ("E"/"A", name, sort)
    matrix: Formula

    def to_formula(self) -> Formula:
        f = self.matrix
        for kind, name, sort in reversed(self.prefix):
            f = (Exists if kind == "E" else Forall)(name, sort, f)
        return f


def _has_quantifier(f: Formula) -> bool:
    return any(isinstance(g, QUANTIFIERS) for g in subformulas(f))


def to_prenex(f: Formula) -> PrenexForm:
    """Hoist all quantifiers to an outer prefix, renaming apart.

    The matrix keeps its connective structure (no NNF is applied);
    quantifiers hoisted from under a negation or an implication antecedent
    flip kind.  Iff is expanded into its two implications only when its
    scope actually contains a quantifier.  Processing is top-down
    left-to-right, so the result is deterministic.
    """
    used = set(free_vars(f))
    for g in subformulas(f):
        if isinstance(g, QUANTIFIERS):
            used.add(g.var)
    claimed = set(free_vars(f))  # names no longer available for the prefix

    def pull(g: Formula) -> tuple[list[tuple[str, str, Sort]], Formula]:
        if isinstance(g, QUANTIFIERS):
            kind = "E" if isinstance(g, Exists) else "A"
            body = g.body
            name = g.var
            if name in claimed:
                name = fresh(g.var, used | claimed)
                repl = {Sort.SET: SetVar(name), Sort.INT: IntVar(name),
                        Sort.PROP: PropVar(name)}[g.sort]
                body = substitute(body, g.var, g.sort, repl)
            claimed.add(name)
            prefix, matrix = pull(body)
            return [(kind, name, g.sort)] + prefix, matrix
        if isinstance(g, Not):
            prefix, matrix = pull(g.a)
            return [_flip(q) for q in prefix], Not(matrix)
        if isinstance(g, And) or isinstance(g, Or):
            pa, ma = pull(g.a)
            pb, mb = pull(g.b)
            return pa + pb, type(g)(ma, mb)
        if isinstance(g, Implies):
            pa, ma = pull(g.a)
            pb, mb = pull(g.b)
            return [_flip(q) for q in pa] + pb, Implies(ma, mb)
        if isinstance(g, Iff):
            if _has_quantifier(g):
                return pull(And(Implies(g.a, g.b), Implies(g.b, g.a)))
            return [], g
        return [], g

    prefix, matrix = pull(f)
    return PrenexForm(tuple(prefix), matrix)


def _flip(q: tuple[str, str, Sort]) -> tuple[str, str, Sort]:
    kind, name, sort = q
    return ("A" if kind == "E" else "E", name, sort)


def purify_atoms(f: Formula) -> Formula:
    """Rewrite set-relational atoms into cardinality-of-difference atoms."""

    def rewrite(g: Formula) -> Formula:
        if isinstance(g, SubsetEq):
            return _empty_diff(g.a, g.b)
        if isinstance(g, SetEq):
            return And(_empty_diff(g.a, g.b), _empty_diff(g.b, g.a))
        return g

    return transform(f, form=rewrite)


def _empty_diff(a, b) -> Formula:
    return IntEq(Card(Inter(a, Compl(b))), IntConst(0))


def simplify_const(f: Formula) -> Formula:
    """Absorb set constants, fold integer constants, drop boolean units.

    Afterwards every set term is ``univ``, ``empty``, or mentions neither;
    ``card(empty)`` becomes 0 and ground comparisons are evaluated.
    Quantifiers are never dropped, even over a constant body, so prefix
    shape (and alternation counts) survive this pass.
    """

    def set_term(t):
        if isinstance(t, Union):
            if isinstance(t.a, EmptySet):
                return t.b
            if isinstance(t.b, EmptySet):
                return t.a
            if isinstance(t.a, UnivSet) or isinstance(t.b, UnivSet):
                return UnivSet()
        elif isinstance(t, Inter):
            if isinstance(t.a, UnivSet):
                return t.b
            if isinstance(t.b, UnivSet):
                return t.a
            if isinstance(t.a, EmptySet) or isinstance(t.b, EmptySet):
                return EmptySet()
        elif isinstance(t, Compl):
            if isinstance(t.a, EmptySet):
                return UnivSet()
            if isinstance(t.a, UnivSet):
                return EmptySet()
        return t

    def int_term(t):
        if isinstance(t, Card) and isinstance(t.arg, EmptySet):
            return IntConst(0)
        if isinstance(t, Add) and isinstance(t.a, IntConst) and isinstance(t.b, IntConst):
            return IntConst(t.a.value + t.b.value)
        if isinstance(t, Sub) and isinstance(t.a, IntConst) and isinstance(t.b, IntConst):
            return IntConst(t.a.value - t.b.value)
        if isinstance(t, Mul) and isinstance(t.a, IntConst):
            return IntConst(t.coeff * t.a.value)
        return t

    def form(g: Formula) -> Formula:
        if isinstance(g, IntEq) and isinstance(g.a, IntConst) and isinstance(g.b, IntConst):
            return TRUE if g.a.value == g.b.value else FALSE
        if isinstance(g, IntLt) and isinstance(g.a, IntConst) and isinstance(g.b, IntConst):
            return TRUE if g.a.value < g.b.value else FALSE
        if isinstance(g, Dvd) and isinstance(g.t, IntConst):
            return TRUE if g.t.value % g.c == 0 else FALSE
        if isinstance(g, Fin) and isinstance(g.arg, EmptySet):
            return TRUE
        if isinstance(g, Not):
            if isinstance(g.a, TrueF):
                return FALSE
            if isinstance(g.a, FalseF):
                return TRUE
        if isinstance(g, And):
            if isinstance(g.a, TrueF):
                return g.b
            if isinstance(g.b, TrueF):
                return g.a
            if isinstance(g.a, FalseF) or isinstance(g.b, FalseF):
                return FALSE
        if isinstance(g, Or):
            if isinstance(g.a, FalseF):
                return g.b
            if isinstance(g.b, FalseF):
                return g.a
            if isinstance(g.a, TrueF) or isinstance(g.b, TrueF):
                return TRUE
        if isinstance(g, Implies):
            if isinstance(g.a, FalseF) or isinstance(g.b, TrueF):
                return TRUE
            if isinstance(g.a, TrueF):
                return g.b
            if isinstance(g.b, FalseF):
                return Not(g.a) if not isinstance(g.a, Not) else g.a.a
        if isinstance(g, Iff):
            if isinstance(g.a, TrueF):
                return g.b
            if isinstance(g.b, TrueF):
                return g.a
        return g

    return transform(f, term_set=set_term, term_int=int_term, form=form)
