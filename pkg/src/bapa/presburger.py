"""Presburger arithmetic: quantifier elimination, decision, evaluation.

Quantifier elimination follows the classic recipe: normalize atoms to
``0 < t`` and ``c dvd t`` over linear terms, put the matrix in disjunctive
normal form, then eliminate one existential at a time by scaling the
variable's coefficients to a common multiple and substituting boundary
values ``b_j + i`` for lower bounds ``b_j`` and ``i`` up to the divisor
lcm.  A universal quantifier is eliminated as the negated existential of
the negation.

Conjunctions that contain an equality with a unit coefficient on the
eliminated variable take a short cut: the variable is solved for and
substituted away.  That path does all the work on the formulas produced by
the set-to-integer translation, which chain together equalities like
``l11 = l111 + l011``.

Propositional variables are compiled to integers with the atom ``p``
becoming ``p = 1``; no range constraint is needed because every integer
other than 1 behaves like false.
"""

from __future__ import annotations

import itertools
import math
import sys
import threading
from dataclasses import dataclass

from bapa.core import (
    Add, And, Card, ContractViolation, Dvd, Exists, FalseF, Fin, FinUniv,
    Forall, Formula, FreeVarsError, Iff, Implies, IntConst, IntEq, IntLt,
    IntTerm, IntVar, MaxCard, Mul, Not, Or, PropVar, QUANTIFIERS, SetEq,
    Sort, Sub, SubsetEq, TrueF, TRUE, FALSE, conj, conjuncts, disj,
    disjuncts, free_vars, subformulas, substitute,
)
from bapa.normalize import simplify_const, to_nnf


# ------------------------------------------------------------- linear terms

@dataclass(frozen=True)
class LinearTerm:
    """c0 + sum of coeff * var, vars ordered, zero coefficients dropped."""

    const: int
    coeffs: tuple[tuple[str, int], ...]

    @staticmethod
    def of(const: int, coeffs: dict[str, int]) -> "LinearTerm":
        items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
        return LinearTerm(const, items)

    def coeff(self, var: str) -> int:
        for v, c in self.coeffs:
            if v == var:
                return c
        return 0

    def add(self, other: "LinearTerm") -> "LinearTerm":
        d = dict(self.coeffs)
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return LinearTerm.of(self.const + other.const, d)

    def scale(self, k: int) -> "LinearTerm":
        return LinearTerm.of(self.const * k, {v: c * k for v, c in self.coeffs})

    def drop(self, var: str) -> "LinearTerm":
        return LinearTerm.of(self.const, {v: c for v, c in self.coeffs if v != var})

    def subst(self, var: str, repl: "LinearTerm") -> "LinearTerm":
        c = self.coeff(var)
        if c == 0:
            return self
        return self.drop(var).add(repl.scale(c))

    def shift(self, k: int) -> "LinearTerm":
        return LinearTerm(self.const + k, self.coeffs)


def linearize(t: IntTerm) -> LinearTerm:
    if isinstance(t, IntVar):
        return LinearTerm.of(0, {t.name: 1})
    if isinstance(t, IntConst):
        return LinearTerm(t.value, ())
    if isinstance(t, Add):
        return linearize(t.a).add(linearize(t.b))
    if isinstance(t, Sub):
        return linearize(t.a).add(linearize(t.b).scale(-1))
    if isinstance(t, Mul):
        return linearize(t.a).scale(t.coeff)
    raise ContractViolation(f"not a Presburger term: {t!r}")


def delinearize(lin: LinearTerm) -> IntTerm:
    parts: list[IntTerm] = []
    for v, c in lin.coeffs:
        parts.append(IntVar(v) if c == 1 else Mul(c, IntVar(v)))
    if lin.const != 0 or not parts:
        parts.append(IntConst(lin.const))
    out = parts[0]
    for p in parts[1:]:
        out = Add(out, p)
    return out


def _lt0(lin: LinearTerm) -> Formula:
    """0 < lin, constant-folded."""
    if not lin.coeffs:
        return TRUE if lin.const > 0 else FALSE
    return IntLt(IntConst(0), delinearize(lin))


def _dvd(c: int, lin: LinearTerm) -> Formula:
    if not lin.coeffs:
        return TRUE if lin.const % c == 0 else FALSE
    if c == 1:
        return TRUE
    return Dvd(c, delinearize(lin))


# ----------------------------------------------------------- language check

def check_pa(f: Formula) -> None:
    """Reject anything outside pure Presburger arithmetic (+ propositions)."""
    for g in subformulas(f):
        if isinstance(g, (SetEq, SubsetEq, Fin, FinUniv)):
            raise ContractViolation(f"not a PA formula: set atom {g!r}")
        if isinstance(g, QUANTIFIERS) and g.sort is Sort.SET:
            raise ContractViolation(f"not a PA formula: set quantifier over {g.var}")
        if isinstance(g, (IntEq, IntLt)):
            _check_pa_term(g.a)
            _check_pa_term(g.b)
        elif isinstance(g, Dvd):
            if g.c <= 0:
                raise ContractViolation(f"divisor must be positive: {g.c}")
            _check_pa_term(g.t)


def _check_pa_term(t: IntTerm) -> None:
    if isinstance(t, Card):
        raise ContractViolation("not a PA formula: contains card(...)")
    if isinstance(t, MaxCard):
        raise ContractViolation("not a PA formula: MAXC not instantiated")
    if isinstance(t, (Add, Sub)):
        _check_pa_term(t.a)
        _check_pa_term(t.b)
    elif isinstance(t, Mul):
        _check_pa_term(t.a)


def _compile_props(f: Formula) -> Formula:
    """Model propositions as integers: atom p becomes p = 1."""
    if isinstance(f, PropVar):
        return IntEq(IntVar(f.name), IntConst(1))
    if isinstance(f, Not):
        return Not(_compile_props(f.a))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(_compile_props(f.a), _compile_props(f.b))
    if isinstance(f, QUANTIFIERS):
        sort = Sort.INT if f.sort is Sort.PROP else f.sort
        return type(f)(f.var, sort, _compile_props(f.body))
    return f


# -------------------------------------------------------- atom normalization

def normalize_atoms(f: Formula) -> Formula:
    """Rewrite an NNF formula so the only atoms are 0 < t and c dvd t.

    Equalities split into two strict inequalities; negated inequalities,
    equalities and divisibilities are rewritten positively.
    """

    def walk(g: Formula) -> Formula:
        if isinstance(g, Not):
            a = g.a
            if isinstance(a, IntLt):
                # ~(t1 < t2)  <=>  t2 < t1 + 1
                return _lt0(linearize(a.a).shift(1).add(linearize(a.b).scale(-1)))
            if isinstance(a, IntEq):
                lt = linearize(a.a).add(linearize(a.b).scale(-1))
                return Or(_lt0(lt.scale(-1)), _lt0(lt))
            if isinstance(a, Dvd):
                t = linearize(a.t)
                return disj([_dvd(a.c, t.shift(i)) for i in range(1, a.c)])
            if isinstance(a, (TrueF, FalseF)):
                return FALSE if isinstance(a, TrueF) else TRUE
            return g
        if isinstance(g, IntEq):
            la, lb = linearize(g.a), linearize(g.b)
            return And(_lt0(lb.shift(1).add(la.scale(-1))),
                       _lt0(la.shift(1).add(lb.scale(-1))))
        if isinstance(g, IntLt):
            return _lt0(linearize(g.b).add(linearize(g.a).scale(-1)))
        if isinstance(g, Dvd):
            return _dvd(g.c, linearize(g.t))
        if isinstance(g, (And, Or)):
            return type(g)(walk(g.a), walk(g.b))
        if isinstance(g, QUANTIFIERS):
            return type(g)(g.var, g.sort, walk(g.body))
        return g

    return walk(f)


# ------------------------------------------------------------ simplification

def _flatten_simplify(f: Formula) -> Formula:
    """Flatten and/or chains, drop duplicates and units, fold constants."""

    def walk(g: Formula) -> Formula:
        if isinstance(g, And) or isinstance(g, Or):
            is_and = isinstance(g, And)
            parts = conjuncts(g) if is_and else disjuncts(g)
            out: list[Formula] = []
            seen = set()
            for p in parts:
                p = walk(p)
                if isinstance(p, TrueF):
                    if is_and:
                        continue
                    return TRUE
                if isinstance(p, FalseF):
                    if is_and:
                        return FALSE
                    continue
                sub = conjuncts(p) if is_and else disjuncts(p)
                for q in sub:
                    if q not in seen:
                        seen.add(q)
                        out.append(q)
            for q in out:
                comp = q.a if isinstance(q, Not) else Not(q)
                if comp in seen:
                    return FALSE if is_and else TRUE
            if not out:
                return TRUE if is_and else FALSE
            return conj(out) if is_and else disj(out)
        if isinstance(g, Not):
            a = walk(g.a)
            if isinstance(a, Not):
                return a.a
            if isinstance(a, TrueF):
                return FALSE
            if isinstance(a, FalseF):
                return TRUE
            return Not(a)
        if isinstance(g, (Implies, Iff)):
            return type(g)(walk(g.a), walk(g.b))
        if isinstance(g, QUANTIFIERS):
            return type(g)(g.var, g.sort, walk(g.body))
        return g

    return walk(simplify_const(f))


# ------------------------------------------------------------------- DNF

_lin_lit_cache: dict[Formula, tuple | None] = {}


def _lin_lit(lit: Formula):
    """Classify a literal for linear interreduction, or None to keep as-is."""
    hit = _lin_lit_cache.get(lit)
    if hit is None and lit not in _lin_lit_cache:
        neg = isinstance(lit, Not)
        a = lit.a if neg else lit
        if isinstance(a, IntEq):
            lin = linearize(a.a).add(linearize(a.b).scale(-1))
            hit = ("ne" if neg else "eq", lin)
        elif isinstance(a, IntLt):
            lin = linearize(a.b).add(linearize(a.a).scale(-1))  # 0 < lin
            if neg:  # not (0 < lin)  <=>  0 < 1 - lin
                lin = lin.scale(-1).shift(1)
            hit = ("lt", lin)
        elif isinstance(a, Dvd):
            hit = ("ndvd" if neg else "dvd", (a.c, linearize(a.t)))
        _lin_lit_cache[lit] = hit
    return hit


def _clean_conj(lits: list[Formula]) -> list[Formula] | None:
    """Interreduce one conjunction of literals.

    Single-variable equalities pin their variable and substitute through
    the rest, parallel strict bounds collapse to the strongest one,
    equalities and opposed bounds over the same variable combination are
    checked for joint satisfiability, and ground atoms fold away.
    Returns None when the conjunction is unsatisfiable on its face —
    whole DNF branches die here, which is what keeps alternating
    eliminate/negate rounds from compounding.
    """
    shaped: list[tuple] = []
    raw: dict[Formula, None] = {}
    for lit in lits:
        if isinstance(lit, TrueF):
            continue
        if isinstance(lit, FalseF):
            return None
        s = _lin_lit(lit)
        if s is None:
            raw.setdefault(lit)
        else:
            shaped.append(s)

    # Pin variables fixed outright by an equality c*v + d = 0 and
    # substitute them away; each round removes one variable.
    while True:
        pin = None
        for kind, payload in shaped:
            if kind == "eq" and len(payload.coeffs) == 1:
                v, k = payload.coeffs[0]
                if payload.const % k != 0:
                    return None
                pin = (v, -payload.const // k)
                break
        if pin is None:
            break
        repl = LinearTerm(pin[1], ())
        shaped = [
            (kind, (payload[0], payload[1].subst(pin[0], repl))
             if kind in ("dvd", "ndvd") else payload.subst(pin[0], repl))
            for kind, payload in shaped]
        raw.setdefault(IntEq(IntVar(pin[0]), IntConst(pin[1])))

    eqs: dict[tuple, int] = {}          # sign-normalized coeffs -> const
    nes: dict[tuple[tuple, int], None] = {}
    lts: dict[tuple, int] = {}          # coeffs -> strongest const, 0 < t+c
    dvds: dict[tuple[int, tuple, int], None] = {}
    ndvds: dict[tuple[int, tuple, int], None] = {}
    for kind, payload in shaped:
        if kind in ("dvd", "ndvd"):
            c, lin = payload
            if not lin.coeffs:
                hit = lin.const % c == 0
                if hit == (kind == "ndvd"):
                    return None
                continue
            if c == 1:
                if kind == "ndvd":
                    return None
                continue
            key = (c, lin.coeffs, lin.const % c)
            (dvds if kind == "dvd" else ndvds).setdefault(key)
            continue
        lin = payload
        if kind == "lt":
            if not lin.coeffs:
                if lin.const <= 0:
                    return None
                continue
            c = lts.get(lin.coeffs)
            lts[lin.coeffs] = lin.const if c is None else min(c, lin.const)
            continue
        # eq / ne, sign-normalized so opposite orientations coincide
        if lin.coeffs and lin.coeffs[0][1] < 0:
            lin = lin.scale(-1)
        if not lin.coeffs:
            if (lin.const == 0) == (kind == "ne"):
                return None
            continue
        if kind == "eq":
            c = eqs.get(lin.coeffs)
            if c is not None and c != lin.const:
                return None
            eqs[lin.coeffs] = lin.const
        else:
            nes.setdefault((lin.coeffs, lin.const))
    for (coeffs, c) in nes:
        if eqs.get(coeffs) == c:
            return None
    for coeffs, c in lts.items():
        flipped = tuple((v, -k) for v, k in coeffs)
        other = lts.get(flipped)
        if other is not None and c + other < 2:
            return None
        ec = eqs.get(coeffs if coeffs[0][1] > 0 else flipped)
        if ec is not None:
            # the equality pins the variable part; check the bound holds
            value = -ec if coeffs[0][1] > 0 else ec
            if value + c <= 0:
                return None
    for key in dvds:
        if key in ndvds:
            return None
    out: list[Formula] = []
    for coeffs, c in eqs.items():
        out.append(IntEq(delinearize(LinearTerm(c, coeffs)), IntConst(0)))
    for (coeffs, c) in nes:
        if coeffs in eqs:
            continue  # equality already settles it
        out.append(Not(IntEq(delinearize(LinearTerm(c, coeffs)), IntConst(0))))
    for coeffs, c in lts.items():
        out.append(_lt0(LinearTerm(c, coeffs)))
    for c, coeffs, r in dvds:
        out.append(Dvd(c, delinearize(LinearTerm(r, coeffs))))
    for c, coeffs, r in ndvds:
        out.append(Not(Dvd(c, delinearize(LinearTerm(r, coeffs)))))
    out.extend(raw)
    return out


def _clean_branches(branches: list[list[Formula]]) -> list[list[Formula]]:
    """Drop duplicate and subsumed DNF branches (literal-set supersets)."""
    seen: dict[frozenset, list[Formula]] = {}
    for lits in branches:
        seen.setdefault(frozenset(lits), lits)
    keys = list(seen)
    kept = []
    for k in keys:
        if any(other < k for other in keys):
            continue
        kept.append(seen[k])
    return kept


def _dnf(f: Formula) -> list[list[Formula]]:
    """NNF formula -> interreduced list of conjunctions of literals."""
    if isinstance(f, Or):
        return _clean_branches(_dnf(f.a) + _dnf(f.b))
    if isinstance(f, And):
        out: list[list[Formula]] = []
        seen: set[frozenset] = set()
        right = _dnf(f.b)
        for ls in _dnf(f.a):
            for rs in right:
                merged = list(ls)
                have = set(ls)
                for lit in rs:
                    if lit not in have:
                        merged.append(lit)
                        have.add(lit)
                cleaned = _clean_conj(merged)
                if cleaned is None:
                    continue
                key = frozenset(cleaned)
                if key not in seen:
                    seen.add(key)
                    out.append(cleaned)
        return _clean_branches(out)
    if isinstance(f, TrueF):
        return [[]]
    if isinstance(f, FalseF):
        return []
    cleaned = _clean_conj([f])
    return [] if cleaned is None else [cleaned]


# ---------------------------------------------------------------- QE proper

def _lit_has_var(lit: Formula, x: str) -> bool:
    return x in free_vars(lit)


def _subst_lit(lit: Formula, x: str, repl: LinearTerm) -> Formula:
    if isinstance(lit, Not):
        inner = _subst_lit(lit.a, x, repl)
        return _flatten_simplify(Not(inner))
    if isinstance(lit, IntEq):
        lin = linearize(lit.a).add(linearize(lit.b).scale(-1)).subst(x, repl)
        if not lin.coeffs:
            return TRUE if lin.const == 0 else FALSE
        return IntEq(delinearize(lin), IntConst(0))
    if isinstance(lit, IntLt):
        lin = linearize(lit.b).add(linearize(lit.a).scale(-1)).subst(x, repl)
        return _lt0(lin)
    if isinstance(lit, Dvd):
        return _dvd(lit.c, linearize(lit.t).subst(x, repl))
    return lit


def pa_eliminate_exists(literals: list[Formula], x: str) -> Formula:
    """Eliminate ∃x from a conjunction of literals, all mentioning x.

    Implements the scaling construction: the coefficient of x is scaled to
    a common multiple M in every atom, the scaled variable is constrained
    by M dvd x, and the formula is instantiated at b_j + i for each lower
    bound b_j and i up to the lcm N of the divisors.  With no bounds at
    all the result is the disjunction of the first N instances; with only
    upper bounds the construction dualizes.
    """
    for lit in literals:
        if not _lit_has_var(lit, x):
            raise ContractViolation(f"literal {lit!r} does not mention {x}")
    branches = _elim_atoms_list(literals, x)
    return _flatten_simplify(disj([conj(b) for b in branches]))


def _elim_atoms_list(literals: list[Formula], x: str) -> list[list[Formula]]:
    """Bound-substitution elimination, returning DNF branches as lists."""
    # lower bounds stored as (strict) bound terms: 0 < y + A means y > -A
    lowers: list[LinearTerm] = []
    uppers: list[LinearTerm] = []
    dvds: list[tuple[int, LinearTerm]] = []
    lins: list[tuple[str, int, LinearTerm]] = []  # (shape, coeff of x, rest)
    coeffs = []
    for lit in literals:
        if isinstance(lit, IntLt):
            lin = linearize(lit.b).add(linearize(lit.a).scale(-1))
        elif isinstance(lit, Dvd):
            lin = linearize(lit.t)
        else:
            raise ContractViolation(
                f"pa_eliminate_exists expects 0 < t or dvd literals, got {lit!r}")
        c = lin.coeff(x)
        if c == 0:
            raise ContractViolation(f"literal {lit!r} does not mention {x}")
        coeffs.append(abs(c))
        lins.append(("dvd" if isinstance(lit, Dvd) else "lt",
                     lit.c if isinstance(lit, Dvd) else 0, lin))
    m = math.lcm(*coeffs)
    # scale so x's coefficient becomes +-m, then read y = m*x
    for shape, d, lin in lins:
        c = lin.coeff(x)
        factor = m // abs(c)
        lin = lin.scale(factor)
        rest = lin.drop(x)
        if shape == "dvd":
            # after scaling, coefficient of x is +-m; flip sign to +m
            if lin.coeff(x) < 0:
                lin = lin.scale(-1)
                rest = lin.drop(x)
            dvds.append((d * factor, rest))
        elif lin.coeff(x) > 0:
            lowers.append(rest.scale(-1))  # y > -rest
        else:
            uppers.append(rest)  # 0 < -y + rest, i.e. y < rest
    dvds.append((m, LinearTerm(0, ())))
    n = math.lcm(*[d for d, _ in dvds])

    def inst(y: LinearTerm) -> list[Formula] | None:
        parts = []
        for low in lowers:
            parts.append(_lt0(y.add(low.scale(-1))))  # 0 < y - low
        for up in uppers:
            parts.append(_lt0(up.add(y.scale(-1))))  # 0 < up - y
        for d, e in dvds:
            parts.append(_dvd(d, y.add(e)))
        lits = []
        for p in parts:
            if isinstance(p, FalseF):
                return None
            if not isinstance(p, TrueF):
                lits.append(p)
        return _clean_conj(lits)

    if lowers:
        cands = [b.shift(i) for b in lowers for i in range(1, n + 1)]
    elif uppers:
        cands = [u.shift(-i) for u in uppers for i in range(1, n + 1)]
    else:
        cands = [LinearTerm(i, ()) for i in range(1, n + 1)]
    out = []
    for y in cands:
        lits = inst(y)
        if lits is not None:
            out.append(lits)
    return _clean_branches(out)


def _elim_conj_list(x: str, lits: list[Formula]) -> list[list[Formula]]:
    """∃x over one conjunction of literals; result as DNF branch lists."""
    with_x = [l for l in lits if _lit_has_var(l, x)]
    without = [l for l in lits if not _lit_has_var(l, x)]
    if not with_x:
        return [lits]
    # short cut: an equality with +-1 coefficient on x defines x outright
    for lit in with_x:
        if isinstance(lit, IntEq):
            lin = linearize(lit.a).add(linearize(lit.b).scale(-1))
            c = lin.coeff(x)
            if c in (1, -1):
                repl = lin.drop(x).scale(-c)
                rest = []
                for l in with_x:
                    if l is lit:
                        continue
                    s = _subst_lit(l, x, repl)
                    if isinstance(s, FalseF):
                        return []
                    if not isinstance(s, TrueF):
                        rest.append(s)
                cleaned = _clean_conj(rest + without)
                return [] if cleaned is None else [cleaned]
    # general path: normalize the x-literals to 0<t / dvd atoms and
    # distribute the little disjunctions that negations may introduce
    # (normalization may also make x vanish from a literal, so re-split)
    normed = conj([normalize_atoms(l) for l in with_x])
    out = []
    for sub in _dnf(normed):
        sub_x = [l for l in sub if _lit_has_var(l, x)]
        sub_rest = [l for l in sub if not _lit_has_var(l, x)]
        for got in (_elim_atoms_list(sub_x, x) if sub_x else [[]]):
            cleaned = _clean_conj(got + sub_rest + without)
            if cleaned is not None:
                out.append(cleaned)
    return _clean_branches(out)


def _one_point(x: str, parts: list[Formula]) -> list[Formula] | None:
    """Substitute away a top-level conjunct x = t, if one exists."""
    for lit in parts:
        if isinstance(lit, IntEq):
            lin = linearize(lit.a).add(linearize(lit.b).scale(-1))
            c = lin.coeff(x)
            if c in (1, -1):
                repl = delinearize(lin.drop(x).scale(-c))
                return [substitute(p, x, Sort.INT, repl)
                        for p in parts if p is not lit]
    return None


_GRID_CAP = 64


def _ground_interval(x: str, parts: list[Formula]) -> range | None:
    """The interval that top-level conjuncts lo < x < hi pin x to, if any."""
    lo = hi = None
    for lit in parts:
        shaped = _lin_lit(lit)
        if shaped is None or shaped[0] != "lt":
            continue
        lin = shaped[1]
        c = lin.coeff(x)
        if c not in (1, -1) or lin.drop(x).coeffs:
            continue
        if c == 1:  # 0 < x + d
            b = -lin.const
            lo = b if lo is None else max(lo, b)
        else:  # 0 < -x + d
            b = lin.const
            hi = b if hi is None else min(hi, b)
    if lo is None or hi is None:
        return None
    return range(lo + 1, hi)


def _grid_instantiate(xs: list[str], nb: Formula) -> tuple[list[str], Formula]:
    """Replace interval-pinned variables by their finitely many values.

    A variable boxed into a small ground interval by top-level bound
    conjuncts contributes exactly the points of that interval; spelling
    those out (as a disjunction of instances) sidesteps the normal-form
    conversion entirely, which matters once the body is the negation of an
    earlier elimination round.  All boxed variables are substituted in one
    grid so their bound literals are still top-level when read.
    """
    parts = conjuncts(nb)
    boxed: list[tuple[str, range]] = []
    span = 1
    for x in xs:
        r = _ground_interval(x, parts)
        if r is not None and span * max(len(r), 1) <= _GRID_CAP:
            boxed.append((x, r))
            span *= max(len(r), 1)
    if not boxed:
        return xs, nb
    pieces = []
    for combo in itertools.product(*(r for _, r in boxed)):
        g = nb
        for (x, _), val in zip(boxed, combo):
            g = substitute(g, x, Sort.INT, IntConst(val))
        g = _flatten_simplify(g)
        if isinstance(g, TrueF):
            return [], TRUE
        if not isinstance(g, FalseF):
            pieces.append(g)
    names = {x for x, _ in boxed}
    return [x for x in xs if x not in names], _flatten_simplify(
        disj(dict.fromkeys(pieces)))


def _elim_block(xs: list[str], body: Formula) -> Formula:
    """∃xs over body: one NNF/DNF pass, innermost variable first.

    Eliminating a whole quantifier block against a single branch pool
    avoids rebuilding the disjunctive normal form per variable, which is
    what makes alternation-heavy inputs tractable.  Equalities that pin a
    variable are substituted away before any branching; the translated
    partition trees consist almost entirely of such definitions.
    """
    nb = _flatten_simplify(to_nnf(body))
    todo = [x for x in xs if x in free_vars(nb)]
    while todo:
        parts = conjuncts(nb)
        for x in reversed(todo):
            got = _one_point(x, parts)
            if got is not None:
                nb = _flatten_simplify(conj(got))
                fv = free_vars(nb)
                todo = [v for v in todo if v != x and v in fv]
                break
        else:
            break
    if not todo:
        return nb
    todo, nb = _grid_instantiate(todo, nb)
    if not todo:
        return nb
    pool = _dnf(nb)
    for x in reversed(todo):
        grown: list[list[Formula]] = []
        for lits in pool:
            grown.extend(_elim_conj_list(x, lits))
        pool = _clean_branches(grown)
        if not pool:
            return FALSE
    return _flatten_simplify(disj([conj(b) for b in pool]))


def _leads_to(f: Formula, kind: type, through: type) -> bool:
    while isinstance(f, through):
        f = f.b
    return isinstance(f, kind)


def _split_block(f: Formula) -> tuple[list[str], Formula]:
    """Peel a maximal same-kind quantifier block.

    The set-to-integer translation interleaves its quantifiers with guard
    and definition formulas (∀l. 0 ≤ l ⇒ … and ∃l. 0 ≤ l ∧ …); those are
    hoisted into the block body whenever no hoisted formula mentions a
    later variable, so the whole block can be eliminated in one pass.
    """
    kind = type(f)
    through = Implies if kind is Forall else And
    names: list[str] = []
    hoisted: list[Formula] = []
    g = f
    while isinstance(g, kind):
        if any(g.var in free_vars(h) for h in hoisted):
            break
        names.append(g.var)
        g = g.body
        while isinstance(g, through) and _leads_to(g.b, kind, through):
            hoisted.append(g.a)
            g = g.b
    if hoisted:
        g = Implies(conj(hoisted), g) if kind is Forall else conj(hoisted + [g])
    return names, g


def _qe(f: Formula) -> Formula:
    if isinstance(f, Exists):
        names, body = _split_block(f)
        return _elim_block(names, _qe(body))
    if isinstance(f, Forall):
        names, body = _split_block(f)
        return _flatten_simplify(Not(_elim_block(names, Not(_qe(body)))))
    if isinstance(f, Not):
        return Not(_qe(f.a))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(_qe(f.a), _qe(f.b))
    return f


# Elimination can emit disjunction chains thousands of literals deep, and
# every downstream tree walk recurses along them.  Work that overflows the
# default interpreter limit is retried once on a thread with a large stack.
_DEEP_LIMIT = 200_000
_DEEP_STACK = 512 * 1024 * 1024


def _deep(fn):
    try:
        return fn()
    except RecursionError:
        pass
    box: list = []

    def work():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(_DEEP_LIMIT)
        try:
            box.append((None, fn()))
        except BaseException as exc:
            box.append((exc, None))
        finally:
            sys.setrecursionlimit(old)

    size = threading.stack_size(_DEEP_STACK)
    try:
        worker = threading.Thread(target=work, name="bapa-qe")
        worker.start()
        worker.join()
    finally:
        threading.stack_size(size)
    exc, val = box[0]
    if exc is not None:
        raise exc
    return val


def pa_qe(f: Formula) -> Formula:
    """Equivalent quantifier-free formula over the integers."""
    check_pa(f)
    return _deep(lambda: _flatten_simplify(_qe(_compile_props(f))))


_decide_cache: dict[Formula, bool] = {}


def pa_decide(f: Formula) -> bool:
    """Truth of a closed PA sentence (True = valid)."""
    fv = free_vars(f)
    if fv:
        raise FreeVarsError("not a sentence, free variables: " + ", ".join(fv))
    hit = _decide_cache.get(f)
    if hit is None:
        hit = _deep(lambda: pa_eval(pa_qe(f), {}))
        _decide_cache[f] = hit
    return hit


# ---------------------------------------------------------------- evaluation

def _ev_term(t: IntTerm, env, maxc: int | None) -> int:
    if isinstance(t, IntVar):
        try:
            return env[t.name]
        except KeyError:
            raise FreeVarsError(f"no binding for {t.name}") from None
    if isinstance(t, IntConst):
        return t.value
    if isinstance(t, Add):
        return _ev_term(t.a, env, maxc) + _ev_term(t.b, env, maxc)
    if isinstance(t, Sub):
        return _ev_term(t.a, env, maxc) - _ev_term(t.b, env, maxc)
    if isinstance(t, Mul):
        return t.coeff * _ev_term(t.a, env, maxc)
    if isinstance(t, MaxCard) and maxc is not None:
        return maxc
    raise ContractViolation(f"cannot evaluate term {t!r}")


def _ev(f: Formula, env, maxc: int | None) -> bool:
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, PropVar):
        try:
            return bool(env[f.name])
        except KeyError:
            raise FreeVarsError(f"no binding for {f.name}") from None
    if isinstance(f, IntEq):
        return _ev_term(f.a, env, maxc) == _ev_term(f.b, env, maxc)
    if isinstance(f, IntLt):
        return _ev_term(f.a, env, maxc) < _ev_term(f.b, env, maxc)
    if isinstance(f, Dvd):
        return _ev_term(f.t, env, maxc) % f.c == 0
    if isinstance(f, Not):
        return not _ev(f.a, env, maxc)
    if isinstance(f, And):
        return _ev(f.a, env, maxc) and _ev(f.b, env, maxc)
    if isinstance(f, Or):
        return _ev(f.a, env, maxc) or _ev(f.b, env, maxc)
    if isinstance(f, Implies):
        return (not _ev(f.a, env, maxc)) or _ev(f.b, env, maxc)
    if isinstance(f, Iff):
        return _ev(f.a, env, maxc) == _ev(f.b, env, maxc)
    if isinstance(f, QUANTIFIERS):
        raise ContractViolation("pa_eval expects a quantifier-free formula")
    raise ContractViolation(f"cannot evaluate {f!r}")


def pa_eval(f: Formula, env: dict[str, int]) -> bool:
    """Evaluate a quantifier-free PA formula under an integer assignment."""
    return _ev(f, env, None)


def pa_bounded_truth(f: Formula, env: dict[str, int] | None = None,
                     bound: int = 10) -> bool:
    """Truth by brute-force quantifier enumeration over [-bound, bound].

    Sound only relative to the bound; used as an independent cross-check
    of the exact engine, never as the engine itself.
    """
    env = dict(env or {})

    def ev(g: Formula) -> bool:
        if isinstance(g, Exists) or isinstance(g, Forall):
            combine = any if isinstance(g, Exists) else all
            if g.sort is Sort.PROP:
                values: list[int] = [0, 1]
            else:
                values = list(range(-bound, bound + 1))

            def tries():
                for v in values:
                    env[g.var] = v
                    yield ev(g.body)
                env.pop(g.var, None)

            result = combine(tries())
            env.pop(g.var, None)
            return result
        if isinstance(g, Not):
            return not ev(g.a)
        if isinstance(g, And):
            return ev(g.a) and ev(g.b)
        if isinstance(g, Or):
            return ev(g.a) or ev(g.b)
        if isinstance(g, Implies):
            return (not ev(g.a)) or ev(g.b)
        if isinstance(g, Iff):
            return ev(g.a) == ev(g.b)
        return _ev(g, env, None)

    return ev(f)


def pa_eval_bounded(g: Formula, maxc: int) -> bool:
    """Evaluate a translated pure-BA sentence by clamped enumeration.

    Truth of the translation of a pure BA sentence with S set variables
    only depends on min(maxc, 2^S), so the universe cardinality is clamped
    there before evaluating.  Within that clamp the partition-sum
    equations drive the enumeration: a block variable with parent value p
    only ranges over [0, p], and once its sibling is fixed its value is
    forced outright.  (Skipping sum-violating values is sound: they make
    an existential block false and a universal block vacuously true.)
    Memory use therefore depends on the number of set variables S, not on
    maxc.  Only formulas carrying the translation's depth annotations can
    be evaluated this way.
    """
    plan = getattr(g, "_alpha_plan", None)
    if plan is None:
        raise ContractViolation(
            "formula has no translation depth annotations; "
            "produce it with alpha_translate on a pure BA sentence")
    maxc_val = min(maxc, 1 << plan.set_vars)

    # child variable -> (parent variable or None for MAXC, sibling)
    pair: dict[str, tuple[str | None, str]] = {}
    for h in subformulas(g):
        if (isinstance(h, IntEq) and isinstance(h.a, (IntVar, MaxCard))
                and isinstance(h.b, Add)
                and isinstance(h.b.a, IntVar) and isinstance(h.b.b, IntVar)):
            parent = h.a.name if isinstance(h.a, IntVar) else None
            pair[h.b.a.name] = (parent, h.b.b.name)
            pair[h.b.b.name] = (parent, h.b.a.name)

    env: dict[str, int] = {}

    def ev(f: Formula) -> bool:
        if isinstance(f, (Exists, Forall)):
            if f.var not in plan.depths:
                raise ContractViolation(
                    f"quantified variable {f.var} lacks a depth annotation")
            info = pair.get(f.var)
            if info is None:
                values = range(maxc_val + 1)
            else:
                parent, sibling = info
                p = maxc_val if parent is None else env[parent]
                if sibling in env:
                    forced = p - env[sibling]
                    values = (forced,) if forced >= 0 else ()
                else:
                    values = range(p + 1)
            combine = any if isinstance(f, Exists) else all

            def tries():
                for v in values:
                    env[f.var] = v
                    yield ev(f.body)

            result = combine(tries())
            env.pop(f.var, None)
            return result
        if isinstance(f, Not):
            return not ev(f.a)
        if isinstance(f, And):
            return ev(f.a) and ev(f.b)
        if isinstance(f, Or):
            return ev(f.a) or ev(f.b)
        if isinstance(f, Implies):
            return (not ev(f.a)) or ev(f.b)
        if isinstance(f, Iff):
            return ev(f.a) == ev(f.b)
        return _ev(f, env, maxc_val)

    return ev(g)
