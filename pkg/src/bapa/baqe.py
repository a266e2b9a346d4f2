"""Quantifier elimination for Boolean algebra with constant cardinalities.

Formulas whose atoms compare set expressions, or their cardinalities, with
concrete integer constants admit a direct elimination procedure.  Each
literal mentioning the quantified variable y is rewritten over the
partition generated by the variables it occurs with; its cardinality
bound is distributed across the partition pieces; and y disappears by
merging each piece's inside/outside pair |s ∩ y|, |s ∩ compl(y)| into a
single bound on |s| (exact when both sides were exact, a lower bound
otherwise).  The output is a disjunction of conjunctions of literals
``card(b) = k`` and ``card(b) >= k`` over the remaining variables,
equivalent to the input on every finite universe.

Bounds must be constants.  Formulas relating cardinalities to integer
variables belong to the full set-plus-arithmetic language and are
rejected with a pointer to the translation pipeline; so are inputs with
constants above MAX_CONSTANT, since distributing a bound k over pieces
enumerates every way of writing k as an ordered sum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from bapa.core import (
    Add, And, Card, Compl, ContractViolation, Dvd, EmptySet, Exists, FalseF,
    Fin, FinUniv, Forall, Formula, Iff, Implies, Inter, IntConst, IntEq,
    IntLt, IntTerm, IntVar, MaxCard, Mul, Not, Or, PropVar, ResourceError,
    SetEq, SetTerm, SetVar, Sort, Sub, SubsetEq, TrueF, TRUE, FALSE,
    UnivSet, Union, check_sorted, conj, disj, free_vars,
)
from bapa.normalize import simplify_const, to_nnf, to_prenex

# Distributing a bound k over p+q partition pieces enumerates the ordered
# sums k1+...+k(p+q) = k, so constants are kept small.  Larger bounds are
# no loss: the integer translation handles them without enumeration.
MAX_CONSTANT = 8


@dataclass(frozen=True)
class CardEq:
    """The literal ``card(term) = bound`` with a concrete bound."""

    term: SetTerm
    bound: int

    def formula(self) -> Formula:
        if self.bound < 0:
            return FALSE
        return IntEq(Card(self.term), IntConst(self.bound))


@dataclass(frozen=True)
class CardGeq:
    """The literal ``card(term) >= bound`` with a concrete bound."""

    term: SetTerm
    bound: int

    def formula(self) -> Formula:
        if self.bound <= 0:
            return TRUE
        return IntLt(IntConst(self.bound - 1), Card(self.term))


BaLiteral = CardEq | CardGeq


# ------------------------------------------------------- atom recognition

def _split(t: IntTerm) -> tuple[SetTerm | None, int]:
    """View an integer term as ``card(b) + c`` (b may be absent).

    MAXC counts as card(univ).  Anything else — integer variables, two
    cardinalities added together, a negated or scaled cardinality — is
    outside this fragment and rejected.
    """
    if isinstance(t, IntConst):
        return None, t.value
    if isinstance(t, MaxCard):
        return UnivSet(), 0
    if isinstance(t, Card):
        return t.arg, 0
    if isinstance(t, IntVar):
        raise ContractViolation(
            f"integer variable '{t.name}' in a cardinality bound: this "
            "eliminator handles constant bounds only; formulas relating "
            "cardinalities to integer variables need alpha_translate")
    if isinstance(t, Add):
        b1, c1 = _split(t.a)
        b2, c2 = _split(t.b)
        if b1 is not None and b2 is not None:
            raise ContractViolation(
                "atom relates two cardinalities; use alpha_translate")
        return b1 if b1 is not None else b2, c1 + c2
    if isinstance(t, Sub):
        b1, c1 = _split(t.a)
        b2, c2 = _split(t.b)
        if b2 is not None:
            raise ContractViolation(
                "subtracted cardinality is outside the constant-bound "
                "fragment; use alpha_translate")
        return b1, c1 - c2
    if isinstance(t, Mul):
        b, c = _split(t.a)
        if b is None:
            return None, t.coeff * c
        if t.coeff == 1:
            return b, c
        if t.coeff == 0:
            return None, 0
        raise ContractViolation(
            "scaled cardinality is outside the constant-bound fragment; "
            "use alpha_translate")
    raise ContractViolation(f"unsupported integer term {t!r}")


def _card_compare(a: IntTerm, b: IntTerm, strict: bool,
                  negated: bool) -> Formula:
    """Turn ``a = b`` / ``a < b`` (possibly negated) into positive literals.

    Both orientations of card-versus-constant are accepted; ground
    comparisons fold to a truth constant.
    """
    (s1, c1), (s2, c2) = _split(a), _split(b)
    if s1 is not None and s2 is not None:
        raise ContractViolation(
            "atom relates two cardinalities; use alpha_translate")
    if s1 is None and s2 is None:
        if strict:
            value = c1 < c2
        else:
            value = c1 == c2
        return FALSE if value == negated else TRUE
    if not strict:
        term, k = (s1, c2 - c1) if s1 is not None else (s2, c1 - c2)
        if negated:
            return _expand_not_eq(term, k)
        return CardEq(term, k).formula()
    if s2 is not None:
        # c1 < card(b) + c2, i.e. card(b) >= c1 - c2 + 1
        term, k = s2, c1 - c2 + 1
        if negated:
            return _expand_not_geq(term, k)
        return CardGeq(term, k).formula()
    # card(b) + c1 < c2, i.e. not (card(b) >= c2 - c1)
    term, k = s1, c2 - c1
    if negated:
        return CardGeq(term, k).formula()
    return _expand_not_geq(term, k)


def _expand_not_eq(term: SetTerm, k: int) -> Formula:
    if k < 0:
        return TRUE
    smaller = [CardEq(term, i).formula() for i in range(k)]
    return disj(smaller + [CardGeq(term, k + 1).formula()])


def _expand_not_geq(term: SetTerm, k: int) -> Formula:
    if k <= 0:
        return FALSE
    return disj(CardEq(term, i).formula() for i in range(k))


def expand_negative_literal(lit: BaLiteral | Formula) -> Formula:
    """Rewrite a negated literal as a disjunction of positive ones.

    ``~(card(b) = k)`` becomes the smaller exact cardinalities plus
    ``card(b) >= k+1``; ``~(card(b) >= k)`` becomes the smaller exact
    cardinalities alone.  Accepts either a literal object (interpreted as
    its negation) or a negated atom as a formula.
    """
    if isinstance(lit, CardEq):
        return _expand_not_eq(lit.term, lit.bound)
    if isinstance(lit, CardGeq):
        return _expand_not_geq(lit.term, lit.bound)
    inner = lit.a if isinstance(lit, Not) else lit
    if isinstance(inner, IntEq):
        return _card_compare(inner.a, inner.b, strict=False, negated=True)
    if isinstance(inner, IntLt):
        return _card_compare(inner.a, inner.b, strict=True, negated=True)
    raise ContractViolation(
        f"not a negated cardinality literal: {lit!r}")


# --------------------------------------------------- partition machinery

def _set_vars(t: SetTerm, out: dict[str, None]) -> None:
    if isinstance(t, SetVar):
        out.setdefault(t.name)
    elif isinstance(t, (Union, Inter)):
        _set_vars(t.a, out)
        _set_vars(t.b, out)
    elif isinstance(t, Compl):
        _set_vars(t.a, out)


def _holds(t: SetTerm, bits: dict[str, bool]) -> bool:
    """Membership of one partition region in the set denoted by t."""
    if isinstance(t, SetVar):
        return bits[t.name]
    if isinstance(t, EmptySet):
        return False
    if isinstance(t, UnivSet):
        return True
    if isinstance(t, Union):
        return _holds(t.a, bits) or _holds(t.b, bits)
    if isinstance(t, Inter):
        return _holds(t.a, bits) and _holds(t.b, bits)
    return not _holds(t.a, bits)


def _cube_term(xs: tuple[str, ...], bits: tuple[int, ...]) -> SetTerm:
    if not xs:
        return UnivSet()
    parts = [SetVar(x) if bit else Compl(SetVar(x))
             for x, bit in zip(xs, bits)]
    out = parts[0]
    for p in parts[1:]:
        out = Inter(out, p)
    return out


def _compositions(k: int, n: int):
    """All ordered splits of k into n non-negative parts."""
    if n == 0:
        if k == 0:
            yield ()
        return
    for first in range(k + 1):
        for rest in _compositions(k - first, n - 1):
            yield (first, *rest)


def ba_eliminate_innermost(literals: list[BaLiteral], target: str) -> Formula:
    """Eliminate ``exists target`` from a conjunction of literals.

    Every literal must mention the target variable.  Each is distributed
    over the partition of its co-occurring variables, the per-piece
    inside/outside constraints are merged (contradictory pairs kill the
    branch, comparable pairs keep the stronger), and the surviving pairs
    collapse to bounds on the pieces themselves.
    """
    ordered: dict[str, None] = {}
    for lit in literals:
        here: dict[str, None] = {}
        _set_vars(lit.term, here)
        if target not in here:
            raise ContractViolation(
                f"literal {lit!r} does not mention '{target}'")
        ordered.update(here)
    ordered.pop(target, None)
    xs = tuple(ordered)
    cubes = list(itertools.product((1, 0), repeat=len(xs)))

    # Each option maps (cube, side) -> (exact?, bound); side 1 is the part
    # inside the target, side 0 the part outside.  Absent keys mean >= 0.
    def options(lit: BaLiteral) -> list[dict]:
        parts = []
        for cube in cubes:
            bits = dict(zip(xs, (bool(b) for b in cube)))
            for side in (1, 0):
                bits[target] = bool(side)
                if _holds(lit.term, bits):
                    parts.append((cube, side))
        exact = isinstance(lit, CardEq)
        if exact and lit.bound < 0:
            return []
        if not exact and lit.bound <= 0:
            return [{}]
        if not parts:
            # The term denotes the empty set on every region.
            return [{}] if exact and lit.bound == 0 else []
        out = []
        for comp in _compositions(lit.bound, len(parts)):
            frag = {}
            for key, k in zip(parts, comp):
                if exact or k > 0:
                    frag[key] = (exact, k)
            out.append(frag)
        return out

    tables: list[dict] = [{}]
    for lit in literals:
        opts = options(lit)
        merged: list[dict] = []
        seen = set()
        for table in tables:
            for frag in opts:
                new = dict(table)
                ok = True
                for key, (exact, k) in frag.items():
                    if key not in new:
                        new[key] = (exact, k)
                        continue
                    have_exact, have_k = new[key]
                    if exact and have_exact:
                        if k != have_k:
                            ok = False
                            break
                    elif exact:
                        if k < have_k:
                            ok = False
                            break
                        new[key] = (True, k)
                    elif have_exact:
                        if have_k < k:
                            ok = False
                            break
                    else:
                        new[key] = (False, max(k, have_k))
                if not ok:
                    continue
                fp = frozenset(new.items())
                if fp not in seen:
                    seen.add(fp)
                    merged.append(new)
        tables = merged

    results = []
    for table in tables:
        atoms = []
        for cube in cubes:
            inside = table.get((cube, 1))
            outside = table.get((cube, 0))
            if inside is None and outside is None:
                continue
            exact1, k = inside if inside else (False, 0)
            exact0, l = outside if outside else (False, 0)
            piece = _cube_term(xs, cube)
            if exact1 and exact0:
                atoms.append(CardEq(piece, k + l).formula())
            else:
                atom = CardGeq(piece, k + l).formula()
                if atom is not TRUE:
                    atoms.append(atom)
        results.append(conj(atoms))
    out = []
    for r in results:
        if r not in out:
            out.append(r)
    return disj(out)


# -------------------------------------------------------- full procedure

def _positive(f: Formula) -> Formula:
    """Map an NNF formula to one built from positive cardinality literals."""
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, And):
        return And(_positive(f.a), _positive(f.b))
    if isinstance(f, Or):
        return Or(_positive(f.a), _positive(f.b))
    neg = isinstance(f, Not)
    atom = f.a if neg else f
    if isinstance(atom, SubsetEq):
        lit = CardEq(Inter(atom.a, Compl(atom.b)), 0)
        return expand_negative_literal(lit) if neg else lit.formula()
    if isinstance(atom, SetEq):
        one = CardEq(Inter(atom.a, Compl(atom.b)), 0)
        two = CardEq(Inter(atom.b, Compl(atom.a)), 0)
        if neg:
            return Or(expand_negative_literal(one),
                      expand_negative_literal(two))
        return And(one.formula(), two.formula())
    if isinstance(atom, IntEq):
        return _card_compare(atom.a, atom.b, strict=False, negated=neg)
    if isinstance(atom, IntLt):
        return _card_compare(atom.a, atom.b, strict=True, negated=neg)
    raise ContractViolation(
        f"atom outside the Boolean-algebra fragment: {atom!r}")


def _dnf(f: Formula) -> list[list[Formula]]:
    if isinstance(f, Or):
        return _dnf(f.a) + _dnf(f.b)
    if isinstance(f, And):
        out = []
        for left in _dnf(f.a):
            for right in _dnf(f.b):
                merged = list(left)
                merged.extend(lit for lit in right if lit not in merged)
                out.append(merged)
        return out
    return [[f]]


def _lift(atom: Formula) -> BaLiteral:
    if isinstance(atom, IntEq) and isinstance(atom.a, Card):
        return CardEq(atom.a.arg, atom.b.value)
    if isinstance(atom, IntLt) and isinstance(atom.b, Card):
        return CardGeq(atom.b.arg, atom.a.value + 1)
    raise ContractViolation(f"not a cardinality literal: {atom!r}")


def _clean_branches(branches: list[list[Formula]]) -> list[list[Formula]]:
    """Deduplicate DNF branches and drop subsumed ones.

    A branch whose literal set contains another branch's is implied by it
    and contributes nothing to the disjunction.  Without this pruning the
    composition enumeration piles up thousands of duplicate branches and
    the formula tree outgrows the recursion the normalizers rely on.
    """
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


def _branches(matrix: Formula) -> list[list[Formula]]:
    """Positive-literal DNF of a matrix, with units and dead branches gone."""
    out = []
    for lits in _dnf(_positive(to_nnf(matrix))):
        if any(isinstance(a, FalseF) for a in lits):
            continue
        out.append([a for a in lits if not isinstance(a, TrueF)])
    return _clean_branches(out)


def _eliminate_exists(matrix: Formula, y: str) -> Formula:
    out = []
    for lits in _branches(matrix):
        kept, targeted = [], []
        for a in lits:
            if y in free_vars(a):
                targeted.append(_lift(a))
            else:
                kept.append(a)
        if not targeted:
            out.append(kept)
            continue
        result = ba_eliminate_innermost(targeted, y)
        for d in _dnf(result):
            if any(isinstance(a, FalseF) for a in d):
                continue
            extra = [a for a in d if not isinstance(a, TrueF)]
            merged = list(kept)
            merged.extend(a for a in extra if a not in merged)
            out.append(merged)
    return disj(conj(lits) for lits in _clean_branches(out))


def _check_fragment(f: Formula) -> None:
    check_sorted(f)

    def walk(g: Formula) -> None:
        if isinstance(g, (TrueF, FalseF, SetEq, SubsetEq)):
            return
        if isinstance(g, (IntEq, IntLt)):
            for side in (g.a, g.b):
                b, c = _split(side)
                if abs(c) > MAX_CONSTANT:
                    raise ResourceError(
                        f"cardinality constant {c} exceeds {MAX_CONSTANT}; "
                        "bound distribution would enumerate too many "
                        "splits — use alpha_translate for large constants")
            _card_compare(g.a, g.b, strict=isinstance(g, IntLt),
                          negated=False)
            return
        if isinstance(g, (Dvd, PropVar, Fin, FinUniv)):
            raise ContractViolation(
                f"{type(g).__name__} atoms are outside pure Boolean "
                "algebra; use alpha_translate")
        if isinstance(g, (Exists, Forall)):
            if g.sort is not Sort.SET:
                raise ContractViolation(
                    f"quantifier over {g.sort.name.lower()} variable "
                    f"'{g.var}' is outside pure Boolean algebra; "
                    "use alpha_translate")
            walk(g.body)
            return
        if isinstance(g, Not):
            walk(g.a)
            return
        if isinstance(g, (And, Or, Implies, Iff)):
            walk(g.a)
            walk(g.b)
            return
        raise ContractViolation(f"unsupported formula {g!r}")

    walk(f)


def ba_eliminate(f: Formula) -> Formula:
    """Full quantifier elimination over the constant-cardinality fragment.

    Returns a quantifier-free disjunction of conjunctions of positive
    ``card(b) = k`` / ``card(b) >= k`` literals whose free variables are
    among those of the input, equivalent to it on all finite universes.
    """
    f = simplify_const(f)
    _check_fragment(f)
    pf = to_prenex(f)
    matrix = pf.matrix
    for kind, var, _sort in reversed(pf.prefix):
        if kind == "E":
            matrix = _eliminate_exists(matrix, var)
        else:
            matrix = Not(_eliminate_exists(Not(matrix), var))
    shaped = disj(conj(lits) for lits in _branches(matrix))
    return simplify_const(shaped)
