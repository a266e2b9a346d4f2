"""Brute-force evaluation of sentences over an explicit finite universe.

Sets over a universe of size u are bitmasks in [0, 2^u); set and
propositional quantifiers enumerate their finitely many values with
short-circuiting.  Integer quantifiers cannot be enumerated, so when one
is reached the remaining subformula is grounded: the current set and
propositional choices are substituted in (cardinalities become constants),
any set quantifiers further inside are expanded into finite disjunctions
or conjunctions, and the residual pure-integer sentence goes to the exact
Presburger decision procedure.  A bounded backend that enumerates integers
over [-B, B] is available instead, precisely so the Presburger engine can
be cross-checked against something that does not depend on it.

This module is the semantic reference for differential tests; it favors
obviousness over speed and refuses inputs whose enumeration cost would
explode.
"""

from __future__ import annotations

from bapa.core import (
    Add, And, Card, Compl, Dvd, EmptySet, Exists, FalseF, Fin, FinUniv,
    Forall, Formula, FreeVarsError, Iff, Implies, IntConst, IntEq, IntLt,
    IntVar, Inter, MaxCard, Mul, Not, Or, PropVar, QUANTIFIERS,
    ResourceError, SetEq, SetVar, Sort, Sub, SubsetEq, TrueF, TRUE, FALSE,
    Union, UnivSet, conj, disj, free_vars, subformulas,
)
from bapa.presburger import pa_bounded_truth, pa_decide

MAX_SET_CHOICES = 1 << 24

_ABSENT = object()


def _mask(t, env: dict, full: int) -> int:
    if isinstance(t, SetVar):
        try:
            return env[t.name]
        except KeyError:
            raise FreeVarsError(f"no set binding for {t.name}") from None
    if isinstance(t, EmptySet):
        return 0
    if isinstance(t, UnivSet):
        return full
    if isinstance(t, Union):
        return _mask(t.a, env, full) | _mask(t.b, env, full)
    if isinstance(t, Inter):
        return _mask(t.a, env, full) & _mask(t.b, env, full)
    if isinstance(t, Compl):
        return full & ~_mask(t.a, env, full)
    raise FreeVarsError(f"cannot evaluate set term {t!r}")


def _int_ground(t, env: dict, u: int):
    """Integer term -> constant, with Card/MAXC evaluated under env."""
    full = (1 << u) - 1
    if isinstance(t, IntConst):
        return t.value
    if isinstance(t, Card):
        return _mask(t.arg, env, full).bit_count()
    if isinstance(t, MaxCard):
        return u
    if isinstance(t, Add):
        return _int_ground(t.a, env, u) + _int_ground(t.b, env, u)
    if isinstance(t, Sub):
        return _int_ground(t.a, env, u) - _int_ground(t.b, env, u)
    if isinstance(t, Mul):
        return t.coeff * _int_ground(t.a, env, u)
    if isinstance(t, IntVar):
        raise FreeVarsError(f"unexpected free integer variable {t.name}")
    raise FreeVarsError(f"cannot evaluate term {t!r}")


def _ground_int_term(t, env: dict, u: int):
    """Rebuild an integer term with sets evaluated but int vars kept."""
    full = (1 << u) - 1
    if isinstance(t, Card):
        return IntConst(_mask(t.arg, env, full).bit_count())
    if isinstance(t, MaxCard):
        return IntConst(u)
    if isinstance(t, Add):
        return Add(_ground_int_term(t.a, env, u), _ground_int_term(t.b, env, u))
    if isinstance(t, Sub):
        return Sub(_ground_int_term(t.a, env, u), _ground_int_term(t.b, env, u))
    if isinstance(t, Mul):
        return Mul(t.coeff, _ground_int_term(t.a, env, u))
    return t


def _expand(f: Formula, env: dict, u: int) -> Formula:
    """Ground f to a pure PA formula: sets/props from env, set and prop
    quantifiers expanded finitely, integer quantifiers kept in place."""
    full = (1 << u) - 1
    if isinstance(f, QUANTIFIERS):
        if f.sort is Sort.INT:
            return type(f)(f.var, Sort.INT, _expand(f.body, env, u))
        is_ex = isinstance(f, Exists)
        values = range(1 << u) if f.sort is Sort.SET else (False, True)
        saved = env.pop(f.var, _ABSENT)
        try:
            branches = []
            seen = set()
            for v in values:
                env[f.var] = v
                g = _expand(f.body, env, u)
                if isinstance(g, TrueF if is_ex else FalseF):
                    return g
                if not isinstance(g, FalseF if is_ex else TrueF) and g not in seen:
                    seen.add(g)
                    branches.append(g)
            return disj(branches) if is_ex else conj(branches)
        finally:
            if saved is _ABSENT:
                env.pop(f.var, None)
            else:
                env[f.var] = saved
    if isinstance(f, Not):
        a = _expand(f.a, env, u)
        if isinstance(a, TrueF):
            return FALSE
        if isinstance(a, FalseF):
            return TRUE
        return Not(a)
    if isinstance(f, (And, Or, Implies, Iff)):
        a = _expand(f.a, env, u)
        b = _expand(f.b, env, u)
        if isinstance(f, And):
            if isinstance(a, FalseF) or isinstance(b, FalseF):
                return FALSE
            if isinstance(a, TrueF):
                return b
            if isinstance(b, TrueF):
                return a
        elif isinstance(f, Or):
            if isinstance(a, TrueF) or isinstance(b, TrueF):
                return TRUE
            if isinstance(a, FalseF):
                return b
            if isinstance(b, FalseF):
                return a
        elif isinstance(f, Implies):
            if isinstance(a, FalseF) or isinstance(b, TrueF):
                return TRUE
            if isinstance(a, TrueF):
                return b
        else:
            if isinstance(a, TrueF):
                return b
            if isinstance(b, TrueF):
                return a
            if isinstance(a, FalseF):
                return TRUE if isinstance(b, FalseF) else Not(b)
            if isinstance(b, FalseF):
                return Not(a)
        return type(f)(a, b)
    if isinstance(f, (SetEq, SubsetEq)):
        ma, mb = _mask(f.a, env, full), _mask(f.b, env, full)
        ok = ma == mb if isinstance(f, SetEq) else (ma & ~mb) == 0
        return TRUE if ok else FALSE
    if isinstance(f, (Fin, FinUniv)):
        return TRUE
    if isinstance(f, PropVar):
        try:
            return TRUE if env[f.name] else FALSE
        except KeyError:
            raise FreeVarsError(f"no binding for {f.name}") from None
    if isinstance(f, (IntEq, IntLt)):
        return type(f)(_ground_int_term(f.a, env, u),
                       _ground_int_term(f.b, env, u))
    if isinstance(f, Dvd):
        return Dvd(f.c, _ground_int_term(f.t, env, u))
    return f


def _max_const(f: Formula) -> int:
    best = 0
    for g in subformulas(f):
        for t in _atom_terms(g):
            best = max(best, _max_const_term(t))
        if isinstance(g, Dvd):
            best = max(best, g.c)
    return best


def _atom_terms(g):
    if isinstance(g, (IntEq, IntLt)):
        return (g.a, g.b)
    if isinstance(g, Dvd):
        return (g.t,)
    return ()


def _max_const_term(t) -> int:
    if isinstance(t, IntConst):
        return abs(t.value)
    if isinstance(t, (Add, Sub)):
        return max(_max_const_term(t.a), _max_const_term(t.b))
    if isinstance(t, Mul):
        return max(abs(t.coeff), _max_const_term(t.a))
    return 0


def oracle(f: Formula, u: int, int_backend: str = "pa_exact",
           bound: int | None = None) -> bool:
    """Ground truth of the sentence f over a universe of u elements.

    int_backend is "pa_exact" (integer subproblems go to pa_decide) or
    "bounded" (integers enumerate over [-B, B]; incomplete but independent
    of the Presburger engine).  The default B is 2u + 10 + the largest
    constant in f.
    """
    if u < 0:
        raise ValueError("universe size must be non-negative")
    if u > 6:
        raise ResourceError(f"universe size {u} exceeds the oracle guard (6)")
    fv = free_vars(f)
    if fv:
        raise FreeVarsError("oracle needs a sentence, free: " + ", ".join(fv))
    nset = sum(1 for g in subformulas(f)
               if isinstance(g, QUANTIFIERS) and g.sort is Sort.SET)
    nprop = sum(1 for g in subformulas(f)
                if isinstance(g, QUANTIFIERS) and g.sort is Sort.PROP)
    cost = (1 << (u * nset)) << nprop
    if cost > MAX_SET_CHOICES:
        raise ResourceError(
            f"enumeration cost 2^{u * nset + nprop} = {cost} exceeds the guard")
    if int_backend == "bounded":
        b = bound if bound is not None else 2 * u + 10 + _max_const(f)
        decide = lambda g: pa_bounded_truth(g, {}, b)  # noqa: E731
    elif int_backend == "pa_exact":
        decide = pa_decide
    else:
        raise ValueError(f"unknown integer backend {int_backend!r}")

    full = (1 << u) - 1

    def ev(g: Formula, env: dict) -> bool:
        if isinstance(g, QUANTIFIERS):
            if g.sort is Sort.INT:
                return decide(_expand(g, env, u))
            is_ex = isinstance(g, Exists)
            values = range(1 << u) if g.sort is Sort.SET else (False, True)
            saved = env.pop(g.var, _ABSENT)
            try:
                for v in values:
                    env[g.var] = v
                    if ev(g.body, env) is is_ex:
                        return is_ex
                return not is_ex
            finally:
                if saved is _ABSENT:
                    env.pop(g.var, None)
                else:
                    env[g.var] = saved
        if isinstance(g, TrueF):
            return True
        if isinstance(g, FalseF):
            return False
        if isinstance(g, Not):
            return not ev(g.a, env)
        if isinstance(g, And):
            return ev(g.a, env) and ev(g.b, env)
        if isinstance(g, Or):
            return ev(g.a, env) or ev(g.b, env)
        if isinstance(g, Implies):
            return (not ev(g.a, env)) or ev(g.b, env)
        if isinstance(g, Iff):
            return ev(g.a, env) == ev(g.b, env)
        if isinstance(g, (SetEq, SubsetEq)):
            ma, mb = _mask(g.a, env, full), _mask(g.b, env, full)
            return ma == mb if isinstance(g, SetEq) else (ma & ~mb) == 0
        if isinstance(g, (Fin, FinUniv)):
            return True
        if isinstance(g, PropVar):
            return bool(env[g.name])
        if isinstance(g, IntEq):
            return _int_ground(g.a, env, u) == _int_ground(g.b, env, u)
        if isinstance(g, IntLt):
            return _int_ground(g.a, env, u) < _int_ground(g.b, env, u)
        if isinstance(g, Dvd):
            return _int_ground(g.t, env, u) % g.c == 0
        raise FreeVarsError(f"cannot evaluate {g!r}")

    return ev(f, {})


def oracle_sweep(f: Formula, u_max: int = 4, int_backend: str = "pa_exact") -> list[tuple[int, bool]]:
    """oracle at every universe size 0..u_max."""
    if u_max > 6:
        raise ResourceError(f"sweep bound {u_max} exceeds the oracle guard (6)")
    return [(u, oracle(f, u, int_backend)) for u in range(u_max + 1)]
