"""Deterministic formula corpora shared by the differential tests.

Every generator takes a seed and returns the same list on every run, so a
failure reported by index can be reproduced in isolation.  Sizes and
shape limits (variable counts, constants, nesting depth) follow the
acceptance criteria; the generators aim for variety rather than realism —
ground atoms, degenerate terms and trivially true sentences are all
useful, because the differentials compare verdicts, not interestingness.
"""

from __future__ import annotations

import math
import random

from bapa.core import (Add, And, Card, Compl, Dvd, EmptySet, Exists, Forall,
                       Formula, Iff, Implies, IntConst, IntEq, IntLt, IntVar,
                       Inter, MaxCard, Mul, Not, Or, SetEq, SetVar, Sort, Sub,
                       SubsetEq, UnivSet, Union, measure, subformulas)

SET_NAMES = ("x", "y", "z")
INT_NAMES = ("i", "j")


def _set_term(rng, vars_, depth):
    if depth == 0 or rng.random() < 0.35:
        leaves = [SetVar(v) for v in vars_] + [EmptySet(), UnivSet()]
        return rng.choice(leaves)
    op = rng.choice(("union", "inter", "compl"))
    if op == "compl":
        return Compl(_set_term(rng, vars_, depth - 1))
    cls = Union if op == "union" else Inter
    return cls(_set_term(rng, vars_, depth - 1), _set_term(rng, vars_, depth - 1))


def _int_term(rng, ivars, svars, depth, max_const=3, allow_card=True,
              allow_maxc=True):
    roll = rng.random()
    if depth == 0 or roll < 0.4:
        choices = [IntConst(rng.randint(-max_const, max_const))]
        choices += [IntVar(v) for v in ivars]
        if allow_card and svars:
            choices.append(Card(_set_term(rng, svars, 1)))
        if allow_maxc:
            choices.append(MaxCard())
        return rng.choice(choices)
    if roll < 0.55:
        return Mul(rng.randint(1, 3),
                   _int_term(rng, ivars, svars, depth - 1, max_const,
                             allow_card, allow_maxc))
    cls = Add if rng.random() < 0.7 else Sub
    return cls(_int_term(rng, ivars, svars, depth - 1, max_const,
                         allow_card, allow_maxc),
               _int_term(rng, ivars, svars, depth - 1, max_const,
                         allow_card, allow_maxc))


def _bapa_atom(rng, svars, ivars):
    kind = rng.random()
    if kind < 0.45 and svars:
        a = _set_term(rng, svars, 2)
        b = _set_term(rng, svars, 2)
        return SetEq(a, b) if rng.random() < 0.5 else SubsetEq(a, b)
    if kind < 0.9:
        a = _int_term(rng, ivars, svars, 1)
        b = _int_term(rng, ivars, svars, 1)
        return IntEq(a, b) if rng.random() < 0.5 else IntLt(a, b)
    return Dvd(rng.randint(2, 3), _int_term(rng, ivars, svars, 1))


def _matrix(rng, atom, depth):
    if depth == 0 or rng.random() < 0.4:
        return atom()
    op = rng.random()
    if op < 0.2:
        return Not(_matrix(rng, atom, depth - 1))
    cls = And if op < 0.5 else Or if op < 0.8 else Implies
    return cls(_matrix(rng, atom, depth - 1), _matrix(rng, atom, depth - 1))


def bapa_sentences(n=500, seed=20260823, max_set=3):
    """Closed mixed sentences: <= 3 set vars, <= 2 int vars, constants <= 3."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        nset = rng.randint(0, max_set)
        nint = rng.randint(0 if nset else 1, 2)
        svars = list(SET_NAMES[:nset])
        ivars = list(INT_NAMES[:nint])
        decls = [(v, Sort.SET) for v in svars] + [(v, Sort.INT) for v in ivars]
        rng.shuffle(decls)
        body = _matrix(rng, lambda: _bapa_atom(rng, svars, ivars), 3)
        for v, s in reversed(decls):
            body = (Exists if rng.random() < 0.5 else Forall)(v, s, body)
        out.append(body)
    return out


def two_set_var_sentences(n=100, seed=20260823):
    """The <= 2 set variable slice of the main corpus shape."""
    return [f for f in bapa_sentences(4 * n, seed=seed, max_set=2)
            if measure(f).set_vars <= 2][:n]


# ---------------------------------------------------------------- pure BA

def _ba_atom(rng, svars, max_const):
    roll = rng.random()
    a = _set_term(rng, svars, 2)
    if roll < 0.4:
        return SetEq(a, _set_term(rng, svars, 2))
    if roll < 0.6:
        return SubsetEq(a, _set_term(rng, svars, 2))
    k = IntConst(rng.randint(0, max_const))
    return IntEq(Card(a), k) if rng.random() < 0.5 else IntLt(k, Card(a))


def ba_formulas(n=200, seed=4151, max_const=2):
    """Open pure-BA formulas with a quantified prefix, constants <= 2."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        nvars = rng.randint(1, 3)
        svars = list(SET_NAMES[:nvars])
        nbound = rng.randint(1, nvars)
        bound = svars[:nbound]  # the rest stay free
        body = _matrix(rng, lambda: _ba_atom(rng, svars, max_const), 2)
        for v in reversed(bound):
            body = (Exists if rng.random() < 0.5 else Forall)(v, Sort.SET, body)
        out.append(body)
    return out


def ba_set_sentences(n=100, seed=977):
    """Closed sentences over set atoms only (no cardinalities).

    This is the fragment whose translation carries depth annotations, so
    these drive the bounded-evaluator differential.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        nvars = rng.randint(1, 3)
        svars = list(SET_NAMES[:nvars])

        def atom():
            a = _set_term(rng, svars, 2)
            b = _set_term(rng, svars, 2)
            return SetEq(a, b) if rng.random() < 0.5 else SubsetEq(a, b)

        body = _matrix(rng, atom, 3)
        for v in reversed(svars):
            body = (Exists if rng.random() < 0.5 else Forall)(v, Sort.SET, body)
        out.append(body)
    return out


# ------------------------------------------------------------------ pure PA

def _pa_atom(rng, ivars):
    def term(depth):
        return _int_term(rng, ivars, [], depth,
                         allow_card=False, allow_maxc=False)
    roll = rng.random()
    if roll < 0.4:
        return IntEq(term(2), term(2))
    if roll < 0.8:
        return IntLt(term(2), term(2))
    return Dvd(rng.randint(2, 4), term(1))


def pa_sentences(n=200, seed=60901):
    """Closed integer sentences: <= 3 quantifiers, coeffs <= 3, divisors <= 4.

    Every quantifier carries a range guard -G <= v <= G, so evaluating the
    sentence by enumerating each variable over its guard interval is exact.
    An unguarded corpus has no finite enumeration oracle: a clipped inner
    universal can hide the unbounded counterexample to an outer witness.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        m = rng.randint(1, 3)
        ivars = [f"v{i}" for i in range(m)]
        body = _matrix(rng, lambda: _pa_atom(rng, ivars), 2)
        for v in reversed(ivars):
            g = rng.randint(1, 3)
            guard = And(IntLt(IntConst(-g - 1), IntVar(v)),
                        IntLt(IntVar(v), IntConst(g + 1)))
            if rng.random() < 0.5:
                body = Exists(v, Sort.INT, And(guard, body))
            else:
                body = Forall(v, Sort.INT, Implies(guard, body))
        out.append(body)
    return out


def pa_enum_bound(f: Formula) -> int:
    """The per-formula enumeration bound N_f for the bounded cross-check.

    One plus the largest absolute constant in the formula.  Every
    quantifier in pa_sentences carries a guard -G <= v <= G whose bound G
    appears as a constant, so enumerating each variable over [-N_f, N_f]
    covers every guard interval and is therefore exact: values beyond the
    guard never satisfy an existential nor refute a universal.
    """
    biggest = 0

    def walk_term(t):
        nonlocal biggest
        if isinstance(t, IntConst):
            biggest = max(biggest, abs(t.value))
        elif isinstance(t, (Add, Sub)):
            walk_term(t.a)
            walk_term(t.b)
        elif isinstance(t, Mul):
            biggest = max(biggest, abs(t.coeff))
            walk_term(t.a)

    for g in subformulas(f):
        if isinstance(g, Dvd):
            walk_term(g.t)
        elif isinstance(g, (IntEq, IntLt)):
            walk_term(g.a)
            walk_term(g.b)
    return 1 + biggest


def bounded_truth(f: Formula, bound: int, env: dict[str, int] | None = None) -> bool:
    """Evaluate f with every quantifier ranging over [-bound, bound].

    Exact for formulas whose bound is at least their N_f (pa_enum_bound);
    used as the independent oracle for the quantifier-elimination tests.
    """
    from bapa.presburger import pa_eval

    env = dict(env or {})

    def ev(g: Formula) -> bool:
        if isinstance(g, Exists) or isinstance(g, Forall):
            settle = any if isinstance(g, Exists) else all
            name = g.var
            old = env.get(name)

            def attempt(i: int) -> bool:
                env[name] = i
                return ev(g.body)

            try:
                return settle(attempt(i) for i in range(-bound, bound + 1))
            finally:
                if old is None:
                    env.pop(name, None)
                else:
                    env[name] = old
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
        return pa_eval(g, env)

    return ev(f)


# ------------------------------------------------------- equivalence helper

def equivalence_claim(f: Formula, g: Formula) -> Formula:
    """f <=> g, universally closed over the shared free variables."""
    from bapa.alpha import close_free
    return close_free(Iff(f, g), "forall")
