"""Translation of set quantifiers into integer quantifier blocks.

A sentence mixing set and integer quantifiers is turned into a pure
integer sentence: the set variables in scope induce a partition of the
universe into cubes (intersections of each variable or its complement),
every cardinality term becomes a sum of per-cube counters, and each set
quantifier is replaced by a block of non-negative integer quantifiers
over the counters of the refined partition, constrained so that each
coarser region is the sum of its two halves.  Eliminating the outermost
set variable equates MAXC, the universe cardinality, with the final sum.

The translation preserves the quantifier alternation structure: a block
of counters inherits the polarity of the set quantifier it replaces, and
the defining equations ride along as a guard (conjunct under an exists,
antecedent under a forall).

Three refinements share this skeleton:

* ``optimize=True`` forms partitions on demand, splitting only over the
  set variables that actually co-occur with the quantified variable, and
  drops quantifiers over unused variables.
* infinite-universe support pairs every counter l_w with a proposition
  p_w ("this cube is finite"); defining equations only bind the counters
  of finite regions, and fin(b) atoms become finiteness conjunctions.
  FINU ("the universe is finite") and MAXC remain free in the raw
  translation and are instantiated per model class.
* the interleaved strategy never builds the full integer sentence:
  working innermost-out over a quantifier-free matrix, it dispatches
  each integer quantifier and each block of counters straight to the
  Presburger quantifier elimination, leaving cardinality terms of the
  remaining set variables as opaque constants.

Pure set sentences additionally get a ``BoundedPlan`` annotation: each
counter introduced at nesting depth r can be clamped to 2^(r-1), which
``pa_eval_bounded`` exploits to evaluate huge universes in small memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product

from bapa.core import (
    Add, And, Card, Compl, ContractViolation, Dvd, EmptySet, Exists,
    Fin, FinUniv, Forall, Formula, FreeVarsError, Iff, Implies, IntConst,
    IntEq, IntLt, IntVar, Inter, MaxCard, Mul, Not, Or, PropVar, QUANTIFIERS,
    SetEq, SetTerm, SetVar, Sort, Sub, SubsetEq, TRUE, FALSE, UnivSet,
    check_sorted, conj, free_vars, fresh, subformulas, substitute, transform,
)
from bapa.normalize import (
    PrenexForm, purify_atoms, simplify_const, to_prenex,
)
from bapa.presburger import pa_decide, pa_qe

MODES = ("FiniteUniverse", "InfiniteUniverse", "AllModels")
STRATEGIES = ("alpha", "interleaved")

# A region is a set-term "cube fragment": an intersection of some set
# variables or their complements, kept as ((var, bit), ...) ordered
# outermost-quantified first.  () denotes the whole universe.
Region = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class BoundedPlan:
    """Clamp depths for evaluating a translated pure-set sentence."""
    set_vars: int
    depths: dict[str, int]


@dataclass(frozen=True)
class _Entry:
    """Counter (and finiteness proposition) naming one region."""
    l: str
    p: str | None = None


@dataclass
class AlphaState:
    """One step of the translation: remaining prefix and current body."""
    prefix: tuple[tuple[str, str, Sort], ...]  # (kind, name, sort), outer first
    formula: Formula
    scaffold: dict[Region, _Entry]
    order: tuple[str, ...]          # every set variable, outermost first
    avoid: set[str]
    infinite: bool = False
    optimize: bool = False
    depths: dict[str, int] = field(default_factory=dict)
    scope: tuple[str, ...] | None = None  # split scope for the next set step


def _set_vars_of(t: SetTerm) -> set[str]:
    if isinstance(t, SetVar):
        return {t.name}
    if isinstance(t, (EmptySet, UnivSet)):
        return set()
    if isinstance(t, Compl):
        return _set_vars_of(t.a)
    return _set_vars_of(t.a) | _set_vars_of(t.b)


def _holds(t: SetTerm, bits: dict[str, int]) -> bool:
    """Evaluate a set term as a Boolean function of the cube's bits."""
    if isinstance(t, SetVar):
        return bool(bits[t.name])
    if isinstance(t, EmptySet):
        return False
    if isinstance(t, UnivSet):
        return True
    if isinstance(t, Compl):
        return not _holds(t.a, bits)
    if isinstance(t, Inter):
        return _holds(t.a, bits) and _holds(t.b, bits)
    return _holds(t.a, bits) or _holds(t.b, bits)  # Union


def _sum(terms: list) -> object:
    if not terms:
        return IntConst(0)
    acc = terms[0]
    for t in terms[1:]:
        acc = Add(acc, t)
    return acc


def _guard(name: str) -> Formula:
    return IntLt(IntConst(0), Add(IntVar(name), IntConst(1)))


def _name_region(region: Region, avoid: set[str], prefix: str = "l") -> str:
    base = prefix + "".join(str(bit) for _, bit in reversed(region))
    name = fresh(base, avoid)
    avoid.add(name)
    return name


def _card_args(f: Formula) -> list[SetTerm]:
    """Distinct Card arguments in order of first occurrence."""
    out: list[SetTerm] = []

    def term(t):
        if isinstance(t, Card) and t.arg not in seenc:
            seenc.add(t.arg)
            out.append(t.arg)
        if isinstance(t, (Add, Sub)):
            term(t.a)
            term(t.b)
        elif isinstance(t, Mul):
            term(t.a)

    seenc: set = set()
    for g in subformulas(f):
        if isinstance(g, (IntEq, IntLt)):
            term(g.a)
            term(g.b)
        elif isinstance(g, Dvd):
            term(g.t)
    return out


def _fin_args(f: Formula) -> list[SetTerm]:
    out, seen = [], set()
    for g in subformulas(f):
        if isinstance(g, Fin) and g.arg not in seen:
            seen.add(g.arg)
            out.append(g.arg)
    return out


def _orient_cards(f: Formula) -> Formula:
    """Put the cardinality-bearing side of an equation on the left."""

    def has_card(t) -> bool:
        if isinstance(t, Card):
            return True
        if isinstance(t, (Add, Sub)):
            return has_card(t.a) or has_card(t.b)
        if isinstance(t, Mul):
            return has_card(t.a)
        return False

    def form(g):
        if isinstance(g, IntEq) and has_card(g.b) and not has_card(g.a):
            return IntEq(g.b, g.a)
        return g

    return transform(f, form=form)


def _drop_fin(f: Formula) -> Formula:
    """Finite universe: every set is finite, so fin atoms are true."""
    return transform(
        f, form=lambda g: TRUE if isinstance(g, (Fin, FinUniv)) else g)


def _replace_grounded(f: Formula, want, cubes: list[Region],
                      lname: dict[Region, str],
                      pname: dict[Region, str] | None) -> Formula:
    """Replace Card(b) by counter sums and fin(b) by finiteness
    conjunctions, for terms b selected by the predicate ``want``."""

    def pieces(b: SetTerm) -> list[Region]:
        return [c for c in cubes if _holds(b, dict(c))]

    def term_int(t):
        if isinstance(t, Card) and want(t.arg):
            return _sum([IntVar(lname[c]) for c in pieces(t.arg)])
        return t

    def form(g):
        if isinstance(g, Fin) and pname is not None and want(g.arg):
            return conj([PropVar(pname[c]) for c in pieces(g.arg)])
        if isinstance(g, FinUniv) and pname is not None and want(None):
            return conj([PropVar(pname[c]) for c in cubes])
        return g

    return transform(f, term_int=term_int, form=form)


def _resolve_ground(f: Formula) -> Formula:
    """Card/fin over variable-free set terms: MAXC or 0, FINU or true."""

    def term_int(t):
        if isinstance(t, Card) and not _set_vars_of(t.arg):
            return MaxCard() if _holds(t.arg, {}) else IntConst(0)
        return t

    def form(g):
        if isinstance(g, Fin) and not _set_vars_of(g.arg):
            return FinUniv() if _holds(g.arg, {}) else TRUE
        return g

    return transform(f, term_int=term_int, form=form)


def _prepare(f: Formula, infinite: bool) -> PrenexForm:
    if not infinite:
        f = _drop_fin(f)
    f = simplify_const(f)
    pf = to_prenex(f)
    matrix = _orient_cards(purify_atoms(pf.matrix))
    return PrenexForm(pf.prefix, matrix)


def introduce_partition(pf: PrenexForm, infinite: bool = False,
                        optimize: bool = False) -> AlphaState:
    """Set up the translation state for a prepared prenex sentence.

    Without ``optimize`` the full partition over every set variable is
    formed immediately: the scaffold names all 2^e cubes and the matrix
    is rewritten so cardinalities become counter sums.  With ``optimize``
    the scaffold starts empty and cardinality terms stay in the matrix
    until the step that eliminates one of their variables.
    """
    for g in subformulas(pf.matrix):
        if isinstance(g, (SetEq, SubsetEq)):
            raise ContractViolation(
                f"matrix contains an unpurified set atom: {g!r}")
    svars = tuple(n for _, n, s in pf.prefix if s is Sort.SET)
    avoid = set(free_vars(pf.to_formula()))
    avoid.update(n for _, n, _ in pf.prefix)
    st = AlphaState(prefix=pf.prefix, formula=pf.matrix, scaffold={},
                    order=svars, avoid=avoid, infinite=infinite,
                    optimize=optimize)
    if optimize or not svars:
        st.formula = _resolve_ground(st.formula)
        return st
    cubes = [tuple(zip(svars, bits))
             for bits in product((1, 0), repeat=len(svars))]
    lname: dict[Region, str] = {}
    pname: dict[Region, str] | None = {} if infinite else None
    for c in cubes:
        lname[c] = _name_region(c, st.avoid)
        if infinite:
            pname[c] = _name_region(c, st.avoid, "p")
        st.scaffold[c] = _Entry(lname[c], pname[c] if infinite else None)
        st.depths[lname[c]] = 1
    st.formula = _replace_grounded(st.formula, lambda b: True, cubes,
                                   lname, pname)
    return st


def reduce_partition_scope(st: AlphaState) -> AlphaState:
    """Work out which set variables the next set step must split over.

    Only variables appearing in scaffold regions or cardinality/fin
    terms that mention the quantified variable take part; the scope is
    empty when the variable is unused, in which case the quantifier can
    be dropped outright.
    """
    y = next(n for _, n, s in reversed(st.prefix) if s is Sort.SET)
    used: set[str] = set()
    hit = False
    for r in st.scaffold:
        if any(v == y for v, _ in r):
            used.update(v for v, _ in r)
            hit = True
    for b in _card_args(st.formula) + _fin_args(st.formula):
        bv = _set_vars_of(b)
        if y in bv:
            used |= bv
            hit = True
    scope = tuple(v for v in st.order if v in used) if hit else ()
    return replace(st, scope=scope)


def alpha_step(st: AlphaState) -> AlphaState:
    """Consume the innermost remaining quantifier."""
    if not st.prefix:
        raise ContractViolation("no quantifier left to eliminate")
    kind, name, sort = st.prefix[-1]
    rest = st.prefix[:-1]
    if sort is not Sort.SET:
        q = Exists if kind == "E" else Forall
        return replace(st, prefix=rest, formula=q(name, sort, st.formula),
                       scope=None)
    return _set_step(st, kind, name, rest)


def _set_step(st: AlphaState, kind: str, y: str, rest) -> AlphaState:
    if st.optimize:
        if st.scope is None:
            st = reduce_partition_scope(st)
        if st.scope == ():
            return replace(st, prefix=rest, scope=None)
        V = st.scope
    else:
        remaining = tuple(n for _, n, s in st.prefix if s is Sort.SET)
        V = remaining
    if not V or V[-1] != y:
        raise ContractViolation(
            f"{y} is not the innermost set variable of the split scope {V}")

    infinite = st.infinite
    scaffold = dict(st.scaffold)
    avoid = st.avoid
    cubes = [tuple(zip(V, bits)) for bits in product((1, 0), repeat=len(V))]

    # Name the refined cubes, reusing scaffold entries that already are
    # cubes of this scope.
    lname: dict[Region, str] = {}
    pname: dict[Region, str] = {}
    extra_l: list[str] = []
    extra_p: list[str] = []
    split_defs: list[Formula] = []
    for c in cubes:
        ent = scaffold.pop(c, None)
        if ent is None:
            ent = _Entry(_name_region(c, avoid),
                         _name_region(c, avoid, "p") if infinite else None)
        lname[c] = ent.l
        if infinite:
            pname[c] = ent.p

    # Scaffold regions that mention y but are coarser than the scope's
    # cubes: their counters equal the sum over the cubes they contain,
    # and they are quantified in this block alongside the cube counters.
    for r in [r for r in scaffold if any(v == y for v, _ in r)]:
        ent = scaffold.pop(r)
        subs = [c for c in cubes if _holds(_region_term(r), dict(c))]
        eq = IntEq(IntVar(ent.l), _sum([IntVar(lname[c]) for c in subs]))
        if infinite:
            allp = conj([PropVar(pname[c]) for c in subs])
            split_defs.append(And(Implies(allp, eq),
                                  Iff(PropVar(ent.p), allp)))
            extra_p.append(ent.p)
        else:
            split_defs.append(eq)
        extra_l.append(ent.l)

    # One defining equation per parent region: its counter is the sum of
    # the two halves induced by y.  The empty parent is the universe,
    # whose cardinality is MAXC (and whose finiteness is FINU).
    defs: list[Formula] = []
    for pb in product((1, 0), repeat=len(V) - 1):
        rp: Region = tuple(zip(V[:-1], pb))
        c1 = rp + ((y, 1),)
        c0 = rp + ((y, 0),)
        eq_rhs = Add(IntVar(lname[c1]), IntVar(lname[c0]))
        if rp:
            ent = scaffold.get(rp)
            if ent is None:
                ent = _Entry(_name_region(rp, avoid),
                             _name_region(rp, avoid, "p") if infinite else None)
                scaffold[rp] = ent
            lhs_l, lhs_p = IntVar(ent.l), (PropVar(ent.p) if infinite else None)
        else:
            lhs_l, lhs_p = MaxCard(), (FinUniv() if infinite else None)
        if infinite:
            p1, p0 = PropVar(pname[c1]), PropVar(pname[c0])
            defs.append(And(Implies(And(p1, p0), IntEq(lhs_l, eq_rhs)),
                            Iff(lhs_p, And(p1, p0))))
        else:
            defs.append(IntEq(lhs_l, eq_rhs))
    defs += split_defs

    body = st.formula
    if st.optimize:
        body = _replace_grounded(
            body, lambda b: b is not None and y in _set_vars_of(b),
            cubes, lname, pname if infinite else None)
    block_l = [lname[c] for c in cubes] + extra_l
    block_p = ([pname[c] for c in cubes] + extra_p) if infinite else []

    depth = len(st.order) - len(V) + 1
    depths = dict(st.depths)
    for v in block_l:
        depths[v] = depth

    if kind == "E":
        body = And(conj(defs), body)
        for p in reversed(block_p):
            body = Exists(p, Sort.PROP, body)
        for l in reversed(block_l):
            body = Exists(l, Sort.INT, And(_guard(l), body))
    else:
        body = Implies(conj(defs), body)
        for p in reversed(block_p):
            body = Forall(p, Sort.PROP, body)
        for l in reversed(block_l):
            body = Forall(l, Sort.INT, Implies(_guard(l), body))
    return replace(st, prefix=rest, formula=body, scaffold=scaffold,
                   depths=depths, scope=None)


def _region_term(r: Region) -> SetTerm:
    acc: SetTerm | None = None
    for v, bit in r:
        piece = SetVar(v) if bit else Compl(SetVar(v))
        acc = piece if acc is None else Inter(acc, piece)
    if acc is None:
        raise ContractViolation("empty region has no term")
    return acc


def _pure_ba(f: Formula) -> bool:
    for g in subformulas(f):
        if isinstance(g, (IntEq, IntLt, Dvd, PropVar, Fin, FinUniv)):
            return False
        if isinstance(g, QUANTIFIERS) and g.sort is not Sort.SET:
            return False
    return True


def _translate_sentence(f: Formula, infinite: bool,
                        optimize: bool) -> tuple[Formula, AlphaState]:
    fv = free_vars(f)
    if fv:
        raise FreeVarsError(
            "translation needs a sentence; free: " + ", ".join(fv))
    check_sorted(f, {})
    pf = _prepare(f, infinite)
    st = introduce_partition(pf, infinite=infinite, optimize=optimize)
    while st.prefix:
        st = alpha_step(st)
    st.formula = _resolve_ground(st.formula)
    return st.formula, st


def instantiate(g: Formula, maxc=None, finu: bool | None = None) -> Formula:
    """Substitute the model-class parameters MAXC and FINU."""
    mterm = IntConst(maxc) if isinstance(maxc, int) else maxc

    def term_int(t):
        if isinstance(t, MaxCard) and mterm is not None:
            return mterm
        return t

    def form(h):
        if isinstance(h, FinUniv) and finu is not None:
            return TRUE if finu else FALSE
        return h

    return simplify_const(transform(g, term_int=term_int, form=form))


def alpha_translate(f: Formula, mode: str = "FiniteUniverse",
                    strategy: str = "alpha",
                    optimize: bool = False) -> Formula:
    """Translate a sentence into an equivalent pure integer sentence.

    FiniteUniverse keeps MAXC free so the result can be evaluated per
    universe size (validity is its universal closure over MAXC >= 0);
    InfiniteUniverse instantiates (MAXC, FINU) = (0, false); AllModels
    conjoins the infinite instance with the universal closure of the
    finite one.
    """
    if mode not in MODES:
        raise ValueError(f"unknown model class {mode!r}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "interleaved":
        if mode != "FiniteUniverse":
            raise ContractViolation(
                "the interleaved strategy handles finite universes only")
        return _interleaved_translate(f)
    infinite = mode != "FiniteUniverse"
    g, st = _translate_sentence(f, infinite, optimize)
    if mode == "FiniteUniverse":
        if (not optimize and not infinite and st.order
                and _pure_ba(_drop_fin(f))):
            plan = BoundedPlan(set_vars=len(st.order), depths=dict(st.depths))
            object.__setattr__(g, "_alpha_plan", plan)
        return g
    if mode == "InfiniteUniverse":
        return instantiate(g, maxc=0, finu=False)
    k = fresh("k", st.avoid)
    finite_part = Forall(k, Sort.INT, Implies(
        _guard(k), instantiate(g, maxc=IntVar(k), finu=True)))
    return And(instantiate(g, maxc=0, finu=False), finite_part)


def alpha_translate_infinite(f: Formula, optimize: bool = False) -> Formula:
    """Raw finiteness-aware translation with MAXC and FINU left free."""
    g, _ = _translate_sentence(f, True, optimize)
    return g


def close_free(f: Formula, open_as: str = "forall") -> Formula:
    """Quantify the free variables, first occurrence outermost."""
    if open_as not in ("forall", "exists"):
        raise ValueError(f"unknown closure kind {open_as!r}")
    q = Forall if open_as == "forall" else Exists
    for name, sort in reversed(list(free_vars(f).items())):
        f = q(name, sort, f)
    return f


def _has_maxcard(g: Formula) -> bool:
    def term(t) -> bool:
        if isinstance(t, MaxCard):
            return True
        if isinstance(t, (Add, Sub)):
            return term(t.a) or term(t.b)
        if isinstance(t, Mul):
            return term(t.a)
        return False

    for h in subformulas(g):
        if isinstance(h, (IntEq, IntLt)) and (term(h.a) or term(h.b)):
            return True
        if isinstance(h, Dvd) and term(h.t):
            return True
    return False


def decide(f: Formula, mode: str = "FiniteUniverse", strategy: str = "alpha",
           optimize: bool = False, open_as: str = "forall",
           universe: int | None = None) -> bool:
    """Validity of f over the chosen model class.

    Free variables are closed universally (or existentially with
    ``open_as="exists"``) before translation.  ``universe`` restricts a
    finite-universe check to one concrete size.
    """
    f = close_free(f, open_as)
    g = alpha_translate(f, mode=mode, strategy=strategy, optimize=optimize)
    if mode != "FiniteUniverse":
        if universe is not None:
            raise ValueError("a concrete universe size only makes sense "
                             "for the finite model class")
        return pa_decide(g)
    if universe is not None:
        if universe < 0:
            raise ValueError("universe size must be non-negative")
        return pa_decide(instantiate(g, maxc=universe))
    if not _has_maxcard(g):
        return pa_decide(g)
    k = fresh("k", set(free_vars(g)) | _all_names(g))
    return pa_decide(Forall(k, Sort.INT,
                            Implies(_guard(k), instantiate(g, maxc=IntVar(k)))))


def _all_names(g: Formula) -> set[str]:
    names = set(free_vars(g))
    for h in subformulas(g):
        if isinstance(h, QUANTIFIERS):
            names.add(h.var)
    return names


def alpha_interleaved(f: Formula, mode: str = "FiniteUniverse") -> bool:
    """Verdict of the interleaved strategy (finite universes only)."""
    return decide(f, mode=mode, strategy="interleaved")


# --- interleaved strategy ------------------------------------------------

def _opaque_qe(h: Formula, avoid: set[str]) -> Formula:
    """Run Presburger QE with Card/MAXC terms and propositions frozen
    as fresh constants, restoring them afterwards."""
    tmap: dict = {}

    def freeze_term(t):
        if isinstance(t, (Card, MaxCard)):
            if t not in tmap:
                v = fresh("c", avoid)
                avoid.add(v)
                tmap[t] = v
            return IntVar(tmap[t])
        return t

    pmap: dict[str, str] = {}

    def freeze_form(g):
        if isinstance(g, PropVar):
            if g.name not in pmap:
                v = fresh("q", avoid)
                avoid.add(v)
                pmap[g.name] = v
            return IntEq(IntVar(pmap[g.name]), IntConst(1))
        return g

    frozen = transform(h, term_int=freeze_term, form=freeze_form)
    out = pa_qe(frozen)
    back_t = {v: t for t, v in tmap.items()}
    back_p = {v: p for p, v in pmap.items()}

    def thaw_term(t):
        if isinstance(t, IntVar) and t.name in back_t:
            return back_t[t.name]
        return t

    def thaw_form(g):
        if (isinstance(g, IntEq) and isinstance(g.a, IntVar)
                and g.a.name in back_p and g.b == IntConst(1)):
            return PropVar(back_p[g.a.name])
        return g

    return transform(out, term_int=thaw_term, form=thaw_form)


def _interleaved_translate(f: Formula) -> Formula:
    fv = free_vars(f)
    if fv:
        raise FreeVarsError(
            "translation needs a sentence; free: " + ", ".join(fv))
    check_sorted(f, {})
    pf = _prepare(f, infinite=False)
    order = tuple(n for _, n, s in pf.prefix if s is Sort.SET)
    avoid = set(n for _, n, _ in pf.prefix)
    G = pf.matrix
    for kind, name, sort in reversed(pf.prefix):
        if sort is Sort.PROP:
            G = simplify_const(
                (Or if kind == "E" else And)(
                    substitute(G, name, Sort.PROP, TRUE),
                    substitute(G, name, Sort.PROP, FALSE)))
        elif sort is Sort.INT:
            q = Exists if kind == "E" else Forall
            G = _opaque_qe(q(name, Sort.INT, G), avoid)
        else:
            G = _set_qe_step(G, kind, name, order, avoid)
    return simplify_const(_resolve_ground(G))


def _set_qe_step(G: Formula, kind: str, y: str, order: tuple[str, ...],
                 avoid: set[str]) -> Formula:
    if kind == "A":
        return simplify_const(Not(_set_qe_step(Not(G), "E", y, order, avoid)))
    yterms = [b for b in _card_args(G) if y in _set_vars_of(b)]
    if not yterms:
        return G
    used: set[str] = set()
    for b in yterms:
        used |= _set_vars_of(b)
    V = tuple(v for v in order if v in used)
    cubes = [tuple(zip(V, bits)) for bits in product((1, 0), repeat=len(V))]
    lname = {c: _name_region(c, avoid) for c in cubes}
    G1 = _replace_grounded(
        G, lambda b: b is not None and y in _set_vars_of(b),
        cubes, lname, None)
    parts: list[Formula] = [_guard(lname[c]) for c in cubes]
    for pb in product((1, 0), repeat=len(V) - 1):
        rp: Region = tuple(zip(V[:-1], pb))
        lhs = Card(_region_term(rp)) if rp else MaxCard()
        parts.append(IntEq(lhs, Add(IntVar(lname[rp + ((y, 1),)]),
                                    IntVar(lname[rp + ((y, 0),)]))))
    body = conj(parts + [G1])
    for c in reversed(cubes):
        body = Exists(lname[c], Sort.INT, body)
    return simplify_const(_opaque_qe(body, avoid))
