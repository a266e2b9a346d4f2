"""Parser and printer: grammar coverage, sugar, spans, round trips."""

import pytest
from hypothesis import given, settings, strategies as st

from bapa.core import (
    Add, And, Card, Compl, Dvd, EmptySet, Exists, Fin, FinUniv, Iff, Implies,
    IntConst, IntEq, IntLt, IntVar, Inter, MaxCard, Mul, Not, Or, ParseError,
    PropVar, SetEq, SetVar, Sort, Sub, SubsetEq, TRUE, Union, UnivSet,
    free_vars,
)
from bapa.syntax import parse_formula, print_formula


# ------------------------------------------------------------------ parsing

def test_parse_sentence_example():
    got = parse_formula("ex y:set. card(y) = 1")
    assert got == Exists("y", Sort.SET, IntEq(Card(SetVar("y")), IntConst(1)))


def test_parse_free_preamble():
    got = parse_formula("free x:set. x subseteq x")
    assert got == SubsetEq(SetVar("x"), SetVar("x"))
    assert free_vars(got) == {"x": Sort.SET}


def test_open_formula_without_preamble_is_an_error():
    with pytest.raises(ParseError, match="unbound|undeclared"):
        parse_formula("x subseteq x")


def test_nonpositive_divisor_rejected():
    with pytest.raises(ParseError, match="positive"):
        parse_formula("all k:int. dvd(0, k)")


def test_eqcard_sugar():
    got = parse_formula("free a:set, b:set. eqcard(a, b)")
    assert got == IntEq(Card(SetVar("a")), Card(SetVar("b")))


def test_strict_subset_sugar():
    got = parse_formula("free a:set, b:set. a < b")
    a, b = SetVar("a"), SetVar("b")
    assert got == And(SubsetEq(a, b), Not(SetEq(a, b)))


def test_integer_comparison_sugar():
    k = IntVar("k")
    one = IntConst(1)
    assert parse_formula("free k:int. k <= 1") == \
        IntLt(k, Add(one, IntConst(1)))
    assert parse_formula("free k:int. k > 1") == IntLt(one, k)
    assert parse_formula("free k:int. k >= 1") == \
        IntLt(one, Add(k, IntConst(1)))


def test_precedence_and_associativity():
    a, b, c = PropVar("a"), PropVar("b"), PropVar("c")
    decl = "free a:prop, b:prop, c:prop. "
    assert parse_formula(decl + "a & b | c") == parse_formula(
        decl + "(a & b) | c")
    assert parse_formula(decl + "a => b => c") == parse_formula(
        decl + "a => (b => c)")
    assert parse_formula(decl + "~a & b") == And(Not(a), b)


def test_mixed_union_inter_needs_parens():
    with pytest.raises(ParseError, match="parenthes"):
        parse_formula("free a:set, b:set, c:set. a union b inter c seteq a")
    # parenthesized mixes are fine
    parse_formula("free a:set, b:set, c:set. (a union b) inter c seteq a")


def test_set_constants_and_compl():
    got = parse_formula("card(compl(empty) inter univ) = MAXC")
    assert got == IntEq(Card(Inter(Compl(EmptySet()), UnivSet())), MaxCard())


def test_coefficient_multiplication():
    got = parse_formula("free k:int. 2 * k + 1 = 0")
    assert got == IntEq(Add(Mul(2, IntVar("k")), IntConst(1)), IntConst(0))


def test_fin_atoms():
    got = parse_formula("free b:set. fin(b) & finU")
    assert got == And(Fin(SetVar("b")), FinUniv())


def test_primed_names_parse():
    got = parse_formula("free x':set. x' subseteq x'")
    assert got == SubsetEq(SetVar("x'"), SetVar("x'"))


@pytest.mark.parametrize("bad", [
    "ex y:set. card(y = 1",          # unbalanced paren
    "ex y:set card(y) = 1",          # missing dot
    "ex y:qqq. card(y) = 1",         # bad sort
    "free k:int. k = = 1",           # stray operator
    "free b:set. dvd(b, 3)",         # set where constant expected
    "",                              # empty input
])
def test_parse_errors_carry_spans(bad):
    with pytest.raises(ParseError) as info:
        parse_formula(bad)
    span = info.value.span
    assert span is not None
    assert 0 <= span.start <= span.end <= max(len(bad), 1)
    assert span.line >= 1 and span.column >= 1


def test_duplicate_declaration_rejected():
    with pytest.raises(ParseError, match="already"):
        parse_formula("free x:set, x:int. card(x) = 0")


def test_sort_clash_across_use():
    with pytest.raises(ParseError):
        parse_formula("free x:set. x = 1")  # set name in integer position


# ----------------------------------------------------------------- printing

def test_print_true():
    assert print_formula(TRUE) == "true"


def test_print_emits_free_preamble():
    f = parse_formula("free x:set, k:int. card(x) = k")
    text = print_formula(f)
    assert text.startswith("free ")
    assert parse_formula(text) == f


@pytest.mark.parametrize("text", [
    "ex y:set. card(y) = 1",
    "all x:set. all y:set. (x subseteq y & y subseteq x) => x seteq y",
    "free k:int. dvd(3, 2 * k - 1) <=> k < MAXC",
    "ex x:set. all k:int. card(x inter compl(x)) = 0 | k = card(univ)",
    "free p:prop. p & finU => fin(empty)",
])
def test_round_trip_examples(text):
    f = parse_formula(text)
    assert parse_formula(print_formula(f)) == f


# A tiny recursive generator for well-sorted formulas over a fixed set of
# declared names; mirrors the grammar rather than the printer, so a bug in
# either side shows up as a round-trip failure.

SET_NAMES = st.sampled_from(["a", "b"])
INT_NAMES = st.sampled_from(["k", "m"])

set_terms = st.recursive(
    SET_NAMES.map(SetVar) | st.just(EmptySet()) | st.just(UnivSet()),
    lambda inner: st.builds(Union, inner, inner)
    | st.builds(Inter, inner, inner)
    | st.builds(Compl, inner),
    max_leaves=6,
)

int_terms = st.recursive(
    INT_NAMES.map(IntVar)
    | st.integers(min_value=0, max_value=9).map(IntConst)
    | st.just(MaxCard())
    | st.builds(Card, set_terms),
    lambda inner: st.builds(Add, inner, inner)
    | st.builds(Sub, inner, inner)
    | st.builds(lambda c, t: Mul(c, t), st.integers(2, 5), inner),
    max_leaves=6,
)

atoms = (
    st.builds(SetEq, set_terms, set_terms)
    | st.builds(SubsetEq, set_terms, set_terms)
    | st.builds(IntEq, int_terms, int_terms)
    | st.builds(IntLt, int_terms, int_terms)
    | st.builds(lambda c, t: Dvd(c, t), st.integers(1, 5), int_terms)
    | st.builds(Fin, set_terms)
    | st.just(FinUniv())
    | st.just(TRUE)
)

formulas = st.recursive(
    atoms,
    lambda inner: st.builds(And, inner, inner)
    | st.builds(Or, inner, inner)
    | st.builds(Not, inner)
    | st.builds(Implies, inner, inner)
    | st.builds(Iff, inner, inner)
    | st.builds(lambda v, b: Exists(v, Sort.INT, b), st.just("q"), inner),
    max_leaves=8,
)


@given(formulas)
@settings(max_examples=200, deadline=None)
def test_round_trip_fuzzed(f):
    assert parse_formula(print_formula(f)) == f
