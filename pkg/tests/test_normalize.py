"""Normalization passes: NNF, prenex form, purification, simplification."""

from pathlib import Path

import pytest

from bapa.core import (
    And, Card, Fin, FALSE, Formula, Not, Or, QUANTIFIERS, SetTerm, Sort,
    free_vars, subformulas,
)
from bapa.normalize import purify_atoms, simplify_const, to_nnf, to_prenex
from bapa.oracle import oracle
from bapa.syntax import parse_formula

from corpus import bapa_sentences

FIXTURES = Path(__file__).parent / "fixtures"


def P(text: str) -> Formula:
    return parse_formula(text)


# --------------------------------------------------------------------- nnf

def test_nnf_de_morgan():
    decl = "free a:prop, b:prop. "
    assert to_nnf(P(decl + "~(a & b)")) == P(decl + "~a | ~b")
    assert to_nnf(P(decl + "~(a | b)")) == P(decl + "~a & ~b")


def test_nnf_double_negation():
    decl = "free a:prop. "
    assert to_nnf(P(decl + "~~a")) == P(decl + "a")


def test_nnf_expands_iff():
    decl = "free a:prop, b:prop. "
    got = to_nnf(P(decl + "a <=> b"))
    assert got == P(decl + "(~a | b) & (~b | a)")


def test_nnf_keeps_quantifiers_in_place():
    got = to_nnf(P("~(ex y:set. card(y) = 1)"))
    assert got == P("all y:set. ~(card(y) = 1)")


def test_nnf_negations_only_on_atoms():
    f = P("free a:prop. ~((a => ~a) <=> a)")
    for g in subformulas(to_nnf(f)):
        if isinstance(g, Not):
            assert not isinstance(g.a, (And, Or, Not) + QUANTIFIERS)


# ------------------------------------------------------------------ prenex

def test_prenex_hoists_past_conjunction():
    f = P("free q:prop. (ex x:set. card(x) = 1) & q")
    pf = to_prenex(f)
    assert pf.prefix == (("E", "x", Sort.SET),)
    assert pf.matrix == P("free x:set, q:prop. card(x) = 1 & q")


def test_prenex_renames_apart():
    f = P("(ex x:set. card(x) = 1) & (ex x:set. card(x) = 2)")
    pf = to_prenex(f)
    names = [n for _, n, _ in pf.prefix]
    assert len(names) == len(set(names)) == 2


def test_prenex_quantifier_free_input():
    f = P("card(empty) = 0")
    pf = to_prenex(f)
    assert pf.prefix == ()
    assert pf.matrix == f


def test_prenex_of_vc_fixture_has_five_universals():
    f = parse_formula((FIXTURES / "insert_vc.bapa").read_text())
    pf = to_prenex(f)
    assert len(pf.prefix) == 5
    assert all(kind == "A" for kind, _, _ in pf.prefix)
    assert not any(isinstance(g, QUANTIFIERS) for g in subformulas(pf.matrix))


def test_prenex_flips_under_negation():
    pf = to_prenex(P("~(ex y:set. card(y) = 1)"))
    assert [k for k, _, _ in pf.prefix] == ["A"]


def test_prenex_preserves_quantifier_multiset():
    for f in bapa_sentences(30):
        kinds_in = sorted(
            (type(g).__name__, g.sort.name) for g in subformulas(f)
            if isinstance(g, QUANTIFIERS))
        pf = to_prenex(f)
        # outermost prefix kinds, modulo the polarity flips performed while
        # hoisting: count only (sort) multiset plus total, which polarity
        # cannot change
        assert len(pf.prefix) == len(kinds_in)
        assert sorted(s.name for _, _, s in pf.prefix) == sorted(
            s for _, s in kinds_in)


# -------------------------------------------------------------------- purify

def test_purify_subset():
    got = purify_atoms(P("free x:set, y:set. x subseteq y"))
    assert got == P("free x:set, y:set. card(x inter compl(y)) = 0")


def test_purify_seteq_is_two_subsets():
    got = purify_atoms(P("free x:set, y:set. x seteq y"))
    assert got == P("free x:set, y:set. "
                    "card(x inter compl(y)) = 0 & card(y inter compl(x)) = 0")


def test_purify_leaves_cardinalities_alone():
    f = P("free x:set, k:int. card(x) = k")
    assert purify_atoms(f) == f


def test_purified_set_terms_only_under_card_or_fin():
    # after purification the only atoms carrying set terms are card(...)
    # comparisons and fin(...); no set relation survives
    from bapa.core import SetEq, SubsetEq
    for f in bapa_sentences(40):
        g = purify_atoms(simplify_const(f))
        for node in subformulas(g):
            assert not isinstance(node, (SetEq, SubsetEq))


# ------------------------------------------------------------ simplify_const

def test_simplify_union_empty():
    got = simplify_const(P("free x:set, k:int. card(x union empty) = k"))
    assert got == P("free x:set, k:int. card(x) = k")


def test_simplify_folds_ground_comparisons():
    assert simplify_const(P("card(empty) >= 1")) == FALSE


def test_simplify_compl_empty():
    got = simplify_const(P("free k:int. card(compl(empty)) = k"))
    assert got == P("free k:int. card(univ) = k")


@pytest.mark.parametrize("text,expect", [
    ("free x:set, k:int. card(x inter empty) = k",
     "free x:set, k:int. card(empty) = k"),
    ("free x:set, k:int. card(x union univ) = k",
     "free x:set, k:int. card(univ) = k"),
    ("free x:set, k:int. card(x inter univ) = k",
     "free x:set, k:int. card(x) = k"),
])
def test_simplify_absorption_table(text, expect):
    got = simplify_const(P(text))
    want = P(expect)
    # card(empty) itself folds to the integer 0
    assert got == simplify_const(want)


# --------------------------------------------------- semantic preservation

@pytest.mark.parametrize("transform", [
    to_nnf,
    lambda f: to_prenex(f).to_formula(),
    lambda f: purify_atoms(simplify_const(f)),
])
def test_transforms_preserve_truth(transform):
    for f in bapa_sentences(25, seed=311):
        g = transform(f)
        assert not free_vars(g)
        for u in range(4):
            assert oracle(g, u) == oracle(f, u), (f, u)
