"""Core AST helpers: construction, substitution, naming, metrics."""

import pytest

from bapa.core import (
    And, Card, EmptySet, IntConst, IntEq, IntVar, Not, Or, SetVar, Sort,
    TRUE, Union, alpha_equal, conj, conjuncts, disj, disjuncts, free_vars,
    fresh, measure, size, substitute,
)
from bapa.core import BapaError, ContractViolation, ParseError, SortError
from bapa.syntax import parse_formula


def test_nodes_are_immutable_and_hashable():
    a = IntEq(Card(SetVar("x")), IntConst(1))
    b = IntEq(Card(SetVar("x")), IntConst(1))
    assert a == b
    assert hash(a) == hash(b)
    with pytest.raises(AttributeError):
        a.a = IntConst(0)


def test_conj_disj_units():
    assert conj([]) == TRUE
    a = IntEq(IntVar("k"), IntConst(0))
    assert conj([a]) == a
    assert disj([a]) == a


def test_conj_left_associates():
    a, b, c = (IntEq(IntVar(n), IntConst(0)) for n in "abc")
    assert conj([a, b, c]) == And(And(a, b), c)
    assert disj([a, b, c]) == Or(Or(a, b), c)


def test_conjuncts_flattens_in_order():
    a, b, c, d = (IntEq(IntVar(n), IntConst(0)) for n in "abcd")
    assert conjuncts(And(And(a, b), And(c, d))) == [a, b, c, d]
    assert disjuncts(Or(a, Or(b, Or(c, d)))) == [a, b, c, d]
    # a non-conjunction is its own single conjunct
    assert conjuncts(Or(a, b)) == [Or(a, b)]


def test_fresh_appends_smallest_suffix():
    assert fresh("l", set()) == "l"
    assert fresh("l", {"l"}) == "l1"
    assert fresh("l", {"l", "l1"}) == "l2"


def test_fresh_never_collides():
    avoid = {f"v{i}" for i in range(10_000)} | {"v"}
    assert fresh("v", avoid) not in avoid


def test_substitute_replaces_free_occurrences():
    f = parse_formula("free x:set, k:int. card(x) = k")
    got = substitute(f, "k", Sort.INT, IntConst(3))
    assert got == parse_formula("free x:set. card(x) = 3")


def test_substitute_skips_bound_occurrences():
    f = parse_formula("free x:set. ex k:int. card(x) = k")
    assert substitute(f, "k", Sort.INT, IntConst(3)) == f


def test_substitute_avoids_capture():
    # replacing x by y under a binder for y must rename the binder
    f = parse_formula("free x:set, k:int. ex y:set. card(x union y) = k")
    got = substitute(f, "x", Sort.SET, SetVar("y"))
    assert "y" in free_vars(got)
    bound = got.var
    assert bound != "y"
    assert got.body == IntEq(Card(Union(SetVar("y"), SetVar(bound))),
                             IntVar("k"))


def test_substitute_is_identity_without_free_occurrence():
    f = parse_formula("all y:set. y subseteq y")
    assert substitute(f, "z", Sort.SET, EmptySet()) == f


def test_substitute_checks_sorts():
    f = parse_formula("free k:int. k = 0")
    with pytest.raises(SortError):
        substitute(f, "k", Sort.INT, SetVar("y"))


def test_measure_trivial():
    m = measure(parse_formula("true"))
    assert m.size == 1
    assert m.alternations == 0


def test_measure_one_alternation():
    m = measure(parse_formula("ex y:set. all k:int. card(y) = k"))
    assert m.alternations == 1
    assert m.set_vars == 1
    assert m.int_vars == 1


def test_measure_blocks_ignore_sort():
    # ex-set then ex-int is one block: same kind, no alternation
    m = measure(parse_formula("ex y:set. ex k:int. card(y) = k"))
    assert m.alternations == 0


def test_size_counts_nodes():
    f = parse_formula("free k:int. k = 0")
    # IntEq, IntVar, IntConst
    assert size(f) == 3
    assert size(Not(f)) == 4


def test_alpha_equal_renames_bound_variables():
    f = parse_formula("ex y:set. card(y) = 1")
    g = parse_formula("ex z:set. card(z) = 1")
    assert f != g
    assert alpha_equal(f, g)
    assert not alpha_equal(f, parse_formula("ex z:set. card(z) = 2"))


def test_error_hierarchy():
    assert issubclass(ParseError, BapaError)
    assert issubclass(SortError, BapaError)
    assert issubclass(ContractViolation, BapaError)


@pytest.mark.parametrize("text,alts", [
    ("ex x:set. ex y:set. all k:int. card(x union y) = k", 1),
    ("all x:set. ex y:set. all z:set. x seteq y | y seteq z", 2),
    ("card(empty) = 0", 0),
])
def test_measure_alternations_examples(text, alts):
    f = text if "free" in text else text
    assert measure(parse_formula(f)).alternations == alts
