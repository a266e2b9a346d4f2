"""Integer arithmetic engine: atom normalization, QE, decision, evaluation."""

import pytest

from bapa.core import (
    ContractViolation, Dvd, FreeVarsError, IntConst, IntEq, IntLt, IntVar,
    Not, QUANTIFIERS, subformulas,
)
from bapa.alpha import alpha_translate, instantiate
from bapa.presburger import (
    check_pa, normalize_atoms, pa_decide, pa_eliminate_exists, pa_eval,
    pa_eval_bounded, pa_qe,
)
from bapa.syntax import parse_formula

from corpus import bounded_truth, pa_enum_bound, pa_sentences


def P(text):
    return parse_formula(text)


# ------------------------------------------------------- atom normalization

def _pointwise_equal(f, g, names, lo=-8, hi=8):
    import itertools
    for vals in itertools.product(range(lo, hi + 1), repeat=len(names)):
        env = dict(zip(names, vals))
        assert pa_eval(f, env) == pa_eval(g, env), env


def test_normalize_negated_less_than():
    f = P("free t1:int, t2:int. ~(t1 < t2)")
    got = normalize_atoms(f)
    assert not any(isinstance(g, Not) for g in subformulas(got))
    _pointwise_equal(got, P("free t1:int, t2:int. t2 < t1 + 1"),
                     ["t1", "t2"])


def test_normalize_equality_into_inequalities():
    f = P("free t1:int, t2:int. t1 = t2")
    got = normalize_atoms(f)
    assert not any(isinstance(g, IntEq) for g in subformulas(got))
    _pointwise_equal(got, P("free t1:int, t2:int. t1 < t2 + 1 & t2 < t1 + 1"),
                     ["t1", "t2"])


def test_normalize_negated_divisibility():
    f = P("free t:int. ~dvd(3, t)")
    got = normalize_atoms(f)
    assert not any(isinstance(g, Not) for g in subformulas(got))
    _pointwise_equal(got, P("free t:int. dvd(3, t + 1) | dvd(3, t + 2)"),
                     ["t"])


def test_normalized_atom_shapes():
    f = normalize_atoms(P("free a:int, b:int. ~(a = b) & ~dvd(4, a + b)"))
    for g in subformulas(f):
        if isinstance(g, IntLt):
            assert g.a == IntConst(0)
        assert not isinstance(g, (IntEq, Not))


# ----------------------------------------------------- existential one step

def test_eliminate_exists_requires_var_everywhere():
    lits = [IntLt(IntConst(0), IntVar("x")), IntLt(IntConst(0), IntVar("y"))]
    with pytest.raises(ContractViolation):
        pa_eliminate_exists(lits, "x")


def test_eliminate_exists_lower_and_upper():
    # ex x. a < x & x < a + 2  has the single witness a + 1
    qf = pa_qe(P("free a:int. ex x:int. a < x & x < a + 2"))
    assert not any(isinstance(g, QUANTIFIERS) for g in subformulas(qf))
    for a in range(-6, 7):
        assert pa_eval(qf, {"a": a}) is True


def test_eliminate_exists_doubling_is_evenness():
    qf = pa_qe(P("free k:int. ex x:int. x + x = k"))
    for k in range(-10, 11):
        assert pa_eval(qf, {"k": k}) == (k % 2 == 0)


def test_eliminate_exists_joint_divisibility():
    assert pa_decide(P("ex x:int. dvd(2, x) & dvd(3, x)")) is True


def test_scaling_preserves_solutions():
    # coefficient 3 forces the lcm-scaling path; cross-check by enumeration
    f = P("free k:int. ex x:int. 3 * x = k + 1")
    qf = pa_qe(f)
    for k in range(-15, 16):
        assert pa_eval(qf, {"k": k}) == ((k + 1) % 3 == 0)


# ------------------------------------------------------------------- pa_qe

def test_qe_successor_is_total():
    assert pa_decide(P("all k:int. ex l:int. l = k + 1")) is True


def test_qe_output_quantifier_free():
    for f in pa_sentences(40):
        qf = pa_qe(f)
        assert not any(isinstance(g, QUANTIFIERS) for g in subformulas(qf))


def test_qe_quantifier_free_passthrough():
    f = P("free k:int. 0 < k")
    qf = pa_qe(f)
    for k in range(-5, 6):
        assert pa_eval(qf, {"k": k}) == (k > 0)


def test_qe_open_formula_keeps_free_vars():
    f = P("free k:int. ex x:int. 2 * x = k")
    qf = pa_qe(f)
    from bapa.core import free_vars
    assert set(free_vars(qf)) <= {"k"}
    for k in range(-10, 11):
        assert pa_eval(qf, {"k": k}) == (k % 2 == 0)


def test_check_pa_rejects_set_atoms():
    with pytest.raises(ContractViolation):
        check_pa(P("free x:set. card(x) = 1"))
    with pytest.raises(ContractViolation):
        pa_qe(P("free b:set. fin(b)"))


# ---------------------------------------------------------------- pa_decide

def test_decide_nonneg_diagonal():
    f = P("all k:int. 0 < k + 1 => (ex l:int. 0 < l + 1 & k = l)")
    assert pa_decide(f) is True


def test_decide_strict_self_comparison():
    assert pa_decide(P("ex k:int. k < k")) is False


def test_decide_rejects_open_formulas():
    with pytest.raises(FreeVarsError):
        pa_decide(P("free k:int. k = 0"))


def test_decide_matches_guarded_enumeration():
    for f in pa_sentences(60, seed=717):
        assert pa_decide(f) == bounded_truth(f, pa_enum_bound(f))


# ------------------------------------------------------------------ pa_eval

def test_eval_basic_atoms():
    assert pa_eval(P("free k:int. 0 < k"), {"k": 1}) is True
    assert pa_eval(P("free k:int. dvd(3, k)"), {"k": -6}) is True
    assert pa_eval(P("free k:int, l:int. k = l + 1"), {"k": 2, "l": 1}) is True


def test_eval_missing_binding():
    with pytest.raises(FreeVarsError):
        pa_eval(P("free k:int. 0 < k"), {})


def test_eval_sign_safe_modulus():
    for k in range(-9, 10):
        assert pa_eval(P("free k:int. dvd(3, k)"), {"k": k}) == (k % 3 == 0)


# --------------------------------------------------------- bounded evaluator

def test_bounded_eval_reflexivity():
    g = alpha_translate(P("all x:set. x seteq x"))
    assert pa_eval_bounded(g, 3) is True


def test_bounded_eval_incomparable_sets():
    g = alpha_translate(P("all x:set. all y:set. x subseteq y | y subseteq x"))
    assert pa_eval_bounded(g, 2) is False


def test_bounded_eval_agrees_with_decision():
    # a strict subset exists iff the universe is inhabited
    g = alpha_translate(P("ex x:set. ex y:set. x subseteq y & ~(x seteq y)"))
    for u in range(5):
        assert pa_eval_bounded(g, u) == pa_decide(instantiate(g, maxc=u))
        assert pa_eval_bounded(g, u) == (u >= 1)


def test_bounded_eval_needs_translation_annotations():
    with pytest.raises(ContractViolation, match="alpha|translat"):
        pa_eval_bounded(P("all k:int. k = k"), 2)
