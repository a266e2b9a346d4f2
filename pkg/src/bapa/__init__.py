"""Decision procedure for Boolean algebras of sets with Presburger cardinality constraints."""

from bapa.core import (  # noqa: F401
    Add, And, BapaError, Card, Compl, ContractViolation, Dvd, EmptySet,
    Exists, FALSE, FalseF, Fin, FinUniv, Forall, Formula, FreeVarsError, Iff,
    Implies, IntConst, IntEq, IntLt, IntTerm, IntVar, Inter, MaxCard, Measure,
    Mul, Not, Or, ParseError, PropVar, ResourceError, SetEq, SetTerm, SetVar,
    Sort, SortError, Sub, SubsetEq, TRUE, TrueF, Union, UnivSet, alpha_equal,
    check_sorted, conj, conjuncts, disj, disjuncts, free_vars, fresh, measure,
    size, substitute,
)
from bapa.syntax import parse_formula, print_formula  # noqa: F401
from bapa.normalize import (  # noqa: F401
    simplify_const, to_nnf, to_prenex,
)
from bapa.presburger import (  # noqa: F401
    pa_decide, pa_eliminate_exists, pa_eval, pa_eval_bounded, pa_qe,
)
from bapa.oracle import oracle, oracle_sweep  # noqa: F401
from bapa.alpha import (  # noqa: F401
    alpha_translate, close_free, decide, instantiate,
)
from bapa.baqe import ba_eliminate, ba_eliminate_innermost  # noqa: F401
from bapa.schema import (  # noqa: F401
    Proc, Schema, body_to_formula, correctness_vc, parse_schema,
)
