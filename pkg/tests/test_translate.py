"""The translation into hybrid formulas and its model-level equivalence."""

import pytest

from hybridcorr.semantics import globally_true, holds_quasi
from hybridcorr.syntax import (
    is_pure,
    parse,
    parse_inequality,
    parse_quasi,
    props,
)
from hybridcorr.translate import (
    TranslationShapeError,
    tr_ineq,
    tr_quasi,
    tr_quasiset,
    verify_tr_equivalence,
)

from strategies import all_models_for_item


class TestTrIneq:
    def test_left_atom_clause(self):
        assert tr_ineq(parse_inequality("'i0 <= []~'i1")) == parse("@'i0 []~'i1")

    def test_negated_right_atom_clause(self):
        assert tr_ineq(parse_inequality("<>'k1 <= ~'i1")) == parse("~@'i1 <>'k1")

    def test_state_variable_clauses(self):
        assert tr_ineq(parse_inequality("x <= <>'j")) == parse("@x <>'j")
        assert tr_ineq(parse_inequality("<>'j <= ~x")) == parse("~@x <>'j")

    def test_clause_order_on_double_match(self):
        # 'i <= ~'j matches both readings; the left-atom clause is taken
        ineq = parse_inequality("'i <= ~'j")
        assert tr_ineq(ineq) == parse("@'i ~'j")
        # ... and the two readings are model-equivalent
        other = parse("~@'j 'i")
        for m, g in all_models_for_item(ineq, max_worlds=2):
            assert globally_true(m, g, tr_ineq(ineq)) == globally_true(m, g, other)

    def test_shape_violation(self):
        with pytest.raises(TranslationShapeError):
            tr_ineq(parse_inequality("<>'i <= []'j"))


class TestTrQuasi:
    def test_box_axiom_output(self):
        q = parse_quasi("'i0 <= []~'i1 => 'i0 <= ~'i1")
        assert tr_quasi(q) == parse("@'i0 []~'i1 -> ~@'i0 'i1")

    def test_empty_antecedent(self):
        q = parse_quasi("=> 'i0 <= ~'i1")
        assert tr_quasi(q) == parse("T -> ~@'i0 'i1")

    def test_transitivity_assembly(self):
        q = parse_quasi(
            "'i0 <= <>'j1 ; 'j1 <= <>'k1 ; <>'k1 <= ~'i1 => 'i0 <= ~'i1"
        )
        assert tr_quasi(q) == parse(
            "@'i0 <>'j1 & @'j1 <>'k1 & ~@'i1 <>'k1 -> ~@'i0 'i1"
        )

    def test_conclusion_shape_enforced(self):
        with pytest.raises(TranslationShapeError):
            tr_quasi(parse_quasi("'i <= 'j => <>'i <= 'j"))


class TestTrQuasiSet:
    def test_singleton_is_member_translation(self):
        q = parse_quasi("'i0 <= []~'i1 => 'i0 <= ~'i1")
        assert tr_quasiset([q]) == tr_quasi(q)

    def test_empty_set_is_top(self):
        assert tr_quasiset([]) == parse("T")

    def test_pair_conjunction_in_order(self):
        a = parse_quasi("=> 'i0 <= ~'i1")
        b = parse_quasi("'i0 <= <>'i0 => 'i0 <= ~'i1")
        out = tr_quasiset([a, b])
        assert str(out) == f"({tr_quasi(a)}) & ({tr_quasi(b)})"


class TestEquivalence:
    def test_inequality_exhaustive_small(self):
        ineq = parse_inequality("'i <= <>'j")
        report = verify_tr_equivalence(ineq, models=all_models_for_item(ineq, 2))
        assert report.ok and report.checked > 0

    def test_quasi_pointwise_definition(self):
        q = parse_quasi("'i0 <= []~'i1 => 'i0 <= ~'i1")
        for m, g in all_models_for_item(q, 2):
            assert holds_quasi(m, g, q) == globally_true(m, g, tr_quasi(q))

    def test_bottom_left_side(self):
        ineq = parse_inequality("F <= ~'i")
        assert tr_ineq(ineq) == parse("~@'i F")
        report = verify_tr_equivalence(ineq, models=all_models_for_item(ineq, 2))
        assert report.ok

    def test_random_sampling_reports(self):
        q = parse_quasi("'i0 <= <>'j1 ; <>'j1 <= ~'i1 => 'i0 <= ~'i1")
        report = verify_tr_equivalence(q, samples=150, seed=4)
        assert report.checked == 150 and report.ok

    def test_purity_preserved(self):
        q = parse_quasi("'i0 <= []~'i1 => 'i0 <= ~'i1")
        assert is_pure(tr_quasi(q))
        assert not props(tr_quasiset([q]))
