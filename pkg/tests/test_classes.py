import random

import pytest

import pohammer.formulas as F
from pohammer import (
    EXISTS_GUARDED,
    FORALL_RESTRICTED,
    NEGATIVE,
    POSITIVE,
    check_closure,
    class_duality_check,
    classify,
    dual_negate,
    parse_formula,
    to_nnf,
)
from pohammer.sentences import (
    SIG_E,
    SIG_PE,
    directed_cycle_sentence,
    edge_copying_sentence,
)

from _gen import random_sentence


def test_cycle_sentence_is_guarded_and_positive():
    phi = directed_cycle_sentence()
    assert classify(phi, EXISTS_GUARDED).accepted
    assert classify(phi, POSITIVE).accepted


def test_copying_sentence_is_negative_and_restricted():
    phi = edge_copying_sentence()
    assert classify(phi, NEGATIVE).accepted
    assert classify(phi, FORALL_RESTRICTED).accepted


def test_guard_accepted_and_missing_guard_rejected():
    guarded = parse_formula(
        "(exists2 (S 1) (forall x (or (not (atom S (x))) (atom E (x x)))))", SIG_E
    )
    verdict = classify(guarded, EXISTS_GUARDED)
    assert verdict.accepted

    unguarded = parse_formula("(exists2 (S 1) (forall x (atom E (x x))))", SIG_E)
    verdict = classify(unguarded, EXISTS_GUARDED)
    assert not verdict.accepted
    assert verdict.failing_clause is not None
    assert verdict.failing_clause.witness == "x"


def test_universal_guard_direction():
    # an existential FO variable needs a positive universal-SO conjunct
    good = parse_formula(
        "(forall2 (S 1) (or (exists x (and (atom S (x)) (not (atom E (x x)))))"
        " (forall z (not (atom S (z))))))",
        SIG_E,
    )
    assert classify(good, FORALL_RESTRICTED).accepted
    bad = parse_formula("(forall2 (S 1) (exists x (not (atom E (x x)))))", SIG_E)
    verdict = classify(bad, FORALL_RESTRICTED)
    assert not verdict.accepted
    assert verdict.failing_clause.witness == "x"


def test_positive_negative_base_conditions():
    pos = parse_formula("(forall x (forall y (or (atom E (x y)) (eq x y))))", SIG_E)
    assert classify(pos, POSITIVE).accepted
    assert not classify(pos, NEGATIVE).accepted
    neg = parse_formula("(forall x (not (atom E (x x))))", SIG_E)
    assert classify(neg, NEGATIVE).accepted
    assert not classify(neg, POSITIVE).accepted
    # equality and SO atoms are exempt on both sides
    both = parse_formula(
        "(exists2 (S 1) (forall x (or (atom S (x)) (not (atom S (x))) (eq x x))))",
        SIG_E,
    )
    assert classify(both, POSITIVE).accepted
    assert classify(both, NEGATIVE).accepted


def test_nested_so_quantifier_is_not_recognized():
    f = parse_formula(
        "(and (exists2 (S 1) (true)) (exists2 (T 1) (true)))", SIG_E
    )
    verdict = classify(f, POSITIVE)
    assert not verdict.accepted
    assert "nested SO quantifier" in verdict.failing_clause.witness


def test_trace_reports_leaves():
    phi = directed_cycle_sentence()
    verdict = classify(phi, POSITIVE)
    assert len(verdict.trace) >= 3
    assert all(r.accepted for r in verdict.trace)


def test_blowup_gives_indeterminate_verdict():
    inner = " ".join(f"(and (atom P (v{i})) (atom P (w{i})))" for i in range(14))
    text = f"(or {inner})"
    for i in reversed(range(14)):
        text = f"(exists v{i} (exists w{i} {text}))"
    f = parse_formula(text, SIG_PE)
    verdict = classify(f, POSITIVE, size_cap=500)
    assert not verdict.accepted
    assert verdict.blowup_note
    assert verdict.failing_clause is None


def test_duality_on_paper_sentences():
    assert class_duality_check(directed_cycle_sentence())
    assert class_duality_check(edge_copying_sentence())


def test_duality_on_random_corpus():
    rng = random.Random(41)
    checked = 0
    for _ in range(200):
        f = random_sentence(rng, max_so=2, max_depth=3)
        prefix, body = F.strip_so_prefix(f)
        g = F.wrap_so_prefix(prefix, to_nnf(body))
        assert class_duality_check(g)
        checked += 1
    assert checked == 200


def test_negation_of_cycle_sentence_is_restricted_and_negative():
    dual = dual_negate(directed_cycle_sentence())
    assert classify(dual, FORALL_RESTRICTED).accepted
    assert classify(dual, NEGATIVE).accepted


def test_accepted_sentences_pass_their_closure_checks():
    # soundness against semantics on a small exhaustive family
    phi = directed_cycle_sentence()
    assert not check_closure(phi, "superstructures", sig=SIG_E, max_size=2).found
    assert not check_closure(phi, "bijective_homs", sig=SIG_E, max_size=2).found
    assert not check_closure(phi, "injective_homs", sig=SIG_E, max_size=2).found
    copy = edge_copying_sentence()
    assert not check_closure(copy, "inverse_injective_homs", sig=SIG_E, max_size=2).found
