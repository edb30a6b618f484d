import random

import pytest

import pohammer.formulas as F
from pohammer import (
    BudgetExceededError,
    FiniteStructure,
    Qbf3Instance,
    QcspInstance,
    Signature,
    find_homomorphisms,
    mc_so,
    mc_so_witness,
    parse_formula,
    parse_qcsp,
    qcsp_canonical_structure,
    solve_qbf3,
    solve_qcsp,
)
from pohammer.errors import PreconditionError, SignatureError
from pohammer.homsearch import enumerate_structures
from pohammer.sentences import (
    SIG_E,
    SIG_PE,
    broom_graph,
    directed_cycle,
    directed_cycle_sentence,
    directed_path,
    edge_copying_sentence,
    two_clique,
)

from _gen import random_sentence
from _naive import naive_mc

R_SIG = Signature([("R", 2)])
R_TEMPLATE = FiniteStructure(R_SIG, 2, {"R": {(0, 1), (1, 0), (1, 1)}})


def test_copying_sentence_on_worked_examples():
    phi = edge_copying_sentence()
    assert mc_so(two_clique(), phi) is True
    assert mc_so(broom_graph(), phi) is False


def test_cycle_sentence_matches_small_cases():
    phi = directed_cycle_sentence()
    assert mc_so(directed_cycle(3), phi) is True
    assert mc_so(directed_path(2), phi) is False


def test_trivial_so_existential_is_true_everywhere():
    f = parse_formula("(exists2 (S 1) (true))", SIG_E)
    for a in enumerate_structures(SIG_E, 2):
        assert mc_so(a, f) is True


def test_agreement_with_naive_evaluator():
    rng = random.Random(21)
    structures = random.Random(22).sample(list(enumerate_structures(SIG_PE, 2)), 10)
    for _ in range(60):
        f = random_sentence(rng, max_so=2, max_depth=3)
        for a in structures:
            assert mc_so(a, f) == naive_mc(a, f)


def test_budget_exhaustion_raises_with_node_count():
    phi = directed_cycle_sentence()
    with pytest.raises(BudgetExceededError) as err:
        mc_so(directed_cycle(3), phi, budget=10)
    assert err.value.nodes_expanded > 10


def test_parallel_mode_matches_sequential():
    phi = directed_cycle_sentence()
    for a in [directed_cycle(3), directed_path(3), broom_graph()]:
        assert mc_so(a, phi, jobs=2) == mc_so(a, phi)


def test_rejects_free_variables_and_unknown_symbols():
    x = F.fresh_var("x")
    with pytest.raises(PreconditionError):
        mc_so(two_clique(), F.RelAtom("E", (x, x)))
    f = parse_formula("(exists x (atom P (x)))", SIG_PE)
    with pytest.raises(SignatureError):
        mc_so(two_clique(), f)


def test_witness_for_cycle_sentence_is_the_whole_cycle():
    phi = directed_cycle_sentence()
    witness = mc_so_witness(directed_cycle(3), phi)
    assert witness is not None
    (value,) = witness.so.values()
    assert value == frozenset({(0,), (1,), (2,)})


def test_witness_none_on_false_sentence():
    phi = directed_cycle_sentence()
    assert mc_so_witness(directed_path(3), phi) is None


def test_witness_reverifies_by_substitution():
    phi = directed_cycle_sentence()
    a = directed_cycle(3)
    witness = mc_so_witness(a, phi)
    ((var, value),) = witness.so.items()
    witness.validate_for(a)
    # drop the witnessed binder and re-check with the value fixed as a relation
    body = phi.child

    def substitute(node):
        if isinstance(node, F.SOAtom) and node.var == var:
            return F.RelAtom("W", node.args)
        if isinstance(node, (F.And, F.Or)):
            return type(node)(tuple(substitute(c) for c in node.children))
        if isinstance(node, F.Not):
            return F.Not(substitute(node.child))
        if isinstance(node, F.FO_QUANTIFIERS + F.SO_QUANTIFIERS):
            return type(node)(node.var, substitute(node.child))
        return node

    from pohammer import expand

    assert mc_so(expand(a, "W", 1, value), substitute(body)) is True


def test_solve_qcsp_examples():
    inst = parse_qcsp("forall x1 ; exists y1\nR(x1,y1)\n", R_SIG)
    assert solve_qcsp(R_TEMPLATE, inst) is True
    inst2 = parse_qcsp("forall x1 x2 ; exists\nR(x1,x2)\n", R_SIG)
    assert solve_qcsp(R_TEMPLATE, inst2) is False
    inst3 = QcspInstance((("exists", ("a", "b")),), ())
    assert solve_qcsp(R_TEMPLATE, inst3) is True


def test_solve_qcsp_one_block_matches_homomorphism_search():
    rng = random.Random(31)
    from _gen import random_qcsp_instance

    for _ in range(40):
        inst = random_qcsp_instance(rng, ("exists",), max_vars=3, max_atoms=3)
        canonical = qcsp_canonical_structure(inst, R_SIG)
        homs = find_homomorphisms(canonical, R_TEMPLATE, "any", limit=1)
        assert solve_qcsp(R_TEMPLATE, inst) == bool(homs)


def test_solve_qbf3_examples():
    true_inst = Qbf3Instance((("a", (1,)), ("e", (2,))), ((1, 2), (-1, -2)), 2)
    assert solve_qbf3(true_inst) is True
    false_inst = Qbf3Instance((("a", (1,)), ("e", (2,))), ((1, 2), (-2,)), 2)
    assert solve_qbf3(false_inst) is False
    empty = Qbf3Instance((("a", (1,)), ("e", (2,))), (), 2)
    assert solve_qbf3(empty) is True


def test_mc_on_empty_structure():
    empty = FiniteStructure(SIG_E, 0)
    assert mc_so(empty, parse_formula("(forall x (atom E (x x)))", SIG_E)) is True
    assert mc_so(empty, parse_formula("(exists x (atom E (x x)))", SIG_E)) is False


def test_determinism_across_runs():
    phi = edge_copying_sentence()
    values = {mc_so(broom_graph(), phi) for _ in range(3)}
    assert values == {False}
