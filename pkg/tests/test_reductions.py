import random

import pytest

import pohammer.formulas as F
from pohammer import (
    EXISTS_GUARDED,
    FORALL_RESTRICTED,
    NEGATIVE,
    POSITIVE,
    FiniteStructure,
    Signature,
    build_phi_b,
    build_phi_star,
    check_closure,
    classify,
    dual_negate,
    encode_qbf3_instance,
    encode_qcsp_instance,
    load_qbf3_kit,
    load_qcsp_kit,
    parse_qcsp,
    parse_qdimacs3,
    run_qbf3_pipeline,
    run_qcsp_pipeline,
    serialize_structure,
    write_qbf3_kit,
    write_qcsp_kit,
)
from pohammer.errors import PreconditionError

from _gen import random_qbf3_instance, random_qcsp_instance

R_SIG = Signature([("R", 2)])
R_TEMPLATE = FiniteStructure(R_SIG, 2, {"R": {(0, 1), (1, 0), (1, 1)}})


@pytest.fixture(scope="module")
def qcsp_kit():
    return build_phi_b(R_TEMPLATE, ("forall", "exists"))


@pytest.fixture(scope="module")
def qbf3_kit():
    return build_phi_star(1)


def test_phi_b_prefix_and_conjunct_counts(qcsp_kit):
    prefix, body = F.strip_so_prefix(qcsp_kit.phi_b)
    kinds = [k for k, _ in prefix]
    names = [v.name for _, v in prefix]
    assert kinds == [F.FORALL, F.FORALL, F.EXISTS, F.EXISTS]
    assert names == ["A1_0", "A1_1", "E2_0", "E2_1"]
    # body = mislabel-escape OR (exists-rules AND template-compatibility)
    assert isinstance(body, F.Or)
    psi_b = body.children[1].children[1]
    assert isinstance(psi_b, F.And)
    assert len(psi_b.children) == 4  # one relation symbol, n^2 position tuples


def test_phi_b_is_restricted_and_negative(qcsp_kit):
    assert classify(qcsp_kit.phi_b, FORALL_RESTRICTED).accepted
    assert classify(qcsp_kit.phi_b, NEGATIVE).accepted


def test_hammered_prefix_inserts_guard_after_first_universal(qcsp_kit):
    prefix, _ = F.strip_so_prefix(qcsp_kit.hammered)
    names = [v.name for _, v in prefix]
    kinds = [k for k, _ in prefix]
    assert names == ["A1_0", "U", "A1_1", "E2_0", "E2_1"]
    assert kinds == [F.FORALL, F.FORALL, F.FORALL, F.EXISTS, F.EXISTS]


def test_phi_b_requires_two_elements_and_a_universal_block():
    small = FiniteStructure(R_SIG, 1, {"R": {(0, 0)}})
    with pytest.raises(PreconditionError):
        build_phi_b(small, ("forall",))
    with pytest.raises(PreconditionError):
        build_phi_b(R_TEMPLATE, ("exists",))


def test_encode_qcsp_example(qcsp_kit):
    inst = parse_qcsp("forall x1 ; exists y1\nR(x1,y1)\n", R_SIG)
    a = encode_qcsp_instance(inst, qcsp_kit)
    assert a.size == 2
    assert a.relation("A1") == frozenset({(0,)})
    assert a.relation("E2") == frozenset({(1,)})
    assert a.relation("R") == frozenset({(0, 1)})


def test_encode_qcsp_markers_partition(qcsp_kit):
    rng = random.Random(51)
    for _ in range(20):
        inst = random_qcsp_instance(rng, qcsp_kit.prefix)
        a = encode_qcsp_instance(inst, qcsp_kit)
        marked = [
            sum((e,) in a.relation(m) for m in qcsp_kit.marker_symbols)
            for e in range(a.size)
        ]
        assert all(c == 1 for c in marked)


def test_encode_qcsp_no_atoms(qcsp_kit):
    inst = parse_qcsp("forall x1 x2 ; exists\n", R_SIG)
    a = encode_qcsp_instance(inst, qcsp_kit)
    assert a.relation("R") == frozenset()
    assert a.relation("A1") == frozenset({(0,), (1,)})


def test_encode_qcsp_prefix_mismatch(qcsp_kit):
    inst = parse_qcsp("exists y1\nR(y1,y1)\n", R_SIG)
    with pytest.raises(PreconditionError):
        encode_qcsp_instance(inst, qcsp_kit)


def test_qcsp_pipeline_worked_examples(qcsp_kit):
    inst = parse_qcsp("forall x1 ; exists y1\nR(x1,y1)\n", R_SIG)
    result = run_qcsp_pipeline(inst, qcsp_kit)
    assert (result.direct, result.via_phi_b, result.via_hammer) == (True, True, True)
    inst2 = parse_qcsp("forall x1 x2 ; exists\nR(x1,x2)\n", R_SIG)
    result2 = run_qcsp_pipeline(inst2, qcsp_kit)
    assert (result2.direct, result2.via_phi_b, result2.via_hammer) == (
        False,
        False,
        False,
    )


def test_qcsp_pipeline_rejects_label_doubling(qcsp_kit):
    # a variable used twice in one atom must not satisfy the sentence via two labels
    sparse = FiniteStructure(R_SIG, 2, {"R": {(0, 1)}})
    kit = build_phi_b(sparse, ("forall", "exists"))
    inst = parse_qcsp("forall x1 ; exists y1\nR(y1,y1)\n", R_SIG)
    result = run_qcsp_pipeline(inst, kit)
    assert result.agree and result.direct is False


def test_qcsp_pipeline_random_agreement(qcsp_kit):
    rng = random.Random(53)
    for _ in range(12):
        inst = random_qcsp_instance(rng, qcsp_kit.prefix, max_vars=3)
        result = run_qcsp_pipeline(inst, qcsp_kit)
        assert result.agree, (inst, result)


def test_phi_star_prefix_shape(qbf3_kit):
    prefix, body = F.strip_so_prefix(qbf3_kit.phi_star)
    assert [(k, v.name) for k, v in prefix] == [
        (F.FORALL, "A1_0"),
        (F.EXISTS, "E1_1"),
        (F.EXISTS, "V"),
    ]
    # level-pair bookkeeping families are empty at depth 1: the mislabel
    # escape keeps exactly the two surviving families
    assert isinstance(body, F.Or)
    assert isinstance(body.children[0], F.Or)
    assert len(body.children[0].children) == 2


def test_phi_star_classifies(qbf3_kit):
    assert classify(qbf3_kit.phi_star, EXISTS_GUARDED).accepted
    assert classify(qbf3_kit.phi_star, POSITIVE).accepted
    dual = dual_negate(qbf3_kit.phi_star)
    assert classify(dual, FORALL_RESTRICTED).accepted
    assert classify(dual, NEGATIVE).accepted


def test_phi_star_depth_two_builds_and_classifies():
    kit = build_phi_star(2)
    prefix, _ = F.strip_so_prefix(kit.phi_star)
    assert [k for k, _ in prefix] == [
        F.FORALL,
        F.EXISTS,
        F.FORALL,
        F.EXISTS,
        F.EXISTS,
    ]
    assert classify(kit.phi_star, EXISTS_GUARDED).accepted
    assert classify(kit.phi_star, POSITIVE).accepted


def test_encode_qbf3_example():
    inst = parse_qdimacs3("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n")
    a = encode_qbf3_instance(inst, 1)
    assert a.size == 4
    # elements: (x,1) (y,1) (~x,2) (~y,2) in clause-major order
    assert a.relation("S") == frozenset({(0,), (1,)})
    assert a.relation("T") == frozenset({(2,), (3,)})
    assert a.relation("Rbar") == frozenset({(0, 2), (2, 0), (1, 3), (3, 1)})
    assert a.relation("A1") == frozenset({(0,), (2,)})
    assert a.relation("E1") == frozenset({(1,), (3,)})
    assert a.relation("succ") == frozenset({(0, 2), (0, 3), (1, 2), (1, 3)})


def test_encode_qbf3_single_clause():
    inst = parse_qdimacs3("p cnf 2 1\na 1 0\ne 2 0\n1 0\n")
    a = encode_qbf3_instance(inst, 1)
    assert a.relation("S") == a.relation("T") == frozenset({(0,)})
    assert a.relation("succ") == frozenset()


def test_encode_qbf3_shape_and_clause_requirements(qbf3_kit):
    wrong_shape = parse_qdimacs3("p cnf 2 1\ne 1 0\na 2 0\n1 0\n")
    with pytest.raises(PreconditionError):
        encode_qbf3_instance(wrong_shape, 1)
    no_clauses = parse_qdimacs3("p cnf 2 0\na 1 0\ne 2 0\n")
    with pytest.raises(PreconditionError):
        encode_qbf3_instance(no_clauses, 1)


def test_encode_qbf3_blocks_partition():
    rng = random.Random(57)
    for _ in range(20):
        inst = random_qbf3_instance(rng)
        a = encode_qbf3_instance(inst, 1)
        for e in range(a.size):
            marks = sum(
                (e,) in a.relation(s) for s in ("A1", "E1")
            )
            assert marks == 1


def test_qbf3_pipeline_worked_examples(qbf3_kit):
    true_inst = parse_qdimacs3("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n")
    r1 = run_qbf3_pipeline(true_inst, qbf3_kit)
    assert (r1.direct, r1.via_phi_star, r1.via_hammer) == (True, True, False)
    false_inst = parse_qdimacs3("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-2 0\n")
    r2 = run_qbf3_pipeline(false_inst, qbf3_kit)
    assert (r2.direct, r2.via_phi_star, r2.via_hammer) == (False, False, True)


def test_qbf3_pipeline_random_contract(qbf3_kit):
    rng = random.Random(59)
    done = 0
    while done < 8:
        inst = random_qbf3_instance(rng)
        if encode_qbf3_instance(inst, 1).size > 4:
            continue
        result = run_qbf3_pipeline(inst, qbf3_kit)
        assert result.contract_holds, (inst, result)
        done += 1


def test_encoders_injective_up_to_renaming(qcsp_kit):
    rng = random.Random(61)
    seen = {}
    for _ in range(25):
        inst = random_qcsp_instance(rng, qcsp_kit.prefix, max_vars=3)
        key = serialize_structure(encode_qcsp_instance(inst, qcsp_kit))
        canonical = (
            tuple(len(names) for _, names in inst.blocks),
            tuple(
                sorted(
                    {
                        (s, tuple(inst.variables.index(a) for a in args))
                        for s, args in inst.atoms
                    }
                )
            ),
        )
        if key in seen:
            assert seen[key] == canonical
        seen[key] = canonical


def test_kit_write_and_load_round_trip(tmp_path, qcsp_kit, qbf3_kit):
    d1 = tmp_path / "qcsp"
    write_qcsp_kit(qcsp_kit, str(d1))
    loaded = load_qcsp_kit(str(d1))
    assert loaded.prefix == qcsp_kit.prefix
    assert loaded.marker_symbols == qcsp_kit.marker_symbols
    assert loaded.template == qcsp_kit.template

    d2 = tmp_path / "qbf3"
    write_qbf3_kit(qbf3_kit, str(d2))
    loaded2 = load_qbf3_kit(str(d2))
    assert loaded2.n == 1
    # a corrupted sentence file is detected
    (d2 / "phi_star.sof").write_text("(true)")
    with pytest.raises(PreconditionError):
        load_qbf3_kit(str(d2))


def test_kit_closure_spot_checks(qcsp_kit, qbf3_kit):
    # hammered kit sentences on seeded random families with sampled pairs;
    # the family signature includes the reserved disequality symbol
    from pohammer import enumerate_structures

    sig_n = Signature(qcsp_kit.signature.symbols + (("N", 2),))
    fam = list(enumerate_structures(sig_n, 2, mode="random", seed=65, count=6))
    for kind in ("inverse_homomorphisms", "disjoint_unions"):
        report = check_closure(qcsp_kit.hammered, kind, structures=fam)
        assert not report.found, report.witness

    sig2_n = Signature(qbf3_kit.signature.symbols + (("N", 2),))
    fam2 = list(enumerate_structures(sig2_n, 2, mode="random", seed=67, count=4))
    for kind in ("inverse_homomorphisms", "disjoint_unions"):
        report2 = check_closure(qbf3_kit.dual_hammered, kind, structures=fam2)
        assert not report2.found, report2.witness
