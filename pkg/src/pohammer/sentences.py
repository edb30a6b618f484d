"""A small gallery of structures and sentences used by the demos and the
verification suites."""

from __future__ import annotations

from typing import List, Tuple

from . import formulas as F
from .structures import FiniteStructure, Signature
from .textio import parse_formula

SIG_E = Signature([("E", 2)])
SIG_P = Signature([("P", 1)])
SIG_PE = Signature([("P", 1), ("E", 2)])


def two_clique() -> FiniteStructure:
    """The symmetric edge pair on two vertices."""
    return FiniteStructure(SIG_E, 2, {"E": {(0, 1), (1, 0)}})


def broom_graph() -> FiniteStructure:
    """Three vertices, the middle one joined symmetrically to both others.

    Maps onto the two-clique surjectively but the copying sentence fails here.
    """
    return FiniteStructure(SIG_E, 3, {"E": {(0, 1), (1, 0), (2, 1), (1, 2)}})


def directed_cycle(n: int) -> FiniteStructure:
    return FiniteStructure(SIG_E, n, {"E": {(i, (i + 1) % n) for i in range(n)}})


def directed_path(n: int) -> FiniteStructure:
    return FiniteStructure(SIG_E, n, {"E": {(i, i + 1) for i in range(n - 1)}})


def edge_copying_sentence() -> F.Formula:
    """For every vertex colouring A there is a colouring C copied across edges.

    Universally-restricted and negative; not preserved under inverse
    surjective homomorphisms (the broom graph maps onto the two-clique).
    """
    a = F.fresh_so_var("A", 1)
    c = F.fresh_so_var("C", 1)
    x, y = F.fresh_var("x"), F.fresh_var("y")
    edge = F.RelAtom("E", (x, y))
    body = F.conj(
        [
            F.disj([F.Not(edge), F.Not(F.SOAtom(a, (x,))), F.SOAtom(c, (y,))]),
            F.disj([F.Not(edge), F.Not(F.SOAtom(c, (x,))), F.SOAtom(a, (y,))]),
        ]
    )
    return F.ForallSO(a, F.ExistsSO(c, F.ForallFO(x, F.ForallFO(y, body))))


def directed_cycle_sentence() -> F.Formula:
    """The edge relation contains a directed cycle (self-loops included).

    Existentially-guarded and positive: the witness set is a cycle's vertex
    set, and no challenge colouring can split it without a crossing edge.
    """
    s = F.fresh_so_var("S", 1)
    c = F.fresh_so_var("C", 1)

    x0 = F.fresh_var("x")
    loops = F.ExistsFO(x0, F.RelAtom("E", (x0, x0)))

    x1, y1 = F.fresh_var("x"), F.fresh_var("y")
    two_elements = F.ExistsFO(
        x1,
        F.ExistsFO(
            y1,
            F.conj([F.SOAtom(s, (x1,)), F.SOAtom(s, (y1,)), F.Not(F.Eq(x1, y1))]),
        ),
    )

    a1, b1 = F.fresh_var("a"), F.fresh_var("b")
    crossing = F.ExistsFO(
        a1,
        F.ExistsFO(
            b1,
            F.conj(
                [
                    F.SOAtom(s, (a1,)),
                    F.SOAtom(s, (b1,)),
                    F.SOAtom(c, (a1,)),
                    F.RelAtom("E", (a1, b1)),
                    F.Not(F.SOAtom(c, (b1,))),
                ]
            ),
        ),
    )

    x2, y2 = F.fresh_var("x"), F.fresh_var("y")
    unsplit = F.ForallFO(
        x2,
        F.ForallFO(
            y2,
            F.disj(
                [
                    F.Not(F.SOAtom(s, (x2,))),
                    F.Not(F.SOAtom(s, (y2,))),
                    F.Not(F.SOAtom(c, (x2,))),
                    F.SOAtom(c, (y2,)),
                ]
            ),
        ),
    )

    body = F.disj([loops, F.conj([two_elements, F.disj([crossing, unsplit])])])
    return F.ExistsSO(s, F.ForallSO(c, body))


def relativization_suite() -> List[F.Formula]:
    """Ten first-order sentences over {P/1, E/2}, all true on the empty
    structure (so the empty-guard escape of the restriction transform agrees
    with the substructure reading for every guard set)."""
    texts = [
        "(forall x (not (atom E (x x))))",
        "(forall x (exists y (atom E (x y))))",
        "(forall x (or (not (atom P (x))) (exists y (and (atom E (x y)) (atom P (y))))))",
        "(forall x (forall y (or (not (atom E (x y))) (atom E (y x)))))",
        "(or (exists x (and (atom P (x)) (forall y (or (not (atom E (x y))) (atom P (y))))))"
        " (forall z (not (atom P (z)))))",
        "(forall x (forall y (or (eq x y) (atom E (x y)) (atom E (y x))"
        " (not (atom P (x))) (not (atom P (y))))))",
        "(forall x (or (atom P (x)) (exists y (atom E (y x))) (forall z (eq z x))))",
        "(forall x (forall y (forall z (or (not (atom E (x y))) (not (atom E (y z)))"
        " (atom E (x z))))))",
        "(forall x (or (not (atom P (x))) (atom E (x x))"
        " (exists y (and (not (eq y x)) (atom E (x y))))))",
        "(forall x (exists y (or (atom E (x y)) (and (eq x y) (not (atom P (x)))))))",
    ]
    return [parse_formula(t, SIG_PE) for t in texts]


def preservation_suite() -> List[Tuple[F.Formula, Signature]]:
    """Ten CNF-normalized prenex sentences with their signatures, used to
    exercise the superstructure and shrunk-image transforms."""
    p = [
        ("(exists x (atom P (x)))", SIG_P),
        ("(forall x (atom P (x)))", SIG_P),
        ("(forall x (exists y (or (not (atom P (x))) (atom P (y)))))", SIG_P),
        ("(exists2 (S 1) (forall x (or (not (atom S (x))) (atom P (x)))))", SIG_P),
        ("(forall2 (S 1) (exists x (or (atom S (x)) (not (atom P (x))))))", SIG_P),
        (
            "(exists2 (S 1) (exists x (forall y (and (atom S (x))"
            " (or (not (atom S (y))) (not (atom P (y))))))))",
            SIG_P,
        ),
        ("(exists x (atom E (x x)))", SIG_E),
        ("(forall x (exists y (atom E (x y))))", SIG_E),
        (
            "(exists2 (S 1) (exists x (forall y (and (atom S (x))"
            " (or (not (atom S (y))) (not (atom E (x y))))))))",
            SIG_E,
        ),
        ("(forall x (forall y (or (not (atom E (x y))) (atom E (y x)))))", SIG_E),
    ]
    return [(parse_formula(t, sig), sig) for t, sig in p]


def hammer_suite() -> List[Tuple[F.Formula, Signature]]:
    """Five universally-restricted negative sentences for the hammer laws."""
    out: List[Tuple[F.Formula, Signature]] = [(edge_copying_sentence(), SIG_E)]

    # every two P-elements coincide
    s = F.fresh_so_var("S", 1)
    x, y = F.fresh_var("x"), F.fresh_var("y")
    at_most_one_p = F.ForallSO(
        s,
        F.ForallFO(
            x,
            F.ForallFO(
                y,
                F.disj(
                    [
                        F.Not(F.SOAtom(s, (x,))),
                        F.Not(F.SOAtom(s, (y,))),
                        F.Eq(x, y),
                        F.Not(F.RelAtom("P", (x,))),
                        F.Not(F.RelAtom("P", (y,))),
                    ]
                ),
            ),
        ),
    )
    out.append((at_most_one_p, SIG_P))

    # every nonempty challenge set contains a non-P element
    s2 = F.fresh_so_var("S", 1)
    w, z = F.fresh_var("x"), F.fresh_var("z")
    nonempty_has_non_p = F.ForallSO(
        s2,
        F.disj(
            [
                F.ExistsFO(w, F.conj([F.SOAtom(s2, (w,)), F.Not(F.RelAtom("P", (w,)))])),
                F.ForallFO(z, F.Not(F.SOAtom(s2, (z,)))),
            ]
        ),
    )
    out.append((nonempty_has_non_p, SIG_P))

    # every challenge set extends to a P-avoiding superset
    a = F.fresh_so_var("A", 1)
    e = F.fresh_so_var("B", 1)
    u = F.fresh_var("x")
    subset_avoids_p = F.ForallSO(
        a,
        F.ExistsSO(
            e,
            F.ForallFO(
                u,
                F.conj(
                    [
                        F.disj([F.Not(F.SOAtom(a, (u,))), F.SOAtom(e, (u,))]),
                        F.disj([F.Not(F.SOAtom(e, (u,))), F.Not(F.RelAtom("P", (u,)))]),
                    ]
                ),
            ),
        ),
    )
    out.append((subset_avoids_p, SIG_P))

    # some witness set is exactly the non-P part (purely existential prefix)
    t = F.fresh_so_var("S", 1)
    v1, v2 = F.fresh_var("x"), F.fresh_var("y")
    no_p_witnessed = F.ExistsSO(
        t,
        F.conj(
            [
                F.ForallFO(v1, F.disj([F.Not(F.SOAtom(t, (v1,))), F.Not(F.RelAtom("P", (v1,)))])),
                F.ForallFO(v2, F.disj([F.SOAtom(t, (v2,)), F.Not(F.RelAtom("P", (v2,)))])),
            ]
        ),
    )
    out.append((no_p_witnessed, SIG_P))
    return out
