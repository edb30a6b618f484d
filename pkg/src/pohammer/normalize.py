"""Semantics-preserving rewrites: NNF, prenex form, CNF/DNF, prefix dualization."""

from __future__ import annotations

import warnings
from typing import List, Tuple

from . import formulas as F
from .errors import BlowupError, PreconditionError

DEFAULT_SIZE_CAP = 100_000

CNF = "cnf"
DNF = "dnf"


class PrenexReorderWarning(UserWarning):
    """An SO quantifier was hoisted across an FO quantifier.

    The reorder is sound for the constructions in this toolkit but is not a
    logical equivalence in general.
    """


def to_nnf(f: F.Formula) -> F.Formula:
    """Push negations to atoms, removing double negations and flipping
    quantifiers (both FO and SO) under a pushed negation."""

    def pos(node: F.Formula) -> F.Formula:
        if isinstance(node, F.ATOMS):
            return node
        if isinstance(node, F.Not):
            return neg(node.child)
        if isinstance(node, F.And):
            return F.conj(pos(c) for c in node.children)
        if isinstance(node, F.Or):
            return F.disj(pos(c) for c in node.children)
        if isinstance(node, F.ExistsFO):
            return F.ExistsFO(node.var, pos(node.child))
        if isinstance(node, F.ForallFO):
            return F.ForallFO(node.var, pos(node.child))
        if isinstance(node, F.ExistsSO):
            return F.ExistsSO(node.var, pos(node.child))
        if isinstance(node, F.ForallSO):
            return F.ForallSO(node.var, pos(node.child))
        raise TypeError(f"not a formula node: {node!r}")

    def neg(node: F.Formula) -> F.Formula:
        if isinstance(node, F.TrueF):
            return F.FALSE
        if isinstance(node, F.FalseF):
            return F.TRUE
        if isinstance(node, (F.RelAtom, F.SOAtom, F.Eq)):
            return F.Not(node)
        if isinstance(node, F.Not):
            return pos(node.child)
        if isinstance(node, F.And):
            return F.disj(neg(c) for c in node.children)
        if isinstance(node, F.Or):
            return F.conj(neg(c) for c in node.children)
        if isinstance(node, F.ExistsFO):
            return F.ForallFO(node.var, neg(node.child))
        if isinstance(node, F.ForallFO):
            return F.ExistsFO(node.var, neg(node.child))
        if isinstance(node, F.ExistsSO):
            return F.ForallSO(node.var, neg(node.child))
        if isinstance(node, F.ForallSO):
            return F.ExistsSO(node.var, neg(node.child))
        raise TypeError(f"not a formula node: {node!r}")

    return pos(f)


def is_nnf(f: F.Formula) -> bool:
    return all(
        isinstance(n.child, (F.RelAtom, F.SOAtom, F.Eq))
        for n in F.walk(f)
        if isinstance(n, F.Not)
    )


def to_prenex(f: F.Formula) -> F.Formula:
    """Pull quantifiers to the front: SO prefix, then FO prefix, then matrix.

    Quantifiers are collected left-to-right in tree order.  Hoisting an SO
    quantifier out of an FO quantifier's scope is performed anyway but flagged
    with a PrenexReorderWarning.
    """
    F.require_alpha_normalized(f)
    if not is_nnf(f):
        raise PreconditionError("to_prenex expects a sentence in negation normal form")

    so_prefix: List[Tuple[str, F.SOVar]] = []
    fo_prefix: List[Tuple[str, F.Var]] = []
    reordered = False

    def go(node: F.Formula, under_fo: bool) -> F.Formula:
        nonlocal reordered
        if isinstance(node, F.ATOMS) or isinstance(node, F.Not):
            return node
        if isinstance(node, (F.And, F.Or)):
            parts = tuple(go(c, under_fo) for c in node.children)
            return type(node)(parts)
        if isinstance(node, (F.ExistsFO, F.ForallFO)):
            kind = F.EXISTS if isinstance(node, F.ExistsFO) else F.FORALL
            fo_prefix.append((kind, node.var))
            return go(node.child, True)
        if isinstance(node, (F.ExistsSO, F.ForallSO)):
            if under_fo:
                reordered = True
            kind = F.EXISTS if isinstance(node, F.ExistsSO) else F.FORALL
            so_prefix.append((kind, node.var))
            return go(node.child, under_fo)
        raise TypeError(f"not a formula node: {node!r}")

    matrix = go(f, False)
    if reordered:
        warnings.warn(
            "SO quantifier hoisted across an FO quantifier during prenexing",
            PrenexReorderWarning,
            stacklevel=2,
        )
    return F.wrap_so_prefix(so_prefix, F.wrap_fo_prefix(fo_prefix, matrix))


def is_prenex(f: F.Formula) -> bool:
    _, rest = F.strip_so_prefix(f)
    _, matrix = F.strip_fo_prefix(rest)
    return not any(
        isinstance(n, F.FO_QUANTIFIERS + F.SO_QUANTIFIERS) for n in F.walk(matrix)
    )


# -- clause-form conversion ---------------------------------------------------

Literal = Tuple[bool, F.Formula]  # (positive?, atom)
Clause = Tuple[Literal, ...]


def _literal_of(node: F.Formula) -> Literal:
    if isinstance(node, (F.RelAtom, F.SOAtom, F.Eq, F.TrueF, F.FalseF)):
        return (True, node)
    if isinstance(node, F.Not) and isinstance(node.child, (F.RelAtom, F.SOAtom, F.Eq)):
        return (False, node.child)
    raise PreconditionError(f"expected a literal, got {F.pretty(node)}")


def matrix_clauses(matrix: F.Formula, mode: str, size_cap: int) -> List[Clause]:
    """Distribute a quantifier-free NNF matrix into CNF or DNF clauses.

    CNF clauses are disjunctions of literals, DNF clauses conjunctions.
    Raises BlowupError when the clause count would exceed size_cap.
    An empty result means True for CNF / False for DNF; a single empty clause
    means the opposite constant.
    """
    if mode not in (CNF, DNF):
        raise PreconditionError(f"mode must be {CNF!r} or {DNF!r}, got {mode!r}")

    outer_is_and = mode == CNF  # the clause list is a conjunction for CNF

    def combine_inner(groups: List[List[Clause]]) -> List[Clause]:
        # cross product: one clause from each group, unioned
        total = 1
        for g in groups:
            total *= len(g)
            if total > size_cap:
                raise BlowupError(total, size_cap)
        out: List[Clause] = [()]
        for g in groups:
            nxt: List[Clause] = []
            for acc in out:
                for clause in g:
                    merged = list(acc)
                    for lit in clause:
                        if lit not in merged:
                            merged.append(lit)
                    nxt.append(tuple(merged))
            out = nxt
        return out

    def convert(node: F.Formula) -> List[Clause]:
        if isinstance(node, (F.And, F.Or)):
            outer = isinstance(node, F.And) == outer_is_and
            groups = [convert(c) for c in node.children]
            if outer:
                merged: List[Clause] = []
                for g in groups:
                    merged.extend(g)
                if len(merged) > size_cap:
                    raise BlowupError(len(merged), size_cap)
                return merged
            return combine_inner(groups)
        lit = _literal_of(node)
        positive, atom = lit
        if isinstance(atom, F.TrueF):
            # True: for CNF an always-satisfied clause (drop); for DNF the
            # clause (True) i.e. an empty conjunction.
            return [] if mode == CNF else [()]
        if isinstance(atom, F.FalseF):
            return [()] if mode == CNF else []
        return [(lit,)]

    clauses = convert(matrix)
    # simplify: a clause subsumed by the constant is dropped; dedupe clauses
    seen = set()
    out: List[Clause] = []
    for c in clauses:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def clauses_to_matrix(clauses: List[Clause], mode: str) -> F.Formula:
    def lit_formula(lit: Literal) -> F.Formula:
        positive, atom = lit
        return atom if positive else F.Not(atom)

    if mode == CNF:
        return F.conj(F.disj(lit_formula(l) for l in c) for c in clauses)
    return F.disj(F.conj(lit_formula(l) for l in c) for c in clauses)


def qf_normalize(f: F.Formula, mode: str, size_cap: int = DEFAULT_SIZE_CAP) -> F.Formula:
    """Rewrite the quantifier-free part of a prenex sentence into clause form."""
    if not is_prenex(f):
        raise PreconditionError("qf_normalize expects a prenex sentence")
    so_prefix, rest = F.strip_so_prefix(f)
    fo_prefix, matrix = F.strip_fo_prefix(rest)
    matrix = to_nnf(matrix)
    clauses = matrix_clauses(matrix, mode, size_cap)
    body = clauses_to_matrix(clauses, mode)
    return F.wrap_so_prefix(so_prefix, F.wrap_fo_prefix(fo_prefix, body))


def dual_negate(f: F.Formula) -> F.Formula:
    """Negate a prenex-SO sentence keeping its SO variables in place.

    Q1 S1 ... Qm Sm . body  becomes  ~Q1 S1 ... ~Qm Sm . nnf(not body);
    the result is logically equivalent to the negation of the input.
    """
    so_prefix, body = F.strip_so_prefix(f)
    if F.contains_so_binder(body):
        raise PreconditionError(
            "dual_negate expects a prenex-SO sentence (no SO quantifier in the body)"
        )
    flipped = [(F.complement(kind), var) for kind, var in so_prefix]
    return F.wrap_so_prefix(flipped, to_nnf(F.Not(body)))
