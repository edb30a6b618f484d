"""Source-to-source sentence transformations.

* sup_transform: adds a fresh existential set so the transformed sentence is
  satisfied exactly on structures with a nonempty induced substructure
  satisfying the input (and is recognized as exists_guarded).
* shom_transform: shadows every relation with an existential subset copy, so
  the transformed sentence is positive and holds exactly when some
  relation-shrunk structure on the same domain satisfies the input.
* restrict: relativization of a sentence to the set named by a unary guard.
* csp_hammer: wraps a forall_restricted negative sentence so that its models
  form a class closed under disjoint unions and inverse homomorphisms.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple, Union

from . import formulas as F
from . import normalize as N
from .classes import FORALL_RESTRICTED, NEGATIVE, classify
from .errors import PreconditionError, SignatureError
from .structures import NEQ_SYMBOL

GuardName = Union[str, F.SOVar]


# ---------------------------------------------------------------------------
# CNF-normalized input handling
# ---------------------------------------------------------------------------


def _as_clause(node: F.Formula) -> List[F.Formula]:
    """A clause as a literal list; raises if node is not a disjunction of literals."""
    if isinstance(node, F.Or):
        lits: List[F.Formula] = []
        for c in node.children:
            lits.extend(_as_clause(c))
        return lits
    N._literal_of(node)  # validates literal shape
    return [node]


def _require_cnf_normalized(
    f: F.Formula,
) -> Tuple[List[Tuple[str, F.SOVar]], List[Tuple[str, F.Var]], List[List[F.Formula]]]:
    """Split a CNF-normalized prenex sentence into prefixes and literal clauses."""
    F.require_sentence(f, "transform input")
    F.require_alpha_normalized(f, "transform input")
    so_prefix, rest = F.strip_so_prefix(f)
    fo_prefix, matrix = F.strip_fo_prefix(rest)
    try:
        if isinstance(matrix, F.TrueF):
            clauses: List[List[F.Formula]] = []
        elif isinstance(matrix, F.And):
            clauses = [_as_clause(c) for c in matrix.children]
        else:
            clauses = [_as_clause(matrix)]
    except PreconditionError:
        raise PreconditionError(
            "transform input must be a CNF-normalized prenex sentence"
        ) from None
    if F.contains_so_binder(matrix):
        raise PreconditionError("transform input must have all SO quantifiers in front")
    return so_prefix, fo_prefix, clauses


def _clauses_matrix(clauses: List[List[F.Formula]]) -> F.Formula:
    return F.conj(F.disj(c) for c in clauses)


# ---------------------------------------------------------------------------
# superstructure transform
# ---------------------------------------------------------------------------


def sup_transform(f: F.Formula) -> F.Formula:
    """Guard a CNF-normalized prenex sentence with a fresh existential set.

    The output holds on A exactly when some nonempty induced substructure of
    A satisfies the input, and is accepted by classify(..., exists_guarded).
    """
    so_prefix, fo_prefix, clauses = _require_cnf_normalized(f)
    guard = F.fresh_so_var("S", 1)
    z = F.fresh_var("z")
    universals = [v for kind, v in fo_prefix if kind == F.FORALL]
    existentials = [v for kind, v in fo_prefix if kind == F.EXISTS]

    new_clauses: List[List[F.Formula]] = [[F.SOAtom(guard, (z,))]]
    for y in existentials:
        new_clauses.append(
            [F.Not(F.SOAtom(guard, (x,))) for x in universals] + [F.SOAtom(guard, (y,))]
        )
    for clause in clauses:
        new_clauses.append(
            list(clause) + [F.Not(F.SOAtom(guard, (x,))) for x in universals]
        )

    body = F.wrap_fo_prefix([(F.EXISTS, z)] + fo_prefix, _clauses_matrix(new_clauses))
    return F.wrap_so_prefix([(F.EXISTS, guard)] + so_prefix, body)


# ---------------------------------------------------------------------------
# shrunk-homomorphic-image transform
# ---------------------------------------------------------------------------


def _occurring_symbols(f: F.Formula) -> List[Tuple[str, int]]:
    seen: Dict[str, int] = {}
    for node in F.walk(f):
        if isinstance(node, F.RelAtom):
            arity = len(node.args)
            if seen.setdefault(node.symbol, arity) != arity:
                raise SignatureError(
                    f"symbol {node.symbol!r} used at two different arities"
                )
    return sorted(seen.items())


def shom_transform(f: F.Formula, symbols: Optional[List[Tuple[str, int]]] = None) -> F.Formula:
    """Replace every relation atom with an existential shadow copy.

    The output is positive and holds on A exactly when some structure on the
    same domain with shrunk relations satisfies the input.  `symbols` defaults
    to the relation symbols occurring in the sentence.
    """
    so_prefix, fo_prefix, clauses = _require_cnf_normalized(f)
    if symbols is None:
        symbols = _occurring_symbols(f)
    shadows = {name: F.fresh_so_var(f"{name}_p", arity) for name, arity in symbols}

    def replace(lit: F.Formula) -> F.Formula:
        if isinstance(lit, F.Not):
            return F.Not(replace(lit.child))
        if isinstance(lit, F.RelAtom) and lit.symbol in shadows:
            return F.SOAtom(shadows[lit.symbol], lit.args)
        return lit

    replaced = [[replace(l) for l in clause] for clause in clauses]
    inner = F.wrap_fo_prefix(fo_prefix, _clauses_matrix(replaced))

    guards: List[F.Formula] = []
    for name, arity in symbols:
        xs = tuple(F.fresh_var(f"x{i+1}") for i in range(arity))
        guards.append(
            F.wrap_fo_prefix(
                [(F.FORALL, x) for x in xs],
                F.disj([F.Not(F.SOAtom(shadows[name], xs)), F.RelAtom(name, xs)]),
            )
        )

    body = F.conj([inner] + guards)
    prefix = [(F.EXISTS, shadows[name]) for name, _ in symbols] + so_prefix
    return F.wrap_so_prefix(prefix, body)


# ---------------------------------------------------------------------------
# relativization
# ---------------------------------------------------------------------------


def restrict(f: F.Formula, guard: GuardName, empty_escape: bool = True) -> F.Formula:
    """Relativize a sentence to the set named by a fresh unary guard.

    Every literal L(x1,...,xn) in the negation normal form becomes

        (OR over universal xi of ~U(xi)) or ((AND over existential xi of U(xi)) and L)

    keeping the literal's own negation inside the guard.  With empty_escape
    (the default) the result is `(forall z. ~U(z)) or core`, which holds
    vacuously when the guard set is empty; the transformed sentence then holds
    exactly when the substructure on the guard set satisfies the input.

    `guard` may be a relation symbol name (guard atoms become relation atoms)
    or an SO variable to be bound outside the result (guard atoms become SO
    atoms).
    """
    F.require_alpha_normalized(f, "restrict input")
    nnf = N.to_nnf(f)
    kinds = F.fo_binder_kinds(nnf)

    if isinstance(guard, F.SOVar):
        if guard.arity != 1:
            raise PreconditionError("the restriction guard must be unary")
        make_guard = lambda v: F.SOAtom(guard, (v,))
    else:
        make_guard = lambda v: F.RelAtom(str(guard), (v,))

    def literal_args(lit: F.Formula) -> Tuple[F.Var, ...]:
        atom = lit.child if isinstance(lit, F.Not) else lit
        if isinstance(atom, (F.RelAtom, F.SOAtom)):
            return atom.args
        if isinstance(atom, F.Eq):
            return (atom.left, atom.right)
        return ()

    def guard_literal(lit: F.Formula) -> F.Formula:
        args = literal_args(lit)
        universal: List[F.Var] = []
        existential: List[F.Var] = []
        for v in args:
            kind = kinds.get(v.uid)
            if kind is None:
                raise PreconditionError(
                    f"variable {v.name!r} has no FO binder in the restricted sentence"
                )
            bucket = universal if kind == F.FORALL else existential
            if v not in bucket:
                bucket.append(v)
        positive_part = F.conj([make_guard(v) for v in existential] + [lit])
        return F.disj([F.Not(make_guard(v)) for v in universal] + [positive_part])

    def go(node: F.Formula) -> F.Formula:
        if isinstance(node, (F.TrueF, F.FalseF)):
            return node
        if isinstance(node, (F.RelAtom, F.SOAtom, F.Eq, F.Not)):
            return guard_literal(node)
        if isinstance(node, (F.And, F.Or)):
            return type(node)(tuple(go(c) for c in node.children))
        if isinstance(node, F.FO_QUANTIFIERS):
            return type(node)(node.var, go(node.child))
        if isinstance(node, F.SO_QUANTIFIERS):
            raise PreconditionError("restrict expects a sentence without SO quantifiers")
        raise TypeError(f"not a formula node: {node!r}")

    core = go(nnf)
    if not empty_escape:
        return core
    z = F.fresh_var("z")
    return F.disj([F.ForallFO(z, F.Not(make_guard(z))), core])


# ---------------------------------------------------------------------------
# the CSP hammer
# ---------------------------------------------------------------------------


def csp_hammer(f: F.Formula, force: bool = False) -> F.Formula:
    """Close a forall_restricted negative sentence under disjoint unions and
    inverse homomorphisms.

    The input `Q1 S1 ... Qn Sn . body` (body first-order) becomes

        Q1 S1 ... Qk Sk  forall U  Q_{k+1} S_{k+1} ... Qn Sn .
            restrict(no_missing_pair or (no_loop and body), U)

    where k is the first universal position (U goes last if there is none),
    U is a fresh universal set, and the reserved binary symbol N supplies the
    no_missing_pair / no_loop escape sentences.  Unless `force` is set, the
    recognizers must accept the input as forall_restricted and negative.
    """
    F.require_sentence(f, "csp_hammer input")
    F.require_alpha_normalized(f, "csp_hammer input")
    so_prefix, body = F.strip_so_prefix(f)
    if F.contains_so_binder(body):
        raise PreconditionError("csp_hammer expects a prenex-SO sentence")
    for node in F.walk(body):
        if isinstance(node, F.RelAtom) and node.symbol == NEQ_SYMBOL:
            raise SignatureError(
                f"the sentence already uses the reserved symbol {NEQ_SYMBOL!r}"
            )
    if any(var.name == "U" for _, var in so_prefix):
        raise SignatureError("the sentence already uses an SO variable named 'U'")
    if not force:
        for cls in (FORALL_RESTRICTED, NEGATIVE):
            verdict = classify(f, cls)
            if not verdict.accepted:
                raise PreconditionError(
                    f"csp_hammer input not recognized as {cls}"
                    + (
                        f" (clause: {verdict.failing_clause.clause};"
                        f" witness: {verdict.failing_clause.witness})"
                        if verdict.failing_clause
                        else ""
                    )
                )

    u = F.fresh_so_var("U", 1)
    x, y = F.fresh_var("x"), F.fresh_var("y")
    no_missing_pair = F.ExistsFO(
        x,
        F.ExistsFO(y, F.conj([F.Not(F.Eq(x, y)), F.Not(F.RelAtom(NEQ_SYMBOL, (x, y)))])),
    )
    w = F.fresh_var("x")
    no_loop = F.ForallFO(w, F.Not(F.RelAtom(NEQ_SYMBOL, (w, w))))
    wrapped = F.disj([no_missing_pair, F.conj([no_loop, body])])
    new_body = restrict(wrapped, u, empty_escape=True)

    first_forall = next(
        (i for i, (kind, _) in enumerate(so_prefix) if kind == F.FORALL), None
    )
    insert_at = len(so_prefix) if first_forall is None else first_forall + 1
    prefix = list(so_prefix)
    prefix.insert(insert_at, (F.FORALL, u))
    return F.wrap_so_prefix(prefix, new_body)
