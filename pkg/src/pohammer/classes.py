"""Recognizers for the positive, negative, existentially-guarded and
universally-restricted sentence classes.

A sentence is checked by stripping its shared SO quantifier prefix, splitting
the body at top-level conjunctions and disjunctions, and testing each leaf in
the class's clause normal form (CNF for positive / exists_guarded, DNF for
negative / forall_restricted).  The recognizers are syntactic and
intentionally incomplete for the semantic preservation classes: a rejection
means "not recognized", never "not preserved".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import formulas as F
from . import normalize as N
from .errors import BlowupError, PreconditionError

POSITIVE = "positive"
NEGATIVE = "negative"
EXISTS_GUARDED = "exists_guarded"
FORALL_RESTRICTED = "forall_restricted"

CLASSES = (POSITIVE, NEGATIVE, EXISTS_GUARDED, FORALL_RESTRICTED)

_NORMAL_FORM = {
    POSITIVE: N.CNF,
    EXISTS_GUARDED: N.CNF,
    NEGATIVE: N.DNF,
    FORALL_RESTRICTED: N.DNF,
}


@dataclass(frozen=True)
class FailingClause:
    leaf_path: str
    clause: str
    witness: str  # offending variable or atom, rendered


@dataclass(frozen=True)
class LeafReport:
    path: str
    normal_form: str
    clause_count: int
    accepted: bool
    note: str = ""


@dataclass(frozen=True)
class ClassVerdict:
    accepted: bool
    trace: Tuple[LeafReport, ...] = ()
    failing_clause: Optional[FailingClause] = None
    blowup_note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "trace": [
                {
                    "path": r.path,
                    "normal_form": r.normal_form,
                    "clause_count": r.clause_count,
                    "accepted": r.accepted,
                    "note": r.note,
                }
                for r in self.trace
            ],
            "failing_clause": None
            if self.failing_clause is None
            else {
                "leaf_path": self.failing_clause.leaf_path,
                "clause": self.failing_clause.clause,
                "witness": self.failing_clause.witness,
            },
            "blowup_note": self.blowup_note,
        }


def _render_clause(clause: N.Clause) -> str:
    return " | ".join(
        ("" if positive else "~") + F.pretty(atom) for positive, atom in clause
    )


def _leaves(body: F.Formula, path: str = "") -> List[Tuple[str, F.Formula]]:
    if isinstance(body, (F.And, F.Or)):
        out: List[Tuple[str, F.Formula]] = []
        for i, child in enumerate(body.children):
            out.extend(_leaves(child, f"{path}.{i}" if path else str(i)))
        return out
    return [(path or "root", body)]


def _clause_variables(clause: N.Clause) -> List[F.Var]:
    seen: List[F.Var] = []
    for _, atom in clause:
        if isinstance(atom, (F.RelAtom, F.SOAtom)):
            args = atom.args
        elif isinstance(atom, F.Eq):
            args = (atom.left, atom.right)
        else:
            args = ()
        for v in args:
            if v not in seen:
                seen.append(v)
    return seen


def classify(f: F.Formula, cls: str, size_cap: int = N.DEFAULT_SIZE_CAP) -> ClassVerdict:
    """Check membership of a sentence in one of the four syntactic classes."""
    if cls not in CLASSES:
        raise PreconditionError(f"unknown class {cls!r}; expected one of {CLASSES}")
    F.require_sentence(f, "classify input")
    F.require_alpha_normalized(f, "classify input")

    so_prefix, body = F.strip_so_prefix(f)
    so_kind = {var.uid: kind for kind, var in so_prefix}
    mode = _NORMAL_FORM[cls]

    trace: List[LeafReport] = []
    for path, leaf in _leaves(body):
        if F.contains_so_binder(leaf):
            trace.append(LeafReport(path, mode, 0, False, "nested SO quantifier"))
            return ClassVerdict(
                accepted=False,
                trace=tuple(trace),
                failing_clause=FailingClause(path, F.pretty(leaf), "nested SO quantifier"),
            )
        nnf = N.to_nnf(leaf)
        prenexed = N.to_prenex(nnf)
        fo_kind = F.fo_binder_kinds(prenexed)
        _, rest = F.strip_so_prefix(prenexed)
        _, matrix = F.strip_fo_prefix(rest)
        try:
            clauses = N.matrix_clauses(matrix, mode, size_cap)
        except BlowupError as exc:
            trace.append(LeafReport(path, mode, 0, False, "blow-up"))
            return ClassVerdict(
                accepted=False,
                trace=tuple(trace),
                blowup_note=str(exc),
            )
        failing = _check_leaf(clauses, cls, so_kind, fo_kind, path)
        trace.append(LeafReport(path, mode, len(clauses), failing is None))
        if failing is not None:
            return ClassVerdict(accepted=False, trace=tuple(trace), failing_clause=failing)
    return ClassVerdict(accepted=True, trace=tuple(trace))


def _check_leaf(
    clauses: List[N.Clause],
    cls: str,
    so_kind: Dict[int, str],
    fo_kind: Dict[int, str],
    path: str,
) -> Optional[FailingClause]:
    for clause in clauses:
        if cls == POSITIVE:
            for positive, atom in clause:
                if not positive and isinstance(atom, F.RelAtom):
                    return FailingClause(path, _render_clause(clause), "~" + F.pretty(atom))
        elif cls == NEGATIVE:
            for positive, atom in clause:
                if positive and isinstance(atom, F.RelAtom):
                    return FailingClause(path, _render_clause(clause), F.pretty(atom))
        elif cls == EXISTS_GUARDED:
            for var in _clause_variables(clause):
                if fo_kind.get(var.uid) != F.FORALL:
                    continue
                guarded = any(
                    not positive
                    and isinstance(atom, F.SOAtom)
                    and so_kind.get(atom.var.uid) == F.EXISTS
                    and var in atom.args
                    for positive, atom in clause
                )
                if not guarded:
                    return FailingClause(path, _render_clause(clause), var.name)
        else:  # FORALL_RESTRICTED
            for var in _clause_variables(clause):
                if fo_kind.get(var.uid) != F.EXISTS:
                    continue
                guarded = any(
                    positive
                    and isinstance(atom, F.SOAtom)
                    and so_kind.get(atom.var.uid) == F.FORALL
                    and var in atom.args
                    for positive, atom in clause
                )
                if not guarded:
                    return FailingClause(path, _render_clause(clause), var.name)
    return None


def class_duality_check(f: F.Formula, size_cap: int = N.DEFAULT_SIZE_CAP) -> bool:
    """The recognizers commute with prefix dualization on this sentence."""
    dual = N.dual_negate(f)
    return (
        classify(f, EXISTS_GUARDED, size_cap).accepted
        == classify(dual, FORALL_RESTRICTED, size_cap).accepted
        and classify(f, POSITIVE, size_cap).accepted
        == classify(dual, NEGATIVE, size_cap).accepted
    )
