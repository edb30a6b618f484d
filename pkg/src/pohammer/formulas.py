"""Second-order formula trees, variables, and assignments.

Formulas are immutable trees.  First-order and second-order variables carry
a surface name (kept for printing) and a numeric uid; alpha-normalization
means every binder in a tree binds a distinct uid.  The canonical text form
lives in textio.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

from .errors import DomainError, PreconditionError

_uid_counter = itertools.count(1)

EXISTS = "exists"
FORALL = "forall"


def complement(quantifier: str) -> str:
    return FORALL if quantifier == EXISTS else EXISTS


@dataclass(frozen=True, slots=True)
class Var:
    """A first-order variable."""

    name: str
    uid: int

    def __repr__(self):
        return f"{self.name}#{self.uid}"


@dataclass(frozen=True, slots=True)
class SOVar:
    """A second-order variable of fixed arity."""

    name: str
    uid: int
    arity: int

    def __repr__(self):
        return f"{self.name}#{self.uid}/{self.arity}"


def fresh_var(name: str = "x") -> Var:
    return Var(name, next(_uid_counter))


def fresh_so_var(name: str, arity: int) -> SOVar:
    if arity < 1:
        raise PreconditionError(f"SO variable arity must be >= 1, got {arity}")
    return SOVar(name, next(_uid_counter), arity)


class Formula:
    """Base class for formula nodes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True, slots=True)
class FalseF(Formula):
    pass


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True, slots=True)
class RelAtom(Formula):
    symbol: str
    args: Tuple[Var, ...]


@dataclass(frozen=True, slots=True)
class SOAtom(Formula):
    var: SOVar
    args: Tuple[Var, ...]

    def __post_init__(self):
        if len(self.args) != self.var.arity:
            raise PreconditionError(
                f"SO atom {self.var.name} applied to {len(self.args)} arguments, "
                f"declared arity {self.var.arity}"
            )


@dataclass(frozen=True, slots=True)
class Eq(Formula):
    left: Var
    right: Var


@dataclass(frozen=True, slots=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    children: Tuple[Formula, ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise PreconditionError("And requires at least two children")


@dataclass(frozen=True, slots=True)
class Or(Formula):
    children: Tuple[Formula, ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise PreconditionError("Or requires at least two children")


@dataclass(frozen=True, slots=True)
class ExistsFO(Formula):
    var: Var
    child: Formula


@dataclass(frozen=True, slots=True)
class ForallFO(Formula):
    var: Var
    child: Formula


@dataclass(frozen=True, slots=True)
class ExistsSO(Formula):
    var: SOVar
    child: Formula


@dataclass(frozen=True, slots=True)
class ForallSO(Formula):
    var: SOVar
    child: Formula


FO_QUANTIFIERS = (ExistsFO, ForallFO)
SO_QUANTIFIERS = (ExistsSO, ForallSO)
ATOMS = (TrueF, FalseF, RelAtom, SOAtom, Eq)


def conj(parts: Iterable[Formula]) -> Formula:
    """Conjunction with standard degenerate cases: empty -> True."""
    flat: List[Formula] = []
    for p in parts:
        if isinstance(p, TrueF):
            continue
        if isinstance(p, FalseF):
            return FALSE
        flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(parts: Iterable[Formula]) -> Formula:
    """Disjunction with standard degenerate cases: empty -> False."""
    flat: List[Formula] = []
    for p in parts:
        if isinstance(p, FalseF):
            continue
        if isinstance(p, TrueF):
            return TRUE
        flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, (And, Or)):
        return f.children
    if isinstance(f, Not):
        return (f.child,)
    if isinstance(f, (ExistsFO, ForallFO, ExistsSO, ForallSO)):
        return (f.child,)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    """Preorder traversal."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def free_fo_vars(f: Formula) -> frozenset:
    if isinstance(f, (TrueF, FalseF)):
        return frozenset()
    if isinstance(f, (RelAtom, SOAtom)):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, Not):
        return free_fo_vars(f.child)
    if isinstance(f, (And, Or)):
        out = frozenset()
        for c in f.children:
            out |= free_fo_vars(c)
        return out
    if isinstance(f, (ExistsFO, ForallFO)):
        return free_fo_vars(f.child) - {f.var}
    if isinstance(f, (ExistsSO, ForallSO)):
        return free_fo_vars(f.child)
    raise TypeError(f"not a formula node: {f!r}")


def free_so_vars(f: Formula) -> frozenset:
    if isinstance(f, SOAtom):
        return frozenset((f.var,))
    if isinstance(f, (TrueF, FalseF, RelAtom, Eq)):
        return frozenset()
    if isinstance(f, Not):
        return free_so_vars(f.child)
    if isinstance(f, (And, Or)):
        out = frozenset()
        for c in f.children:
            out |= free_so_vars(c)
        return out
    if isinstance(f, (ExistsFO, ForallFO)):
        return free_so_vars(f.child)
    if isinstance(f, (ExistsSO, ForallSO)):
        return free_so_vars(f.child) - {f.var}
    raise TypeError(f"not a formula node: {f!r}")


def is_sentence(f: Formula) -> bool:
    return not free_fo_vars(f) and not free_so_vars(f)


def require_sentence(f: Formula, what: str = "input") -> None:
    fo = free_fo_vars(f)
    so = free_so_vars(f)
    if fo or so:
        loose = ", ".join(sorted(v.name for v in fo) + sorted(v.name for v in so))
        raise PreconditionError(f"{what} must be a sentence; free variables: {loose}")


def require_alpha_normalized(f: Formula, what: str = "input") -> None:
    """Every binder must bind a distinct uid."""
    seen = set()
    for node in walk(f):
        if isinstance(node, (ExistsFO, ForallFO, ExistsSO, ForallSO)):
            if node.var.uid in seen:
                raise PreconditionError(
                    f"{what} is not alpha-normalized: {node.var.name} bound twice"
                )
            seen.add(node.var.uid)


def alpha_normalize(f: Formula) -> Formula:
    """Rebuild the tree so every binder introduces a fresh variable."""

    def go(node: Formula, fo_env: Dict[Var, Var], so_env: Dict[SOVar, SOVar]) -> Formula:
        if isinstance(node, (TrueF, FalseF)):
            return node
        if isinstance(node, RelAtom):
            return RelAtom(node.symbol, tuple(fo_env.get(a, a) for a in node.args))
        if isinstance(node, SOAtom):
            return SOAtom(so_env.get(node.var, node.var),
                          tuple(fo_env.get(a, a) for a in node.args))
        if isinstance(node, Eq):
            return Eq(fo_env.get(node.left, node.left), fo_env.get(node.right, node.right))
        if isinstance(node, Not):
            return Not(go(node.child, fo_env, so_env))
        if isinstance(node, And):
            return And(tuple(go(c, fo_env, so_env) for c in node.children))
        if isinstance(node, Or):
            return Or(tuple(go(c, fo_env, so_env) for c in node.children))
        if isinstance(node, (ExistsFO, ForallFO)):
            fresh = fresh_var(node.var.name)
            inner = dict(fo_env)
            inner[node.var] = fresh
            return type(node)(fresh, go(node.child, inner, so_env))
        if isinstance(node, (ExistsSO, ForallSO)):
            fresh = fresh_so_var(node.var.name, node.var.arity)
            inner = dict(so_env)
            inner[node.var] = fresh
            return type(node)(fresh, go(node.child, fo_env, inner))
        raise TypeError(f"not a formula node: {node!r}")

    return go(f, {}, {})


def fo_binder_kinds(f: Formula) -> Dict[int, str]:
    """Map of FO variable uid -> 'exists' | 'forall' over all binders in f."""
    kinds: Dict[int, str] = {}
    for node in walk(f):
        if isinstance(node, ExistsFO):
            kinds[node.var.uid] = EXISTS
        elif isinstance(node, ForallFO):
            kinds[node.var.uid] = FORALL
    return kinds


def so_binder_kinds(f: Formula) -> Dict[int, str]:
    kinds: Dict[int, str] = {}
    for node in walk(f):
        if isinstance(node, ExistsSO):
            kinds[node.var.uid] = EXISTS
        elif isinstance(node, ForallSO):
            kinds[node.var.uid] = FORALL
    return kinds


def strip_so_prefix(f: Formula) -> Tuple[List[Tuple[str, SOVar]], Formula]:
    """Split off the maximal leading chain of SO quantifiers."""
    prefix: List[Tuple[str, SOVar]] = []
    node = f
    while isinstance(node, (ExistsSO, ForallSO)):
        prefix.append((EXISTS if isinstance(node, ExistsSO) else FORALL, node.var))
        node = node.child
    return prefix, node


def wrap_so_prefix(prefix: Sequence[Tuple[str, SOVar]], body: Formula) -> Formula:
    for kind, var in reversed(prefix):
        body = ExistsSO(var, body) if kind == EXISTS else ForallSO(var, body)
    return body


def strip_fo_prefix(f: Formula) -> Tuple[List[Tuple[str, Var]], Formula]:
    prefix: List[Tuple[str, Var]] = []
    node = f
    while isinstance(node, (ExistsFO, ForallFO)):
        prefix.append((EXISTS if isinstance(node, ExistsFO) else FORALL, node.var))
        node = node.child
    return prefix, node


def wrap_fo_prefix(prefix: Sequence[Tuple[str, Var]], body: Formula) -> Formula:
    for kind, var in reversed(prefix):
        body = ExistsFO(var, body) if kind == EXISTS else ForallFO(var, body)
    return body


def contains_so_binder(f: Formula) -> bool:
    return any(isinstance(n, (ExistsSO, ForallSO)) for n in walk(f))


def pretty(f: Formula) -> str:
    """Compact rendering with surface names, for error messages and traces."""
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, RelAtom):
        return f"{f.symbol}({','.join(a.name for a in f.args)})"
    if isinstance(f, SOAtom):
        return f"{f.var.name}({','.join(a.name for a in f.args)})"
    if isinstance(f, Eq):
        return f"{f.left.name}={f.right.name}"
    if isinstance(f, Not):
        return f"~{pretty(f.child)}"
    if isinstance(f, And):
        return "(" + " & ".join(pretty(c) for c in f.children) + ")"
    if isinstance(f, Or):
        return "(" + " | ".join(pretty(c) for c in f.children) + ")"
    if isinstance(f, ExistsFO):
        return f"E{f.var.name}.{pretty(f.child)}"
    if isinstance(f, ForallFO):
        return f"A{f.var.name}.{pretty(f.child)}"
    if isinstance(f, ExistsSO):
        return f"E2{f.var.name}.{pretty(f.child)}"
    if isinstance(f, ForallSO):
        return f"A2{f.var.name}.{pretty(f.child)}"
    raise TypeError(f"not a formula node: {f!r}")


# -- quantifier prefixes (for QCSP reductions) -------------------------------


def make_prefix(kinds: Iterable[str]) -> Tuple[str, ...]:
    """Validate a quantifier prefix; entries are 'exists' / 'forall'."""
    out = tuple(kinds)
    if not out:
        raise PreconditionError("a quantifier prefix must have length >= 1")
    for k in out:
        if k not in (EXISTS, FORALL):
            raise PreconditionError(f"bad quantifier label {k!r}")
    return out


def prefix_from_letters(letters: str) -> Tuple[str, ...]:
    """Build a prefix from a compact string such as 'ae' or 'AE'."""
    table = {"a": FORALL, "e": EXISTS}
    try:
        return make_prefix(table[c] for c in letters.lower())
    except KeyError as exc:
        raise PreconditionError(f"bad prefix letter {exc.args[0]!r}; use 'a'/'e'") from None


# -- assignments --------------------------------------------------------------


@dataclass(frozen=True)
class Assignment:
    """Partial values for FO variables (elements) and SO variables (tuple sets)."""

    fo: Dict[Var, int] = field(default_factory=dict)
    so: Dict[SOVar, frozenset] = field(default_factory=dict)

    def validate_for(self, structure) -> None:
        for var, value in self.fo.items():
            if not (0 <= value < structure.size):
                raise DomainError(
                    f"{var.name} := {value} outside domain 0..{structure.size - 1}"
                )
        for sov, tuples in self.so.items():
            for t in tuples:
                if len(t) != sov.arity or any(not (0 <= e < structure.size) for e in t):
                    raise PreconditionError(
                        f"SO value tuple {t} invalid for {sov.name} "
                        f"(arity {sov.arity}, domain size {structure.size})"
                    )
