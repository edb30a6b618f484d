"""Brute-force semantic oracles: SO model checking, QCSP, and quantified 3-CNF.

Evaluation follows the two-player game reading of quantifiers: the
existential player picks witnesses, the universal player picks challenges,
with short-circuiting.  Results never depend on iteration order; a node
budget makes blow-ups fail loudly instead of hanging.
"""

from __future__ import annotations

import itertools
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from . import formulas as F
from .errors import BudgetExceededError, PreconditionError, SignatureError
from .structures import FiniteStructure, Signature

DEFAULT_BUDGET = 100_000_000


# ---------------------------------------------------------------------------
# instance types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QcspInstance:
    """Prefix blocks of variables plus constraint atoms over a template signature."""

    blocks: Tuple[Tuple[str, Tuple[str, ...]], ...]
    atoms: Tuple[Tuple[str, Tuple[str, ...]], ...]

    def __post_init__(self):
        seen = set()
        for kind, names in self.blocks:
            if kind not in (F.EXISTS, "exists", F.FORALL, "forall"):
                raise PreconditionError(f"bad block quantifier {kind!r}")
            for n in names:
                if n in seen:
                    raise PreconditionError(f"variable {n!r} in two prefix blocks")
                seen.add(n)
        for symbol, args in self.atoms:
            for a in args:
                if a not in seen:
                    raise PreconditionError(f"atom uses unquantified variable {a!r}")

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(n for _, names in self.blocks for n in names)

    @property
    def prefix(self) -> Tuple[str, ...]:
        return tuple(kind for kind, _ in self.blocks)

    def validate_against(self, sig: Signature) -> None:
        for symbol, args in self.atoms:
            if not sig.has(symbol):
                raise SignatureError(f"atom symbol {symbol!r} not in template signature")
            if sig.arity(symbol) != len(args):
                raise SignatureError(
                    f"atom {symbol!r} has {len(args)} arguments, "
                    f"template arity is {sig.arity(symbol)}"
                )


@dataclass(frozen=True)
class Qbf3Instance:
    """Alternating quantifier blocks over DIMACS variables plus width-<=3 clauses."""

    blocks: Tuple[Tuple[str, Tuple[int, ...]], ...]
    clauses: Tuple[Tuple[int, ...], ...]
    num_vars: int

    def __post_init__(self):
        seen = set()
        for kind, variables in self.blocks:
            if kind not in ("a", "e"):
                raise PreconditionError(f"bad quantifier letter {kind!r}")
            for v in variables:
                if v in seen:
                    raise PreconditionError(f"variable {v} quantified twice")
                seen.add(v)
        for i in range(1, len(self.blocks)):
            if self.blocks[i][0] == self.blocks[i - 1][0]:
                raise PreconditionError("adjacent quantifier blocks must alternate")
        for clause in self.clauses:
            if len(clause) > 3:
                raise PreconditionError(f"clause width {len(clause)} exceeds 3")
            for lit in clause:
                if lit == 0 or abs(lit) not in seen:
                    raise PreconditionError(f"bad literal {lit}")

    @property
    def shape(self) -> str:
        return "".join(kind for kind, _ in self.blocks)


def qcsp_canonical_structure(inst: QcspInstance, sig: Signature) -> FiniteStructure:
    """The instance viewed as a structure: variables as elements, atoms as tuples."""
    inst.validate_against(sig)
    index = {name: i for i, name in enumerate(inst.variables)}
    rels: Dict[str, set] = {name: set() for name in sig.names}
    for symbol, args in inst.atoms:
        rels[symbol].add(tuple(index[a] for a in args))
    return FiniteStructure(sig, len(index), rels)


# ---------------------------------------------------------------------------
# SO model checking
# ---------------------------------------------------------------------------


def so_value_universe(size: int, arity: int) -> List[Tuple[int, ...]]:
    return list(itertools.product(range(size), repeat=arity))


# materialized subset lists for small value spaces (universe of <= 12 tuples)
_SUBSETS_CACHE: Dict[Tuple[int, int], List[frozenset]] = {}


def iter_so_values(size: int, arity: int):
    """All subsets of size^arity tuples: empty first, full last, otherwise by
    increasing cardinality then lexicographically."""
    universe = so_value_universe(size, arity)
    if len(universe) <= 12:
        key = (size, arity)
        cached = _SUBSETS_CACHE.get(key)
        if cached is None:
            cached = [
                frozenset(combo)
                for r in range(len(universe) + 1)
                for combo in itertools.combinations(universe, r)
            ]
            _SUBSETS_CACHE[key] = cached
        return cached
    return _iter_so_values_lazy(universe)


def _iter_so_values_lazy(universe) -> Iterator[frozenset]:
    for r in range(len(universe) + 1):
        for combo in itertools.combinations(universe, r):
            yield frozenset(combo)


def _check_budget(limit: int) -> None:
    if limit <= 0:
        raise PreconditionError(f"budget must be positive, got {limit}")


# caches shared across evaluations; formulas are immutable so per-node data
# never goes stale.  Cleared wholesale when they grow past a bound.
_INFO_CACHE: Dict[int, Tuple[frozenset, tuple]] = {}
_VALIDATED: Dict[Tuple[int, Signature, int], bool] = {}
_CACHE_KEEPALIVE: list = []
_CACHE_BOUND = 1_000_000


def _cache_guard() -> None:
    if len(_INFO_CACHE) > _CACHE_BOUND or len(_VALIDATED) > _CACHE_BOUND:
        _INFO_CACHE.clear()
        _VALIDATED.clear()
        _CACHE_KEEPALIVE.clear()


def _node_info(node: F.Formula) -> Tuple[frozenset, tuple]:
    key = id(node)
    cached = _INFO_CACHE.get(key)
    if cached is not None:
        return cached
    fo = frozenset(v.uid for v in F.free_fo_vars(node))
    so = tuple(sorted(v.uid for v in F.free_so_vars(node)))
    _INFO_CACHE[key] = (fo, so)
    _CACHE_KEEPALIVE.append(node)
    return fo, so


def validate_sentence_over(a: FiniteStructure, f: F.Formula) -> None:
    key = (id(f), a.signature, a.size >= 4)
    if _VALIDATED.get(key):
        return
    F.require_sentence(f, "model-checking input")
    for node in F.walk(f):
        if isinstance(node, F.RelAtom):
            if not a.signature.has(node.symbol):
                raise SignatureError(
                    f"atom symbol {node.symbol!r} not in the structure's signature"
                )
            if a.signature.arity(node.symbol) != len(node.args):
                raise SignatureError(
                    f"atom {node.symbol!r} has {len(node.args)} arguments, "
                    f"signature arity is {a.signature.arity(node.symbol)}"
                )
        elif isinstance(node, (F.ExistsSO, F.ForallSO)):
            if node.var.arity >= 2 and a.size >= 4:
                warnings.warn(
                    f"SO variable {node.var.name} of arity {node.var.arity} on a "
                    f"{a.size}-element structure: subset space is huge",
                    stacklevel=3,
                )
    _cache_guard()
    _VALIDATED[key] = True
    _CACHE_KEEPALIVE.append(f)


class _Evaluator:
    """Game-tree evaluation via one-time compilation of the formula tree into
    nested closures, with memoization on SO-closed subformulas.

    Every node visit costs one budget unit; memo hits cost none.  The node
    counter is shared across calls on the same evaluator.
    """

    def __init__(self, a: FiniteStructure, limit: int):
        _check_budget(limit)
        self.size = a.size
        self.rels = {name: a.relation(name) for name in a.signature.names}
        self.limit = limit
        self.cell = [0]  # nodes expanded
        self.memo: Dict = {}
        self._compiled: Dict[int, object] = {}
        self._keep: List[F.Formula] = []
        self._slots = itertools.count()

    @property
    def nodes(self) -> int:
        return self.cell[0]

    def eval(self, node: F.Formula, fo_env: Dict[int, int],
             so_env: Dict[int, frozenset]) -> bool:
        fn = self._compiled.get(id(node))
        if fn is None:
            fn = self._compile(node)
        return fn(fo_env, so_env)

    def _compile(self, node: F.Formula):
        cached = self._compiled.get(id(node))
        if cached is not None:
            return cached
        fn = self._build(node)
        self._compiled[id(node)] = fn
        self._keep.append(node)
        return fn

    def _build(self, node: F.Formula):
        cell = self.cell
        limit = self.limit
        t = node.__class__

        if t is F.TrueF:
            def run(fo, so):
                cell[0] += 1
                if cell[0] > limit:
                    raise BudgetExceededError(cell[0], limit)
                return True
            return run
        if t is F.FalseF:
            def run(fo, so):
                cell[0] += 1
                if cell[0] > limit:
                    raise BudgetExceededError(cell[0], limit)
                return False
            return run
        if t is F.RelAtom:
            rel = self.rels[node.symbol]
            uids = tuple(v.uid for v in node.args)
            if len(uids) == 1:
                (u,) = uids

                def run(fo, so):
                    cell[0] += 1
                    if cell[0] > limit:
                        raise BudgetExceededError(cell[0], limit)
                    return (fo[u],) in rel
            elif len(uids) == 2:
                u0, u1 = uids

                def run(fo, so):
                    cell[0] += 1
                    if cell[0] > limit:
                        raise BudgetExceededError(cell[0], limit)
                    return (fo[u0], fo[u1]) in rel
            else:
                def run(fo, so):
                    cell[0] += 1
                    if cell[0] > limit:
                        raise BudgetExceededError(cell[0], limit)
                    return tuple(fo[u] for u in uids) in rel
            return run
        if t is F.SOAtom:
            uvar = node.var.uid
            uids = tuple(v.uid for v in node.args)
            if len(uids) == 1:
                (u,) = uids

                def run(fo, so):
                    cell[0] += 1
                    if cell[0] > limit:
                        raise BudgetExceededError(cell[0], limit)
                    return (fo[u],) in so[uvar]
            else:
                def run(fo, so):
                    cell[0] += 1
                    if cell[0] > limit:
                        raise BudgetExceededError(cell[0], limit)
                    return tuple(fo[u] for u in uids) in so[uvar]
            return run
        if t is F.Eq:
            lu, ru = node.left.uid, node.right.uid

            def run(fo, so):
                cell[0] += 1
                if cell[0] > limit:
                    raise BudgetExceededError(cell[0], limit)
                return fo[lu] == fo[ru]
            return run

        body = self._build_compound(node, t, cell, limit)

        fo_free, so_free = _node_info(node)
        if fo_free:
            return body
        memo = self.memo
        slot = next(self._slots)
        if not so_free:
            def run(fo, so):
                hit = memo.get(slot)
                if hit is None:
                    hit = body(fo, so)
                    memo[slot] = hit
                return hit
            return run
        if len(so_free) == 1:
            (u,) = so_free

            def run(fo, so):
                key = (slot, so[u])
                hit = memo.get(key)
                if hit is None:
                    hit = body(fo, so)
                    memo[key] = hit
                return hit
            return run

        def run(fo, so):
            key = (slot, tuple(so[u] for u in so_free))
            hit = memo.get(key)
            if hit is None:
                hit = body(fo, so)
                memo[key] = hit
            return hit
        return run

    def _build_compound(self, node, t, cell, limit):
        if t is F.Not:
            child = self._compile(node.child)

            def body(fo, so):
                cell[0] += 1
                if cell[0] > limit:
                    raise BudgetExceededError(cell[0], limit)
                return not child(fo, so)
            return body
        if t is F.And:
            kids = tuple(self._compile(c) for c in node.children)

            def body(fo, so):
                cell[0] += 1
                if cell[0] > limit:
                    raise BudgetExceededError(cell[0], limit)
                for k in kids:
                    if not k(fo, so):
                        return False
                return True
            return body
        if t is F.Or:
            kids = tuple(self._compile(c) for c in node.children)

            def body(fo, so):
                cell[0] += 1
                if cell[0] > limit:
                    raise BudgetExceededError(cell[0], limit)
                for k in kids:
                    if k(fo, so):
                        return True
                return False
            return body
        if t in (F.ExistsFO, F.ForallFO):
            child = self._compile(node.child)
            uid = node.var.uid
            size = self.size
            existential = t is F.ExistsFO

            def body(fo, so):
                cell[0] += 1
                if cell[0] > limit:
                    raise BudgetExceededError(cell[0], limit)
                for value in range(size):
                    fo[uid] = value
                    if child(fo, so) == existential:
                        del fo[uid]
                        return existential
                fo.pop(uid, None)
                return not existential
            return body
        if t in (F.ExistsSO, F.ForallSO):
            child = self._compile(node.child)
            uid = node.var.uid
            arity = node.var.arity
            size = self.size
            existential = t is F.ExistsSO
            values = iter_so_values(size, arity)
            small = values if isinstance(values, list) else None
            universe = None if small is not None else so_value_universe(size, arity)

            def body(fo, so):
                cell[0] += 1
                if cell[0] > limit:
                    raise BudgetExceededError(cell[0], limit)
                candidates = small if small is not None else _iter_so_values_lazy(universe)
                for value in candidates:
                    so[uid] = value
                    if child(fo, so) == existential:
                        del so[uid]
                        return existential
                so.pop(uid, None)
                return not existential
            return body
        raise TypeError(f"not a formula node: {node!r}")


def mc_so(a: FiniteStructure, f: F.Formula, budget: int = DEFAULT_BUDGET,
          jobs: int = 1) -> bool:
    """Decide whether the structure satisfies the sentence.

    Raises BudgetExceededError (never a wrong answer) past `budget` game-tree
    nodes.  With jobs > 1 the outermost quantifier's candidates are split
    across threads (each branch gets its own budget); the boolean result is
    identical to the sequential run.
    """
    validate_sentence_over(a, f)
    if jobs > 1 and isinstance(f, F.FO_QUANTIFIERS + F.SO_QUANTIFIERS):
        return _mc_parallel(a, f, budget, jobs)
    return _Evaluator(a, budget).eval(f, {}, {})


def _mc_parallel(a: FiniteStructure, f: F.Formula, budget: int, jobs: int) -> bool:
    _check_budget(budget)
    if isinstance(f, F.FO_QUANTIFIERS):
        candidates: Iterable = range(a.size)
        is_fo = True
    else:
        candidates = iter_so_values(a.size, f.var.arity)
        is_fo = False
    existential = isinstance(f, (F.ExistsFO, F.ExistsSO))
    uid = f.var.uid
    child = f.child

    def branch(value) -> bool:
        ev = _Evaluator(a, budget)
        env = {uid: value}
        return ev.eval(child, env if is_fo else {}, {} if is_fo else env)

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(branch, candidates))
    return any(results) if existential else all(results)


def mc_so_witness(a: FiniteStructure, f: F.Formula,
                  budget: int = DEFAULT_BUDGET) -> Optional[F.Assignment]:
    """Witness values for the leading maximal block of existential SO variables.

    Returns an Assignment extendable to a win when the sentence holds, else
    None.  The witness is the first one in the evaluator's iteration order.
    """
    validate_sentence_over(a, f)
    block: List[F.SOVar] = []
    node = f
    while isinstance(node, F.ExistsSO):
        block.append(node.var)
        node = node.child
    if not block:
        raise PreconditionError("mc_so_witness requires a leading existential SO quantifier")
    ev = _Evaluator(a, budget)

    def search(i: int, so_env: Dict[int, frozenset]) -> Optional[Dict[int, frozenset]]:
        if i == len(block):
            return dict(so_env) if ev.eval(node, {}, so_env) else None
        for value in iter_so_values(a.size, block[i].arity):
            so_env[block[i].uid] = value
            found = search(i + 1, so_env)
            if found is not None:
                return found
        so_env.pop(block[i].uid, None)
        return None

    found = search(0, {})
    if found is None:
        return None
    return F.Assignment(fo={}, so={v: found[v.uid] for v in block})


# ---------------------------------------------------------------------------
# QCSP and quantified 3-CNF solving
# ---------------------------------------------------------------------------


def solve_qcsp(b: FiniteStructure, inst: QcspInstance) -> bool:
    """Game-tree evaluation of a QCSP instance on a finite template."""
    inst.validate_against(b.signature)
    order: List[Tuple[str, str]] = [
        (name, kind) for kind, names in inst.blocks for name in names
    ]
    position = {name: i for i, (name, _) in enumerate(order)}
    # atoms checked as soon as their last variable is assigned
    ready: List[List[Tuple[frozenset, Tuple[str, ...]]]] = [[] for _ in order]
    for symbol, args in inst.atoms:
        ready[max(position[x] for x in args)].append((b.relation(symbol), args))
    values: Dict[str, int] = {}

    def play(i: int) -> bool:
        if i == len(order):
            return True
        name, kind = order[i]
        existential = kind in (F.EXISTS, "exists")
        for value in range(b.size):
            values[name] = value
            ok = all(
                tuple(values[x] for x in args) in rel for rel, args in ready[i]
            ) and play(i + 1)
            if ok == existential:
                values.pop(name, None)
                return existential
        values.pop(name, None)
        return not existential

    return play(0)


def solve_qbf3(inst: Qbf3Instance) -> bool:
    """Exhaustive alternating search over boolean assignments."""
    order: List[Tuple[int, str]] = [
        (v, kind) for kind, variables in inst.blocks for v in variables
    ]
    position = {v: i for i, (v, _) in enumerate(order)}
    ready: List[List[Tuple[int, ...]]] = [[] for _ in order]
    for clause in inst.clauses:
        if not clause:
            return False
        ready[max(position[abs(l)] for l in clause)].append(clause)
    values: Dict[int, bool] = {}

    def satisfied(clause: Tuple[int, ...]) -> bool:
        return any(values[abs(l)] == (l > 0) for l in clause)

    def play(i: int) -> bool:
        if i == len(order):
            return True
        v, kind = order[i]
        existential = kind == "e"
        for value in (False, True):
            values[v] = value
            ok = all(satisfied(c) for c in ready[i]) and play(i + 1)
            if ok == existential:
                values.pop(v, None)
                return existential
        values.pop(v, None)
        return not existential

    return play(0)
