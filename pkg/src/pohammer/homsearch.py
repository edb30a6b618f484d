"""Homomorphism enumeration, small-structure families, and closure checking.

Homomorphisms are found by backtracking over domain elements in order, trying
images in ascending order, so the enumeration is lexicographic in the image
tuple.  Closure checking iterates ordered pairs from a family and reports the
first violation of the closure implication as a re-verifiable witness.
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import formulas as F
from .errors import (
    BudgetExceededError,
    EnumerationLimitError,
    PreconditionError,
    SignatureError,
)
from .modelcheck import DEFAULT_BUDGET, mc_so
from .structures import FiniteStructure, Signature, disjoint_union
from .textio import serialize_structure

HOM_KINDS = ("any", "injective", "surjective", "bijective")

CLOSURE_KINDS = (
    "substructures",
    "superstructures",
    "homomorphisms",
    "inverse_homomorphisms",
    "injective_homs",
    "inverse_injective_homs",
    "surjective_homs",
    "inverse_surjective_homs",
    "bijective_homs",
    "disjoint_unions",
)

DEFAULT_ENUMERATION_CEILING = 2_000_000


# ---------------------------------------------------------------------------
# homomorphism search
# ---------------------------------------------------------------------------


def verify_homomorphism(
    a: FiniteStructure,
    b: FiniteStructure,
    mapping: Dict[int, int],
    kind: str = "any",
    strong: bool = False,
) -> bool:
    """Independent per-tuple check that `mapping` is a homomorphism of `kind`.

    With `strong`, membership must be preserved in both directions (an
    embedding when combined with injectivity).
    """
    if a.signature != b.signature:
        return False
    if sorted(mapping) != list(range(a.size)):
        return False
    if any(not (0 <= v < b.size) for v in mapping.values()):
        return False
    images = set(mapping.values())
    if kind in ("injective", "bijective") and len(images) != a.size:
        return False
    if kind in ("surjective", "bijective") and images != set(range(b.size)):
        return False
    for name, arity in a.signature.symbols:
        rb = b.relation(name)
        for t in a.relation(name):
            if tuple(mapping[e] for e in t) not in rb:
                return False
        if strong:
            for t in itertools.product(range(a.size), repeat=arity):
                if (tuple(mapping[e] for e in t) in rb) != (t in a.relation(name)):
                    return False
    return True


def find_homomorphisms(
    a: FiniteStructure,
    b: FiniteStructure,
    kind: str = "any",
    limit: Optional[int] = None,
    strong: bool = False,
) -> List[Dict[int, int]]:
    """Backtracking enumeration of homomorphisms a -> b of the given kind.

    Returns at most `limit` mappings, in lexicographic order of their image
    tuples.  `strong=True` asks for embeddings (two-way tuple preservation).
    """
    if kind not in HOM_KINDS:
        raise PreconditionError(f"unknown homomorphism kind {kind!r}")
    if a.signature != b.signature:
        raise SignatureError("homomorphism search requires a common signature")
    if kind == "bijective" and a.size != b.size:
        return []

    # tuples of each relation indexed by their highest-numbered element
    pending: List[List[Tuple[frozenset, Tuple[int, ...]]]] = [[] for _ in range(a.size)]
    for name in a.signature.names:
        rb = b.relation(name)
        for t in a.relation(name):
            if t:
                pending[max(t)].append((rb, t))

    out: List[Dict[int, int]] = []
    image: List[int] = []
    used = [0] * (b.size + 1)

    def complete(mapping: Dict[int, int]) -> bool:
        if kind in ("surjective", "bijective") and len(set(mapping.values())) != b.size:
            return False
        if strong:
            for name, arity in a.signature.symbols:
                ra, rb = a.relation(name), b.relation(name)
                for t in itertools.product(range(a.size), repeat=arity):
                    if (tuple(mapping[e] for e in t) in rb) != (t in ra):
                        return False
        return True

    def extend(i: int) -> bool:
        if i == a.size:
            mapping = dict(enumerate(image))
            if complete(mapping):
                out.append(mapping)
                if limit is not None and len(out) >= limit:
                    return True
            return False
        injective = kind in ("injective", "bijective")
        for v in range(b.size):
            if injective and used[v]:
                continue
            image.append(v)
            used[v] += 1
            ok = all(
                tuple(image[e] for e in t) in rb for rb, t in pending[i]
            )
            if ok and kind in ("surjective", "bijective"):
                missing = b.size - len([u for u in range(b.size) if used[u]])
                if missing > a.size - (i + 1):
                    ok = False
            if ok and extend(i + 1):
                return True
            image.pop()
            used[v] -= 1
        return False

    if a.size == 0:
        mapping: Dict[int, int] = {}
        if complete(mapping) and not any(a.relation(n) for n in a.signature.names):
            out.append(mapping)
        return out
    extend(0)
    return out


def is_isomorphic(a: FiniteStructure, b: FiniteStructure) -> bool:
    if a.size != b.size or a.signature != b.signature:
        return False
    return bool(find_homomorphisms(a, b, "bijective", limit=1, strong=True))


def canonical_key(a: FiniteStructure) -> str:
    """Minimum serialized form over all domain permutations (use at size <= 4)."""
    best = None
    for perm in itertools.permutations(range(a.size)):
        rels = {
            name: {tuple(perm[e] for e in t) for t in a.relation(name)}
            for name in a.signature.names
        }
        text = serialize_structure(FiniteStructure(a.signature, a.size, rels))
        if best is None or text < best:
            best = text
    return best if best is not None else serialize_structure(a)


# ---------------------------------------------------------------------------
# family enumeration
# ---------------------------------------------------------------------------


def count_structures(sig: Signature, max_size: int) -> int:
    total = 0
    for n in range(max_size + 1):
        per = 1
        for _, arity in sig.symbols:
            per *= 2 ** (n ** arity)
        total += per
    return total


def enumerate_structures(
    sig: Signature,
    max_size: int,
    mode: str = "exhaustive",
    seed: Optional[int] = None,
    count: Optional[int] = None,
    ceiling: int = DEFAULT_ENUMERATION_CEILING,
    iso_dedupe: bool = False,
) -> Iterator[FiniteStructure]:
    """Stream structures over `sig` with domain sizes 0..max_size.

    Exhaustive mode yields every structure exactly once (sizes ascending,
    relations in bitmask order over the lexicographic tuple list); it refuses
    to start past `ceiling` structures.  Random mode draws `count` structures
    with the domain size uniform and each tuple included independently with
    probability 1/2, reproducibly from `seed`.  `iso_dedupe` filters to one
    representative per isomorphism class via canonical_key.
    """
    if mode == "exhaustive":
        total = count_structures(sig, max_size)
        if total > ceiling:
            raise EnumerationLimitError(total, ceiling)
        gen: Iterator[FiniteStructure] = _exhaustive(sig, max_size)
    elif mode == "random":
        if seed is None or count is None:
            raise PreconditionError("random mode requires an explicit seed and count")
        gen = _random(sig, max_size, seed, count)
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    if not iso_dedupe:
        yield from gen
        return
    seen = set()
    for a in gen:
        key = canonical_key(a)
        if key not in seen:
            seen.add(key)
            yield a


def _exhaustive(sig: Signature, max_size: int) -> Iterator[FiniteStructure]:
    for n in range(max_size + 1):
        universes = [
            list(itertools.product(range(n), repeat=arity)) for _, arity in sig.symbols
        ]
        masks = [range(2 ** len(u)) for u in universes]
        for combo in itertools.product(*masks):
            rels = {
                name: {u[j] for j in range(len(u)) if mask >> j & 1}
                for (name, _), u, mask in zip(sig.symbols, universes, combo)
            }
            yield FiniteStructure(sig, n, rels)


def _random(sig: Signature, max_size: int, seed: int, count: int) -> Iterator[FiniteStructure]:
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(0, max_size)
        rels = {}
        for name, arity in sig.symbols:
            rels[name] = {
                t
                for t in itertools.product(range(n), repeat=arity)
                if rng.random() < 0.5
            }
        yield FiniteStructure(sig, n, rels)


# ---------------------------------------------------------------------------
# closure checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosureReport:
    verdict: str  # "no_counterexample_up_to_bound" | "counterexample"
    witness: Optional[Tuple[FiniteStructure, FiniteStructure, Optional[Dict[int, int]]]]
    structures_examined: int
    pairs_examined: int = 0
    indeterminate: Tuple[str, ...] = ()

    @property
    def found(self) -> bool:
        return self.verdict == "counterexample"

    def to_json_dict(self) -> dict:
        a, b, mapping = self.witness if self.witness else (None, None, None)
        return {
            "verdict": self.verdict,
            "witness": None
            if self.witness is None
            else {
                "a": serialize_structure(a),
                "b": serialize_structure(b),
                "mapping": None if mapping is None else {str(k): v for k, v in mapping.items()},
            },
            "structures_examined": self.structures_examined,
            "pairs_examined": self.pairs_examined,
            "indeterminate": list(self.indeterminate),
        }


_KIND_TABLE = {
    # closure kind -> (hom kind, strong, hom direction, implication direction)
    # hom direction "ab": search maps A -> B; implication "forward": mc(A) -> mc(B)
    "homomorphisms": ("any", False, "ab", "forward"),
    "inverse_homomorphisms": ("any", False, "ab", "backward"),
    "injective_homs": ("injective", False, "ab", "forward"),
    "inverse_injective_homs": ("injective", False, "ab", "backward"),
    "surjective_homs": ("surjective", False, "ab", "forward"),
    "inverse_surjective_homs": ("surjective", False, "ab", "backward"),
    "bijective_homs": ("bijective", False, "ab", "forward"),
    # B embeds into A; closure under substructures: mc(A) -> mc(B)
    "substructures": ("injective", True, "ba", "forward"),
    # A embeds into B; closure under superstructures: mc(A) -> mc(B)
    "superstructures": ("injective", True, "ab", "forward"),
}


def check_closure(
    f: F.Formula,
    kind: str,
    sig: Optional[Signature] = None,
    max_size: Optional[int] = None,
    structures: Optional[Sequence[FiniteStructure]] = None,
    mode: str = "exhaustive",
    seed: Optional[int] = None,
    count: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
    ceiling: int = DEFAULT_ENUMERATION_CEILING,
) -> ClosureReport:
    """Search a family of structures for a violation of a closure property.

    The family is either an explicit `structures` sequence or is enumerated
    from (`sig`, `max_size`, `mode`, ...).  Ordered pairs are scanned in
    enumeration order and the first violation is reported with its witness
    homomorphism (None for disjoint unions).  Budget exhaustion on a
    model-checking call is recorded as an indeterminate entry, never as a
    silent pass.
    """
    if kind not in CLOSURE_KINDS:
        raise PreconditionError(f"unknown closure kind {kind!r}")
    if structures is None:
        if sig is None or max_size is None:
            raise PreconditionError("check_closure needs a structure family")
        family = list(
            enumerate_structures(sig, max_size, mode=mode, seed=seed, count=count,
                                 ceiling=ceiling)
        )
    else:
        family = list(structures)

    mc_cache: Dict[FiniteStructure, Optional[bool]] = {}
    indeterminate: List[str] = []

    def value(a: FiniteStructure, label: str) -> Optional[bool]:
        if a in mc_cache:
            return mc_cache[a]
        try:
            result: Optional[bool] = mc_so(a, f, budget=budget)
        except BudgetExceededError:
            result = None
            indeterminate.append(label)
        mc_cache[a] = result
        return result

    n = len(family)
    pair_indices = [(i, j) for i in range(n) for j in range(n)]

    def check_pair(i: int, j: int):
        a, b = family[i], family[j]
        if kind == "disjoint_unions":
            va, vb = value(a, f"A#{i}"), value(b, f"B#{j}")
            if va is True and vb is True:
                u = disjoint_union(a, b)
                try:
                    vu = mc_so(u, f, budget=budget)
                except BudgetExceededError:
                    indeterminate.append(f"union#{i},{j}")
                    return None
                if vu is False:
                    return (a, b, None)
            return None
        hom_kind, strong, direction, implication = _KIND_TABLE[kind]
        if implication == "forward":
            needed = value(a, f"A#{i}") is True and value(b, f"B#{j}") is False
        else:
            needed = value(b, f"B#{j}") is True and value(a, f"A#{i}") is False
        if not needed:
            return None
        src, dst = (a, b) if direction == "ab" else (b, a)
        found = find_homomorphisms(src, dst, hom_kind, limit=1, strong=strong)
        if found:
            return (a, b, found[0])
        return None

    witness = None
    if jobs > 1:
        chunk = max(1, len(pair_indices) // jobs)
        ranges = [
            pair_indices[k : k + chunk] for k in range(0, len(pair_indices), chunk)
        ]

        def scan(chunk_pairs):
            for i, j in chunk_pairs:
                w = check_pair(i, j)
                if w is not None:
                    return (i * n + j, w)
            return None

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            hits = [h for h in pool.map(scan, ranges) if h is not None]
        if hits:
            witness = min(hits)[1]
    else:
        for i, j in pair_indices:
            w = check_pair(i, j)
            if w is not None:
                witness = w
                break

    return ClosureReport(
        verdict="counterexample" if witness is not None else "no_counterexample_up_to_bound",
        witness=witness,
        structures_examined=n,
        pairs_examined=len(pair_indices),
        indeterminate=tuple(indeterminate),
    )
