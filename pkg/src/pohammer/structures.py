"""Relational signatures and finite structures over integer domains.

Domain elements are the contiguous integers 0..size-1.  All values are
immutable after construction and safe to share between threads; every
operation returns a new structure.
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, Tuple

from .errors import DomainError, SignatureError

# Reserved binary symbol interpreted as disequality by expand_with_neq.
NEQ_SYMBOL = "N"


class Signature:
    """An ordered list of relation symbols with positive arities."""

    __slots__ = ("symbols", "_arities")

    def __init__(self, symbols: Iterable[Tuple[str, int]]):
        symbols = tuple((str(name), int(arity)) for name, arity in symbols)
        arities: Dict[str, int] = {}
        for name, arity in symbols:
            if not name:
                raise SignatureError("relation symbol names must be nonempty")
            if name in arities:
                raise SignatureError(f"duplicate relation symbol {name!r}")
            if arity < 1:
                raise SignatureError(f"symbol {name!r} has arity {arity}; must be >= 1")
            arities[name] = arity
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_arities", arities)

    def __setattr__(self, name, value):
        raise AttributeError("Signature is immutable")

    def has(self, name: str) -> bool:
        return name in self._arities

    def arity(self, name: str) -> int:
        try:
            return self._arities[name]
        except KeyError:
            raise SignatureError(f"unknown relation symbol {name!r}") from None

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def __eq__(self, other):
        return isinstance(other, Signature) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        inner = " ".join(f"{n}/{a}" for n, a in self.symbols)
        return f"Signature({inner})"


class FiniteStructure:
    """A finite relational structure with domain {0, ..., size-1}."""

    __slots__ = ("signature", "size", "_relations", "_key")

    def __init__(
        self,
        signature: Signature,
        size: int,
        relations: Mapping[str, Iterable[Tuple[int, ...]]] | None = None,
    ):
        if size < 0:
            raise DomainError(f"structure size must be nonnegative, got {size}")
        relations = dict(relations or {})
        for name in relations:
            if not signature.has(name):
                raise SignatureError(f"relation entry for unknown symbol {name!r}")
        normalized: Dict[str, frozenset] = {}
        for name, arity in signature.symbols:
            tuples = frozenset(tuple(t) for t in relations.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise SignatureError(
                        f"tuple {t} for {name!r} has length {len(t)}, expected {arity}"
                    )
                for e in t:
                    if not (0 <= e < size):
                        raise DomainError(
                            f"element {e} in {name!r}-tuple {t} outside domain 0..{size - 1}"
                        )
            normalized[name] = tuples
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "_relations", normalized)
        object.__setattr__(
            self,
            "_key",
            (signature, size, tuple(normalized[n] for n in signature.names)),
        )

    def __setattr__(self, name, value):
        raise AttributeError("FiniteStructure is immutable")

    @property
    def domain(self) -> range:
        return range(self.size)

    def relation(self, name: str) -> frozenset:
        try:
            return self._relations[name]
        except KeyError:
            raise SignatureError(f"unknown relation symbol {name!r}") from None

    def relations(self) -> Dict[str, frozenset]:
        return dict(self._relations)

    def __eq__(self, other):
        return isinstance(other, FiniteStructure) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        rels = ", ".join(
            f"{n}={sorted(self._relations[n])}" for n in self.signature.names
        )
        return f"FiniteStructure(size={self.size}, {rels})"


def substructure(
    a: FiniteStructure, elements: Iterable[int]
) -> Tuple[FiniteStructure, Dict[int, int]]:
    """Induced substructure on a subset of the domain.

    The new domain is re-indexed to 0..|S|-1 preserving element order.
    Returns the substructure together with the old-index -> new-index map.
    """
    subset = sorted(set(elements))
    for e in subset:
        if not (0 <= e < a.size):
            raise DomainError(f"element {e} outside domain 0..{a.size - 1}")
    index = {old: new for new, old in enumerate(subset)}
    keep = set(subset)
    rels = {
        name: {
            tuple(index[e] for e in t)
            for t in a.relation(name)
            if all(e in keep for e in t)
        }
        for name in a.signature.names
    }
    return FiniteStructure(a.signature, len(subset), rels), index


def disjoint_union(a: FiniteStructure, b: FiniteStructure) -> FiniteStructure:
    """Disjoint union; a's elements keep their indices, b's shift by |a|."""
    if a.signature != b.signature:
        raise SignatureError("disjoint_union requires structures over the same signature")
    shift = a.size
    rels = {
        name: set(a.relation(name))
        | {tuple(e + shift for e in t) for t in b.relation(name)}
        for name in a.signature.names
    }
    return FiniteStructure(a.signature, a.size + b.size, rels)


def expand(
    a: FiniteStructure, symbol: str, arity: int, relation: Iterable[Tuple[int, ...]]
) -> FiniteStructure:
    """Expansion by one new relation symbol; old relations are unchanged."""
    if a.signature.has(symbol):
        raise SignatureError(f"symbol {symbol!r} already in signature")
    sig = Signature(a.signature.symbols + ((symbol, arity),))
    rels = a.relations()
    rels[symbol] = set(tuple(t) for t in relation)
    return FiniteStructure(sig, a.size, rels)


def reduct(a: FiniteStructure, names: Iterable[str]) -> FiniteStructure:
    """Reduct keeping only the listed symbols (in their original order)."""
    keep = set(names)
    for name in keep:
        if not a.signature.has(name):
            raise SignatureError(f"unknown relation symbol {name!r}")
    sig = Signature(tuple((n, k) for n, k in a.signature.symbols if n in keep))
    rels = {n: a.relation(n) for n in sig.names}
    return FiniteStructure(sig, a.size, rels)


def expand_with_neq(a: FiniteStructure) -> FiniteStructure:
    """Expansion by the reserved binary symbol N interpreted as disequality."""
    neq = {
        (x, y) for x in range(a.size) for y in range(a.size) if x != y
    }
    return expand(a, NEQ_SYMBOL, 2, neq)
