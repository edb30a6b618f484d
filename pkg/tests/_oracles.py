"""Independent brute-force oracles the library is tested against."""

import itertools

from pohammer.modelcheck import mc_so
from pohammer.structures import FiniteStructure, substructure


def has_directed_cycle(a: FiniteStructure, edge_symbol: str = "E") -> bool:
    """Three-colour depth-first search; self-loops count as cycles."""
    succ = {v: [] for v in range(a.size)}
    for (x, y) in a.relation(edge_symbol):
        succ[x].append(y)
    state = {v: 0 for v in range(a.size)}  # 0 unseen, 1 on stack, 2 done

    def visit(v):
        state[v] = 1
        for w in succ[v]:
            if state[w] == 1:
                return True
            if state[w] == 0 and visit(w):
                return True
        state[v] = 2
        return False

    return any(state[v] == 0 and visit(v) for v in range(a.size))


def some_nonempty_substructure_satisfies(a, f, budget=10**8):
    for r in range(1, a.size + 1):
        for subset in itertools.combinations(range(a.size), r):
            sub, _ = substructure(a, subset)
            if mc_so(sub, f, budget=budget):
                return True
    return False


def iter_shrunk(a: FiniteStructure):
    """All structures on the same domain with relations shrunk tuple-wise."""
    names = a.signature.names
    pools = [sorted(a.relation(name)) for name in names]
    subset_lists = []
    for pool in pools:
        subsets = []
        for mask in range(2 ** len(pool)):
            subsets.append({pool[j] for j in range(len(pool)) if mask >> j & 1})
        subset_lists.append(subsets)
    for combo in itertools.product(*subset_lists):
        yield FiniteStructure(a.signature, a.size, dict(zip(names, combo)))


def some_shrunk_satisfies(a, f, budget=10**8):
    return any(mc_so(s, f, budget=budget) for s in iter_shrunk(a))
