"""Seeded random generators for sentences, structures, and instances."""

import random

import pohammer.formulas as F
from pohammer.modelcheck import Qbf3Instance, QcspInstance
from pohammer.structures import Signature

SIG_PE = Signature([("P", 1), ("E", 2)])


def random_sentence(rng: random.Random, sig=SIG_PE, max_so=2, max_depth=4):
    """A prenex-SO random sentence: an SO prefix over unary (mostly) variables
    followed by a first-order body.  Keeping SO binders in front means every
    normalize pass (including dual_negate) applies."""
    n_so = rng.randint(0, max_so)
    so_vars = []
    for i in range(n_so):
        arity = 2 if rng.random() < 0.1 else 1
        so_vars.append(F.fresh_so_var(f"X{i}", arity))
    prefix = [(rng.choice([F.EXISTS, F.FORALL]), v) for v in so_vars]
    body = _random_fo(rng, sig, so_vars, [], max_depth)
    return F.wrap_so_prefix(prefix, body)


def _random_fo(rng, sig, so_vars, scope, depth):
    leaf_only = depth <= 0
    choices = ["atom", "eq", "const"]
    if not leaf_only:
        choices += ["and", "or", "not", "exists", "forall", "exists", "forall"]
    kind = rng.choice(choices)
    if kind in ("atom", "eq", "const") or leaf_only:
        if not scope or kind == "const":
            return F.TRUE if rng.random() < 0.5 else F.FALSE
        if kind == "eq" or (kind == "atom" and not sig.symbols and not so_vars):
            return F.Eq(rng.choice(scope), rng.choice(scope))
        pool = [("rel", name, arity) for name, arity in sig.symbols]
        pool += [("so", v, v.arity) for v in so_vars]
        tag, sym, arity = rng.choice(pool)
        args = tuple(rng.choice(scope) for _ in range(arity))
        atom = F.RelAtom(sym, args) if tag == "rel" else F.SOAtom(sym, args)
        return F.Not(atom) if rng.random() < 0.4 else atom
    if kind in ("and", "or"):
        parts = tuple(
            _random_fo(rng, sig, so_vars, scope, depth - 1)
            for _ in range(rng.randint(2, 3))
        )
        return F.And(parts) if kind == "and" else F.Or(parts)
    if kind == "not":
        return F.Not(_random_fo(rng, sig, so_vars, scope, depth - 1))
    var = F.fresh_var(f"v{len(scope)}")
    child = _random_fo(rng, sig, so_vars, scope + [var], depth - 1)
    return F.ExistsFO(var, child) if kind == "exists" else F.ForallFO(var, child)


def random_qcsp_instance(rng: random.Random, prefix, max_vars=4, max_atoms=4,
                         symbol="R", arity=2):
    """Random instance over a one-symbol template signature with the given
    prefix shape; blocks may be empty but at least one variable exists."""
    n_vars = rng.randint(1, max_vars)
    names = [f"v{i+1}" for i in range(n_vars)]
    cuts = sorted(rng.randint(0, n_vars) for _ in range(len(prefix) - 1))
    blocks = []
    start = 0
    for i, kind in enumerate(prefix):
        end = cuts[i] if i < len(cuts) else n_vars
        blocks.append((kind, tuple(names[start:end])))
        start = end
    n_atoms = rng.randint(0, max_atoms)
    atoms = tuple(
        (symbol, tuple(rng.choice(names) for _ in range(arity)))
        for _ in range(n_atoms)
    )
    return QcspInstance(tuple(blocks), atoms)


def random_qbf3_instance(rng: random.Random, n=1, max_block=2, max_clauses=2):
    """Random alternating (forall exists)^n instance with 3-CNF clauses."""
    blocks = []
    v = 1
    for _ in range(n):
        for kind in ("a", "e"):
            k = rng.randint(1, max_block)
            blocks.append((kind, tuple(range(v, v + k))))
            v += k
    num_vars = v - 1
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        width = rng.randint(1, 3)
        clause = tuple(
            rng.choice([1, -1]) * rng.randint(1, num_vars) for _ in range(width)
        )
        clauses.append(clause)
    return Qbf3Instance(tuple(blocks), tuple(clauses), num_vars)
