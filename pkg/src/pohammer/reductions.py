"""Reduction pipelines: bounded-alternation QCSP and quantified 3-CNF to
model checking of fixed MSO sentences.

`build_phi_B` turns a finite template and quantifier prefix into a marker
sentence whose models encode true instances; `build_phi_star` builds, for a
given alternation depth, the sentence targeted by the quantified-3-CNF
encoder.  Both kits carry the hammered sentence used by the third pipeline
leg on disequality expansions.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import formulas as F
from .errors import PreconditionError, SignatureError
from .modelcheck import (
    DEFAULT_BUDGET,
    Qbf3Instance,
    QcspInstance,
    mc_so,
    solve_qbf3,
    solve_qcsp,
)
from .normalize import dual_negate, to_nnf
from .structures import FiniteStructure, Signature, expand_with_neq
from .textio import parse_formula, parse_signature, parse_structure, serialize_formula, serialize_structure
from .transforms import csp_hammer, restrict
from .errors import BudgetExceededError


# ---------------------------------------------------------------------------
# QCSP -> model checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QcspReductionKit:
    template: FiniteStructure
    prefix: Tuple[str, ...]
    phi_b: F.Formula
    hammered: F.Formula
    marker_symbols: Tuple[str, ...]  # per block, the unary marker symbol name

    @property
    def signature(self) -> Signature:
        sig = self.template.signature
        return Signature(sig.symbols + tuple((m, 1) for m in self.marker_symbols))


def build_phi_b(template: FiniteStructure, prefix: Sequence[str]) -> QcspReductionKit:
    """Build the marker sentence for a template and quantifier prefix.

    Block i of the prefix contributes one unary marker symbol (A{i} for
    universal blocks, E{i} for existential) and |B| unary SO variables
    quantified like the block.  The body says: either the universal player
    mislabeled its markers, or the existential player labeled every one of
    its variables with exactly one template value and all labels are
    compatible with the template's relations.
    """
    prefix = F.make_prefix(prefix)
    b = template
    n = len(prefix)
    if b.size < 2:
        raise PreconditionError(
            f"template must have at least 2 elements, got {b.size}"
        )
    if all(kind != F.FORALL for kind in prefix):
        raise PreconditionError("the prefix needs at least one universal block")

    markers = tuple(
        ("A" if kind == F.FORALL else "E") + str(i + 1) for i, kind in enumerate(prefix)
    )
    for m in markers:
        if b.signature.has(m):
            raise SignatureError(f"template signature already contains marker {m!r}")

    # SO variables Q_{i,b}, one per block and template element
    so_vars: List[List[F.SOVar]] = [
        [F.fresh_so_var(f"{markers[i]}_{v}", 1) for v in range(b.size)]
        for i in range(n)
    ]

    def marker_atom(i: int, var: F.Var) -> F.Formula:
        return F.RelAtom(markers[i], (var,))

    def label_atom(i: int, value: int, var: F.Var) -> F.Formula:
        return F.SOAtom(so_vars[i][value], (var,))

    # universal player mislabeled: a label outside its block, or two labels
    psi_forall_parts: List[F.Formula] = []
    for i, kind in enumerate(prefix):
        if kind != F.FORALL:
            continue
        pair_parts: List[F.Formula] = []
        for v in range(b.size):
            for c in range(b.size):
                if c == v:
                    continue
                x1 = F.fresh_var("x")
                first = F.ExistsFO(
                    x1, F.conj([F.Not(marker_atom(i, x1)), label_atom(i, v, x1)])
                )
                x2 = F.fresh_var("x")
                second = F.ExistsFO(
                    x2, F.conj([label_atom(i, v, x2), label_atom(i, c, x2)])
                )
                pair_parts.append(F.disj([first, second]))
        psi_forall_parts.append(F.disj(pair_parts))
    psi_forall = F.conj(psi_forall_parts)

    # existential player labels each of its variables with exactly one value
    psi_exists_parts: List[F.Formula] = []
    for i, kind in enumerate(prefix):
        if kind != F.EXISTS:
            continue
        x = F.fresh_var("x")
        psi_exists_parts.append(
            F.ForallFO(
                x,
                F.disj(
                    [F.Not(marker_atom(i, x))]
                    + [label_atom(i, v, x) for v in range(b.size)]
                ),
            )
        )
        for v in range(b.size):
            for c in range(v + 1, b.size):
                y = F.fresh_var("x")
                psi_exists_parts.append(
                    F.ForallFO(
                        y,
                        F.disj(
                            [F.Not(label_atom(i, v, y)), F.Not(label_atom(i, c, y))]
                        ),
                    )
                )
    psi_exists = F.conj(psi_exists_parts)

    # labels are compatible with every template relation
    psi_b_parts: List[F.Formula] = []
    import itertools as _it

    for name, arity in b.signature.symbols:
        rel = sorted(b.relation(name))
        for positions in _it.product(range(n), repeat=arity):
            xs = tuple(F.fresh_var(f"x{k+1}") for k in range(arity))
            clause_tau = F.disj(
                [F.Not(F.RelAtom(name, xs))]
                + [F.Not(marker_atom(positions[k], xs[k])) for k in range(arity)]
            )
            forall_escape = F.disj(
                [
                    F.conj(
                        [F.Not(label_atom(positions[k], v, xs[k])) for v in range(b.size)]
                    )
                    for k in range(arity)
                    if prefix[positions[k]] == F.FORALL
                ]
            )
            exists_hit = F.disj(
                [
                    F.conj(
                        [label_atom(positions[k], t[k], xs[k]) for k in range(arity)]
                    )
                    for t in rel
                ]
            )
            psi_b_parts.append(
                F.wrap_fo_prefix(
                    [(F.FORALL, x) for x in xs],
                    F.disj([clause_tau, forall_escape, exists_hit]),
                )
            )
    psi_b = F.conj(psi_b_parts)

    body = F.disj([psi_forall, F.conj([psi_exists, psi_b])])
    so_prefix = [
        (prefix[i], so_vars[i][v]) for i in range(n) for v in range(b.size)
    ]
    phi_b = F.wrap_so_prefix(so_prefix, body)
    hammered = csp_hammer(phi_b)
    return QcspReductionKit(
        template=b,
        prefix=prefix,
        phi_b=phi_b,
        hammered=hammered,
        marker_symbols=markers,
    )


def encode_qcsp_instance(inst: QcspInstance, kit: QcspReductionKit) -> FiniteStructure:
    """The instance as a structure over the kit's marker signature.

    Domain elements are the instance's variables in declaration order; each
    carries exactly its block's marker; relation tuples are the atoms.
    """
    if inst.prefix != kit.prefix:
        raise PreconditionError(
            f"instance prefix {inst.prefix} does not match kit prefix {kit.prefix}"
        )
    inst.validate_against(kit.template.signature)
    variables = inst.variables
    index = {name: i for i, name in enumerate(variables)}
    rels: Dict[str, set] = {name: set() for name in kit.signature.names}
    for i, (_, names) in enumerate(inst.blocks):
        for v in names:
            rels[kit.marker_symbols[i]].add((index[v],))
    for symbol, args in inst.atoms:
        rels[symbol].add(tuple(index[a] for a in args))
    return FiniteStructure(kit.signature, len(variables), rels)


@dataclass(frozen=True)
class QcspPipelineResult:
    direct: Optional[bool]
    via_phi_b: Optional[bool]
    via_hammer: Optional[bool]
    errors: Tuple[str, ...] = ()

    @property
    def agree(self) -> bool:
        return (
            self.direct is not None
            and self.direct == self.via_phi_b == self.via_hammer
        )

    def to_json_dict(self) -> dict:
        return {
            "direct": self.direct,
            "via_phi_b": self.via_phi_b,
            "via_hammer": self.via_hammer,
            "agree": self.agree,
            "errors": list(self.errors),
        }


def run_qcsp_pipeline(
    inst: QcspInstance, kit: QcspReductionKit, budget: int = DEFAULT_BUDGET
) -> QcspPipelineResult:
    """Solve an instance three ways: directly, via the marker sentence on the
    encoded structure, and via the hammered sentence on its disequality
    expansion.  The three answers agree on well-formed inputs."""
    errors: List[str] = []
    direct: Optional[bool] = solve_qcsp(kit.template, inst)
    encoded = encode_qcsp_instance(inst, kit)
    via_phi_b: Optional[bool] = None
    via_hammer: Optional[bool] = None
    try:
        via_phi_b = mc_so(encoded, kit.phi_b, budget=budget)
    except BudgetExceededError as exc:
        errors.append(f"phi_b leg: {exc}")
    try:
        via_hammer = mc_so(expand_with_neq(encoded), kit.hammered, budget=budget)
    except BudgetExceededError as exc:
        errors.append(f"hammer leg: {exc}")
    return QcspPipelineResult(direct, via_phi_b, via_hammer, tuple(errors))


# ---------------------------------------------------------------------------
# quantified 3-CNF -> model checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Qbf3ReductionKit:
    n: int
    phi_star: F.Formula
    dual_hammered: F.Formula
    signature: Signature


def qbf3_signature(n: int) -> Signature:
    symbols: List[Tuple[str, int]] = [("R", 2), ("Rbar", 2), ("succ", 2), ("S", 1), ("T", 1)]
    symbols += [(f"E{k}", 1) for k in range(1, n + 1)]
    symbols += [(f"A{k}", 1) for k in range(1, n + 1)]
    return Signature(symbols)


def build_phi_star(n: int) -> Qbf3ReductionKit:
    """Build the alternation-depth-n sentence for the quantified-3-CNF encoder.

    The SO prefix alternates a universal zero-label and an existential
    one-label per level, ending with an existential witness set V.  The body
    says: either the universal labels break their bookkeeping rules, or the
    existential labels obey theirs and the witness set (one consistent,
    true-labeled literal per clause, linked across consecutive clauses)
    satisfies the clause chain.
    """
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    sig = qbf3_signature(n)

    a0 = [F.fresh_so_var(f"A{k}_0", 1) for k in range(1, n + 1)]
    e1 = [F.fresh_so_var(f"E{k}_1", 1) for k in range(1, n + 1)]
    v = F.fresh_so_var("V", 1)

    def rel(name: str, *args: F.Var) -> F.Formula:
        return F.RelAtom(name, tuple(args))

    def forall1(builder) -> F.Formula:
        x = F.fresh_var("x")
        return F.ForallFO(x, builder(x))

    def forall2(builder) -> F.Formula:
        x, y = F.fresh_var("x"), F.fresh_var("y")
        return F.ForallFO(x, F.ForallFO(y, builder(x, y)))

    # universal-label bookkeeping
    psi_forall_parts: List[F.Formula] = []
    for k in range(n):
        for l in range(k + 1, n):
            psi_forall_parts.append(
                forall1(lambda x, k=k, l=l: F.disj(
                    [F.Not(F.SOAtom(a0[k], (x,))), F.SOAtom(a0[l], (x,))]))
            )
    for k in range(n):
        for l in range(k + 1, n):
            psi_forall_parts.append(
                forall1(lambda x, k=k, l=l: F.disj([
                    F.Not(F.SOAtom(a0[l], (x,))),
                    F.Not(rel(f"A{k+1}", x)),
                    F.SOAtom(a0[k], (x,)),
                ]))
            )
    for k in range(n):
        for l in range(k + 1, n):
            psi_forall_parts.append(
                forall1(lambda x, k=k, l=l: F.disj(
                    [F.Not(F.SOAtom(a0[k], (x,))), F.Not(rel(f"A{l+1}", x))]))
            )
    for k in range(1, n + 1):
        psi_forall_parts.append(
            forall1(lambda x, k=k: F.disj(
                [F.Not(F.SOAtom(a0[n - 1], (x,))), F.Not(rel(f"E{k}", x))]))
        )
    psi_forall_parts.append(
        forall2(lambda x, y: F.disj([
            F.Not(F.SOAtom(a0[n - 1], (x,))),
            F.Not(F.SOAtom(a0[n - 1], (y,))),
            F.Not(rel("Rbar", x, y)),
        ]))
    )
    psi_forall = F.conj(psi_forall_parts)

    # existential-label bookkeeping
    psi_exists_parts: List[F.Formula] = []
    for k in range(n):
        for l in range(k + 1, n):
            psi_exists_parts.append(
                forall1(lambda x, k=k, l=l: F.disj(
                    [F.Not(F.SOAtom(e1[k], (x,))), F.SOAtom(e1[l], (x,))]))
            )
    for k in range(1, n + 1):
        psi_exists_parts.append(
            forall1(lambda y, k=k: F.disj(
                [F.Not(F.SOAtom(e1[k - 1], (y,)))]
                + [rel(f"E{j}", y) for j in range(1, k + 1)]))
        )
    psi_exists_parts.append(
        forall2(lambda w, z: F.disj([
            F.Not(F.SOAtom(e1[n - 1], (w,))),
            F.Not(F.SOAtom(e1[n - 1], (z,))),
            rel("R", w, z),
        ]))
    )
    psi_exists = F.conj(psi_exists_parts)

    # the witness-set requirements, relativized to V
    satisf = forall2(lambda x, y: rel("R", x, y))
    sx, sy = F.fresh_var("x"), F.fresh_var("y")
    start = F.ExistsFO(sx, F.ExistsFO(sy, F.conj([rel("S", sx), rel("T", sy)])))
    consist = forall1(
        lambda x: F.disj(
            [F.Not(F.SOAtom(a0[n - 1], (x,)))]
            + [F.SOAtom(e1[k], (x,)) for k in range(n)]
        )
    )
    cx, cy = F.fresh_var("x"), F.fresh_var("y")
    ca, cb = F.fresh_var("a"), F.fresh_var("b")
    # chain conjunct: every witness not in the last clause has a successor
    # witness, every witness not in the first clause has a predecessor witness
    succ = F.ForallFO(
        cx,
        F.ForallFO(
            cy,
            F.ExistsFO(
                ca,
                F.ExistsFO(
                    cb,
                    F.disj([
                        F.Eq(cx, cy),
                        F.conj([
                            F.disj([rel("T", cx), rel("succ", cx, ca)]),
                            F.disj([rel("S", cy), rel("succ", cb, cy)]),
                        ]),
                    ]),
                ),
            ),
        ),
    )
    psi = F.conj([satisf, start, consist, succ])

    body = F.disj(
        [to_nnf(F.Not(psi_forall)),
         F.conj([psi_exists, restrict(psi, v, empty_escape=False)])]
    )
    so_prefix: List[Tuple[str, F.SOVar]] = []
    for k in range(n):
        so_prefix.append((F.FORALL, a0[k]))
        so_prefix.append((F.EXISTS, e1[k]))
    so_prefix.append((F.EXISTS, v))
    phi_star = F.wrap_so_prefix(so_prefix, body)
    dual_hammered = csp_hammer(dual_negate(phi_star))
    return Qbf3ReductionKit(
        n=n, phi_star=phi_star, dual_hammered=dual_hammered, signature=sig
    )


def encode_qbf3_instance(inst: Qbf3Instance, n: int) -> FiniteStructure:
    """Encode an alternating (forall-exists)^n 3-CNF instance as a structure.

    Domain elements are (literal, clause) incidences ordered clause-major;
    S/T mark first/last clause, succ links consecutive clauses, R/Rbar record
    non-complementary/complementary literal pairs, and A_k/E_k mark the
    quantifier block of the literal's variable.
    """
    if inst.shape != "ae" * n:
        raise PreconditionError(
            f"instance prefix shape {inst.shape!r} does not match ('a','e')^{n}"
        )
    m = len(inst.clauses)
    if m < 1:
        raise PreconditionError("the encoder needs at least one clause")

    block_of: Dict[int, Tuple[str, int]] = {}
    for pos, (kind, variables) in enumerate(inst.blocks):
        level = pos // 2 + 1
        for var in variables:
            block_of[var] = (kind, level)

    elements: List[Tuple[int, int]] = []
    for i, clause in enumerate(inst.clauses, start=1):
        seen = set()
        for lit in clause:
            if lit not in seen:
                seen.add(lit)
                elements.append((lit, i))
    index = {p: j for j, p in enumerate(elements)}

    sig = qbf3_signature(n)
    rels: Dict[str, set] = {name: set() for name in sig.names}
    for lam, i in elements:
        j = index[(lam, i)]
        if i == 1:
            rels["S"].add((j,))
        if i == m:
            rels["T"].add((j,))
        kind, level = block_of[abs(lam)]
        rels["A" + str(level) if kind == "a" else "E" + str(level)].add((j,))
    for (lam, i), j in index.items():
        for (lam2, i2), j2 in index.items():
            if lam == -lam2:
                rels["Rbar"].add((j, j2))
            else:
                rels["R"].add((j, j2))
            if i2 == i + 1:
                rels["succ"].add((j, j2))
    return FiniteStructure(sig, len(elements), rels)


@dataclass(frozen=True)
class Qbf3PipelineResult:
    direct: Optional[bool]
    via_phi_star: Optional[bool]
    via_hammer: Optional[bool]
    errors: Tuple[str, ...] = ()

    @property
    def contract_holds(self) -> bool:
        return (
            self.direct is not None
            and self.via_phi_star == self.direct
            and self.via_hammer == (not self.direct)
        )

    def to_json_dict(self) -> dict:
        return {
            "direct": self.direct,
            "via_phi_star": self.via_phi_star,
            "via_hammer": self.via_hammer,
            "contract_holds": self.contract_holds,
            "errors": list(self.errors),
        }


def run_qbf3_pipeline(
    inst: Qbf3Instance, kit: Qbf3ReductionKit, budget: int = DEFAULT_BUDGET
) -> Qbf3PipelineResult:
    """Solve an instance directly, via the encoder and phi_star, and via the
    hammered dual on the disequality expansion (which answers the negation)."""
    errors: List[str] = []
    direct = solve_qbf3(inst)
    encoded = encode_qbf3_instance(inst, kit.n)
    via_phi_star: Optional[bool] = None
    via_hammer: Optional[bool] = None
    try:
        via_phi_star = mc_so(encoded, kit.phi_star, budget=budget)
    except BudgetExceededError as exc:
        errors.append(f"phi_star leg: {exc}")
    try:
        via_hammer = mc_so(expand_with_neq(encoded), kit.dual_hammered, budget=budget)
    except BudgetExceededError as exc:
        errors.append(f"hammer leg: {exc}")
    return Qbf3PipelineResult(direct, via_phi_star, via_hammer, tuple(errors))


# ---------------------------------------------------------------------------
# kit directories
# ---------------------------------------------------------------------------


def write_qcsp_kit(kit: QcspReductionKit, directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "phi_B.sof"), "w") as fh:
        fh.write(serialize_formula(kit.phi_b) + "\n")
    with open(os.path.join(directory, "hammered.sof"), "w") as fh:
        fh.write(serialize_formula(kit.hammered) + "\n")
    with open(os.path.join(directory, "template.st"), "w") as fh:
        fh.write(serialize_structure(kit.template))
    letters = "".join("a" if k == F.FORALL else "e" for k in kit.prefix)
    manifest = [
        "kind qcsp",
        f"prefix {letters}",
        "markers " + " ".join(kit.marker_symbols),
        "signature " + " ".join(f"{n}/{a}" for n, a in kit.signature.symbols),
    ]
    with open(os.path.join(directory, "manifest"), "w") as fh:
        fh.write("\n".join(manifest) + "\n")


def load_qcsp_kit(directory: str) -> QcspReductionKit:
    """Rebuild a kit from its directory, verifying the stored sentences."""
    fields = _read_manifest(directory)
    if fields.get("kind") != "qcsp":
        raise PreconditionError(f"not a qcsp kit: {directory}")
    with open(os.path.join(directory, "template.st")) as fh:
        template = parse_structure(fh.read())
    kit = build_phi_b(template, F.prefix_from_letters(fields["prefix"]))
    _verify_stored(directory, "phi_B.sof", kit.phi_b)
    _verify_stored(directory, "hammered.sof", kit.hammered)
    return kit


def write_qbf3_kit(kit: Qbf3ReductionKit, directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "phi_star.sof"), "w") as fh:
        fh.write(serialize_formula(kit.phi_star) + "\n")
    with open(os.path.join(directory, "hammered.sof"), "w") as fh:
        fh.write(serialize_formula(kit.dual_hammered) + "\n")
    manifest = [
        "kind qbf3",
        f"n {kit.n}",
        "signature " + " ".join(f"{s}/{a}" for s, a in kit.signature.symbols),
    ]
    with open(os.path.join(directory, "manifest"), "w") as fh:
        fh.write("\n".join(manifest) + "\n")


def load_qbf3_kit(directory: str) -> Qbf3ReductionKit:
    fields = _read_manifest(directory)
    if fields.get("kind") != "qbf3":
        raise PreconditionError(f"not a qbf3 kit: {directory}")
    kit = build_phi_star(int(fields["n"]))
    _verify_stored(directory, "phi_star.sof", kit.phi_star)
    _verify_stored(directory, "hammered.sof", kit.dual_hammered)
    return kit


def _read_manifest(directory: str) -> Dict[str, str]:
    fields: Dict[str, str] = {}
    with open(os.path.join(directory, "manifest")) as fh:
        for line in fh:
            line = line.strip()
            if line:
                key, _, value = line.partition(" ")
                fields[key] = value
    return fields


def _verify_stored(directory: str, filename: str, expected: F.Formula) -> None:
    with open(os.path.join(directory, filename)) as fh:
        stored = fh.read().strip()
    if stored != serialize_formula(expected):
        raise PreconditionError(
            f"{filename} in {directory} does not match the rebuilt sentence"
        )
