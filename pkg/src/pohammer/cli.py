"""Command-line entry point.

Exit codes: 0 = success / true / accepted; 1 = false / rejected /
counterexample found; 2 = usage or parse error; 3 = resource budget
exhausted.  Every subcommand is a thin wrapper over a library call; with
--json the report is machine-readable.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional, Sequence

from . import classes as C
from . import formulas as F
from . import homsearch as H
from . import normalize as N
from . import reductions as R
from . import textio as T
from . import transforms as X
from .errors import (
    BlowupError,
    BudgetExceededError,
    EnumerationLimitError,
    PohammerError,
)
from .modelcheck import DEFAULT_BUDGET, mc_so, solve_qbf3, solve_qcsp
from .structures import Signature, expand_with_neq

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _signature(spec: Optional[str]) -> Signature:
    return T.parse_signature(spec or "")


def _load_formula(path: str, signature: Optional[str]) -> F.Formula:
    text = _read(path)
    sig = T.infer_signature(text) if signature is None else _signature(signature)
    return T.parse_formula(text, sig)


def _inferred_signature(f: F.Formula) -> Signature:
    seen = {}
    for node in F.walk(f):
        if isinstance(node, F.RelAtom):
            seen.setdefault(node.symbol, len(node.args))
    return Signature(sorted(seen.items()))


def _emit(out, text: str) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


def _emit_json(out, payload: dict) -> None:
    _emit(out, json.dumps(payload, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pohammer",
        description="Sentence transformations, recognizers, and desk-scale "
        "semantic oracles for second-order logic on finite structures.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, budget=False, size_cap=False, jobs=False, seed=False):
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        if budget:
            sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                            help="game-tree node budget")
        if size_cap:
            sp.add_argument("--size-cap", type=int, default=N.DEFAULT_SIZE_CAP,
                            help="clause-count cap for CNF/DNF conversion")
        if jobs:
            sp.add_argument("--jobs", type=int, default=1,
                            help="worker threads (result is identical for any value)")
        if seed:
            sp.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("parse", help="parse and reprint canonically")
    sp.add_argument("file")
    sp.add_argument("--kind", choices=["structure", "formula", "qcsp", "qbf3"],
                    default=None, help="input kind (default: from file extension)")
    sp.add_argument("--signature", default=None,
                    help="signature such as 'E/2 P/1' (formula and qcsp inputs)")
    sp.add_argument("--shape", default=None, help="required qbf3 prefix shape, e.g. 'ae'")
    add_common(sp)

    sp = sub.add_parser("normalize", help="apply a semantics-preserving rewrite")
    sp.add_argument("file")
    sp.add_argument("--signature", default=None)
    mode = sp.add_mutually_exclusive_group(required=True)
    for flag in ("nnf", "prenex", "cnf", "dnf", "dual"):
        mode.add_argument(f"--{flag}", action="store_true")
    add_common(sp, size_cap=True)

    sp = sub.add_parser("classify", help="run a syntactic class recognizer")
    sp.add_argument("file")
    sp.add_argument("--signature", default=None)
    sp.add_argument("--class", dest="cls", required=True,
                    choices=["positive", "negative", "exists-guarded", "forall-restricted"])
    add_common(sp, size_cap=True)

    sp = sub.add_parser("transform", help="apply a sentence transformation")
    sp.add_argument("file")
    sp.add_argument("--signature", default=None)
    sp.add_argument("--kind", required=True,
                    help="sup | shom | restrict:GUARD | hammer")
    sp.add_argument("--force", action="store_true",
                    help="skip the recognizer precondition of the hammer")
    add_common(sp, size_cap=True)

    sp = sub.add_parser("mc", help="model-check a sentence on a structure")
    sp.add_argument("--structure", required=True)
    sp.add_argument("--formula", required=True)
    add_common(sp, budget=True, jobs=True)

    sp = sub.add_parser("solve-qcsp", help="solve a QCSP instance on a template")
    sp.add_argument("--template", required=True)
    sp.add_argument("--instance", required=True)
    add_common(sp)

    sp = sub.add_parser("solve-qbf3", help="solve a quantified 3-CNF instance")
    sp.add_argument("file")
    sp.add_argument("--shape", default=None)
    add_common(sp)

    sp = sub.add_parser("build-phib", help="build a QCSP reduction kit directory")
    sp.add_argument("--template", required=True)
    sp.add_argument("--prefix", required=True, help="prefix letters, e.g. 'ae'")
    sp.add_argument("--out", required=True)
    add_common(sp)

    sp = sub.add_parser("build-phistar", help="build a quantified-3-CNF kit directory")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out", required=True)
    add_common(sp)

    sp = sub.add_parser("encode", help="encode an instance as a structure")
    kind = sp.add_mutually_exclusive_group(required=True)
    kind.add_argument("--qcsp", action="store_true")
    kind.add_argument("--qbf3", action="store_true")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--template", default=None)
    sp.add_argument("--prefix", default=None)
    sp.add_argument("--n", type=int, default=None)
    add_common(sp)

    sp = sub.add_parser("pipeline", help="run all reduction legs and compare")
    kind = sp.add_mutually_exclusive_group(required=True)
    kind.add_argument("--qcsp", action="store_true")
    kind.add_argument("--qbf3", action="store_true")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--template", default=None)
    sp.add_argument("--prefix", default=None)
    sp.add_argument("--n", type=int, default=None)
    add_common(sp, budget=True)

    sp = sub.add_parser("verify-closure", help="search a family for closure violations")
    sp.add_argument("file")
    sp.add_argument("--signature", default=None,
                    help="family signature (default: inferred from the sentence)")
    sp.add_argument("--kind", required=True,
                    choices=[k.replace("_", "-") for k in H.CLOSURE_KINDS])
    sp.add_argument("--max-size", type=int, required=True)
    sp.add_argument("--random", nargs=2, type=int, metavar=("SEED", "COUNT"),
                    default=None, help="random family instead of exhaustive")
    add_common(sp, budget=True, jobs=True)

    return p


def run(argv: Sequence[str], out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_TRUE
    try:
        return _dispatch(args, out)
    except (T.ParseError, BlowupError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (BudgetExceededError, EnumerationLimitError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_RESOURCE
    except (PohammerError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


def _dispatch(args, out) -> int:
    cmd = args.command
    if cmd == "parse":
        return _cmd_parse(args, out)
    if cmd == "normalize":
        return _cmd_normalize(args, out)
    if cmd == "classify":
        return _cmd_classify(args, out)
    if cmd == "transform":
        return _cmd_transform(args, out)
    if cmd == "mc":
        return _cmd_mc(args, out)
    if cmd == "solve-qcsp":
        inst = T.parse_qcsp(_read(args.instance),
                            T.parse_structure(_read(args.template)).signature)
        template = T.parse_structure(_read(args.template))
        value = solve_qcsp(template, inst)
        _print_bool(args, out, value)
        return EXIT_TRUE if value else EXIT_FALSE
    if cmd == "solve-qbf3":
        inst = T.parse_qdimacs3(_read(args.file), shape=args.shape)
        value = solve_qbf3(inst)
        _print_bool(args, out, value)
        return EXIT_TRUE if value else EXIT_FALSE
    if cmd == "build-phib":
        kit = R.build_phi_b(T.parse_structure(_read(args.template)),
                            F.prefix_from_letters(args.prefix))
        R.write_qcsp_kit(kit, args.out)
        payload = {
            "out": args.out,
            "markers": list(kit.marker_symbols),
            "so_variables": len(kit.prefix) * kit.template.size,
        }
        _emit_json(out, payload) if args.json else _emit(
            out, f"wrote kit to {args.out} (markers: {' '.join(kit.marker_symbols)})")
        return EXIT_TRUE
    if cmd == "build-phistar":
        kit = R.build_phi_star(args.n)
        R.write_qbf3_kit(kit, args.out)
        payload = {"out": args.out, "n": kit.n}
        _emit_json(out, payload) if args.json else _emit(
            out, f"wrote kit to {args.out} (n={kit.n})")
        return EXIT_TRUE
    if cmd == "encode":
        return _cmd_encode(args, out)
    if cmd == "pipeline":
        return _cmd_pipeline(args, out)
    if cmd == "verify-closure":
        return _cmd_verify_closure(args, out)
    raise AssertionError(f"unhandled command {cmd!r}")


def _print_bool(args, out, value: bool) -> None:
    if args.json:
        _emit_json(out, {"result": value})
    else:
        _emit(out, "true" if value else "false")


def _guess_kind(path: str) -> str:
    if path.endswith(".st"):
        return "structure"
    if path.endswith(".sof"):
        return "formula"
    if path.endswith(".qcsp"):
        return "qcsp"
    if path.endswith((".qdimacs", ".qbf")):
        return "qbf3"
    return "formula"


def _cmd_parse(args, out) -> int:
    kind = args.kind or _guess_kind(args.file)
    text = _read(args.file)
    if kind == "structure":
        _emit(out, T.serialize_structure(T.parse_structure(text)))
    elif kind == "formula":
        sig = T.infer_signature(text) if args.signature is None else _signature(args.signature)
        _emit(out, T.serialize_formula(T.parse_formula(text, sig)))
    elif kind == "qcsp":
        inst = T.parse_qcsp(text, _signature(args.signature))
        _emit(out, f"ok: {len(inst.variables)} variables, {len(inst.atoms)} atoms, "
                   f"prefix {''.join('a' if k == F.FORALL else 'e' for k in inst.prefix)}")
    else:
        inst = T.parse_qdimacs3(text, shape=args.shape)
        _emit(out, f"ok: {inst.num_vars} variables, {len(inst.clauses)} clauses, "
                   f"prefix {inst.shape}")
    return EXIT_TRUE


def _cmd_normalize(args, out) -> int:
    f = _load_formula(args.file, args.signature)
    if args.nnf:
        g = N.to_nnf(f)
    elif args.prenex:
        g = N.to_prenex(N.to_nnf(f))
    elif args.cnf:
        g = N.qf_normalize(N.to_prenex(N.to_nnf(f)), N.CNF, args.size_cap)
    elif args.dnf:
        g = N.qf_normalize(N.to_prenex(N.to_nnf(f)), N.DNF, args.size_cap)
    else:
        g = N.dual_negate(f)
    _emit(out, T.serialize_formula(g))
    return EXIT_TRUE


def _cmd_classify(args, out) -> int:
    f = _load_formula(args.file, args.signature)
    verdict = C.classify(f, args.cls.replace("-", "_"), size_cap=args.size_cap)
    if args.json:
        _emit_json(out, verdict.to_json_dict())
    else:
        if verdict.accepted:
            _emit(out, "accepted")
        elif verdict.blowup_note:
            _emit(out, f"indeterminate: {verdict.blowup_note}")
        else:
            fc = verdict.failing_clause
            _emit(out, f"rejected: clause [{fc.clause}] witness {fc.witness}")
    return EXIT_TRUE if verdict.accepted else EXIT_FALSE


def _cmd_transform(args, out) -> int:
    f = _load_formula(args.file, args.signature)
    kind = args.kind
    if kind == "sup":
        g = X.sup_transform(f)
    elif kind == "shom":
        g = X.shom_transform(f)
    elif kind.startswith("restrict:"):
        g = X.restrict(f, kind.split(":", 1)[1])
    elif kind == "hammer":
        g = X.csp_hammer(f, force=args.force)
    else:
        raise PohammerError(f"unknown transform kind {kind!r}")
    _emit(out, T.serialize_formula(g))
    return EXIT_TRUE


def _cmd_mc(args, out) -> int:
    structure = T.parse_structure(_read(args.structure))
    f = T.parse_formula(_read(args.formula), structure.signature)
    value = mc_so(structure, f, budget=args.budget, jobs=args.jobs)
    _print_bool(args, out, value)
    return EXIT_TRUE if value else EXIT_FALSE


def _cmd_encode(args, out) -> int:
    if args.qcsp:
        if args.template is None or args.prefix is None:
            raise PohammerError("encode --qcsp needs --template and --prefix")
        template = T.parse_structure(_read(args.template))
        kit = R.build_phi_b(template, F.prefix_from_letters(args.prefix))
        inst = T.parse_qcsp(_read(args.instance), template.signature)
        _emit(out, T.serialize_structure(R.encode_qcsp_instance(inst, kit)))
    else:
        if args.n is None:
            raise PohammerError("encode --qbf3 needs --n")
        inst = T.parse_qdimacs3(_read(args.instance), shape="ae" * args.n)
        _emit(out, T.serialize_structure(R.encode_qbf3_instance(inst, args.n)))
    return EXIT_TRUE


def _cmd_pipeline(args, out) -> int:
    if args.qcsp:
        if args.template is None or args.prefix is None:
            raise PohammerError("pipeline --qcsp needs --template and --prefix")
        template = T.parse_structure(_read(args.template))
        kit = R.build_phi_b(template, F.prefix_from_letters(args.prefix))
        inst = T.parse_qcsp(_read(args.instance), template.signature)
        result = R.run_qcsp_pipeline(inst, kit, budget=args.budget)
        ok = result.agree
    else:
        if args.n is None:
            raise PohammerError("pipeline --qbf3 needs --n")
        kit = R.build_phi_star(args.n)
        inst = T.parse_qdimacs3(_read(args.instance), shape="ae" * args.n)
        result = R.run_qbf3_pipeline(inst, kit, budget=args.budget)
        ok = result.contract_holds
    if args.json:
        _emit_json(out, result.to_json_dict())
    else:
        for key, value in sorted(result.to_json_dict().items()):
            _emit(out, f"{key}: {value}")
    if result.errors:
        return EXIT_RESOURCE
    return EXIT_TRUE if ok else EXIT_FALSE


def _cmd_verify_closure(args, out) -> int:
    f = _load_formula(args.file, args.signature)
    sig = _signature(args.signature) if args.signature else _inferred_signature(f)
    if args.random is not None:
        seed, count = args.random
        report = H.check_closure(
            f, args.kind.replace("-", "_"), sig=sig, max_size=args.max_size,
            mode="random", seed=seed, count=count, budget=args.budget, jobs=args.jobs)
    else:
        report = H.check_closure(
            f, args.kind.replace("-", "_"), sig=sig, max_size=args.max_size,
            budget=args.budget, jobs=args.jobs)
    if args.json:
        _emit_json(out, report.to_json_dict())
    else:
        if report.found:
            a, b, mapping = report.witness
            _emit(out, "counterexample")
            _emit(out, "# A\n" + T.serialize_structure(a))
            _emit(out, "# B\n" + T.serialize_structure(b))
            if mapping is not None:
                _emit(out, "# mapping " + " ".join(f"{k}->{v}" for k, v in sorted(mapping.items())))
        else:
            _emit(out, f"no counterexample up to bound "
                       f"({report.structures_examined} structures, "
                       f"{report.pairs_examined} pairs)")
    return EXIT_FALSE if report.found else EXIT_TRUE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
