"""Text formats: structures, s-expression formulas, QCSP and QDIMACS instances.

Three line-oriented grammars are the repository's wire formats:

Structures::

    signature E/2 P/1
    domain 3
    E: (0,1) (1,0)
    P: (2)

`#` starts a comment.  Unlisted relations are empty.

Formulas are s-expressions with the keywords and, or, not, exists, forall,
exists2, forall2, atom, eq, true, false::

    (exists2 (S 1) (forall x (or (not (atom S (x))) (atom E (x x)))))

QCSP instances have a prefix line of `;`-separated blocks followed by
whitespace-separated atoms::

    forall x1 ; exists y1
    R(x1,y1)

Quantified 3-CNF uses the QDIMACS subset with header ``p cnf v c``,
alternating ``a``/``e`` lines, and 0-terminated clauses of width <= 3.

Serialization is canonical: lowercase keywords, single spaces, relations in
signature order, tuples in lexicographic order, bound variables renamed in
binder order.  Two alpha-variants of the same sentence serialize identically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from . import formulas as F
from .errors import PohammerError
from .structures import FiniteStructure, Signature

KEYWORDS = frozenset(
    ["and", "or", "not", "exists", "forall", "exists2", "forall2", "atom", "eq",
     "true", "false"]
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_INT = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class SourceSpan:
    """1-based line/column position attached to every parse error."""

    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}"


class ParseError(PohammerError):
    def __init__(self, message: str, span: SourceSpan):
        self.span = span
        super().__init__(f"{span}: {message}")


def _err(message: str, line: int, column: int) -> ParseError:
    return ParseError(message, SourceSpan(line, column))


# ---------------------------------------------------------------------------
# structures
# ---------------------------------------------------------------------------


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def parse_signature(text: str, line: int = 1, column: int = 1) -> Signature:
    """Parse a compact signature description such as 'E/2 P/1'."""
    symbols = []
    for part in text.split():
        m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_']*)/([0-9]+)", part)
        if not m:
            raise _err(f"bad signature entry {part!r}; expected NAME/ARITY", line, column)
        symbols.append((m.group(1), int(m.group(2))))
    try:
        return Signature(symbols)
    except PohammerError as exc:
        raise _err(str(exc), line, column) from None


def parse_structure(text: str) -> FiniteStructure:
    """Parse the structure grammar; unlisted relations are empty."""
    sig: Optional[Signature] = None
    size: Optional[int] = None
    tuples: Dict[str, set] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("signature"):
            if sig is not None:
                raise _err("duplicate signature declaration", lineno, 1)
            sig = parse_signature(line[len("signature"):].strip(), lineno, 1)
            tuples = {name: set() for name in sig.names}
            continue
        if line.startswith("domain"):
            if sig is None:
                raise _err("domain line before signature line", lineno, 1)
            if size is not None:
                raise _err("duplicate domain declaration", lineno, 1)
            rest = line[len("domain"):].strip()
            if not _INT.fullmatch(rest):
                raise _err(f"bad domain size {rest!r}", lineno, 1)
            size = int(rest)
            continue
        if sig is None or size is None:
            raise _err("expected 'signature' and 'domain' lines first", lineno, 1)
        name, colon, rest = line.partition(":")
        name = name.strip()
        if not colon:
            raise _err(f"expected 'NAME: tuples', got {line!r}", lineno, 1)
        if not sig.has(name):
            raise _err(f"unknown relation symbol {name!r}", lineno, 1)
        arity = sig.arity(name)
        for m in re.finditer(r"\(([^)]*)\)|([^\s()]+)", rest):
            col = line.index(":") + 2 + m.start()
            if m.group(2) is not None:
                raise _err(f"expected a parenthesized tuple, got {m.group(2)!r}",
                           lineno, col)
            entries = [e.strip() for e in m.group(1).split(",")] if m.group(1).strip() else []
            if len(entries) != arity:
                raise _err(
                    f"tuple {m.group(0)} has {len(entries)} entries; "
                    f"{name!r} has arity {arity}", lineno, col)
            t = []
            for e in entries:
                if not _INT.fullmatch(e):
                    raise _err(f"bad element {e!r}", lineno, col)
                v = int(e)
                if not (0 <= v < size):
                    raise _err(f"element {v} outside domain 0..{size - 1}", lineno, col)
                t.append(v)
            tuples[name].add(tuple(t))
    if sig is None:
        raise _err("missing signature line", 1, 1)
    if size is None:
        raise _err("missing domain line", 1, 1)
    return FiniteStructure(sig, size, tuples)


def serialize_structure(a: FiniteStructure) -> str:
    """Canonical form; every symbol listed, tuples lexicographically sorted."""
    lines = ["signature " + " ".join(f"{n}/{k}" for n, k in a.signature.symbols)]
    if not a.signature.symbols:
        lines = ["signature"]
    lines.append(f"domain {a.size}")
    for name in a.signature.names:
        ts = sorted(a.relation(name))
        rendered = " ".join("(" + ",".join(str(e) for e in t) + ")" for t in ts)
        lines.append(f"{name}:" + (" " + rendered if rendered else ""))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int


def _tokenize(text: str) -> Iterator[_Token]:
    line = 1
    col = 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif c == ";" or c == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield _Token(c, line, col)
            col += 1
            i += 1
        else:
            m = re.match(r"[^\s()#;]+", text[i:])
            word = m.group(0)
            yield _Token(word, line, col)
            col += len(word)
            i += len(word)


def _read_sexpr(tokens: List[_Token], pos: int):
    """Return (tree, next_pos); tree is a _Token or a list with opening token."""
    if pos >= len(tokens):
        last = tokens[-1] if tokens else _Token("", 1, 1)
        raise _err("unexpected end of input", last.line, last.column)
    tok = tokens[pos]
    if tok.text == "(":
        items: List = [tok]
        pos += 1
        while True:
            if pos >= len(tokens):
                raise _err("missing ')'", tok.line, tok.column)
            if tokens[pos].text == ")":
                return items, pos + 1
            node, pos = _read_sexpr(tokens, pos)
            items.append(node)
    if tok.text == ")":
        raise _err("unexpected ')'", tok.line, tok.column)
    return tok, pos + 1


class _FormulaParser:
    def __init__(self, sig: Signature):
        self.sig = sig
        self.fo_scope: List[Tuple[str, F.Var]] = []
        self.so_scope: List[Tuple[str, F.SOVar]] = []

    def _lookup_fo(self, name: str) -> Optional[F.Var]:
        for n, v in reversed(self.fo_scope):
            if n == name:
                return v
        return None

    def _lookup_so(self, name: str) -> Optional[F.SOVar]:
        for n, v in reversed(self.so_scope):
            if n == name:
                return v
        return None

    def _var(self, tok: _Token) -> F.Var:
        v = self._lookup_fo(tok.text)
        if v is None:
            raise _err(f"unbound variable {tok.text!r}", tok.line, tok.column)
        return v

    def parse(self, tree) -> F.Formula:
        if isinstance(tree, _Token):
            raise _err(f"expected a parenthesized form, got {tree.text!r}",
                       tree.line, tree.column)
        opener = tree[0]
        if len(tree) < 2:
            raise _err("empty form", opener.line, opener.column)
        head = tree[1]
        if not isinstance(head, _Token):
            raise _err("form must start with a keyword", opener.line, opener.column)
        kw = head.text
        body = tree[2:]
        if kw == "true":
            self._expect_len(body, 0, head)
            return F.TRUE
        if kw == "false":
            self._expect_len(body, 0, head)
            return F.FALSE
        if kw == "eq":
            self._expect_len(body, 2, head)
            left, right = body
            for t in (left, right):
                if not isinstance(t, _Token):
                    raise _err("eq expects two variables", head.line, head.column)
            return F.Eq(self._var(left), self._var(right))
        if kw == "atom":
            return self._parse_atom(head, body)
        if kw == "not":
            self._expect_len(body, 1, head)
            return F.Not(self.parse(body[0]))
        if kw in ("and", "or"):
            if len(body) < 2:
                raise _err(f"{kw} requires at least two subformulas",
                           head.line, head.column)
            parts = tuple(self.parse(b) for b in body)
            return F.And(parts) if kw == "and" else F.Or(parts)
        if kw in ("exists", "forall"):
            self._expect_len(body, 2, head)
            name_tok, child = body
            if not isinstance(name_tok, _Token) or not _IDENT.fullmatch(name_tok.text):
                raise _err(f"{kw} expects a variable name", head.line, head.column)
            var = F.fresh_var(name_tok.text)
            self.fo_scope.append((name_tok.text, var))
            try:
                inner = self.parse(child)
            finally:
                self.fo_scope.pop()
            return F.ExistsFO(var, inner) if kw == "exists" else F.ForallFO(var, inner)
        if kw in ("exists2", "forall2"):
            self._expect_len(body, 2, head)
            binder, child = body
            if (
                not isinstance(binder, list)
                or len(binder) != 3
                or not isinstance(binder[1], _Token)
                or not isinstance(binder[2], _Token)
            ):
                raise _err(f"{kw} expects a (NAME ARITY) binder", head.line, head.column)
            name_tok, arity_tok = binder[1], binder[2]
            if not _IDENT.fullmatch(name_tok.text):
                raise _err(f"bad SO variable name {name_tok.text!r}",
                           name_tok.line, name_tok.column)
            if not _INT.fullmatch(arity_tok.text) or int(arity_tok.text) < 1:
                raise _err(f"bad SO arity {arity_tok.text!r}",
                           arity_tok.line, arity_tok.column)
            var = F.fresh_so_var(name_tok.text, int(arity_tok.text))
            self.so_scope.append((name_tok.text, var))
            try:
                inner = self.parse(child)
            finally:
                self.so_scope.pop()
            return F.ExistsSO(var, inner) if kw == "exists2" else F.ForallSO(var, inner)
        raise _err(f"unknown keyword {kw!r}", head.line, head.column)

    def _parse_atom(self, head: _Token, body) -> F.Formula:
        if len(body) != 2 or not isinstance(body[0], _Token) or not isinstance(body[1], list):
            raise _err("atom expects (atom NAME (args...))", head.line, head.column)
        name_tok, arg_list = body
        args = []
        for t in arg_list[1:]:
            if not isinstance(t, _Token):
                raise _err("atom arguments must be variables",
                           name_tok.line, name_tok.column)
            args.append(self._var(t))
        so = self._lookup_so(name_tok.text)
        if so is not None:
            if len(args) != so.arity:
                raise _err(
                    f"SO atom {name_tok.text!r} has {len(args)} arguments, "
                    f"binder declares arity {so.arity}",
                    name_tok.line, name_tok.column)
            return F.SOAtom(so, tuple(args))
        if self.sig.has(name_tok.text):
            arity = self.sig.arity(name_tok.text)
            if len(args) != arity:
                raise _err(
                    f"atom {name_tok.text!r} has {len(args)} arguments, "
                    f"signature arity is {arity}",
                    name_tok.line, name_tok.column)
            return F.RelAtom(name_tok.text, tuple(args))
        raise _err(f"unknown relation symbol {name_tok.text!r}",
                   name_tok.line, name_tok.column)

    @staticmethod
    def _expect_len(body, n: int, head: _Token):
        if len(body) != n:
            raise _err(f"{head.text} expects {n} argument(s), got {len(body)}",
                       head.line, head.column)


def parse_formula(text: str, sig: Signature) -> F.Formula:
    """Parse a sentence; binders get fresh internal variables (alpha-normal)."""
    tokens = list(_tokenize(text))
    if not tokens:
        raise _err("empty input", 1, 1)
    tree, pos = _read_sexpr(tokens, 0)
    if pos != len(tokens):
        extra = tokens[pos]
        raise _err(f"trailing input {extra.text!r}", extra.line, extra.column)
    return _FormulaParser(sig).parse(tree)


def infer_signature(text: str) -> Signature:
    """Collect the relation symbols a formula text uses: atom heads that are
    not bound by an enclosing SO binder, with their argument counts.  Symbols
    are sorted by name; inconsistent argument counts are a parse error."""
    tokens = list(_tokenize(text))
    if not tokens:
        raise _err("empty input", 1, 1)
    tree, _ = _read_sexpr(tokens, 0)
    found: Dict[str, int] = {}

    def scan(node, so_scope: frozenset) -> None:
        if isinstance(node, _Token) or len(node) < 2 or not isinstance(node[1], _Token):
            return
        kw = node[1].text
        body = node[2:]
        if kw == "atom":
            if len(body) == 2 and isinstance(body[0], _Token) and isinstance(body[1], list):
                name = body[0].text
                if name not in so_scope:
                    count = len(body[1]) - 1
                    if found.setdefault(name, count) != count:
                        raise _err(
                            f"symbol {name!r} used with both {found[name]} and "
                            f"{count} arguments", body[0].line, body[0].column)
            return
        if kw in ("exists2", "forall2") and len(body) == 2:
            binder, child = body
            inner = so_scope
            if isinstance(binder, list) and len(binder) == 3 and isinstance(binder[1], _Token):
                inner = so_scope | {binder[1].text}
            scan(child, inner)
            return
        for item in body:
            scan(item, so_scope)

    scan(tree, frozenset())
    return Signature(sorted(found.items()))


def serialize_formula(f: F.Formula) -> str:
    """Canonical text: bound variables renamed x0,x1,.../S0,S1,... in binder order."""
    fo_names: Dict[int, str] = {}
    so_names: Dict[int, str] = {}
    counters = {"fo": 0, "so": 0}

    def fo_name(v: F.Var) -> str:
        return fo_names.get(v.uid, v.name)

    def so_name(v: F.SOVar) -> str:
        return so_names.get(v.uid, v.name)

    def emit(node: F.Formula) -> str:
        if isinstance(node, F.TrueF):
            return "(true)"
        if isinstance(node, F.FalseF):
            return "(false)"
        if isinstance(node, F.RelAtom):
            return f"(atom {node.symbol} ({' '.join(fo_name(a) for a in node.args)}))"
        if isinstance(node, F.SOAtom):
            return f"(atom {so_name(node.var)} ({' '.join(fo_name(a) for a in node.args)}))"
        if isinstance(node, F.Eq):
            return f"(eq {fo_name(node.left)} {fo_name(node.right)})"
        if isinstance(node, F.Not):
            return f"(not {emit(node.child)})"
        if isinstance(node, F.And):
            return "(and " + " ".join(emit(c) for c in node.children) + ")"
        if isinstance(node, F.Or):
            return "(or " + " ".join(emit(c) for c in node.children) + ")"
        if isinstance(node, (F.ExistsFO, F.ForallFO)):
            name = f"x{counters['fo']}"
            counters["fo"] += 1
            fo_names[node.var.uid] = name
            kw = "exists" if isinstance(node, F.ExistsFO) else "forall"
            return f"({kw} {name} {emit(node.child)})"
        if isinstance(node, (F.ExistsSO, F.ForallSO)):
            name = f"S{counters['so']}"
            counters["so"] += 1
            so_names[node.var.uid] = name
            kw = "exists2" if isinstance(node, F.ExistsSO) else "forall2"
            return f"({kw} ({name} {node.var.arity}) {emit(node.child)})"
        raise TypeError(f"not a formula node: {node!r}")

    return emit(f)


def alpha_equivalent(f: F.Formula, g: F.Formula) -> bool:
    return serialize_formula(f) == serialize_formula(g)


# ---------------------------------------------------------------------------
# QCSP instances
# ---------------------------------------------------------------------------


def parse_qcsp(text: str, template_sig: Signature):
    """Parse a QCSP instance; equality atoms are rejected."""
    from .modelcheck import QcspInstance

    lines = text.splitlines()
    prefix_line = None
    prefix_lineno = 0
    rest_start = 0
    for i, raw in enumerate(lines):
        stripped = _strip_comment(raw).strip()
        if stripped:
            prefix_line = stripped
            prefix_lineno = i + 1
            rest_start = i + 1
            break
    if prefix_line is None:
        raise _err("missing prefix line", 1, 1)

    blocks: List[Tuple[str, Tuple[str, ...]]] = []
    seen_vars: Dict[str, int] = {}
    for chunk in prefix_line.split(";"):
        words = chunk.split()
        if not words:
            raise _err("empty prefix block", prefix_lineno, 1)
        kw = words[0]
        if kw not in ("forall", "exists"):
            raise _err(f"prefix block must start with forall/exists, got {kw!r}",
                       prefix_lineno, 1)
        names = []
        for w in words[1:]:
            if not _IDENT.fullmatch(w):
                raise _err(f"bad variable name {w!r}", prefix_lineno, 1)
            if w in seen_vars:
                raise _err(f"variable {w!r} appears in two prefix blocks",
                           prefix_lineno, 1)
            seen_vars[w] = len(blocks)
            names.append(w)
        blocks.append((kw, tuple(names)))

    atoms: List[Tuple[str, Tuple[str, ...]]] = []
    atom_re = re.compile(r"([A-Za-z_][A-Za-z0-9_']*|=)\s*\(([^)]*)\)|(\S+)")
    for lineno0 in range(rest_start, len(lines)):
        line = _strip_comment(lines[lineno0]).strip()
        lineno = lineno0 + 1
        for m in atom_re.finditer(line):
            col = m.start() + 1
            if m.group(3) is not None:
                raise _err(f"bad constraint syntax {m.group(3)!r}", lineno, col)
            name = m.group(1)
            if name == "=" or (name == "eq" and not template_sig.has("eq")):
                raise _err("equality atoms are not allowed in QCSP instances",
                           lineno, col)
            if not template_sig.has(name):
                raise _err(f"unknown relation symbol {name!r}", lineno, col)
            argnames = [w.strip() for w in m.group(2).split(",")] if m.group(2).strip() else []
            arity = template_sig.arity(name)
            if len(argnames) != arity:
                raise _err(
                    f"atom {name!r} has {len(argnames)} arguments, "
                    f"template arity is {arity}", lineno, col)
            for w in argnames:
                if w not in seen_vars:
                    raise _err(f"unknown variable {w!r} in atom", lineno, col)
            atoms.append((name, tuple(argnames)))
    return QcspInstance(tuple(blocks), tuple(atoms))


# ---------------------------------------------------------------------------
# QDIMACS (quantified 3-CNF)
# ---------------------------------------------------------------------------


def parse_qdimacs3(text: str, shape: Optional[str] = None):
    """Parse the QDIMACS subset; clauses have at most three literals.

    When `shape` is given (a string over 'a'/'e'), the quantifier blocks must
    follow exactly that pattern.
    """
    from .modelcheck import Qbf3Instance

    num_vars: Optional[int] = None
    num_clauses: Optional[int] = None
    blocks: List[Tuple[str, Tuple[int, ...]]] = []
    clauses: List[Tuple[int, ...]] = []
    quantified: Dict[int, int] = {}
    in_prefix = True

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise _err("duplicate header", lineno, 1)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf" \
                    or not _INT.fullmatch(parts[2]) or not _INT.fullmatch(parts[3]):
                raise _err(f"malformed header {line!r}", lineno, 1)
            num_vars, num_clauses = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise _err("expected 'p cnf v c' header first", lineno, 1)
        if line[0] in "ae":
            if not in_prefix:
                raise _err("quantifier line after clauses", lineno, 1)
            parts = line.split()
            if parts[-1] != "0":
                raise _err("quantifier line must end with 0", lineno, 1)
            variables = []
            for w in parts[1:-1]:
                if not _INT.fullmatch(w) or int(w) == 0:
                    raise _err(f"bad variable {w!r} in quantifier line", lineno, 1)
                v = int(w)
                if v > num_vars:
                    raise _err(f"variable {v} exceeds declared count {num_vars}",
                               lineno, 1)
                if v in quantified:
                    raise _err(f"variable {v} quantified twice", lineno, 1)
                quantified[v] = len(blocks)
                variables.append(v)
            if blocks and blocks[-1][0] == parts[0]:
                raise _err("adjacent quantifier blocks must alternate", lineno, 1)
            blocks.append((parts[0], tuple(variables)))
            continue
        in_prefix = False
        parts = line.split()
        if parts[-1] != "0":
            raise _err("clause line must end with 0", lineno, 1)
        lits = []
        for w in parts[:-1]:
            if not re.fullmatch(r"-?[0-9]+", w) or int(w) == 0:
                raise _err(f"bad literal {w!r}", lineno, 1)
            lit = int(w)
            if abs(lit) > num_vars:
                raise _err(f"literal {lit} references undeclared variable", lineno, 1)
            if abs(lit) not in quantified:
                raise _err(f"literal {lit} references unquantified variable", lineno, 1)
            lits.append(lit)
        if len(lits) > 3:
            raise _err(f"clause width {len(lits)} exceeds 3", lineno, 1)
        clauses.append(tuple(lits))

    if num_vars is None:
        raise _err("missing header", 1, 1)
    if len(quantified) != num_vars:
        missing = sorted(set(range(1, num_vars + 1)) - set(quantified))
        raise _err(f"variables never quantified: {missing}", 1, 1)
    if num_clauses != len(clauses):
        raise _err(
            f"header declares {num_clauses} clauses, found {len(clauses)}", 1, 1)
    if shape is not None:
        got = "".join(q for q, _ in blocks)
        if got != shape:
            raise _err(f"prefix shape {got!r} does not match requested {shape!r}", 1, 1)
    return Qbf3Instance(tuple(blocks), tuple(clauses), num_vars)
