"""Signatures, first-order formulas, sequents, and their concrete syntax.

Concrete syntax is prefix application throughout: `name(arg1, ..., argk)` for
predicates (arguments are variables) and connectives (arguments are formulas),
`forall x. body` / `exists x. body` for quantifiers, and
`g1, ..., gn => d1, ..., dm` for sequents, with either side possibly empty.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .truthfun import TruthFunction, builtin

RESERVED = ("forall", "exists")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ParseError(Exception):
    """Malformed concrete syntax; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InvalidSignatureError(Exception):
    """A signature file or declaration violates the signature invariants."""


@dataclass(frozen=True)
class Signature:
    """Declared predicate symbols (name -> arity) and connectives (name -> table)."""

    predicates: dict[str, int]
    connectives: dict[str, TruthFunction]

    def __post_init__(self):
        for name in list(self.predicates) + list(self.connectives):
            if not _IDENT.fullmatch(name):
                raise InvalidSignatureError(f"symbol name {name!r} is not an identifier")
            if name in RESERVED:
                raise InvalidSignatureError(f"symbol name {name!r} is a reserved token")
        shared = set(self.predicates) & set(self.connectives)
        if shared:
            raise InvalidSignatureError(
                f"names used as both predicate and connective: {sorted(shared)}"
            )
        for name, arity in self.predicates.items():
            if arity < 0:
                raise InvalidSignatureError(f"predicate {name!r} has negative arity")


class Formula:
    """Base class for formula nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Conn(Formula):
    conn: str
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


def free_vars(formula: Formula) -> frozenset[str]:
    """Free variables: atoms contribute their arguments, quantifiers bind."""
    if isinstance(formula, Atom):
        return frozenset(formula.args)
    if isinstance(formula, Conn):
        out: frozenset[str] = frozenset()
        for arg in formula.args:
            out |= free_vars(arg)
        return out
    if isinstance(formula, (Forall, Exists)):
        return free_vars(formula.body) - {formula.var}
    raise TypeError(f"not a formula: {formula!r}")


def subformulas(formula: Formula) -> list[Formula]:
    """All subformulas including the formula itself, post-order, deduplicated."""
    seen: set[Formula] = set()
    out: list[Formula] = []

    def walk(node: Formula) -> None:
        if isinstance(node, Conn):
            for arg in node.args:
                walk(arg)
        elif isinstance(node, (Forall, Exists)):
            walk(node.body)
        if node not in seen:
            seen.add(node)
            out.append(node)

    walk(formula)
    return out


def render_formula(formula: Formula) -> str:
    """Canonical text; parse_formula inverts it."""
    if isinstance(formula, Atom):
        if not formula.args:
            return formula.pred
        return f"{formula.pred}({', '.join(formula.args)})"
    if isinstance(formula, Conn):
        return f"{formula.conn}({', '.join(render_formula(a) for a in formula.args)})"
    if isinstance(formula, Forall):
        return f"forall {formula.var}. {render_formula(formula.body)}"
    if isinstance(formula, Exists):
        return f"exists {formula.var}. {render_formula(formula.body)}"
    raise TypeError(f"not a formula: {formula!r}")


@dataclass(frozen=True)
class Sequent:
    """A pair of formula sets; duplicates collapse and sides are kept in
    canonical (rendered-text) order for deterministic output."""

    antecedent: tuple[Formula, ...]
    succedent: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "antecedent", _canonical_side(self.antecedent))
        object.__setattr__(self, "succedent", _canonical_side(self.succedent))

    def formulas(self) -> tuple[Formula, ...]:
        return self.antecedent + self.succedent


def _canonical_side(formulas) -> tuple[Formula, ...]:
    return tuple(sorted(set(formulas), key=render_formula))


def sequent_free_vars(sequent: Sequent) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    for f in sequent.formulas():
        out |= free_vars(f)
    return out


def render_sequent(sequent: Sequent) -> str:
    left = ", ".join(render_formula(f) for f in sequent.antecedent)
    right = ", ".join(render_formula(f) for f in sequent.succedent)
    if left:
        return f"{left} => {right}" if right else f"{left} =>"
    return f"=> {right}" if right else "=>"


def check_formula(signature: Signature, formula: Formula) -> None:
    """Validate a programmatically built formula against the signature."""
    if isinstance(formula, Atom):
        if formula.pred not in signature.predicates:
            raise ValueError(f"unknown predicate {formula.pred!r}")
        want = signature.predicates[formula.pred]
        if len(formula.args) != want:
            raise ValueError(
                f"predicate {formula.pred!r} expects {want} arguments, got {len(formula.args)}"
            )
    elif isinstance(formula, Conn):
        if formula.conn not in signature.connectives:
            raise ValueError(f"unknown connective {formula.conn!r}")
        want = signature.connectives[formula.conn].arity
        if len(formula.args) != want:
            raise ValueError(
                f"connective {formula.conn!r} expects {want} arguments, got {len(formula.args)}"
            )
        for arg in formula.args:
            check_formula(signature, arg)
    elif isinstance(formula, (Forall, Exists)):
        check_formula(signature, formula.body)
    else:
        raise TypeError(f"not a formula: {formula!r}")


# --- parsing ---------------------------------------------------------------


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("=>", i):
            tokens.append(("=>", "=>", i))
            i += 2
            continue
        if ch in "(),.":
            tokens.append((ch, ch, i))
            i += 1
            continue
        m = _IDENT.match(text, i)
        if m:
            tokens.append(("IDENT", m.group(), i))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("EOF", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, signature: Signature):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.sig = signature

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def formula(self) -> Formula:
        kind, value, at = self.peek()
        if kind != "IDENT":
            raise ParseError(f"expected a formula, found {value!r}", at)
        if value in RESERVED:
            return self.quantifier()
        return self.application()

    def quantifier(self) -> Formula:
        _, word, _ = self.next()
        _, var, at = self.expect("IDENT")
        if var in RESERVED:
            raise ParseError(f"{var!r} cannot be a variable name", at)
        self.expect(".")
        body = self.formula()
        return Forall(var, body) if word == "forall" else Exists(var, body)

    def application(self) -> Formula:
        _, name, at = self.next()
        if self.peek()[0] != "(":
            return self.bare(name, at)
        self.next()
        if name in self.sig.connectives:
            args = self.formula_args()
            want = self.sig.connectives[name].arity
            if len(args) != want:
                raise ParseError(
                    f"connective {name!r} expects {want} arguments, got {len(args)}", at
                )
            return Conn(name, tuple(args))
        if name in self.sig.predicates:
            args = self.var_args()
            want = self.sig.predicates[name]
            if len(args) != want:
                raise ParseError(
                    f"predicate {name!r} expects {want} arguments, got {len(args)}", at
                )
            return Atom(name, tuple(args))
        raise ParseError(f"unknown symbol {name!r}", at)

    def bare(self, name: str, at: int) -> Formula:
        if name in self.sig.predicates:
            if self.sig.predicates[name] != 0:
                raise ParseError(
                    f"predicate {name!r} expects {self.sig.predicates[name]} arguments, got 0",
                    at,
                )
            return Atom(name)
        if name in self.sig.connectives:
            if self.sig.connectives[name].arity != 0:
                raise ParseError(
                    f"connective {name!r} expects {self.sig.connectives[name].arity}"
                    " arguments, got 0",
                    at,
                )
            return Conn(name, ())
        raise ParseError(f"unknown symbol {name!r}", at)

    def formula_args(self) -> list[Formula]:
        args: list[Formula] = []
        if self.peek()[0] == ")":
            self.next()
            return args
        args.append(self.formula())
        while self.peek()[0] == ",":
            self.next()
            args.append(self.formula())
        self.expect(")")
        return args

    def var_args(self) -> list[str]:
        args: list[str] = []
        if self.peek()[0] == ")":
            self.next()
            return args
        while True:
            _, var, at = self.expect("IDENT")
            if var in RESERVED:
                raise ParseError(f"{var!r} cannot be a variable name", at)
            args.append(var)
            if self.peek()[0] == ",":
                self.next()
                continue
            self.expect(")")
            return args

    def side(self) -> list[Formula]:
        out: list[Formula] = []
        if self.peek()[0] in ("=>", "EOF"):
            return out
        out.append(self.formula())
        while self.peek()[0] == ",":
            self.next()
            out.append(self.formula())
        return out


def parse_formula(text: str, signature: Signature) -> Formula:
    parser = _Parser(text, signature)
    formula = parser.formula()
    kind, value, at = parser.peek()
    if kind != "EOF":
        raise ParseError(f"trailing input {value!r}", at)
    return formula


def parse_sequent(text: str, signature: Signature) -> Sequent:
    parser = _Parser(text, signature)
    antecedent = parser.side()
    parser.expect("=>")
    succedent = parser.side()
    kind, value, at = parser.peek()
    if kind != "EOF":
        raise ParseError(f"trailing input {value!r}", at)
    return Sequent(tuple(antecedent), tuple(succedent))


# --- signature files -------------------------------------------------------


def strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_signature_directive(
    line: str, lineno: int, predicates: dict[str, int], connectives: dict[str, TruthFunction]
) -> bool:
    """Consume one `pred`/`conn` line; returns False if the line is neither."""
    parts = line.split()
    if parts[0] == "pred":
        if len(parts) != 3:
            raise InvalidSignatureError(f"line {lineno}: expected 'pred NAME ARITY'")
        name = parts[1]
        try:
            arity = int(parts[2])
        except ValueError:
            raise InvalidSignatureError(f"line {lineno}: arity must be an integer") from None
        if name in predicates:
            raise InvalidSignatureError(f"line {lineno}: duplicate predicate {name!r}")
        predicates[name] = arity
        return True
    if parts[0] == "conn":
        if len(parts) == 3 and parts[2] == "builtin":
            name = parts[1]
            try:
                tf = builtin(name)
            except ValueError as exc:
                raise InvalidSignatureError(f"line {lineno}: {exc}") from None
        elif len(parts) == 4:
            name = parts[1]
            try:
                arity = int(parts[2])
            except ValueError:
                raise InvalidSignatureError(f"line {lineno}: arity must be an integer") from None
            table = parts[3]
            if any(c not in "01" for c in table) or len(table) != 1 << arity:
                raise InvalidSignatureError(
                    f"line {lineno}: table must be a bit string of length 2^{arity}"
                )
            tf = TruthFunction(arity, tuple(int(c) for c in table))
        else:
            raise InvalidSignatureError(
                f"line {lineno}: expected 'conn NAME ARITY TABLE' or 'conn NAME builtin'"
            )
        if name in connectives:
            raise InvalidSignatureError(f"line {lineno}: duplicate connective {name!r}")
        connectives[name] = tf
        return True
    return False


def parse_signature(text: str) -> Signature:
    predicates: dict[str, int] = {}
    connectives: dict[str, TruthFunction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw)
        if not line:
            continue
        if not parse_signature_directive(line, lineno, predicates, connectives):
            raise InvalidSignatureError(f"line {lineno}: unknown directive {line.split()[0]!r}")
    return Signature(predicates, connectives)


def signature_to_text(signature: Signature) -> str:
    lines = [f"pred {name} {arity}" for name, arity in signature.predicates.items()]
    lines += [
        f"conn {name} {tf.arity} {tf.table_string()}"
        for name, tf in signature.connectives.items()
    ]
    return "\n".join(lines) + ("\n" if lines else "")
