"""Finite Kripke models, formula and sequent evaluation, validity on a model.

A model is a preordered set of worlds with monotone nonempty domains and a
hereditary interpretation. Only 1-entries of the interpretation are stored;
everything unstated is 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from .syntax import (
    Atom,
    Conn,
    Exists,
    Forall,
    Formula,
    InvalidSignatureError,
    Sequent,
    Signature,
    free_vars,
    sequent_free_vars,
    strip_comment,
    parse_signature_directive,
)

Fact = tuple[str, str, tuple[str, ...]]


class InvalidModelError(Exception):
    """A model file or model value violates the model invariants."""


@dataclass(frozen=True, eq=True)
class KripkeModel:
    """Worlds with a preorder, per-world domains, and stored 1-facts.

    `worlds` order and per-world element order are significant: they fix the
    canonical enumeration order of counterwitnesses.
    """

    worlds: tuple[str, ...]
    order: frozenset[tuple[str, str]]
    domains: dict[str, tuple[str, ...]]
    facts: frozenset[Fact]

    def successors(self, world: str) -> tuple[str, ...]:
        return tuple(v for v in self.worlds if (world, v) in self.order)


def reflexive_transitive_closure(
    worlds: Iterable[str], pairs: Iterable[tuple[str, str]]
) -> frozenset[tuple[str, str]]:
    worlds = list(worlds)
    reach = {w: {w} for w in worlds}
    for a, b in pairs:
        reach[a].add(b)
    changed = True
    while changed:
        changed = False
        for w in worlds:
            extra = set()
            for v in reach[w]:
                extra |= reach[v]
            if not extra <= reach[w]:
                reach[w] |= extra
                changed = True
    return frozenset((w, v) for w in worlds for v in reach[w])


def validate_model(model: KripkeModel) -> list[str]:
    """All invariant violations, as human-readable strings; empty means valid."""
    violations: list[str] = []
    worlds = model.worlds
    world_set = set(worlds)
    if len(world_set) != len(worlds):
        violations.append("duplicate world names")
    if set(model.domains) != world_set:
        violations.append("domains must be declared for exactly the declared worlds")
        return violations

    ordered_pairs = sorted(model.order)
    for a, b in ordered_pairs:
        if a not in world_set or b not in world_set:
            violations.append(f"order pair ({a}, {b}) mentions an undeclared world")
    for w in worlds:
        if (w, w) not in model.order:
            violations.append(f"order is not reflexive at {w}")
    for a, b in ordered_pairs:
        for c, d in ordered_pairs:
            if b == c and (a, d) not in model.order:
                violations.append(f"order is not transitive: {a} <= {b} <= {d}")

    domain_sets = {w: set(model.domains[w]) for w in worlds}
    for w in worlds:
        if not model.domains[w]:
            violations.append(f"domain of {w} is empty")
        if len(domain_sets[w]) != len(model.domains[w]):
            violations.append(f"domain of {w} lists duplicate elements")
    for a, b in ordered_pairs:
        if a in domain_sets and b in domain_sets and not domain_sets[a] <= domain_sets[b]:
            missing = sorted(domain_sets[a] - domain_sets[b])
            violations.append(f"domain not monotone: {missing} in D({a}) but not D({b})")

    arities: dict[str, int] = {}
    for w, pred, args in sorted(model.facts):
        if w not in world_set:
            violations.append(f"fact at undeclared world {w}")
            continue
        if pred in arities and arities[pred] != len(args):
            violations.append(f"predicate {pred} used with inconsistent arities")
        arities.setdefault(pred, len(args))
        for e in args:
            if e not in domain_sets[w]:
                violations.append(f"fact {pred}{args} at {w} uses {e} outside D({w})")
    # heredity: each stored 1-entry must persist at every successor
    for w, pred, args in sorted(model.facts):
        if w not in world_set:
            continue
        for v in model.successors(w):
            if (v, pred, args) not in model.facts:
                violations.append(
                    f"heredity violated: {pred}{args} is 1 at {w} but 0 at {v} >= {w}"
                )
    return violations


def is_constant_domain(model: KripkeModel) -> bool:
    """Whether all worlds share one domain (assumes a valid model)."""
    sets = {frozenset(model.domains[w]) for w in model.worlds}
    return len(sets) <= 1


class Evaluator:
    """Evaluates formulas on one validated model.

    Results are memoized per (world, formula, bindings restricted to the free
    variables), so a shared evaluator never changes values, only speed.
    """

    def __init__(self, model: KripkeModel, signature: Signature):
        self.model = model
        self.signature = signature
        self._succ = {w: model.successors(w) for w in model.worlds}
        self._domain_sets = {w: frozenset(model.domains[w]) for w in model.worlds}
        self._memo: dict = {}
        self._fv: dict[Formula, tuple[str, ...]] = {}

    def _sorted_fv(self, formula: Formula) -> tuple[str, ...]:
        got = self._fv.get(formula)
        if got is None:
            got = tuple(sorted(free_vars(formula)))
            self._fv[formula] = got
        return got

    def value(self, world: str, assignment: dict[str, str], formula: Formula) -> int:
        if world not in self._domain_sets:
            raise ValueError(f"unknown world {world!r}")
        for x in self._sorted_fv(formula):
            if x not in assignment:
                raise ValueError(f"unbound free variable {x!r}")
            if assignment[x] not in self._domain_sets[world]:
                raise ValueError(
                    f"assignment sends {x!r} to {assignment[x]!r}, not in D({world})"
                )
        return self._value(world, assignment, formula)

    def _value(self, world: str, assignment: dict[str, str], formula: Formula) -> int:
        key = (
            world,
            formula,
            tuple(assignment[x] for x in self._sorted_fv(formula)),
        )
        got = self._memo.get(key)
        if got is not None:
            return got
        result = self._compute(world, assignment, formula)
        self._memo[key] = result
        return result

    def _compute(self, world: str, assignment: dict[str, str], formula: Formula) -> int:
        if isinstance(formula, Atom):
            args = tuple(assignment[x] for x in formula.args)
            return 1 if (world, formula.pred, args) in self.model.facts else 0
        if isinstance(formula, Conn):
            tf = self.signature.connectives[formula.conn]
            for v in self._succ[world]:
                index = 0
                for arg in formula.args:
                    index = (index << 1) | self._value(v, assignment, arg)
                if not tf.table[index]:
                    return 0
            return 1
        if isinstance(formula, Forall):
            for v in self._succ[world]:
                for a in self.model.domains[v]:
                    if not self._value(v, {**assignment, formula.var: a}, formula.body):
                        return 0
            return 1
        if isinstance(formula, Exists):
            for a in self.model.domains[world]:
                if self._value(world, {**assignment, formula.var: a}, formula.body):
                    return 1
            return 0
        raise TypeError(f"not a formula: {formula!r}")

    def sequent_value(self, world: str, assignment: dict[str, str], sequent: Sequent) -> int:
        for f in sequent.antecedent:
            if self.value(world, assignment, f) != 1:
                return 1
        for f in sequent.succedent:
            if self.value(world, assignment, f) != 0:
                return 1
        return 0


def eval_formula(
    model: KripkeModel,
    signature: Signature,
    world: str,
    assignment: dict[str, str],
    formula: Formula,
) -> int:
    return Evaluator(model, signature).value(world, assignment, formula)


def eval_sequent(
    model: KripkeModel,
    signature: Signature,
    world: str,
    assignment: dict[str, str],
    sequent: Sequent,
) -> int:
    return Evaluator(model, signature).sequent_value(world, assignment, sequent)


def find_refutation(
    model: KripkeModel,
    signature: Signature,
    sequent: Sequent,
    single_succedent: bool = False,
) -> Optional[tuple[str, dict[str, str]]]:
    """First point (world, assignment) where the sequent gets value 0.

    Worlds are scanned in declaration order, assignments with variables in
    sorted order and elements in declaration order; returns None when the
    model validates the sequent.
    """
    if single_succedent and len(sequent.succedent) != 1:
        raise ValueError(
            f"single-succedent restriction requires exactly one succedent formula,"
            f" got {len(sequent.succedent)}"
        )
    variables = sorted(sequent_free_vars(sequent))
    evaluator = Evaluator(model, signature)
    for w in model.worlds:
        for combo in itertools.product(model.domains[w], repeat=len(variables)):
            assignment = dict(zip(variables, combo))
            if evaluator.sequent_value(w, assignment, sequent) == 0:
                return w, assignment
    return None


def model_validates(
    model: KripkeModel,
    signature: Signature,
    sequent: Sequent,
    single_succedent: bool = False,
) -> bool:
    return find_refutation(model, signature, sequent, single_succedent) is None


def classical_eval(
    signature: Signature,
    domain: tuple[str, ...],
    facts: frozenset[tuple[str, tuple[str, ...]]],
    assignment: dict[str, str],
    formula: Formula,
) -> int:
    """Plain truth-table evaluation over one nonempty domain.

    Independent of the Kripke evaluator; coincides with it on the induced
    one-world model.
    """
    if not domain:
        raise ValueError("classical evaluation needs a nonempty domain")
    if isinstance(formula, Atom):
        for x in formula.args:
            if x not in assignment:
                raise ValueError(f"unbound free variable {x!r}")
        args = tuple(assignment[x] for x in formula.args)
        return 1 if (formula.pred, args) in facts else 0
    if isinstance(formula, Conn):
        tf = signature.connectives[formula.conn]
        index = 0
        for arg in formula.args:
            index = (index << 1) | classical_eval(signature, domain, facts, assignment, arg)
        return tf.table[index]
    if isinstance(formula, Forall):
        return (
            1
            if all(
                classical_eval(
                    signature, domain, facts, {**assignment, formula.var: a}, formula.body
                )
                for a in domain
            )
            else 0
        )
    if isinstance(formula, Exists):
        return (
            1
            if any(
                classical_eval(
                    signature, domain, facts, {**assignment, formula.var: a}, formula.body
                )
                for a in domain
            )
            else 0
        )
    raise TypeError(f"not a formula: {formula!r}")


def one_world_model(
    domain: tuple[str, ...], facts: Iterable[tuple[str, tuple[str, ...]]], world: str = "w0"
) -> KripkeModel:
    """The one-world Kripke model induced by a classical structure."""
    return KripkeModel(
        worlds=(world,),
        order=frozenset({(world, world)}),
        domains={world: tuple(domain)},
        facts=frozenset((world, pred, args) for pred, args in facts),
    )


# --- model files -------------------------------------------------------------
#
# Line format ('#' starts a comment):
#   pred NAME ARITY / conn NAME ARITY TABLE / conn NAME builtin   (optional)
#   worlds: w1 w2 ...
#   order: w1 w2            one generating pair per line, closed by the loader
#   domain w1: a1 a2
#   fact w1: p(a1, a2)      0-ary facts as `fact w1: T` or `fact w1: T()`
# Unstated facts are 0.


def parse_model_text(text: str) -> tuple[KripkeModel, Signature]:
    predicates: dict[str, int] = {}
    connectives = {}
    worlds: list[str] = []
    pairs: list[tuple[str, str]] = []
    domains: dict[str, list[str]] = {}
    facts: set[Fact] = set()

    def fail(lineno: int, message: str) -> None:
        raise InvalidModelError(f"line {lineno}: {message}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw)
        if not line:
            continue
        try:
            if parse_signature_directive(line, lineno, predicates, connectives):
                continue
        except InvalidSignatureError as exc:
            raise InvalidModelError(str(exc)) from None
        head, _, rest = line.partition(":")
        head = head.strip()
        rest = rest.strip()
        if ":" not in line:
            fail(lineno, f"unknown directive {line.split()[0]!r}")
        if head == "worlds":
            for w in rest.split():
                if w in worlds:
                    fail(lineno, f"duplicate world {w!r}")
                worlds.append(w)
        elif head == "order":
            pair = rest.split()
            if len(pair) != 2:
                fail(lineno, "expected 'order: LOWER UPPER'")
            pairs.append((pair[0], pair[1]))
        elif head.split()[0] == "domain":
            parts = head.split()
            if len(parts) != 2:
                fail(lineno, "expected 'domain WORLD: elements'")
            w = parts[1]
            bucket = domains.setdefault(w, [])
            for e in rest.split():
                if e in bucket:
                    fail(lineno, f"duplicate element {e!r} in domain of {w}")
                bucket.append(e)
        elif head.split()[0] == "fact":
            parts = head.split()
            if len(parts) != 2:
                fail(lineno, "expected 'fact WORLD: pred(args)'")
            w = parts[1]
            name, paren, argtext = rest.partition("(")
            name = name.strip()
            if paren:
                if not argtext.endswith(")"):
                    fail(lineno, "unbalanced parentheses in fact")
                argtext = argtext[:-1]
                args = tuple(a.strip() for a in argtext.split(",")) if argtext.strip() else ()
            else:
                args = ()
            if not name:
                fail(lineno, "fact is missing a predicate name")
            facts.add((w, name, args))
        else:
            fail(lineno, f"unknown directive {head!r}")

    known = set(worlds)
    for a, b in pairs:
        if a not in known or b not in known:
            raise InvalidModelError(f"order pair ({a}, {b}) mentions an undeclared world")
    for w in domains:
        if w not in known:
            raise InvalidModelError(f"domain declared for undeclared world {w!r}")
    for w, pred, args in sorted(facts):
        if w not in known:
            raise InvalidModelError(f"fact declared at undeclared world {w!r}")
        declared = predicates.get(pred)
        if declared is not None and declared != len(args):
            raise InvalidModelError(
                f"fact {pred}{args} clashes with declared arity {declared}"
            )
        predicates.setdefault(pred, len(args))

    model = KripkeModel(
        worlds=tuple(worlds),
        order=reflexive_transitive_closure(worlds, pairs),
        domains={w: tuple(domains.get(w, ())) for w in worlds},
        facts=frozenset(facts),
    )
    violations = validate_model(model)
    if violations:
        raise InvalidModelError("invalid model:\n" + "\n".join(violations))
    return model, Signature(predicates, connectives)


def model_to_text(model: KripkeModel, signature: Optional[Signature] = None) -> str:
    lines = []
    if signature is not None:
        for name, arity in signature.predicates.items():
            lines.append(f"pred {name} {arity}")
        for name, tf in signature.connectives.items():
            lines.append(f"conn {name} {tf.arity} {tf.table_string()}")
    lines.append("worlds: " + " ".join(model.worlds))
    index = {w: i for i, w in enumerate(model.worlds)}
    for a, b in sorted(model.order, key=lambda p: (index[p[0]], index[p[1]])):
        if a != b:
            lines.append(f"order: {a} {b}")
    for w in model.worlds:
        lines.append(f"domain {w}: " + " ".join(model.domains[w]))
    for w, pred, args in sorted(model.facts, key=lambda f: (index[f[0]], f[1], f[2])):
        rendered = f"{pred}({', '.join(args)})" if args else pred
        lines.append(f"fact {w}: {rendered}")
    return "\n".join(lines) + "\n"


def load_model(path: str) -> tuple[KripkeModel, Signature]:
    with open(path, encoding="utf-8") as handle:
        return parse_model_text(handle.read())
