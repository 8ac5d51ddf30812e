"""Bounded model enumeration and validity verdicts.

Bounded search is sound for refutation and only bounded-complete for
validity: a Refuted verdict carries a concrete countermodel, while
ValidUpToBounds says no countermodel exists within the stated bounds.
"""

from __future__ import annotations

import itertools
import multiprocessing
import random
from dataclasses import dataclass, replace
from typing import Iterator, Optional, Union

from .semantics import KripkeModel, find_refutation
from .syntax import (
    Atom,
    Conn,
    Exists,
    Forall,
    Formula,
    Sequent,
    Signature,
    subformulas,
)
from .truthfun import (
    enumerate_truth_functions,
    is_monotonic,
    is_supermultiplicative,
)

SHAPES = ("any-preorder", "poset", "tree", "chain")
DEFAULT_BUDGET = 16

MODES = ("kripke", "cd", "classical")


@dataclass(frozen=True)
class SearchBounds:
    max_worlds: int
    max_domain: int
    shape: str = "poset"
    constant_domain: bool = False
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.max_worlds < 1 or self.max_domain < 1:
            raise ValueError("bounds must be at least 1")
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}; known: {', '.join(SHAPES)}")
        if self.max_worlds * self.max_domain > self.budget:
            raise ValueError(
                f"max_worlds * max_domain = {self.max_worlds * self.max_domain}"
                f" exceeds budget {self.budget}"
            )


@dataclass(frozen=True)
class ValidUpToBounds:
    bounds: SearchBounds


@dataclass(frozen=True)
class Refuted:
    model: KripkeModel
    world: str
    assignment: dict[str, str]


Verdict = Union[ValidUpToBounds, Refuted]


def _chain_orders(n: int) -> Iterator[frozenset[tuple[int, int]]]:
    yield frozenset((i, j) for i in range(n) for j in range(i, n))


def _tree_orders(n: int) -> Iterator[frozenset[tuple[int, int]]]:
    # rooted at 0; node i > 0 picks a parent with a smaller index
    for parents in itertools.product(*(range(i) for i in range(1, n))):
        ancestors: list[set[int]] = [{0}]
        for i in range(1, n):
            ancestors.append(ancestors[parents[i - 1]] | {i})
        yield frozenset((a, i) for i in range(n) for a in ancestors[i])


def _poset_orders(n: int) -> Iterator[frozenset[tuple[int, int]]]:
    # strict parts drawn from index-increasing pairs only: every finite
    # partial order relabels to one whose indexing is a linear extension
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for mask in range(1 << len(pairs)):
        strict = {pairs[k] for k in range(len(pairs)) if (mask >> k) & 1}
        if all(
            (a, d) in strict
            for (a, b) in strict
            for (c, d) in strict
            if b == c
        ):
            yield frozenset(strict) | frozenset((i, i) for i in range(n))


def _preorder_orders(n: int) -> Iterator[frozenset[tuple[int, int]]]:
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for mask in range(1 << len(pairs)):
        strict = {pairs[k] for k in range(len(pairs)) if (mask >> k) & 1}
        if all(
            (a, d) in strict or a == d
            for (a, b) in strict
            for (c, d) in strict
            if b == c
        ):
            yield frozenset(strict) | frozenset((i, i) for i in range(n))


_ORDER_GENERATORS = {
    "chain": _chain_orders,
    "tree": _tree_orders,
    "poset": _poset_orders,
    "any-preorder": _preorder_orders,
}


def _nonempty_subsets(universe: tuple[str, ...]) -> list[tuple[str, ...]]:
    out = []
    for mask in range(1, 1 << len(universe)):
        out.append(tuple(e for k, e in enumerate(universe) if (mask >> k) & 1))
    return out


def _upward_closed_subsets(
    candidates: tuple[int, ...], order: frozenset[tuple[int, int]]
) -> list[frozenset[int]]:
    out = []
    for mask in range(1 << len(candidates)):
        chosen = {candidates[k] for k in range(len(candidates)) if (mask >> k) & 1}
        if all((w, v) not in order or v in chosen for w in chosen for v in candidates):
            out.append(frozenset(chosen))
    return out


def enumerate_models(signature: Signature, bounds: SearchBounds) -> Iterator[KripkeModel]:
    """Deterministic stream of every valid model within the bounds.

    Worlds are w0..w{n-1}, elements a0..a{m-1}; orders, domain assignments,
    and interpretations are enumerated in a fixed construction order, and
    heredity is built in (each fact slot ranges over upward-closed world
    sets), so every yielded model is valid.
    """
    universe = tuple(f"a{k}" for k in range(bounds.max_domain))
    subsets = _nonempty_subsets(universe)
    for n in range(1, bounds.max_worlds + 1):
        worlds = tuple(f"w{i}" for i in range(n))
        for index_order in _ORDER_GENERATORS[bounds.shape](n):
            order = frozenset((worlds[a], worlds[b]) for a, b in index_order)
            if bounds.constant_domain:
                domain_choices: Iterator = ((d,) * n for d in subsets)
            else:
                domain_choices = (
                    combo
                    for combo in itertools.product(subsets, repeat=n)
                    if all(
                        set(combo[a]) <= set(combo[b])
                        for (a, b) in index_order
                        if a != b
                    )
                )
            for combo in domain_choices:
                domains = {worlds[i]: combo[i] for i in range(n)}
                slots: list[tuple[str, tuple[str, ...], list[frozenset[int]]]] = []
                for pred, arity in signature.predicates.items():
                    for args in itertools.product(universe, repeat=arity):
                        valid = tuple(
                            i for i in range(n) if all(e in set(combo[i]) for e in args)
                        )
                        if not valid:
                            continue
                        slots.append(
                            (pred, args, _upward_closed_subsets(valid, index_order))
                        )
                for choice in itertools.product(*(options for _, _, options in slots)):
                    facts = frozenset(
                        (worlds[i], pred, args)
                        for (pred, args, _), chosen in zip(slots, choice)
                        for i in chosen
                    )
                    yield KripkeModel(
                        worlds=worlds, order=order, domains=domains, facts=facts
                    )


def _formula_predicates(formula: Formula) -> set[str]:
    return {f.pred for f in subformulas(formula) if isinstance(f, Atom)}


def _restrict_to_sequent(signature: Signature, sequent: Sequent) -> Signature:
    # predicates absent from the sequent cannot affect its value; dropping
    # them keeps the enumeration small without changing any verdict
    used: set[str] = set()
    for f in sequent.formulas():
        used |= _formula_predicates(f)
    return Signature(
        {p: a for p, a in signature.predicates.items() if p in used},
        dict(signature.connectives),
    )


def _refutation_task(task) -> Optional[tuple[str, dict[str, str]]]:
    model, signature, sequent = task
    return find_refutation(model, signature, sequent)


def _batched(stream: Iterator, size: int) -> Iterator[list]:
    while True:
        batch = list(itertools.islice(stream, size))
        if not batch:
            return
        yield batch


def decide(
    signature: Signature,
    sequent: Sequent,
    mode: str,
    bounds: SearchBounds,
    workers: int = 1,
    single_succedent: bool = False,
) -> Verdict:
    """Search the bounded model class of the given mode for a countermodel.

    kripke: all models within bounds; cd: constant-domain models; classical:
    one-world models. Returns the first countermodel in construction order
    (independent of worker count), else ValidUpToBounds.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; known: {', '.join(MODES)}")
    if single_succedent and len(sequent.succedent) != 1:
        raise ValueError(
            "single-succedent restriction requires exactly one succedent formula,"
            f" got {len(sequent.succedent)}"
        )
    if workers < 1:
        raise ValueError("workers must be at least 1")
    effective = bounds
    if mode == "cd":
        effective = replace(bounds, constant_domain=True)
    elif mode == "classical":
        effective = replace(bounds, max_worlds=1)
    search_signature = _restrict_to_sequent(signature, sequent)
    stream = enumerate_models(search_signature, effective)
    if workers == 1:
        for model in stream:
            witness = find_refutation(model, signature, sequent)
            if witness is not None:
                return Refuted(model, witness[0], witness[1])
        return ValidUpToBounds(effective)
    with multiprocessing.Pool(workers) as pool:
        for batch in _batched(stream, 256):
            tasks = [(model, signature, sequent) for model in batch]
            for model, witness in zip(batch, pool.map(_refutation_task, tasks)):
                if witness is not None:
                    return Refuted(model, witness[0], witness[1])
    return ValidUpToBounds(effective)


# --- connective census and logic relations ----------------------------------


@dataclass(frozen=True)
class ConnectiveCensus:
    """Truth functions of one arity grouped by (supermultiplicative, monotonic)."""

    arity: int
    quadrants: dict[tuple[bool, bool], tuple[str, ...]]

    def count(self, supermultiplicative: bool, monotonic: bool) -> int:
        return len(self.quadrants[(supermultiplicative, monotonic)])

    def tables(self, supermultiplicative: bool, monotonic: bool) -> tuple[str, ...]:
        return self.quadrants[(supermultiplicative, monotonic)]


def classify_connectives(arity: int, cap: int = 4) -> ConnectiveCensus:
    quadrants: dict[tuple[bool, bool], list[str]] = {
        (sm, mono): [] for sm in (True, False) for mono in (True, False)
    }
    for tf in enumerate_truth_functions(arity, cap):
        sm, _ = is_supermultiplicative(tf)
        quadrants[(sm, is_monotonic(tf))].append(tf.table_string())
    return ConnectiveCensus(
        arity, {key: tuple(tables) for key, tables in quadrants.items()}
    )


@dataclass(frozen=True)
class ConnectiveProperties:
    name: str
    supermultiplicative: bool
    monotonic: bool
    witness: Optional[tuple[str, str]]  # table-violating pair, as bit strings


@dataclass(frozen=True)
class RelationReport:
    """Which of the three validity classes coincide over a signature.

    Membership of the intuitionistic class in the constant-domain class is an
    equality exactly when every connective is supermultiplicative; the
    constant-domain and classical classes coincide exactly when every
    connective is monotonic; and both together settle the third relation.
    """

    connectives: tuple[ConnectiveProperties, ...]

    @property
    def ils_equals_cds(self) -> bool:
        return all(c.supermultiplicative for c in self.connectives)

    @property
    def cds_equals_cls(self) -> bool:
        return all(c.monotonic for c in self.connectives)

    @property
    def ils_equals_cls(self) -> bool:
        return self.ils_equals_cds and self.cds_equals_cls

    def offenders(self, property_name: str) -> tuple[str, ...]:
        if property_name == "supermultiplicative":
            return tuple(c.name for c in self.connectives if not c.supermultiplicative)
        if property_name == "monotonic":
            return tuple(c.name for c in self.connectives if not c.monotonic)
        raise ValueError(f"unknown property {property_name!r}")


def report_relations(signature: Signature) -> RelationReport:
    rows = []
    for name, tf in signature.connectives.items():
        sm, witness = is_supermultiplicative(tf)
        pair = (str(witness[0]), str(witness[1])) if witness else None
        rows.append(ConnectiveProperties(name, sm, is_monotonic(tf), pair))
    return RelationReport(tuple(rows))


# --- deterministic sequent corpus -------------------------------------------


def random_formula(
    rng: random.Random,
    signature: Signature,
    max_depth: int,
    variables: tuple[str, ...] = ("x", "y"),
) -> Formula:
    """One random formula of depth <= max_depth (atoms have depth 0)."""
    preds = list(signature.predicates.items())
    conns = list(signature.connectives.items())

    def atom() -> Formula:
        name, arity = rng.choice(preds)
        return Atom(name, tuple(rng.choice(variables) for _ in range(arity)))

    def build(depth: int) -> Formula:
        if depth <= 0 or rng.random() < 0.3:
            return atom()
        kinds = ["quant"] + (["conn"] * 2 if conns else [])
        kind = rng.choice(kinds)
        if kind == "conn":
            name, tf = rng.choice(conns)
            return Conn(name, tuple(build(depth - 1) for _ in range(tf.arity)))
        var = rng.choice(variables)
        body = build(depth - 1)
        return Forall(var, body) if rng.random() < 0.5 else Exists(var, body)

    return build(max_depth)


def sequent_corpus(
    signature: Signature,
    seed: int,
    count: int,
    max_side: int = 2,
    max_depth: int = 3,
    variables: tuple[str, ...] = ("x", "y"),
) -> list[Sequent]:
    """Deterministic sample of sequents with bounded size and depth."""
    rng = random.Random(seed)
    corpus = []
    for _ in range(count):
        antecedent = tuple(
            random_formula(rng, signature, max_depth, variables)
            for _ in range(rng.randint(0, max_side))
        )
        succedent = tuple(
            random_formula(rng, signature, max_depth, variables)
            for _ in range(rng.randint(0, max_side))
        )
        corpus.append(Sequent(antecedent, succedent))
    return corpus


@dataclass(frozen=True)
class CorpusRecord:
    """Verdict triple for one corpus sequent, with consistency flags."""

    sequent: Sequent
    kripke_refuted: Optional[bool]
    cd_refuted: Optional[bool]
    classical_refuted: Optional[bool]
    inconclusive: bool
    note: str


def check_relations_on_corpus(
    signature: Signature,
    corpus: list[Sequent],
    small: SearchBounds,
    large: SearchBounds,
) -> list[CorpusRecord]:
    """Cross-mode consistency sweep used by the desk-scale theorem checks.

    For each sequent: a cd refutation at the small bounds must be matched by
    a kripke refutation at the large bounds (constant-domain models are
    Kripke models); for all-monotonic signatures a cd refutation must be
    matched classically; signatures that guarantee coincidence but where the
    bounded search exhausts its budget are reported inconclusive, never
    failed, since only existence of a countermodel is guaranteed, not size.
    """
    report = report_relations(signature)
    records = []
    for sequent in corpus:
        cd = decide(signature, sequent, "cd", small)
        cd_refuted = isinstance(cd, Refuted)
        kripke_refuted = None
        classical_refuted = None
        inconclusive = False
        note = ""
        if cd_refuted:
            kripke = decide(signature, sequent, "kripke", large)
            kripke_refuted = isinstance(kripke, Refuted)
            if not kripke_refuted:
                note = "cd-refuted but kripke search found nothing at larger bounds"
                inconclusive = True
            if report.cds_equals_cls:
                classical = decide(signature, sequent, "classical", small)
                classical_refuted = isinstance(classical, Refuted)
                if not classical_refuted:
                    note = "cd-refuted but classical search exhausted its bounds"
                    inconclusive = True
        records.append(
            CorpusRecord(sequent, kripke_refuted, cd_refuted, classical_refuted, inconclusive, note)
        )
    return records
