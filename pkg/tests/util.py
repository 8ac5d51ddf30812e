"""Seeded generators shared by the test modules."""

from __future__ import annotations

import itertools
import random

from kripkebench.semantics import (
    KripkeModel,
    reflexive_transitive_closure,
    validate_model,
)
from kripkebench.construct import TreeModel

DEFAULT_PREDICATES = {"p": 1, "q": 1, "r": 0}


def random_model(
    rng: random.Random,
    max_worlds: int = 4,
    max_domain: int = 2,
    predicates: dict[str, int] | None = None,
    allow_cycles: bool = False,
) -> KripkeModel:
    """A random valid model: random order, monotone domains, hereditary facts."""
    predicates = DEFAULT_PREDICATES if predicates is None else predicates
    n = rng.randint(1, max_worlds)
    worlds = tuple(f"w{i}" for i in range(n))
    pairs = [
        (f"w{i}", f"w{j}")
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < 0.5
    ]
    if allow_cycles and n >= 2 and rng.random() < 0.25:
        i = rng.randrange(n - 1)
        pairs.append((f"w{i + 1}", f"w{i}"))
    order = reflexive_transitive_closure(worlds, pairs)
    universe = tuple(f"a{k}" for k in range(max_domain))
    base = {
        w: {rng.choice(universe)} | {e for e in universe if rng.random() < 0.4}
        for w in worlds
    }
    domains = {}
    for w in worlds:
        below = set()
        for v in worlds:
            if (v, w) in order:
                below |= base[v]
        domains[w] = tuple(e for e in universe if e in below)
    facts: set = set()
    for pred, arity in predicates.items():
        for args in itertools.product(universe, repeat=arity):
            valid = [w for w in worlds if all(e in domains[w] for e in args)]
            chosen = {w for w in valid if rng.random() < 0.35}
            for w in chosen:
                for v in worlds:
                    if (w, v) in order:
                        facts.add((v, pred, args))
    model = KripkeModel(worlds, order, domains, frozenset(facts))
    assert not validate_model(model), "generator produced an invalid model"
    return model


def make_tree(
    parents: tuple[int, ...],
    domains: dict[str, tuple[str, ...]] | None = None,
    facts: frozenset = frozenset(),
) -> TreeModel:
    """Tree from a parent vector: node i+1 hangs under node parents[i].

    Default domains grow from ('a',) at the root to ('a', 'b') below it.
    """
    n = len(parents) + 1
    nodes = tuple(f"n{i}" for i in range(n))
    parent = {f"n{i + 1}": f"n{parents[i]}" for i in range(len(parents))}
    pairs = [(p, c) for c, p in parent.items()]
    order = reflexive_transitive_closure(nodes, pairs)
    if domains is None:
        domains = {
            node: ("a",) if node == "n0" else ("a", "b") for node in nodes
        }
    model = KripkeModel(nodes, order, domains, facts)
    return TreeModel(model=model, root="n0", parent=parent)


def all_tree_shapes(max_nodes: int):
    """Parent vectors of every labeled rooted tree with up to max_nodes nodes."""
    for n in range(1, max_nodes + 1):
        for parents in itertools.product(*(range(i) for i in range(1, n))):
            yield parents
