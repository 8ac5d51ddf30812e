import random

import pytest

from kripkebench.construct import (
    ChoiceFunction,
    bar_precondition_violation,
    bars,
    check_choice_function,
    check_main_lemma_instance,
    complete_to_constant_domain,
    constant_domain_pipeline,
    deepest_common_ancestor,
    enumerate_choice_functions,
    extend_choice,
    is_upward_closed,
    lift_assignment,
    partition_upward_closed,
    tree_from_model,
    unravel_strict,
    unravel_stuttered,
)
from kripkebench.semantics import (
    Evaluator,
    InvalidModelError,
    KripkeModel,
    is_constant_domain,
    reflexive_transitive_closure,
    validate_model,
)
from kripkebench.search import random_formula
from kripkebench.syntax import Atom, Conn, Exists, Forall, Signature, free_vars, parse_formula, parse_sequent
from kripkebench.synthesize import separating_countermodel
from kripkebench.truthfun import builtin

from util import all_tree_shapes, make_tree, random_model


@pytest.fixture
def separating():
    return separating_countermodel()


@pytest.fixture
def separating_sig():
    return Signature({"p": 1, "q": 1, "T": 0, "R": 0}, {"or": builtin("or")})


def diamond():
    worlds = ("r", "m1", "m2", "t")
    return KripkeModel(
        worlds=worlds,
        order=reflexive_transitive_closure(
            worlds, [("r", "m1"), ("r", "m2"), ("m1", "t"), ("m2", "t")]
        ),
        domains={w: ("a",) for w in worlds},
        facts=frozenset({("t", "p", ("a",))}),
    )


def formulas_up_to_depth_two(sig):
    """Every formula of depth <= 2 over p/1, q/1, T/0 with one binary
    connective and variable x; the depth-2 layer samples connective wrappers
    over the full depth-1 layer."""
    level0 = [Atom("p", ("x",)), Atom("q", ("x",)), Atom("T")]
    level1 = list(level0)
    for f in level0:
        level1.append(Forall("x", f))
        level1.append(Exists("x", f))
        for g in level0:
            level1.append(Conn("or", (f, g)))
    level2 = list(level1)
    for f in level1[:10]:
        for g in level1[:10]:
            level2.append(Conn("or", (f, g)))
        level2.append(Forall("x", f))
        level2.append(Exists("x", f))
    return level2


class TestUnravelStrict:
    def test_two_world_chain(self, separating):
        tree = unravel_strict(separating, "w1")
        assert tree.nodes == ("w1", "w1/w2")
        assert tree.root == "w1"
        assert tree.last == {"w1": "w1", "w1/w2": "w2"}
        assert not tree.truncated

    def test_values_preserved_on_chain(self, separating, separating_sig):
        tree = unravel_strict(separating, "w1")
        source = Evaluator(separating, separating_sig)
        lifted = Evaluator(tree.model, separating_sig)
        for formula in formulas_up_to_depth_two(separating_sig):
            for node in tree.nodes:
                for a in tree.model.domains[node]:
                    rho = {"x": a}
                    assert lifted.value(node, rho, formula) == source.value(
                        tree.last[node], rho, formula
                    )

    def test_one_world(self):
        model = KripkeModel(
            worlds=("w",), order=frozenset({("w", "w")}), domains={"w": ("a",)},
            facts=frozenset(),
        )
        tree = unravel_strict(model, "w")
        assert tree.nodes == ("w",)

    def test_diamond_duplicates_top(self):
        tree = unravel_strict(diamond(), "r")
        assert len(tree.nodes) == 5
        assert set(tree.nodes) == {"r", "r/m1", "r/m2", "r/m1/t", "r/m2/t"}

    def test_rejects_cycles_and_points_at_stuttered(self):
        worlds = ("w0", "w1")
        cyclic = KripkeModel(
            worlds=worlds,
            order=reflexive_transitive_closure(worlds, [("w0", "w1"), ("w1", "w0")]),
            domains={w: ("a",) for w in worlds},
            facts=frozenset(),
        )
        with pytest.raises(ValueError, match="unravel_stuttered"):
            unravel_strict(cyclic, "w0")

    def test_unknown_start(self, separating):
        with pytest.raises(ValueError):
            unravel_strict(separating, "w9")

    def test_values_preserved_on_random_posets(self):
        rng = random.Random(42)
        sig = Signature(
            {"p": 1, "q": 1, "r": 0},
            {"not": builtin("not"), "and": builtin("and"), "or": builtin("or")},
        )
        for _ in range(15):
            model = random_model(rng)
            tree = unravel_strict(model, model.worlds[0])
            source = Evaluator(model, sig)
            lifted = Evaluator(tree.model, sig)
            for _ in range(8):
                formula = random_formula(rng, sig, 3, ("x",))
                for node in tree.nodes:
                    for a in tree.model.domains[node]:
                        rho = {"x": a}
                        assert lifted.value(node, rho, formula) == source.value(
                            tree.last[node], rho, formula
                        )


class TestUnravelStuttered:
    def test_length_one_is_single_node(self, separating):
        tree = unravel_stuttered(separating, "w1", 1)
        assert tree.nodes == ("w1",)
        assert tree.truncated

    def test_node_count_matches_direct_enumeration(self, separating):
        # oracle: non-decreasing sequences from w1 of total length <= 3
        order = {("w1", "w1"), ("w1", "w2"), ("w2", "w2")}
        expected = []
        frontier = [("w1",)]
        while frontier:
            seq = frontier.pop(0)
            expected.append(seq)
            if len(seq) < 3:
                for nxt in ("w1", "w2"):
                    if (seq[-1], nxt) in order:
                        frontier.append(seq + (nxt,))
        tree = unravel_stuttered(separating, "w1", 3)
        assert len(tree.nodes) == len(expected) == 6

    def test_last_is_final_component(self, separating):
        tree = unravel_stuttered(separating, "w1", 3)
        assert tree.last["w1/w1/w2"] == "w2"

    def test_accepts_cycles(self):
        worlds = ("w0", "w1")
        cyclic = KripkeModel(
            worlds=worlds,
            order=reflexive_transitive_closure(worlds, [("w0", "w1"), ("w1", "w0")]),
            domains={w: ("a",) for w in worlds},
            facts=frozenset(),
        )
        tree = unravel_stuttered(cyclic, "w0", 2)
        assert len(tree.nodes) == 3  # w0; w0/w0, w0/w1


class TestBars:
    def test_node_bars_itself(self):
        tree = make_tree((0, 0))
        assert bars(tree, "n1", frozenset({"n1"}))

    def test_leaves_bar_everything(self):
        tree = make_tree((0, 0, 1))
        leaves = frozenset(tree.leaves())
        for node in tree.nodes:
            assert bars(tree, node, leaves)

    def test_one_of_two_sibling_leaves_does_not_bar_parent(self):
        tree = make_tree((0, 0))
        assert not bars(tree, "n0", frozenset({"n1"}))


class TestPartition:
    def test_upset_is_single_block(self):
        tree = make_tree((0, 1, 1))
        upset = tree.upset("n1")
        assert partition_upward_closed(tree, upset) == [("n1", upset)]

    def test_two_incomparable_leaf_upsets(self):
        tree = make_tree((0, 0))
        blocks = partition_upward_closed(tree, frozenset({"n1", "n2"}))
        assert blocks == [("n1", frozenset({"n1"})), ("n2", frozenset({"n2"}))]

    def test_empty_set(self):
        tree = make_tree((0,))
        assert partition_upward_closed(tree, frozenset()) == []

    def test_rejects_non_upward_closed(self):
        tree = make_tree((0, 1))
        with pytest.raises(ValueError):
            partition_upward_closed(tree, frozenset({"n1"}))

    def test_postconditions_exhaustively_on_small_trees(self):
        for parents in all_tree_shapes(5):
            tree = make_tree(parents)
            nodes = tree.nodes
            for mask in range(1 << len(nodes)):
                subset = frozenset(nodes[k] for k in range(len(nodes)) if (mask >> k) & 1)
                if not is_upward_closed(tree, subset):
                    continue
                blocks = partition_upward_closed(tree, subset)
                union = set()
                for minimum, block in blocks:
                    assert not union & block  # disjoint
                    union |= block
                    assert is_upward_closed(tree, block)
                    assert minimum in block
                    assert all(
                        (minimum, member) in tree.model.order for member in block
                    )
                assert union == set(subset)  # covering


class TestDeepestCommonAncestor:
    def test_matches_order_infimum_on_small_trees(self):
        for parents in all_tree_shapes(5):
            tree = make_tree(parents)
            order = tree.model.order
            for a in tree.nodes:
                for b in tree.nodes:
                    meet = deepest_common_ancestor(tree, a, b)
                    assert (meet, a) in order and (meet, b) in order
                    for c in tree.nodes:
                        if (c, a) in order and (c, b) in order:
                            assert (c, meet) in order


class TestExtendChoice:
    def test_pin_at_root_with_full_barrier(self, separating):
        tree = unravel_strict(separating, "w1")
        everything = frozenset(tree.nodes)
        got = extend_choice(tree, everything, tree.root, {tree.root: "a1"})
        assert got.as_dict() == {"w1": "a1", "w1/w2": "a1"}
        assert check_choice_function(tree, got) == []

    def test_leaf_barrier_pins_one_leaf_defaults_the_rest(self):
        tree = make_tree((0, 0, 0))
        leaves = frozenset(tree.leaves())
        got = extend_choice(tree, leaves, "n1", {"n1": "b"})
        assert got.as_dict() == {"n1": "b", "n2": "a", "n3": "a"}
        assert check_choice_function(tree, got) == []

    def test_rejects_wrong_pins(self, separating):
        tree = unravel_strict(separating, "w1")
        everything = frozenset(tree.nodes)
        with pytest.raises(ValueError):
            extend_choice(tree, everything, tree.root, {})
        with pytest.raises(ValueError):
            extend_choice(tree, everything, tree.root, {tree.root: "a2"})

    def test_rejects_bad_barrier(self, separating):
        tree = unravel_strict(separating, "w1")
        with pytest.raises(ValueError):
            extend_choice(tree, frozenset({tree.root}), tree.root, {tree.root: "a1"})


class TestChoiceFunctionEnumeration:
    def test_single_node_tree(self):
        tree = make_tree((), domains={"n0": ("a", "b", "c")})
        functions = list(enumerate_choice_functions(tree))
        assert [f.as_dict() for f in functions] == [
            {"n0": "a"},
            {"n0": "b"},
            {"n0": "c"},
        ]

    def test_chain_values_constant_once_root_included(self):
        tree = make_tree((0,))
        functions = [f.as_dict() for f in enumerate_choice_functions(tree)]
        assert {"n0": "a", "n1": "a"} in functions
        assert {"n0": "a", "n1": "b"} not in functions

    def test_unraveled_two_chain_has_three(self, separating):
        tree = unravel_strict(separating, "w1")
        functions = [f.as_dict() for f in enumerate_choice_functions(tree)]
        assert functions == [
            {"w1/w2": "a1"},
            {"w1/w2": "a2"},
            {"w1": "a1", "w1/w2": "a1"},
        ]

    def test_every_function_satisfies_invariants(self):
        for parents in all_tree_shapes(4):
            tree = make_tree(parents)
            for f in enumerate_choice_functions(tree):
                assert check_choice_function(tree, f) == []

    def test_budget(self, separating):
        tree = unravel_strict(separating, "w1")
        with pytest.raises(ValueError):
            list(enumerate_choice_functions(tree, max_count=2))


class TestCompletion:
    def test_constant_domain_and_valid(self, separating, separating_sig):
        tree = unravel_strict(separating, "w1")
        completion = complete_to_constant_domain(tree, separating_sig)
        assert is_constant_domain(completion.model)
        assert validate_model(completion.model) == []

    def test_zero_ary_clause(self):
        # r true only at the leaf: at the root the universal sweep fails
        tree = make_tree((0,), facts=frozenset({("n1", "r", ())}))
        completion = complete_to_constant_domain(tree)
        assert ("n1", "r", ()) in completion.model.facts
        assert ("n0", "r", ()) not in completion.model.facts

    def test_leaf_valued_function_reads_leaf_fact(self, separating, separating_sig):
        tree = unravel_strict(separating, "w1")
        completion = complete_to_constant_domain(tree, separating_sig)
        leaf_a2 = completion.function_id(ChoiceFunction.from_map({"w1/w2": "a2"}))
        # p(a2) is 0 at the source leaf, so the fact is absent at the root
        assert (tree.root, "p", (leaf_a2,)) not in completion.model.facts
        leaf_a1 = completion.function_id(ChoiceFunction.from_map({"w1/w2": "a1"}))
        assert (tree.root, "p", (leaf_a1,)) in completion.model.facts

    def test_valid_on_small_random_trees(self):
        rng = random.Random(9)
        for _ in range(15):
            model = random_model(rng, max_worlds=3)
            tree = unravel_strict(model, model.worlds[0])
            completion = complete_to_constant_domain(tree)
            assert validate_model(completion.model) == []


class TestLiftAssignment:
    def test_empty(self, separating, separating_sig):
        tree = unravel_strict(separating, "w1")
        completion = complete_to_constant_domain(tree, separating_sig)
        assert lift_assignment(completion, {}) == {}

    def test_constant_total_function(self, separating, separating_sig):
        tree = unravel_strict(separating, "w1")
        completion = complete_to_constant_domain(tree, separating_sig)
        lifted = lift_assignment(completion, {"x": "a1"})
        function = completion.functions[lifted["x"]]
        assert function.domain == set(tree.nodes)
        assert {function.value(n) for n in tree.nodes} == {"a1"}
        assert check_choice_function(tree, function) == []

    def test_rejects_elements_outside_root_domain(self, separating, separating_sig):
        tree = unravel_strict(separating, "w1")
        completion = complete_to_constant_domain(tree, separating_sig)
        with pytest.raises(ValueError):
            lift_assignment(completion, {"x": "a2"})


class TestMainLemmaInstances:
    def test_atomic_values_always_agree(self):
        # for atoms the two sides coincide by construction of the completion
        rng = random.Random(17)
        sig = Signature({"p": 1, "r": 0}, {})
        for _ in range(10):
            model = random_model(rng, max_worlds=3, predicates={"p": 1, "r": 0})
            tree = unravel_strict(model, model.worlds[0])
            completion = complete_to_constant_domain(tree, sig)
            for formula in (parse_formula("p(x)", sig), parse_formula("r", sig)):
                variables = sorted(free_vars(formula))
                for name in completion.model.domains[tree.root]:
                    lifted = {v: name for v in variables}
                    report = check_main_lemma_instance(
                        tree, sig, formula, tree.root, lifted, completion
                    )
                    assert (report.completed_value == 1) == report.pointwise_condition

    def test_flip_at_leaf_fails_precondition_at_root(self):
        model = KripkeModel(
            worlds=("r", "l"),
            order=reflexive_transitive_closure(("r", "l"), [("r", "l")]),
            domains={"r": ("a",), "l": ("a",)},
            facts=frozenset({("l", "p", ("a",))}),
        )
        sig = Signature({"p": 1}, {})
        tree = tree_from_model(model)
        completion = complete_to_constant_domain(tree, sig)
        lifted = lift_assignment(completion, {"x": "a"})
        report = check_main_lemma_instance(
            tree, sig, parse_formula("p(x)", sig), "r", lifted, completion
        )
        assert report.status == "precondition-failed"
        assert report.bar_violation.node == "r"
        assert report.bar_violation.value == 0

    def test_constant_values_hold(self):
        sig = Signature({"p": 0, "q": 0}, {"and": builtin("and")})
        tree = make_tree(
            (0, 0),
            domains={n: ("a",) for n in ("n0", "n1", "n2")},
            facts=frozenset((n, "p", ()) for n in ("n0", "n1", "n2")),
        )
        completion = complete_to_constant_domain(tree, sig)
        for text in ("p", "q", "and(p, q)"):
            report = check_main_lemma_instance(
                tree, sig, parse_formula(text, sig), "n0", {}, completion
            )
            assert report.status == "holds"

    def test_bar_precondition_reports_first_violation(self):
        tree = make_tree((0,), facts=frozenset({("n1", "r", ())}))
        sig = Signature({"r": 0}, {})
        violation = bar_precondition_violation(tree, sig, parse_formula("r", sig))
        assert violation is not None and violation.node == "n0"

    def test_never_fails_when_bar_determined_over_meet_closed_connectives(self):
        # with every subformula bar-determined and a connective whose 1-inputs
        # are closed under meets, the two sides must agree at every instance;
        # a reported "fails" would expose a bug in the completion
        import itertools as it

        from kripkebench.construct import pointwise_condition
        from kripkebench.semantics import eval_formula

        sig = Signature({"p": 1, "s": 0}, {"and": builtin("and")})
        formulas = [
            parse_formula(text, sig)
            for text in (
                "s",
                "p(x)",
                "and(s, p(x))",
                "forall x. p(x)",
                "exists x. p(x)",
                "and(forall x. p(x), s)",
                "exists x. and(p(x), s)",
            )
        ]
        instances = 0
        holds = 0
        for parents in all_tree_shapes(3):
            base = make_tree(parents)
            slots = []
            for pred, args_options in (("s", [()]), ("p", [("a",), ("b",)])):
                for args in args_options:
                    valid = tuple(
                        n
                        for n in base.nodes
                        if all(e in base.model.domains[n] for e in args)
                    )
                    if not valid:
                        continue
                    options = [
                        frozenset(chosen)
                        for mask in range(1 << len(valid))
                        for chosen in [
                            {valid[k] for k in range(len(valid)) if (mask >> k) & 1}
                        ]
                        if all(
                            (w, v) not in base.model.order or v in chosen
                            for w in chosen
                            for v in valid
                        )
                    ]
                    slots.append((pred, args, options))
            for choice in it.product(*(options for _, _, options in slots)):
                facts = frozenset(
                    (n, pred, args)
                    for (pred, args, _), chosen in zip(slots, choice)
                    for n in chosen
                )
                tree = make_tree(parents, facts=facts)
                completion = complete_to_constant_domain(tree, sig)
                for formula in formulas:
                    if bar_precondition_violation(tree, sig, formula) is not None:
                        continue
                    variables = sorted(free_vars(formula))
                    for node in tree.nodes:
                        for combo in it.product(
                            completion.model.domains[node], repeat=len(variables)
                        ):
                            lifted = dict(zip(variables, combo))
                            value = eval_formula(
                                completion.model, sig, node, lifted, formula
                            )
                            condition = pointwise_condition(
                                completion, sig, formula, node, lifted
                            )
                            assert (value == 1) == condition
                            instances += 1
                            holds += 1
        assert instances > 500


class TestPipeline:
    def test_refutation_survives_completion_with_constant_values(self):
        sig = Signature({"p": 0, "q": 0}, {})
        model = KripkeModel(
            worlds=("w0", "w1"),
            order=reflexive_transitive_closure(("w0", "w1"), [("w0", "w1")]),
            domains={"w0": ("a",), "w1": ("a",)},
            facts=frozenset({("w0", "p", ()), ("w1", "p", ())}),
        )
        sequent = parse_sequent("p => q", sig)
        report = constant_domain_pipeline(model, sig, sequent, "w0", {})
        assert report.status == "refuted"
        assert report.completed_sequent_value == 0
        assert is_constant_domain(report.completion.model)

    def test_non_bar_determined_input_is_inconclusive(self):
        sig = Signature({"p": 0}, {"not": builtin("not")})
        model = KripkeModel(
            worlds=("w0", "w1"),
            order=reflexive_transitive_closure(("w0", "w1"), [("w0", "w1")]),
            domains={"w0": ("a",), "w1": ("a",)},
            facts=frozenset({("w1", "p", ())}),
        )
        sequent = parse_sequent("not(not(p)) => p", sig)
        report = constant_domain_pipeline(model, sig, sequent, "w0", {})
        assert report.status == "inconclusive"
        assert "precondition-failed" in report.equivalence.values()

    def test_rejects_non_refuting_point(self):
        sig = Signature({"p": 0}, {})
        model = KripkeModel(
            worlds=("w0",), order=frozenset({("w0", "w0")}),
            domains={"w0": ("a",)}, facts=frozenset({("w0", "p", ())}),
        )
        with pytest.raises(ValueError):
            constant_domain_pipeline(model, sig, parse_sequent("=> p", sig), "w0", {})


class TestTreeFromModel:
    def test_accepts_unraveled_models(self, separating):
        tree = unravel_strict(separating, "w1")
        rebuilt = tree_from_model(tree.model)
        assert rebuilt.root == tree.root
        assert rebuilt.parent == tree.parent

    def test_rejects_diamond(self):
        with pytest.raises(InvalidModelError):
            tree_from_model(diamond())

    def test_rejects_forest(self):
        model = KripkeModel(
            worlds=("w0", "w1"),
            order=frozenset({("w0", "w0"), ("w1", "w1")}),
            domains={"w0": ("a",), "w1": ("a",)},
            facts=frozenset(),
        )
        with pytest.raises(InvalidModelError):
            tree_from_model(model)
