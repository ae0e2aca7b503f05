"""Enumeration, polytree sum-product, and junction-tree engines."""

import numpy as np
import pytest

from bnkit import (
    DiscreteVariable,
    EngineError,
    TablePotential,
    build_junction_tree,
    build_network,
    enumeration_ask,
    enumeration_query,
    joint_probability,
    junction_tree_propagate,
    sum_product_polytree,
)
from bnkit.canonical import DeterministicPotential
from bnkit.junction import separator_residual, variable_marginal_spread
from bnkit.network import all_assignments

from conftest import boolean, random_dag, random_evidence, random_polytree


def brute_posterior(net, query, evidence):
    """Independent oracle: sum the full joint directly."""
    var = net.variable(query)
    masses = np.zeros(var.cardinality)
    for assignment in all_assignments(net):
        if all(assignment[k] == v for k, v in evidence.items()):
            masses[assignment[query]] += joint_probability(net, assignment)
    return masses / masses.sum(), masses.sum()


class TestEnumeration:
    def test_root_prior_no_evidence(self, fig1):
        dist, p_e = enumeration_ask(fig1, "D", {})
        np.testing.assert_allclose(dist.probabilities, [0.9, 0.1], atol=1e-12)
        assert p_e == pytest.approx(1.0, abs=1e-12)

    def test_heart_attack_vs_full_joint_oracle(self, heart_attack_doc):
        net = heart_attack_doc.network
        evidence = net.assignment({"StrokeS": "true"})
        expected, p_e_expected = brute_posterior(net, "DiabetesD", evidence)
        dist, p_e = enumeration_ask(net, "DiabetesD", evidence)
        np.testing.assert_allclose(dist.probabilities, expected, atol=1e-12)
        assert p_e == pytest.approx(p_e_expected, abs=1e-12)

    def test_deterministic_or_renormalizes_prior(self):
        # OR child observed true, one parent observed false: the other
        # parent's posterior is its prior restricted to states making OR
        # true, i.e. certainty on "true" (4-row hand enumeration)
        net = build_network(
            [
                (boolean("A"), [], TablePotential([0.7, 0.3])),
                (boolean("B"), [], TablePotential([0.4, 0.6])),
                (boolean("Y"), ["A", "B"], DeterministicPotential("OR")),
            ]
        )
        dist, p_e = enumeration_ask(net, "B", {"Y": 1, "A": 0})
        np.testing.assert_allclose(dist.probabilities, [0.0, 1.0], atol=1e-12)
        assert p_e == pytest.approx(0.7 * 0.6, abs=1e-12)

    def test_impossible_evidence(self):
        net = build_network(
            [
                (boolean("A"), [], TablePotential([1.0, 0.0])),
                (boolean("B"), ["A"], TablePotential([1.0, 0.0, 0.0, 1.0])),
            ]
        )
        with pytest.raises(EngineError) as err:
            enumeration_ask(net, "A", {"B": 1})
        assert err.value.code == "impossible-evidence"

    def test_query_var_observed(self, fig1):
        with pytest.raises(EngineError) as err:
            enumeration_ask(fig1, "D", {"D": 1})
        assert err.value.code == "query-observed"

    def test_size_guard(self):
        big = [
            (boolean(f"V{i}"), [], TablePotential([0.5, 0.5])) for i in range(23)
        ]
        net = build_network(big)
        with pytest.raises(EngineError) as err:
            enumeration_ask(net, "V0", {})
        assert err.value.code == "too-large"

    def test_query_result_includes_evidence_point_mass(self, fig1):
        result = enumeration_query(fig1, {"S": 1})
        assert result["S"].probabilities.tolist() == [0.0, 1.0]


class TestSumProduct:
    def test_single_node(self):
        net = build_network([(boolean("x"), [], TablePotential([0.7, 0.3]))])
        result = sum_product_polytree(net, {})
        np.testing.assert_allclose(result["x"].probabilities, [0.7, 0.3])
        assert result.evidence_probability == pytest.approx(1.0, abs=1e-12)

    def test_chain_matches_enumeration(self):
        net = build_network(
            [
                (boolean("X1"), [], TablePotential([0.6, 0.4])),
                (boolean("X2"), ["X1"], TablePotential([0.9, 0.1, 0.3, 0.7])),
                (boolean("X3"), ["X2"], TablePotential([0.8, 0.2, 0.25, 0.75])),
            ]
        )
        result = sum_product_polytree(net, {})
        dist, _ = enumeration_ask(net, "X3", {})
        np.testing.assert_allclose(
            result["X3"].probabilities, dist.probabilities, atol=1e-12
        )

    def test_not_polytree_rejected(self, heart_attack_doc):
        with pytest.raises(EngineError) as err:
            sum_product_polytree(heart_attack_doc.network, {})
        assert err.value.code == "not-polytree"

    def test_message_count_is_twice_edges(self):
        rng = np.random.default_rng(2)
        net = random_polytree(rng)
        from bnkit import to_factor_graph

        edges = len(to_factor_graph(net, "separate").edges())
        result = sum_product_polytree(net, {})
        assert result.diagnostics.messages == 2 * edges

    def test_random_polytrees_match_enumeration(self):
        rng = np.random.default_rng(101)
        for _ in range(30):
            net = random_polytree(rng, max_nodes=8, config_cap=4000)
            evidence = random_evidence(rng, net)
            try:
                expected = enumeration_query(net, evidence)
            except EngineError:
                continue
            result = sum_product_polytree(net, evidence)
            for name in result.posteriors:
                np.testing.assert_allclose(
                    result[name].probabilities,
                    expected[name].probabilities,
                    atol=1e-9,
                )
            assert result.evidence_probability == pytest.approx(
                expected.evidence_probability, rel=1e-9
            )

    def test_impossible_evidence(self):
        net = build_network(
            [
                (boolean("A"), [], TablePotential([1.0, 0.0])),
                (boolean("B"), ["A"], TablePotential([1.0, 0.0, 0.0, 1.0])),
            ]
        )
        with pytest.raises(EngineError) as err:
            sum_product_polytree(net, {"B": 1})
        assert err.value.code == "impossible-evidence"

    def test_disconnected_components(self):
        net = build_network(
            [
                (boolean("A"), [], TablePotential([0.7, 0.3])),
                (boolean("B"), [], TablePotential([0.2, 0.8])),
            ]
        )
        result = sum_product_polytree(net, {"B": 1})
        np.testing.assert_allclose(result["A"].probabilities, [0.7, 0.3])
        assert result.evidence_probability == pytest.approx(0.8, abs=1e-12)


class TestJunctionTree:
    def test_polytree_cliques_are_families(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            net = random_polytree(rng, max_nodes=7)
            jt = build_junction_tree(net)
            families = {
                frozenset((*net.parents[i], i))
                for i in range(len(net))
                if net.parents[i]
            }
            cliques = {frozenset(c) for c in jt.cliques}
            assert families <= cliques

    def test_fig1_clique_cover(self, fig1):
        jt = build_junction_tree(fig1)
        cliques = [set(fig1.variables[i].name for i in c) for c in jt.cliques]
        for family in ({"D", "A", "H"}, {"A", "H", "I"}, {"A", "S"}):
            assert any(family <= c for c in cliques)

    def test_every_family_covered_random(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            net = random_dag(rng, max_nodes=10)
            jt = build_junction_tree(net)
            for i in range(len(net)):
                family = set(net.parents[i]) | {i}
                assert any(family <= set(c) for c in jt.cliques)

    def test_running_intersection_property(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            net = random_dag(rng, max_nodes=9)
            jt = build_junction_tree(net)
            adjacency = {i: [] for i in range(len(jt.cliques))}
            for a, b, _ in jt.edges:
                adjacency[a].append(b)
                adjacency[b].append(a)
            for vi in range(len(net)):
                holders = [
                    ci for ci, c in enumerate(jt.cliques) if vi in c
                ]
                # the holders must form a connected subtree
                seen = {holders[0]}
                stack = [holders[0]]
                while stack:
                    node = stack.pop()
                    for nb in adjacency[node]:
                        if nb in holders and nb not in seen:
                            # only walk within holder cliques
                            seen.add(nb)
                            stack.append(nb)
                assert seen == set(holders)

    def test_no_evidence_matches_sum_product_on_polytree(self):
        rng = np.random.default_rng(3)
        net = random_polytree(rng)
        jt = build_junction_tree(net)
        a = junction_tree_propagate(jt, {})
        b = sum_product_polytree(net, {})
        for name in a.posteriors:
            np.testing.assert_allclose(
                a[name].probabilities, b[name].probabilities, atol=1e-9
            )

    def test_fig1_with_evidence_matches_enumeration(self, heart_attack_doc):
        net = heart_attack_doc.network
        jt = build_junction_tree(net)
        evidence = net.assignment({"StrokeS": "true"})
        result = junction_tree_propagate(jt, evidence)
        for var in net.variables:
            if var.name in evidence:
                continue
            expected, p_e = enumeration_ask(net, var.name, evidence)
            np.testing.assert_allclose(
                result[var.name].probabilities,
                expected.probabilities,
                atol=1e-9,
            )
            assert result.evidence_probability == pytest.approx(p_e, rel=1e-9)

    def test_all_variables_observed(self, heart_attack_doc):
        net = heart_attack_doc.network
        jt = build_junction_tree(net)
        full = {v.name: 1 for v in net.variables}
        result = junction_tree_propagate(jt, full)
        for name, value in full.items():
            assert result[name].probabilities[value] == pytest.approx(1.0)
        assert result.evidence_probability == pytest.approx(
            joint_probability(net, full), rel=1e-12
        )

    def test_calibration_and_read_consistency(self, heart_attack_doc):
        net = heart_attack_doc.network
        jt = build_junction_tree(net)
        evidence = net.assignment({"HeartAttackI": "true"})
        assert separator_residual(jt, evidence) <= 1e-9
        assert variable_marginal_spread(jt, evidence) <= 1e-9

    def test_impossible_evidence(self):
        net = build_network(
            [
                (boolean("A"), [], TablePotential([1.0, 0.0])),
                (boolean("B"), ["A"], TablePotential([1.0, 0.0, 0.0, 1.0])),
            ]
        )
        jt = build_junction_tree(net)
        with pytest.raises(EngineError) as err:
            junction_tree_propagate(jt, {"B": 1})
        assert err.value.code == "impossible-evidence"


class TestEngineAgreement:
    def test_enumeration_sum_product_junction_on_random_models(self):
        rng = np.random.default_rng(77)
        for _ in range(15):
            net = random_polytree(rng, max_nodes=7, config_cap=3000)
            evidence = random_evidence(rng, net, max_observed=2)
            try:
                enum = enumeration_query(net, evidence)
            except EngineError:
                continue
            sp = sum_product_polytree(net, evidence)
            jt = junction_tree_propagate(build_junction_tree(net), evidence)
            for name in enum.posteriors:
                np.testing.assert_allclose(
                    sp[name].probabilities, enum[name].probabilities, atol=1e-9
                )
                np.testing.assert_allclose(
                    jt[name].probabilities, enum[name].probabilities, atol=1e-9
                )

    def test_evidence_consistency_all_engines(self, heart_attack_doc):
        net = heart_attack_doc.network
        evidence = net.assignment({"HeartAttackI": "true", "DiabetesD": "false"})
        engines = [
            enumeration_query(net, evidence),
            junction_tree_propagate(build_junction_tree(net), evidence),
        ]
        for result in engines:
            for name, value in evidence.items():
                assert result[name].probabilities[value] == pytest.approx(1.0)
