"""Structure, validation, joint, topological order, blankets, d-separation."""

import itertools

import numpy as np
import pytest

from bnkit import (
    BayesianNetwork,
    DiscreteVariable,
    ModelError,
    TablePotential,
    build_network,
    d_separated,
    joint_probability,
    markov_blanket,
    topological_order,
    validate_network,
)
from bnkit.network import all_assignments, non_descendants

from conftest import boolean, fig1_network, random_dag


class TestBuildNetwork:
    def test_single_root(self):
        net = build_network([(boolean("D"), [], TablePotential([0.9, 0.1]))])
        assert len(net) == 1
        assert net.cpt("D").tolist() == [0.9, 0.1]

    def test_fig1_edges(self, fig1):
        assert set(fig1.edge_list()) == {
            ("D", "A"),
            ("D", "H"),
            ("A", "I"),
            ("H", "I"),
            ("A", "S"),
        }

    def test_unknown_parent(self):
        with pytest.raises(ModelError) as err:
            build_network(
                [(boolean("A"), ["Z"], TablePotential([0.5, 0.5, 0.5, 0.5]))]
            )
        assert err.value.code == "unknown-parent"

    def test_parent_after_child(self):
        with pytest.raises(ModelError) as err:
            build_network(
                [
                    (boolean("A"), ["B"], TablePotential([0.5, 0.5, 0.5, 0.5])),
                    (boolean("B"), [], TablePotential([0.5, 0.5])),
                ]
            )
        assert err.value.code == "parent-after-child"

    def test_duplicate_variable(self):
        with pytest.raises(ModelError) as err:
            build_network(
                [
                    (boolean("A"), [], TablePotential([0.5, 0.5])),
                    (boolean("A"), [], TablePotential([0.5, 0.5])),
                ]
            )
        assert err.value.code == "duplicate-variable"


class TestValidate:
    def test_fig1_is_valid(self, fig1):
        report = validate_network(fig1)
        assert report.ok
        assert report.errors == []

    def test_unnormalized_row(self):
        net = BayesianNetwork(
            [boolean("X")], {}, {"X": TablePotential([0.5, 0.4])}
        )
        report = validate_network(net)
        assert "row-not-normalized" in report.error_codes()

    def test_cycle(self):
        ab = TablePotential([0.5, 0.5, 0.5, 0.5])
        net = BayesianNetwork(
            [boolean("A"), boolean("B")],
            {"A": ["B"], "B": ["A"]},
            {"A": ab, "B": ab},
        )
        assert "cycle" in validate_network(net).error_codes()

    def test_negative_probability(self):
        net = BayesianNetwork(
            [boolean("X")], {}, {"X": TablePotential([1.2, -0.2])}
        )
        assert "negative-probability" in validate_network(net).error_codes()

    def test_table_size_mismatch(self):
        net = BayesianNetwork(
            [boolean("X")], {}, {"X": TablePotential([0.2, 0.3, 0.5])}
        )
        assert "table-size-mismatch" in validate_network(net).error_codes()

    def test_canonical_parameter_out_of_range(self):
        from bnkit import NoisyOrPotential

        net = BayesianNetwork(
            [boolean("A"), boolean("Y")],
            {"Y": ["A"]},
            {
                "A": TablePotential([0.5, 0.5]),
                "Y": NoisyOrPotential([1.5]),
            },
        )
        assert "parameter-out-of-range" in validate_network(net).error_codes()

    def test_disconnected_warning(self):
        net = BayesianNetwork(
            [boolean("A"), boolean("B")],
            {},
            {"A": TablePotential([0.5, 0.5]), "B": TablePotential([0.5, 0.5])},
        )
        report = validate_network(net)
        assert report.ok
        assert {w.code for w in report.warnings} == {"disconnected"}

    def test_every_accepted_network_has_topological_order(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            net = random_dag(rng)
            if validate_network(net).ok:
                assert len(topological_order(net)) == len(net)


class TestJointProbability:
    def test_single_node(self):
        net = build_network([(boolean("x"), [], TablePotential([0.7, 0.3]))])
        assert joint_probability(net, {"x": 1}) == pytest.approx(0.3, abs=1e-15)

    def test_heart_attack_all_true(self, heart_attack_doc):
        # hand multiplication of the pinned fixture tables:
        # 0.1 * 0.6 * 0.7 * (1 - 0.7*0.6) * 0.4
        net = heart_attack_doc.network
        full = {v.name: 1 for v in net.variables}
        assert joint_probability(net, full) == pytest.approx(0.009744, abs=1e-12)

    def test_joint_sums_to_one(self, fig1):
        total = sum(joint_probability(fig1, a) for a in all_assignments(fig1))
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_joint_sums_to_one_random(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            net = random_dag(rng, max_nodes=8)
            total = sum(joint_probability(net, a) for a in all_assignments(net))
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_incomplete_assignment(self, fig1):
        with pytest.raises(ModelError) as err:
            joint_probability(fig1, {"D": 1})
        assert err.value.code == "incomplete-assignment"


class TestTopologicalOrder:
    def test_chain(self):
        ab = TablePotential([0.5, 0.5, 0.5, 0.5])
        net = build_network(
            [
                (boolean("A"), [], TablePotential([0.5, 0.5])),
                (boolean("B"), ["A"], ab),
                (boolean("C"), ["B"], ab),
            ]
        )
        assert topological_order(net) == ["A", "B", "C"]

    def test_declaration_order_preserved(self, fig1):
        assert topological_order(fig1) == ["D", "A", "H", "I", "S"]

    def test_diamond_endpoints(self):
        ab = TablePotential([0.5, 0.5, 0.5, 0.5])
        ii = TablePotential([0.5] * 8)
        net = build_network(
            [
                (boolean("D"), [], TablePotential([0.5, 0.5])),
                (boolean("A"), ["D"], ab),
                (boolean("H"), ["D"], ab),
                (boolean("I"), ["A", "H"], ii),
            ]
        )
        order = topological_order(net)
        assert order[0] == "D" and order[-1] == "I"

    def test_respects_parents_even_when_declared_backwards(self):
        ab = TablePotential([0.5, 0.5, 0.5, 0.5])
        net = BayesianNetwork(
            [boolean("B"), boolean("A")],
            {"B": ["A"]},
            {"B": ab, "A": TablePotential([0.5, 0.5])},
        )
        assert topological_order(net) == ["A", "B"]


class TestMarkovBlanket:
    def test_isolated_root(self):
        net = build_network([(boolean("x"), [], TablePotential([0.5, 0.5]))])
        assert markov_blanket(net, "x") == set()

    def test_fig1_blanket_of_A(self, fig1):
        # H enters as co-parent of the shared child I
        assert markov_blanket(fig1, "A") == {"D", "I", "S", "H"}

    def test_fig1_blanket_of_S(self, fig1):
        assert markov_blanket(fig1, "S") == {"A"}


def _joint_table(net):
    table = np.zeros(net.cardinalities())
    for assignment in all_assignments(net):
        idx = tuple(assignment[v.name] for v in net.variables)
        table[idx] = joint_probability(net, assignment)
    return table


def conditional_independence_residual(net, xs, ys, zs) -> float:
    """Brute-force max over assignments of |P(x|z) - P(x|y,z)|."""
    joint = _joint_table(net)
    names = [v.name for v in net.variables]
    ax = {n: i for i, n in enumerate(names)}
    keep_xz = sorted(ax[n] for n in (*xs, *zs))
    keep_yz = sorted(ax[n] for n in (*ys, *zs))
    keep_xyz = sorted(ax[n] for n in (*xs, *ys, *zs))
    keep_z = sorted(ax[n] for n in zs)

    def marg(keep):
        drop = tuple(i for i in range(len(names)) if i not in keep)
        return joint.sum(axis=drop)

    p_xz, p_yz, p_xyz = marg(keep_xz), marg(keep_yz), marg(keep_xyz)
    p_z = marg(keep_z) if zs else np.array(1.0)

    worst = 0.0
    for idx in np.ndindex(*p_xyz.shape):
        sel = dict(zip(keep_xyz, idx))
        xz = tuple(sel[i] for i in keep_xz)
        yz = tuple(sel[i] for i in keep_yz)
        z = tuple(sel[i] for i in keep_z)
        if p_yz[yz] <= 0 or (zs and p_z[z] <= 0):
            continue
        lhs = p_xz[xz] / (p_z[z] if zs else 1.0)
        rhs = p_xyz[idx] / p_yz[yz]
        worst = max(worst, abs(lhs - rhs))
    return worst


class TestDSeparation:
    def test_chain_blocked_by_middle(self):
        ab = TablePotential([0.5, 0.5, 0.5, 0.5])
        net = build_network(
            [
                (boolean("D"), [], TablePotential([0.5, 0.5])),
                (boolean("A"), ["D"], ab),
                (boolean("S"), ["A"], ab),
            ]
        )
        assert d_separated(net, {"D"}, {"S"}, {"A"})
        assert not d_separated(net, {"D"}, {"S"}, set())

    def test_collider_blocked_when_unobserved(self):
        ii = TablePotential([0.5] * 8)
        net = build_network(
            [
                (boolean("A"), [], TablePotential([0.5, 0.5])),
                (boolean("H"), [], TablePotential([0.5, 0.5])),
                (boolean("I"), ["A", "H"], ii),
            ]
        )
        assert d_separated(net, {"A"}, {"H"}, set())
        assert not d_separated(net, {"A"}, {"H"}, {"I"})

    def test_collider_opened_by_descendant(self):
        ab = TablePotential([0.5, 0.5, 0.5, 0.5])
        ii = TablePotential([0.5] * 8)
        net = build_network(
            [
                (boolean("A"), [], TablePotential([0.5, 0.5])),
                (boolean("H"), [], TablePotential([0.5, 0.5])),
                (boolean("I"), ["A", "H"], ii),
                (boolean("S"), ["I"], ab),
            ]
        )
        assert not d_separated(net, {"A"}, {"H"}, {"S"})

    def test_overlapping_sets_rejected(self, fig1):
        with pytest.raises(ModelError) as err:
            d_separated(fig1, {"A"}, {"A"}, set())
        assert err.value.code == "overlapping-sets"

    def test_markov_blanket_shields(self, fig1):
        for v in fig1.variables:
            blanket = markov_blanket(fig1, v.name)
            others = {u.name for u in fig1.variables} - blanket - {v.name}
            if others:
                assert d_separated(fig1, {v.name}, others, blanket)

    def test_parents_screen_nondescendants(self, fig1):
        for v in fig1.variables:
            parents = set(fig1.parent_names(v.name))
            rest = non_descendants(fig1, v.name) - parents
            if rest:
                assert d_separated(fig1, {v.name}, rest, parents)

    def test_soundness_against_enumerated_joint(self):
        rng = np.random.default_rng(33)
        for _ in range(8):
            net = random_dag(rng, max_nodes=6)
            names = [v.name for v in net.variables]
            for _ in range(12):
                picked = list(rng.permutation(names))
                x, y = {picked[0]}, {picked[1]}
                z = set(picked[2 : 2 + int(rng.integers(0, len(names) - 1))])
                if d_separated(net, x, y, z):
                    assert (
                        conditional_independence_residual(net, x, y, z) <= 1e-9
                    )
