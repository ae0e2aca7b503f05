"""Shared fixtures: tiny hand-built networks and random-model generators."""

from __future__ import annotations

import numpy as np
import pytest

from bnkit import (
    BayesianNetwork,
    DiscreteVariable,
    NoisyOrPotential,
    TablePotential,
    build_network,
    load_fixture,
)
from bnkit.canonical import flat_from_table


def boolean(name: str) -> DiscreteVariable:
    return DiscreteVariable(name, ("false", "true"))


def table_potential(array: np.ndarray) -> TablePotential:
    """Wrap a dense (parents..., child) table as a flat potential."""
    return TablePotential(flat_from_table(np.asarray(array, dtype=float)))


def random_cpt(rng: np.random.Generator, parent_cards, child_card) -> TablePotential:
    rows = rng.random((*parent_cards, child_card)) + 0.05
    rows /= rows.sum(axis=-1, keepdims=True)
    return table_potential(rows)


def random_polytree(
    rng: np.random.Generator,
    max_nodes: int = 10,
    max_card: int = 4,
    config_cap: int = 20_000,
) -> BayesianNetwork:
    """Random singly connected network: a random undirected tree with every
    edge oriented at random, so nodes can have several parents."""
    n = int(rng.integers(2, max_nodes + 1))
    while True:
        cards = rng.integers(2, max_card + 1, size=n)
        if np.prod(cards, dtype=np.int64) <= config_cap:
            break
    parents: dict[int, list[int]] = {i: [] for i in range(n)}
    for i in range(1, n):
        j = int(rng.integers(0, i))
        if rng.random() < 0.5:
            parents[i].append(j)
        else:
            parents[j].append(i)
    variables = [
        DiscreteVariable(f"V{i}", tuple(f"s{k}" for k in range(cards[i])))
        for i in range(n)
    ]
    potentials = {
        v.name: random_cpt(rng, [cards[p] for p in parents[i]], cards[i])
        for i, v in enumerate(variables)
    }
    parent_names = {
        variables[i].name: [variables[p].name for p in parents[i]] for i in range(n)
    }
    return BayesianNetwork(variables, parent_names, potentials)


def random_dag(
    rng: np.random.Generator,
    max_nodes: int = 12,
    edge_prob: float = 0.3,
    max_parents: int = 3,
) -> BayesianNetwork:
    """Random binary DAG, often multiply connected."""
    n = int(rng.integers(3, max_nodes + 1))
    parents: dict[int, list[int]] = {i: [] for i in range(n)}
    for child in range(n):
        for parent in range(child):
            if len(parents[child]) >= max_parents:
                break
            if rng.random() < edge_prob:
                parents[child].append(parent)
    variables = [boolean(f"V{i}") for i in range(n)]
    potentials = {
        variables[i].name: random_cpt(rng, [2] * len(parents[i]), 2)
        for i in range(n)
    }
    parent_names = {
        variables[i].name: [variables[p].name for p in parents[i]] for i in range(n)
    }
    return BayesianNetwork(variables, parent_names, potentials)


def random_evidence(
    rng: np.random.Generator, net: BayesianNetwork, max_observed: int = 3
) -> dict[str, int]:
    k = int(rng.integers(0, min(max_observed, len(net) - 1) + 1))
    picked = rng.choice(len(net), size=k, replace=False)
    return {
        net.variables[int(i)].name: int(
            rng.integers(net.variables[int(i)].cardinality)
        )
        for i in picked
    }


def fig1_network() -> BayesianNetwork:
    """The five-node diabetes/stroke teaching topology with the pinned
    fixture parameters, built in code."""
    d, a, h, i, s = (
        boolean("D"),
        boolean("A"),
        boolean("H"),
        boolean("I"),
        boolean("S"),
    )
    return build_network(
        [
            (d, [], TablePotential([0.9, 0.1])),
            (a, ["D"], TablePotential([0.8, 0.2, 0.4, 0.6])),
            (h, ["D"], TablePotential([0.7, 0.3, 0.3, 0.7])),
            (i, ["A", "H"], NoisyOrPotential([0.3, 0.4])),
            (s, ["A"], TablePotential([0.95, 0.05, 0.6, 0.4])),
        ]
    )


@pytest.fixture(scope="session")
def heart_attack_doc():
    return load_fixture("heart_attack")


@pytest.fixture(scope="session")
def headache_doc():
    return load_fixture("headache")


@pytest.fixture()
def fig1():
    return fig1_network()
