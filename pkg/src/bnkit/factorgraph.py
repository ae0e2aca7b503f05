"""Bipartite factor-graph view of a Bayesian network.

The factor graph is the substrate for sum-product and loopy belief
propagation.  Root priors can be kept as separate unary factors (default)
or multiplied into an adjacent child factor; both groupings represent the
same joint distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError
from .network import BayesianNetwork
from .variables import Assignment, DiscreteVariable


@dataclass
class Factor:
    """A non-negative table over an ordered scope of variables."""

    name: str
    scope: tuple[int, ...]  # variable indices into the owning graph
    table: np.ndarray

    def __post_init__(self):
        if self.table.ndim != len(self.scope):
            raise ModelError(
                "shape-mismatch",
                f"factor {self.name!r} table rank {self.table.ndim} does not "
                f"match scope size {len(self.scope)}",
            )


@dataclass
class FactorGraph:
    variables: tuple[DiscreteVariable, ...]
    factors: list[Factor] = field(default_factory=list)

    def edges(self) -> list[tuple[int, int]]:
        """(factor index, variable index) incidences in construction order."""
        return [
            (fi, vi) for fi, f in enumerate(self.factors) for vi in f.scope
        ]

    def neighbors_of_variable(self, vi: int) -> list[int]:
        return [fi for fi, f in enumerate(self.factors) if vi in f.scope]

    def is_tree(self) -> bool:
        """True when the bipartite graph is acyclic (a forest)."""
        n_var = len(self.variables)
        parent = list(range(n_var + len(self.factors)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for fi, vi in self.edges():
            ra, rb = find(n_var + fi), find(vi)
            if ra == rb:
                return False
            parent[ra] = rb
        return True


def to_factor_graph(
    net: BayesianNetwork, root_style: str = "separate"
) -> FactorGraph:
    """One variable node per network node; one factor per CPT.

    ``separate``: every root prior becomes its own unary factor.
    ``merged``: each root prior is multiplied into the first factor of one
    of its children (the root stays in that factor's scope).
    """
    if root_style not in ("separate", "merged"):
        raise ModelError("bad-argument", f"unknown root_style {root_style!r}")
    graph = FactorGraph(net.variables)
    merged_roots: set[int] = set()
    factor_of_child: dict[int, int] = {}
    for i, var in enumerate(net.variables):
        ps = net.parents[i]
        if not ps and root_style == "merged" and net.children[i]:
            merged_roots.add(i)
            continue
        scope = (*ps, i)
        factor_of_child[i] = len(graph.factors)
        graph.factors.append(Factor(f"P({var.name})", scope, net.cpt(i)))
    for i in sorted(merged_roots):
        # a root's child always has parents, so it always owns a CPT factor
        f = graph.factors[factor_of_child[net.children[i][0]]]
        axis = f.scope.index(i)
        prior = net.cpt(i)
        shape = [1] * f.table.ndim
        shape[axis] = prior.size
        f.table = f.table * prior.reshape(shape)
        f.name += f"*P({net.variables[i].name})"
    return graph


def evaluate_factor(
    graph: FactorGraph, factor: Factor, assignment: Assignment
) -> float:
    """Table entry at the assignment's multi-index over the factor scope."""
    idx = []
    for vi in factor.scope:
        name = graph.variables[vi].name
        if name not in assignment:
            raise ModelError(
                "unbound-variable",
                f"assignment does not bind scope variable {name!r}",
            )
        idx.append(assignment[name])
    return float(factor.table[tuple(idx)])


def factor_product(graph: FactorGraph, assignment: Assignment) -> float:
    """Product of every factor at a full assignment; equals the joint."""
    result = 1.0
    for f in graph.factors:
        result *= evaluate_factor(graph, f, assignment)
    return result
