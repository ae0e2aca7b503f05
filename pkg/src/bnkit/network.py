"""Bayesian network structure, validation, and graph-level queries."""

from __future__ import annotations

import heapq
from collections import deque
from typing import Iterable, Mapping, Sequence

import numpy as np

from .canonical import Potential, expand_potential
from .errors import ModelError
from .variables import (
    Assignment,
    DiscreteVariable,
    Distribution,
    ValidationReport,
)


class BayesianNetwork:
    """An immutable DAG of discrete variables, each with one potential.

    Construction resolves names to indices once; inference kernels work on
    state indices only.  The constructor accepts any parent relation (cycles
    included) so that parsed documents can be validated and reported on;
    ``build_network`` is the checked, causal-order entry point.
    """

    def __init__(
        self,
        variables: Sequence[DiscreteVariable],
        parents: Mapping[str, Sequence[str]],
        potentials: Mapping[str, Potential],
    ):
        self.variables = tuple(variables)
        self.index = {}
        for i, v in enumerate(self.variables):
            if v.name in self.index:
                raise ModelError(
                    "duplicate-variable", f"variable {v.name!r} declared twice"
                )
            self.index[v.name] = i

        self.parents: tuple[tuple[int, ...], ...] = tuple(
            tuple(self._resolve(p, v.name) for p in parents.get(v.name, ()))
            for v in self.variables
        )
        children: list[list[int]] = [[] for _ in self.variables]
        for child, ps in enumerate(self.parents):
            if len(set(ps)) != len(ps):
                raise ModelError(
                    "duplicate-parent",
                    f"variable {self.variables[child].name!r} lists a parent twice",
                )
            for p in ps:
                children[p].append(child)
        self.children: tuple[tuple[int, ...], ...] = tuple(
            tuple(c) for c in children
        )

        self.potentials: tuple[Potential, ...] = tuple(
            self._require_potential(potentials, v.name) for v in self.variables
        )

        # Eager expansion; defects are recorded so validate_network can
        # report every finding instead of dying on the first bad potential.
        self._cpts: list[np.ndarray | None] = []
        self._defects: list[tuple[str, str, str]] = []
        for i, v in enumerate(self.variables):
            try:
                self._cpts.append(
                    expand_potential(
                        self.potentials[i],
                        [self.variables[p] for p in self.parents[i]],
                        v,
                    )
                )
            except ModelError as err:
                self._cpts.append(None)
                self._defects.append((v.name, err.code, str(err)))

    def _resolve(self, name: str, child: str) -> int:
        if name not in self.index:
            raise ModelError(
                "unknown-parent",
                f"variable {child!r} lists unknown parent {name!r}",
            )
        return self.index[name]

    @staticmethod
    def _require_potential(potentials, name: str) -> Potential:
        if name not in potentials:
            raise ModelError("missing-potential", f"no potential for {name!r}")
        return potentials[name]

    # -- basic accessors ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.variables)

    def variable(self, name: str) -> DiscreteVariable:
        return self.variables[self.var_index(name)]

    def var_index(self, name: str) -> int:
        if name not in self.index:
            raise ModelError("unknown-variable", f"unknown variable {name!r}")
        return self.index[name]

    def parent_names(self, name: str) -> tuple[str, ...]:
        return tuple(
            self.variables[p].name for p in self.parents[self.var_index(name)]
        )

    def cpt(self, name_or_index) -> np.ndarray:
        """Expanded table for one variable, axes (parents..., child)."""
        i = (
            name_or_index
            if isinstance(name_or_index, int)
            else self.var_index(name_or_index)
        )
        table = self._cpts[i]
        if table is None:
            raise ModelError(
                "invalid-potential",
                f"potential for {self.variables[i].name!r} failed to expand",
            )
        return table

    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def total_configurations(self) -> int:
        return int(np.prod([v.cardinality for v in self.variables], dtype=object))

    def edge_list(self) -> list[tuple[str, str]]:
        return [
            (self.variables[p].name, v.name)
            for i, v in enumerate(self.variables)
            for p in self.parents[i]
        ]

    def assignment(self, state_names: Mapping[str, str]) -> dict[str, int]:
        """Resolve a name->state-name mapping into a name->index assignment."""
        return {
            name: self.variable(name).state_index(state)
            for name, state in state_names.items()
        }

    def check_assignment(self, assignment: Assignment):
        for name, state in assignment.items():
            var = self.variable(name)
            if not 0 <= state < var.cardinality:
                raise ModelError(
                    "unknown-state",
                    f"state index {state} out of range for {name!r}",
                )

    def prior(self, name: str) -> Distribution:
        var = self.variable(name)
        if self.parents[self.var_index(name)]:
            raise ModelError(
                "not-a-root", f"{name!r} has parents; its potential is conditional"
            )
        return Distribution(var, self.cpt(name))


def build_network(
    ordered_nodes: Iterable[tuple[DiscreteVariable, Sequence[str], Potential]],
) -> BayesianNetwork:
    """Construct a network from nodes in causal order.

    Each node's parents must appear earlier in the sequence, so the result
    is acyclic by construction.  Conditional-independence adequacy of the
    chosen parent sets is the modeler's responsibility and is not checked.
    """
    nodes = list(ordered_nodes)
    all_names = {var.name for var, _, _ in nodes}
    seen: set[str] = set()
    variables: list[DiscreteVariable] = []
    parents: dict[str, tuple[str, ...]] = {}
    potentials: dict[str, Potential] = {}
    for var, parent_names, potential in nodes:
        if var.name in seen:
            raise ModelError(
                "duplicate-variable", f"variable {var.name!r} declared twice"
            )
        for p in parent_names:
            if p not in seen:
                if p in all_names:
                    raise ModelError(
                        "parent-after-child",
                        f"node {var.name!r} lists parent {p!r} declared later; "
                        "nodes must come in causal order",
                    )
                raise ModelError(
                    "unknown-parent",
                    f"node {var.name!r} lists unknown parent {p!r}",
                )
        seen.add(var.name)
        variables.append(var)
        parents[var.name] = tuple(parent_names)
        potentials[var.name] = potential
    return BayesianNetwork(variables, parents, potentials)


def topological_order(net: BayesianNetwork) -> list[str]:
    """Variables with every parent before its children; ties break by
    declaration order so the result is deterministic."""
    indegree = [len(ps) for ps in net.parents]
    ready = [i for i, d in enumerate(indegree) if d == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        i = heapq.heappop(ready)
        order.append(net.variables[i].name)
        for c in net.children[i]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(ready, c)
    if len(order) != len(net):
        raise ModelError("cycle", "network parent relation contains a cycle")
    return order


def _find_cycle(net: BayesianNetwork) -> bool:
    try:
        topological_order(net)
        return False
    except ModelError:
        return True


def validate_network(net: BayesianNetwork) -> ValidationReport:
    """Collect every structural and numeric defect into one report.

    The network is usable by inference engines iff the report has no
    errors.  Disconnected variables are flagged as warnings only.
    """
    report = ValidationReport()
    if _find_cycle(net):
        report.add_error("cycle", "parent relation contains a cycle", "network")
    for name, code, message in net._defects:
        report.add_error(code, message, f"variable {name}")
    if len(net) > 1:
        for i, v in enumerate(net.variables):
            if not net.parents[i] and not net.children[i]:
                report.add_warning(
                    "disconnected",
                    f"variable {v.name!r} has no parents and no children",
                    f"variable {v.name}",
                )
    return report


def joint_probability(net: BayesianNetwork, full: Assignment) -> float:
    """Product over variables of P(x_i | parent states) at a full assignment."""
    missing = [v.name for v in net.variables if v.name not in full]
    if missing:
        raise ModelError(
            "incomplete-assignment",
            f"assignment does not bind {missing}",
        )
    net.check_assignment(full)
    result = 1.0
    for i, v in enumerate(net.variables):
        idx = tuple(full[net.variables[p].name] for p in net.parents[i])
        result *= float(net.cpt(i)[(*idx, full[v.name])])
    return result


def all_assignments(net: BayesianNetwork):
    """Iterate every full assignment (testing helper; exponential)."""
    names = [v.name for v in net.variables]
    for config in np.ndindex(*net.cardinalities()):
        yield dict(zip(names, (int(s) for s in config)))


def markov_blanket(net: BayesianNetwork, name: str) -> set[str]:
    """Parents, children, and children's other parents of a variable."""
    i = net.var_index(name)
    blanket: set[int] = set(net.parents[i])
    for c in net.children[i]:
        blanket.add(c)
        blanket.update(net.parents[c])
    blanket.discard(i)
    return {net.variables[j].name for j in blanket}


def d_separated(
    net: BayesianNetwork,
    xs: Iterable[str],
    ys: Iterable[str],
    zs: Iterable[str],
) -> bool:
    """True iff every undirected path between the X and Y sets is blocked
    given Z: a chain or fork node in Z, or a collider whose descendants
    (itself included) all avoid Z.

    Implemented as ball-passing reachability over (node, direction) states,
    which is linear in the number of edges.
    """
    x_set = {net.var_index(n) for n in xs}
    y_set = {net.var_index(n) for n in ys}
    z_set = {net.var_index(n) for n in zs}
    if x_set & y_set or x_set & z_set or y_set & z_set:
        raise ModelError("overlapping-sets", "X, Y, Z must be pairwise disjoint")

    # collider openers: Z plus its ancestors (nodes with a descendant in Z)
    z_or_above = set(z_set)
    stack = list(z_set)
    while stack:
        node = stack.pop()
        for p in net.parents[node]:
            if p not in z_or_above:
                z_or_above.add(p)
                stack.append(p)

    UP, DOWN = 0, 1  # direction the ball arrived from: child side / parent side
    queue = deque((x, UP) for x in x_set)
    visited: set[tuple[int, int]] = set()
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in z_set and node in y_set:
            return False
        if direction == UP and node not in z_set:
            for p in net.parents[node]:
                queue.append((p, UP))
            for c in net.children[node]:
                queue.append((c, DOWN))
        elif direction == DOWN:
            if node not in z_set:
                for c in net.children[node]:
                    queue.append((c, DOWN))
            if node in z_or_above:
                for p in net.parents[node]:
                    queue.append((p, UP))
    return True


def non_descendants(net: BayesianNetwork, name: str) -> set[str]:
    i = net.var_index(name)
    below = {i}
    stack = [i]
    while stack:
        node = stack.pop()
        for c in net.children[node]:
            if c not in below:
                below.add(c)
                stack.append(c)
    return {v.name for j, v in enumerate(net.variables) if j not in below}
