"""Exact inference: enumeration over the joint, and sum-product on polytrees."""

from __future__ import annotations

import math
import time

import numpy as np

from .errors import EngineError
from .factorgraph import to_factor_graph
from .network import BayesianNetwork, topological_order
from .results import Diagnostics, QueryResult
from .variables import Assignment, Distribution

# Enumeration walks the full joint; refuse anything past this many
# configurations rather than hanging.
MAX_ENUMERATION_CONFIGURATIONS = 2**22


def _check_enumeration_size(net: BayesianNetwork):
    if net.total_configurations() > MAX_ENUMERATION_CONFIGURATIONS:
        raise EngineError(
            "too-large",
            f"network has {net.total_configurations()} joint configurations, "
            f"enumeration allows at most {MAX_ENUMERATION_CONFIGURATIONS}",
        )


def enumeration_ask(
    net: BayesianNetwork, query: str, evidence: Assignment
) -> tuple[Distribution, float]:
    """Posterior of one variable by depth-first summation of the joint.

    Returns the normalized distribution and the pre-normalization mass,
    which is the evidence probability P(e).  This is the slow, trusted
    oracle: no caching, no pruning.
    """
    _check_enumeration_size(net)
    qi = net.var_index(query)
    if query in evidence:
        raise EngineError("query-observed", f"query variable {query!r} is observed")
    net.check_assignment(evidence)

    order = [net.var_index(name) for name in topological_order(net)]
    cpts = [net.cpt(i) for i in range(len(net))]
    parents = net.parents
    cards = net.cardinalities()
    state = [-1] * len(net)
    for name, value in evidence.items():
        state[net.var_index(name)] = value

    def enumerate_all(pos: int) -> float:
        if pos == len(order):
            return 1.0
        i = order[pos]
        parent_states = tuple(state[p] for p in parents[i])
        row = cpts[i][parent_states]
        if state[i] >= 0:
            return float(row[state[i]]) * enumerate_all(pos + 1)
        total = 0.0
        for y in range(cards[i]):
            state[i] = y
            total += float(row[y]) * enumerate_all(pos + 1)
        state[i] = -1
        return total

    masses = np.empty(cards[qi])
    for x in range(cards[qi]):
        state[qi] = x
        masses[x] = enumerate_all(0)
    state[qi] = -1

    p_evidence = float(masses.sum())
    if p_evidence <= 0.0:
        raise EngineError(
            "impossible-evidence", "evidence has probability zero"
        )
    return Distribution(net.variables[qi], masses), p_evidence


def enumeration_query(
    net: BayesianNetwork, evidence: Assignment, targets=None
) -> QueryResult:
    """Enumeration posteriors for several variables packaged as a QueryResult."""
    t0 = time.perf_counter()
    if targets is None:
        targets = [v.name for v in net.variables if v.name not in evidence]
    posteriors: dict[str, Distribution] = {}
    p_evidence = None
    for name in targets:
        if name in evidence:
            continue
        posteriors[name], p_evidence = enumeration_ask(net, name, evidence)
    for name, value in evidence.items():
        posteriors[name] = Distribution.point_mass(net.variable(name), value)
    if p_evidence is None:
        free = [v.name for v in net.variables if v.name not in evidence]
        if free:
            _, p_evidence = enumeration_ask(net, free[0], evidence)
        else:
            # every variable observed: the evidence mass is the joint itself
            from .network import joint_probability

            p_evidence = joint_probability(net, evidence)
            if p_evidence <= 0.0:
                raise EngineError(
                    "impossible-evidence", "evidence has probability zero"
                )
    return QueryResult(
        posteriors,
        evidence_probability=p_evidence,
        diagnostics=Diagnostics(
            engine="enum", iterations=1, wall_time=time.perf_counter() - t0
        ),
    )


# ---------------------------------------------------------------------------
# Sum-product on polytrees
# ---------------------------------------------------------------------------


class _Message:
    """A normalized message with its log-scale factored out, so products on
    long chains cannot underflow while the true magnitude stays recoverable."""

    __slots__ = ("values", "log_scale")

    def __init__(self, values: np.ndarray, log_scale: float = 0.0):
        total = float(values.sum())
        if total <= 0.0:
            raise EngineError(
                "impossible-evidence",
                "message vanished; evidence has probability zero",
            )
        self.values = values / total
        self.log_scale = log_scale + math.log(total)


def restrict_to_evidence(table, scope, evidence_by_index):
    """Zero out table slices that contradict observed scope variables."""
    out = table
    for axis, vi in enumerate(scope):
        if vi in evidence_by_index:
            mask = np.zeros(out.shape[axis])
            mask[evidence_by_index[vi]] = 1.0
            shape = [1] * out.ndim
            shape[axis] = out.shape[axis]
            out = out * mask.reshape(shape)
    return out


def sum_product_polytree(
    net: BayesianNetwork, evidence: Assignment
) -> QueryResult:
    """Two-phase message passing on the factor graph of a polytree.

    Leaves initialize the flow (unary factors send their table, leaf
    variables send ones), messages run leaves-to-root then root-to-leaves,
    and every variable's posterior is the normalized product of its
    incoming factor messages.
    """
    t0 = time.perf_counter()
    net.check_assignment(evidence)
    graph = to_factor_graph(net, "separate")
    if not graph.is_tree():
        raise EngineError(
            "not-polytree",
            "factor graph has a loop; use the junction tree or loopy BP",
        )
    evidence_by_index = {net.var_index(k): v for k, v in evidence.items()}
    tables = [
        restrict_to_evidence(f.table, f.scope, evidence_by_index)
        for f in graph.factors
    ]

    n_var = len(graph.variables)
    # bipartite node ids: variables 0..n_var-1, factor fi -> n_var + fi
    adjacency: list[list[int]] = [[] for _ in range(n_var + len(graph.factors))]
    for fi, f in enumerate(graph.factors):
        for vi in f.scope:
            adjacency[n_var + fi].append(vi)
            adjacency[vi].append(n_var + fi)

    # BFS forest with deterministic roots (lowest variable index per component)
    parent_of: dict[int, int | None] = {}
    component_root: list[int] = []
    bfs_order: list[int] = []
    for root in range(n_var):
        if root in parent_of:
            continue
        component_root.append(root)
        parent_of[root] = None
        queue = [root]
        while queue:
            node = queue.pop(0)
            bfs_order.append(node)
            for nb in adjacency[node]:
                if nb not in parent_of:
                    parent_of[nb] = node
                    queue.append(nb)

    messages: dict[tuple[int, int], _Message] = {}

    def compute_message(src: int, dst: int) -> _Message:
        if src < n_var:  # variable -> factor: product of other factor messages
            values = np.ones(graph.variables[src].cardinality)
            log_scale = 0.0
            for nb in adjacency[src]:
                if nb == dst:
                    continue
                m = messages[(nb, src)]
                values = values * m.values
                log_scale += m.log_scale
            return _Message(values, log_scale)
        # factor -> variable: multiply in other neighbors' messages, sum them out
        fi = src - n_var
        scope = graph.factors[fi].scope
        work = tables[fi]
        log_scale = 0.0
        target_axis = scope.index(dst)
        for axis, vi in enumerate(scope):
            if vi == dst:
                continue
            m = messages[(vi, src)]
            shape = [1] * work.ndim
            shape[axis] = m.values.size
            work = work * m.values.reshape(shape)
            log_scale += m.log_scale
        sum_axes = tuple(a for a in range(work.ndim) if a != target_axis)
        return _Message(work.sum(axis=sum_axes), log_scale)

    # Phase 1: leaves to roots.  Phase 2: roots back out.
    for node in reversed(bfs_order):
        if parent_of[node] is not None:
            messages[(node, parent_of[node])] = compute_message(
                node, parent_of[node]
            )
    for node in bfs_order:
        for nb in adjacency[node]:
            if parent_of[nb] == node:
                messages[(node, nb)] = compute_message(node, nb)

    log_p_evidence = 0.0
    posteriors: dict[str, Distribution] = {}
    for vi, var in enumerate(net.variables):
        values = np.ones(var.cardinality)
        log_scale = 0.0
        for nb in adjacency[vi]:
            m = messages[(nb, vi)]
            values = values * m.values
            log_scale += m.log_scale
        total = float(values.sum())
        if total <= 0.0:
            raise EngineError(
                "impossible-evidence", "evidence has probability zero"
            )
        posteriors[var.name] = Distribution(var, values)
        if vi in component_root:
            log_p_evidence += math.log(total) + log_scale

    return QueryResult(
        posteriors,
        evidence_probability=math.exp(log_p_evidence),
        diagnostics=Diagnostics(
            engine="sumprod",
            iterations=1,
            messages=len(messages),
            wall_time=time.perf_counter() - t0,
        ),
    )
