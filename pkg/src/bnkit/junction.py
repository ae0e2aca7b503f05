"""Junction-tree construction and exact propagation on loopy networks.

Pipeline: moralize, triangulate with min-fill elimination (ties broken by
declaration order), collect maximal cliques, and join them with a
maximum-weight spanning tree on separator size.  Propagation is the
two-phase collect/distribute scheme with separator division, which leaves
every clique calibrated to P(clique, evidence).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import EngineError
from .exact import restrict_to_evidence
from .network import BayesianNetwork
from .results import Diagnostics, QueryResult
from .variables import Assignment, Distribution


@dataclass
class JunctionTree:
    net: BayesianNetwork
    cliques: list[tuple[int, ...]]  # sorted variable indices
    edges: list[tuple[int, int, tuple[int, ...]]]  # (clique a, clique b, separator)
    cpt_owner: list[list[int]]  # per clique, which variables' CPTs it absorbs

    def clique_containing(self, vi: int) -> int:
        for ci, clique in enumerate(self.cliques):
            if vi in clique:
                return ci
        raise EngineError("unknown-variable", f"no clique contains variable {vi}")


def moral_graph(net: BayesianNetwork) -> list[set[int]]:
    """Undirected adjacency: drop directions and marry co-parents."""
    adj: list[set[int]] = [set() for _ in range(len(net))]
    for child, ps in enumerate(net.parents):
        for p in ps:
            adj[child].add(p)
            adj[p].add(child)
        for a in ps:
            for b in ps:
                if a != b:
                    adj[a].add(b)
    return adj


def _min_fill_order(adj: list[set[int]]) -> list[frozenset[int]]:
    """Eliminate nodes by fewest fill-in edges; returns the created cliques."""
    work = [set(s) for s in adj]
    remaining = set(range(len(adj)))
    cliques: list[frozenset[int]] = []
    while remaining:
        best, best_fill = None, None
        for node in sorted(remaining):
            nbrs = sorted(work[node] & remaining)
            fill = sum(
                1
                for i, a in enumerate(nbrs)
                for b in nbrs[i + 1 :]
                if b not in work[a]
            )
            if best_fill is None or fill < best_fill:
                best, best_fill = node, fill
        nbrs = sorted(work[best] & remaining)
        cliques.append(frozenset([best, *nbrs]))
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1 :]:
                work[a].add(b)
                work[b].add(a)
        remaining.remove(best)
    return cliques


def build_junction_tree(net: BayesianNetwork) -> JunctionTree:
    raw = _min_fill_order(moral_graph(net))

    # keep maximal cliques only, in elimination order
    cliques: list[tuple[int, ...]] = []
    for c in raw:
        if any(c < other for other in raw):
            continue
        t = tuple(sorted(c))
        if t not in cliques:
            cliques.append(t)

    # maximum-weight spanning tree over separator sizes (Kruskal); weight-0
    # edges keep disconnected components in one tree with empty separators
    candidates = []
    for a in range(len(cliques)):
        for b in range(a + 1, len(cliques)):
            sep = tuple(sorted(set(cliques[a]) & set(cliques[b])))
            candidates.append((-len(sep), a, b, sep))
    candidates.sort()
    parent = list(range(len(cliques)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges: list[tuple[int, int, tuple[int, ...]]] = []
    for _, a, b, sep in candidates:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            edges.append((a, b, sep))

    # each CPT lands in exactly one clique that contains its whole family
    cpt_owner: list[list[int]] = [[] for _ in cliques]
    for i in range(len(net)):
        family = set(net.parents[i]) | {i}
        for ci, clique in enumerate(cliques):
            if family <= set(clique):
                cpt_owner[ci].append(i)
                break
        else:
            raise EngineError(
                "bad-junction-tree",
                f"no clique contains the family of {net.variables[i].name!r}",
            )
    return JunctionTree(net, cliques, edges, cpt_owner)


def _aligned(table: np.ndarray, table_vars, clique_vars) -> np.ndarray:
    """View of `table` transposed/reshaped to broadcast over clique axes."""
    positions = [clique_vars.index(v) for v in table_vars]
    order = np.argsort(positions)
    t = np.transpose(table, order)
    shape = [1] * len(clique_vars)
    for axis, var_pos in enumerate(sorted(positions)):
        shape[var_pos] = t.shape[axis]
    return t.reshape(shape)


def _marginalize(tensor: np.ndarray, clique: tuple[int, ...], keep) -> np.ndarray:
    axes = tuple(i for i, v in enumerate(clique) if v not in keep)
    return tensor.sum(axis=axes)


def _calibrate(jt: JunctionTree, evidence: Assignment):
    """Initialize clique tensors, run collect/distribute, return the
    calibrated tensors plus the evidence probability."""
    net = jt.net
    evidence_by_index = {net.var_index(k): v for k, v in evidence.items()}

    psi: list[np.ndarray] = []
    entered: set[int] = set()
    for ci, clique in enumerate(jt.cliques):
        tensor = np.ones(tuple(net.variables[v].cardinality for v in clique))
        for owner in jt.cpt_owner[ci]:
            scope = (*net.parents[owner], owner)
            tensor = tensor * _aligned(net.cpt(owner), scope, clique)
        # zero slices that contradict evidence, once per observed variable
        fresh = [v for v in clique if v in evidence_by_index and v not in entered]
        tensor = restrict_to_evidence(
            tensor, clique, {v: evidence_by_index[v] for v in fresh}
        )
        entered.update(fresh)
        psi.append(tensor)

    neighbors: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in jt.cliques]
    for a, b, sep in jt.edges:
        neighbors[a].append((b, sep))
        neighbors[b].append((a, sep))
    parent_of: dict[int, tuple[int, tuple[int, ...]] | None] = {0: None}
    order = [0]
    queue = [0]
    while queue:
        node = queue.pop(0)
        for nb, sep in neighbors[node]:
            if nb not in parent_of:
                parent_of[nb] = (node, sep)
                order.append(nb)
                queue.append(nb)

    sep_potentials: dict[tuple[int, int], np.ndarray] = {}

    def pass_message(src: int, dst: int, sep: tuple[int, ...]):
        key = (min(src, dst), max(src, dst))
        msg = _marginalize(psi[src], jt.cliques[src], set(sep))
        old = sep_potentials.get(key)
        if old is None:
            update = msg
        else:
            update = np.divide(msg, old, out=np.zeros_like(msg), where=old > 0)
        sep_potentials[key] = msg
        psi[dst] = psi[dst] * _aligned(update, sep, jt.cliques[dst])

    for node in reversed(order):  # collect towards the root
        if parent_of[node] is not None:
            dst, sep = parent_of[node]
            pass_message(node, dst, sep)
    p_evidence = float(psi[0].sum())
    if p_evidence <= 0.0:
        raise EngineError("impossible-evidence", "evidence has probability zero")
    for node in order:  # distribute back out
        for nb, sep in neighbors[node]:
            entry = parent_of.get(nb)
            if entry is not None and entry[0] == node:
                pass_message(node, nb, sep)
    return psi, p_evidence


def junction_tree_propagate(jt: JunctionTree, evidence: Assignment) -> QueryResult:
    """Collect/distribute pass; posteriors read from any containing clique."""
    t0 = time.perf_counter()
    jt.net.check_assignment(evidence)
    psi, p_evidence = _calibrate(jt, evidence)

    posteriors: dict[str, Distribution] = {}
    for vi, var in enumerate(jt.net.variables):
        ci = jt.clique_containing(vi)
        marginal = _marginalize(psi[ci], jt.cliques[ci], {vi})
        posteriors[var.name] = Distribution(var, marginal)

    return QueryResult(
        posteriors,
        evidence_probability=p_evidence,
        diagnostics=Diagnostics(
            engine="jt",
            iterations=1,
            messages=2 * len(jt.edges),
            wall_time=time.perf_counter() - t0,
        ),
    )


def separator_residual(jt: JunctionTree, evidence: Assignment) -> float:
    """Largest disagreement between adjacent cliques marginalized onto
    their separator, normalized by evidence mass (calibration check)."""
    psi, p_evidence = _calibrate(jt, evidence)
    worst = 0.0
    for a, b, sep in jt.edges:
        if not sep:
            continue
        ma = _marginalize(psi[a], jt.cliques[a], set(sep)) / p_evidence
        mb = _marginalize(psi[b], jt.cliques[b], set(sep)) / p_evidence
        worst = max(worst, float(np.max(np.abs(ma - mb))))
    return worst


def variable_marginal_spread(jt: JunctionTree, evidence: Assignment) -> float:
    """Largest L-inf gap between the same variable's posterior read from
    different containing cliques."""
    psi, _ = _calibrate(jt, evidence)
    worst = 0.0
    for vi, var in enumerate(jt.net.variables):
        reads = []
        for ci, clique in enumerate(jt.cliques):
            if vi in clique:
                m = _marginalize(psi[ci], jt.cliques[ci], {vi})
                reads.append(m / m.sum())
        for other in reads[1:]:
            worst = max(worst, float(np.max(np.abs(reads[0] - other))))
    return worst
