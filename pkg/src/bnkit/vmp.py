"""Mean-field variational inference with free-energy monitoring.

The posterior over hidden variables is approximated by a fully factorized
Q(H) = prod_i Q_i(H_i).  Coordinate ascent visits hidden variables in
topological order; each update sets log Q_i proportional to the expected
log of every CPT factor containing the variable, expectations taken under
the other factors (observed variables enter as point masses).  The free
energy

    L(Q) = E_Q[log P(V, H)] + sum_i H(Q_i)

is a lower bound on log P(evidence), recomputed after every sweep; ascent
stops when it moves less than the tolerance.  Zero table entries are
floored at 1e-12 inside the logs to keep them finite, which perturbs the
bound by a vanishing amount on the supported region.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import EngineError
from .network import BayesianNetwork, topological_order
from .results import Diagnostics, QueryResult
from .variables import Assignment, Distribution

LOG_FLOOR = 1e-12


@dataclass
class VmpState:
    """Mean-field factors and the per-sweep free-energy trace."""

    q: dict[str, Distribution]
    free_energy_trace: list[float] = field(default_factory=list)


def _entropy(q: np.ndarray) -> float:
    return float(-(q * np.log(np.maximum(q, LOG_FLOOR))).sum())


def vmp_query(
    net: BayesianNetwork,
    evidence: Assignment,
    max_sweeps: int = 100,
    tolerance: float = 1e-9,
) -> tuple[QueryResult, VmpState]:
    t0 = time.perf_counter()
    net.check_assignment(evidence)
    evidence_by_index = {net.var_index(k): v for k, v in evidence.items()}
    hidden = [
        net.var_index(name)
        for name in topological_order(net)
        if net.var_index(name) not in evidence_by_index
    ]

    # log CPT factors with observed axes pre-sliced to the evidence value;
    # an all-zero slice means this factor alone rules the evidence out
    factors: list[tuple[tuple[int, ...], np.ndarray]] = []
    for i in range(len(net)):
        scope = (*net.parents[i], i)
        idx, reduced_scope = [], []
        for v in scope:
            if v in evidence_by_index:
                idx.append(evidence_by_index[v])
            else:
                idx.append(slice(None))
                reduced_scope.append(v)
        sliced = np.asarray(net.cpt(i)[tuple(idx)], dtype=float)
        if sliced.size and float(sliced.max()) == 0.0:
            raise EngineError(
                "impossible-evidence",
                f"evidence zeroes the whole factor of {net.variables[i].name!r}",
            )
        factors.append((tuple(reduced_scope), np.log(np.maximum(sliced, LOG_FLOOR))))

    factors_with: dict[int, list[int]] = {h: [] for h in hidden}
    for k, (scope, _) in enumerate(factors):
        for v in scope:
            factors_with[v].append(k)

    q: dict[int, np.ndarray] = {
        h: np.full(net.variables[h].cardinality, 1.0 / net.variables[h].cardinality)
        for h in hidden
    }

    def expected_log(k: int, target: int | None):
        """E over Q of the log factor, leaving the target axis free."""
        scope, log_table = factors[k]
        work = log_table
        for axis in reversed(range(len(scope))):
            v = scope[axis]
            if v == target:
                continue
            qv = q[v]
            shape = [1] * work.ndim
            shape[axis] = qv.size
            work = (work * qv.reshape(shape)).sum(axis=axis)
        return work

    def free_energy() -> float:
        energy = sum(float(expected_log(k, None)) for k in range(len(factors)))
        return energy + sum(_entropy(q[h]) for h in hidden)

    trace: list[float] = []
    previous = free_energy()
    converged = False
    sweeps = 0
    for _ in range(max_sweeps):
        for h in hidden:
            score = np.zeros(net.variables[h].cardinality)
            for k in factors_with[h]:
                score = score + expected_log(k, h)
            score -= score.max()
            qh = np.exp(score)
            q[h] = qh / qh.sum()
        sweeps += 1
        current = free_energy()
        trace.append(current)
        if abs(current - previous) < tolerance:
            converged = True
            break
        previous = current

    posteriors: dict[str, Distribution] = {}
    for h in hidden:
        posteriors[net.variables[h].name] = Distribution(net.variables[h], q[h])
    for name, value in evidence.items():
        posteriors[name] = Distribution.point_mass(net.variable(name), value)

    state = VmpState(
        q={net.variables[h].name: posteriors[net.variables[h].name] for h in hidden},
        free_energy_trace=trace,
    )
    result = QueryResult(
        posteriors,
        evidence_probability=None,
        diagnostics=Diagnostics(
            engine="vmp",
            iterations=sweeps,
            converged=converged,
            wall_time=time.perf_counter() - t0,
        ),
    )
    return result, state


def exact_log_evidence(net: BayesianNetwork, evidence: Assignment) -> float:
    """log P(evidence) by enumeration; the quantity L(Q) lower-bounds."""
    from .exact import enumeration_query

    return math.log(enumeration_query(net, evidence).evidence_probability)
