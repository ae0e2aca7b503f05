"""Loopy belief propagation on the factor graph.

All messages start uniform and are recomputed each iteration until the
largest message change drops below the tolerance.  Convergence is not
guaranteed on loopy graphs; the result carries a converged flag and the
best-effort posteriors either way.  The sequential schedule (recompute in a
fixed edge order using the freshest values) converges more often than
flooding and is the default.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import EngineError, ModelError
from .exact import restrict_to_evidence
from .factorgraph import to_factor_graph
from .network import BayesianNetwork
from .results import Diagnostics, QueryResult
from .variables import Assignment, Distribution


@dataclass
class LbpConfig:
    max_iterations: int = 200
    tolerance: float = 1e-6  # L-inf on message change
    schedule: str = "sequential"  # or "flooding"
    damping: float = 0.0  # 0 = off; fraction of the old message kept

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ModelError("bad-argument", "max_iterations must be >= 0")
        if self.tolerance <= 0:
            raise ModelError("bad-argument", "tolerance must be positive")
        if self.schedule not in ("sequential", "flooding"):
            raise ModelError("bad-argument", f"unknown schedule {self.schedule!r}")
        if not 0.0 <= self.damping < 1.0:
            raise ModelError("bad-argument", "damping must lie in [0, 1)")


class LoopyBeliefPropagation:
    """One query's mutable message state over an evidence-restricted graph."""

    def __init__(self, net: BayesianNetwork, evidence: Assignment, cfg: LbpConfig):
        net.check_assignment(evidence)
        self.net = net
        self.cfg = cfg
        self.graph = to_factor_graph(net, "separate")
        evidence_by_index = {net.var_index(k): v for k, v in evidence.items()}
        self.evidence_by_index = evidence_by_index
        self.tables = [
            restrict_to_evidence(f.table, f.scope, evidence_by_index)
            for f in self.graph.factors
        ]
        self.var_neighbors = [
            self.graph.neighbors_of_variable(vi)
            for vi in range(len(self.graph.variables))
        ]
        # message stores, keyed by (factor, variable)
        self.to_var: dict[tuple[int, int], np.ndarray] = {}
        self.to_factor: dict[tuple[int, int], np.ndarray] = {}
        for fi, f in enumerate(self.graph.factors):
            for vi in f.scope:
                card = self.graph.variables[vi].cardinality
                self.to_var[(fi, vi)] = np.full(card, 1.0 / card)
                self.to_factor[(fi, vi)] = np.full(card, 1.0 / card)
        self.iterations = 0
        self.converged = False

    def _factor_message(self, fi: int, vi: int, source) -> np.ndarray:
        scope = self.graph.factors[fi].scope
        work = self.tables[fi]
        target_axis = scope.index(vi)
        for axis, other in enumerate(scope):
            if other == vi:
                continue
            m = source[(fi, other)]
            shape = [1] * work.ndim
            shape[axis] = m.size
            work = work * m.reshape(shape)
        msg = work.sum(axis=tuple(a for a in range(work.ndim) if a != target_axis))
        return self._normalize(msg)

    def _node_message(self, fi: int, vi: int, source) -> np.ndarray:
        msg = np.ones(self.graph.variables[vi].cardinality)
        for other_f in self.var_neighbors[vi]:
            if other_f != fi:
                msg = msg * source[(other_f, vi)]
        return self._normalize(msg)

    @staticmethod
    def _normalize(msg: np.ndarray) -> np.ndarray:
        total = msg.sum()
        if total <= 0.0:
            raise EngineError(
                "impossible-evidence",
                "message vanished; evidence has probability zero",
            )
        return msg / total

    def _blend(self, old: np.ndarray, new: np.ndarray) -> np.ndarray:
        d = self.cfg.damping
        return new if d == 0.0 else (1.0 - d) * new + d * old

    def iterate_once(self) -> float:
        """One full sweep over every edge in both directions; returns the
        largest message change."""
        delta = 0.0
        if self.cfg.schedule == "flooding":
            old_to_var = dict(self.to_var)
            old_to_factor = dict(self.to_factor)
            src_var, src_factor = old_to_var, old_to_factor
        else:
            src_var, src_factor = self.to_var, self.to_factor
        for fi, f in enumerate(self.graph.factors):
            for vi in f.scope:
                new = self._blend(
                    self.to_var[(fi, vi)], self._factor_message(fi, vi, src_factor)
                )
                delta = max(delta, float(np.max(np.abs(new - self.to_var[(fi, vi)]))))
                self.to_var[(fi, vi)] = new
                new = self._blend(
                    self.to_factor[(fi, vi)], self._node_message(fi, vi, src_var)
                )
                delta = max(
                    delta, float(np.max(np.abs(new - self.to_factor[(fi, vi)])))
                )
                self.to_factor[(fi, vi)] = new
        return delta

    def run(self):
        for _ in range(self.cfg.max_iterations):
            delta = self.iterate_once()
            self.iterations += 1
            if delta < self.cfg.tolerance:
                self.converged = True
                break

    def residual(self) -> float:
        """How far the current messages are from a fixed point of the
        undamped update equations."""
        worst = 0.0
        for fi, f in enumerate(self.graph.factors):
            for vi in f.scope:
                worst = max(
                    worst,
                    float(
                        np.max(
                            np.abs(
                                self._factor_message(fi, vi, self.to_factor)
                                - self.to_var[(fi, vi)]
                            )
                        )
                    ),
                    float(
                        np.max(
                            np.abs(
                                self._node_message(fi, vi, self.to_var)
                                - self.to_factor[(fi, vi)]
                            )
                        )
                    ),
                )
        return worst

    def beliefs(self) -> dict[str, Distribution]:
        out: dict[str, Distribution] = {}
        for vi, var in enumerate(self.graph.variables):
            belief = np.ones(var.cardinality)
            for fi in self.var_neighbors[vi]:
                belief = belief * self.to_var[(fi, vi)]
            if vi in self.evidence_by_index:
                mask = np.zeros(var.cardinality)
                mask[self.evidence_by_index[vi]] = 1.0
                belief = belief * mask
            total = belief.sum()
            if total <= 0.0:
                raise EngineError(
                    "impossible-evidence", "evidence has probability zero"
                )
            out[var.name] = Distribution(var, belief)
        return out


def loopy_bp(
    net: BayesianNetwork,
    evidence: Assignment,
    cfg: LbpConfig | None = None,
) -> QueryResult:
    cfg = cfg or LbpConfig()
    t0 = time.perf_counter()
    state = LoopyBeliefPropagation(net, evidence, cfg)
    state.run()
    posteriors = state.beliefs()
    return QueryResult(
        posteriors,
        evidence_probability=None,
        diagnostics=Diagnostics(
            engine="lbp",
            iterations=state.iterations,
            converged=state.converged,
            messages=2 * len(state.graph.edges()),
            wall_time=time.perf_counter() - t0,
        ),
    )
