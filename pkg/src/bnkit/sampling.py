"""Stochastic inference: direct, rejection, likelihood-weighted, and Gibbs.

Randomness comes from numpy's PCG64 generator, seeded explicitly.  Each
engine draws in a documented fixed order (one uniform per sample and
variable slot, chain updates in declaration order), so identical seeds give
bit-identical outputs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import EngineError, ModelError
from .network import BayesianNetwork, topological_order
from .results import Diagnostics, QueryResult
from .variables import Assignment, Distribution


@dataclass
class SamplerConfig:
    sample_count: int
    seed: int = 0
    burn_in: int | None = None  # Gibbs only; defaults to sample_count // 10

    def __post_init__(self):
        if self.sample_count < 0:
            raise ModelError("bad-argument", "sample_count must be >= 0")
        if self.burn_in is not None and self.burn_in < 0:
            raise ModelError("bad-argument", "burn_in must be >= 0")

    def effective_burn_in(self) -> int:
        return self.burn_in if self.burn_in is not None else self.sample_count // 10


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Smallest state index whose cumulative probability exceeds u."""
    cum = np.cumsum(probs, axis=-1)
    state = (u[..., None] >= cum).sum(axis=-1)
    return np.minimum(state, probs.shape[-1] - 1)


def direct_sample(net: BayesianNetwork, cfg: SamplerConfig) -> np.ndarray:
    """Ancestral samples, one row per sample, columns in declaration order."""
    n = len(net)
    order = [net.var_index(name) for name in topological_order(net)]
    u = _rng(cfg.seed).random((cfg.sample_count, n))
    samples = np.zeros((cfg.sample_count, n), dtype=np.int64)
    for i in order:
        cpt = net.cpt(i)
        if net.parents[i]:
            probs = cpt[tuple(samples[:, p] for p in net.parents[i])]
        else:
            probs = np.broadcast_to(cpt, (cfg.sample_count, cpt.size))
        samples[:, i] = _inverse_cdf(probs, u[:, i])
    return samples


def _counts_to_posteriors(
    net: BayesianNetwork, samples: np.ndarray, weights: np.ndarray | None = None
) -> dict[str, Distribution]:
    posteriors = {}
    for i, var in enumerate(net.variables):
        counts = np.bincount(
            samples[:, i], weights=weights, minlength=var.cardinality
        ).astype(float)
        posteriors[var.name] = Distribution(var, counts)
    return posteriors


def direct_sample_query(net: BayesianNetwork, cfg: SamplerConfig) -> QueryResult:
    """Marginals estimated from direct samples.  Evidence is unsupported:
    direct sampling has no way to condition."""
    t0 = time.perf_counter()
    if cfg.sample_count == 0:
        raise EngineError("no-samples", "sample_count is zero")
    samples = direct_sample(net, cfg)
    return QueryResult(
        _counts_to_posteriors(net, samples),
        diagnostics=Diagnostics(
            engine="direct",
            samples=cfg.sample_count,
            wall_time=time.perf_counter() - t0,
        ),
    )


def rejection_query(
    net: BayesianNetwork, evidence: Assignment, cfg: SamplerConfig
) -> QueryResult:
    """Posteriors from the direct samples that agree with the evidence."""
    t0 = time.perf_counter()
    net.check_assignment(evidence)
    samples = direct_sample(net, cfg)
    mask = np.ones(len(samples), dtype=bool)
    for name, value in evidence.items():
        mask &= samples[:, net.var_index(name)] == value
    accepted = samples[mask]
    if len(accepted) == 0:
        raise EngineError(
            "no-accepted-samples",
            f"none of {cfg.sample_count} samples matched the evidence",
        )
    return QueryResult(
        _counts_to_posteriors(net, accepted),
        diagnostics=Diagnostics(
            engine="reject",
            samples=cfg.sample_count,
            accepted=int(len(accepted)),
            acceptance_rate=len(accepted) / max(cfg.sample_count, 1),
            wall_time=time.perf_counter() - t0,
        ),
    )


def rejection_sample_query(
    net: BayesianNetwork, query_var: str, evidence: Assignment, cfg: SamplerConfig
) -> Distribution:
    return rejection_query(net, evidence, cfg).posteriors[query_var]


def likelihood_weighting(
    net: BayesianNetwork, evidence: Assignment, cfg: SamplerConfig
) -> QueryResult:
    """Evidence variables are clamped; each sample is weighted by the
    likelihood of the evidence under its sampled parents."""
    t0 = time.perf_counter()
    net.check_assignment(evidence)
    if cfg.sample_count == 0:
        raise EngineError("no-samples", "sample_count is zero")
    n = len(net)
    order = [net.var_index(name) for name in topological_order(net)]
    evidence_by_index = {net.var_index(k): v for k, v in evidence.items()}
    u = _rng(cfg.seed).random((cfg.sample_count, n))
    samples = np.zeros((cfg.sample_count, n), dtype=np.int64)
    weights = np.ones(cfg.sample_count)
    for i in order:
        cpt = net.cpt(i)
        if net.parents[i]:
            probs = cpt[tuple(samples[:, p] for p in net.parents[i])]
        else:
            probs = np.broadcast_to(cpt, (cfg.sample_count, cpt.size))
        if i in evidence_by_index:
            samples[:, i] = evidence_by_index[i]
            weights = weights * probs[:, evidence_by_index[i]]
        else:
            samples[:, i] = _inverse_cdf(probs, u[:, i])
    total = float(weights.sum())
    if total <= 0.0:
        raise EngineError("zero-weight", "all sample weights are zero")
    return QueryResult(
        _counts_to_posteriors(net, samples, weights),
        diagnostics=Diagnostics(
            engine="lw",
            samples=cfg.sample_count,
            wall_time=time.perf_counter() - t0,
        ),
    )


def likelihood_weighting_query(
    net: BayesianNetwork, query_var: str, evidence: Assignment, cfg: SamplerConfig
) -> Distribution:
    return likelihood_weighting(net, evidence, cfg).posteriors[query_var]


class _GibbsKernel:
    """Per-variable full conditional, proportional to the variable's own CPT
    entry times each child CPT entry at the current blanket state."""

    def __init__(self, net: BayesianNetwork, vi: int):
        self.vi = vi
        self.own_cpt = net.cpt(vi)
        self.own_parents = net.parents[vi]
        self.child_terms = []
        for c in net.children[vi]:
            scope = (*net.parents[c], c)
            self.child_terms.append((net.cpt(c), scope))

    def conditional(self, state: np.ndarray) -> np.ndarray:
        dist = self.own_cpt[tuple(state[p] for p in self.own_parents)].copy()
        for cpt, scope in self.child_terms:
            idx = tuple(
                slice(None) if v == self.vi else state[v] for v in scope
            )
            dist *= cpt[idx]
        return dist


def gibbs_sampling(
    net: BayesianNetwork, evidence: Assignment, cfg: SamplerConfig
) -> QueryResult:
    """Systematic-scan Gibbs.  Every single-site update yields one chain
    state; the first burn-in states are discarded and posteriors come from
    the retained ones."""
    t0 = time.perf_counter()
    net.check_assignment(evidence)
    evidence_by_index = {net.var_index(k): v for k, v in evidence.items()}
    free = [i for i in range(len(net)) if i not in evidence_by_index]
    if not free:
        raise EngineError("no-free-variables", "every variable is observed")
    if cfg.sample_count == 0:
        raise EngineError("no-samples", "no states retained after burn-in")

    burn = cfg.effective_burn_in()
    total_steps = burn + cfg.sample_count
    rng = _rng(cfg.seed)
    state = np.zeros(len(net), dtype=np.int64)
    for name, value in evidence.items():
        state[net.var_index(name)] = value
    for i in free:  # random initial state, declaration order
        state[i] = rng.integers(net.variables[i].cardinality)
    uniforms = rng.random(total_steps)

    kernels = {i: _GibbsKernel(net, i) for i in free}
    upd_val = np.zeros(total_steps, dtype=np.int64)
    init_snapshot = state.copy()
    for t in range(total_steps):
        vi = free[t % len(free)]
        dist = kernels[vi].conditional(state)
        total = dist.sum()
        if total <= 0.0:
            # current blanket state has zero support (possible when the
            # random start hits a zero-probability region); hold the value
            upd_val[t] = state[vi]
            continue
        cum = np.cumsum(dist / total)
        new = int((uniforms[t] >= cum).sum())
        new = min(new, dist.size - 1)
        state[vi] = new
        upd_val[t] = new

    # tally retained states per variable from the update log: variable i's
    # value is piecewise constant between its own update steps
    lo, hi = burn, total_steps - 1
    posteriors: dict[str, Distribution] = {}
    for slot, vi in enumerate(free):
        var = net.variables[vi]
        times = np.arange(slot, total_steps, len(free))
        values = upd_val[times]
        starts = np.concatenate(([0], times))
        ends = np.concatenate((times - 1, [total_steps - 1]))
        segment_values = np.concatenate(([init_snapshot[vi]], values))
        overlap = np.clip(
            np.minimum(ends, hi) - np.maximum(starts, lo) + 1, 0, None
        )
        counts = np.zeros(var.cardinality)
        np.add.at(counts, segment_values, overlap)
        posteriors[var.name] = Distribution(var, counts)
    for name, value in evidence.items():
        posteriors[name] = Distribution.point_mass(net.variable(name), value)

    return QueryResult(
        posteriors,
        diagnostics=Diagnostics(
            engine="gibbs",
            samples=cfg.sample_count,
            iterations=total_steps,
            wall_time=time.perf_counter() - t0,
        ),
    )


def gibbs_query(
    net: BayesianNetwork, query_var: str, evidence: Assignment, cfg: SamplerConfig
) -> Distribution:
    return gibbs_sampling(net, evidence, cfg).posteriors[query_var]
