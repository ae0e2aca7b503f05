"""Uniform front door to every inference engine, keyed by short id.

Used by the CLI and the evaluation harness so engine choice is data, not
code.  There is deliberately no fallback between engines: a sum-product
request on a loopy network fails rather than silently rerouting.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EngineError
from .exact import enumeration_query, sum_product_polytree
from .junction import build_junction_tree, junction_tree_propagate
from .lbp import LbpConfig, loopy_bp
from .network import BayesianNetwork
from .results import QueryResult
from .sampling import (
    SamplerConfig,
    direct_sample_query,
    gibbs_sampling,
    likelihood_weighting,
    rejection_query,
)
from .variables import Assignment
from .vmp import vmp_query

ENGINE_IDS = (
    "enum",
    "sumprod",
    "jt",
    "lbp",
    "direct",
    "reject",
    "lw",
    "gibbs",
    "vmp",
)


@dataclass
class EngineOptions:
    iterations: int = 200
    tolerance: float = 1e-6
    samples: int = 10_000
    seed: int = 0
    burn_in: int | None = None
    damping: float = 0.0
    schedule: str = "sequential"

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(self.samples, seed=self.seed, burn_in=self.burn_in)

    def lbp_config(self) -> LbpConfig:
        return LbpConfig(
            max_iterations=self.iterations,
            tolerance=self.tolerance,
            schedule=self.schedule,
            damping=self.damping,
        )


def run_engine(
    net: BayesianNetwork,
    engine: str,
    evidence: Assignment,
    options: EngineOptions | None = None,
    targets=None,
) -> QueryResult:
    opts = options or EngineOptions()
    if engine == "enum":
        return enumeration_query(net, evidence, targets=targets)
    if engine == "sumprod":
        return sum_product_polytree(net, evidence)
    if engine == "jt":
        return junction_tree_propagate(build_junction_tree(net), evidence)
    if engine == "lbp":
        return loopy_bp(net, evidence, opts.lbp_config())
    if engine == "direct":
        if evidence:
            raise EngineError(
                "evidence-unsupported",
                "direct sampling cannot condition on evidence",
            )
        return direct_sample_query(net, opts.sampler_config())
    if engine == "reject":
        return rejection_query(net, evidence, opts.sampler_config())
    if engine == "lw":
        return likelihood_weighting(net, evidence, opts.sampler_config())
    if engine == "gibbs":
        return gibbs_sampling(net, evidence, opts.sampler_config())
    if engine == "vmp":
        result, _ = vmp_query(
            net, evidence, max_sweeps=opts.iterations, tolerance=opts.tolerance
        )
        return result
    raise EngineError("unknown-engine", f"unknown engine id {engine!r}")
