"""Discrete Bayesian-network toolkit.

Knowledge representation (tables, deterministic nodes, noisy/leaky ICI
models), exact inference (enumeration, polytree sum-product, junction
trees), approximate inference (loopy BP, four samplers, mean-field
variational), a PGMX file format, and a self-sampling evaluation harness.
"""

from .canonical import (
    CptTree,
    DeterministicPotential,
    NoisyAndPotential,
    NoisyMaxPotential,
    NoisyOrPotential,
    Potential,
    TablePotential,
    build_cpt_tree,
    cpt_tree_lookup,
    expand_deterministic,
    expand_noisy_and,
    expand_noisy_max,
    expand_noisy_or,
)
from .engines import ENGINE_IDS, EngineOptions, run_engine
from .errors import BnkitError, EngineError, FormatError, ModelError
from .evaluation import (
    AccuracyReport,
    EvaluationPlan,
    LabeledExample,
    classify_examples,
    generate_examples,
    load_fixture,
    run_evaluation,
)
from .exact import enumeration_ask, enumeration_query, sum_product_polytree
from .factorgraph import Factor, FactorGraph, evaluate_factor, to_factor_graph
from .junction import JunctionTree, build_junction_tree, junction_tree_propagate
from .lbp import LbpConfig, loopy_bp
from .network import (
    BayesianNetwork,
    build_network,
    d_separated,
    joint_probability,
    markov_blanket,
    topological_order,
    validate_network,
)
from .pgmx import ModelDocument, inspect_model, parse_model, serialize_model
from .results import Diagnostics, QueryResult
from .sampling import (
    SamplerConfig,
    direct_sample,
    gibbs_query,
    likelihood_weighting_query,
    rejection_sample_query,
)
from .variables import DiscreteVariable, Distribution, ValidationReport
from .vmp import VmpState, vmp_query

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "BayesianNetwork",
    "BnkitError",
    "CptTree",
    "DeterministicPotential",
    "Diagnostics",
    "DiscreteVariable",
    "Distribution",
    "ENGINE_IDS",
    "EngineError",
    "EngineOptions",
    "EvaluationPlan",
    "Factor",
    "FactorGraph",
    "FormatError",
    "JunctionTree",
    "LabeledExample",
    "LbpConfig",
    "ModelDocument",
    "ModelError",
    "NoisyAndPotential",
    "NoisyMaxPotential",
    "NoisyOrPotential",
    "Potential",
    "QueryResult",
    "SamplerConfig",
    "TablePotential",
    "ValidationReport",
    "VmpState",
    "build_cpt_tree",
    "build_junction_tree",
    "build_network",
    "classify_examples",
    "cpt_tree_lookup",
    "d_separated",
    "direct_sample",
    "enumeration_ask",
    "enumeration_query",
    "evaluate_factor",
    "expand_deterministic",
    "expand_noisy_and",
    "expand_noisy_max",
    "expand_noisy_or",
    "generate_examples",
    "gibbs_query",
    "inspect_model",
    "joint_probability",
    "junction_tree_propagate",
    "likelihood_weighting_query",
    "load_fixture",
    "loopy_bp",
    "markov_blanket",
    "parse_model",
    "rejection_sample_query",
    "run_engine",
    "run_evaluation",
    "serialize_model",
    "sum_product_polytree",
    "to_factor_graph",
    "topological_order",
    "validate_network",
    "vmp_query",
]
