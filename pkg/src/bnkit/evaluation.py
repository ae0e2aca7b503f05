"""Self-sampling diagnostic-quality evaluation.

For each diagnosis, force it true and all other diagnoses false, infer each
characteristic's conditional distribution with the generation engine, and
draw labeled examples by sampling every characteristic independently from
its marginal.  Then observe those characteristics, classify with each
inference engine by the highest diagnosis posterior, and report the share
of correctly recovered diagnoses per (diagnosis, sampler, engine) cell.

Intermediate diagnosis nodes are never forced: only the configured leaf
diagnoses enter the generating evidence, the rest stay latent (recorded in
the report metadata).  Sampling per characteristic follows the protocol
exactly and deliberately ignores inter-characteristic correlation.

Example generation is embarrassingly parallel: the random stream of an
example depends only on (seed, diagnosis position, example number), so any
execution order or parallel split produces identical examples.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .engines import ENGINE_IDS, EngineOptions, run_engine
from .errors import BnkitError, EngineError, ModelError
from .network import BayesianNetwork
from .pgmx import ModelDocument, parse_model
from .variables import Distribution

FIXTURE_NAMES = ("heart_attack", "headache")

HEADACHE_DIAGNOSES = (
    "BrainTumor",
    "ClusterHeadache",
    "MigraineWithAura",
    "MigraineWithoutAura",
    "TensionHeadache",
)
HEADACHE_CHARACTERISTICS = (
    "AuraSymptoms",
    "Nausea",
    "Photophobia",
    "Phonophobia",
    "PainLocationUnilateral",
    "IpsilateralLacrimination",
    "Restlessness",
    "Vomiting",
    "Anorexia",
    "PainDuration",
    "PainQuality",
)


def load_fixture(name: str) -> ModelDocument:
    """One of the pinned example networks shipped with the package."""
    if name not in FIXTURE_NAMES:
        raise ModelError(
            "unknown-fixture",
            f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}",
        )
    data = resources.files("bnkit").joinpath(f"fixtures/{name}.pgmx").read_bytes()
    return parse_model(data)


@dataclass
class EvaluationPlan:
    model: ModelDocument
    diagnosis_vars: tuple[str, ...]
    characteristic_vars: tuple[str, ...]
    per_diagnosis_count: int = 200
    generation_engine: str = "jt"
    classification_engines: tuple[str, ...] = ("enum", "jt", "lbp")
    seed: int = 0
    engine_options: EngineOptions = field(default_factory=EngineOptions)
    intermediate_policy: str = "latent"  # leaf diagnoses forced, the rest free

    def __post_init__(self):
        self.diagnosis_vars = tuple(self.diagnosis_vars)
        self.characteristic_vars = tuple(self.characteristic_vars)
        self.classification_engines = tuple(self.classification_engines)
        if not self.diagnosis_vars or not self.characteristic_vars:
            raise ModelError(
                "bad-plan", "diagnosis and characteristic sets must be non-empty"
            )
        if set(self.diagnosis_vars) & set(self.characteristic_vars):
            raise ModelError(
                "bad-plan", "diagnosis and characteristic sets must be disjoint"
            )
        if self.per_diagnosis_count < 0:
            raise ModelError("bad-plan", "per_diagnosis_count must be >= 0")
        for engine in (self.generation_engine, *self.classification_engines):
            if engine not in ENGINE_IDS:
                raise ModelError("unknown-engine", f"unknown engine id {engine!r}")
        net = self.model.network
        for name in (*self.diagnosis_vars, *self.characteristic_vars):
            net.var_index(name)


@dataclass
class LabeledExample:
    expected_diagnosis: str
    observations: dict[str, int]  # characteristic name -> state index
    example_id: str


@dataclass
class CellScore:
    correct: int = 0
    total: int = 0

    @property
    def percent(self) -> float:
        return 100.0 * self.correct / self.total if self.total else 0.0


@dataclass
class AccuracyReport:
    # (diagnosis, sampler engine, classification engine) -> score
    rows: dict[tuple[str, str, str], CellScore] = field(default_factory=dict)
    # per example and classifier: every diagnosis posterior
    posterior_matrix: list[dict] = field(default_factory=list)
    misclassifications: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def cell(self, diagnosis: str, sampler: str, engine: str) -> CellScore:
        return self.rows.setdefault((diagnosis, sampler, engine), CellScore())

    def percent(self, diagnosis: str, sampler: str, engine: str) -> float:
        return self.rows[(diagnosis, sampler, engine)].percent

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["diagnosis", "sampler", "engine", "correct", "total", "percent"])
        for (diagnosis, sampler, engine), score in self.rows.items():
            writer.writerow(
                [diagnosis, sampler, engine, score.correct, score.total, score.percent]
            )
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "metadata": self.metadata,
            "rows": [
                {
                    "diagnosis": diagnosis,
                    "sampler": sampler,
                    "engine": engine,
                    "correct": score.correct,
                    "total": score.total,
                    "percent": score.percent,
                }
                for (diagnosis, sampler, engine), score in self.rows.items()
            ],
            "posteriors": self.posterior_matrix,
            "misclassifications": self.misclassifications,
            "failures": self.failures,
        }
        return json.dumps(payload, sort_keys=True, indent=2)


def _forced_evidence(net: BayesianNetwork, plan: EvaluationPlan, diagnosis: str):
    evidence = {}
    for d in plan.diagnosis_vars:
        var = net.variable(d)
        evidence[d] = var.state_index("true" if d == diagnosis else "false")
    return evidence


def _example_rng(seed: int, diagnosis_pos: int, k: int) -> np.random.Generator:
    return np.random.default_rng([seed, diagnosis_pos, k])


def generate_examples(plan: EvaluationPlan) -> list[LabeledExample]:
    """Per diagnosis: infer characteristic marginals under the forced
    diagnosis evidence, then draw examples characteristic by characteristic."""
    net = plan.model.network
    examples: list[LabeledExample] = []
    for d_pos, diagnosis in enumerate(plan.diagnosis_vars):
        evidence = _forced_evidence(net, plan, diagnosis)
        try:
            result = run_engine(
                net, plan.generation_engine, evidence, plan.engine_options
            )
        except EngineError as err:
            raise EngineError(
                err.code,
                f"generation failed for diagnosis {diagnosis!r}: {err}",
            ) from err
        marginals: list[Distribution] = [
            result.posteriors[c] for c in plan.characteristic_vars
        ]
        cumulative = [np.cumsum(m.probabilities) for m in marginals]
        for k in range(plan.per_diagnosis_count):
            rng = _example_rng(plan.seed, d_pos, k)
            u = rng.random(len(marginals))
            observations = {}
            for c, cum, uk in zip(plan.characteristic_vars, cumulative, u):
                state = int((uk >= cum).sum())
                observations[c] = min(state, cum.size - 1)
            examples.append(
                LabeledExample(diagnosis, observations, f"{diagnosis}-{k}")
            )
    return examples


def classify_examples(
    plan: EvaluationPlan,
    examples: list[LabeledExample],
    report: AccuracyReport | None = None,
    sampler_label: str | None = None,
) -> AccuracyReport:
    """Observe each example's characteristics, compute diagnosis posteriors
    with every classification engine, and score argmax against the label.

    Ties at the top posterior go to the diagnosis declared first in the
    network.  Engine failures are recorded per example and count as wrong.
    """
    net = plan.model.network
    sampler = sampler_label or plan.generation_engine
    report = report or AccuracyReport()
    # identical observation vectors are frequent; posterior queries are cached
    cache: dict[tuple, object] = {}
    decl = {d: net.var_index(d) for d in plan.diagnosis_vars}
    by_declaration = sorted(plan.diagnosis_vars, key=decl.get)

    for engine in plan.classification_engines:
        for example in examples:
            score = report.cell(example.expected_diagnosis, sampler, engine)
            score.total += 1
            key = (engine, tuple(sorted(example.observations.items())))
            if key not in cache:
                try:
                    result = run_engine(
                        net,
                        engine,
                        example.observations,
                        plan.engine_options,
                        targets=list(plan.diagnosis_vars),
                    )
                    cache[key] = {
                        d: result.posteriors[d][net.variable(d).state_index("true")]
                        for d in plan.diagnosis_vars
                    }
                except BnkitError as err:
                    cache[key] = err
            outcome = cache[key]
            if isinstance(outcome, BnkitError):
                report.failures.append(
                    {
                        "example_id": example.example_id,
                        "sampler": sampler,
                        "engine": engine,
                        "error": outcome.code,
                    }
                )
                continue
            posteriors: dict[str, float] = outcome
            chosen = max(by_declaration, key=lambda d: posteriors[d])
            report.posterior_matrix.append(
                {
                    "example_id": example.example_id,
                    "sampler": sampler,
                    "engine": engine,
                    "expected": example.expected_diagnosis,
                    "chosen": chosen,
                    "posteriors": posteriors,
                }
            )
            if chosen == example.expected_diagnosis:
                score.correct += 1
            else:
                report.misclassifications.append(
                    {
                        "example_id": example.example_id,
                        "sampler": sampler,
                        "engine": engine,
                        "expected": example.expected_diagnosis,
                        "chosen": chosen,
                        "probability_gap": posteriors[chosen]
                        - posteriors[example.expected_diagnosis],
                    }
                )
    return report


def run_evaluation(
    model: ModelDocument,
    diagnosis_vars,
    characteristic_vars,
    per_diagnosis_count: int = 200,
    generation_engines=("jt", "lbp", "vmp"),
    classification_engines=("enum", "jt", "lbp"),
    seed: int = 0,
    engine_options: EngineOptions | None = None,
) -> AccuracyReport:
    """Full sampler-by-classifier grid in one report."""
    report = AccuracyReport()
    report.metadata = {
        "diagnoses": list(diagnosis_vars),
        "characteristics": list(characteristic_vars),
        "per_diagnosis_count": per_diagnosis_count,
        "generation_engines": list(generation_engines),
        "classification_engines": list(classification_engines),
        "seed": seed,
        "intermediate_policy": "latent",
    }
    for gen_engine in generation_engines:
        plan = EvaluationPlan(
            model=model,
            diagnosis_vars=tuple(diagnosis_vars),
            characteristic_vars=tuple(characteristic_vars),
            per_diagnosis_count=per_diagnosis_count,
            generation_engine=gen_engine,
            classification_engines=tuple(classification_engines),
            seed=seed,
            engine_options=engine_options or EngineOptions(),
        )
        examples = generate_examples(plan)
        classify_examples(plan, examples, report=report, sampler_label=gen_engine)
    return report
