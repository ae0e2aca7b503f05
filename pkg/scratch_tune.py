"""Scratch: explore headache-fixture variants for the LBP-vs-JT bound and
classification accuracy tradeoff. Not part of the package."""

import numpy as np

from bnkit import (
    DiscreteVariable,
    EngineError,
    LbpConfig,
    NoisyOrPotential,
    TablePotential,
    build_network,
    loopy_bp,
)
from bnkit.canonical import DeterministicPotential
from bnkit.junction import build_junction_tree, junction_tree_propagate
from bnkit.pgmx import FORMAT_VERSION, ModelDocument
from bnkit.evaluation import EvaluationPlan, classify_examples, generate_examples

B = lambda n: DiscreteVariable(n, ("false", "true"))

DIAGNOSES = ("BrainTumor", "ClusterHeadache", "MigraineWithAura",
             "MigraineWithoutAura", "TensionHeadache")


def build_variant(shared):
    """shared: set of strings naming which characteristics keep their
    second diagnosis parent."""
    nodes = [
        (B("BrainTumor"), [], TablePotential([0.97, 0.03])),
        (B("ClusterHeadache"), [], TablePotential([0.95, 0.05])),
        (B("MigraineWithAura"), [], TablePotential([0.9, 0.1])),
        (B("MigraineWithoutAura"), [], TablePotential([0.85, 0.15])),
        (B("TensionHeadache"), [], TablePotential([0.78, 0.22])),
        (B("Migraine"), ["MigraineWithAura", "MigraineWithoutAura"],
         DeterministicPotential("OR")),
        (B("Headache"), ["BrainTumor", "ClusterHeadache", "Migraine", "TensionHeadache"],
         NoisyOrPotential([0.98, 0.99, 0.99, 0.98], 0.08)),
        (B("AuraSymptoms"), ["MigraineWithAura"], NoisyOrPotential([0.98], 0.02)),
    ]
    if "nausea" in shared:
        nodes.append((B("Nausea"), ["Migraine", "BrainTumor"],
                      NoisyOrPotential([0.75, 0.9], 0.05)))
    else:
        nodes.append((B("Nausea"), ["Migraine"], NoisyOrPotential([0.78], 0.06)))
    nodes.append((B("Photophobia"), ["Migraine"], NoisyOrPotential([0.88], 0.05)))
    nodes.append((B("Phonophobia"), ["Migraine"], NoisyOrPotential([0.85], 0.05)))
    if "unilateral" in shared:
        nodes.append((B("PainLocationUnilateral"), ["ClusterHeadache", "Migraine"],
                      NoisyOrPotential([0.85, 0.6], 0.05)))
    else:
        nodes.append((B("PainLocationUnilateral"), ["ClusterHeadache"],
                      NoisyOrPotential([0.88], 0.1)))
    nodes.append((B("IpsilateralLacrimination"), ["ClusterHeadache"],
                  TablePotential([0.98, 0.02, 0.12, 0.88])))
    nodes.append((B("Restlessness"), ["ClusterHeadache"],
                  TablePotential([0.95, 0.05, 0.15, 0.85])))
    nodes.append((B("Vomiting"), ["BrainTumor"], NoisyOrPotential([0.9], 0.04)))
    nodes.append((B("Anorexia"), ["BrainTumor"],
                  TablePotential([0.98, 0.02, 0.12, 0.88])))
    dur = DiscreteVariable("PainDuration", ("Hours", "Days", "Years"), ordered=True)
    if "duration" in shared:
        nodes.append((dur, ["ClusterHeadache", "TensionHeadache"],
                      TablePotential([0.45, 0.35, 0.2, 0.85, 0.1, 0.05,
                                      0.1, 0.3, 0.6, 0.55, 0.25, 0.2])))
    else:
        nodes.append((dur, ["TensionHeadache"],
                      TablePotential([0.5, 0.35, 0.15, 0.1, 0.3, 0.6])))
    qual = DiscreteVariable("PainQuality", ("Pulsating", "Stabbing", "Other"))
    if "quality" in shared:
        nodes.append((qual, ["Migraine", "TensionHeadache"],
                      TablePotential([0.15, 0.35, 0.5, 0.78, 0.07, 0.15,
                                      0.1, 0.15, 0.75, 0.5, 0.15, 0.35])))
    else:
        nodes.append((qual, ["TensionHeadache"],
                      TablePotential([0.3, 0.35, 0.35, 0.1, 0.15, 0.75])))
    return build_network(nodes)


CHARS = ("AuraSymptoms", "Nausea", "Photophobia", "Phonophobia",
         "PainLocationUnilateral", "IpsilateralLacrimination", "Restlessness",
         "Vomiting", "Anorexia", "PainDuration", "PainQuality")


def lbp_tail(net, n_trials=500):
    jt = build_junction_tree(net)
    errs = []
    rng = np.random.default_rng(20250815)
    for trial in range(n_trials):
        mode = rng.random()
        if mode < 0.5:
            k = int(rng.integers(0, 4))
            picked = rng.choice(len(net), size=min(k, len(net) - 1), replace=False)
            ev = {net.variables[int(i)].name:
                  int(rng.integers(net.variables[int(i)].cardinality))
                  for i in picked}
        else:
            k = int(rng.integers(0, 8))
            picked = rng.choice(len(CHARS), size=k, replace=False)
            ev = {CHARS[int(i)]:
                  int(rng.integers(net.variable(CHARS[int(i)]).cardinality))
                  for i in picked}
            if rng.random() < 0.3:
                ev["Headache"] = 1
        try:
            exact = junction_tree_propagate(jt, ev)
        except EngineError:
            continue
        approx = loopy_bp(net, ev, LbpConfig(max_iterations=500))
        if not approx.diagnostics.converged:
            errs.append(1.0)
            continue
        errs.append(max(float(np.max(np.abs(approx[n].probabilities
                                            - exact[n].probabilities)))
                        for n in exact.posteriors))
    return np.array(errs)


def accuracy(net, n=100):
    doc = ModelDocument(FORMAT_VERSION, net)
    plan = EvaluationPlan(doc, DIAGNOSES, CHARS, per_diagnosis_count=n,
                          generation_engine="jt", classification_engines=("jt",),
                          seed=20250810)
    report = classify_examples(plan, generate_examples(plan))
    return {d: report.rows[(d, "jt", "jt")].percent for d in DIAGNOSES}


if __name__ == "__main__":
    import sys
    variants = {
        "all4": {"nausea", "unilateral", "duration", "quality"},
        "three": {"nausea", "duration", "quality"},
        "two": {"nausea", "duration"},
        "two-b": {"unilateral", "quality"},
        "one": {"duration"},
    }
    for name, shared in variants.items():
        net = build_variant(shared)
        errs = lbp_tail(net, 400)
        acc = accuracy(net, 100)
        print(f"{name:7s} lbp max {errs.max():.4f} frac>0.05 "
              f"{(errs > 0.05).mean():.3f}  acc min {min(acc.values()):5.1f}  {acc}")
        sys.stdout.flush()
