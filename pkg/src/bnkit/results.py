"""Query results and engine diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .variables import Distribution


@dataclass
class Diagnostics:
    engine: str
    iterations: int = 0
    converged: bool = True
    wall_time: float = 0.0
    messages: int | None = None
    samples: int | None = None
    accepted: int | None = None
    acceptance_rate: float | None = None

    def as_dict(self, include_timing: bool = True) -> dict:
        out = {
            "engine": self.engine,
            "iterations": self.iterations,
            "converged": self.converged,
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        for key in ("messages", "samples", "accepted", "acceptance_rate"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


@dataclass
class QueryResult:
    """Per-variable posteriors plus how the engine got there."""

    posteriors: dict[str, Distribution]
    evidence_probability: float | None = None
    diagnostics: Diagnostics = field(
        default_factory=lambda: Diagnostics(engine="unknown")
    )

    def __getitem__(self, name: str) -> Distribution:
        return self.posteriors[name]

    def as_dict(self, include_timing: bool = True) -> dict:
        out = {
            "posteriors": {
                name: dist.as_dict() for name, dist in self.posteriors.items()
            },
            "diagnostics": self.diagnostics.as_dict(include_timing),
        }
        if self.evidence_probability is not None:
            out["evidence_probability"] = self.evidence_probability
        return out


def query_result_from_dict(net, payload: dict) -> QueryResult:
    """Rebuild a QueryResult from its JSON form (needs the network for the
    state spaces)."""
    posteriors = {}
    for name, by_state in payload["posteriors"].items():
        var = net.variable(name)
        posteriors[name] = Distribution(
            var, np.array([by_state[s] for s in var.states])
        )
    diag = payload.get("diagnostics", {})
    return QueryResult(
        posteriors,
        evidence_probability=payload.get("evidence_probability"),
        diagnostics=Diagnostics(
            engine=diag.get("engine", "unknown"),
            iterations=diag.get("iterations", 0),
            converged=diag.get("converged", True),
            wall_time=diag.get("wall_time", 0.0),
            messages=diag.get("messages"),
            samples=diag.get("samples"),
            accepted=diag.get("accepted"),
            acceptance_rate=diag.get("acceptance_rate"),
        ),
    )
