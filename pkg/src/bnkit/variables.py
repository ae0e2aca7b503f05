"""Core value types: variables, assignments, distributions, validation findings."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ModelError

# Probabilities are float64 throughout.  Entries may stray this far outside
# [0, 1] before validation rejects them; anything closer is clamped.
VALUE_SLACK = 1e-12
# A conditional-table row must sum to 1 within this tolerance.
ROW_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DiscreteVariable:
    """A named random variable with an ordered finite state space.

    State order is significant: it fixes table layout and is the value
    order used by MAX/MIN/INV deterministic functions and noisy MAX.
    ``ordered=True`` marks the domain as usable by those order-sensitive
    models.
    """

    name: str
    states: tuple[str, ...]
    ordered: bool = False

    def __post_init__(self):
        if not self.name:
            raise ModelError("empty-name", "variable name must be non-empty")
        if len(self.states) < 1:
            raise ModelError("empty-states", f"variable {self.name!r} has no states")
        if len(set(self.states)) != len(self.states):
            raise ModelError(
                "duplicate-state", f"variable {self.name!r} has repeated state names"
            )
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise ModelError(
                "unknown-state",
                f"variable {self.name!r} has no state {state!r}",
            ) from None

    def is_boolean(self) -> bool:
        """True when the state space is exactly (false, true) in that order.

        Noisy OR/AND and the logical deterministic functions require this
        layout; other orderings are rejected rather than silently permuted.
        """
        return len(self.states) == 2 and tuple(s.lower() for s in self.states) == (
            "false",
            "true",
        )


# An assignment binds variable names to state indices.
Assignment = Mapping[str, int]


@dataclass
class Distribution:
    """A normalized probability distribution over one variable's states."""

    variable: DiscreteVariable
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (self.variable.cardinality,):
            raise ModelError(
                "shape-mismatch",
                f"distribution over {self.variable.name!r} has {p.shape} values, "
                f"expected {self.variable.cardinality}",
            )
        if np.any(p < -VALUE_SLACK):
            raise ModelError(
                "negative-probability",
                f"distribution over {self.variable.name!r} has negative entries",
            )
        total = p.sum()
        if total <= 0:
            raise ModelError(
                "zero-distribution",
                f"distribution over {self.variable.name!r} has zero total mass",
            )
        self.probabilities = np.clip(p, 0.0, None) / total

    def __getitem__(self, state_index: int) -> float:
        return float(self.probabilities[state_index])

    def argmax(self) -> int:
        """Index of the most probable state; ties go to the earlier state."""
        return int(np.argmax(self.probabilities))

    def as_dict(self) -> dict[str, float]:
        return {
            s: float(p) for s, p in zip(self.variable.states, self.probabilities)
        }

    @classmethod
    def point_mass(cls, variable: DiscreteVariable, state_index: int) -> "Distribution":
        p = np.zeros(variable.cardinality)
        p[state_index] = 1.0
        return cls(variable, p)


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    location: str

    def __str__(self):
        return f"[{self.code}] {self.location}: {self.message}"


@dataclass
class ValidationReport:
    """Outcome of network validation.

    A network is usable by the inference engines iff ``errors`` is empty.
    """

    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def add_error(self, code: str, message: str, location: str):
        self.errors.append(Finding(code, message, location))

    def add_warning(self, code: str, message: str, location: str):
        self.warnings.append(Finding(code, message, location))

    def error_codes(self) -> list[str]:
        return [f.code for f in self.errors]


def check_probability_values(values: np.ndarray) -> bool:
    """True when every entry lies in [0,1] up to VALUE_SLACK."""
    return bool(
        np.all(values >= -VALUE_SLACK) and np.all(values <= 1.0 + VALUE_SLACK)
    )


def clamp_probabilities(values: np.ndarray) -> np.ndarray:
    return np.clip(values, 0.0, 1.0)


def format_states(variable: DiscreteVariable, indices: Sequence[int]) -> str:
    return ", ".join(variable.states[i] for i in indices)
