"""Conditional-distribution models and their expansion into flat tables.

A variable's local model is one of:

* ``TablePotential`` -- explicit conditional probability table,
* ``DeterministicPotential`` -- child is a function of its parents,
* ``NoisyOrPotential`` / ``NoisyMaxPotential`` / ``NoisyAndPotential`` --
  independence-of-causal-influence models parameterized per parent.

Expansion turns any of them into a dense table.  Internally tables are
float64 arrays with one axis per parent (declared order) followed by the
child axis, so ``table[p1, ..., pk, y]`` is P(y | p1, ..., pk).  The flat
on-disk layout puts the child index fastest and later parents progressively
slower; ``table_from_flat`` / ``flat_from_table`` convert between the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ModelError
from .variables import (
    Assignment,
    DiscreteVariable,
    ROW_TOLERANCE,
    check_probability_values,
    clamp_probabilities,
)

DETERMINISTIC_FUNCTIONS = ("NOT", "OR", "AND", "MINUS", "INV", "MAX", "MIN")


@dataclass(frozen=True)
class TablePotential:
    """Flat conditional table, child index fastest."""

    values: tuple[float, ...]

    def __init__(self, values: Sequence[float]):
        object.__setattr__(self, "values", tuple(float(v) for v in values))


@dataclass(frozen=True)
class DeterministicPotential:
    fn: str

    def __post_init__(self):
        if self.fn not in DETERMINISTIC_FUNCTIONS:
            raise ModelError(
                "unknown-function", f"unknown deterministic function {self.fn!r}"
            )


@dataclass(frozen=True)
class NoisyOrPotential:
    """Per-parent activation probabilities c_i; inhibitors are q_i = 1 - c_i.

    The optional leak acts as one extra, always-active cause.
    """

    c: tuple[float, ...]
    leak: float | None = None

    def __init__(self, c: Sequence[float], leak: float | None = None):
        object.__setattr__(self, "c", tuple(float(v) for v in c))
        object.__setattr__(self, "leak", None if leak is None else float(leak))


@dataclass(frozen=True)
class NoisyMaxPotential:
    """Per-parent matrices c[parent_state][child_state]; rows are distributions
    over the child values the parent pushes the child towards.  The optional
    leak is a single child-state distribution from a virtual always-on cause.
    """

    c: tuple[tuple[tuple[float, ...], ...], ...]
    leak: tuple[float, ...] | None = None

    def __init__(self, c, leak=None):
        object.__setattr__(
            self,
            "c",
            tuple(tuple(tuple(float(v) for v in row) for row in m) for m in c),
        )
        object.__setattr__(
            self, "leak", None if leak is None else tuple(float(v) for v in leak)
        )


@dataclass(frozen=True)
class NoisyAndPotential:
    """Per-parent condition probabilities c_i and substitute probabilities s_i."""

    c: tuple[float, ...]
    s: tuple[float, ...]

    def __init__(self, c: Sequence[float], s: Sequence[float]):
        object.__setattr__(self, "c", tuple(float(v) for v in c))
        object.__setattr__(self, "s", tuple(float(v) for v in s))


Potential = Union[
    TablePotential,
    DeterministicPotential,
    NoisyOrPotential,
    NoisyMaxPotential,
    NoisyAndPotential,
]


# ---------------------------------------------------------------------------
# Flat <-> dense layout
# ---------------------------------------------------------------------------


def table_from_flat(
    values: Sequence[float], parent_cards: Sequence[int], child_card: int
) -> np.ndarray:
    """Reshape a flat value list (child fastest) into (parents..., child) axes."""
    flat = np.asarray(values, dtype=float)
    expected = child_card * int(np.prod(parent_cards, dtype=np.int64))
    if flat.size != expected:
        raise ModelError(
            "table-size-mismatch",
            f"table has {flat.size} values, expected {expected}",
        )
    shaped = flat.reshape((child_card, *parent_cards), order="F")
    return np.moveaxis(shaped, 0, -1)


def flat_from_table(table: np.ndarray) -> np.ndarray:
    """Inverse of table_from_flat."""
    return np.moveaxis(table, -1, 0).ravel(order="F")


def _check_unit_interval(values, what: str):
    arr = np.asarray(values, dtype=float)
    if not check_probability_values(arr):
        raise ModelError(
            "parameter-out-of-range", f"{what} must lie in [0, 1], got {arr}"
        )


def _require_boolean(variables: Sequence[DiscreteVariable], model: str):
    for v in variables:
        if not v.is_boolean():
            raise ModelError(
                "non-binary",
                f"{model} requires binary variables with state order (false, true); "
                f"{v.name!r} has states {v.states}",
            )


# ---------------------------------------------------------------------------
# Expansion
# ---------------------------------------------------------------------------


def expand_table(
    pot: TablePotential,
    parents: Sequence[DiscreteVariable],
    child: DiscreteVariable,
) -> np.ndarray:
    table = table_from_flat(
        pot.values, [p.cardinality for p in parents], child.cardinality
    )
    if not check_probability_values(table):
        raise ModelError(
            "negative-probability",
            f"table for {child.name!r} has entries outside [0, 1]",
        )
    table = clamp_probabilities(table)
    rows = table.sum(axis=-1)
    if not np.allclose(rows, 1.0, atol=ROW_TOLERANCE, rtol=0.0):
        raise ModelError(
            "row-not-normalized",
            f"table rows for {child.name!r} do not sum to 1 "
            f"(worst row sum {rows.flat[np.argmax(np.abs(rows - 1.0))]:.12g})",
        )
    return table


def expand_noisy_or(
    c: Sequence[float],
    leak: float | None,
    parents: Sequence[DiscreteVariable],
    child: DiscreteVariable,
) -> np.ndarray:
    """P(not-y | x) = (1 - leak) * prod over active causes of (1 - c_i)."""
    _check_unit_interval(c, "noisy OR c parameters")
    if leak is not None:
        _check_unit_interval([leak], "noisy OR leak")
    if len(c) != len(parents):
        raise ModelError(
            "arity-mismatch",
            f"noisy OR for {child.name!r} has {len(c)} parameters "
            f"for {len(parents)} parents",
        )
    _require_boolean([child, *parents], "noisy OR")
    p_not_y = np.array(1.0 - (leak or 0.0))
    for ci in c:
        p_not_y = np.multiply.outer(p_not_y, np.array([1.0, 1.0 - ci]))
    return np.stack([p_not_y, 1.0 - p_not_y], axis=-1)


def expand_noisy_max(
    c: Sequence[Sequence[Sequence[float]]],
    leak: Sequence[float] | None,
    parents: Sequence[DiscreteVariable],
    child: DiscreteVariable,
) -> np.ndarray:
    """Accumulate per-parent CDFs and multiply: P(Y <= y | x) = prod_i C_y^{x_i}."""
    if len(c) != len(parents):
        raise ModelError(
            "arity-mismatch",
            f"noisy MAX for {child.name!r} has {len(c)} matrices "
            f"for {len(parents)} parents",
        )
    if not child.ordered:
        raise ModelError(
            "unordered-domain",
            f"noisy MAX child {child.name!r} must be an ordered variable",
        )
    n_y = child.cardinality
    matrices = []
    for parent, m in zip(parents, c):
        arr = np.asarray(m, dtype=float)
        if arr.shape != (parent.cardinality, n_y):
            raise ModelError(
                "shape-mismatch",
                f"noisy MAX matrix for parent {parent.name!r} has shape "
                f"{arr.shape}, expected {(parent.cardinality, n_y)}",
            )
        _check_unit_interval(arr, f"noisy MAX matrix for {parent.name!r}")
        if not np.allclose(arr.sum(axis=1), 1.0, atol=ROW_TOLERANCE, rtol=0.0):
            raise ModelError(
                "row-not-normalized",
                f"noisy MAX matrix rows for parent {parent.name!r} must each sum to 1",
            )
        matrices.append(arr)

    if leak is None:
        cdf = np.ones(n_y)
    else:
        leak_arr = np.asarray(leak, dtype=float)
        if leak_arr.shape != (n_y,):
            raise ModelError(
                "shape-mismatch",
                f"noisy MAX leak must be a distribution over {n_y} child states",
            )
        _check_unit_interval(leak_arr, "noisy MAX leak")
        if not np.isclose(leak_arr.sum(), 1.0, atol=ROW_TOLERANCE, rtol=0.0):
            raise ModelError(
                "row-not-normalized", "noisy MAX leak distribution must sum to 1"
            )
        cdf = np.cumsum(leak_arr)

    k = len(parents)
    for j, arr in enumerate(matrices):
        parent_cdf = np.cumsum(arr, axis=1)
        shape = [1] * k + [n_y]
        shape[j] = parents[j].cardinality
        cdf = cdf * parent_cdf.reshape(shape)
    table = np.diff(cdf, axis=-1, prepend=0.0)
    return np.maximum(table, 0.0)


def expand_noisy_and(
    c: Sequence[float],
    s: Sequence[float],
    parents: Sequence[DiscreteVariable],
    child: DiscreteVariable,
) -> np.ndarray:
    """P(+y | x) = prod over met conditions of c_i times prod over unmet of s_j."""
    _check_unit_interval(c, "noisy AND c parameters")
    _check_unit_interval(s, "noisy AND s parameters")
    if len(c) != len(parents) or len(s) != len(parents):
        raise ModelError(
            "arity-mismatch",
            f"noisy AND for {child.name!r} needs one (c, s) pair per parent",
        )
    _require_boolean([child, *parents], "noisy AND")
    p_y = np.array(1.0)
    for ci, si in zip(c, s):
        p_y = np.multiply.outer(p_y, np.array([si, ci]))
    return np.stack([1.0 - p_y, p_y], axis=-1)


def _integer_states(variable: DiscreteVariable) -> list[int] | None:
    try:
        return [int(s) for s in variable.states]
    except ValueError:
        return None


def expand_deterministic(
    fn: str,
    parents: Sequence[DiscreteVariable],
    child: DiscreteVariable,
) -> np.ndarray:
    """Indicator table: P(y | x) = 1 where y = fn(x), 0 elsewhere."""
    if fn not in DETERMINISTIC_FUNCTIONS:
        raise ModelError("unknown-function", f"unknown deterministic function {fn!r}")
    unary = fn in ("NOT", "MINUS", "INV")
    if unary and len(parents) != 1:
        raise ModelError(
            "arity-mismatch", f"{fn} takes exactly one parent, got {len(parents)}"
        )
    if not unary and len(parents) < 1:
        raise ModelError("arity-mismatch", f"{fn} needs at least one parent")

    if fn in ("NOT", "OR", "AND"):
        _require_boolean([child, *parents], fn)
    else:
        for v in (child, *parents):
            if not v.ordered:
                raise ModelError(
                    "unordered-domain",
                    f"{fn} requires ordered variables, {v.name!r} is not ordered",
                )

    if fn in ("MAX", "MIN", "INV"):
        for p in parents:
            if p.cardinality != child.cardinality:
                raise ModelError(
                    "incompatible-domains",
                    f"{fn} needs parent {p.name!r} and child {child.name!r} "
                    "to have equally sized state spaces",
                )

    child_value_index = None
    if fn == "MINUS":
        parent_values = _integer_states(parents[0])
        child_values = _integer_states(child)
        if parent_values is None or child_values is None:
            raise ModelError(
                "incompatible-domains",
                "MINUS requires integer-valued state names on parent and child",
            )
        if sorted(parent_values) != sorted(-v for v in parent_values):
            raise ModelError(
                "incompatible-domains",
                f"MINUS parent {parents[0].name!r} domain is not symmetric about zero",
            )
        child_value_index = {v: i for i, v in enumerate(child_values)}
        for v in parent_values:
            if -v not in child_value_index:
                raise ModelError(
                    "incompatible-domains",
                    f"MINUS child {child.name!r} lacks a state named {-v}",
                )

    parent_cards = [p.cardinality for p in parents]
    table = np.zeros((*parent_cards, child.cardinality))
    for config in np.ndindex(*parent_cards):
        if fn == "NOT":
            y = 1 - config[0]
        elif fn == "OR":
            y = int(any(config))
        elif fn == "AND":
            y = int(all(config))
        elif fn == "MAX":
            y = max(config)
        elif fn == "MIN":
            y = min(config)
        elif fn == "INV":
            y = child.cardinality - 1 - config[0]
        else:  # MINUS
            y = child_value_index[-_integer_states(parents[0])[config[0]]]
        table[(*config, y)] = 1.0
    return table


def expand_potential(
    pot: Potential,
    parents: Sequence[DiscreteVariable],
    child: DiscreteVariable,
) -> np.ndarray:
    if isinstance(pot, TablePotential):
        return expand_table(pot, parents, child)
    if isinstance(pot, DeterministicPotential):
        return expand_deterministic(pot.fn, parents, child)
    if isinstance(pot, NoisyOrPotential):
        return expand_noisy_or(pot.c, pot.leak, parents, child)
    if isinstance(pot, NoisyMaxPotential):
        return expand_noisy_max(pot.c, pot.leak, parents, child)
    if isinstance(pot, NoisyAndPotential):
        return expand_noisy_and(pot.c, pot.s, parents, child)
    raise ModelError("unknown-potential", f"unsupported potential {type(pot).__name__}")


# ---------------------------------------------------------------------------
# CPT trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CptTreeNode:
    variable: DiscreteVariable
    # one branch per state of `variable`; inner levels hold nodes, the child
    # level holds leaf probabilities
    branches: tuple


@dataclass(frozen=True)
class CptTree:
    """A conditional table as nested case distinctions.

    Levels run through the parents in declared order and end at the child,
    so each root-to-leaf path selects exactly one table row entry.
    """

    variables: tuple[DiscreteVariable, ...]
    root: CptTreeNode

    def leaf_count(self) -> int:
        def count(node):
            if not isinstance(node, CptTreeNode):
                return 1
            return sum(count(b) for b in node.branches)

        return count(self.root)


def build_cpt_tree(
    table,
    parents: Sequence[DiscreteVariable],
    child: DiscreteVariable,
) -> CptTree:
    """Compile a table (flat potential or dense array) into a CptTree."""
    if isinstance(table, TablePotential):
        table = expand_table(table, parents, child)
    table = np.asarray(table, dtype=float)
    variables = (*parents, child)
    expected = tuple(v.cardinality for v in variables)
    if table.shape != expected:
        raise ModelError(
            "table-size-mismatch",
            f"table shape {table.shape} does not match variables {expected}",
        )

    def build(level: int, index: tuple[int, ...]) -> CptTreeNode:
        var = variables[level]
        if level == len(variables) - 1:
            leaves = tuple(float(table[(*index, y)]) for y in range(var.cardinality))
            return CptTreeNode(var, leaves)
        return CptTreeNode(
            var,
            tuple(build(level + 1, (*index, s)) for s in range(var.cardinality)),
        )

    return CptTree(variables, build(0, ()))


def cpt_tree_lookup(tree: CptTree, assignment: Assignment) -> float:
    """Follow the assignment down the tree and return the leaf probability."""
    node = tree.root
    for var in tree.variables:
        if var.name not in assignment:
            raise ModelError(
                "unbound-variable",
                f"assignment does not bind tree level {var.name!r}",
            )
        state = assignment[var.name]
        if not 0 <= state < var.cardinality:
            raise ModelError(
                "unknown-state",
                f"state index {state} out of range for {var.name!r}",
            )
        node = node.branches[state]
    return float(node)
