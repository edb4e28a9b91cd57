"""Multi-criteria sensor ranking by closeness to the ideal solution.

The ranking pipeline is: column-wise vector normalization, direction-aware
positive/negative ideal points, Euclidean distances to both ideals, and the
relative closeness ``s- / (s+ + s-)``. Options are returned best first
(descending closeness), with ties broken by ascending input index so the
result is fully deterministic. A uniform random baseline selector is
provided for comparison runs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import CONTEXT_FIELDS, GenericSensor

MAXIMIZE = "max"
MINIMIZE = "min"


class EmptySensorListError(ValueError):
    """Raised when a selection is requested over zero sensors."""


class UnknownCriterionError(KeyError):
    """Raised when a criterion names a field that is not a context property."""


@dataclass(frozen=True, slots=True)
class CriterionSpec:
    """A named criterion and whether bigger values are better."""

    name: str
    direction: str

    def __post_init__(self) -> None:
        if self.direction not in (MAXIMIZE, MINIMIZE):
            raise ValueError(f"direction must be '{MAXIMIZE}' or '{MINIMIZE}': {self.direction!r}")


#: Ranking convention for the six context properties: battery and sampling
#: frequency are benefits, everything else is a cost.
DEFAULT_CRITERIA = (
    CriterionSpec("battery", MAXIMIZE),
    CriterionSpec("price", MINIMIZE),
    CriterionSpec("drift", MINIMIZE),
    CriterionSpec("frequency", MAXIMIZE),
    CriterionSpec("energy_consumption", MINIMIZE),
    CriterionSpec("response_time", MINIMIZE),
)


@dataclass(frozen=True)
class DecisionMatrix:
    """Options x criteria value matrix.

    ``values[i][j]`` is option ``i`` scored on criterion ``j``. All entries
    must be finite; criterion names must be unique.
    """

    options: tuple
    criteria: tuple[CriterionSpec, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "options", tuple(self.options))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        if len(self.options) < 1:
            raise ValueError("matrix needs at least one option")
        if len(self.criteria) < 1:
            raise ValueError("matrix needs at least one criterion")
        names = [c.name for c in self.criteria]
        if len(set(names)) != len(names):
            raise ValueError(f"criterion names must be unique: {names}")
        if values.shape != (len(self.options), len(self.criteria)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.options)} options x {len(self.criteria)} criteria"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix entries must all be finite")
        values.flags.writeable = False


@dataclass(frozen=True)
class TopsisResult:
    """Ranking output: permutation of option indices plus the geometry."""

    order: tuple[int, ...]
    closeness: np.ndarray
    ideal_positive: np.ndarray
    ideal_negative: np.ndarray
    distances: tuple[np.ndarray, np.ndarray] = field(repr=False)


def normalize(m: DecisionMatrix) -> DecisionMatrix:
    """Scale every column to unit Euclidean norm.

    A column whose norm is zero (all-zero column) maps to all zeros rather
    than dividing by zero; every output column therefore has norm 1 or 0.
    """
    norms = np.sqrt(np.sum(m.values * m.values, axis=0))
    safe = np.where(norms == 0.0, 1.0, norms)
    return DecisionMatrix(m.options, m.criteria, m.values / safe)


def ideal_points(m: DecisionMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-criterion best and worst values of a normalized matrix.

    For a maximize criterion the positive ideal is the column max and the
    negative ideal the column min; minimize criteria swap the roles.
    """
    col_max = m.values.max(axis=0)
    col_min = m.values.min(axis=0)
    is_max = np.array([c.direction == MAXIMIZE for c in m.criteria])
    p_plus = np.where(is_max, col_max, col_min)
    p_minus = np.where(is_max, col_min, col_max)
    return p_plus, p_minus


def rank(m: DecisionMatrix, weights: Sequence[float] | None = None) -> TopsisResult:
    """Rank options best-first by relative closeness to the ideal solution.

    ``weights``, when given, multiply the normalized columns before the
    ideal points and distances are computed; by default all criteria count
    equally. Options whose distances to both ideals are zero (every option
    identical) get closeness 0.5.
    """
    normalized = normalize(m)
    values = normalized.values
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (len(m.criteria),):
            raise ValueError(f"expected {len(m.criteria)} weights, got {w.shape}")
        if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and > 0")
        values = values * w
        normalized = DecisionMatrix(m.options, m.criteria, values)

    p_plus, p_minus = ideal_points(normalized)
    d_plus = np.sqrt(np.sum((values - p_plus) ** 2, axis=1))
    d_minus = np.sqrt(np.sum((values - p_minus) ** 2, axis=1))
    total = d_plus + d_minus
    closeness = np.where(total == 0.0, 0.5, d_minus / np.where(total == 0.0, 1.0, total))

    n = len(m.options)
    order = np.lexsort((np.arange(n), -closeness))
    return TopsisResult(
        order=tuple(int(i) for i in order),
        closeness=closeness,
        ideal_positive=p_plus,
        ideal_negative=p_minus,
        distances=(d_plus, d_minus),
    )


def matrix_from_sensors(
    sensors: Sequence[GenericSensor], criteria: Sequence[CriterionSpec]
) -> DecisionMatrix:
    """Build a decision matrix from the sensors' context properties."""
    if not sensors:
        raise EmptySensorListError("cannot build a decision matrix from zero sensors")
    for c in criteria:
        if c.name not in CONTEXT_FIELDS:
            raise UnknownCriterionError(
                f"criterion {c.name!r} is not a context property {CONTEXT_FIELDS}"
            )
    names = [c.name for c in criteria]
    values = np.array(
        [[getattr(s.context, name) for name in names] for s in sensors], dtype=np.float64
    )
    return DecisionMatrix(tuple(s.id for s in sensors), tuple(criteria), values)


def select_top(
    sensors: Sequence[GenericSensor],
    criteria: Sequence[CriterionSpec],
    k: int,
) -> list[GenericSensor]:
    """Return the best ``min(k, len(sensors))`` sensors in ranked order."""
    if k < 1:
        raise ValueError(f"k must be >= 1: {k}")
    if not sensors:
        raise EmptySensorListError("cannot select from an empty sensor list")
    result = rank(matrix_from_sensors(sensors, criteria))
    return [sensors[i] for i in result.order[: min(k, len(sensors))]]


def select_random(
    sensors: Sequence[GenericSensor], k: int, seed: int
) -> list[GenericSensor]:
    """Uniform sample without replacement, deterministic under ``seed``."""
    if k < 1:
        raise ValueError(f"k must be >= 1: {k}")
    if not sensors:
        raise EmptySensorListError("cannot select from an empty sensor list")
    rng = random.Random(seed)
    return rng.sample(list(sensors), min(k, len(sensors)))
