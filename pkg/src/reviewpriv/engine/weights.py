# src/reviewpriv/engine/weights.py

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, List, Optional, Sequence

import numpy as np

from ..exceptions import InstanceError

if TYPE_CHECKING:
    from .instance import Assignment

logger = logging.getLogger(__name__)

# Raw review scores and transformed weights are plain doubles.
Score = float
Weight = float

class TransformMode(str, Enum):
    """How raw review scores become the weights whose reviewer means are released."""
    IDENTITY = "identity"
    MISCALIBRATION = "miscalibration"
    SUBJECTIVITY_NORMALIZED = "subjectivity-normalized"
    SUBJECTIVITY_GAP = "subjectivity-gap"

@dataclass(frozen=True)
class MeanWeightVector:
    """Per-reviewer mean weights; nondecreasing whenever `sorted` is set."""
    entries: tuple
    sorted: bool = False

    def __post_init__(self):
        values = tuple(float(v) for v in self.entries)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("MeanWeightVector entries must be finite.")
        if self.sorted and any(a > b for a, b in zip(values, values[1:])):
            raise ValueError("A sorted MeanWeightVector must be nondecreasing.")
        object.__setattr__(self, 'entries', values)

    def __len__(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

# --- Score-to-weight transforms ---

def apply_weight_transform(
    scores_by_paper: Sequence[Sequence[Score]],
    mode: TransformMode,
    normalized_scores: Optional[Sequence[Sequence[Score]]] = None,
) -> List[List[Weight]]:
    """
    Turn each paper's ordered review scores into weights.

    Args:
        scores_by_paper: Row i holds the k_i scores paper i received.
        mode: The transform to apply.
        normalized_scores: Same shape as `scores_by_paper`; required by both
            subjectivity modes, ignored otherwise.

    Returns:
        List[List[float]]: Weights, position-aligned with the input scores.

    Raises:
        InstanceError: On a shape mismatch, a single-review paper under
            miscalibration, or missing normalized scores.
    """
    mode = TransformMode(mode)
    rows = [[float(s) for s in row] for row in scores_by_paper]

    if mode is TransformMode.IDENTITY:
        return rows

    if mode is TransformMode.MISCALIBRATION:
        weights = []
        for i, row in enumerate(rows):
            k = len(row)
            if k < 2:
                raise InstanceError(f"Miscalibration needs at least 2 reviews per paper; paper {i} has {k}.")
            total = math.fsum(row)
            weights.append([s - (total - s) / (k - 1) for s in row])
        return weights

    if normalized_scores is None:
        raise InstanceError(f"Transform '{mode.value}' requires a normalized-score table.")
    normalized = [[float(s) for s in row] for row in normalized_scores]
    if len(normalized) != len(rows) or any(len(a) != len(b) for a, b in zip(rows, normalized)):
        raise InstanceError("Normalized scores must have the same shape as the raw scores.")

    if mode is TransformMode.SUBJECTIVITY_NORMALIZED:
        return normalized
    return [[s - s_hat for s, s_hat in zip(row, row_hat)] for row, row_hat in zip(rows, normalized)]

# --- Released quantity ---

def sorted_mean_weights(assignment: 'Assignment') -> MeanWeightVector:
    """The true sorted mean-weight vector: each reviewer's average weight, sorted."""
    per_reviewer: List[List[float]] = [[] for _ in range(assignment.n)]
    for _, reviewer, weight in assignment.edges:
        per_reviewer[reviewer].append(weight)

    idle = [j for j, ws in enumerate(per_reviewer) if not ws]
    if idle:
        raise InstanceError(f"Reviewers with zero reviews have no mean weight: {idle}")

    means = sorted(math.fsum(ws) / len(ws) for ws in per_reviewer)
    return MeanWeightVector(tuple(means), sorted=True)

# --- Utility ---

def sse(t: Sequence[float], theta: Sequence[float]) -> float:
    """Sum of squared errors between a released vector and the truth (no 1/n factor)."""
    t_arr = np.asarray(t, dtype=float)
    theta_arr = np.asarray(theta, dtype=float)
    if t_arr.shape != theta_arr.shape:
        raise ValueError(f"Length mismatch: {t_arr.shape} vs {theta_arr.shape}.")
    return float(np.sum((theta_arr - t_arr) ** 2))
