# src/reviewpriv/engine/oracle.py

"""
Brute-force ground truth for desk-scale instances: the exact set Θ of
realizable sorted mean-weight vectors, projection onto its convex hull, and the
closed-form errors behind the nearest-point counterexample.
"""

import math
import logging
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, stats

from ..config import config
from ..exceptions import ConvergenceError, InstanceTooLargeError
from .bounds import BoundsVector
from .instance import PublicWeights, validate_instance
from .privacy import laplace_noise

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class ThetaSet:
    """Every sorted mean-weight vector some valid assignment consistent with X produces."""
    vectors: FrozenSet[Tuple[float, ...]]
    instance: PublicWeights

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def sorted_vectors(self) -> List[Tuple[float, ...]]:
        return sorted(self.vectors)

    def as_matrix(self) -> np.ndarray:
        return np.array(self.sorted_vectors, dtype=float)

@dataclass(frozen=True)
class Prop1Errors:
    """Expected squared errors of the raw noisy release and of nearest-point projection."""
    noisy: float
    projected: float
    mc_noisy: Optional[float] = None
    mc_projected: Optional[float] = None

# --- Θ enumeration ---

def _check_cap(pw: PublicWeights, max_reviewers: int, max_load: int) -> None:
    if pw.n > max_reviewers or max(pw.reviewer_loads) > max_load:
        raise InstanceTooLargeError(
            f"Oracle cap exceeded: n={pw.n}, max load={max(pw.reviewer_loads)} "
            f"(limits n <= {max_reviewers}, load <= {max_load})."
        )

def enumerate_theta(pw: PublicWeights, max_reviewers: Optional[int] = None, max_load: Optional[int] = None) -> ThetaSet:
    """
    Exhaustive backtracking over assignments of X's entries to reviewers.

    Reviewers are filled one at a time; each new reviewer takes the smallest
    remaining value of the first row that still has entries, plus one value from
    each of ℓ - 1 later rows. Entries of equal value within a row and reviewers
    of equal load are interchangeable, so states are memoized on the remaining
    value multisets.

    Raises:
        InstanceTooLargeError: If the instance exceeds the oracle cap.
    """
    validate_instance(pw)
    _check_cap(pw, max_reviewers or config.app.oracle.max_reviewers, max_load or config.app.oracle.max_load)

    @lru_cache(maxsize=None)
    def solve(rows: Tuple[Tuple[float, ...], ...], loads: Tuple[int, ...]) -> FrozenSet[Tuple[float, ...]]:
        if not loads:
            return frozenset({()}) if not any(rows) else frozenset()
        # a row cannot give two of its entries to the same reviewer
        if max(len(r) for r in rows) > len(loads):
            return frozenset()
        live = [i for i, r in enumerate(rows) if r]
        if not live:
            return frozenset()
        first, later = live[0], live[1:]

        found = set()
        for load in sorted(set(loads)):
            rest = list(loads)
            rest.remove(load)
            rest = tuple(rest)
            for others in combinations(later, load - 1):
                for values in product(*(sorted(set(rows[i])) for i in others)):
                    picked = (rows[first][0],) + values
                    remaining = list(rows)
                    for i, v in zip((first,) + others, picked):
                        row = list(remaining[i])
                        row.remove(v)
                        remaining[i] = tuple(row)
                    mean = math.fsum(picked) / load
                    for tail in solve(tuple(remaining), rest):
                        found.add(tuple(sorted(tail + (mean,))))
        return frozenset(found)

    vectors = solve(pw.rows, tuple(sorted(pw.reviewer_loads)))
    logger.info(f"Enumerated |Θ| = {len(vectors)} for n={pw.n}, m={pw.m}.")
    return ThetaSet(vectors=vectors, instance=pw)

def enumerate_theta_via_graphs(pw: PublicWeights, max_reviewers: Optional[int] = None) -> ThetaSet:
    """
    Independent enumeration of Θ: choose each paper's reviewer set, keep graphs
    whose reviewer degrees match the load multiset, then place each row's values
    on its reviewers in every distinct order.

    Raises:
        InstanceTooLargeError: Above the (smaller) cross-check cap.
    """
    validate_instance(pw)
    cap = max_reviewers or config.app.oracle.cross_check_max_reviewers
    if pw.n > cap:
        raise InstanceTooLargeError(f"Graph enumeration is limited to n <= {cap}; got n={pw.n}.")

    target_loads = sorted(pw.reviewer_loads)
    orders = [sorted(set(permutations(row))) for row in pw.rows]
    vectors = set()
    for neighbourhoods in product(*(combinations(range(pw.n), len(row)) for row in pw.rows)):
        degrees = Counter(r for hood in neighbourhoods for r in hood)
        if sorted(degrees.get(j, 0) for j in range(pw.n)) != target_loads:
            continue
        for placement in product(*orders):
            per_reviewer = [[] for _ in range(pw.n)]
            for hood, values in zip(neighbourhoods, placement):
                for reviewer, value in zip(hood, values):
                    per_reviewer[reviewer].append(value)
            vectors.add(tuple(sorted(math.fsum(ws) / len(ws) for ws in per_reviewer)))
    return ThetaSet(vectors=frozenset(vectors), instance=pw)

def bound_violations(theta: ThetaSet, bounds: BoundsVector, slack: float = 1e-12) -> List[Tuple[Tuple[float, ...], int]]:
    """Every (vector, index) where a member of Θ escapes [L_i, U_i]."""
    L, U = np.asarray(bounds.L), np.asarray(bounds.U)
    violations = []
    for vector in theta.sorted_vectors:
        v = np.asarray(vector)
        for i in np.flatnonzero((v < L - slack) | (v > U + slack)):
            violations.append((vector, int(i)))
    return violations

# --- Convex hull projection ---

def hull_project(
    r: Sequence[float],
    theta: ThetaSet,
    tolerance: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> np.ndarray:
    """
    Projection of r onto convex-hull(Θ), solved over the simplex of vertex
    weights. Only viable for small Θ.

    With P the matrix whose columns are v_j - r, write the weights as w = u / Σu
    for u >= 0. Nonnegative least squares on [P; 1ᵀ] u ≈ [0; 1] leaves the
    residual ||Pw||² / (1 + ||Pw||²) at the best scale Σu, which increases with
    ||Pw||, so its solution gives the simplex minimizer of ||Pw|| exactly. The
    point is then checked against the projection condition
    (v_j - h)·(r - h) <= tolerance for every vertex.

    Args:
        r: The vector to project.
        theta: The realizable vectors whose hull is the target.
        tolerance: Slack allowed in the projection condition (scaled by the
            squared spread of Θ around r).
        max_iterations: Iteration cap for the least-squares solver.

    Returns:
        np.ndarray: The nearest point of the hull.

    Raises:
        ValueError: If Θ is empty or r has the wrong length.
        ConvergenceError: If the solver stops early or its point fails the
            projection condition.
    """
    if len(theta) == 0:
        raise ValueError("Cannot project onto the hull of an empty set.")
    tolerance = tolerance or config.app.solver.tolerance
    max_iterations = max_iterations or config.app.solver.max_iterations

    V = theta.as_matrix()
    target = np.asarray(r, dtype=float)
    if target.shape != (V.shape[1],):
        raise ValueError(f"Expected a vector of length {V.shape[1]}, got shape {target.shape}.")
    if V.shape[0] == 1:
        return V[0].copy()

    offsets = (V - target).T
    system = np.vstack([offsets, np.ones((1, V.shape[0]))])
    rhs = np.zeros(system.shape[0])
    rhs[-1] = 1.0
    try:
        u, _ = optimize.nnls(system, rhs, maxiter=max_iterations)
    except RuntimeError as e:
        logger.error(f"Hull projection least squares failed for |Θ|={len(theta)}: {e}")
        raise ConvergenceError(f"Hull projection did not converge: {e}") from e
    if u.sum() <= 0:
        raise ConvergenceError("Hull projection returned no vertex weight.")

    weights = u / u.sum()
    point = weights @ V
    gap = float(np.max((V - point) @ (target - point)))
    limit = tolerance * max(1.0, float(np.abs(offsets).max()) ** 2)
    if gap > limit:
        logger.error(f"Hull projection fails the optimality check: gap {gap:.3e} > {limit:.3e}.")
        raise ConvergenceError(f"Hull projection did not converge: optimality gap {gap:.3e}.")
    return point

# --- Nearest-point counterexample ---

def finite_projection_expected_error(candidates: Sequence[float], truth: float = 0.0, scale: float = 1.0) -> float:
    """
    E[(t - truth)²] where t is the candidate nearest to truth + Laplace(scale)
    noise, with ties resolved toward the smaller candidate.
    """
    points = np.unique(np.asarray(candidates, dtype=float))
    if points.size == 0:
        raise ValueError("Need at least one candidate.")
    edges = np.concatenate(([-np.inf], (points[:-1] + points[1:]) / 2.0, [np.inf]))
    mass = np.diff(stats.laplace(loc=truth, scale=scale).cdf(edges))
    return float(np.sum((points - truth) ** 2 * mass))

def prop1_expected_errors(samples: Optional[int] = None, seed: Optional[int] = None, candidates: Optional[Sequence[float]] = None) -> Prop1Errors:
    """
    Truth 0, Laplace(1) noise, and projection onto a 1-D candidate set (default
    {-4, -2, 0, 2, 4}): the raw error is 2 while the projected error is larger.

    With `samples` given, Monte Carlo estimates of both errors are added,
    drawn in chunks from a generator seeded with `seed`.
    """
    candidates = tuple(candidates if candidates is not None else config.app.oracle.prop1_candidates)
    noisy = float(stats.laplace(scale=1.0).var())
    projected = finite_projection_expected_error(candidates, truth=0.0, scale=1.0)
    if not samples:
        return Prop1Errors(noisy=noisy, projected=projected)

    points = np.unique(np.asarray(candidates, dtype=float))
    midpoints = (points[:-1] + points[1:]) / 2.0
    rng = np.random.default_rng(seed)
    chunk = 1_000_000
    raw_total = projected_total = 0.0
    drawn = 0
    while drawn < samples:
        size = min(chunk, samples - drawn)
        r = laplace_noise(rng, 1.0, size)
        nearest = points[np.searchsorted(midpoints, r, side='left')]
        raw_total += float(np.sum(r ** 2))
        projected_total += float(np.sum(nearest ** 2))
        drawn += size
    return Prop1Errors(noisy=noisy, projected=projected, mc_noisy=raw_total / samples, mc_projected=projected_total / samples)
