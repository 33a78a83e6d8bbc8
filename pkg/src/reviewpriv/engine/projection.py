# src/reviewpriv/engine/projection.py

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from sklearn.isotonic import isotonic_regression

from ..config import config
from ..exceptions import ConvergenceError
from .bounds import BoundsVector

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class ProjectionProblem:
    """
    argmin_t Σ(r_i - t_i)²  s.t.  L_i <= t_i <= U_i,  Σt_i = S,  t nondecreasing.

    S = None drops the sum constraint (mixed reviewer loads, where the total is
    not public).
    """
    r: np.ndarray
    L: np.ndarray
    U: np.ndarray
    S: Optional[float] = None
    tolerance: float = config.app.solver.tolerance
    max_iterations: int = config.app.solver.max_iterations

    def __post_init__(self):
        for name in ('r', 'L', 'U'):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.r.shape == self.L.shape == self.U.shape) or self.r.ndim != 1:
            raise ValueError(f"r, L and U must be 1-D of equal length; got {self.r.shape}, {self.L.shape}, {self.U.shape}.")
        if not (np.isfinite(self.r).all() and np.isfinite(self.L).all() and np.isfinite(self.U).all()):
            raise ValueError("Projection inputs must be finite.")
        if self.S is not None and not np.isfinite(self.S):
            raise ValueError("Target sum must be finite.")
        if np.any(self.L > self.U):
            raise ValueError("Every lower bound must be at most its upper bound.")
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise ValueError("tolerance must be positive and max_iterations at least 1.")

    @classmethod
    def from_bounds(cls, r: Sequence[float], bounds: BoundsVector, S: Optional[float], **kwargs) -> 'ProjectionProblem':
        """
        Builds the release problem for a noisy vector and computed bounds.

        Args:
            r: The noisy sorted mean-weight vector.
            bounds: Per-index bounds from compute_bounds.
            S: The public total, or None to drop the sum constraint.
            **kwargs: tolerance and max_iterations overrides.

        Returns:
            ProjectionProblem: The problem, validated.
        """
        return cls(r=np.asarray(r, dtype=float), L=np.asarray(bounds.L), U=np.asarray(bounds.U), S=S, **kwargs)

# --- Simple-set projections ---

def isotonic_project(v: Sequence[float]) -> np.ndarray:
    """Euclidean projection onto the nondecreasing cone (pool-adjacent-violators)."""
    arr = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("isotonic_project needs finite entries.")
    if arr.size < 2:
        return arr.copy()
    return np.asarray(isotonic_regression(arr, increasing=True), dtype=float)

def _monotone_envelope(L: np.ndarray, U: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # A nondecreasing t meets L_j at every j <= i and U_j at every j >= i.
    return np.maximum.accumulate(L), np.minimum.accumulate(U[::-1])[::-1]

def _bounded_pava(v: np.ndarray, L: np.ndarray, U: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Projection onto {L <= t <= U, t nondecreasing} for nondecreasing L <= U.

    Pool-adjacent-violators in which a block [a, b] takes its mean clipped to
    [L_b, U_a]. Also returns a mask of the entries whose block was not clipped.
    """
    starts: List[int] = []
    counts: List[int] = []
    sums: List[float] = []
    values: List[float] = []
    for i, x in enumerate(v):
        starts.append(i)
        counts.append(1)
        sums.append(float(x))
        values.append(min(max(float(x), L[i]), U[i]))
        while len(values) > 1 and values[-2] > values[-1]:
            count, total = counts.pop(), sums.pop()
            starts.pop()
            values.pop()
            counts[-1] += count
            sums[-1] += total
            a, b = starts[-1], starts[-1] + counts[-1] - 1
            values[-1] = min(max(sums[-1] / counts[-1], L[b]), U[a])
    free = [value == total / count for value, total, count in zip(values, sums, counts)]
    return np.repeat(values, counts), np.repeat(free, counts)

# --- Solvers ---

def project_intersection(p: ProjectionProblem) -> np.ndarray:
    """
    Project r onto {L <= t <= U, Σt = S, t nondecreasing}.

    The box is first tightened to its monotone envelope, which leaves the
    feasible set unchanged. Without S the answer is the bounded
    pool-adjacent-violators fit of r. With S, the minimizer is that fit applied
    to r + λ, where the shift λ makes the sum equal S; the sum is monotone in
    λ, so Brent's method finds it. A last uniform correction on the unclipped
    entries meets S to rounding.

    Args:
        p: The projection problem.

    Returns:
        np.ndarray: The projected vector, nondecreasing and inside the box.

    Raises:
        ConvergenceError: If the feasible set is empty (crossed bounds or S
            outside [ΣL, ΣU]) or the root search exceeds max_iterations.
    """
    n = p.r.size
    slack = p.tolerance * max(n, 1)
    L, U = _monotone_envelope(p.L, p.U)
    if np.any(L > U + slack):
        i = int(np.argmax(L - U))
        logger.error(f"Projection set is empty: L[{i}]={L[i]:.6g} exceeds U[{i}]={U[i]:.6g} after monotone tightening.")
        raise ConvergenceError(f"Projection set is empty: L[{i}]={L[i]:.6g} > U[{i}]={U[i]:.6g} once t is nondecreasing.")
    U = np.maximum(U, L)

    if p.S is None:
        return _bounded_pava(p.r, L, U)[0]

    low, high = float(L.sum()), float(U.sum())
    if p.S < low - slack or p.S > high + slack:
        logger.error(f"Projection set is empty: S={p.S:.6g} outside [{low:.6g}, {high:.6g}] (n={n}).")
        raise ConvergenceError(f"Projection set is empty: S={p.S:.6g} lies outside [ΣL, ΣU] = [{low:.6g}, {high:.6g}].")
    if p.S <= low:
        return L.copy()
    if p.S >= high:
        return U.copy()

    def excess(shift: float) -> float:
        return float(_bounded_pava(p.r + shift, L, U)[0].sum()) - p.S

    # every entry clips to L at the left end and to U at the right end
    left = float(L[0] - p.r.max()) - 1.0
    right = float(U[-1] - p.r.min()) + 1.0
    try:
        shift, info = optimize.brentq(excess, left, right, xtol=p.tolerance / n, maxiter=p.max_iterations, full_output=True, disp=False)
    except (RuntimeError, ValueError) as e:
        logger.error(f"Sum-shift search failed for n={n}: {e}", exc_info=True)
        raise ConvergenceError(f"Projection did not converge: {e}") from e
    if not info.converged:
        logger.error(f"Sum-shift search did not converge in {p.max_iterations} iterations (n={n}, flag {info.flag}).")
        raise ConvergenceError(f"Projection did not converge within {p.max_iterations} iterations.")

    t, free = _bounded_pava(p.r + shift, L, U)
    if free.any():
        t[free] += (p.S - t.sum()) / int(free.sum())
        t = np.clip(np.maximum.accumulate(t), L, U)
    residual = abs(float(t.sum()) - p.S)
    if residual > slack:
        logger.error(f"Projection sum residual {residual:.3e} exceeds {slack:.3e} (n={n}).")
        raise ConvergenceError(f"Projection did not converge: sum residual {residual:.3e}.")
    logger.debug(f"Projection converged after {info.iterations} shift iterations (n={n}).")
    return t

def project_baseline(
    r: Sequence[float],
    box_lo: float,
    box_hi: float,
    S: Optional[float],
    tolerance: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> np.ndarray:
    """Projection onto the box/sum/monotone polytope with the same box for every index."""
    if box_lo > box_hi:
        raise ValueError(f"Baseline box is empty: [{box_lo}, {box_hi}].")
    r = np.asarray(r, dtype=float)
    problem = ProjectionProblem(
        r=r,
        L=np.full(r.size, float(box_lo)),
        U=np.full(r.size, float(box_hi)),
        S=S,
        tolerance=tolerance or config.app.solver.tolerance,
        max_iterations=max_iterations or config.app.solver.max_iterations,
    )
    return project_intersection(problem)

def nearest_in_finite_set(r: Sequence[float], candidates: Sequence[Sequence[float]]) -> np.ndarray:
    """The candidate closest to r in Euclidean distance; ties go to the lexicographically smallest."""
    point = np.atleast_1d(np.asarray(r, dtype=float))
    pool = [np.atleast_1d(np.asarray(c, dtype=float)) for c in candidates]
    if not pool:
        raise ValueError("nearest_in_finite_set needs at least one candidate.")
    best = min(pool, key=lambda c: (float(np.sum((c - point) ** 2)), tuple(c)))
    return best.copy()
