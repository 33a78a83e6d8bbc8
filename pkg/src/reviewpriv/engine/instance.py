# src/reviewpriv/engine/instance.py

import math
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import config
from ..exceptions import InstanceError, SamplingError

logger = logging.getLogger(__name__)

# (paper index, reviewer index, weight)
Edge = Tuple[int, int, float]

# Draws one weight given (rng, paper, reviewer, slot), where slot is the edge's
# position among the paper's edges in reviewer order.
WeightSampler = Callable[[np.random.Generator, int, int, int], float]

@dataclass(frozen=True)
class Assignment:
    """
    The private reviewer-paper bipartite graph with a weight on every edge.

    Only the simulation harness and the brute-force oracle ever see this object;
    the bounds engine works from the public view alone.
    """
    n: int
    m: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        edges = tuple((int(p), int(r), float(w)) for p, r, w in self.edges)
        seen = set()
        for paper, reviewer, weight in edges:
            if not (0 <= paper < self.m and 0 <= reviewer < self.n):
                raise InstanceError(f"Edge ({paper}, {reviewer}) is outside a {self.m}-paper, {self.n}-reviewer instance.")
            if (paper, reviewer) in seen:
                raise InstanceError(f"Duplicate (paper, reviewer) pair ({paper}, {reviewer}).")
            if not math.isfinite(weight):
                raise InstanceError(f"Edge ({paper}, {reviewer}) carries a non-finite weight.")
            seen.add((paper, reviewer))
        object.__setattr__(self, 'edges', tuple(sorted(edges)))

    @property
    def reviewer_loads(self) -> Tuple[int, ...]:
        degrees = [0] * self.n
        for _, reviewer, _ in self.edges:
            degrees[reviewer] += 1
        return tuple(degrees)

    @property
    def paper_loads(self) -> Tuple[int, ...]:
        degrees = [0] * self.m
        for paper, _, _ in self.edges:
            degrees[paper] += 1
        return tuple(degrees)

@dataclass(frozen=True)
class PublicWeights:
    """
    The public matrix X: paper i's weights (row i, sorted ascending) plus the
    multiset of reviewer loads. Reviewer identities are not part of this view.
    """
    rows: Tuple[Tuple[float, ...], ...]
    reviewer_loads: Tuple[int, ...]

    def __post_init__(self):
        rows = tuple(tuple(sorted(float(x) for x in row)) for row in self.rows)
        if not all(math.isfinite(x) for row in rows for x in row):
            raise InstanceError("Public weights must be finite.")
        object.__setattr__(self, 'rows', rows)
        object.__setattr__(self, 'reviewer_loads', tuple(int(l) for l in self.reviewer_loads))

    @property
    def n(self) -> int:
        """Number of reviewers."""
        return len(self.reviewer_loads)

    @property
    def m(self) -> int:
        """Number of papers."""
        return len(self.rows)

    @property
    def paper_loads(self) -> Tuple[int, ...]:
        """Reviews received by each paper, in row order."""
        return tuple(len(row) for row in self.rows)

    @property
    def load_set(self) -> Tuple[int, ...]:
        """The distinct reviewer loads, ascending."""
        return tuple(sorted(set(self.reviewer_loads)))

    @property
    def is_uniform(self) -> bool:
        """True when every reviewer has the same load ℓ."""
        return len(self.load_set) == 1

    @property
    def total_entries(self) -> int:
        """Total reviews, Σ k_i = Σ ℓ_j."""
        return sum(self.paper_loads)

    def value(self, row: int, col: int) -> float:
        return self.rows[row][col]

# --- Weight samplers ---

@dataclass(frozen=True)
class BetaWeightSampler:
    """
    Beta-distributed weights with one of three parameter rules.

    - ``fixed``: every weight ~ beta(a, b).
    - ``per_paper``: slot s of paper i ~ beta(s + 1, i + 1) (1-based paper index).
    - ``per_edge``: weight of paper i by reviewer j ~ beta(i + 1, j + 1).
    """
    rule: str = "fixed"
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.rule not in ("fixed", "per_paper", "per_edge"):
            raise ValueError(f"Unknown beta rule: {self.rule}")
        if self.rule == "fixed" and (self.a <= 0 or self.b <= 0):
            raise ValueError("Beta parameters must be positive.")

    @property
    def label(self) -> str:
        if self.rule == "fixed":
            return f"beta({self.a:g},{self.b:g})"
        return "beta(slot,i)" if self.rule == "per_paper" else "beta(i,j)"

    def __call__(self, rng: np.random.Generator, paper: int, reviewer: int, slot: int) -> float:
        if self.rule == "fixed":
            return float(rng.beta(self.a, self.b))
        if self.rule == "per_paper":
            return float(rng.beta(slot + 1, paper + 1))
        return float(rng.beta(paper + 1, reviewer + 1))

# --- Generation ---

def _expand_loads(load: Union[int, Sequence[int]], count: int, side: str) -> np.ndarray:
    if isinstance(load, (int, np.integer)):
        loads = np.full(count, int(load), dtype=int)
    else:
        loads = np.asarray(list(load), dtype=int)
        if loads.shape != (count,):
            raise InstanceError(f"Expected {count} {side} loads, got {loads.size}.")
    if np.any(loads < 1):
        raise InstanceError(f"Every {side} load must be at least 1.")
    return loads

def sample_assignment(
    n: int,
    m: int,
    reviewer_load: Union[int, Sequence[int]],
    paper_load: Union[int, Sequence[int]],
    weight_sampler: WeightSampler,
    rng_seed: int,
    max_attempts: Optional[int] = None,
) -> Assignment:
    """
    Draw a reviewer-paper assignment uniformly among simple bipartite graphs with
    the given degrees, then draw a weight for every edge.

    Reviewer stubs are shuffled against paper stubs; any draw that pairs a
    reviewer with the same paper twice is discarded whole and redrawn.

    Args:
        n (int): Number of reviewers.
        m (int): Number of papers.
        reviewer_load: ℓ, or one load per reviewer.
        paper_load: k, or one load per paper.
        weight_sampler: Called once per edge in (paper, reviewer) order.
        rng_seed (int): Seed; identical seeds give identical assignments.
        max_attempts (Optional[int]): Rejection budget (defaults to config).

    Raises:
        InstanceError: If the loads cannot be realized by any simple graph.
        SamplingError: If every attempt produced a duplicate pair.
    """
    max_attempts = max_attempts or config.app.sampling.max_attempts
    reviewer_loads = _expand_loads(reviewer_load, n, "reviewer")
    paper_loads = _expand_loads(paper_load, m, "paper")

    if reviewer_loads.sum() != paper_loads.sum():
        raise InstanceError(f"Load identity violated: reviewers supply {reviewer_loads.sum()} reviews, papers need {paper_loads.sum()}.")
    if reviewer_loads.max() > m or paper_loads.max() > n:
        raise InstanceError("A load exceeds the number of distinct partners available.")

    rng = np.random.default_rng(rng_seed)
    paper_stubs = np.repeat(np.arange(m), paper_loads)
    reviewer_stubs = np.repeat(np.arange(n), reviewer_loads)

    for attempt in range(1, max_attempts + 1):
        partners = rng.permutation(reviewer_stubs)
        keys = paper_stubs * n + partners
        if np.unique(keys).size == keys.size:
            break
    else:
        logger.error(f"Assignment sampler failed after {max_attempts} attempts (n={n}, m={m}).")
        raise SamplingError(f"No simple assignment found in {max_attempts} attempts.")

    logger.debug(f"Simple assignment accepted on attempt {attempt}.")
    pairs = sorted(zip(paper_stubs.tolist(), partners.tolist()))
    edges = []
    slot, previous_paper = 0, -1
    for paper, reviewer in pairs:
        slot = slot + 1 if paper == previous_paper else 0
        previous_paper = paper
        edges.append((paper, reviewer, weight_sampler(rng, paper, reviewer, slot)))
    return Assignment(n=n, m=m, edges=tuple(edges))

def assignment_from_rows(rows: Sequence[Sequence[float]], reviewers: Sequence[Sequence[int]], n: int) -> Assignment:
    """Build an Assignment from per-paper weights and the reviewer of each weight."""
    edges = [
        (i, r, w)
        for i, (row, who) in enumerate(zip(rows, reviewers))
        for w, r in zip(row, who)
    ]
    return Assignment(n=n, m=len(rows), edges=tuple(edges))

# --- Public view ---

def public_view(assignment: Assignment) -> PublicWeights:
    """Drop reviewer identities: keep each paper's weight multiset and the reviewer loads."""
    rows = [[] for _ in range(assignment.m)]
    for paper, _, weight in assignment.edges:
        rows[paper].append(weight)
    return PublicWeights(rows=tuple(tuple(r) for r in rows), reviewer_loads=assignment.reviewer_loads)

def validate_instance(pw: PublicWeights) -> None:
    """
    Check that the public data could describe a conference.

    Raises:
        InstanceError: On an empty instance, a load-identity violation, or a
            load that exceeds the number of distinct partners.
    """
    if pw.n < 1 or pw.m < 1:
        raise InstanceError("An instance needs at least one reviewer and one paper.")
    if any(l < 1 for l in pw.reviewer_loads):
        raise InstanceError("Every reviewer must review at least one paper.")
    if any(k < 1 for k in pw.paper_loads):
        raise InstanceError("Every paper must carry at least one weight.")

    supplied, needed = sum(pw.reviewer_loads), pw.total_entries
    if supplied != needed:
        raise InstanceError(f"Load identity violated: reviewer loads sum to {supplied}, papers hold {needed} weights.")
    if max(pw.reviewer_loads) > pw.m:
        raise InstanceError(f"A reviewer load of {max(pw.reviewer_loads)} exceeds the {pw.m} papers available.")
    if max(pw.paper_loads) > pw.n:
        raise InstanceError(f"A paper load of {max(pw.paper_loads)} exceeds the {pw.n} reviewers available.")

def target_sum(pw: PublicWeights) -> Optional[float]:
    """
    The public total Σθ_i = (1/ℓ)·Σ x_ij for uniform reviewer loads.

    With mixed reviewer loads the total depends on who reviewed what, so None is
    returned and callers drop the sum constraint.
    """
    if not pw.is_uniform:
        logger.warning("Reviewer loads are not uniform; the released total is not public, dropping the sum constraint.")
        return None
    return math.fsum(x for row in pw.rows for x in row) / pw.load_set[0]
