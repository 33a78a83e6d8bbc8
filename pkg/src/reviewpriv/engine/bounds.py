# src/reviewpriv/engine/bounds.py

"""
Per-index lower and upper bounds on the true sorted mean-weight vector, computed
from public data only.

Every way a single reviewer could have produced its weights is a *valid weight
tuple*: one entry of X from each of ℓ distinct rows. The tuples are sorted by
mean into Ω. Two tuples are compatible when they share no entry of X, and a
left (right) chain of a tuple is a path of pairwise-consecutive compatible
tuples with decreasing (increasing) Ω-indices. A forward scan over Ω then picks
the smallest mean that can still be the i-th order statistic, and a backward
scan the largest.
"""

import math
import time
import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from ..config import config
from ..exceptions import InconsistentPublicDataError, InstanceTooLargeError
from .instance import PublicWeights, validate_instance

logger = logging.getLogger(__name__)

class EntryRef(NamedTuple):
    """One cell of X: a paper's row and a position within that row."""
    row: int
    col: int

@dataclass(frozen=True)
class WeightTuple:
    """A candidate review set for one reviewer: entries from distinct rows."""
    entries: Tuple[EntryRef, ...]
    mean: float
    index: int

@dataclass(frozen=True)
class TupleList:
    """Ω: all valid weight tuples sorted by mean, ties broken by their entries."""
    tuples: Tuple[WeightTuple, ...]
    row_sizes: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self) -> Iterator[WeightTuple]:
        return iter(self.tuples)

    def __getitem__(self, index: int) -> WeightTuple:
        return self.tuples[index]

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.row_sizes)[:-1])).astype(int)

    @cached_property
    def entry_ids(self) -> List[np.ndarray]:
        """Flat entry indices of every tuple."""
        offsets = self.offsets
        return [np.array([offsets[e.row] + e.col for e in t.entries], dtype=int) for t in self.tuples]

    @cached_property
    def occupancy(self) -> np.ndarray:
        """Bitset per entry of X over Ω: occupancy[e, v] is True iff tuple v uses entry e."""
        occ = np.zeros((int(sum(self.row_sizes)), len(self.tuples)), dtype=bool)
        for v, ids in enumerate(self.entry_ids):
            occ[ids, v] = True
        return occ

@dataclass(frozen=True)
class ChainTable:
    """Longest left and right chain length (in vertices) of every tuple in Ω."""
    left: np.ndarray
    right: np.ndarray

@dataclass(frozen=True)
class BoundsVector:
    """Elementwise bounds L_i <= θ_i <= U_i on every realizable sorted mean-weight vector."""
    L: Tuple[float, ...]
    U: Tuple[float, ...]

    def __post_init__(self):
        L = tuple(float(x) for x in self.L)
        U = tuple(float(x) for x in self.U)
        if len(L) != len(U):
            raise ValueError(f"Bounds have different lengths: {len(L)} vs {len(U)}.")
        if any(a > b for a, b in zip(L, L[1:])) or any(a > b for a, b in zip(U, U[1:])):
            raise ValueError("Bounds must be nondecreasing.")
        object.__setattr__(self, 'L', L)
        object.__setattr__(self, 'U', U)

    @property
    def n(self) -> int:
        return len(self.L)

    @property
    def mean_width(self) -> float:
        return float(np.mean(np.subtract(self.U, self.L)))

    def to_dict(self) -> dict:
        return {"L": list(self.L), "U": list(self.U), "n": self.n}

# --- I. Valid weight tuples ---

def count_tuples(pw: PublicWeights) -> int:
    """|Ω| in closed form: the elementary symmetric sums e_ℓ(k_1, ..., k_m) over ℓ in 𝓛."""
    loads = pw.load_set
    top = max(loads)
    e = [1] + [0] * top
    for k in pw.paper_loads:
        for j in range(top, 0, -1):
            e[j] += e[j - 1] * k
    return sum(e[l] for l in loads)

def enumerate_tuples(pw: PublicWeights, max_tuples: Optional[int] = None) -> TupleList:
    """
    Build Ω: every multiset of ℓ entries from distinct rows, for each load ℓ in 𝓛.

    Raises:
        InstanceTooLargeError: If |Ω| would exceed `max_tuples`.
    """
    max_tuples = max_tuples or config.app.bounds.max_tuples
    expected = count_tuples(pw)
    if expected > max_tuples:
        raise InstanceTooLargeError(f"Instance has {expected} valid weight tuples, above the cap of {max_tuples}.")

    raw = []
    for load in pw.load_set:
        for rows in combinations(range(pw.m), load):
            for cols in product(*(range(len(pw.rows[r])) for r in rows)):
                entries = tuple(EntryRef(r, c) for r, c in zip(rows, cols))
                mean = math.fsum(pw.rows[r][c] for r, c in entries) / load
                raw.append((mean, entries))
    raw.sort()

    tuples = tuple(WeightTuple(entries=entries, mean=mean, index=idx) for idx, (mean, entries) in enumerate(raw))
    logger.info(f"Enumerated {len(tuples)} valid weight tuples for n={pw.n}, m={pw.m}, loads={pw.load_set}.")
    return TupleList(tuples=tuples, row_sizes=pw.paper_loads)

def tuples_compatible(a: WeightTuple, b: WeightTuple) -> bool:
    """True iff the two tuples share no entry of X (same row, different column is fine)."""
    return set(a.entries).isdisjoint(b.entries)

# --- II. Chains ---

def chain_lengths(omega: TupleList) -> ChainTable:
    """
    Longest left/right chain of every tuple by dynamic programming over Ω order.

    left[v] = 1 + max(left[u] for compatible u < v), right[v] symmetrically over
    u > v. Compatibility is read off the per-entry occupancy bitsets instead of a
    materialized graph.
    """
    size = len(omega)
    occ = omega.occupancy
    ids = omega.entry_ids
    left = np.ones(size, dtype=int)
    right = np.ones(size, dtype=int)

    for v in range(1, size):
        compatible = ~occ[ids[v], :v].any(axis=0)
        if compatible.any():
            left[v] = left[:v][compatible].max() + 1

    for v in range(size - 2, -1, -1):
        compatible = ~occ[ids[v], v + 1:].any(axis=0)
        if compatible.any():
            right[v] = right[v + 1:][compatible].max() + 1

    return ChainTable(left=left, right=right)

# --- III. Bound scans ---

class _EntryMarks:
    """Marked entries of X with an incrementally maintained max unmarked-per-row count."""

    def __init__(self, omega: TupleList):
        self._offsets = omega.offsets
        self._marked = np.zeros(int(sum(omega.row_sizes)), dtype=bool)
        self._unmarked = list(omega.row_sizes)
        self._rows_with = [0] * (max(omega.row_sizes) + 1)
        for k in omega.row_sizes:
            self._rows_with[k] += 1
        self.max_unmarked = max(omega.row_sizes)

    def mark(self, t: WeightTuple) -> None:
        for e in t.entries:
            flat = self._offsets[e.row] + e.col
            if self._marked[flat]:
                continue
            self._marked[flat] = True
            count = self._unmarked[e.row]
            self._rows_with[count] -= 1
            self._rows_with[count - 1] += 1
            self._unmarked[e.row] = count - 1
        while self.max_unmarked > 0 and self._rows_with[self.max_unmarked] == 0:
            self.max_unmarked -= 1

def lower_bounds(pw: PublicWeights, omega: TupleList, chains: ChainTable) -> np.ndarray:
    """
    Forward scan over Ω. After marking the current tuple's entries, its mean
    becomes L_i when its longest left chain is at least i and no row of X has
    more than n - i unmarked entries.

    Raises:
        InconsistentPublicDataError: If Ω runs out before all n bounds are set.
    """
    n = pw.n
    marks = _EntryMarks(omega)
    bounds = np.empty(n)
    i = 1
    for w in omega:
        marks.mark(w)
        if chains.left[w.index] >= i and marks.max_unmarked <= n - i:
            bounds[i - 1] = w.mean
            i += 1
            if i > n:
                return bounds
    logger.error(f"Lower-bound scan exhausted Ω with only {i - 1} of {n} bounds set.")
    raise InconsistentPublicDataError(f"Lower-bound scan set only {i - 1} of {n} bounds; the public data admit no assignment.")

def upper_bounds(pw: PublicWeights, omega: TupleList, chains: ChainTable) -> np.ndarray:
    """
    Backward scan over Ω with fresh marks. The current tuple's mean becomes U_i
    when its longest right chain is at least n - i + 1 and no row of X has more
    than i - 1 unmarked entries.

    Raises:
        InconsistentPublicDataError: If Ω runs out before all n bounds are set.
    """
    n = pw.n
    marks = _EntryMarks(omega)
    bounds = np.empty(n)
    i = n
    for w in reversed(omega.tuples):
        marks.mark(w)
        if chains.right[w.index] >= n - i + 1 and marks.max_unmarked <= i - 1:
            bounds[i - 1] = w.mean
            i -= 1
            if i < 1:
                return bounds
    logger.error(f"Upper-bound scan exhausted Ω with {i} of {n} bounds unset.")
    raise InconsistentPublicDataError(f"Upper-bound scan left {i} of {n} bounds unset; the public data admit no assignment.")

def compute_bounds(pw: PublicWeights, max_tuples: Optional[int] = None) -> BoundsVector:
    """
    Bounds on θ* from public data: enumerate Ω, compute chains, run both scans.

    Mixed reviewer loads are handled by enumerating tuples of every load in 𝓛.

    Raises:
        InstanceError: If the public data fail validation.
        InstanceTooLargeError: If Ω exceeds the tuple cap.
        InconsistentPublicDataError: If a scan fails or some L_i > U_i.
    """
    validate_instance(pw)
    started = time.perf_counter()
    omega = enumerate_tuples(pw, max_tuples=max_tuples)
    chains = chain_lengths(omega)
    L = lower_bounds(pw, omega, chains)
    U = upper_bounds(pw, omega, chains)

    slack = config.app.bounds.consistency_slack
    crossed = np.flatnonzero(L > U + slack)
    if crossed.size:
        raise InconsistentPublicDataError(f"Lower bound exceeds upper bound at indices {crossed.tolist()}.")

    logger.info(f"Computed bounds for n={pw.n} over {len(omega)} tuples in {time.perf_counter() - started:.3f}s.")
    return BoundsVector(L=tuple(L), U=tuple(U))
