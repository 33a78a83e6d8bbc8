# tests/conftest.py

import os
import sys
from typing import List, Tuple

import numpy as np
import pytest

# Lets pytest find the 'reviewpriv' package in 'src' without an install.
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from reviewpriv.engine.instance import Assignment, PublicWeights, assignment_from_rows, public_view, sample_assignment
from reviewpriv.repository import InstanceRepository
from reviewpriv.session_manager import ReleaseManager

# Five values, so random instances are full of ties.
WEIGHT_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)

def grid_sampler(rng: np.random.Generator, paper: int, reviewer: int, slot: int) -> float:
    return float(rng.choice(WEIGHT_GRID))

def uniform_sampler(rng: np.random.Generator, paper: int, reviewer: int, slot: int) -> float:
    return float(rng.uniform(0.0, 1.0))

@pytest.fixture(scope="session")
def worked_assignment() -> Assignment:
    """
    Four reviewers, four papers, ℓ = k = 3. Papers 0-2 get all-zero reviews and
    paper 3 gets 1, 2 and 3, so the sorted mean-weight vector is (0, 1/3, 2/3, 1)
    and it is the only one the public data allow.
    """
    return assignment_from_rows(
        rows=[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 2.0, 3.0]],
        reviewers=[[0, 1, 2], [0, 2, 3], [0, 1, 3], [1, 2, 3]],
        n=4,
    )

@pytest.fixture(scope="session")
def worked_example(worked_assignment: Assignment) -> PublicWeights:
    return public_view(worked_assignment)

@pytest.fixture(scope="session")
def two_by_two() -> PublicWeights:
    """n = m = 2, ℓ = k = 2, both rows {0, 1}: Θ = {(0, 1), (0.5, 0.5)}."""
    return PublicWeights(rows=((0.0, 1.0), (0.0, 1.0)), reviewer_loads=(2, 2))

def make_random_instances(count: int, seed: int, n_range=(3, 6), loads=(2, 3)) -> List[Tuple[Assignment, PublicWeights]]:
    """Uniform-load instances with n = m, weights on the tie-heavy grid."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        load = int(rng.choice(loads))
        if load > n:
            continue
        a = sample_assignment(n, n, load, load, grid_sampler, int(rng.integers(2**31)))
        out.append((a, public_view(a)))
    return out

def make_mixed_instances(count: int, seed: int) -> List[Tuple[Assignment, PublicWeights]]:
    """Reviewer loads drawn from {1, 2} (both present), papers of load 2 plus one of load 1 if needed."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(3, 6))
        reviewer_loads = rng.integers(1, 3, size=n)
        reviewer_loads[0], reviewer_loads[1] = 1, 2
        total = int(reviewer_loads.sum())
        paper_loads = [2] * (total // 2) + [1] * (total % 2)
        a = sample_assignment(n, len(paper_loads), reviewer_loads.tolist(), paper_loads, grid_sampler, int(rng.integers(2**31)))
        out.append((a, public_view(a)))
    return out

@pytest.fixture(scope="session")
def random_instances() -> List[Tuple[Assignment, PublicWeights]]:
    """A fixed batch of small seeded instances shared by the soundness tests."""
    return make_random_instances(25, seed=2024)

@pytest.fixture
def repo(tmp_path) -> InstanceRepository:
    """A repository rooted in a fresh temporary directory per test."""
    return InstanceRepository(tmp_path)

@pytest.fixture
def manager(repo: InstanceRepository) -> ReleaseManager:
    return ReleaseManager(repo)
