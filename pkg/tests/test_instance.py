# tests/test_instance.py

from collections import Counter

import numpy as np
import pytest

from reviewpriv.engine.instance import (
    Assignment, BetaWeightSampler, PublicWeights, public_view, sample_assignment, target_sum, validate_instance,
)
from reviewpriv.exceptions import InstanceError, SamplingError

from conftest import uniform_sampler

# --- sample_assignment ---

def test_two_by_two_has_a_single_assignment():
    """Both reviewers must review both papers."""
    a = sample_assignment(2, 2, 2, 2, uniform_sampler, rng_seed=5)
    assert sorted((p, r) for p, r, _ in a.edges) == [(0, 0), (0, 1), (1, 0), (1, 1)]

def test_sampled_assignment_is_regular_and_simple():
    """Test that sampled graphs meet both load sequences with no repeated pair."""
    for seed in range(10):
        a = sample_assignment(4, 4, 3, 3, uniform_sampler, rng_seed=seed)
        assert a.reviewer_loads == (3, 3, 3, 3)
        assert a.paper_loads == (3, 3, 3, 3)
        pairs = [(p, r) for p, r, _ in a.edges]
        assert len(pairs) == len(set(pairs))

def test_sampling_is_deterministic_for_a_seed():
    """Test that a seed fixes the whole assignment."""
    sampler = BetaWeightSampler("fixed", 5, 1)
    first = sample_assignment(10, 10, 2, 2, sampler, rng_seed=99)
    second = sample_assignment(10, 10, 2, 2, sampler, rng_seed=99)
    assert first == second
    assert first != sample_assignment(10, 10, 2, 2, sampler, rng_seed=100)

def test_unequal_paper_and_reviewer_counts():
    """n ≠ m is fine as long as n·ℓ = m·k."""
    a = sample_assignment(6, 4, 2, 3, uniform_sampler, rng_seed=1)
    assert set(a.reviewer_loads) == {2} and set(a.paper_loads) == {3}

def test_infeasible_loads_are_rejected():
    """Test that load sequences with no bipartite realization are refused."""
    with pytest.raises(InstanceError):
        sample_assignment(3, 4, 2, 2, uniform_sampler, rng_seed=0)
    with pytest.raises(InstanceError):
        sample_assignment(2, 2, 3, 3, uniform_sampler, rng_seed=0)

def test_sampler_gives_up_after_bounded_attempts():
    """With n = m = 3 and ℓ = k = 3 only the complete graph is simple; one attempt rarely hits it."""
    with pytest.raises(SamplingError):
        for seed in range(50):
            sample_assignment(3, 3, 3, 3, uniform_sampler, rng_seed=seed, max_attempts=1)

def test_beta_rules():
    """Test the fixed, per-paper and per-edge beta parameter rules."""
    rng = np.random.default_rng(0)
    assert 0.0 <= BetaWeightSampler("per_paper")(rng, 3, 1, 0) <= 1.0
    assert 0.0 <= BetaWeightSampler("per_edge")(rng, 2, 7, 1) <= 1.0
    assert BetaWeightSampler("fixed", 0.5, 0.5).label == "beta(0.5,0.5)"
    with pytest.raises(ValueError):
        BetaWeightSampler("per_reviewer")
    with pytest.raises(ValueError):
        BetaWeightSampler("fixed", 0.0, 1.0)

# --- public_view ---

def test_public_view_of_worked_example(worked_example):
    """Test that the public view keeps rows and loads but not identities."""
    assert worked_example.rows == ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (1.0, 2.0, 3.0))
    assert worked_example.reviewer_loads == (3, 3, 3, 3)

def test_public_view_singleton():
    """One reviewer, one paper."""
    pw = public_view(Assignment(n=1, m=1, edges=((0, 0, 7.0),)))
    assert pw.rows == ((7.0,),)
    assert pw.reviewer_loads == (1,)

def test_public_view_matches_edge_list():
    """Test that every edge weight appears in its paper's row."""
    a = sample_assignment(8, 8, 2, 2, uniform_sampler, rng_seed=3)
    pw = public_view(a)
    for paper, row in enumerate(pw.rows):
        assert Counter(row) == Counter(w for p, _, w in a.edges if p == paper)
    assert pw.paper_loads == a.paper_loads

def test_assignment_rejects_duplicate_pairs():
    """Test that a reviewer cannot review the same paper twice."""
    with pytest.raises(InstanceError):
        Assignment(n=2, m=1, edges=((0, 0, 1.0), (0, 0, 2.0)))

# --- validate_instance ---

def test_validate_worked_example(worked_example):
    """The golden instance is valid."""
    validate_instance(worked_example)

def test_validate_load_identity_violation():
    """Σ paper loads must equal Σ reviewer loads."""
    pw = PublicWeights(rows=((0.0, 1.0),) * 4, reviewer_loads=(2, 2, 2))
    with pytest.raises(InstanceError):
        validate_instance(pw)

def test_validate_paper_load_above_reviewer_count():
    """Test that a paper cannot need more reviewers than exist."""
    pw = PublicWeights(rows=((0.0, 1.0, 2.0), (5.0,)), reviewer_loads=(2, 2))
    with pytest.raises(InstanceError, match="paper load"):
        validate_instance(pw)

# --- target_sum ---

def test_target_sum_uniform(worked_example):
    """S = (1/ℓ)·Σ x_ij."""
    assert target_sum(worked_example) == pytest.approx(2.0)

def test_target_sum_mixed_loads_is_none(caplog):
    """Test that mixed loads drop the total and log a warning."""
    pw = PublicWeights(rows=((1.0, 1.0), (1.0,)), reviewer_loads=(1, 2))
    assert target_sum(pw) is None
    assert "not uniform" in caplog.text
