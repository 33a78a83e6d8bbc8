# src/reviewpriv/engine/simulation.py

"""
Synthetic-conference experiments comparing three releases of the sorted
mean-weight vector: the raw noisy vector, the baseline box/sum/monotone
projection, and projection onto the tuple-derived bounds polytope.
"""

import time
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from ..config import config
from .bounds import compute_bounds
from .instance import Assignment, BetaWeightSampler, PublicWeights, public_view, sample_assignment, target_sum
from .privacy import NoiseMechanism, laplace_scale_for_variance, noisy_release
from .projection import ProjectionProblem, project_baseline, project_intersection
from .weights import TransformMode, apply_weight_transform, sorted_mean_weights, sse

logger = logging.getLogger(__name__)

RESULT_COLUMNS = [
    'n', 'dist_label', 'trials', 'mean_noisy', 'sem_noisy', 'mean_baseline', 'sem_baseline',
    'mean_ours', 'sem_ours', 'mean_bound_width', 'wall_ms',
]
TRIAL_COLUMNS = ['n', 'trial', 'sse_noisy', 'sse_baseline', 'sse_ours']

@dataclass(frozen=True)
class ExperimentConfig:
    """
    One sweep over reviewer counts and weight distributions.

    The number of papers is n·ℓ/k (equal to n when ℓ = k). `baseline_box`
    defaults to the range of the transformed weights: (0, 1) for raw beta
    weights, (-1, 1) for miscalibration.
    """
    n_values: Tuple[int, ...]
    reviewer_load: int = config.app.simulation.reviewer_load
    paper_load: int = config.app.simulation.paper_load
    distributions: Tuple[BetaWeightSampler, ...] = (BetaWeightSampler("fixed", 5.0, 1.0),)
    mechanism: NoiseMechanism = NoiseMechanism("laplace", laplace_scale_for_variance(config.app.simulation.laplace_variance))
    trials: int = config.app.simulation.trials
    base_seed: int = 0
    baseline_box: Optional[Tuple[float, float]] = None
    transform: TransformMode = TransformMode.IDENTITY
    workers: int = config.app.simulation.workers
    tolerance: float = config.app.solver.tolerance
    max_iterations: int = config.app.solver.max_iterations

    def __post_init__(self):
        object.__setattr__(self, 'n_values', tuple(int(n) for n in self.n_values))
        object.__setattr__(self, 'distributions', tuple(self.distributions))
        object.__setattr__(self, 'transform', TransformMode(self.transform))
        if self.trials < 1:
            raise ValueError("An experiment needs at least one trial.")
        if not self.n_values or not self.distributions:
            raise ValueError("An experiment needs at least one n value and one distribution.")
        for n in self.n_values:
            if (n * self.reviewer_load) % self.paper_load:
                raise ValueError(f"n·ℓ = {n * self.reviewer_load} is not divisible by k = {self.paper_load}.")
        if self.transform not in (TransformMode.IDENTITY, TransformMode.MISCALIBRATION):
            raise ValueError("Simulated instances support only the identity and miscalibration transforms.")
        if self.baseline_box is not None:
            lo, hi = self.baseline_box
            if lo > hi:
                raise ValueError(f"Baseline box is empty: {self.baseline_box}.")
            object.__setattr__(self, 'baseline_box', (float(lo), float(hi)))

    def papers_for(self, n: int) -> int:
        return n * self.reviewer_load // self.paper_load

    @property
    def box(self) -> Tuple[float, float]:
        if self.baseline_box is not None:
            return self.baseline_box
        if self.transform is TransformMode.MISCALIBRATION:
            return config.app.simulation.miscalibration_box
        return config.app.simulation.baseline_box

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> 'ExperimentConfig':
        """Parse the JSON experiment format (see README for the schema)."""
        settings = config.app.simulation
        mech_raw = raw.get('mechanism', {})
        kind = mech_raw.get('kind', 'laplace')
        if 'scale' in mech_raw:
            scale = float(mech_raw['scale'])
        elif kind == 'gaussian':
            scale = float(np.sqrt(mech_raw.get('variance', settings.laplace_variance)))
        else:
            scale = laplace_scale_for_variance(float(mech_raw.get('variance', settings.laplace_variance)))

        dists = [
            BetaWeightSampler(rule=d.get('rule', 'fixed'), a=float(d.get('a', 1.0)), b=float(d.get('b', 1.0)))
            for d in raw.get('distributions', [{'rule': 'fixed', 'a': 5.0, 'b': 1.0}])
        ]
        box = raw.get('baseline_box')
        return cls(
            n_values=tuple(raw.get('n_values', settings.n_values)),
            reviewer_load=int(raw.get('reviewer_load', settings.reviewer_load)),
            paper_load=int(raw.get('paper_load', settings.paper_load)),
            distributions=tuple(dists),
            mechanism=NoiseMechanism(kind=kind, scale=scale),
            trials=int(raw.get('trials', settings.trials)),
            base_seed=int(raw.get('base_seed', 0)),
            baseline_box=tuple(box) if box is not None else None,
            transform=TransformMode(raw.get('transform', 'identity')),
            workers=int(raw.get('workers', settings.workers)),
            tolerance=float(raw.get('tolerance', config.app.solver.tolerance)),
            max_iterations=int(raw.get('max_iterations', config.app.solver.max_iterations)),
        )

@dataclass(frozen=True)
class TrialArtifacts:
    """What a trial released and from what, kept only on request."""
    public: PublicWeights
    theta: np.ndarray
    noisy: np.ndarray
    baseline: np.ndarray
    ours: np.ndarray

@dataclass(frozen=True)
class TrialResult:
    n: int
    dist_label: str
    trial: int
    seed: int
    sse_noisy: float
    sse_baseline: float
    sse_ours: float
    bound_width: float
    timings: Dict[str, float] = field(default_factory=dict, compare=False)
    artifacts: Optional[TrialArtifacts] = field(default=None, compare=False, repr=False)

@dataclass
class ExperimentResult:
    aggregate: pd.DataFrame
    trials: List[TrialResult]

    def trial_table(self) -> pd.DataFrame:
        return _trial_table(self.trials)

def _trial_table(trials: Sequence[TrialResult]) -> pd.DataFrame:
    return pd.DataFrame([{c: getattr(t, c) for c in TRIAL_COLUMNS} for t in trials], columns=TRIAL_COLUMNS)

# --- Seeds ---

def trial_seeds(base_seed: int, n: int, trial_index: int) -> Tuple[int, int, int]:
    """Stable (trial, instance, noise) seeds derived from (base_seed, n, trial_index)."""
    root = np.random.SeedSequence([int(base_seed), int(n), int(trial_index)])
    instance_ss, noise_ss = root.spawn(2)
    return (
        int(root.generate_state(1)[0]),
        int(instance_ss.generate_state(1)[0]),
        int(noise_ss.generate_state(1)[0]),
    )

# --- Trials ---

def _transform_assignment(assignment: Assignment, mode: TransformMode) -> Assignment:
    by_paper: List[List[Tuple[int, float]]] = [[] for _ in range(assignment.m)]
    for paper, reviewer, weight in assignment.edges:
        by_paper[paper].append((reviewer, weight))
    weights = apply_weight_transform([[w for _, w in row] for row in by_paper], mode)
    edges = tuple(
        (paper, reviewer, w)
        for paper, (row, new_row) in enumerate(zip(by_paper, weights))
        for (reviewer, _), w in zip(row, new_row)
    )
    return Assignment(n=assignment.n, m=assignment.m, edges=edges)

def run_trial(
    cfg: ExperimentConfig,
    n: int,
    trial_index: int,
    distribution: Optional[BetaWeightSampler] = None,
    keep_artifacts: bool = False,
) -> TrialResult:
    """Sample one conference, add noise, and score the three releases against θ*."""
    dist = distribution or cfg.distributions[0]
    seed, instance_seed, noise_seed = trial_seeds(cfg.base_seed, n, trial_index)
    timings = {}

    started = time.perf_counter()
    assignment = sample_assignment(n, cfg.papers_for(n), cfg.reviewer_load, cfg.paper_load, dist, instance_seed)
    if cfg.transform is not TransformMode.IDENTITY:
        assignment = _transform_assignment(assignment, cfg.transform)
    theta = sorted_mean_weights(assignment).as_array()
    r = noisy_release(theta, cfg.mechanism, noise_seed)
    pw = public_view(assignment)
    total = target_sum(pw)
    timings['instance_ms'] = (time.perf_counter() - started) * 1e3

    started = time.perf_counter()
    lo, hi = cfg.box
    baseline = project_baseline(r, lo, hi, total, tolerance=cfg.tolerance, max_iterations=cfg.max_iterations)
    timings['baseline_ms'] = (time.perf_counter() - started) * 1e3

    started = time.perf_counter()
    bounds = compute_bounds(pw)
    timings['bounds_ms'] = (time.perf_counter() - started) * 1e3

    started = time.perf_counter()
    problem = ProjectionProblem.from_bounds(r, bounds, total, tolerance=cfg.tolerance, max_iterations=cfg.max_iterations)
    ours = project_intersection(problem)
    timings['projection_ms'] = (time.perf_counter() - started) * 1e3

    return TrialResult(
        n=n,
        dist_label=dist.label,
        trial=trial_index,
        seed=seed,
        sse_noisy=sse(r, theta),
        sse_baseline=sse(baseline, theta),
        sse_ours=sse(ours, theta),
        bound_width=bounds.mean_width,
        timings=timings,
        artifacts=TrialArtifacts(pw, theta, r, baseline, ours) if keep_artifacts else None,
    )

def _aggregate(n: int, label: str, results: Sequence[TrialResult], wall_ms: float) -> Dict[str, Any]:
    row: Dict[str, Any] = {'n': n, 'dist_label': label, 'trials': len(results)}
    for method in ('noisy', 'baseline', 'ours'):
        values = np.array([getattr(t, f'sse_{method}') for t in results])
        row[f'mean_{method}'] = float(values.mean())
        row[f'sem_{method}'] = float(stats.sem(values)) if values.size > 1 else float('nan')
    row['mean_bound_width'] = float(np.mean([t.bound_width for t in results]))
    row['wall_ms'] = wall_ms
    return row

def run_experiment(
    cfg: ExperimentConfig,
    results_path: Optional[Path] = None,
    dump_path: Optional[Path] = None,
    keep_artifacts: bool = False,
) -> ExperimentResult:
    """
    Run every (n, distribution) cell of the sweep and aggregate mean and standard
    error of each method's SSE.

    Trials may run in worker processes; aggregation always follows trial index
    order. If a cell fails, the rows finished so far plus an error marker row are
    written to `results_path` before the exception propagates.
    """
    rows: List[Dict[str, Any]] = []
    trials: List[TrialResult] = []

    def flush() -> None:
        if results_path is not None:
            pd.DataFrame(rows, columns=RESULT_COLUMNS).to_csv(results_path, index=False)
        if dump_path is not None:
            _trial_table(trials).to_csv(dump_path, index=False)

    executor = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for n in cfg.n_values:
            for dist in cfg.distributions:
                started = time.perf_counter()
                job = partial(run_trial, cfg, n, distribution=dist, keep_artifacts=keep_artifacts)
                try:
                    mapper = executor.map if executor is not None else map
                    cell = list(mapper(job, range(cfg.trials)))
                except Exception as e:
                    logger.error(f"Experiment cell n={n}, {dist.label} failed: {e}", exc_info=True)
                    rows.append({'n': n, 'dist_label': f"ERROR: {dist.label}: {e}", 'trials': 0})
                    flush()
                    raise
                trials.extend(cell)
                rows.append(_aggregate(n, dist.label, cell, (time.perf_counter() - started) * 1e3))
                logger.info(f"Finished n={n}, {dist.label}: {cfg.trials} trials.")
    finally:
        if executor is not None:
            executor.shutdown()

    flush()
    return ExperimentResult(aggregate=pd.DataFrame(rows, columns=RESULT_COLUMNS), trials=trials)

# --- Runtime growth ---

@dataclass(frozen=True)
class GrowthFit:
    table: pd.DataFrame
    slope: float
    intercept: float

def runtime_growth(
    n_values: Sequence[int],
    load: int = 2,
    seed: int = 0,
    sampler: Optional[BetaWeightSampler] = None,
) -> GrowthFit:
    """Time compute_bounds on one n = m, ℓ = k = load instance per n and fit log(seconds) ~ log(n)."""
    sampler = sampler or BetaWeightSampler("fixed", 5.0, 1.0)
    records = []
    for n in n_values:
        pw = public_view(sample_assignment(n, n, load, load, sampler, seed + n))
        started = time.perf_counter()
        compute_bounds(pw)
        records.append({'n': n, 'seconds': time.perf_counter() - started})
    table = pd.DataFrame(records)
    fit = stats.linregress(np.log(table['n']), np.log(table['seconds']))
    logger.info(f"compute_bounds log-log slope {fit.slope:.2f} over n={list(n_values)}.")
    return GrowthFit(table=table, slope=float(fit.slope), intercept=float(fit.intercept))
