# src/reviewpriv/session_manager.py

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

# Only engine and repository imports: no argparse, no stdout. The CLI owns both.
from .repository import InstanceRepository, PathLike
from .engine import bounds, oracle, projection, simulation
from .engine.instance import PublicWeights, target_sum
from .engine.weights import TransformMode, apply_weight_transform
from . import config

logger = logging.getLogger(__name__)

class ReleaseManager:
    """
    The orchestration controller behind every reviewpriv workflow.

    It loads inputs through its repository, calls the engine, and returns plain
    JSON-ready dictionaries (or DataFrames) so the CLI and the tests drive exactly
    the same code path.
    """
    def __init__(self, repository: InstanceRepository):
        """
        Args:
            repository (InstanceRepository): Source and sink for every file the
                workflows touch.
        """
        self._repo = repository
        self.settings = config.config

    def load_public(
        self,
        path: PathLike,
        transform: TransformMode = TransformMode.IDENTITY,
        normalized_path: Optional[PathLike] = None,
    ) -> PublicWeights:
        """
        Reads public weights, or public scores turned into weights by `transform`.

        With a non-identity transform the file holds each paper's raw scores in
        review order (and `normalized_path` the matching normalized scores).
        """
        transform = TransformMode(transform)
        if transform is TransformMode.IDENTITY:
            return self._repo.load_public_weights(path)
        scores, loads = self._repo.load_score_table(path)
        normalized = self._repo.load_score_table(normalized_path)[0] if normalized_path is not None else None
        weights = apply_weight_transform(scores, transform, normalized)
        logger.info(f"Applied '{transform.value}' transform to {len(weights)} papers.")
        return PublicWeights(rows=tuple(tuple(w) for w in weights), reviewer_loads=loads)

    def compute_bounds(self, pw: PublicWeights) -> Dict[str, Any]:
        """
        Per-index bounds for the public data.

        Args:
            pw (PublicWeights): Per-paper weights and reviewer loads.

        Returns:
            Dict[str, Any]: {"L": [...], "U": [...]}, ready for JSON.

        Raises:
            InstanceTooLargeError: Above the configured tuple cap.
            InconsistentPublicDataError: If no valid assignment fits the data.
        """
        return bounds.compute_bounds(pw, max_tuples=self.settings.app.bounds.max_tuples).to_dict()

    def release(
        self,
        pw: PublicWeights,
        r: np.ndarray,
        total: Optional[float] = None,
        tolerance: Optional[float] = None,
        max_iterations: Optional[int] = None,
    ) -> Dict[str, Any]:
        """
        Post-process a noisy vector onto the bounds polytope.

        Args:
            pw (PublicWeights): The public data the bounds are computed from.
            r (np.ndarray): The noisy release, one entry per reviewer.
            total (Optional[float]): Overrides the public total; by default it is
                derived from X (and dropped for mixed loads).

        Returns:
            Dict[str, Any]: {"t": projected vector, "S": total used or None, "n": n}.
        """
        if r.size != pw.n:
            raise ValueError(f"Noisy vector has {r.size} entries but the instance has n={pw.n} reviewers.")
        S = total if total is not None else target_sum(pw)
        bv = bounds.compute_bounds(pw, max_tuples=self.settings.app.bounds.max_tuples)
        problem = projection.ProjectionProblem.from_bounds(
            r, bv, S,
            tolerance=tolerance or self.settings.app.solver.tolerance,
            max_iterations=max_iterations or self.settings.app.solver.max_iterations,
        )
        t = projection.project_intersection(problem)
        return {"t": t.tolist(), "S": S, "n": pw.n}

    def oracle_report(self, pw: PublicWeights) -> Dict[str, Any]:
        """Θ by brute force, checked against the computed bounds."""
        theta = oracle.enumerate_theta(pw)
        bv = bounds.compute_bounds(pw)
        violations = oracle.bound_violations(theta, bv)
        limit = self.settings.app.oracle.max_vectors_reported
        report = {
            "theta_size": len(theta),
            "theta": [list(v) for v in theta.sorted_vectors] if len(theta) <= limit else None,
            "bounds": bv.to_dict(),
            "sound": not violations,
            "violations": [{"vector": list(v), "index": i} for v, i in violations],
        }
        if violations:
            logger.error(f"Bounds are violated by {len(violations)} (vector, index) pairs.")
        return report

    def prop1(self, samples: Optional[int] = None, seed: Optional[int] = None) -> Dict[str, Any]:
        """
        Expected errors of the raw release and of nearest-point projection.

        Args:
            samples (Optional[int]): Adds Monte Carlo estimates from this many draws.
            seed (Optional[int]): Seed for the Monte Carlo draws.

        Returns:
            Dict[str, Any]: "noisy" and "projected", plus "mc_noisy" and
                "mc_projected" when sampling.
        """
        errors = oracle.prop1_expected_errors(samples=samples, seed=seed)
        result: Dict[str, Any] = {"noisy": errors.noisy, "projected": errors.projected}
        if errors.mc_noisy is not None:
            result["mc_noisy"] = errors.mc_noisy
            result["mc_projected"] = errors.mc_projected
        return result

    def simulate(
        self,
        cfg: simulation.ExperimentConfig,
        output: PathLike,
        dump: Optional[PathLike] = None,
        instance_dir: Optional[PathLike] = None,
    ) -> simulation.ExperimentResult:
        """
        Run an experiment, writing the results CSV (and optionally the per-trial dump).

        With `instance_dir`, each trial's public weights, noisy vector and truth are
        written there so any single trial can be replayed through `release`.
        """
        result = simulation.run_experiment(
            cfg,
            results_path=self._repo.resolve(output),
            dump_path=self._repo.resolve(dump) if dump is not None else None,
            keep_artifacts=instance_dir is not None,
        )
        if instance_dir is not None:
            target = self._repo.resolve(instance_dir)
            target.mkdir(parents=True, exist_ok=True)
            for trial in result.trials:
                stem = Path(target) / f"n{trial.n}_t{trial.trial}_{_slug(trial.dist_label)}"
                art = trial.artifacts
                self._repo.save_public_weights(art.public, f"{stem}_public.csv")
                self._repo.write_json(
                    {"r": art.noisy.tolist(), "theta": art.theta.tolist(), "ours": art.ours.tolist(), "seed": trial.seed},
                    f"{stem}_noisy.json",
                )
        logger.info(f"Simulation finished: {len(result.aggregate)} aggregate rows.")
        return result

def _slug(label: str) -> str:
    return ''.join(ch if ch.isalnum() else '_' for ch in label).strip('_')
