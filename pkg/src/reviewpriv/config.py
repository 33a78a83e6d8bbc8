# src/reviewpriv/config.py

import logging

logger = logging.getLogger(__name__)

class _BoundsSettings:
    """Configuration for tuple enumeration and the bound scans."""
    def __init__(self):
        # Beyond this many valid weight tuples the instance is no longer desk scale.
        self.max_tuples = 10_000_000
        # Slack allowed when checking L_i <= U_i on floating-point means.
        self.consistency_slack = 1e-12

class _SolverSettings:
    """Configuration for the projection solvers (root search and least squares)."""
    def __init__(self):
        self.tolerance = 1e-9
        self.max_iterations = 100_000

class _OracleSettings:
    """Caps for the brute-force ground truth enumerators."""
    def __init__(self):
        self.max_reviewers = 6
        self.max_load = 3
        self.cross_check_max_reviewers = 4
        self.max_vectors_reported = 50
        self.prop1_candidates = (-4.0, -2.0, 0.0, 2.0, 4.0)

class _SamplingSettings:
    """Configuration for the random assignment sampler."""
    def __init__(self):
        self.max_attempts = 10_000

class _SimulationSettings:
    """Defaults for the experiment harness."""
    def __init__(self):
        self.n_values = [10, 20, 30, 40, 50]
        self.reviewer_load = 2
        self.paper_load = 2
        self.laplace_variance = 2.0
        self.trials = 200
        self.baseline_box = (0.0, 1.0)
        self.miscalibration_box = (-1.0, 1.0)
        self.workers = 1

class _AppSettings:
    """A container for all module-specific settings."""
    def __init__(self):
        self.bounds = _BoundsSettings()
        self.solver = _SolverSettings()
        self.oracle = _OracleSettings()
        self.sampling = _SamplingSettings()
        self.simulation = _SimulationSettings()

class _ReviewPrivConfig:
    """
    The main configuration class for reviewpriv.

    Instantiated once at import time and shared by every module. Engine functions
    read their defaults from here but always accept explicit overrides, so tests
    never need to mutate this object.
    """
    def __init__(self):
        try:
            self.app = _AppSettings()
            logger.info("reviewpriv configuration loaded successfully.")
        except Exception as e:
            logger.error(f"Failed to initialize configuration: {e}", exc_info=True)
            raise RuntimeError(f"FATAL: configuration initialization failed: {e}")

# --- Singleton Instance ---
try:
    config = _ReviewPrivConfig()
except Exception as e:
    logger.critical(f"FATAL: Could not create the configuration singleton: {e}", exc_info=True)
    raise
