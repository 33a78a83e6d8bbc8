# src/reviewpriv/engine/privacy.py

import math
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from .weights import MeanWeightVector

logger = logging.getLogger(__name__)

_KINDS = ("laplace", "gaussian", "none")

@dataclass(frozen=True)
class NoiseMechanism:
    """
    Additive i.i.d. noise on the sorted mean-weight vector.

    `scale` is the Laplace scale b (variance 2b²) or the Gaussian standard
    deviation; it is ignored when kind is "none".
    """
    kind: str = "laplace"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"Unknown noise mechanism '{self.kind}'. Expected one of {_KINDS}.")
        if not math.isfinite(self.scale) or self.scale < 0:
            raise ValueError(f"Noise scale must be a nonnegative finite number, got {self.scale}.")

    @property
    def variance(self) -> float:
        if self.kind == "laplace":
            return 2.0 * self.scale ** 2
        if self.kind == "gaussian":
            return self.scale ** 2
        return 0.0

def laplace_scale_for_variance(variance: float) -> float:
    """Laplace scale b with variance 2b² equal to `variance`."""
    if variance < 0:
        raise ValueError("Variance must be nonnegative.")
    return math.sqrt(variance / 2.0)

def laplace_noise(rng: np.random.Generator, scale: float, size: int) -> np.ndarray:
    """Laplace(0, scale) draws by inverse CDF, one uniform per coordinate."""
    u = rng.uniform(-0.5, 0.5, size=size)
    # uniform() can return exactly -0.5, where the inverse CDF is infinite
    magnitude = np.minimum(np.abs(u), np.nextafter(0.5, 0.0))
    return -scale * np.sign(u) * np.log1p(-2.0 * magnitude)

def noisy_release(theta_star: Union[MeanWeightVector, np.ndarray], mech: NoiseMechanism, rng_seed: int) -> np.ndarray:
    """
    Perturb the true sorted mean-weight vector: r_i = θ*_i + η_i.

    The output need not be sorted. Identical seeds give bit-identical output.
    """
    theta = theta_star.as_array() if isinstance(theta_star, MeanWeightVector) else np.asarray(theta_star, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta_star must be finite.")
    if isinstance(theta_star, MeanWeightVector) and not theta_star.sorted:
        raise ValueError("noisy_release expects the sorted mean-weight vector.")

    if mech.kind == "none" or mech.scale == 0:
        return theta.copy()

    rng = np.random.default_rng(rng_seed)
    if mech.kind == "laplace":
        noise = laplace_noise(rng, mech.scale, theta.size)
    else:
        noise = rng.normal(0.0, mech.scale, size=theta.size)
    return theta + noise
