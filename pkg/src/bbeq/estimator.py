"""Smoothed zeroth-order pseudogradient estimation.

Estimates the gradient of the smoothed objective
E_{u ~ mu1} f(x + sigma u) from function values only, using the identity
grad_x E_{u ~ mu1} f(x + sigma u) = (1/sigma) E_{u ~ mu2} f(x + sigma u) u
with (mu1, mu2) given by Gaussian, ball, or Rademacher smoothing, and a
single-point, forward-difference, or central-difference stencil.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .prng import RngStream

SMOOTHINGS = ("gaussian", "ball", "rademacher")
STENCILS = ("single_point", "forward", "central")

# f(params, stream) -> one stochastic utility sample
Evaluator = Callable[[np.ndarray, RngStream], float]


@dataclass(frozen=True)
class EstimatorConfig:
    smoothing: str = "gaussian"
    stencil: str = "central"
    sigma: float = 1e-2
    n_samples: int = 1
    # reuse identical episode randomness for the paired evaluations of a
    # stencil sample; cuts variance without biasing the smoothed gradient
    common_random_numbers: bool = True
    episodes_per_eval: int = 1

    def __post_init__(self):
        if self.smoothing not in SMOOTHINGS:
            raise ValueError(f"unknown smoothing {self.smoothing!r}")
        if self.stencil not in STENCILS:
            raise ValueError(f"unknown stencil {self.stencil!r}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.episodes_per_eval < 1:
            raise ValueError("episodes_per_eval must be >= 1")


def perturbation(smoothing: str, d: int, stream: RngStream) -> np.ndarray:
    """One perturbation direction of dimension d."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if smoothing == "gaussian":
        return stream.standard_normal(d)
    if smoothing == "ball":
        g = stream.standard_normal(d)
        return g * (np.sqrt(d) / np.linalg.norm(g))
    if smoothing == "rademacher":
        return np.where(stream.uniforms(d) < 0.5, -1.0, 1.0)
    raise ValueError(f"unknown smoothing {smoothing!r}")


def smoothed_pseudogradient(
    f: Evaluator,
    x: np.ndarray,
    cfg: EstimatorConfig,
    stream: RngStream,
) -> np.ndarray:
    """(1/(sigma N)) sum_i a_i u_i with a_i per the configured stencil.

    Function evaluations per call: N (single_point), N + 1 (forward,
    f(x) evaluated once and reused), 2N (central).  Deterministic for a
    fixed stream state.
    """
    d = x.shape[0]
    sigma = cfg.sigma
    grad = np.zeros(d)
    f_base = None
    if cfg.stencil == "forward":
        f_base = f(x, stream)
    for _ in range(cfg.n_samples):
        u = perturbation(cfg.smoothing, d, stream)
        if cfg.stencil == "single_point":
            a = f(x + sigma * u, stream)
        elif cfg.stencil == "forward":
            a = f(x + sigma * u, stream) - f_base
        else:
            if cfg.common_random_numbers:
                snap = stream.save()
                f_plus = f(x + sigma * u, stream)
                stream.restore(snap)
                f_minus = f(x - sigma * u, stream)
            else:
                f_plus = f(x + sigma * u, stream)
                f_minus = f(x - sigma * u, stream)
            a = 0.5 * (f_plus - f_minus)
        grad += a * u
    grad /= sigma * cfg.n_samples
    return grad
