"""Equilibrium-finding update rules on per-player pseudogradients.

All rules perform simultaneous ascent: each player's parameters move
along that player's own-utility pseudogradient.  Three dynamics are
supported:

  simultaneous   x <- x + alpha * xi(x)
  extragradient  x <- x + alpha * xi(x + beta * xi(x))
  optimistic     x <- x + alpha * xi(x) + beta * (xi(x) - xi_prev)

With beta = 0 all three coincide.  Updates are per-player: player i's
parameters depend only on player i's gradient within a step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

DYNAMICS = ("simultaneous", "extragradient", "optimistic")

Profile = list  # list of per-player parameter vectors
GradFn = Callable[[Sequence[np.ndarray]], list]


@dataclass
class DynamicsConfig:
    kind: str = "simultaneous"
    alpha: float = 1e-6
    beta: float | None = None  # defaults to alpha for the two-step rules

    def __post_init__(self):
        if self.kind not in DYNAMICS:
            raise ValueError(f"unknown dynamics {self.kind!r}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.beta is None:
            self.beta = 0.0 if self.kind == "simultaneous" else self.alpha
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


@dataclass
class OptimizerState:
    """Mutable per-run optimizer memory (single trainer loop owns it)."""

    cfg: DynamicsConfig
    prev_grads: list | None = None  # optimistic only
    step_count: int = field(default=0)

    def snapshot(self) -> dict:
        return {
            "step_count": self.step_count,
            "prev_grads": None if self.prev_grads is None
            else [g.copy() for g in self.prev_grads],
        }

    def restore(self, snap: dict) -> None:
        self.step_count = snap["step_count"]
        self.prev_grads = (
            None if snap["prev_grads"] is None else [g.copy() for g in snap["prev_grads"]]
        )


def simultaneous_step(profile: Sequence[np.ndarray], grads: Sequence[np.ndarray],
                      alpha: float) -> list:
    """x_i <- x_i + alpha * xi_i for every player at once."""
    return [x + alpha * g for x, g in zip(profile, grads)]


def extragradient_step(profile: Sequence[np.ndarray], grad_fn: GradFn,
                       alpha: float, beta: float) -> list:
    """Lookahead evaluation at x + beta * xi(x); two grad_fn calls."""
    g0 = grad_fn(profile)
    mid = [x + beta * g for x, g in zip(profile, g0)]
    g1 = grad_fn(mid)
    return [x + alpha * g for x, g in zip(profile, g1)]


def optimistic_step(profile: Sequence[np.ndarray], grads: Sequence[np.ndarray],
                    prev_grads: Sequence[np.ndarray], alpha: float, beta: float) -> list:
    """x_i <- x_i + alpha * xi_i + beta * (xi_i - xi_prev_i)."""
    return [
        x + alpha * g + beta * (g - gp)
        for x, g, gp in zip(profile, grads, prev_grads)
    ]


def apply_dynamics(state: OptimizerState, profile: Sequence[np.ndarray],
                   grad_fn: GradFn) -> list:
    """One update of the configured dynamic; mutates optimizer state.

    grad_fn is called once per step, except for extragradient which
    evaluates a fresh pseudogradient at the extrapolated point as well.
    """
    cfg = state.cfg
    if cfg.kind == "extragradient":
        new = extragradient_step(profile, grad_fn, cfg.alpha, cfg.beta)
    else:
        grads = grad_fn(profile)
        if cfg.kind == "simultaneous":
            new = simultaneous_step(profile, grads, cfg.alpha)
        else:  # optimistic; first step uses xi_prev = xi (no correction)
            prev = state.prev_grads if state.prev_grads is not None else grads
            new = optimistic_step(profile, grads, prev, cfg.alpha, cfg.beta)
            state.prev_grads = [g.copy() for g in grads]
    state.step_count += 1
    return new


def grad_rounds_per_step(kind: str) -> int:
    """Pseudogradient exchange rounds one update needs (message accounting)."""
    return 2 if kind == "extragradient" else 1
