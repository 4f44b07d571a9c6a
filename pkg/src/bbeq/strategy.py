"""Strategy protocol: anything that maps observations to (random) actions.

Both trained policy networks and the analytic equilibrium samplers
implement ``sample_actions``; the evaluator and the CLI only ever see
this interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import policy
from .prng import RngStream


class Strategy(Protocol):
    def sample_actions(self, obs: np.ndarray, stream: RngStream) -> np.ndarray:
        """obs: (B, obs_dim) -> actions (B, action_dim)."""
        ...


@dataclass
class PolicyStrategy:
    """A policy network with its flat parameter vector."""

    arch: policy.PolicyArchitecture
    params: np.ndarray

    def sample_actions(self, obs: np.ndarray, stream: RngStream) -> np.ndarray:
        return policy.sample_action(self.arch, self.params, obs, stream)
