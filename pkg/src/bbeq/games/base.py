"""Bayesian game abstraction shared by all benchmark games.

A game exposes batched, vectorized primitives: state sampling, per-player
observation, conditional state sampling given one player's observation,
and the payoff evaluator.  Payoff evaluation is pure given the tie-break
uniforms; ``payoffs`` draws those from the caller's stream so repeated
evaluation with a fixed stream is deterministic.  Evaluating from
multiple threads requires independent streams.
"""

from __future__ import annotations

import abc

import numpy as np

from ..policy import OutputHead
from ..prng import RngStream

_EMPTY_ROWS: dict[int, np.ndarray] = {}


def empty_rows(n: int) -> np.ndarray:
    """Shared (n, 0) array for stateless games; treat as read-only."""
    arr = _EMPTY_ROWS.get(n)
    if arr is None:
        arr = _EMPTY_ROWS[n] = np.zeros((n, 0))
    return arr


class Game(abc.ABC):
    kind: str
    n_players: int
    state_dim: int

    @abc.abstractmethod
    def obs_dim(self, player: int) -> int: ...

    @abc.abstractmethod
    def action_dim(self, player: int) -> int: ...

    @abc.abstractmethod
    def head(self, player: int) -> OutputHead: ...

    def obs_constant(self, player: int) -> bool:
        """True when the player's observation is almost surely constant.

        For such players conditioning on the observation is vacuous
        (the conditional state law equals the prior), which the NashConv
        estimator exploits.
        """
        return self.obs_dim(player) == 0

    @abc.abstractmethod
    def sample_states(self, n: int, stream: RngStream) -> np.ndarray:
        """n states drawn from the prior, shape (n, state_dim)."""

    @abc.abstractmethod
    def observe(self, states: np.ndarray, player: int) -> np.ndarray:
        """Deterministic observation map, shape (n, obs_dim(player))."""

    @abc.abstractmethod
    def sample_states_given_obs(
        self, player: int, obs: np.ndarray, n: int, stream: RngStream
    ) -> np.ndarray:
        """n states from the prior conditioned on tau_player(state) = obs."""

    # -- payoffs ----------------------------------------------------------

    @abc.abstractmethod
    def n_tie_uniforms(self, n: int) -> tuple[int, ...]:
        """Shape of the tie-break uniform block for a batch of n episodes."""

    @abc.abstractmethod
    def payoffs_given_ties(
        self, states: np.ndarray, actions: list[np.ndarray], tie_u: np.ndarray
    ) -> np.ndarray:
        """Payoff matrix (n, n_players); ties resolved by tie_u."""

    def draw_tie_uniforms(self, n: int, stream: RngStream) -> np.ndarray:
        return stream.uniforms(self.n_tie_uniforms(n))

    def payoffs(
        self, states: np.ndarray, actions: list[np.ndarray], stream: RngStream
    ) -> np.ndarray:
        n = actions[0].shape[0]
        return self.payoffs_given_ties(states, actions, self.draw_tie_uniforms(n, stream))

    # -- hooks for the evaluator ------------------------------------------

    def grid_payoff_means(
        self,
        player: int,
        grid: np.ndarray,
        states: np.ndarray,
        opp_actions: list[np.ndarray],
    ):
        """Optional fast path: E-hat of player's payoff for every grid action.

        Returns (len(grid),) means over the supplied episodes, or None to
        fall back to the generic tiled evaluation.  Implementations must
        agree with ``payoffs_given_ties`` in expectation over ties; exact
        ties against sampled opponents occur with probability zero for
        every game here, and the half-win tie correction is applied where
        it is analytically available.
        """
        return None


def pick_argmax_uniform(values: np.ndarray, tie_u: np.ndarray) -> np.ndarray:
    """One-hot winner per row of (n, p) values, ties split uniformly.

    ``tie_u`` has shape (n,).  Exact float equality defines a tie; under
    randomized policies ties have probability zero, but degenerate
    profiles used by analytic oracles need defined behavior.
    """
    if values.shape[-1] == 2:
        a, b = values[..., 0], values[..., 1]
        w0 = (a > b) | ((a == b) & (tie_u < 0.5))
        out = np.empty(values.shape, dtype=bool)
        out[..., 0] = w0
        out[..., 1] = ~w0
        return out
    top = values.max(axis=-1, keepdims=True)
    tied = values == top
    count = tied.sum(axis=-1, keepdims=True)
    pick = np.floor(tie_u[..., None] * count).astype(np.int64)
    pick = np.minimum(pick, count - 1)  # guard tie_u == 1.0
    order = np.cumsum(tied, axis=-1) - 1
    return tied & (order == pick)
