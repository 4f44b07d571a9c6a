"""Continuous Colonel Blotto with fixed or random budgets.

Players allocate their budget across J battlefields; each battlefield
goes to the largest allocation (ties split uniformly at random) and is
worth v_ij to player i.  Actions live on the standard J-simplex dilated
by the player's budget, which the softmax head enforces by construction.

With random budgets, both budgets are drawn uniformly from [0, 1] each
episode and revealed to both players; battlefield values stay at 1.
"""

from __future__ import annotations

import numpy as np

from ..policy import OutputHead
from ..prng import RngStream
from .base import Game, empty_rows, pick_argmax_uniform


class BlottoGame(Game):
    kind = "blotto"

    def __init__(
        self,
        n_players: int = 2,
        n_battlefields: int = 3,
        budgets="fixed unit",
        values: np.ndarray | float = 1.0,
    ):
        self.n_players = n_players
        self.J = n_battlefields
        if isinstance(budgets, str) and budgets == "random":
            self.random_budgets = True
            self.budgets = None
            self.state_dim = n_players
        else:
            self.random_budgets = False
            if isinstance(budgets, str):
                budgets = np.ones(n_players)
            self.budgets = np.asarray(budgets, dtype=float)
            if self.budgets.shape != (n_players,) or np.any(self.budgets <= 0):
                raise ValueError("budgets must be positive, one per player")
            self.state_dim = 0
        v = np.asarray(values, dtype=float)
        if v.ndim == 0:
            v = np.full((n_players, self.J), float(v))
        if v.shape != (n_players, self.J) or np.any(v < 0):
            raise ValueError("values must be nonnegative with shape (players, battlefields)")
        self.values = v

    def obs_dim(self, player: int) -> int:
        return self.n_players if self.random_budgets else 0

    def action_dim(self, player: int) -> int:
        return self.J

    def head(self, player: int) -> OutputHead:
        if self.random_budgets:
            return OutputHead(kind="softmax_scaled", scale_obs_index=player)
        return OutputHead(kind="softmax_scaled", scale=float(self.budgets[player]))

    def budget_of(self, player: int, obs: np.ndarray | None = None) -> float:
        if self.random_budgets:
            return float(np.asarray(obs).reshape(-1)[player])
        return float(self.budgets[player])

    def sample_states(self, n: int, stream: RngStream) -> np.ndarray:
        if self.random_budgets:
            return stream.uniforms((n, self.n_players))
        return empty_rows(n)

    def observe(self, states: np.ndarray, player: int) -> np.ndarray:
        # both players see the full budget vector
        return states.copy() if self.random_budgets else empty_rows(states.shape[0])

    def sample_states_given_obs(
        self, player: int, obs: np.ndarray, n: int, stream: RngStream
    ) -> np.ndarray:
        if not self.random_budgets:
            return empty_rows(n)
        return np.tile(np.asarray(obs, dtype=float).reshape(1, -1), (n, 1))

    def n_tie_uniforms(self, n: int) -> tuple[int, ...]:
        return (n, self.J)

    def payoffs_given_ties(
        self, states: np.ndarray, actions: list[np.ndarray], tie_u: np.ndarray
    ) -> np.ndarray:
        if self.n_players == 2:
            a0, a1 = actions
            w0 = (a0 > a1) | ((a0 == a1) & (tie_u < 0.5))  # (n, J)
            out = np.empty((a0.shape[0], 2))
            out[:, 0] = w0 @ self.values[0]
            out[:, 1] = (~w0) @ self.values[1]
            return out
        alloc = np.stack(actions, axis=1)  # (n, players, J)
        # winner one-hot per battlefield, players axis last
        won = pick_argmax_uniform(np.swapaxes(alloc, 1, 2), tie_u)  # (n, J, players)
        return np.einsum("njp,pj->np", won, self.values)

    def grid_payoff_means(
        self,
        player: int,
        grid: np.ndarray,
        states: np.ndarray,
        opp_actions: list[np.ndarray],
    ) -> np.ndarray:
        """Mean payoff of each grid allocation, exact up to tie half-credit.

        Only supports two players (the opposing allocation per battlefield
        is then the single opponent's); expected payoff is separable over
        battlefields as sum_j v_j * P-hat(win j).
        """
        if self.n_players != 2:
            return None
        opp = opp_actions[0]
        out = np.zeros(grid.shape[0])
        n = opp.shape[0]
        for j in range(self.J):
            col = np.sort(opp[:, j])
            lo = np.searchsorted(col, grid[:, j], side="left")
            hi = np.searchsorted(col, grid[:, j], side="right")
            out += self.values[player, j] * (lo + 0.5 * (hi - lo))
        return out / n
