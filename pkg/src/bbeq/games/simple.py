"""The chopstick auction and the visibility game.

Chopstick: three items sold in simultaneous first-price auctions between
two bidders.  Owning any two (or all three) items is worth 1, a single
item is worthless.  The winner of each item pays their own bid on it;
per-item ties are broken by a fair coin.

Visibility: each player picks a point x_i in [0, 1] and earns the
distance to the next higher point, or to 1 if theirs is the (tie-broken)
highest.  Complete information, no state.
"""

from __future__ import annotations

import numpy as np

from ..policy import OutputHead
from ..prng import RngStream
from .base import Game, empty_rows


class _StatelessGame(Game):
    state_dim = 0

    def obs_dim(self, player: int) -> int:
        return 0

    def sample_states(self, n: int, stream: RngStream) -> np.ndarray:
        return empty_rows(n)

    def observe(self, states: np.ndarray, player: int) -> np.ndarray:
        return empty_rows(states.shape[0])

    def sample_states_given_obs(
        self, player: int, obs: np.ndarray, n: int, stream: RngStream
    ) -> np.ndarray:
        return empty_rows(n)


class ChopstickGame(_StatelessGame):
    kind = "chopstick"
    n_players = 2
    n_items = 3

    def action_dim(self, player: int) -> int:
        return self.n_items

    def head(self, player: int) -> OutputHead:
        return OutputHead(kind="absolute_value")

    def n_tie_uniforms(self, n: int) -> tuple[int, ...]:
        return (n, self.n_items)

    def payoffs_given_ties(
        self, states: np.ndarray, actions: list[np.ndarray], tie_u: np.ndarray
    ) -> np.ndarray:
        a0, a1 = actions
        win0 = (a0 > a1) | ((a0 == a1) & (tie_u < 0.5))
        w0 = win0.sum(axis=1)
        pay0 = np.where(win0, a0, 0.0).sum(axis=1)
        pay1 = np.where(~win0, a1, 0.0).sum(axis=1)
        r0 = (w0 >= 2).astype(float) - pay0
        r1 = (w0 <= 1).astype(float) - pay1
        return np.stack([r0, r1], axis=1)

    def grid_payoff_means(
        self,
        player: int,
        grid: np.ndarray,
        states: np.ndarray,
        opp_actions: list[np.ndarray],
    ) -> np.ndarray:
        """Mean payoff per grid bid triple from binned joint opponent CDFs.

        The pair-value term P(win >= 2 items) expands by inclusion-
        exclusion into pairwise and triple joint win probabilities, each a
        joint empirical CDF of the opponent's bids, computable for the
        whole product grid from one histogram pass.  The payment term is
        separable:  sum_j g_j * F-hat_j(g_j).  Exact opponent ties with
        grid values carry probability zero against continuous opponents
        and are counted as losses here, while the generic evaluator flips
        a coin; tests compare the two paths on tie-free data.
        """
        opp = opp_actions[0]
        n = opp.shape[0]
        axes = [np.unique(grid[:, j]) for j in range(3)]
        if np.prod([len(ax) for ax in axes]) != grid.shape[0]:
            return None  # not a full product grid; use the generic path
        # cdf3[i0, i1, i2] = #{k : opp_k < (axes0[i0], axes1[i1], axes2[i2])} / n
        edges = [np.concatenate([[-np.inf], ax]) for ax in axes]
        hist, _ = np.histogramdd(opp, bins=edges)
        cdf3 = hist.cumsum(0).cumsum(1).cumsum(2) / n
        cdf2 = {
            (0, 1): cdf3[:, :, -1],
            (0, 2): cdf3[:, -1, :],
            (1, 2): cdf3[-1, :, :],
        }
        cdf1 = [cdf3[:, -1, -1], cdf3[-1, :, -1], cdf3[-1, -1, :]]
        idx = [np.searchsorted(axes[j], grid[:, j]) for j in range(3)]
        p12 = cdf2[(0, 1)][idx[0], idx[1]]
        p13 = cdf2[(0, 2)][idx[0], idx[2]]
        p23 = cdf2[(1, 2)][idx[1], idx[2]]
        p123 = cdf3[idx[0], idx[1], idx[2]]
        p_pair = p12 + p13 + p23 - 2.0 * p123
        payment = sum(grid[:, j] * cdf1[j][idx[j]] for j in range(3))
        return p_pair - payment


class VisibilityGame(_StatelessGame):
    kind = "visibility"

    def __init__(self, n_players: int = 2):
        self.n_players = n_players

    def action_dim(self, player: int) -> int:
        return 1

    def head(self, player: int) -> OutputHead:
        return OutputHead(kind="identity", clip=(0.0, 1.0))

    def n_tie_uniforms(self, n: int) -> tuple[int, ...]:
        return (n, self.n_players)

    def payoffs_given_ties(
        self, states: np.ndarray, actions: list[np.ndarray], tie_u: np.ndarray
    ) -> np.ndarray:
        x = np.concatenate([a.reshape(-1, 1) for a in actions], axis=1)
        # total order: by point, ties by an independent uniform draw
        order = np.lexsort((tie_u, x), axis=1)
        xs = np.take_along_axis(x, order, axis=1)
        gaps = np.concatenate([xs[:, 1:] - xs[:, :-1], 1.0 - xs[:, -1:]], axis=1)
        r = np.empty_like(x)
        np.put_along_axis(r, order, gaps, axis=1)
        return r

    def grid_payoff_means(
        self,
        player: int,
        grid: np.ndarray,
        states: np.ndarray,
        opp_actions: list[np.ndarray],
    ) -> np.ndarray:
        """Two-player fast path via sorted prefix sums over opponent points."""
        if self.n_players != 2:
            return None
        g = grid.reshape(-1)
        b = np.sort(opp_actions[0].reshape(-1))
        n = b.shape[0]
        cum = np.concatenate([[0.0], np.cumsum(b)])
        lo = np.searchsorted(b, g, side="left")
        hi = np.searchsorted(b, g, side="right")
        # opponent strictly above: earn b - g; at or below: earn 1 - g.
        # ties get the average of the two outcomes (fair coin on the order).
        above = cum[-1] - cum[hi]
        n_above = n - hi
        n_tie = hi - lo
        r_above = above - g * n_above
        r_tie = 0.5 * (1.0 - g) * n_tie  # win the coin: 1 - g; lose it: gap 0
        r_below = (1.0 - g) * lo
        return (r_above + r_tie + r_below) / n
