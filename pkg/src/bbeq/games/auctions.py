"""Single-item sealed-bid auctions over five value structures.

Value structures (state space, observation, item value):

  ipv         [0,1]^n      o_i = w_i            v_i = w_i
  common      [0,1]^{n+1}  o_i = w_i * w_{n+1}  v_i = w_{n+1}
  affiliated  [0,1]^{n+1}  o_i = w_i + w_{n+1}  v_i = w_{n+1} + mean_j w_j
  complete    [0,1]        o_i = w              v_i = w
  asymmetric  [0,1]        o_i = w [i = 0]      v_i = w

with the state uniform on its box.  Payment rules: kth-price winner-pay
(the highest bidder wins and pays the kth-highest bid overall) and
all-pay (everyone pays their own bid; the highest bidder wins the item).
Ties are broken uniformly at random.

The asymmetric-information auction is pinned to 2 players, 1st price,
winner-pay: that is the configuration with a known equilibrium.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..policy import OutputHead
from ..prng import RngStream
from .base import Game, pick_argmax_uniform

VALUE_STRUCTURES = ("ipv", "common", "affiliated", "complete", "asymmetric")


@dataclass(frozen=True)
class PaymentRule:
    kind: str  # "winner_pay" | "all_pay"
    k: int | None = None  # price rank, winner_pay only

    def __post_init__(self):
        if self.kind not in ("winner_pay", "all_pay"):
            raise ValueError(f"unknown payment rule {self.kind!r}")
        if self.kind == "winner_pay" and (self.k is None or self.k < 1):
            raise ValueError("winner_pay needs a price rank k >= 1")


class AuctionGame(Game):
    kind = "auction"

    def __init__(self, n_players: int, value_structure: str, payment: PaymentRule):
        if value_structure not in VALUE_STRUCTURES:
            raise ValueError(f"unknown value structure {value_structure!r}")
        if payment.kind == "winner_pay" and payment.k > n_players:
            raise ValueError("price rank k exceeds the number of players")
        if value_structure == "asymmetric" and (
            n_players != 2 or payment != PaymentRule("winner_pay", 1)
        ):
            raise ValueError("asymmetric auction is fixed at 2 players, 1st price winner-pay")
        self.n_players = n_players
        self.value_structure = value_structure
        self.payment = payment
        if value_structure in ("common", "affiliated"):
            self.state_dim = n_players + 1
        elif value_structure == "ipv":
            self.state_dim = n_players
        else:
            self.state_dim = 1

    # bids can exceed values; this bound covers every analytic solution
    @property
    def bid_upper(self) -> float:
        return 2.0 if self.value_structure == "affiliated" else 1.5

    def obs_dim(self, player: int) -> int:
        return 1

    def action_dim(self, player: int) -> int:
        return 1

    def head(self, player: int) -> OutputHead:
        return OutputHead(kind="absolute_value")

    def obs_constant(self, player: int) -> bool:
        return self.value_structure == "asymmetric" and player != 0

    def sample_states(self, n: int, stream: RngStream) -> np.ndarray:
        return stream.uniforms((n, self.state_dim))

    def observe(self, states: np.ndarray, player: int) -> np.ndarray:
        s = self.value_structure
        if s == "ipv":
            return states[:, player : player + 1]
        if s == "common":
            return states[:, player : player + 1] * states[:, -1:]
        if s == "affiliated":
            return states[:, player : player + 1] + states[:, -1:]
        if s == "complete":
            return states[:, :1]
        # asymmetric: only player 0 sees the state
        if player == 0:
            return states[:, :1]
        return np.zeros((states.shape[0], 1))

    def sample_states_given_obs(
        self, player: int, obs: np.ndarray, n: int, stream: RngStream
    ) -> np.ndarray:
        o = float(np.asarray(obs).reshape(-1)[0])
        s = self.value_structure
        out = np.empty((n, self.state_dim))
        if s == "ipv":
            out[:] = stream.uniforms((n, self.state_dim))
            out[:, player] = o
        elif s == "common":
            others = [j for j in range(self.n_players) if j != player]
            out[:, others] = stream.uniforms((n, len(others)))
            z = stream.uniforms(n)
            if o <= 0.0:
                # measure-zero edge of the observation range
                out[:, -1] = 0.0
                out[:, player] = 0.0
            else:
                out[:, -1] = o**z
                out[:, player] = o / out[:, -1]
        elif s == "affiliated":
            others = [j for j in range(self.n_players) if j != player]
            out[:, others] = stream.uniforms((n, len(others)))
            lo, hi = max(0.0, o - 1.0), min(1.0, o)
            out[:, -1] = stream.uniform(lo, hi, n)
            out[:, player] = o - out[:, -1]
        elif s == "complete":
            out[:, 0] = o
        else:  # asymmetric
            if player == 0:
                out[:, 0] = o
            else:
                out[:, 0] = stream.uniforms(n)
        return out

    def values_bc(self, states: np.ndarray) -> np.ndarray:
        """Item value per player; (n, 1) view when common to all players."""
        s = self.value_structure
        if s == "ipv":
            return states
        if s == "affiliated":
            return (states[:, -1] + states[:, :-1].mean(axis=1))[:, None]
        if s == "common":
            return states[:, -1:]
        return states[:, :1]

    def values(self, states: np.ndarray) -> np.ndarray:
        """Item value per player, shape (n, n_players)."""
        v = self.values_bc(states)
        if v.shape[1] == self.n_players:
            return v
        return np.broadcast_to(v, (states.shape[0], self.n_players))

    def n_tie_uniforms(self, n: int) -> tuple[int, ...]:
        return (n,)

    def payoffs_given_ties(
        self, states: np.ndarray, actions: list[np.ndarray], tie_u: np.ndarray
    ) -> np.ndarray:
        bids = np.concatenate(actions, axis=1)
        vals = self.values_bc(states)
        winner = pick_argmax_uniform(bids, tie_u)
        if self.payment.kind == "all_pay":
            return winner * vals - bids
        if self.n_players == 2:
            k = self.payment.k
            price = bids.min(axis=1) if k == 2 else bids.max(axis=1)
        else:
            price = np.sort(bids, axis=1)[:, self.n_players - self.payment.k]
        return winner * (vals - price[:, None])

    def grid_payoff_means(
        self,
        player: int,
        grid: np.ndarray,
        states: np.ndarray,
        opp_actions: list[np.ndarray],
    ) -> np.ndarray:
        """Exact per-grid-bid mean payoff via sorted prefix sums.

        For each episode only the highest opposing bid m (and, for k >= 2
        winner-pay, the (k-1)th highest opposing bid, which is the kth
        highest overall when we win) matters.  Sorting episodes by m turns
        the mean over episodes into a prefix sum lookup per grid bid.
        Half-credit is given at exact ties, matching the uniform tie rule
        in expectation.
        """
        g = grid.reshape(-1)
        opp = np.concatenate([a.reshape(-1, 1) for a in opp_actions], axis=1)
        vals = self.values(states)[:, player]
        m = opp.max(axis=1)
        order = np.argsort(m, kind="stable")
        m_sorted = m[order]
        n = m_sorted.shape[0]
        lo = np.searchsorted(m_sorted, g, side="left")
        hi = np.searchsorted(m_sorted, g, side="right")
        if self.payment.kind == "all_pay":
            v_sorted = vals[order]
            cum_v = np.concatenate([[0.0], np.cumsum(v_sorted)])
            win_v = cum_v[lo] + 0.5 * (cum_v[hi] - cum_v[lo])
            return win_v / n - g
        k = self.payment.k
        if k == 1:
            price = np.broadcast_to(g[:, None], (g.size, 1))  # winner pays own bid
            v_sorted = vals[order]
            cum_v = np.concatenate([[0.0], np.cumsum(v_sorted)])
            win_v = cum_v[lo] + 0.5 * (cum_v[hi] - cum_v[lo])
            win_p = (lo + 0.5 * (hi - lo)) / n
            return win_v / n - g * win_p
        # kth price, k >= 2: pay the (k-1)th highest opposing bid when winning
        pay = np.partition(opp, opp.shape[1] - (k - 1), axis=1)[:, opp.shape[1] - (k - 1)]
        net = vals - pay
        net_sorted = net[order]
        cum_net = np.concatenate([[0.0], np.cumsum(net_sorted)])
        win_net = cum_net[lo] + 0.5 * (cum_net[hi] - cum_net[lo])
        return win_net / n
