"""Sampled NashConv estimation and best-response machinery.

NashConv is the sum over players of utility gaps g_i = b_i - u_i, where
b_i is the best utility player i could get against the others' strategies
and u_i their current utility.  Best responses are approximated on an
action grid; the expectation over hidden state is approximated by
conditional sampling given the player's observation:

    b_i ~= E_{o_i} max_{a on grid} E_{state | o_i} E_{a_-i} payoff_i

For players whose observation is almost surely constant, conditioning is
vacuous and the maximization is taken outside the pooled average: the
estimand is identical, and pooling avoids the upward max-of-noise bias of
averaging per-observation maxima.  The current utility u_i reuses the
same states and opponent actions as the grid search so the shared noise
cancels from the gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .games import AuctionGame, BlottoGame, ChopstickGame, Game, VisibilityGame
from .prng import RngStream
from .strategy import Strategy


@dataclass(frozen=True)
class EvalConfig:
    n_obs_samples: int = 100
    n_state_samples: int = 300
    grid_resolution: int = 100
    # opponent/own action draws per sampled state
    n_opponent_action_samples: int = 3
    # per-dimension resolution of the chopstick product grid; the full
    # one-dimensional resolution would cube the candidate count
    chopstick_resolution: int = 20

    def __post_init__(self):
        for name in (
            "n_obs_samples",
            "n_state_samples",
            "grid_resolution",
            "n_opponent_action_samples",
            "chopstick_resolution",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass
class PlayerEval:
    player: int
    utility: float
    best_response: float
    gap: float
    gap_se: float


@dataclass
class EvalReport:
    players: list[PlayerEval]
    nashconv: float
    n_obs_samples: int
    n_state_samples: int
    n_opponent_action_samples: int
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "nashconv": self.nashconv,
            "players": [
                {
                    "player": p.player,
                    "utility": p.utility,
                    "best_response": p.best_response,
                    "gap": p.gap,
                    "gap_se": p.gap_se,
                }
                for p in self.players
            ],
            "n_obs_samples": self.n_obs_samples,
            "n_state_samples": self.n_state_samples,
            "n_opponent_action_samples": self.n_opponent_action_samples,
            "seed": self.seed,
        }


# -- action grids -----------------------------------------------------------


@lru_cache(maxsize=None)
def _compositions_cached(total: int, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([[total]])
    rows = []
    for head in range(total + 1):
        tail = _compositions_cached(total - head, parts - 1)
        rows.append(np.concatenate([np.full((tail.shape[0], 1), head), tail], axis=1))
    return np.concatenate(rows, axis=0)


def _compositions(total: int, parts: int) -> np.ndarray:
    """All orderings of `total` into `parts` nonnegative integers."""
    return _compositions_cached(total, parts).copy()


def action_grid(
    game: Game, player: int, resolution: int, observation: np.ndarray | None = None
) -> np.ndarray:
    """Candidate best-response actions, shape (n_candidates, action_dim).

    Auctions and the visibility game use `resolution` equally spaced bids
    from 0 to the game's upper bound.  The chopstick auction combines
    per-item grids of `resolution` points on [0, 1].  Blotto enumerates
    the compositions of the integer 20 into J parts, renormalized to the
    evaluated player's budget (231 candidates for 3 battlefields).
    """
    if isinstance(game, AuctionGame):
        return np.linspace(0.0, game.bid_upper, resolution).reshape(-1, 1)
    if isinstance(game, VisibilityGame):
        return np.linspace(0.0, 1.0, resolution).reshape(-1, 1)
    if isinstance(game, ChopstickGame):
        axis = np.linspace(0.0, 1.0, resolution)
        pts = np.array(list(product(axis, repeat=3)))
        return pts
    if isinstance(game, BlottoGame):
        comp = _compositions(20, game.J).astype(float)
        budget = game.budget_of(player, observation)
        return comp * (budget / 20.0)
    raise TypeError(f"no action grid rule for game {game.kind!r}")


# -- expected utility ---------------------------------------------------------


def expected_utility(
    game: Game, strategies: list[Strategy], n_episodes: int, stream: RngStream
) -> np.ndarray:
    """Monte Carlo mean payoff per player over full episodes."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    states = game.sample_states(n_episodes, stream)
    actions = [
        strategies[j].sample_actions(game.observe(states, j), stream)
        for j in range(game.n_players)
    ]
    return game.payoffs(states, actions, stream).mean(axis=0)


# -- NashConv ---------------------------------------------------------------


def _grid_means_generic(
    game: Game,
    player: int,
    grid: np.ndarray,
    states: np.ndarray,
    actions: list[np.ndarray],
    tie_stream: RngStream,
) -> np.ndarray:
    """Mean payoff per grid action by tiled evaluation of the payoff rule."""
    n = states.shape[0]
    chunk = max(1, 200_000 // max(n, 1))
    out = np.empty(grid.shape[0])
    for start in range(0, grid.shape[0], chunk):
        block = grid[start : start + chunk]
        reps = block.shape[0]
        tiled_states = np.repeat(states, reps, axis=0) if states.shape[1] else np.zeros(
            (n * reps, 0)
        )
        tiled_actions = []
        for j in range(game.n_players):
            if j == player:
                tiled_actions.append(np.tile(block, (n, 1)))
            else:
                tiled_actions.append(np.repeat(actions[j], reps, axis=0))
        r = game.payoffs(tiled_states, tiled_actions, tie_stream)[:, player]
        out[start : start + reps] = r.reshape(n, reps).mean(axis=0)
    return out


def grid_payoff_means(
    game: Game,
    player: int,
    grid: np.ndarray,
    states: np.ndarray,
    actions: list[np.ndarray],
    tie_stream: RngStream,
) -> np.ndarray:
    """Mean payoff of each grid action against the sampled episodes.

    Uses the game's closed-form fast path when available, otherwise the
    generic tiled evaluation; the two agree on tie-free data (tests).
    """
    opp = [actions[j] for j in range(game.n_players) if j != player]
    fast = game.grid_payoff_means(player, grid, states, opp)
    if fast is not None:
        return fast
    return _grid_means_generic(game, player, grid, states, actions, tie_stream)


def _sample_profile_actions(
    game: Game,
    strategies: list[Strategy],
    player: int,
    own_obs: np.ndarray,
    states: np.ndarray,
    opp_stream: RngStream,
    own_stream: RngStream,
) -> list[np.ndarray]:
    """Per-player actions for the given episodes; player's own come from
    their observation (fixed by conditioning), opponents' from theirs."""
    actions = []
    for j in range(game.n_players):
        if j == player:
            actions.append(strategies[j].sample_actions(own_obs, own_stream))
        else:
            actions.append(strategies[j].sample_actions(game.observe(states, j), opp_stream))
    return actions


def estimate_nashconv(
    game: Game,
    strategies: list[Strategy],
    cfg: EvalConfig,
    stream: RngStream,
) -> EvalReport:
    """Estimate per-player utilities, best responses, gaps and NashConv.

    Deterministic given the stream (all draws run through fixed-order
    substreams; the stream object itself is not advanced).
    """
    n_obs = cfg.n_obs_samples
    n_state = cfg.n_state_samples
    m = cfg.n_opponent_action_samples
    rows = []
    for i in range(game.n_players):
        s = stream.substream(100 + i)
        s_obs, s_state, s_opp, s_own = (s.substream(k) for k in (1, 2, 3, 4))
        s_tie_own, s_tie_grid = s.substream(5), s.substream(6)
        obs_draws = game.observe(game.sample_states(n_obs, s_obs), i)
        reso = cfg.chopstick_resolution if isinstance(game, ChopstickGame) else cfg.grid_resolution
        if game.obs_constant(i):
            # conditioning on a constant tells nothing: pool every sample
            # and maximize once over the pooled means
            states = game.sample_states_given_obs(i, obs_draws[0], n_obs * n_state, s_state)
            states = np.repeat(states, m, axis=0)
            own_obs = np.repeat(obs_draws[:1], states.shape[0], axis=0)
            actions = _sample_profile_actions(game, strategies, i, own_obs, states, s_opp, s_own)
            r_own = game.payoffs(states, actions, s_tie_own)[:, i]
            u_i = float(r_own.mean())
            grid = action_grid(game, i, reso, obs_draws[0])
            means = grid_payoff_means(game, i, grid, states, actions, s_tie_grid)
            best = int(np.argmax(means))
            b_i = float(means[best])
            se_u = float(r_own.std(ddof=1) / np.sqrt(r_own.shape[0]))
            se = float(np.sqrt(2.0) * se_u)  # argmax point has comparable noise
        else:
            u_parts = np.empty(n_obs)
            b_parts = np.empty(n_obs)
            for t in range(n_obs):
                obs_t = obs_draws[t]
                states = game.sample_states_given_obs(i, obs_t, n_state, s_state)
                states = np.repeat(states, m, axis=0)
                own_obs = np.repeat(obs_t.reshape(1, -1), states.shape[0], axis=0)
                actions = _sample_profile_actions(
                    game, strategies, i, own_obs, states, s_opp, s_own
                )
                u_parts[t] = game.payoffs(states, actions, s_tie_own)[:, i].mean()
                grid = action_grid(game, i, reso, obs_t)
                means = grid_payoff_means(game, i, grid, states, actions, s_tie_grid)
                b_parts[t] = means.max()
            u_i = float(u_parts.mean())
            b_i = float(b_parts.mean())
            gaps = b_parts - u_parts
            se = float(gaps.std(ddof=1) / np.sqrt(n_obs)) if n_obs > 1 else 0.0
        rows.append(PlayerEval(i, u_i, b_i, b_i - u_i, se))
    return EvalReport(
        players=rows,
        nashconv=float(sum(p.gap for p in rows)),
        n_obs_samples=n_obs,
        n_state_samples=n_state,
        n_opponent_action_samples=m,
        seed=stream.seed,
    )


# -- exact Blotto best response (appendix program, by enumeration) -----------


def blotto_best_response_enum(
    h: np.ndarray, budget: float, values: np.ndarray
) -> tuple[np.ndarray, float]:
    """Exact optimum of the batched Blotto best-response program.

    h[j, k] is the highest opposing bid on battlefield j in batch k; the
    response maximizes sum_j v_j * (1/K) sum_k [a_j >= h_jk] subject to
    a >= 0, sum_j a_j = budget.  Some optimal allocation puts each a_j at
    a threshold from {0} union {h_j.} (lowering a_j to the next threshold
    preserves every win), so enumerating the (K+1)^J threshold choices and
    dumping slack on battlefield 0 is exact.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2:
        raise ValueError("h must have shape (battlefields, batches)")
    if budget < 0:
        raise ValueError("infeasible: negative budget")
    J, K = h.shape
    values = np.asarray(values, dtype=float)
    h_sorted = np.sort(h, axis=1)
    # candidate threshold m on battlefield j costs cand[j, m] and wins wins[j, m]
    cand = np.concatenate([np.zeros((J, 1)), h_sorted], axis=1)
    wins = np.empty((J, K + 1))
    for j in range(J):
        wins[j] = np.searchsorted(h_sorted[j], cand[j], side="right")
    best_value = -np.inf
    best_alloc = None
    for combo in product(range(K + 1), repeat=J):
        idx = np.arange(J), np.array(combo)
        cost = cand[idx].sum()
        if cost > budget + 1e-12:
            continue
        value = (values * wins[idx]).sum() / K
        if value > best_value:
            best_value = value
            alloc = cand[idx].copy()
            alloc[0] += budget - cost
            best_alloc = alloc
    return best_alloc, float(best_value)
