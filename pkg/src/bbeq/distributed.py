"""Distributed multiagent pseudogradient ascent, simulated in-process.

Every worker holds a synchronized copy of the shared PRNG stream, the
strategy profile, and the optimizer state.  Each iteration the roster of
available workers is assigned players round-robin; every worker
regenerates every roster member's Gaussian perturbation from the shared
stream, so the only cross-worker traffic is one scalar finite difference
per roster slot plus the coordinator's broadcast of the collected vector.

Physical workers are logical tasks here (executed deterministically, one
at a time) that communicate only through explicit message objects; the
aggregation step is a barrier, and everything after it is a deterministic
function of the broadcast vector.  A physical pool of any size simulating
a fixed roster schedule is bit-identical to the straight-line reference
loop (worker virtualization).

A worker joining mid-run is brought up to speed with a snapshot of the
shared stream state, profile parameters, and optimizer state; from its
first active iteration on, the run is bit-identical to one where it had
been present (idle) all along.  A worker whose scalar goes missing causes
the round to abort; the round is retried with the worker removed.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import DynamicsConfig, OptimizerState, optimistic_step, simultaneous_step
from .estimator import EstimatorConfig
from .games import Game
from .policy import FastPolicy, PolicyArchitecture, param_count
from .prng import RngStream, seed_stream

# substream tags under the master seed
INIT_TAG = 1
ZDRAW_TAG = 2
EPISODE_TAG = 3
EVAL_TAG = 4
DUMP_TAG = 5


@dataclass
class WorkerAssignment:
    worker_id: int
    player: int
    scale: float
    z: np.ndarray | None = None


@dataclass
class DeltaMessage:
    worker_id: int
    delta: float


class LostWorker(Exception):
    """A roster member's scalar never arrived; the round must be retried."""

    def __init__(self, worker_ids):
        super().__init__(f"missing deltas from workers {sorted(worker_ids)}")
        self.worker_ids = set(worker_ids)


def assign(
    iteration: int, worker_ids: list[int], n_players: int, scale: float
) -> list[WorkerAssignment]:
    """Deterministic round-robin assignment: player = (rank + t) mod players.

    The scale is a hook for dynamic per-worker perturbation sizes; the
    default schedule keeps it at the estimator's sigma.
    """
    if not worker_ids:
        raise ValueError("need at least one worker")
    return [
        WorkerAssignment(worker_id=w, player=(rank + iteration) % n_players, scale=scale)
        for rank, w in enumerate(worker_ids)
    ]


# -- utility evaluation -------------------------------------------------------


@dataclass
class Episode:
    states: np.ndarray
    obs: list[np.ndarray]
    noises: list[np.ndarray]
    tie_u: np.ndarray


def draw_episode(
    game: Game, policies: list[FastPolicy], n: int, stream: RngStream
) -> Episode:
    """All randomness of a batch of episodes, drawn in a fixed order."""
    states = game.sample_states(n, stream)
    obs = [game.observe(states, j) for j in range(game.n_players)]
    noises = [
        stream.standard_normal((n, policies[j].arch.noise_dim))
        for j in range(game.n_players)
    ]
    tie_u = stream.uniforms(game.n_tie_uniforms(n))
    return Episode(states, obs, noises, tie_u)


def episode_utility(
    game: Game,
    policies: list[FastPolicy],
    params: list[np.ndarray],
    ep: Episode,
    player: int,
) -> float:
    actions = [
        policies[j](params[j], ep.obs[j], ep.noises[j]) for j in range(game.n_players)
    ]
    return float(game.payoffs_given_ties(ep.states, actions, ep.tie_u)[:, player].mean())


def worker_delta(
    game: Game,
    policies: list[FastPolicy],
    profile: list[np.ndarray],
    asg: WorkerAssignment,
    ep_stream: RngStream,
    est_cfg: EstimatorConfig,
) -> DeltaMessage:
    """Central finite difference of the assigned player's utility.

    Two utility evaluations over episodes from the worker's own stream;
    with common random numbers both evaluations share one episode batch,
    so opponents' actions are computed once.  The two evaluations are
    stacked into a single payoff call (rows are independent).
    """
    i = asg.player
    eps, z = asg.scale, asg.z
    n = est_cfg.episodes_per_eval
    ep = draw_episode(game, policies, n, ep_stream)
    ez = eps * z
    x_plus = profile[i] + ez
    x_minus = profile[i] - ez
    ep2 = ep if est_cfg.common_random_numbers else draw_episode(game, policies, n, ep_stream)
    states2 = np.concatenate([ep.states, ep2.states])
    tie2 = np.concatenate([ep.tie_u, ep2.tie_u])
    actions2 = []
    for j in range(game.n_players):
        if j == i:
            if ep2 is ep:
                actions2.append(policies[i].pair(x_plus, x_minus, ep.obs[i], ep.noises[i]))
            else:
                a_p = policies[i](x_plus, ep.obs[i], ep.noises[i])
                a_m = policies[i](x_minus, ep2.obs[i], ep2.noises[i])
                actions2.append(np.concatenate([a_p, a_m]))
        elif ep2 is ep:
            a_j = policies[j](profile[j], ep.obs[j], ep.noises[j])
            actions2.append(np.concatenate([a_j, a_j]))
        else:
            a_j = policies[j](profile[j], ep.obs[j], ep.noises[j])
            b_j = policies[j](profile[j], ep2.obs[j], ep2.noises[j])
            actions2.append(np.concatenate([a_j, b_j]))
    r = game.payoffs_given_ties(states2, actions2, tie2)[:, i]
    if n == 1:
        delta = (r[0] - r[1]) / (2.0 * eps)
    else:
        rs = np.add.reduce(r)
        plus = np.add.reduce(r[:n])
        delta = (plus - (rs - plus)) / n / (2.0 * eps)
    return DeltaMessage(asg.worker_id, float(delta))


def aggregate(
    deltas: dict[int, float],
    assignments: list[WorkerAssignment],
    n_players: int,
    dims: list[int],
) -> list[np.ndarray]:
    """Per-player pseudogradient v_i = mean of delta_j z_j over its workers.

    Players with no assigned worker get a zero gradient.  A missing delta
    aborts the round (lost worker).
    """
    missing = {a.worker_id for a in assignments} - set(deltas)
    if missing:
        raise LostWorker(missing)
    grads: list = [None] * n_players
    counts = [0] * n_players
    for a in assignments:
        term = deltas[a.worker_id] * a.z
        if grads[a.player] is None:
            grads[a.player] = term
        else:
            grads[a.player] += term
        counts[a.player] += 1
    for i in range(n_players):
        if grads[i] is None:
            grads[i] = np.zeros(dims[i])
        elif counts[i] > 1:
            grads[i] /= counts[i]
    return grads


# -- snapshots ----------------------------------------------------------------


@dataclass
class Snapshot:
    """What a joining worker needs to reproduce all subsequent computation.

    ``ep_states`` carries the episode stream positions of already-active
    slots; a fresh slot starts its derived stream from the origin, so a
    joiner taking a new slot needs only the shared state.
    """

    iteration: int
    profile: list[np.ndarray]
    prev_grads: list[np.ndarray] | None
    step_count: int
    z_state: dict
    ep_states: dict[int, dict] = field(default_factory=dict)
    dead: list[int] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        arrays = {f"profile_{i}": x for i, x in enumerate(self.profile)}
        if self.prev_grads is not None:
            arrays |= {f"prev_{i}": g for i, g in enumerate(self.prev_grads)}
        meta = {
            "iteration": self.iteration,
            "step_count": self.step_count,
            "n_players": len(self.profile),
            "has_prev": self.prev_grads is not None,
            "z_state": self.z_state,
            "ep_states": {str(k): v for k, v in self.ep_states.items()},
            "dead": sorted(self.dead),
        }
        arrays["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
        np.savez(buf, **arrays)
        return buf.getvalue()

    @staticmethod
    def from_bytes(raw: bytes) -> "Snapshot":
        with np.load(io.BytesIO(raw)) as data:
            meta = json.loads(bytes(data["meta"]).decode())
            profile = [data[f"profile_{i}"].copy() for i in range(meta["n_players"])]
            prev = (
                [data[f"prev_{i}"].copy() for i in range(meta["n_players"])]
                if meta["has_prev"]
                else None
            )
        return Snapshot(
            iteration=meta["iteration"],
            profile=profile,
            prev_grads=prev,
            step_count=meta["step_count"],
            z_state=meta["z_state"],
            ep_states={int(k): v for k, v in meta["ep_states"].items()},
            dead=list(meta["dead"]),
        )

    def equals(self, other: "Snapshot") -> bool:
        if (self.iteration, self.step_count) != (other.iteration, other.step_count):
            return False
        if sorted(self.dead) != sorted(other.dead):
            return False
        if any(not np.array_equal(a, b) for a, b in zip(self.profile, other.profile)):
            return False
        if (self.prev_grads is None) != (other.prev_grads is None):
            return False
        if self.prev_grads is not None and any(
            not np.array_equal(a, b) for a, b in zip(self.prev_grads, other.prev_grads)
        ):
            return False
        return self.z_state == other.z_state and self.ep_states == other.ep_states


# -- shared per-round machinery ------------------------------------------------


def _draw_round_assignments(
    iteration: int,
    roster: list[int],
    n_players: int,
    dims: list[int],
    sigma: float,
    z_stream: RngStream,
) -> list[WorkerAssignment]:
    asgs = assign(iteration, roster, n_players, sigma)
    for a in asgs:
        a.z = z_stream.standard_normal(dims[a.player])
    return asgs


class _DynamicsMachine:
    """Per-iteration update state machine every worker replays identically."""

    def __init__(self, cfg: DynamicsConfig, opt: OptimizerState):
        self.cfg = cfg
        self.opt = opt

    def rounds(self) -> int:
        return 2 if self.cfg.kind == "extragradient" else 1

    def eval_profile(self, profile, round_idx, mid):
        return mid if round_idx == 1 else profile

    def feed(self, profile, round_idx, grads):
        """Absorb one round's gradients; returns (mid_profile, new_profile)."""
        cfg = self.cfg
        if cfg.kind == "extragradient":
            if round_idx == 0:
                return [x + cfg.beta * g for x, g in zip(profile, grads)], None
            return None, [x + cfg.alpha * g for x, g in zip(profile, grads)]
        if cfg.kind == "simultaneous":
            return None, simultaneous_step(profile, grads, cfg.alpha)
        prev = self.opt.prev_grads if self.opt.prev_grads is not None else grads
        new = optimistic_step(profile, grads, prev, cfg.alpha, cfg.beta)
        self.opt.prev_grads = [g.copy() for g in grads]
        return None, new


RosterSchedule = Callable[[int], list[int]]


# -- sequential reference -------------------------------------------------------


class TrainingRun:
    """Straight-line reference of the distributed loop; resumable.

    All state evolution is a pure function of (master seed, game, configs,
    roster schedule, failure schedule), which is what the simulated pool
    is checked against bit for bit.
    """

    def __init__(
        self,
        game: Game,
        archs: list[PolicyArchitecture],
        profile: list[np.ndarray],
        est_cfg: EstimatorConfig,
        dyn_cfg: DynamicsConfig,
        master_seed: int,
        n_virtual: int = 1,
        roster_schedule: RosterSchedule | None = None,
    ):
        self.game = game
        self.archs = archs
        self.policies = [FastPolicy(a) for a in archs]
        self.dims = [param_count(a) for a in archs]
        self.profile = [np.array(x, dtype=float) for x in profile]
        self.est_cfg = est_cfg
        self.dyn_cfg = dyn_cfg
        self.master_seed = master_seed
        base = seed_stream(master_seed)
        self.z_stream = base.substream(ZDRAW_TAG)
        self.ep_streams: dict[int, RngStream] = {}
        self.dead: set[int] = set()
        self.roster_schedule = roster_schedule or (lambda t: list(range(n_virtual)))
        self.opt = OptimizerState(dyn_cfg)
        self.iteration = 0

    def _ep_stream(self, worker_id: int) -> RngStream:
        if worker_id not in self.ep_streams:
            self.ep_streams[worker_id] = seed_stream(self.master_seed).substream(
                EPISODE_TAG, worker_id
            )
        return self.ep_streams[worker_id]

    def _roster(self) -> list[int]:
        return [w for w in self.roster_schedule(self.iteration) if w not in self.dead]

    def step(self, n_iterations: int, failures: dict[int, set[int]] | None = None) -> None:
        failures = failures or {}
        for _ in range(n_iterations):
            machine = _DynamicsMachine(self.dyn_cfg, self.opt)
            mid = None
            round_idx = 0
            while round_idx < machine.rounds():
                roster = self._roster()
                fail = failures.get(self.iteration, set()) if round_idx == 0 else set()
                fail = {w for w in fail if w in roster}
                asgs = _draw_round_assignments(
                    self.iteration, roster, self.game.n_players, self.dims,
                    self.est_cfg.sigma, self.z_stream,
                )
                eval_profile = machine.eval_profile(self.profile, round_idx, mid)
                deltas = {}
                for a in asgs:
                    if a.worker_id in fail:
                        continue  # crashed: its scalar never arrives
                    msg = worker_delta(
                        self.game, self.policies, eval_profile, a,
                        self._ep_stream(a.worker_id), self.est_cfg,
                    )
                    deltas[msg.worker_id] = msg.delta
                try:
                    grads = aggregate(deltas, asgs, self.game.n_players, self.dims)
                except LostWorker as lost:
                    self.dead |= lost.worker_ids
                    if not self._roster():
                        raise
                    continue  # retry the round with the shrunk roster
                mid, new = machine.feed(self.profile, round_idx, grads)
                round_idx += 1
            self.profile = new
            self.opt.step_count += 1
            self.iteration += 1

    def snapshot(self) -> Snapshot:
        return Snapshot(
            iteration=self.iteration,
            profile=[x.copy() for x in self.profile],
            prev_grads=None
            if self.opt.prev_grads is None
            else [g.copy() for g in self.opt.prev_grads],
            step_count=self.opt.step_count,
            z_state=self.z_stream.state,
            ep_states={v: s.state for v, s in self.ep_streams.items()},
            dead=sorted(self.dead),
        )

    def restore(self, snap: Snapshot) -> None:
        self.iteration = snap.iteration
        self.profile = [x.copy() for x in snap.profile]
        self.opt.prev_grads = (
            None if snap.prev_grads is None else [g.copy() for g in snap.prev_grads]
        )
        self.opt.step_count = snap.step_count
        self.z_stream.state = snap.z_state
        self.dead = set(snap.dead)
        for v, st in snap.ep_states.items():
            self._ep_stream(v).state = st


def sync_worker(run: TrainingRun) -> Snapshot:
    """Snapshot of PRNG state, profile, and optimizer state for a joiner."""
    return run.snapshot()


# -- simulated worker pool -------------------------------------------------------


@dataclass
class PoolStats:
    delta_messages: int = 0
    broadcasts: int = 0
    rounds: int = 0
    aborted_rounds: int = 0


class _PhysicalWorker:
    """One pool member with fully private state copies."""

    def __init__(self, game, archs, est_cfg, dyn_cfg, snap: Snapshot, owned, master_seed):
        self.game = game
        self.archs = archs
        self.policies = [FastPolicy(a) for a in archs]
        self.dims = [param_count(a) for a in archs]
        self.est_cfg = est_cfg
        self.dyn_cfg = dyn_cfg
        self.master_seed = master_seed
        base = seed_stream(master_seed)
        self.z_stream = base.substream(ZDRAW_TAG)
        self.z_stream.state = snap.z_state
        self.ep_streams = {v: base.substream(EPISODE_TAG, v) for v in owned}
        self.profile = [x.copy() for x in snap.profile]
        self.opt = OptimizerState(dyn_cfg)
        self.opt.prev_grads = (
            None if snap.prev_grads is None else [g.copy() for g in snap.prev_grads]
        )
        self.opt.step_count = snap.step_count
        self.owned = set(owned)
        self._machine = None
        self._mid = None
        self._round = 0
        self._asgs = None

    def begin_iteration(self):
        self._machine = _DynamicsMachine(self.dyn_cfg, self.opt)
        self._mid = None
        self._round = 0

    def rounds_done(self) -> bool:
        return self._round >= self._machine.rounds()

    def compute_round(self, iteration, roster, dead: set[int]) -> list[DeltaMessage]:
        """Regenerate all roster perturbations; send deltas for owned slots."""
        self._asgs = _draw_round_assignments(
            iteration, roster, self.game.n_players, self.dims, self.est_cfg.sigma,
            self.z_stream,
        )
        eval_profile = self._machine.eval_profile(self.profile, self._round, self._mid)
        out = []
        for a in self._asgs:
            if a.worker_id in self.owned and a.worker_id not in dead:
                out.append(
                    worker_delta(
                        self.game, self.policies, eval_profile, a,
                        self.ep_streams[a.worker_id], self.est_cfg,
                    )
                )
        return out

    def absorb_broadcast(self, deltas: dict[int, float]) -> None:
        grads = aggregate(deltas, self._asgs, self.game.n_players, self.dims)
        mid, new = self._machine.feed(self.profile, self._round, grads)
        if new is not None:
            self.profile = new
            self.opt.step_count += 1
        self._mid = mid
        self._round += 1


def run_distributed(
    game: Game,
    archs: list[PolicyArchitecture],
    profile: list[np.ndarray],
    n_workers: int,
    iterations: int,
    est_cfg: EstimatorConfig,
    dyn_cfg: DynamicsConfig,
    master_seed: int,
    n_virtual: int | None = None,
    failures: dict[int, set[int]] | None = None,
    joins: dict[int, int] | None = None,
) -> tuple[list[np.ndarray], PoolStats]:
    """Simulate the worker pool; returns the final profile and traffic stats.

    ``n_workers`` physical workers share ``n_virtual`` roster slots
    (default one each; the roster, not the physical pool size, defines the
    math).  ``failures`` maps an iteration to slots whose delta goes
    missing there.  ``joins`` maps an iteration to a count of physical
    workers joining at its start; each joiner is synced from the
    coordinator's serialized snapshot and brings one fresh roster slot.
    Worker 0 is the static coordinator.
    """
    if n_workers < 1:
        raise ValueError("need at least one worker")
    n_virtual = n_workers if n_virtual is None else n_virtual
    failures = failures or {}
    joins = joins or {}

    init = Snapshot(
        iteration=0,
        profile=[np.array(x, dtype=float) for x in profile],
        prev_grads=None,
        step_count=0,
        z_state=seed_stream(master_seed).substream(ZDRAW_TAG).state,
    )
    workers: list[_PhysicalWorker] = []
    for pid in range(n_workers):
        owned = [v for v in range(n_virtual) if v % n_workers == pid]
        snap = Snapshot.from_bytes(init.to_bytes())  # exercises the wire format
        workers.append(_PhysicalWorker(game, archs, est_cfg, dyn_cfg, snap, owned, master_seed))

    roster = list(range(n_virtual))
    next_slot = n_virtual
    stats = PoolStats()
    for t in range(iterations):
        for _ in range(joins.get(t, 0)):
            # the coordinator serializes its state for the joiner, which
            # takes responsibility for one fresh roster slot
            coord = workers[0]
            snap = Snapshot(
                iteration=t,
                profile=[x.copy() for x in coord.profile],
                prev_grads=None
                if coord.opt.prev_grads is None
                else [g.copy() for g in coord.opt.prev_grads],
                step_count=coord.opt.step_count,
                z_state=coord.z_stream.state,
            )
            snap = Snapshot.from_bytes(snap.to_bytes())
            workers.append(
                _PhysicalWorker(game, archs, est_cfg, dyn_cfg, snap, [next_slot], master_seed)
            )
            roster.append(next_slot)
            next_slot += 1

        for w in workers:
            w.begin_iteration()
        while not workers[0].rounds_done():
            dead = failures.get(t, set()) if workers[0]._round == 0 else set()
            dead = {v for v in dead if v in roster}
            inbox: dict[int, float] = {}
            for w in workers:
                for msg in w.compute_round(t, roster, dead):
                    inbox[msg.worker_id] = msg.delta
                    stats.delta_messages += 1
            stats.rounds += 1
            if dead:
                stats.aborted_rounds += 1
                roster = [v for v in roster if v not in dead]
                if not roster:
                    raise LostWorker(dead)
                continue  # no broadcast; every worker retries the round
            stats.broadcasts += 1
            for w in workers:
                w.absorb_broadcast(inbox)
        ref = [x.tobytes() for x in workers[0].profile]
        for w in workers[1:]:
            assert all(
                a == b.tobytes() for a, b in zip(ref, w.profile)
            ), "worker state diverged"
    return [x.copy() for x in workers[0].profile], stats


def run_reference(
    game: Game,
    archs: list[PolicyArchitecture],
    profile: list[np.ndarray],
    iterations: int,
    est_cfg: EstimatorConfig,
    dyn_cfg: DynamicsConfig,
    master_seed: int,
    n_virtual: int = 1,
    roster_schedule: RosterSchedule | None = None,
    failures: dict[int, set[int]] | None = None,
) -> list[np.ndarray]:
    """Straight-line run over the same schedule; the bit-equality baseline."""
    run = TrainingRun(
        game, archs, profile, est_cfg, dyn_cfg, master_seed,
        n_virtual=n_virtual, roster_schedule=roster_schedule,
    )
    run.step(iterations, failures=failures)
    return run.profile
