import numpy as np
import pytest

from bbeq.config import GameConfig, PolicyConfig, build_architectures, build_game
from bbeq.distributed import (
    EPISODE_TAG,
    INIT_TAG,
    DeltaMessage,
    LostWorker,
    Snapshot,
    TrainingRun,
    WorkerAssignment,
    aggregate,
    assign,
    run_distributed,
    run_reference,
    sync_worker,
    worker_delta,
)
from bbeq.dynamics import DynamicsConfig
from bbeq.estimator import EstimatorConfig, smoothed_pseudogradient
from bbeq.games import AuctionGame, PaymentRule
from bbeq.policy import FastPolicy, PolicyArchitecture, OutputHead, he_init, param_count
from bbeq.prng import seed_stream

EST = EstimatorConfig()
DYN = DynamicsConfig(alpha=1e-4)


def _setup(kind="allpay", noise_dim=2, seed=123):
    if kind == "allpay":
        gc = GameConfig(kind="auction", value_structure="complete", payment_rule="all_pay")
    else:
        gc = GameConfig(kind=kind)
    game = build_game(gc)
    archs = build_architectures(game, PolicyConfig(noise_dim=noise_dim))
    base = seed_stream(seed)
    profile = [he_init(archs[i], base.substream(INIT_TAG, i)) for i in range(game.n_players)]
    return game, archs, profile


# -- assignment ---------------------------------------------------------------


def test_round_robin_iteration_zero():
    asgs = assign(0, [0, 1, 2, 3], 2, 0.01)
    assert [a.player for a in asgs] == [0, 1, 0, 1]


def test_round_robin_rotates():
    asgs = assign(1, [0, 1, 2, 3], 2, 0.01)
    assert [a.player for a in asgs] == [1, 0, 1, 0]


def test_single_worker_cycles_players():
    players = [assign(t, [0], 3, 0.01)[0].player for t in (0, 1, 2)]
    assert players == [0, 1, 2]


def test_assign_requires_workers():
    with pytest.raises(ValueError):
        assign(0, [], 2, 0.01)


# -- worker deltas ------------------------------------------------------------


class _LinearGame:
    """One player, 'payoff' = g . params exposed through a 1-d action."""

    kind = "linear"
    n_players = 1
    state_dim = 0

    def __init__(self, arch, gvec):
        self.arch = arch
        self.gvec = gvec

    def obs_dim(self, player):
        return 0

    def action_dim(self, player):
        return 1

    def head(self, player):
        return self.arch.head

    def obs_constant(self, player):
        return True

    def sample_states(self, n, stream):
        return np.zeros((n, 0))

    def observe(self, states, player):
        return np.zeros((states.shape[0], 0))

    def sample_states_given_obs(self, player, obs, n, stream):
        return np.zeros((n, 0))

    def n_tie_uniforms(self, n):
        return (n,)

    def payoffs_given_ties(self, states, actions, tie_u):
        return actions[0]

    def grid_payoff_means(self, *args):
        return None


def test_worker_delta_zero_for_flat_utility():
    game, archs, profile = _setup()
    asg = assign(0, [0], 2, 0.01)[0]
    asg.z = np.zeros(param_count(archs[0]))
    msg = worker_delta(
        game, [FastPolicy(a) for a in archs], profile, asg,
        seed_stream(1).substream(EPISODE_TAG, 0), EST,
    )
    assert msg.delta == 0.0


def test_worker_delta_linear_utility_exact():
    # single affine 0-input network: action = bias, so utility = params[0];
    # the central difference of a linear map recovers g . z exactly
    arch = PolicyArchitecture(0, 0, 1, OutputHead("identity"), hidden_layers=())
    game = _LinearGame(arch, None)
    profile = [np.array([0.3])]
    z = np.array([1.7])
    for eps in (0.01, 0.02):
        asg = WorkerAssignment(0, 0, eps, z)
        msg = worker_delta(
            game, [FastPolicy(arch)], profile, asg,
            seed_stream(2).substream(EPISODE_TAG, 0), EST,
        )
        assert msg.delta == pytest.approx(1.7, abs=1e-9)  # epsilon cancels


def test_worker_delta_matches_estimator_module():
    """The distributed delta times z equals the estimator's central sample."""
    arch = PolicyArchitecture(0, 0, 1, OutputHead("identity"), hidden_layers=())
    game = _LinearGame(arch, None)
    profile = [np.array([0.25])]
    s = seed_stream(5)
    z = s.standard_normal(1)
    asg = WorkerAssignment(0, 0, EST.sigma, z.copy())
    msg = worker_delta(
        game, [FastPolicy(arch)], profile, asg, s.substream(1), EST
    )
    grad_direct = msg.delta * z
    f = lambda x, stream: float(x[0])
    # same perturbation direction via a stream that replays z
    class Replay:
        def __init__(self, z):
            self.z = z

        def standard_normal(self, n):
            return self.z.copy()

        def save(self):
            return None

        def restore(self, snap):
            pass

    grad_est = smoothed_pseudogradient(f, profile[0], EST, Replay(z))
    assert np.allclose(grad_direct, grad_est, atol=1e-12)


# -- aggregation --------------------------------------------------------------


def test_aggregate_singleton_mean():
    z = np.array([1.0, -2.0])
    asgs = [WorkerAssignment(0, 0, 0.01, z)]
    grads = aggregate({0: 0.5}, asgs, 2, [2, 2])
    assert np.allclose(grads[0], 0.5 * z)
    assert np.all(grads[1] == 0.0)


def test_aggregate_mean_of_equal_terms():
    z = np.array([1.0, -2.0])
    asgs = [WorkerAssignment(0, 0, 0.01, z), WorkerAssignment(1, 0, 0.01, z)]
    grads = aggregate({0: 0.5, 1: 0.5}, asgs, 1, [2])
    assert np.allclose(grads[0], 0.5 * z)


def test_aggregate_missing_delta_raises():
    asgs = [WorkerAssignment(0, 0, 0.01, np.ones(2))]
    with pytest.raises(LostWorker):
        aggregate({}, asgs, 1, [2])


# -- distributed equals sequential ----------------------------------------------


@pytest.mark.parametrize("kind", ["allpay", "blotto", "visibility"])
@pytest.mark.parametrize("n_workers", [1, 4, 7])
def test_pool_bit_identical_to_reference(kind, n_workers):
    game, archs, profile = _setup(kind)
    ref = run_reference(game, archs, profile, 25, EST, DYN, 123, n_virtual=n_workers)
    sim, stats = run_distributed(game, archs, profile, n_workers, 25, EST, DYN, 123)
    assert all(np.array_equal(a, b) for a, b in zip(ref, sim))
    assert stats.delta_messages == 25 * n_workers
    assert stats.broadcasts == 25


def test_worker_virtualization():
    game, archs, profile = _setup()
    a, _ = run_distributed(game, archs, profile, 5, 20, EST, DYN, 9)
    b, _ = run_distributed(game, archs, profile, 2, 20, EST, DYN, 9, n_virtual=5)
    c, _ = run_distributed(game, archs, profile, 1, 20, EST, DYN, 9, n_virtual=5)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert all(np.array_equal(x, y) for x, y in zip(a, c))


def test_same_seed_repeats_bit_identical():
    game, archs, profile = _setup()
    a, _ = run_distributed(game, archs, profile, 3, 15, EST, DYN, 77)
    b, _ = run_distributed(game, archs, profile, 3, 15, EST, DYN, 77)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_training_moves_parameters():
    game, archs, profile = _setup()
    out = run_reference(game, archs, profile, 10, EST, DYN, 5, n_virtual=2)
    assert any(not np.array_equal(a, b) for a, b in zip(out, profile))


@pytest.mark.parametrize("dyn_kind", ["extragradient", "optimistic"])
def test_pool_matches_reference_other_dynamics(dyn_kind):
    game, archs, profile = _setup()
    dyn = DynamicsConfig(kind=dyn_kind, alpha=1e-4, beta=1e-4)
    ref = run_reference(game, archs, profile, 12, EST, dyn, 3, n_virtual=3)
    sim, stats = run_distributed(game, archs, profile, 3, 12, EST, dyn, 3)
    assert all(np.array_equal(a, b) for a, b in zip(ref, sim))
    rounds = 2 if dyn_kind == "extragradient" else 1
    assert stats.delta_messages == 12 * 3 * rounds


def test_no_crn_variant_still_equivalent():
    game, archs, profile = _setup()
    est = EstimatorConfig(common_random_numbers=False)
    ref = run_reference(game, archs, profile, 10, est, DYN, 4, n_virtual=2)
    sim, _ = run_distributed(game, archs, profile, 2, 10, est, DYN, 4)
    assert all(np.array_equal(a, b) for a, b in zip(ref, sim))


# -- snapshots, joins, failures ----------------------------------------------------


def test_snapshot_resume_bit_identical():
    game, archs, profile = _setup()
    run = TrainingRun(game, archs, profile, EST, DYN, 42, n_virtual=2)
    run.step(10)
    snap = sync_worker(run)
    run.step(10)
    final_a = [x.copy() for x in run.profile]

    run2 = TrainingRun(game, archs, profile, EST, DYN, 42, n_virtual=2)
    run2.restore(snap)
    run2.step(10)
    assert all(np.array_equal(a, b) for a, b in zip(final_a, run2.profile))


def test_snapshot_serialization_roundtrip():
    game, archs, profile = _setup()
    run = TrainingRun(game, archs, profile, EST, DYN, 42, n_virtual=3)
    run.step(7)
    snap = run.snapshot()
    again = Snapshot.from_bytes(snap.to_bytes())
    assert snap.equals(again)


def test_join_equals_idle_from_start():
    """A worker joining at t0 via snapshot matches one idle until t0."""
    game, archs, profile = _setup()
    t0 = 8
    # roster grows by one slot at t0 in both runs
    schedule = lambda t: [0, 1] if t < t0 else [0, 1, 2]
    ref = run_reference(
        game, archs, profile, 16, EST, DYN, 55, n_virtual=3, roster_schedule=schedule
    )
    joined, stats = run_distributed(
        game, archs, profile, 2, 16, EST, DYN, 55, joins={t0: 1}
    )
    assert all(np.array_equal(a, b) for a, b in zip(ref, joined))


def test_lost_delta_aborts_and_retries():
    game, archs, profile = _setup()
    failures = {5: {1}}
    ref = run_reference(
        game, archs, profile, 12, EST, DYN, 66, n_virtual=3, failures=failures
    )
    sim, stats = run_distributed(
        game, archs, profile, 3, 12, EST, DYN, 66, failures=failures
    )
    assert all(np.array_equal(a, b) for a, b in zip(ref, sim))
    assert stats.aborted_rounds == 1
    assert stats.rounds == 13  # 12 applied + 1 aborted
    # and the failed run differs from an undisturbed one
    clean = run_reference(game, archs, profile, 12, EST, DYN, 66, n_virtual=3)
    assert any(not np.array_equal(a, b) for a, b in zip(ref, clean))


def test_all_workers_lost_raises():
    game, archs, profile = _setup()
    with pytest.raises(LostWorker):
        run_distributed(
            game, archs, profile, 1, 5, EST, DYN, 7, failures={2: {0}}
        )
