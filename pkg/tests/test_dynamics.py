import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbeq.dynamics import (
    DynamicsConfig,
    OptimizerState,
    apply_dynamics,
    extragradient_step,
    optimistic_step,
    simultaneous_step,
)
from bbeq.prng import seed_stream


def bilinear_grads(profile):
    """u1 = x*y = -u2: each player ascends its own utility."""
    x, y = profile
    return [y.copy(), -x.copy()]


def test_zero_gradient_is_fixed_point():
    prof = [np.array([1.0, 2.0]), np.array([3.0])]
    out = simultaneous_step(prof, [np.zeros(2), np.zeros(1)], 0.1)
    assert all(np.array_equal(a, b) for a, b in zip(out, prof))


def test_bilinear_simultaneous_spirals_outward():
    # closed-form map (x, y) <- (x + a y, y - a x) scales the norm by
    # sqrt(1 + a^2) every step
    prof = [np.array([1.0]), np.array([0.0])]
    alpha = 0.1
    out = simultaneous_step(prof, bilinear_grads(prof), alpha)
    assert np.allclose([out[0][0], out[1][0]], [1.0, -0.1])
    norms = []
    for _ in range(50):
        prof = simultaneous_step(prof, bilinear_grads(prof), alpha)
        norms.append(np.hypot(prof[0][0], prof[1][0]))
    ratios = np.diff(np.log(norms))
    assert np.allclose(np.exp(ratios), np.sqrt(1 + alpha**2))


def test_single_player_quadratic_converges():
    prof = [np.array([3.0, -2.0])]
    for _ in range(2000):
        prof = simultaneous_step(prof, [-2.0 * prof[0]], 0.01)
    assert np.linalg.norm(prof[0]) < 1e-6


def test_extragradient_beta_zero_equals_simultaneous():
    prof = [np.array([1.0]), np.array([0.5])]
    a = extragradient_step(prof, bilinear_grads, 0.07, 0.0)
    b = simultaneous_step(prof, bilinear_grads(prof), 0.07)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_extragradient_contracts_on_bilinear():
    prof = [np.array([1.0]), np.array([0.0])]
    norms = [1.0]
    for _ in range(100):
        prof = extragradient_step(prof, bilinear_grads, 0.1, 0.1)
        norms.append(np.hypot(prof[0][0], prof[1][0]))
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_extragradient_zero_everywhere_fixed():
    prof = [np.array([2.0]), np.array([-1.0])]
    zero = lambda p: [np.zeros(1), np.zeros(1)]
    out = extragradient_step(prof, zero, 0.1, 0.1)
    assert all(np.array_equal(a, b) for a, b in zip(out, prof))


def test_optimistic_beta_zero_equals_simultaneous():
    prof = [np.array([1.0]), np.array([0.5])]
    g = bilinear_grads(prof)
    a = optimistic_step(prof, g, [x * 5 for x in g], 0.07, 0.0)
    b = simultaneous_step(prof, g, 0.07)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_optimistic_equal_grads_reduces_to_simultaneous():
    prof = [np.array([1.0]), np.array([0.5])]
    g = bilinear_grads(prof)
    a = optimistic_step(prof, g, g, 0.07, 3.0)
    b = simultaneous_step(prof, g, 0.07)
    assert all(np.allclose(x, y) for x, y in zip(a, b))


def test_optimistic_bounded_on_bilinear():
    cfg = DynamicsConfig(kind="optimistic", alpha=0.1, beta=0.1)
    state = OptimizerState(cfg)
    prof = [np.array([1.0]), np.array([0.0])]
    sup = 0.0
    for _ in range(10_000):
        prof = apply_dynamics(state, prof, bilinear_grads)
        sup = max(sup, np.hypot(prof[0][0], prof[1][0]))
    assert sup < 5.0
    # and simultaneous diverges over the same horizon
    prof2 = [np.array([1.0]), np.array([0.0])]
    for _ in range(10_000):
        prof2 = simultaneous_step(prof2, bilinear_grads(prof2), 0.1)
    assert np.hypot(prof2[0][0], prof2[1][0]) > 100.0


def test_norm_ordering_on_bilinear():
    start = [np.array([1.0]), np.array([0.0])]
    sim = simultaneous_step(start, bilinear_grads(start), 0.05)
    extra = extragradient_step(start, bilinear_grads, 0.05, 0.05)
    n0 = 1.0
    assert np.hypot(sim[0][0], sim[1][0]) > n0
    assert np.hypot(extra[0][0], extra[1][0]) < n0


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_per_player_updates_independent(seed):
    s = seed_stream(seed)
    prof = [s.standard_normal(4), s.standard_normal(3)]
    g1 = [s.standard_normal(4), s.standard_normal(3)]
    g2 = [g1[0], s.standard_normal(3)]  # change only player 1's gradient
    out1 = simultaneous_step(prof, g1, 0.2)
    out2 = simultaneous_step(prof, g2, 0.2)
    assert np.array_equal(out1[0], out2[0])


def test_config_beta_defaults():
    assert DynamicsConfig(kind="simultaneous", alpha=0.1).beta == 0.0
    assert DynamicsConfig(kind="extragradient", alpha=0.1).beta == 0.1
    assert DynamicsConfig(kind="optimistic", alpha=0.2).beta == 0.2
    with pytest.raises(ValueError):
        DynamicsConfig(kind="nesterov", alpha=0.1)
    with pytest.raises(ValueError):
        DynamicsConfig(alpha=0.0)
