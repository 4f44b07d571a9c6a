"""Known equilibrium strategies of the benchmark games.

These serve as oracles: plugged into the NashConv evaluator each profile
should show a gap of (sampling noise around) zero, and trained strategies
are compared against their action distributions.

Bid formulas, with o the player's observation and n the player count:

  all-pay, independent private values     (n-1)/n * o^n
  kth-price winner-pay, private values    (n-1)/(n+1-k) * o
  3-player 2nd-price, common values       2o / (1 + o)
  2-player affiliated values              (2/3) o   (1st price),  o  (2nd price)
  complete-information all-pay            uniform on [0, v]
  asymmetric information, 1st price       o/2 for the informed player,
                                          uniform on [0, 1/2] for the other
  visibility game                         density 1/(1-x) on [0, 1 - 1/e]
  chopstick auction                       uniform on the surface of the
                                          tetrahedron with vertices
                                          (.5,.5,0), (.5,0,.5), (0,.5,.5), (0,0,0)
  symmetric Colonel Blotto                hemisphere construction (below)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import AuctionGame, BlottoGame, ChopstickGame, Game, PaymentRule, VisibilityGame
from .prng import RngStream

# -- bid formulas (deterministic in the observation) ----------------------


def allpay_ipv_bid(n: int, o):
    return (n - 1) / n * np.asarray(o, dtype=float) ** n


def kth_price_ipv_bid(n: int, k: int, o):
    if k > n:
        raise ValueError("price rank k must not exceed the player count")
    return (n - 1) / (n + 1 - k) * np.asarray(o, dtype=float)


def common_values_3p_2nd_bid(o):
    """Reference bid schedule o / (2 + o/2) for the 3-player 2nd-price
    common-values auction.

    Kept for comparison; it is the known solution of a mineral-rights
    variant whose signals are scaled differently than this package's
    (signal = t * v with t, v independent uniforms).  Under this
    package's signal model it is exploitable; the self-consistent
    equilibrium is :func:`common_values_3p_2nd_equilibrium_bid`.
    """
    o = np.asarray(o, dtype=float)
    return o / (2.0 + 0.5 * o)


def common_values_3p_2nd_equilibrium_bid(o):
    """Equilibrium bid 2o / (1 + o) for signal = t * v, t, v ~ U[0, 1].

    Standard second-price logic: bid the expected item value conditional
    on one's own signal tying the best opposing signal,
    E[v | x_own = o, max x_others = o], which for this signal model
    evaluates to 2o / (1 + o).  Self-consistency is verified numerically
    in the test suite via a brute-force best response.
    """
    o = np.asarray(o, dtype=float)
    return 2.0 * o / (1.0 + o)


def affiliated_2p_bid(k: int, o):
    if k not in (1, 2):
        raise ValueError("affiliated solution known for price ranks 1 and 2 only")
    o = np.asarray(o, dtype=float)
    return (2.0 / 3.0) * o if k == 1 else o.copy()


# -- randomized samplers ----------------------------------------------------


def complete_allpay_bid(v, stream: RngStream):
    """Uniform draw on [0, v]; v is the commonly observed value."""
    v = np.asarray(v, dtype=float)
    return v * stream.uniforms(v.shape)


def asymmetric_bid(player: int, o, stream: RngStream):
    """Informed player bids o/2; the other draws uniformly from [0, 1/2]."""
    o = np.asarray(o, dtype=float)
    if player == 0:
        return 0.5 * o
    return 0.5 * stream.uniforms(o.shape)


def visibility_point(n: int, stream: RngStream) -> np.ndarray:
    """Inverse-CDF sample of the density 1/(1-x) on [0, 1 - 1/e]."""
    return 1.0 - np.exp(-stream.uniforms(n))


_TETRA = np.array(
    [[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5], [0.0, 0.0, 0.0]]
)
_FACES = np.array([[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])


def chopstick_point(n: int, stream: RngStream) -> np.ndarray:
    """Uniform points on the tetrahedron surface.

    The four faces are congruent equilateral triangles, so a face is
    picked uniformly and a uniform barycentric point drawn inside it.
    """
    face = np.floor(stream.uniforms(n) * 4).astype(np.int64)
    face = np.minimum(face, 3)
    s = stream.uniforms(n)
    t = stream.uniforms(n)
    flip = s + t > 1.0
    s = np.where(flip, 1.0 - s, s)
    t = np.where(flip, 1.0 - t, t)
    a, b, c = (_TETRA[_FACES[face, i]] for i in range(3))
    return a + s[:, None] * (b - a) + t[:, None] * (c - a)


# equilateral budget triangle used by the hemisphere construction: the
# 3-simplex corners embedded in the plane, side sqrt(2) for unit budget.
_TRI = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
_E1 = (_TRI[1] - _TRI[0]) / np.linalg.norm(_TRI[1] - _TRI[0])
_E2_raw = _TRI[2] - _TRI[0] - np.dot(_TRI[2] - _TRI[0], _E1) * _E1
_E2 = _E2_raw / np.linalg.norm(_E2_raw)
_V2D = np.stack([np.dot(_TRI - _TRI[0], _E1), np.dot(_TRI - _TRI[0], _E2)], axis=1)
_CENTER2D = _V2D.mean(axis=0)
_INRADIUS = np.linalg.norm(_V2D[1] - _V2D[0]) / (2.0 * np.sqrt(3.0))


def _barycentric(p2d: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of 2-d points wrt the embedded triangle."""
    a, b, c = _V2D
    m = np.array([[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]])
    lam12 = np.linalg.solve(m, (p2d - a).T).T
    lam0 = 1.0 - lam12.sum(axis=1)
    return np.concatenate([lam0[:, None], lam12], axis=1)


def blotto_hemisphere_point(budget: float, n: int, stream: RngStream) -> np.ndarray:
    """Gross-Wagner equilibrium sampler for symmetric 3-battlefield Blotto.

    A point is drawn uniformly on the hemisphere erected over the incircle
    of the equilateral budget triangle (a normalized 3-d Gaussian folded to
    the upper half), projected vertically into the triangle's plane, and
    the budget is split in proportion to the three triangular areas the
    projected point subtends with the sides; for an equilateral triangle
    those proportions are exactly the barycentric coordinates.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    g = stream.standard_normal((n, 3))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    p2d = _CENTER2D + _INRADIUS * g[:, :2]  # |z| fold leaves (x, y) untouched
    lam = _barycentric(p2d)
    return budget * lam


# -- strategy wrappers ------------------------------------------------------


@dataclass
class FormulaBid:
    """Deterministic bid b(o) given by one of the closed-form solutions."""

    fn: object

    def sample_actions(self, obs: np.ndarray, stream: RngStream) -> np.ndarray:
        return np.asarray(self.fn(obs[:, 0]), dtype=float).reshape(-1, 1)


@dataclass
class CompleteAllPayMixed:
    def sample_actions(self, obs: np.ndarray, stream: RngStream) -> np.ndarray:
        return complete_allpay_bid(obs[:, 0], stream).reshape(-1, 1)


@dataclass
class AsymmetricBid:
    player: int

    def sample_actions(self, obs: np.ndarray, stream: RngStream) -> np.ndarray:
        return asymmetric_bid(self.player, obs[:, 0], stream).reshape(-1, 1)


@dataclass
class VisibilityMixed:
    def sample_actions(self, obs: np.ndarray, stream: RngStream) -> np.ndarray:
        return visibility_point(obs.shape[0], stream).reshape(-1, 1)


@dataclass
class ChopstickMixed:
    def sample_actions(self, obs: np.ndarray, stream: RngStream) -> np.ndarray:
        return chopstick_point(obs.shape[0], stream)


@dataclass
class BlottoHemisphere:
    budget: float = 1.0

    def sample_actions(self, obs: np.ndarray, stream: RngStream) -> np.ndarray:
        return blotto_hemisphere_point(self.budget, obs.shape[0], stream)


def analytic_profile(kind: str) -> tuple[Game, list]:
    """Game instance plus the per-player analytic equilibrium strategies."""
    if kind == "allpay_ipv_2":
        game = AuctionGame(2, "ipv", PaymentRule("all_pay"))
        return game, [FormulaBid(lambda o: allpay_ipv_bid(2, o))] * 2
    if kind == "allpay_ipv_3":
        game = AuctionGame(3, "ipv", PaymentRule("all_pay"))
        return game, [FormulaBid(lambda o: allpay_ipv_bid(3, o))] * 3
    if kind == "kth_ipv_2_1":
        game = AuctionGame(2, "ipv", PaymentRule("winner_pay", 1))
        return game, [FormulaBid(lambda o: kth_price_ipv_bid(2, 1, o))] * 2
    if kind == "kth_ipv_2_2":
        game = AuctionGame(2, "ipv", PaymentRule("winner_pay", 2))
        return game, [FormulaBid(lambda o: kth_price_ipv_bid(2, 2, o))] * 2
    if kind == "kth_ipv_3_2":
        game = AuctionGame(3, "ipv", PaymentRule("winner_pay", 2))
        return game, [FormulaBid(lambda o: kth_price_ipv_bid(3, 2, o))] * 3
    if kind == "common_3p_2nd":
        game = AuctionGame(3, "common", PaymentRule("winner_pay", 2))
        return game, [FormulaBid(common_values_3p_2nd_equilibrium_bid)] * 3
    if kind == "affiliated_2p_1st":
        game = AuctionGame(2, "affiliated", PaymentRule("winner_pay", 1))
        return game, [FormulaBid(lambda o: affiliated_2p_bid(1, o))] * 2
    if kind == "affiliated_2p_2nd":
        game = AuctionGame(2, "affiliated", PaymentRule("winner_pay", 2))
        return game, [FormulaBid(lambda o: affiliated_2p_bid(2, o))] * 2
    if kind == "complete_allpay":
        game = AuctionGame(2, "complete", PaymentRule("all_pay"))
        return game, [CompleteAllPayMixed(), CompleteAllPayMixed()]
    if kind == "asymmetric":
        game = AuctionGame(2, "asymmetric", PaymentRule("winner_pay", 1))
        return game, [AsymmetricBid(0), AsymmetricBid(1)]
    if kind == "visibility":
        return VisibilityGame(), [VisibilityMixed(), VisibilityMixed()]
    if kind == "chopstick":
        return ChopstickGame(), [ChopstickMixed(), ChopstickMixed()]
    if kind == "blotto":
        game = BlottoGame(2, 3, np.array([1.0, 1.0]), 1.0)
        return game, [BlottoHemisphere(1.0), BlottoHemisphere(1.0)]
    raise KeyError(f"unknown analytic profile {kind!r}")


ANALYTIC_KINDS = (
    "allpay_ipv_2",
    "allpay_ipv_3",
    "kth_ipv_2_1",
    "kth_ipv_2_2",
    "kth_ipv_3_2",
    "common_3p_2nd",
    "affiliated_2p_1st",
    "affiliated_2p_2nd",
    "complete_allpay",
    "asymmetric",
    "visibility",
    "chopstick",
    "blotto",
)
