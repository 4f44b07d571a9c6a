"""Benchmark games: Colonel Blotto, single-item auctions, chopstick, visibility."""

from .auctions import VALUE_STRUCTURES, AuctionGame, PaymentRule
from .base import Game, pick_argmax_uniform
from .blotto import BlottoGame
from .simple import ChopstickGame, VisibilityGame

__all__ = [
    "Game",
    "AuctionGame",
    "PaymentRule",
    "BlottoGame",
    "ChopstickGame",
    "VisibilityGame",
    "VALUE_STRUCTURES",
    "pick_argmax_uniform",
]
