"""Approximate Nash equilibria of continuous-action games from payoffs alone.

Randomized policy networks (observation + latent noise in, action out)
are trained with smoothed zeroth-order pseudogradients under
equilibrium-finding dynamics, and evaluated with a sampled NashConv
metric against analytically known equilibria.
"""

from .prng import RngStream, seed_stream

__version__ = "0.1.0"

__all__ = ["RngStream", "seed_stream", "__version__"]
