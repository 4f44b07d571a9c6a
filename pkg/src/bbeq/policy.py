"""Randomized policy networks.

A policy is a feedforward network mapping (observation, latent noise) to
an action.  Parameters live in one flat float64 vector so they can be
perturbed, exchanged as a unit, and checkpointed.  Layout convention
(fixed; perturbation vectors and checkpoints index into it): layers in
order, each layer contributing its weight block W of shape
(fan_in, fan_out) flattened in C order, followed by its bias block of
length fan_out.  Hidden activations are ELU (alpha = 1); the output
layer is affine followed by the configured head.

The latent distribution is a standard Gaussian of dimension
``noise_dim``; noise_dim = 0 gives a deterministic policy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numba
import numpy as np

from .prng import RngStream


@dataclass(frozen=True)
class OutputHead:
    """Maps the final affine layer's output into the game's action set.

    kind:
      * ``softmax_scaled``: nonnegative outputs summing to a budget; the
        budget is ``scale`` or, when ``scale_obs_index`` is set, read from
        that component of the observation.
      * ``absolute_value``: componentwise absolute value (bids >= 0).
      * ``identity``: raw affine output, optionally clamped to ``clip``.
    """

    kind: str
    scale: float | None = None
    scale_obs_index: int | None = None
    clip: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("softmax_scaled", "absolute_value", "identity"):
            raise ValueError(f"unknown head kind {self.kind!r}")
        if self.kind == "softmax_scaled":
            if (self.scale is None) == (self.scale_obs_index is None):
                raise ValueError("softmax_scaled needs exactly one of scale, scale_obs_index")


@dataclass(frozen=True)
class PolicyArchitecture:
    obs_dim: int
    noise_dim: int
    action_dim: int
    head: OutputHead
    hidden_layers: tuple[int, ...] = (10, 10)

    def __post_init__(self):
        if self.obs_dim < 0 or self.noise_dim < 0 or self.action_dim < 1:
            raise ValueError("bad architecture dimensions")


@lru_cache(maxsize=None)
def _layout(arch: PolicyArchitecture):
    """Per-layer (weight_slice, bias_slice, fan_in, fan_out) tuples."""
    dims = [arch.obs_dim + arch.noise_dim, *arch.hidden_layers, arch.action_dim]
    spans = []
    off = 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        w = slice(off, off + fan_in * fan_out)
        off += fan_in * fan_out
        b = slice(off, off + fan_out)
        off += fan_out
        spans.append((w, b, fan_in, fan_out))
    return spans, off


def param_count(arch: PolicyArchitecture) -> int:
    """Total number of parameters, biases included."""
    return _layout(arch)[1]


def he_init(arch: PolicyArchitecture, stream: RngStream) -> np.ndarray:
    """He initialization: zero biases, N(0, 2/fan_in) weights.

    Weights are drawn layer by layer in layout order, so equal streams
    give bit-identical parameter vectors.
    """
    spans, total = _layout(arch)
    params = np.zeros(total)
    for w, _b, fan_in, _fan_out in spans:
        if fan_in > 0:
            params[w] = stream.standard_normal(w.stop - w.start) * np.sqrt(2.0 / fan_in)
    return params


def _elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def _apply_head(head: OutputHead, y: np.ndarray, obs: np.ndarray) -> np.ndarray:
    if head.kind == "absolute_value":
        return np.abs(y)
    if head.kind == "identity":
        if head.clip is not None:
            return np.clip(y, head.clip[0], head.clip[1])
        return y
    # softmax_scaled
    z = y - y.max(axis=-1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=-1, keepdims=True)
    if head.scale_obs_index is not None:
        return p * obs[..., head.scale_obs_index, None]
    return p * head.scale


def forward(
    arch: PolicyArchitecture,
    params: np.ndarray,
    observation: np.ndarray,
    noise: np.ndarray,
) -> np.ndarray:
    """Evaluate the network on a batch.

    observation: (B, obs_dim), noise: (B, noise_dim); returns
    (B, action_dim).  1-d inputs are treated as a single unbatched case.
    Pure in (params, observation, noise).
    """
    spans, total = _layout(arch)
    if params.shape != (total,):
        raise ValueError(f"expected {total} parameters, got {params.shape}")
    squeeze = observation.ndim == 1 and noise.ndim == 1
    obs = np.atleast_2d(observation)
    z = np.atleast_2d(noise)
    if obs.shape[1] != arch.obs_dim or z.shape[1] != arch.noise_dim:
        raise ValueError(
            f"input dims ({obs.shape[1]}, {z.shape[1]}) do not match "
            f"architecture ({arch.obs_dim}, {arch.noise_dim})"
        )
    x = np.concatenate([obs, z], axis=1) if arch.noise_dim else obs
    last = len(spans) - 1
    for k, (w, b, fan_in, fan_out) in enumerate(spans):
        x = x @ params[w].reshape(fan_in, fan_out) + params[b]
        if k != last:
            x = _elu(x)
    out = _apply_head(arch.head, x, obs)
    return out[0] if squeeze else out


def sample_action(
    arch: PolicyArchitecture,
    params: np.ndarray,
    observation: np.ndarray,
    stream: RngStream,
) -> np.ndarray:
    """Draw latent noise from the stream and run the network."""
    obs = np.atleast_2d(observation)
    noise = stream.standard_normal((obs.shape[0], arch.noise_dim))
    out = forward(arch, params, obs, noise)
    return out[0] if observation.ndim == 1 else out


# -- training-loop fast path ---------------------------------------------------
#
# The training loop evaluates networks on batches of one or two rows, where
# numpy's per-call overhead dominates.  A jitted kernel (strict IEEE, no
# fastmath, so results are deterministic) computes the same function; the
# numpy `forward` above stays the reference implementation, and the two are
# cross-checked in the tests.  Heads are encoded as integers.

_HEAD_IDENTITY, _HEAD_ABS, _HEAD_SOFTMAX, _HEAD_CLIP = 0, 1, 2, 3


@numba.njit(cache=True, fastmath=False)
def _mlp_kernel(p, x, dims, head_code, scale, clip_lo, clip_hi):  # pragma: no cover
    n_rows = x.shape[0]
    n_layers = dims.shape[0] - 1
    out = np.empty((n_rows, dims[n_layers]))
    for r in range(n_rows):
        cur = x[r].copy()
        off = 0
        for li in range(n_layers):
            fi, fo = dims[li], dims[li + 1]
            nxt = np.empty(fo)
            for j in range(fo):
                acc = p[off + fi * fo + j]
                for i in range(fi):
                    acc += cur[i] * p[off + i * fo + j]
                nxt[j] = acc
            if li != n_layers - 1:
                for j in range(fo):
                    if nxt[j] <= 0.0:
                        nxt[j] = np.expm1(nxt[j])
            cur = nxt
            off += fi * fo + fo
        if head_code == _HEAD_ABS:
            for j in range(cur.shape[0]):
                cur[j] = abs(cur[j])
        elif head_code == _HEAD_SOFTMAX:
            top = cur[0]
            for j in range(1, cur.shape[0]):
                top = max(top, cur[j])
            tot = 0.0
            for j in range(cur.shape[0]):
                cur[j] = np.exp(cur[j] - top)
                tot += cur[j]
            for j in range(cur.shape[0]):
                cur[j] = cur[j] / tot * scale[r]
        elif head_code == _HEAD_CLIP:
            for j in range(cur.shape[0]):
                cur[j] = min(max(cur[j], clip_lo), clip_hi)
        out[r] = cur
    return out


@numba.njit(cache=True, fastmath=False)
def _mlp_kernel_pair(p_a, p_b, x, dims, head_code, scale, clip_lo, clip_hi):  # pragma: no cover
    """Both parameter variants over one shared input batch; rows 0..B-1
    use p_a and rows B..2B-1 use p_b, each computed exactly as
    :func:`_mlp_kernel` would."""
    n_rows = x.shape[0]
    out = np.empty((2 * n_rows, dims[dims.shape[0] - 1]))
    out[:n_rows] = _mlp_kernel(p_a, x, dims, head_code, scale, clip_lo, clip_hi)
    out[n_rows:] = _mlp_kernel(p_b, x, dims, head_code, scale, clip_lo, clip_hi)
    return out


@lru_cache(maxsize=None)
def _fast_meta(arch: PolicyArchitecture):
    dims = np.array(
        [arch.obs_dim + arch.noise_dim, *arch.hidden_layers, arch.action_dim], dtype=np.int64
    )
    head = arch.head
    if head.kind == "absolute_value":
        return dims, _HEAD_ABS, 0.0, 0.0
    if head.kind == "softmax_scaled":
        return dims, _HEAD_SOFTMAX, 0.0, 0.0
    if head.clip is not None:
        return dims, _HEAD_CLIP, float(head.clip[0]), float(head.clip[1])
    return dims, _HEAD_IDENTITY, 0.0, 0.0


_EMPTY = np.empty(0)


class FastPolicy:
    """Preresolved forward pass for one architecture (training hot loop)."""

    __slots__ = ("arch", "dims", "head_code", "clip_lo", "clip_hi", "scale_idx", "_scales")

    def __init__(self, arch: PolicyArchitecture):
        self.arch = arch
        self.dims, self.head_code, self.clip_lo, self.clip_hi = _fast_meta(arch)
        self.scale_idx = arch.head.scale_obs_index
        self._scales: dict[int, np.ndarray] = {}

    def _inputs(self, obs: np.ndarray, noise: np.ndarray):
        arch = self.arch
        if arch.obs_dim and arch.noise_dim:
            x = np.concatenate([obs, noise], axis=1)
        else:
            x = noise if arch.noise_dim else obs
        if self.head_code == _HEAD_SOFTMAX:
            if self.scale_idx is not None:
                scale = np.ascontiguousarray(obs[:, self.scale_idx])
            else:
                scale = self._scales.get(x.shape[0])
                if scale is None:
                    scale = self._scales[x.shape[0]] = np.full(x.shape[0], arch.head.scale)
        else:
            scale = _EMPTY
        return np.ascontiguousarray(x), scale

    def __call__(self, params: np.ndarray, obs: np.ndarray, noise: np.ndarray) -> np.ndarray:
        x, scale = self._inputs(obs, noise)
        return _mlp_kernel(
            params, x, self.dims, self.head_code, scale, self.clip_lo, self.clip_hi
        )

    def pair(self, params_a, params_b, obs, noise) -> np.ndarray:
        """Stacked outputs for two parameter variants on one input batch."""
        x, scale = self._inputs(obs, noise)
        return _mlp_kernel_pair(
            params_a, params_b, x, self.dims, self.head_code, scale,
            self.clip_lo, self.clip_hi,
        )


def fast_forward(
    arch: PolicyArchitecture, params: np.ndarray, obs: np.ndarray, noise: np.ndarray
) -> np.ndarray:
    """Small-batch forward pass matching :func:`forward`; obs and noise 2-d."""
    return FastPolicy(arch)(params, obs, noise)


# -- checkpoints ----------------------------------------------------------


def save_checkpoint(path: str | Path, arch: PolicyArchitecture, params: np.ndarray) -> None:
    """Architecture descriptor + flat parameters; round-trips bit-exactly."""
    head = arch.head
    descr = {
        "obs_dim": arch.obs_dim,
        "noise_dim": arch.noise_dim,
        "action_dim": arch.action_dim,
        "hidden_layers": list(arch.hidden_layers),
        "head": {
            "kind": head.kind,
            "scale": head.scale,
            "scale_obs_index": head.scale_obs_index,
            "clip": list(head.clip) if head.clip else None,
        },
    }
    np.savez(path, arch=np.frombuffer(json.dumps(descr).encode(), dtype=np.uint8),
             params=np.asarray(params, dtype=np.float64))


def load_checkpoint(path: str | Path) -> tuple[PolicyArchitecture, np.ndarray]:
    with np.load(path) as data:
        descr = json.loads(bytes(data["arch"]).decode())
        params = data["params"].copy()
    h = descr["head"]
    head = OutputHead(
        kind=h["kind"],
        scale=h["scale"],
        scale_obs_index=h["scale_obs_index"],
        clip=tuple(h["clip"]) if h["clip"] else None,
    )
    arch = PolicyArchitecture(
        obs_dim=descr["obs_dim"],
        noise_dim=descr["noise_dim"],
        action_dim=descr["action_dim"],
        head=head,
        hidden_layers=tuple(descr["hidden_layers"]),
    )
    return arch, params
