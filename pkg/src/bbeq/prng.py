"""Deterministic, splittable random number streams.

All randomness in this package flows through :class:`RngStream`, a thin
wrapper over numpy's Philox counter-based bit generator keyed through
``SeedSequence`` spawn paths.  A stream is fully determined by
``(seed, stream_id, path)``, substreams can be derived without
communication (the property the distributed training loop relies on),
and stream state can be snapshotted and restored exactly.

Fixed generation algorithms, for the record:

* bit source: Philox 4x64 keyed by ``SeedSequence(seed, spawn_key=path)``
* standard normals: numpy's ziggurat
* uniforms: 53-bit doubles from the bit source

A stream is single-owner: never draw from one stream concurrently.
Substreams are independent and may be used from different threads.
"""

from __future__ import annotations

from typing import Any

import numpy as np

_MASK64 = (1 << 64) - 1


class RngStream:
    """One deterministic stream of random variates.

    Construct via :func:`seed_stream` or :meth:`substream`, not directly.
    """

    __slots__ = ("seed", "stream_id", "path", "_gen")

    def __init__(self, seed: int, path: tuple[int, ...]):
        self.seed = int(seed) & _MASK64
        self.path = tuple(int(p) & _MASK64 for p in path)
        self.stream_id = self.path[0] if self.path else 0
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def substream(self, *ids: int) -> "RngStream":
        """Derive an independent child stream at a fixed path offset.

        Children are a pure function of (seed, path, ids): any party that
        knows the parent's identity can derive the same child without
        observing the parent's draws.
        """
        if not ids:
            raise ValueError("substream requires at least one id")
        return RngStream(self.seed, self.path + ids)

    # -- state snapshots ------------------------------------------------

    @property
    def state(self) -> dict[str, Any]:
        """JSON-compatible snapshot of the current position in the stream."""
        raw = self._gen.bit_generator.state
        return {
            "seed": self.seed,
            "path": list(self.path),
            "counter": [int(x) for x in raw["state"]["counter"]],
            "key": [int(x) for x in raw["state"]["key"]],
            "buffer": [int(x) for x in raw["buffer"]],
            "buffer_pos": int(raw["buffer_pos"]),
            "has_uint32": int(raw["has_uint32"]),
            "uinteger": int(raw["uinteger"]),
        }

    @state.setter
    def state(self, snap: dict[str, Any]) -> None:
        raw = self._gen.bit_generator.state
        raw["state"]["counter"] = np.array(snap["counter"], dtype=np.uint64)
        raw["state"]["key"] = np.array(snap["key"], dtype=np.uint64)
        raw["buffer"] = np.array(snap["buffer"], dtype=np.uint64)
        raw["buffer_pos"] = snap["buffer_pos"]
        raw["has_uint32"] = snap["has_uint32"]
        raw["uinteger"] = snap["uinteger"]
        self._gen.bit_generator.state = raw

    def save(self):
        """Cheap opaque snapshot for save/restore within a process."""
        return self._gen.bit_generator.state

    def restore(self, snap) -> None:
        self._gen.bit_generator.state = snap

    def clone(self) -> "RngStream":
        """A new stream positioned exactly where this one is now."""
        other = RngStream(self.seed, self.path)
        other._gen.bit_generator.state = self._gen.bit_generator.state
        return other

    # -- draws ------------------------------------------------------------

    def standard_normal(self, size=None) -> np.ndarray:
        return self._gen.standard_normal(size)

    def uniforms(self, size=None) -> np.ndarray:
        """Uniform variates on [0, 1)."""
        return self._gen.random(size)

    def uniform(self, lo: float, hi: float, size=None):
        """Uniform variates on [lo, hi]; degenerate lo == hi returns lo."""
        if lo > hi:
            raise ValueError(f"uniform requires lo <= hi, got ({lo}, {hi})")
        return lo + (hi - lo) * self._gen.random(size)

    def integers(self, low: int, high: int, size=None):
        """Integers in [low, high)."""
        return self._gen.integers(low, high, size=size)

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, path={self.path})"


def seed_stream(seed: int, stream_id: int = 0) -> RngStream:
    """Create the stream identified by (seed, stream_id).

    Two calls with equal arguments yield streams producing identical
    sequences; distinct stream_ids yield statistically independent ones.
    """
    return RngStream(seed, (int(stream_id) & _MASK64,))
