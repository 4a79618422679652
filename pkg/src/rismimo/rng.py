"""Deterministic random substreams.

Every stochastic quantity in the simulator draws from a Philox counter-based
generator keyed by an integer path (master seed plus a sequence of labels).
Streams therefore depend only on their path, never on execution order or
worker count.
"""
from __future__ import annotations

import hashlib
import struct

import numpy as np

__all__ = ["SeedPath", "encode_label"]


def encode_label(label) -> int:
    """Map a path element (int, float, or str) to a nonnegative integer key."""
    if isinstance(label, (bool, np.bool_)):
        return int(label)
    if isinstance(label, (int, np.integer)):
        value = int(label)
        if value < 0:
            # SeedSequence entropy must be nonnegative; fold sign into high bits.
            return (1 << 64) + value
        return value
    if isinstance(label, (float, np.floating)):
        return int.from_bytes(struct.pack(">d", float(label)), "big")
    if isinstance(label, str):
        return int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "big")
    raise TypeError(f"unsupported seed path element: {label!r}")


class SeedPath:
    """A node in a deterministic seed tree.

    ``SeedPath(seed).child("channel", trial).generator()`` always yields the
    same Philox stream for the same arguments.
    """

    def __init__(self, *path):
        self.path = tuple(encode_label(p) for p in path)

    def child(self, *labels) -> "SeedPath":
        node = SeedPath()
        node.path = self.path + tuple(encode_label(x) for x in labels)
        return node

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(list(self.path) if self.path else 0)
        return np.random.Generator(np.random.Philox(seq))

    def __repr__(self):
        return f"SeedPath{self.path}"
