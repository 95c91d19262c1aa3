"""Named, reproducible random substreams derived from one master seed.

Every sampled quantity in a run is reachable from the master seed through a
path of string/int labels, so trials, Hamiltonian terms, and stages can be
re-run (or parallelized) independently without perturbing each other.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["child_seed", "rng_for"]


def child_seed(master: int, *labels) -> int:
    """Stable 128-bit seed derived from the master seed and a label path."""
    h = hashlib.blake2b(digest_size=16)
    h.update(str(int(master)).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest(), "big")


def rng_for(master: int, *labels) -> np.random.Generator:
    """Generator seeded from the named substream."""
    return np.random.default_rng(child_seed(master, *labels))
