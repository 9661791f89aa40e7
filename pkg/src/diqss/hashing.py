"""Affine two-universal hashing of dit strings over GF(p).

Dits are embedded digit-wise into GF(p), ``p`` the smallest prime ``>= d``,
and hashed as ``A s + b`` with ``A`` and ``b`` uniform. For fixed ``s != s'``
the tags collide exactly when ``A (s - s') = 0``, which happens with
probability ``p**-m <= d**-m`` for tag length ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ditmath import smallest_prime_at_least


@dataclass(frozen=True, eq=False)
class HashFunction:
    d: int
    p: int
    matrix: np.ndarray  # (tag_length, L) over GF(p)
    offset: np.ndarray  # (tag_length,)

    @property
    def length(self) -> int:
        return self.matrix.shape[1]

    @property
    def tag_length(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "p": self.p,
            "matrix": self.matrix.tolist(),
            "offset": self.offset.tolist(),
        }


def hash_sample(d: int, length: int, tag_length: int, rng: np.random.Generator) -> HashFunction:
    if tag_length < 1:
        raise ValueError("tag length must be at least 1")
    p = smallest_prime_at_least(d)
    matrix = rng.integers(0, p, size=(tag_length, length), dtype=np.int64)
    offset = rng.integers(0, p, size=tag_length, dtype=np.int64)
    return HashFunction(d, p, matrix, offset)


def hash_apply(h: HashFunction, s: Sequence[int]) -> tuple[int, ...]:
    v = np.asarray(s, dtype=np.int64)
    if v.shape != (h.length,):
        raise ValueError(f"hash expects a string of length {h.length}, got {v.shape[0] if v.ndim else 0}")
    if v.size and (v.min() < 0 or v.max() >= h.d):
        raise ValueError(f"string entries must lie in [0, {h.d - 1}]")
    # reduce as we go so the dot products stay far from int64 overflow
    tag = (h.matrix % h.p) @ v % h.p
    return tuple(int(t) for t in (tag + h.offset) % h.p)
