"""Seeded synthetic graphs: RMAT and Erdos-Renyi.

Randomness comes from a counter-based stream, ``mix64(mix64(seed) + n * GOLDEN)``
for counter ``n``, so any sample can be regenerated without replaying the ones
before it.
"""
import logging
from typing import List, Set, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from chunkpart.errors import DomainError
from chunkpart.hashing import GOLDEN, mix64, mix64_array

logger = logging.getLogger(__name__)

SHARD_SIZE = 1 << 16
_UNIT = 2.0**-53


class RmatParams(BaseModel):
    """Recursive-matrix generator parameters"""

    model_config = ConfigDict(frozen=True)

    scale: int = Field(ge=0, le=34, description="log2 of the vertex count")
    edge_factor: int = Field(default=16, ge=1, description="Samples per vertex")
    a: float = Field(default=0.57, ge=0, le=1, description="Top-left quadrant probability")
    b: float = Field(default=0.19, ge=0, le=1, description="Top-right quadrant probability")
    c: float = Field(default=0.19, ge=0, le=1, description="Bottom-left quadrant probability")
    d: float = Field(default=0.05, ge=0, le=1, description="Bottom-right quadrant probability")
    seed: int = Field(default=0, ge=0, lt=1 << 64)

    @model_validator(mode="after")
    def _check_sum(self) -> "RmatParams":
        total = self.a + self.b + self.c + self.d
        if abs(total - 1) > 1e-9:
            raise ValueError(f"quadrant probabilities sum to {total}, expected 1")
        return self

    @property
    def sample_count(self) -> int:
        return (1 << self.scale) * self.edge_factor


def counter_uniform(seed: int, counters: ArrayLike) -> NDArray[np.float64]:
    """Uniform floats in [0, 1) for the given counters of the seeded stream."""
    base = np.uint64(mix64(seed))
    x = mix64_array(base + np.asarray(counters, dtype=np.uint64) * np.uint64(GOLDEN))
    return (x >> np.uint64(11)).astype(np.float64) * _UNIT


def _rmat_shard(params: RmatParams, first: int, count: int) -> NDArray[np.uint64]:
    samples = np.arange(first, first + count, dtype=np.uint64)
    src = np.zeros(count, dtype=np.uint64)
    dst = np.zeros(count, dtype=np.uint64)
    ab, abc = params.a + params.b, params.a + params.b + params.c
    for level in range(params.scale):
        u = counter_uniform(params.seed, samples * np.uint64(params.scale) + np.uint64(level))
        row = u >= ab
        col = ((u >= params.a) & (u < ab)) | (u >= abc)
        src = (src << np.uint64(1)) | row.astype(np.uint64)
        dst = (dst << np.uint64(1)) | col.astype(np.uint64)
    return np.stack([src, dst], axis=1)


def gen_rmat(params: RmatParams) -> NDArray[np.uint64]:
    """``2^scale * edge_factor`` directed samples by recursive quadrant descent.

    Samples are produced in counter order, one shard at a time. Duplicates and
    self-loops are left for :func:`chunkpart.graph.canonicalize`.
    """
    total = params.sample_count
    shards = [
        _rmat_shard(params, first, min(SHARD_SIZE, total - first)) for first in range(0, total, SHARD_SIZE)
    ]
    logger.info("rmat scale=%d edge_factor=%d: %d samples", params.scale, params.edge_factor, total)
    if not shards:
        return np.empty((0, 2), dtype=np.uint64)
    return np.concatenate(shards)


def _all_pairs(n: int, excluded: Set[Tuple[int, int]]) -> NDArray[np.uint64]:
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in excluded]
    return np.array(pairs, dtype=np.uint64).reshape(-1, 2)


def _sample_pairs(n: int, count: int, seed: int) -> List[Tuple[int, int]]:
    """``count`` distinct unordered pairs in order of first draw."""
    chosen = {}
    counter = 0
    while len(chosen) < count:
        batch = max(2 * (count - len(chosen)), 64)
        u = counter_uniform(seed, np.arange(counter, counter + 2 * batch, dtype=np.uint64))
        counter += 2 * batch
        ends = np.minimum((u * n).astype(np.int64), n - 1).reshape(-1, 2)
        for a, b in ends.tolist():
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            if key not in chosen:
                chosen[key] = None
                if len(chosen) == count:
                    break
    return list(chosen)


def gen_er(n: int, m: int, seed: int = 0) -> NDArray[np.uint64]:
    """``m`` distinct uniform edges on ``n`` vertices without self-loops."""
    if n < 0 or m < 0:
        raise DomainError(f"need n >= 0 and m >= 0, got n={n} m={m}")
    pair_count = n * (n - 1) // 2
    if m > pair_count:
        raise DomainError(f"m={m} exceeds the {pair_count} vertex pairs of n={n}")
    if m == 0:
        return np.empty((0, 2), dtype=np.uint64)
    if 2 * m > pair_count:
        return _all_pairs(n, set(_sample_pairs(n, pair_count - m, seed)))
    return np.array(_sample_pairs(n, m, seed), dtype=np.uint64).reshape(-1, 2)
