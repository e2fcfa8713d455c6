"""Chunk-based edge partitioning (CEP) over an ordered edge list.

Partition ``p`` of ``k`` is the contiguous run of order indices starting at
``chunk_start(|E|, k, p)`` with ``chunk_width(|E|, k, p)`` edges. Every query
here is O(1) in ``|E|``; only :func:`make_partition_spec` touches all ``k``
boundaries.
"""
import statistics
import time
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from chunkpart.assignment import Assignment
from chunkpart.errors import DomainError

if TYPE_CHECKING:
    from chunkpart.ordering import Ordering


def _check_k(k: int) -> None:
    if k < 1:
        raise DomainError(f"partition count must be >= 1, got k={k}")


def chunk_width(edge_count: int, k: int, p: int) -> int:
    _check_k(k)
    if not 0 <= p < k:
        raise DomainError(f"partition id {p} outside [0, {k})")
    return (edge_count + p) // k


def chunk_start(edge_count: int, k: int, p: int) -> int:
    """First order index of partition ``p``; ``p == k`` returns ``|E|``."""
    _check_k(k)
    if not 0 <= p <= k:
        raise DomainError(f"partition id {p} outside [0, {k}]")
    q, r = divmod(edge_count, k)
    return p * q + max(0, p - k + r)


def naive_chunk_start(edge_count: int, k: int, p: int) -> int:
    """Literal sum of the first ``p`` chunk widths."""
    return sum((edge_count + x) // k for x in range(p))


def id2p(edge_count: int, k: int, i: int) -> int:
    """Partition holding order index ``i``.

    The first ``k - |E| mod k`` chunks have width ``|E| // k``, the rest one more.
    """
    _check_k(k)
    if not 0 <= i < edge_count:
        raise DomainError(f"order index {i} outside [0, {edge_count})")
    q, r = divmod(edge_count, k)
    short_span = (k - r) * q
    if i < short_span:
        return i // q
    return k - r + (i - short_span) // (q + 1)


def id2p_array(edge_count: int, k: int, indices: ArrayLike) -> NDArray[np.int64]:
    _check_k(k)
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= edge_count):
        raise DomainError(f"order indices outside [0, {edge_count})")
    q, r = divmod(edge_count, k)
    short_span = (k - r) * q
    short = idx // max(q, 1)
    long = k - r + (idx - short_span) // (q + 1)
    return np.where(idx < short_span, short, long).astype(np.int64)


@dataclass(frozen=True)
class PartitionSpec:
    """The ``k`` contiguous chunk ranges of an ordered edge list."""

    k: int
    edge_count: int
    boundaries: Tuple[int, ...]

    @property
    def ranges(self) -> List[Tuple[int, int]]:
        return list(zip(self.boundaries[:-1], self.boundaries[1:]))

    @property
    def widths(self) -> List[int]:
        return [stop - start for start, stop in self.ranges]

    def part_of(self, i: int) -> int:
        return id2p(self.edge_count, self.k, i)

    def edge_balance(self) -> float:
        if self.edge_count == 0:
            return 1.0
        return max(self.widths) * self.k / self.edge_count

    def to_record(self) -> dict:
        return {"k": self.k, "edge_count": self.edge_count, "boundaries": list(self.boundaries)}


def make_partition_spec(edge_count: int, k: int) -> PartitionSpec:
    _check_k(k)
    if edge_count < 0:
        raise DomainError(f"edge count must be >= 0, got {edge_count}")
    boundaries = tuple(chunk_start(edge_count, k, p) for p in range(k + 1))
    return PartitionSpec(k=k, edge_count=edge_count, boundaries=boundaries)


def cep_assignment(spec: PartitionSpec, ordering: "Ordering") -> Assignment:
    """Materialise the per-edge partition ids of a CEP split."""
    permutation = ordering.permutation
    if permutation.shape[0] != spec.edge_count:
        raise DomainError(f"ordering covers {permutation.shape[0]} edges, partition spec {spec.edge_count}")
    part_of = np.empty(spec.edge_count, dtype=np.int64)
    part_of[permutation] = id2p_array(spec.edge_count, spec.k, np.arange(spec.edge_count))
    return Assignment(k=spec.k, part_of=part_of)


def query_latency(edge_count: int, k: int, calls: int = 100_000, rounds: int = 9) -> float:
    """Median wall time of one ``id2p`` call in nanoseconds."""
    if edge_count < 1:
        raise DomainError("latency needs at least one edge")
    per_round = max(calls // rounds, 1)
    stride = max(edge_count // per_round, 1)
    samples = []
    for _ in range(rounds):
        i = 0
        started = time.perf_counter_ns()
        for _ in range(per_round):
            id2p(edge_count, k, i)
            i += stride
            if i >= edge_count:
                i -= edge_count
        samples.append((time.perf_counter_ns() - started) / per_round)
    return statistics.median(samples)
