"""Hash-based edge partitioners: 1D edge hashing, 2D grid hashing and DBH.

All three derive from the murmur3 64-bit finalizer ``mix64``; the numpy
version :func:`mix64_array` is bit-identical and used on whole edge arrays.
"""
import math
from typing import Callable, Dict, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from chunkpart.assignment import Assignment
from chunkpart.errors import DomainError
from chunkpart.graph import U64_MAX, Graph

MASK64 = U64_MAX
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xFF51AFD7ED558CCD
_M2 = 0xC4CEB9FE1A85EC53


def mix64(x: int) -> int:
    x &= MASK64
    x ^= x >> 33
    x = (x * _M1) & MASK64
    x ^= x >> 33
    x = (x * _M2) & MASK64
    x ^= x >> 33
    return x


def mix64_array(values: ArrayLike) -> NDArray[np.uint64]:
    x = np.array(values, dtype=np.uint64)
    shift = np.uint64(33)
    # uint64 array products wrap modulo 2**64
    x ^= x >> shift
    x *= np.uint64(_M1)
    x ^= x >> shift
    x *= np.uint64(_M2)
    x ^= x >> shift
    return x


def grid_shape(k: int) -> Tuple[int, int]:
    """``(r, c)`` with ``r`` the largest divisor of ``k`` not above ``sqrt(k)``."""
    if k < 1:
        raise DomainError(f"partition count must be >= 1, got k={k}")
    r = math.isqrt(k)
    while k % r:
        r -= 1
    return r, k // r


def _endpoints(graph: Graph) -> Tuple[NDArray[np.uint64], NDArray[np.uint64]]:
    return graph.edges[:, 0].astype(np.uint64), graph.edges[:, 1].astype(np.uint64)


def _as_assignment(hashes: NDArray[np.uint64], k: int) -> Assignment:
    return Assignment(k=k, part_of=(hashes % np.uint64(k)).astype(np.int64))


def partition_hash1d(graph: Graph, k: int, salt: int = 0) -> Assignment:
    """Hash each edge ``(a, b)`` to one of ``k`` partitions."""
    if k < 1:
        raise DomainError(f"partition count must be >= 1, got k={k}")
    if not 0 <= salt <= MASK64:
        raise DomainError(f"salt must fit in 64 bits, got {salt}")
    a, b = _endpoints(graph)
    mixed = mix64_array(a) * np.uint64(GOLDEN)
    mixed ^= mix64_array(b)
    mixed ^= np.uint64(salt)
    return _as_assignment(mix64_array(mixed), k)


def partition_hash2d(graph: Graph, k: int) -> Assignment:
    """Row from the hash of ``a``, column from the hash of ``b`` on an ``r x c`` grid."""
    r, c = grid_shape(k)
    a, b = _endpoints(graph)
    rows = mix64_array(a) % np.uint64(r)
    cols = mix64_array(b) % np.uint64(c)
    return Assignment(k=k, part_of=(rows * np.uint64(c) + cols).astype(np.int64))


def partition_dbh(graph: Graph, k: int) -> Assignment:
    """Degree-based hashing: each edge follows its lower-degree endpoint (``a`` on ties)."""
    if k < 1:
        raise DomainError(f"partition count must be >= 1, got k={k}")
    a, b = graph.edges[:, 0], graph.edges[:, 1]
    chosen = np.where(graph.degrees[a] <= graph.degrees[b], a, b)
    return _as_assignment(mix64_array(chosen.astype(np.uint64)), k)


PARTITIONERS: Dict[str, Callable[[Graph, int, int], Assignment]] = {
    "hash1d": lambda graph, k, salt: partition_hash1d(graph, k, salt),
    "hash2d": lambda graph, k, salt: partition_hash2d(graph, k),
    "dbh": lambda graph, k, salt: partition_dbh(graph, k),
}
