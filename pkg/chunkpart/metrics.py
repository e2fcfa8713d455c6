"""Partition quality measures and analytic bounds.

Replication factor and balance factors work on any :class:`Assignment`. The
ordering objective is available in two forms: summed over the chunks of each k,
and summed over order indices with the split indicator. Both must agree
exactly. The bound helpers cover the general ``(|V| + |E| + k) / |V|`` bound
and its expectation for power-law degree distributions.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field

from chunkpart.assignment import Assignment
from chunkpart.chunking import cep_assignment, id2p_array, make_partition_spec
from chunkpart.errors import DomainError
from chunkpart.graph import Graph

if TYPE_CHECKING:
    from chunkpart.ordering import Ordering

logger = logging.getLogger(__name__)


class QualityReport(BaseModel):
    """Quality of one k-way edge partitioning"""

    k: int = Field(description="Number of partitions")
    rf: float = Field(description="Replication factor: covered vertices summed over partitions / |V|")
    eb: float = Field(description="Edge balance: max edges per partition / mean")
    vb: float = Field(description="Vertex balance: max covered vertices per partition / mean")
    per_partition: List[Tuple[int, int]] = Field(
        default_factory=list, description="(edge count, covered vertex count) of each partition"
    )
    rf_bound: Optional[float] = Field(default=None, description="(|V| + |E| + k) / |V| for comparison")


class ObjectiveValue(BaseModel):
    """Ordering objective summed over k in [k_min, k_max]"""

    k_min: int
    k_max: int
    raw: int = Field(description="Covered vertices summed over every chunk of every k")
    total: float = Field(description="raw / |V|")


def _check_lengths(graph: Graph, assignment: Assignment) -> None:
    if assignment.edge_count != graph.edge_count:
        raise DomainError(f"assignment covers {assignment.edge_count} edges, graph has {graph.edge_count}")


def cover_counts(graph: Graph, assignment: Assignment) -> Tuple[NDArray[np.int64], NDArray[np.int64]]:
    """Per-partition edge counts and covered-vertex counts."""
    _check_lengths(graph, assignment)
    n, k = graph.vertex_count, assignment.k
    edges = np.bincount(assignment.part_of, minlength=k)
    if graph.edge_count == 0:
        return edges, np.zeros(k, dtype=np.int64)
    keys = np.unique(np.repeat(assignment.part_of, 2) * n + graph.edges.reshape(-1))
    return edges, np.bincount(keys // n, minlength=k)


def replication_factor(graph: Graph, assignment: Assignment) -> float:
    _check_lengths(graph, assignment)
    if graph.vertex_count == 0:
        raise DomainError("replication factor is undefined for an empty graph")
    _, vertices = cover_counts(graph, assignment)
    return int(vertices.sum()) / graph.vertex_count


def balance(values: Sequence[int]) -> float:
    """max / mean; an all-zero list counts as balanced."""
    values = list(values)
    if not values:
        raise DomainError("balance of an empty list")
    mean = sum(values) / len(values)
    return 1.0 if mean == 0 else max(values) / mean


def quality_report(graph: Graph, assignment: Assignment) -> QualityReport:
    if graph.vertex_count == 0:
        raise DomainError("quality is undefined for an empty graph")
    edges, vertices = cover_counts(graph, assignment)
    return QualityReport(
        k=assignment.k,
        rf=int(vertices.sum()) / graph.vertex_count,
        eb=balance(edges.tolist()),
        vb=balance(vertices.tolist()),
        per_partition=list(zip(edges.tolist(), vertices.tolist())),
        rf_bound=rf_upper_bound(graph.vertex_count, graph.edge_count, assignment.k),
    )


def quality_sweep(graph: Graph, ordering: "Ordering", ks: Iterable[int], threads: int = 1) -> List[QualityReport]:
    """CEP quality for each k, in the order of ``ks``."""

    def evaluate(k: int) -> QualityReport:
        return quality_report(graph, cep_assignment(make_partition_spec(graph.edge_count, k), ordering))

    ks = list(ks)
    if threads <= 1 or len(ks) <= 1:
        return [evaluate(k) for k in ks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(evaluate, ks))


def _check_k_range(edge_count: int, k_min: int, k_max: int) -> None:
    if not 1 <= k_min <= k_max <= max(edge_count, 1):
        raise DomainError(f"need 1 <= k_min <= k_max <= |E|, got k_min={k_min} k_max={k_max} |E|={edge_count}")


def partial_objective_raw(ordered_pairs: NDArray[np.int64], edge_count: int, k_min: int, k_max: int) -> int:
    """Objective of an ordered prefix: every chunk is clipped to the prefix."""
    _check_k_range(edge_count, k_min, k_max)
    length = ordered_pairs.shape[0]
    if length == 0:
        return 0
    flat = ordered_pairs.reshape(-1)
    n = int(flat.max()) + 1
    index = np.arange(length, dtype=np.int64)
    total = 0
    for k in range(k_min, k_max + 1):
        parts = np.repeat(id2p_array(edge_count, k, index), 2)
        total += int(np.unique(parts * n + flat).shape[0])
    return total


def _objective_value(raw: int, graph: Graph, k_min: int, k_max: int) -> ObjectiveValue:
    if graph.vertex_count == 0:
        raise DomainError("objective is undefined for an empty graph")
    return ObjectiveValue(k_min=k_min, k_max=k_max, raw=raw, total=raw / graph.vertex_count)


def objective_def4(graph: Graph, ordering: "Ordering", k_min: int, k_max: int) -> ObjectiveValue:
    """Covered vertices of every CEP chunk, summed over k in [k_min, k_max]."""
    _check_k_range(graph.edge_count, k_min, k_max)
    pairs = ordering.ordered_edges(graph)
    raw = 0
    for k in range(k_min, k_max + 1):
        for start, stop in make_partition_spec(graph.edge_count, k).ranges:
            raw += int(np.unique(pairs[start:stop]).shape[0])
    return _objective_value(raw, graph, k_min, k_max)


def objective_def5(graph: Graph, ordering: "Ordering", k_min: int, k_max: int) -> ObjectiveValue:
    """Per-index form: the trailing chunk is counted only where ID2P changes."""
    _check_k_range(graph.edge_count, k_min, k_max)
    if graph.vertex_count == 0:
        raise DomainError("objective is undefined for an empty graph")
    m = graph.edge_count
    pairs = ordering.ordered_edges(graph).tolist()
    stamp = [-1] * graph.vertex_count
    token = 0
    raw = 0
    for k in range(k_min, k_max + 1):
        parts = id2p_array(m, k, np.arange(m))
        splits = np.flatnonzero(np.append(parts[1:] != parts[:-1], True)).tolist()
        for i in splits:
            w = (m + int(parts[i])) // k
            lo, hi = _window_span(i, w)
            token += 1
            for a, b in pairs[lo:hi]:
                if stamp[a] != token:
                    stamp[a] = token
                    raw += 1
                if stamp[b] != token:
                    stamp[b] = token
                    raw += 1
    return _objective_value(raw, graph, k_min, k_max)


def _window_span(i: int, w: int) -> Tuple[int, int]:
    """Index span of the width-``w`` window ending at ``i``; windows before 0 start at 0."""
    lo = i - w + 1
    return (0, w) if lo < 0 else (lo, i + 1)


def _window_vertices(pairs: Sequence[Tuple[int, int]], i: int, w: int) -> Set[int]:
    lo, hi = _window_span(i, w)
    return {x for pair in pairs[lo:hi] for x in pair}


def window_delta_sum(
    prefix_pairs: Sequence[Tuple[int, int]],
    v: int,
    new_neighbors: Sequence[int],
    w: int,
    edge_count: int,
) -> int:
    """Covered-vertex increase of every width-``w`` window ending at ``i >= |X|``
    when the edges ``(v, u)`` for ``u`` in ``new_neighbors`` are appended to ``X``.

    Each window is materialised; windows past ``|X| + D + w - 2`` are empty in
    both prefixes and contribute nothing.
    """
    prefix = [tuple(p) for p in prefix_pairs]
    extended = prefix + [(v, u) for u in new_neighbors]
    stop = min(edge_count, len(extended) + w - 1)
    total = 0
    for i in range(len(prefix), stop):
        total += len(_window_vertices(extended, i, w)) - len(_window_vertices(prefix, i, w))
    return total


def window_delta_closed_form(w: int, remaining: int, prefix_len: int, last_index: int) -> int:
    """``w * D + |X| + D - M'`` where ``M' = last_index + 1`` is the index after v's latest ordered edge."""
    return w * remaining + prefix_len + remaining - (last_index + 1)


def rf_upper_bound(vertex_count: int, edge_count: int, k: int) -> float:
    if vertex_count < 1:
        raise DomainError("bound needs at least one vertex")
    return (vertex_count + edge_count + k) / vertex_count


def zeta(s: float, tolerance: float = 1e-12) -> float:
    """Riemann zeta for real ``s > 1``.

    Partial sum up to ``N - 1`` plus the integral tail ``N^(1-s) / (s - 1)`` and the
    two leading Euler-Maclaurin corrections; ``N`` is chosen so that the first
    omitted correction is below ``tolerance``.
    """
    if s <= 1:
        raise DomainError(f"zeta diverges for s <= 1, got s={s}")
    if tolerance <= 0:
        raise DomainError("tolerance must be positive")
    n = max(16, math.ceil((s * (s + 1) * (s + 2) / (720 * tolerance)) ** (1 / (s + 3))))
    terms = np.arange(n - 1, 0, -1, dtype=np.float64) ** -s
    head = math.fsum(terms.tolist())
    tail = n ** (1 - s) / (s - 1) + n ** -s / 2 + s * n ** (-s - 1) / 12
    return head + tail


def powerlaw_bound(alpha_pl: float, tolerance: float = 1e-12) -> float:
    """Expected replication upper bound for a zeta degree distribution with d_min = 1."""
    if alpha_pl <= 2:
        raise DomainError(f"mean degree diverges for alpha <= 2, got alpha={alpha_pl}")
    return 1 + zeta(alpha_pl - 1, tolerance) / (2 * zeta(alpha_pl, tolerance))
