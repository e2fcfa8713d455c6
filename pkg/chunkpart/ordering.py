"""Graph edge ordering: the permutation fed to chunk-based partitioning.

Both greedy algorithms grow the ordered prefix ``X`` one vertex at a time:
all unordered edges of the chosen vertex ``v`` get the next indices, and each
two-hop edge ``(u, w)`` is pulled in when ``w`` touches one of the last
``delta`` ordered edges. They differ only in how ``v`` is chosen: the fast
variant dequeues the minimum of ``alpha * D[v] - beta * M[v]``, the baseline
evaluates the partial objective for every frontier vertex.
"""
import heapq
import logging
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from chunkpart.config import DEFAULT_K_MAX, DEFAULT_K_MIN, get_settings
from chunkpart.errors import ConfigurationError, DomainError, FormatError, GraphTooLargeError
from chunkpart.graph import Graph, from_canonical_edges, read_header, read_pairs, write_header
from chunkpart.metrics import partial_objective_raw

logger = logging.getLogger(__name__)

NEVER_ORDERED = -1
ORDERED_MAGIC = b"CPEO"
ORDERED_VERSION = 1
TRIVIAL_STRATEGIES = ("input_order", "random_shuffle", "bfs")
_I64_LIMIT = 1 << 63


@dataclass(frozen=True)
class Ordering:
    """``permutation[i]`` is the edge at order index ``i``; ``inverse`` undoes it."""

    permutation: NDArray[np.int64]
    inverse: NDArray[np.int64]

    @classmethod
    def from_permutation(cls, permutation: ArrayLike) -> "Ordering":
        perm = np.array(permutation, dtype=np.int64).reshape(-1)
        m = perm.shape[0]
        if m and (perm.min() < 0 or perm.max() >= m):
            raise DomainError("permutation entries outside [0, |E|)")
        inverse = np.full(m, -1, dtype=np.int64)
        inverse[perm] = np.arange(m, dtype=np.int64)
        if np.any(inverse < 0):
            raise DomainError("permutation is not a bijection")
        perm.flags.writeable = False
        inverse.flags.writeable = False
        return cls(permutation=perm, inverse=inverse)

    @property
    def edge_count(self) -> int:
        return int(self.permutation.shape[0])

    def ordered_edges(self, graph: Graph) -> NDArray[np.int64]:
        return graph.edges[self.permutation]


class OrderingParams(BaseModel):
    """Parameters of the greedy orderings"""

    model_config = ConfigDict(frozen=True)

    k_min: int = Field(default=DEFAULT_K_MIN, ge=1, description="Smallest partition count optimised for")
    k_max: int = Field(default=DEFAULT_K_MAX, ge=1, description="Largest partition count optimised for")
    delta: Optional[int] = Field(default=None, ge=0, description="Two-hop window; None means |E| // k_max")
    seed: int = Field(default=0, ge=0, lt=1 << 64, description="Seed of the random restarts")
    deterministic_restart: bool = Field(default=False, description="Restart from the lowest-id vertex")

    @model_validator(mode="after")
    def _check_k_range(self) -> "OrderingParams":
        if self.k_min > self.k_max:
            raise ValueError(f"k_min={self.k_min} exceeds k_max={self.k_max}")
        return self

    @classmethod
    def for_graph(
        cls,
        edge_count: int,
        k_min: int = DEFAULT_K_MIN,
        k_max: int = DEFAULT_K_MAX,
        delta: Optional[int] = None,
        seed: int = 0,
        deterministic_restart: bool = False,
        bounded: bool = False,
    ) -> "OrderingParams":
        """Clamp the k range to the graph so that tiny graphs stay orderable."""
        k_max = min(k_max, max(edge_count, 1))
        k_min = min(k_min, k_max)
        if bounded and delta is None:
            delta = bounded_delta(edge_count, k_max)
        return cls(k_min=k_min, k_max=k_max, delta=delta, seed=seed, deterministic_restart=deterministic_restart)

    def validate_for(self, edge_count: int) -> None:
        if self.k_max > edge_count:
            raise DomainError(f"k_max={self.k_max} exceeds |E|={edge_count}")
        if self.delta is not None and self.delta > edge_count:
            raise DomainError(f"delta={self.delta} exceeds |E|={edge_count}")

    def window(self, edge_count: int) -> int:
        return default_delta(edge_count, self.k_max) if self.delta is None else self.delta


def priority_weights(edge_count: int, k_min: int, k_max: int) -> Tuple[int, int]:
    """``alpha = sum(|E| // k for k in [k_min, k_max])`` and ``beta = k_max - k_min``."""
    if not 1 <= k_min <= k_max <= edge_count:
        raise DomainError(f"need 1 <= k_min <= k_max <= |E|, got k_min={k_min} k_max={k_max} |E|={edge_count}")
    alpha = sum(edge_count // k for k in range(k_min, k_max + 1))
    return alpha, k_max - k_min


def priority(alpha: int, beta: int, remaining: int, latest: int) -> int:
    return alpha * remaining - beta * latest


def check_priority_range(alpha: int, beta: int, max_degree: int, edge_count: int) -> None:
    """Priorities must stay inside signed 64-bit arithmetic."""
    if alpha * max_degree >= _I64_LIMIT or beta * edge_count >= _I64_LIMIT:
        raise ConfigurationError(
            f"priority alpha*d_max={alpha * max_degree} overflows signed 64-bit; shrink the k range"
        )


def default_delta(edge_count: int, k_max: int) -> int:
    """Size of the smallest chunk at ``k_max``."""
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    return edge_count // k_max


def bounded_delta(edge_count: int, k_max: int) -> int:
    """Window under which the replication upper bound is checked."""
    return max(default_delta(edge_count, k_max) - 1, 0)


@dataclass
class ExpansionState:
    """Mutable bookkeeping of a greedy expansion.

    ``remaining[v]`` is D[v], the number of unordered edges at ``v``;
    ``latest[v]`` is M[v], the order index of the most recently ordered edge at
    ``v`` or ``NEVER_ORDERED``; ``order`` is the ordered prefix X as edge indices.
    """

    graph: Graph
    remaining: List[int]
    latest: List[int]
    ordered: List[bool]
    order: List[int] = field(default_factory=list)
    neighbors: List[List[int]] = field(default_factory=list, repr=False)
    edge_ids: List[List[int]] = field(default_factory=list, repr=False)

    @classmethod
    def start(cls, graph: Graph) -> "ExpansionState":
        indptr = graph.indptr.tolist()
        adj_vertex = graph.adj_vertex.tolist()
        adj_edge = graph.adj_edge.tolist()
        spans = list(zip(indptr[:-1], indptr[1:]))
        return cls(
            graph=graph,
            remaining=graph.degrees.tolist(),
            latest=[NEVER_ORDERED] * graph.vertex_count,
            ordered=[False] * graph.edge_count,
            neighbors=[adj_vertex[a:b] for a, b in spans],
            edge_ids=[adj_edge[a:b] for a, b in spans],
        )

    @property
    def next_index(self) -> int:
        return len(self.order)

    def frontier(self) -> List[int]:
        """Vertices with at least one ordered and one unordered incident edge."""
        return [
            v
            for v in range(self.graph.vertex_count)
            if self.latest[v] != NEVER_ORDERED and self.remaining[v] > 0
        ]

    def unordered_neighbors(self, v: int) -> List[Tuple[int, int]]:
        return [(u, e) for u, e in zip(self.neighbors[v], self.edge_ids[v]) if not self.ordered[e]]


class ExpansionObserver:
    """Instrumentation hooks of the greedy expansion; the base class ignores them."""

    def before_expand(self, state: ExpansionState, vertex: int, restarted: bool) -> None:
        pass

    def on_two_hop(self, state: ExpansionState, u: int, w: int, index: int) -> None:
        pass

    def after_expand(self, state: ExpansionState, vertex: int, placed: int) -> None:
        pass


class ExpansionTrace(ExpansionObserver):
    """Records iteration sizes, restarts and two-hop placements."""

    def __init__(self):
        self.iteration_sizes: List[int] = []
        self.restarts = 0
        # (order index, u, w, M[w] at placement time)
        self.two_hop: List[Tuple[int, int, int, int]] = []

    def before_expand(self, state, vertex, restarted):
        if restarted:
            self.restarts += 1

    def on_two_hop(self, state, u, w, index):
        self.two_hop.append((index, u, w, state.latest[w]))

    def after_expand(self, state, vertex, placed):
        self.iteration_sizes.append(placed)

    @property
    def max_iteration(self) -> int:
        return max(self.iteration_sizes, default=0)

    def hypothesis_holds(self, edge_count: int, k_max: int) -> bool:
        """Every iteration ordered fewer edges than the smallest chunk at ``k_max``."""
        return self.max_iteration < edge_count // k_max


class _FrontierQueue:
    """Min-heap with lazy deletion; ties go to the lower vertex id."""

    def __init__(self):
        self._heap: List[Tuple[int, int]] = []
        self._key: Dict[int, int] = {}

    def upsert(self, v: int, key: int) -> None:
        if self._key.get(v) == key:
            return
        self._key[v] = key
        heapq.heappush(self._heap, (key, v))

    def discard(self, v: int) -> None:
        self._key.pop(v, None)

    def pop(self) -> Optional[int]:
        while self._heap:
            key, v = heapq.heappop(self._heap)
            if self._key.get(v) == key:
                del self._key[v]
                return v
        return None

    def __contains__(self, v: int) -> bool:
        return v in self._key

    def __len__(self) -> int:
        return len(self._key)


class _RestartPicker:
    """Chooses where expansion restarts when no frontier vertex is left."""

    def __init__(self, state: ExpansionState, seed: int, deterministic: bool):
        self._state = state
        self._deterministic = deterministic
        self._rng = np.random.default_rng(seed)
        self._pool = list(range(state.graph.vertex_count))
        self._cursor = 0

    def pick(self) -> int:
        remaining = self._state.remaining
        if self._deterministic:
            while remaining[self._cursor] == 0:
                self._cursor += 1
            return self._cursor
        pool = self._pool
        while True:
            j = int(self._rng.integers(len(pool)))
            v = pool[j]
            if remaining[v] > 0:
                return v
            pool[j] = pool[-1]
            pool.pop()


def _expand(
    state: ExpansionState,
    v_min: int,
    delta: int,
    observer: ExpansionObserver,
    touch: Callable[[int], None],
) -> None:
    remaining, latest, ordered, order = state.remaining, state.latest, state.ordered, state.order
    neighbors, edge_ids = state.neighbors, state.edge_ids

    for u, e in zip(neighbors[v_min], edge_ids[v_min]):
        if ordered[e]:
            continue
        i = len(order)
        order.append(e)
        ordered[e] = True
        remaining[v_min] -= 1
        remaining[u] -= 1
        latest[v_min] = i
        latest[u] = i

        for w, f in zip(neighbors[u], edge_ids[u]):
            if ordered[f]:
                continue
            j = len(order)
            # w touches one of the edges j - delta .. j - 1
            if latest[w] != NEVER_ORDERED and latest[w] >= j - delta:
                observer.on_two_hop(state, u, w, j)
                order.append(f)
                ordered[f] = True
                remaining[u] -= 1
                remaining[w] -= 1
                latest[u] = j
                latest[w] = j
                touch(w)
        touch(u)


def _prepare(graph: Graph, params: Optional[OrderingParams]) -> OrderingParams:
    params = params or OrderingParams.for_graph(graph.edge_count)
    params.validate_for(graph.edge_count)
    return params


def order_geo_fast(
    graph: Graph,
    params: Optional[OrderingParams] = None,
    observer: Optional[ExpansionObserver] = None,
) -> Ordering:
    """Priority-queue greedy expansion."""
    m = graph.edge_count
    if m == 0:
        return Ordering.from_permutation([])
    params = _prepare(graph, params)
    observer = observer or ExpansionObserver()
    alpha, beta = priority_weights(m, params.k_min, params.k_max)
    check_priority_range(alpha, beta, graph.max_degree, m)
    delta = params.window(m)

    state = ExpansionState.start(graph)
    remaining, latest = state.remaining, state.latest
    restarts = _RestartPicker(state, params.seed, params.deterministic_restart)
    queue = _FrontierQueue()

    def touch(v: int) -> None:
        if remaining[v] > 0:
            queue.upsert(v, alpha * remaining[v] - beta * latest[v])
        else:
            queue.discard(v)

    started = time.perf_counter()
    while state.next_index < m:
        v_min = queue.pop()
        restarted = v_min is None
        if restarted:
            v_min = restarts.pick()
            logger.debug("restart at vertex %d (index %d)", v_min, state.next_index)
        if remaining[v_min] == 0:
            continue
        observer.before_expand(state, v_min, restarted)
        first = state.next_index
        _expand(state, v_min, delta, observer, touch)
        observer.after_expand(state, v_min, state.next_index - first)

    elapsed = time.perf_counter() - started
    logger.info("geo ordered %d edges in %.3fs (alpha=%d beta=%d delta=%d)", m, elapsed, alpha, beta, delta)
    return Ordering.from_permutation(state.order)


def order_geo_baseline(
    graph: Graph,
    params: Optional[OrderingParams] = None,
    observer: Optional[ExpansionObserver] = None,
    cap: Optional[int] = None,
) -> Ordering:
    """Greedy expansion that evaluates the partial objective of every frontier vertex."""
    m = graph.edge_count
    cap = cap or get_settings().baseline_cap
    if m > cap:
        raise GraphTooLargeError(m, cap)
    if m == 0:
        return Ordering.from_permutation([])
    params = _prepare(graph, params)
    observer = observer or ExpansionObserver()
    priority_weights(m, params.k_min, params.k_max)
    delta = params.window(m)

    state = ExpansionState.start(graph)
    restarts = _RestartPicker(state, params.seed, params.deterministic_restart)

    while state.next_index < m:
        frontier = state.frontier()
        restarted = not frontier
        if restarted:
            v_min = restarts.pick()
        else:
            prefix = graph.edges[state.order]
            v_min, best = -1, None
            for v in frontier:
                new_edges = [e for _, e in state.unordered_neighbors(v)]
                candidate = np.concatenate([prefix, graph.edges[new_edges]])
                score = partial_objective_raw(candidate, m, params.k_min, params.k_max)
                if best is None or score < best:
                    v_min, best = v, score
        observer.before_expand(state, v_min, restarted)
        first = state.next_index
        _expand(state, v_min, delta, observer, lambda v: None)
        observer.after_expand(state, v_min, state.next_index - first)

    return Ordering.from_permutation(state.order)


def _bfs_order(graph: Graph, seed: int, start: Optional[int]) -> List[int]:
    rng = np.random.default_rng(seed)
    roots = rng.permutation(graph.vertex_count).tolist()
    if start is not None:
        roots.insert(0, start)
    state = ExpansionState.start(graph)
    visited = [False] * graph.vertex_count
    order, ordered = state.order, state.ordered

    for root in roots:
        if len(order) == graph.edge_count:
            break
        if visited[root]:
            continue
        visited[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for u, e in zip(state.neighbors[v], state.edge_ids[v]):
                if not ordered[e]:
                    ordered[e] = True
                    order.append(e)
                if not visited[u]:
                    visited[u] = True
                    queue.append(u)
    return order


def order_trivial(graph: Graph, strategy: str, seed: int = 0, start: Optional[int] = None) -> Ordering:
    """Comparison orderings: canonical input order, seeded shuffle or seeded BFS."""
    if strategy == "input_order":
        return Ordering.from_permutation(np.arange(graph.edge_count))
    if strategy == "random_shuffle":
        return Ordering.from_permutation(np.random.default_rng(seed).permutation(graph.edge_count))
    if strategy == "bfs":
        if start is not None and not 0 <= start < graph.vertex_count:
            raise DomainError(f"start vertex {start} outside [0, {graph.vertex_count})")
        return Ordering.from_permutation(_bfs_order(graph, seed, start))
    raise DomainError(f"unknown strategy {strategy!r}, expected one of {', '.join(TRIVIAL_STRATEGIES)}")


ORDERING_ALGORITHMS: Dict[str, Callable[[Graph, OrderingParams], Ordering]] = {
    "geo": lambda graph, params: order_geo_fast(graph, params),
    "geo-baseline": lambda graph, params: order_geo_baseline(graph, params),
    "input": lambda graph, params: order_trivial(graph, "input_order", params.seed),
    "random": lambda graph, params: order_trivial(graph, "random_shuffle", params.seed),
    "bfs": lambda graph, params: order_trivial(graph, "bfs", params.seed),
}
GREEDY_ALGORITHMS = ("geo", "geo-baseline")


def write_ordered_edges(path: Union[str, Path], graph: Graph, ordering: Ordering) -> None:
    if ordering.edge_count != graph.edge_count:
        raise DomainError(f"ordering covers {ordering.edge_count} edges, graph has {graph.edge_count}")
    with open(path, "wb") as f:
        write_header(f, ORDERED_MAGIC, ORDERED_VERSION, graph.vertex_count, graph.edge_count)
        f.write(ordering.ordered_edges(graph).astype("<u8").tobytes())


def read_ordered_edges(path: Union[str, Path]) -> Tuple[Graph, Ordering]:
    """Rebuild the canonical graph and its ordering from a CPEO file.

    Records hold dense ids only, so the returned graph has ``labels == arange(|V|)``.
    Original vertex ids of a text input do not survive the round trip.
    """
    data = Path(path).read_bytes()
    vertex_count, edge_count = read_header(data, ORDERED_MAGIC, ORDERED_VERSION, path)
    records = read_pairs(data, edge_count, path).astype(np.int64)
    if edge_count == 0:
        return from_canonical_edges(records, vertex_count), Ordering.from_permutation([])

    if not np.all(records[:, 0] < records[:, 1]) or int(records.max()) >= vertex_count:
        raise FormatError(f"{path}: records are not canonical edges below |V|={vertex_count}")
    rank = np.lexsort((records[:, 1], records[:, 0]))
    edges = records[rank]
    if np.any(np.all(edges[1:] == edges[:-1], axis=1)):
        raise FormatError(f"{path}: duplicate edge records")
    if np.unique(edges).shape[0] != vertex_count:
        raise FormatError(f"{path}: header |V|={vertex_count} does not match the edge records")

    permutation = np.empty(edge_count, dtype=np.int64)
    permutation[rank] = np.arange(edge_count, dtype=np.int64)
    return from_canonical_edges(edges, vertex_count), Ordering.from_permutation(permutation)
