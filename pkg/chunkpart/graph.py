"""Canonical undirected simple graphs in CSR form.

Every other module works on a :class:`Graph`: self-loops removed, multi-edges
merged, vertex ids densified to ``0..|V|-1`` in the numeric order of the
original ids, and each adjacency entry paired with the index of its edge.
"""
import logging
import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, TextIO, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from chunkpart.errors import DomainError, FormatError, ParseError

logger = logging.getLogger(__name__)

U64_MAX = (1 << 64) - 1
GRAPH_MAGIC = b"CPGR"
GRAPH_VERSION = 1
_HEADER = struct.Struct("<4sHQQ")
_TOKEN = re.compile(r"[0-9]+")

EdgePairs = NDArray[np.uint64]


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph.

    ``edges[e] = (a, b)`` with ``a < b``, rows sorted lexicographically.
    The adjacency of ``v`` is ``adj_vertex[indptr[v]:indptr[v + 1]]`` (ascending
    neighbor ids) with the matching edge indices in ``adj_edge``.
    """

    vertex_count: int
    edges: NDArray[np.int64]
    indptr: NDArray[np.int64]
    adj_vertex: NDArray[np.int64]
    adj_edge: NDArray[np.int64]
    degrees: NDArray[np.int64]
    labels: NDArray[np.uint64]

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.vertex_count else 0

    def neighbors(self, v: int) -> NDArray[np.int64]:
        return self.adj_vertex[self.indptr[v] : self.indptr[v + 1]]

    def incident_edges(self, v: int) -> NDArray[np.int64]:
        return self.adj_edge[self.indptr[v] : self.indptr[v + 1]]

    def adjacency(self, v: int) -> List[Tuple[int, int]]:
        """(neighbor, edge index) pairs of ``v`` in ascending neighbor order."""
        return list(zip(self.neighbors(v).tolist(), self.incident_edges(v).tolist()))

    def edge(self, e: int) -> Tuple[int, int]:
        a, b = self.edges[e]
        return int(a), int(b)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def from_canonical_edges(
    edges: NDArray[np.int64], vertex_count: int, labels: Optional[NDArray[np.uint64]] = None
) -> Graph:
    """Build the CSR structure for edges that are already canonical and deduplicated."""
    edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    m = edges.shape[0]
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    eid = np.concatenate([np.arange(m, dtype=np.int64), np.arange(m, dtype=np.int64)])
    order = np.lexsort((dst, src))

    degrees = np.bincount(src, minlength=vertex_count).astype(np.int64)
    indptr = np.zeros(vertex_count + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    if labels is None:
        labels = np.arange(vertex_count, dtype=np.uint64)

    return Graph(
        vertex_count=int(vertex_count),
        edges=_frozen(edges),
        indptr=_frozen(indptr),
        adj_vertex=_frozen(dst[order]),
        adj_edge=_frozen(eid[order]),
        degrees=_frozen(degrees),
        labels=_frozen(np.asarray(labels, dtype=np.uint64)),
    )


def empty_graph() -> Graph:
    return from_canonical_edges(np.empty((0, 2), dtype=np.int64), 0)


def parse_edge_list(stream: Union[str, Iterable[str]]) -> EdgePairs:
    """Read whitespace separated ``u v`` pairs; ``#`` lines are comments.

    Returns an ``(m, 2)`` uint64 array in input order.
    """
    lines = stream.splitlines() if isinstance(stream, str) else stream
    pairs = []
    for line_number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        tokens = text.split()
        if len(tokens) != 2:
            raise ParseError(line_number, f"expected 2 tokens, found {len(tokens)}")
        for token in tokens:
            if not _TOKEN.fullmatch(token):
                raise ParseError(line_number, f"not a non-negative integer: {token!r}")
        u, v = int(tokens[0]), int(tokens[1])
        if u > U64_MAX or v > U64_MAX:
            raise ParseError(line_number, "vertex id does not fit in 64 bits")
        pairs.append((u, v))
    return np.array(pairs, dtype=np.uint64).reshape(-1, 2)


def canonicalize(pairs: ArrayLike) -> Graph:
    """Drop self-loops, merge duplicates in either direction and densify ids."""
    raw = np.asarray(pairs, dtype=np.uint64).reshape(-1, 2)
    raw = raw[raw[:, 0] != raw[:, 1]]
    if raw.shape[0] == 0:
        return empty_graph()

    lo = np.minimum(raw[:, 0], raw[:, 1])
    hi = np.maximum(raw[:, 0], raw[:, 1])
    labels = np.unique(np.concatenate([lo, hi]))
    dense = np.stack(
        [np.searchsorted(labels, lo), np.searchsorted(labels, hi)], axis=1
    ).astype(np.int64)
    edges = np.unique(dense, axis=0)

    dropped = raw.shape[0] - edges.shape[0]
    if dropped:
        logger.debug("canonicalize merged %d duplicate pairs", dropped)
    return from_canonical_edges(edges, labels.shape[0], labels)


def check_invariants(graph: Graph) -> None:
    """Exhaustively verify the CSR invariants; raises DomainError on the first violation."""
    n, m = graph.vertex_count, graph.edge_count
    if int(graph.degrees.sum()) != 2 * m:
        raise DomainError("degree sum differs from 2|E|")
    if m and not np.all(graph.edges[:, 0] < graph.edges[:, 1]):
        raise DomainError("edge not canonical (a < b)")
    if m > 1 and np.any(np.all(graph.edges[1:] == graph.edges[:-1], axis=1)):
        raise DomainError("duplicate edge")

    rows = np.repeat(np.arange(n, dtype=np.int64), graph.degrees)
    ends = graph.edges[graph.adj_edge]
    expected = np.stack([np.minimum(rows, graph.adj_vertex), np.maximum(rows, graph.adj_vertex)], axis=1)
    if not np.array_equal(ends, expected):
        raise DomainError("adjacency entry does not match its edge")
    if np.bincount(graph.adj_edge, minlength=m).tolist() != [2] * m:
        raise DomainError("adjacency is not symmetric")

    same_row = rows[1:] == rows[:-1]
    if np.any(same_row & (np.diff(graph.adj_vertex) <= 0)):
        raise DomainError("adjacency list not strictly ascending")


def write_edge_list(stream: TextIO, pairs: ArrayLike, header: Optional[str] = None) -> None:
    if header:
        for line in header.splitlines():
            stream.write(f"# {line}\n")
    for u, v in np.asarray(pairs).reshape(-1, 2).tolist():
        stream.write(f"{u} {v}\n")


def write_graph_cache(path: Union[str, Path], graph: Graph) -> None:
    with open(path, "wb") as f:
        write_header(f, GRAPH_MAGIC, GRAPH_VERSION, graph.vertex_count, graph.edge_count)
        f.write(graph.edges.astype("<u8").tobytes())


def read_graph_cache(path: Union[str, Path]) -> Graph:
    data = Path(path).read_bytes()
    vertex_count, edge_count = read_header(data, GRAPH_MAGIC, GRAPH_VERSION, path)
    edges = read_pairs(data, edge_count, path).astype(np.int64)
    if edge_count:
        if not np.all(edges[:, 0] < edges[:, 1]) or int(edges.max()) >= vertex_count:
            raise FormatError(f"{path}: cached edges are not canonical")
        if edge_count > 1 and np.any(np.lexsort((edges[:, 1], edges[:, 0])) != np.arange(edge_count)):
            raise FormatError(f"{path}: cached edges are not sorted")
    return from_canonical_edges(edges, vertex_count)


def read_header(data: bytes, magic: bytes, version: int, path) -> Tuple[int, int]:
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    found, found_version, vertex_count, edge_count = _HEADER.unpack_from(data)
    if found != magic:
        raise FormatError(f"{path}: bad magic {found!r}, expected {magic!r}")
    if found_version != version:
        raise FormatError(f"{path}: unsupported version {found_version}")
    return vertex_count, edge_count


def write_header(stream, magic: bytes, version: int, vertex_count: int, edge_count: int) -> None:
    stream.write(_HEADER.pack(magic, version, vertex_count, edge_count))


def read_pairs(data: bytes, edge_count: int, path) -> NDArray[np.uint64]:
    expected = _HEADER.size + 16 * edge_count
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    return np.frombuffer(data, dtype="<u8", count=2 * edge_count, offset=_HEADER.size).reshape(-1, 2)


def sniff_magic(path: Union[str, Path]) -> bytes:
    with open(path, "rb") as f:
        return f.read(4)


def read_graph(path: Union[str, Path]) -> Graph:
    """Load a CPGR cache or a text edge list."""
    if sniff_magic(path) == GRAPH_MAGIC:
        return read_graph_cache(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            graph = canonicalize(parse_edge_list(f))
    except UnicodeDecodeError as e:
        raise FormatError(f"{path}: neither a known binary format nor a text edge list") from e
    logger.info("read %s: |V|=%d |E|=%d", path, graph.vertex_count, graph.edge_count)
    return graph
