"""Graph edge ordering and chunk-based edge partitioning."""
from chunkpart.assignment import Assignment
from chunkpart.chunking import PartitionSpec, chunk_start, id2p, make_partition_spec
from chunkpart.errors import ChunkPartError, ConfigurationError, DomainError
from chunkpart.graph import Graph, canonicalize, parse_edge_list
from chunkpart.ordering import Ordering, OrderingParams, order_geo_baseline, order_geo_fast, order_trivial

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "ChunkPartError",
    "ConfigurationError",
    "DomainError",
    "Graph",
    "Ordering",
    "OrderingParams",
    "PartitionSpec",
    "canonicalize",
    "chunk_start",
    "id2p",
    "make_partition_spec",
    "order_geo_baseline",
    "order_geo_fast",
    "order_trivial",
    "parse_edge_list",
]
