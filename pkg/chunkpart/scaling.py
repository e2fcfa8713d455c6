"""Dynamic scaling of a CEP partitioning: migration counts and schedule replay."""
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator

from chunkpart.chunking import cep_assignment, chunk_start, id2p, make_partition_spec
from chunkpart.errors import DomainError
from chunkpart.graph import Graph
from chunkpart.metrics import QualityReport, quality_report, rf_upper_bound
from chunkpart.ordering import Ordering

logger = logging.getLogger(__name__)

_SEPARATORS = re.compile(r"[,\s]+")


def _check_counts(edge_count: int, *ks: int) -> None:
    if edge_count < 0:
        raise DomainError(f"edge count must be >= 0, got {edge_count}")
    for k in ks:
        if k < 1:
            raise DomainError(f"partition count must be >= 1, got k={k}")


def migrated_exact(edge_count: int, k_before: int, k_after: int) -> int:
    """Number of order indices whose partition id differs between the two splits.

    Both boundary sets are merged; within each merged interval the two ids are constant.
    """
    _check_counts(edge_count, k_before, k_after)
    if edge_count == 0 or k_before == k_after:
        return 0
    cuts = sorted(
        {chunk_start(edge_count, k_before, p) for p in range(k_before + 1)}
        | {chunk_start(edge_count, k_after, p) for p in range(k_after + 1)}
    )
    moved = 0
    for start, stop in zip(cuts[:-1], cuts[1:]):
        if start < stop and id2p(edge_count, k_before, start) != id2p(edge_count, k_after, start):
            moved += stop - start
    return moved


def migrated_estimate(edge_count: int, k: int, x: int) -> float:
    """Approximate migration when scaling out from ``k`` to ``k + x`` partitions.

    Scaling in from ``k + x`` to ``k`` costs the same.
    """
    _check_counts(edge_count, k)
    if x < 1:
        raise DomainError(f"scaling step must be >= 1, got x={x}")
    if edge_count == 0:
        return 0.0
    if (k + x) / edge_count > 0.01:
        logger.warning("migration estimate is outside its regime: (k+x)/|E| = %.4f > 0.01", (k + x) / edge_count)
    c = -(-k // x)
    return x * edge_count / (2 * k * (k + x)) * c * (c + 1) + edge_count / k * (k - c)


def migrated_random_expected(edge_count: int, k_before: int, k_after: int) -> float:
    """Expected migration when every edge is reassigned uniformly at random."""
    _check_counts(edge_count, k_before, k_after)
    if k_before == k_after:
        return 0.0
    return edge_count * (1 - 1 / max(k_before, k_after))


class Schedule(BaseModel):
    """Sequence of partition counts visited one after another"""

    ks: List[int] = Field(description="Partition counts in visiting order")

    @field_validator("ks")
    @classmethod
    def _check_ks(cls, ks: List[int]) -> List[int]:
        if not ks:
            raise ValueError("schedule is empty")
        bad = [k for k in ks if k < 1]
        if bad:
            raise ValueError(f"partition counts must be >= 1, got {bad}")
        return ks

    def transitions(self) -> List[Tuple[int, int]]:
        return list(zip(self.ks[:-1], self.ks[1:]))


def make_schedule(ks: List[int]) -> Schedule:
    try:
        return Schedule(ks=ks)
    except ValidationError as e:
        raise DomainError(f"invalid schedule: {e.errors()[0]['msg']}") from e


def parse_schedule(text: str) -> Schedule:
    """Comma, whitespace or newline separated k values; ``#`` starts a comment."""
    lines = [line.split("#", 1)[0] for line in text.splitlines()]
    tokens = [t for t in _SEPARATORS.split(" ".join(lines)) if t]
    try:
        ks = [int(t) for t in tokens]
    except ValueError as e:
        raise DomainError(f"invalid schedule entry ({e})") from e
    return make_schedule(ks)


def scale_out_schedule(start: int, stop: int) -> Schedule:
    """One partition added per step: ``start, start + 1, ..., stop``."""
    if start >= stop:
        raise DomainError(f"scale-out needs start < stop, got {start}:{stop}")
    return make_schedule(list(range(start, stop + 1)))


def scale_in_schedule(start: int, stop: int) -> Schedule:
    """One partition removed per step: ``start, start - 1, ..., stop``."""
    if start <= stop:
        raise DomainError(f"scale-in needs start > stop, got {start}:{stop}")
    return make_schedule(list(range(start, stop - 1, -1)))


class ScalingStep(BaseModel):
    """One k_before -> k_after transition of a schedule"""

    k_before: int
    k_after: int
    x: int = Field(description="|k_after - k_before|")
    direction: str = Field(description="out, in or none")
    migrated_exact: int = Field(description="Edges whose partition id changes")
    migrated_estimate: float = Field(description="Closed-form approximation of migrated_exact")
    migrated_random: float = Field(description="Expected migration of random reassignment")
    rf_bound: Optional[float] = Field(default=None, description="(|V| + |E| + k_after) / |V|")
    quality_after: Optional[QualityReport] = None


class ScheduleTotals(BaseModel):
    steps: int
    migrated_exact: int
    migrated_estimate: float
    migrated_random: float

    @classmethod
    def of(cls, steps: List[ScalingStep]) -> "ScheduleTotals":
        return cls(
            steps=len(steps),
            migrated_exact=sum(s.migrated_exact for s in steps),
            migrated_estimate=sum(s.migrated_estimate for s in steps),
            migrated_random=sum(s.migrated_random for s in steps),
        )


def scaling_step(
    graph: Graph, ordering: Ordering, k_before: int, k_after: int, with_quality: bool = True
) -> ScalingStep:
    m = graph.edge_count
    x = abs(k_after - k_before)
    if x == 0:
        estimate = 0.0
    else:
        estimate = migrated_estimate(m, min(k_before, k_after), x)
    quality = None
    bound = None
    if graph.vertex_count:
        bound = rf_upper_bound(graph.vertex_count, m, k_after)
        if with_quality:
            quality = quality_report(graph, cep_assignment(make_partition_spec(m, k_after), ordering))
    return ScalingStep(
        k_before=k_before,
        k_after=k_after,
        x=x,
        direction="out" if k_after > k_before else "in" if k_after < k_before else "none",
        migrated_exact=migrated_exact(m, k_before, k_after),
        migrated_estimate=estimate,
        migrated_random=migrated_random_expected(m, k_before, k_after),
        rf_bound=bound,
        quality_after=quality,
    )


def run_schedule(
    graph: Graph,
    ordering: Ordering,
    schedule: Schedule,
    k_range: Optional[Tuple[int, int]] = None,
    threads: int = 1,
) -> List[ScalingStep]:
    """Replay ``schedule``; quality is evaluated only for ``k_after`` inside ``k_range`` when given.

    A single-entry schedule has no transitions and yields no steps.
    """
    if ordering.edge_count != graph.edge_count:
        raise DomainError(f"ordering covers {ordering.edge_count} edges, graph has {graph.edge_count}")

    def step(pair: Tuple[int, int]) -> ScalingStep:
        k_before, k_after = pair
        wanted = k_range is None or k_range[0] <= k_after <= k_range[1]
        return scaling_step(graph, ordering, k_before, k_after, with_quality=wanted)

    pairs = schedule.transitions()
    if threads <= 1 or len(pairs) <= 1:
        steps = [step(pair) for pair in pairs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            steps = list(pool.map(step, pairs))
    logger.info("replayed %d scaling steps over %d edges", len(steps), graph.edge_count)
    return steps
