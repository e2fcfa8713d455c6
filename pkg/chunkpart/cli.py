"""Command-line front end: gen, order, partition, evaluate, scale and bound."""
import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, model_validator

from chunkpart.assignment import read_assignment, write_assignment
from chunkpart.chunking import cep_assignment, make_partition_spec, query_latency
from chunkpart.config import DEFAULT_K_MAX, DEFAULT_K_MIN, configure_logging, get_settings, validate_env
from chunkpart.errors import ChunkPartError, DomainError
from chunkpart.graph import Graph, canonicalize, read_graph, sniff_magic, write_edge_list, write_graph_cache
from chunkpart.graphgen import RmatParams, gen_er, gen_rmat
from chunkpart.hashing import PARTITIONERS
from chunkpart.metrics import objective_def4, powerlaw_bound, quality_report, quality_sweep, rf_upper_bound
from chunkpart.ordering import (
    GREEDY_ALGORITHMS,
    ORDERED_MAGIC,
    ORDERING_ALGORITHMS,
    Ordering,
    OrderingParams,
    read_ordered_edges,
    write_ordered_edges,
)
from chunkpart.reports import QUALITY_COLUMNS, STEP_COLUMNS, csv_report, emit, json_report, quality_row, step_row
from chunkpart.scaling import (
    ScheduleTotals,
    make_schedule,
    parse_schedule,
    run_schedule,
    scale_in_schedule,
    scale_out_schedule,
)

logger = logging.getLogger(__name__)

DEFAULT_K_LIST = "4,8,16,32,64,128"
EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class RunConfig(BaseModel):
    """Flags shared by the subcommands"""

    command: str
    input: Optional[Path] = None
    out: Optional[Path] = None
    k: Optional[int] = Field(default=None, ge=1)
    k_list: Optional[List[int]] = None
    k_min: int = Field(default=DEFAULT_K_MIN, ge=1)
    k_max: int = Field(default=DEFAULT_K_MAX, ge=1)
    delta: Optional[int] = Field(default=None, ge=0)
    bounded_delta: bool = False
    algo: Optional[str] = None
    method: Optional[str] = None
    seed: int = Field(default=0, ge=0, lt=1 << 64)
    format: str = "json"

    @model_validator(mode="after")
    def _check_flags(self) -> "RunConfig":
        if self.k_min > self.k_max:
            raise ValueError(f"--kmin {self.k_min} exceeds --kmax {self.k_max}")
        greedy = self.algo in GREEDY_ALGORITHMS
        if (self.delta is not None or self.bounded_delta) and not greedy:
            raise ValueError("--delta and --bounded-delta only apply to greedy orderings")
        if self.delta is not None and self.bounded_delta:
            raise ValueError("--delta and --bounded-delta are mutually exclusive")
        if self.k_list is not None and any(k < 1 for k in self.k_list):
            raise ValueError("--k-list entries must be >= 1")
        return self

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        values = {name: getattr(args, name) for name in cls.model_fields if getattr(args, name, None) is not None}
        return cls(**values)


def _say(message: str) -> None:
    print(message, file=sys.stderr)


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated integer list, got {text!r}") from None


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated number list, got {text!r}") from None


def _k_span(text: str) -> Tuple[int, int]:
    try:
        start, stop = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP, got {text!r}") from None
    return start, stop


def load_input(path: Path) -> Tuple[Graph, Optional[Ordering]]:
    """Ordered edges (CPEO), a graph cache (CPGR) or a text edge list."""
    if sniff_magic(path) == ORDERED_MAGIC:
        return read_ordered_edges(path)
    return read_graph(path), None


def _require_ordering(ordering: Optional[Ordering], path: Path) -> Ordering:
    if ordering is None:
        raise DomainError(f"{path} holds no edge ordering; run `chunkpart order` first")
    return ordering


def cmd_gen(args: argparse.Namespace, config: RunConfig) -> int:
    started = time.perf_counter()
    if args.generator == "rmat":
        params = RmatParams(
            scale=args.scale, edge_factor=args.edge_factor, a=args.a, b=args.b, c=args.c, d=args.d, seed=config.seed
        )
        pairs = gen_rmat(params)
        header = f"rmat scale={params.scale} edge_factor={params.edge_factor} seed={params.seed}"
    else:
        pairs = gen_er(args.n, args.m, config.seed)
        header = f"er n={args.n} m={args.m} seed={config.seed}"

    graph = canonicalize(pairs)
    if config.out is not None and config.out.suffix == ".cpgr":
        write_graph_cache(config.out, graph)
    elif config.out is None:
        write_edge_list(sys.stdout, pairs, header)
    else:
        with open(config.out, "w", encoding="utf-8") as f:
            write_edge_list(f, pairs, header)

    _say(f"🧪 Generated {pairs.shape[0]} samples in {time.perf_counter() - started:.3f}s")
    _say(f"📊 Realized |V|={graph.vertex_count} |E|={graph.edge_count}")
    return EXIT_OK


def cmd_order(args: argparse.Namespace, config: RunConfig) -> int:
    graph, _ = load_input(config.input)
    params = OrderingParams.for_graph(
        graph.edge_count,
        k_min=config.k_min,
        k_max=config.k_max,
        delta=config.delta,
        seed=config.seed,
        deterministic_restart=args.deterministic_restart,
        bounded=config.bounded_delta,
    )
    started = time.perf_counter()
    ordering = ORDERING_ALGORITHMS[config.algo](graph, params)
    elapsed = time.perf_counter() - started
    write_ordered_edges(config.out, graph, ordering)

    _say(f"⏱️  Ordered with {config.algo} in {elapsed:.3f}s")
    _say(f"📊 |V|={graph.vertex_count} |E|={graph.edge_count}")
    _say(f"💾 Wrote {config.out}")
    return EXIT_OK


def cmd_partition(args: argparse.Namespace, config: RunConfig) -> int:
    graph, ordering = load_input(config.input)
    k = config.k
    if config.method == "cep":
        ordering = _require_ordering(ordering, config.input)
        spec = make_partition_spec(graph.edge_count, k)
        latency = query_latency(graph.edge_count, k, calls=args.bench) if args.bench else None
        if args.assignment:
            write_assignment(args.assignment, cep_assignment(spec, ordering))
        if config.format == "csv":
            rows = [{"partition": p, "start": start, "stop": stop} for p, (start, stop) in enumerate(spec.ranges)]
            emit(csv_report(rows, ["partition", "start", "stop"]), config.out)
        else:
            emit(json_report("partition", method="cep", partition=spec.to_record(), latency_ns=latency), config.out)
        if latency is not None:
            _say(f"⏱️  Median partition query: {latency:.1f} ns (|E|={graph.edge_count}, k={k})")
        return EXIT_OK

    if not args.assignment:
        raise DomainError(f"--method {config.method} materialises an assignment; pass --assignment PATH")
    assignment = PARTITIONERS[config.method](graph, k, args.salt)
    write_assignment(args.assignment, assignment)
    sizes = assignment.sizes().tolist()
    if config.format == "csv":
        emit(csv_report([{"partition": p, "edges": n} for p, n in enumerate(sizes)]), config.out)
    else:
        emit(json_report("partition", method=config.method, k=k, edge_count=graph.edge_count, sizes=sizes), config.out)
    _say(f"💾 Wrote {args.assignment}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, config: RunConfig) -> int:
    graph, ordering = load_input(config.input)
    objective = None
    if args.assignment:
        assignment = read_assignment(args.assignment, k=config.k or 0)
        reports = [quality_report(graph, assignment)]
    else:
        ordering = _require_ordering(ordering, config.input)
        ks = config.k_list or ([config.k] if config.k else _int_list(DEFAULT_K_LIST))
        reports = quality_sweep(graph, ordering, ks, threads=get_settings().threads)
        params = OrderingParams.for_graph(graph.edge_count, k_min=config.k_min, k_max=config.k_max)
        objective = objective_def4(graph, ordering, params.k_min, params.k_max)

    if config.format == "csv":
        emit(csv_report([quality_row(r) for r in reports], QUALITY_COLUMNS), config.out)
    else:
        document = json_report(
            "evaluate",
            vertex_count=graph.vertex_count,
            edge_count=graph.edge_count,
            reports=reports,
            objective=objective,
        )
        emit(document, config.out)
    for r in reports:
        _say(f"📈 k={r.k} rf={r.rf:.4f} eb={r.eb:.4f} vb={r.vb:.4f}")
    return EXIT_OK


def cmd_scale(args: argparse.Namespace, config: RunConfig) -> int:
    graph, ordering = load_input(config.input)
    ordering = _require_ordering(ordering, config.input)
    if args.schedule is not None:
        schedule = make_schedule(args.schedule)
    elif args.schedule_file is not None:
        schedule = parse_schedule(Path(args.schedule_file).read_text(encoding="utf-8"))
    elif args.scale_out is not None:
        schedule = scale_out_schedule(*args.scale_out)
    else:
        schedule = scale_in_schedule(*args.scale_in)
    if len(schedule.ks) < 2:
        raise DomainError("a scaling schedule needs at least two partition counts")

    steps = run_schedule(graph, ordering, schedule, threads=get_settings().threads)
    totals = ScheduleTotals.of(steps)
    if config.format == "csv":
        emit(csv_report([step_row(s) for s in steps], STEP_COLUMNS), config.out)
    else:
        document = json_report("scale", edge_count=graph.edge_count, schedule=schedule.ks, steps=steps, totals=totals)
        emit(document, config.out)
    _say(
        f"🔁 {totals.steps} steps: migrated {totals.migrated_exact} edges "
        f"(estimate {totals.migrated_estimate:.1f}, random {totals.migrated_random:.1f})"
    )
    return EXIT_OK


def cmd_bound(args: argparse.Namespace, config: RunConfig) -> int:
    graph_args = (args.vertices, args.edges, config.k)
    if not args.alphas and None in graph_args:
        raise DomainError("pass --alphas, or all of --vertices, --edges and --k")
    rows = []
    for alpha in args.alphas or []:
        rows.append({"mode": "powerlaw", "alpha": alpha, "bound": powerlaw_bound(alpha)})
    if None not in graph_args:
        rows.append(
            {
                "mode": "graph",
                "vertices": args.vertices,
                "edges": args.edges,
                "k": config.k,
                "bound": rf_upper_bound(*graph_args),
            }
        )

    if config.format == "csv":
        emit(csv_report(rows, ["mode", "alpha", "vertices", "edges", "k", "bound"]), config.out)
    else:
        emit(json_report("bound", bounds=rows), config.out)
    for row in rows:
        _say(f"📐 {row['mode']}: {row['bound']:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chunkpart", description="Edge ordering and chunk-based edge partitioning")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
        if needs_input:
            p.add_argument("input", type=Path, help="CPEO ordered edges, CPGR cache or text edge list")
        p.add_argument("--out", type=Path, help="Output path (default: stdout)")
        p.add_argument("--format", choices=["json", "csv"], default="json", help="Report format")
        p.add_argument("--seed", type=int, help="Seed of every random choice")

    p = sub.add_parser("gen", help="Generate a synthetic graph")
    p.add_argument("generator", choices=["rmat", "er"])
    common(p, needs_input=False)
    p.add_argument("--scale", type=int, default=10, help="RMAT: log2 vertex count")
    p.add_argument("--edge-factor", type=int, default=16, help="RMAT: samples per vertex")
    p.add_argument("--a", type=float, default=0.57)
    p.add_argument("--b", type=float, default=0.19)
    p.add_argument("--c", type=float, default=0.19)
    p.add_argument("--d", type=float, default=0.05)
    p.add_argument("--n", type=int, default=0, help="ER: vertex count")
    p.add_argument("--m", type=int, default=0, help="ER: edge count")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("order", help="Compute an edge ordering")
    common(p)
    p.add_argument("--algo", choices=sorted(ORDERING_ALGORITHMS), default="geo")
    p.add_argument("--kmin", dest="k_min", type=int, help=f"Smallest k optimised for (default {DEFAULT_K_MIN})")
    p.add_argument("--kmax", dest="k_max", type=int, help=f"Largest k optimised for (default {DEFAULT_K_MAX})")
    p.add_argument("--delta", type=int, help="Two-hop window (default |E| // kmax)")
    p.add_argument("--bounded-delta", action="store_true", default=None, help="Use |E| // kmax - 1 as the window")
    p.add_argument("--deterministic-restart", action="store_true", help="Restart from the lowest-id vertex")
    p.set_defaults(handler=cmd_order)

    p = sub.add_parser("partition", help="Split into k partitions")
    common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=["cep", *PARTITIONERS], default="cep")
    p.add_argument("--salt", type=int, default=0, help="hash1d salt")
    p.add_argument("--assignment", type=Path, help="Write the per-edge assignment (.cpas binary, else CSV)")
    p.add_argument("--bench", type=int, default=0, metavar="N", help="Time N partition queries")
    p.set_defaults(handler=cmd_partition)

    p = sub.add_parser("evaluate", help="Report partition quality")
    common(p)
    p.add_argument("--assignment", type=Path, help="Evaluate this assignment instead of CEP splits")
    p.add_argument("--k", type=int, help="Single k (or the k of a CSV assignment)")
    p.add_argument(
        "--k-list", dest="k_list", type=_int_list, help=f"Comma separated k values (default {DEFAULT_K_LIST})"
    )
    p.add_argument("--kmin", dest="k_min", type=int, help="Objective range start")
    p.add_argument("--kmax", dest="k_max", type=int, help="Objective range end")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("scale", help="Replay a scaling schedule")
    common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--schedule", type=_int_list, help="Comma separated k values")
    group.add_argument("--schedule-file", dest="schedule_file", help="One k per line")
    group.add_argument("--scale-out", dest="scale_out", type=_k_span, metavar="START:STOP")
    group.add_argument("--scale-in", dest="scale_in", type=_k_span, metavar="START:STOP")
    p.set_defaults(handler=cmd_scale)

    p = sub.add_parser("bound", help="Replication factor upper bounds")
    common(p, needs_input=False)
    p.add_argument("--alphas", type=_float_list, help="Power-law exponents, each > 2")
    p.add_argument("--vertices", type=int)
    p.add_argument("--edges", type=int)
    p.add_argument("--k", type=int)
    p.set_defaults(handler=cmd_bound)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        validate_env()
        level = {0: None, 1: "INFO"}.get(args.verbose, "DEBUG")
        configure_logging(level)
        config = RunConfig.from_args(args)
        if args.command == "order" and config.out is None:
            raise DomainError("order writes a binary file; pass --out PATH")
        return args.handler(args, config)
    except (ChunkPartError, ValidationError, OSError) as e:
        _say(f"❌ {e}")
        return EXIT_USAGE
    except Exception as e:
        logger.debug("internal error", exc_info=True)
        _say(f"💥 Internal error: {e}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
