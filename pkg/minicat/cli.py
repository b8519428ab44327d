"""Command line interface.

Each subcommand runs one pipeline stage on the artifacts the previous stages left in `--out-dir`;
`pipeline` runs them all. Settings resolve as defaults < `--config` YAML file < flags.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from typing import Any

from minicat.config import RunConfig, resolve_config
from minicat.core.exceptions import MinicatError
from minicat.core.graph import prune_staples
from minicat.core.synth import generate_retail_log, write_products_csv, write_sales_csv
from minicat.pipeline import (
    PruneResult,
    cover_stage,
    graph_stage,
    ingest_stage,
    load_counts,
    load_coverage,
    load_graph,
    load_ingested,
    load_tiles,
    network_table,
    pairs_stage,
    prune_stage,
    report_stage,
    run_pipeline,
    stage,
    stats_stage,
    tiles_stage,
)

__all__ = ("build_parser", "main")

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _thresholds(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, given: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one threshold")
    return values


def _common() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("configuration")
    group.add_argument("--config", help="flat YAML file of settings")
    group.add_argument("--window-days", type=int, help="togetherness window in days (7)")
    group.add_argument("--threshold", dest="threshold_n", type=int, help="minimum togetherness count N (5)")
    group.add_argument("--n-sweep", type=_thresholds, help="thresholds for the statistics table (1,5,10,20)")
    group.add_argument("--staple-percent", type=float, help="share of the GCC pruned as staples (0.05)")
    group.add_argument("--min-component", type=int, help="smallest component kept in G* (5)")
    group.add_argument("--min-tile", type=int, help="smallest tile kept (5)")
    group.add_argument("--cpm-k", type=int, help="clique size of clique percolation (3)")
    group.add_argument("--min-gain", type=int, help="smallest coverage gain worth a tile (1)")
    group.add_argument(
        "--dedup-per-customer",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="count a pair at most once per customer (off)",
    )
    group.add_argument("--top-staples", type=int, help="staples listed in the report (20)")
    group.add_argument("--seed", type=int, help="random seed (0)")
    group.add_argument("--workers", type=int, help="worker threads (machine parallelism)")
    group.add_argument("--out-dir", help="artifact directory (out)")
    group.add_argument("--products", help="products.csv")
    group.add_argument("--sales", help="sales.csv")
    group.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="minicat", description="Mini-categories from retail co-purchase product networks"
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("ingest", "load products.csv and sales.csv, write clean copies and ingest.json"),
        ("pairs", "count co-purchases into pairs.tsv"),
        ("graph", "build the product network: graph.graphml, edges.tsv, graph.dot"),
        ("prune", "remove staples and small components: staples.json, gstar.graphml"),
        ("stats", "network statistics per threshold: stats.json"),
        ("tiles", "extract star, linear and community tiles: tiles.json"),
        ("cover", "select essential tiles: coverage.json"),
        ("report", "assemble report.json, histograms and sample tiles"),
        ("pipeline", "run every stage"),
    ):
        commands.add_parser(name, parents=[common], help=text)
    synth = commands.add_parser("synth", parents=[common], help="write a synthetic products.csv and sales.csv")
    synth.add_argument("--n-events", type=int, default=100_000)
    synth.add_argument("--n-products", type=int, default=2_000)
    synth.add_argument("--n-customers", type=int, default=10_000)
    return parser


def _run_ingest(config: RunConfig, args: argparse.Namespace) -> None:
    ingest_stage(config)


def _run_pairs(config: RunConfig, args: argparse.Namespace) -> None:
    _, log, _ = load_ingested(config)
    pairs_stage(config, log)


def _run_graph(config: RunConfig, args: argparse.Namespace) -> None:
    catalog, log, _ = load_ingested(config)
    graph_stage(config, load_counts(config), catalog, log)


def _run_prune(config: RunConfig, args: argparse.Namespace) -> None:
    prune_stage(config, load_graph(config))


def _run_stats(config: RunConfig, args: argparse.Namespace) -> None:
    catalog, log, _ = load_ingested(config)
    with stage("prune"):
        pruned, _ = prune_staples(load_graph(config), staple_percent=config.staple_percent)
    stats_stage(config, load_counts(config), catalog, log, pruned)


def _run_tiles(config: RunConfig, args: argparse.Namespace) -> None:
    tiles_stage(config, load_graph(config, "gstar"))


def _run_cover(config: RunConfig, args: argparse.Namespace) -> None:
    cover_stage(config, load_tiles(config), load_graph(config, "gstar"))


def _run_report(config: RunConfig, args: argparse.Namespace) -> None:
    catalog, log, summary = load_ingested(config)
    counts = load_counts(config)
    graph = load_graph(config)
    with stage("prune"):
        pruned, staples = prune_staples(graph, staple_percent=config.staple_percent)
    prune = PruneResult(pruned=pruned, gstar=load_graph(config, "gstar"), staples=tuple(staples))
    with stage("stats"):
        table = network_table(config, counts, catalog, log, pruned)
    report_stage(config, catalog, log, summary, graph, table, prune, load_tiles(config), load_coverage(config))


def _run_pipeline(config: RunConfig, args: argparse.Namespace) -> None:
    run_pipeline(config)


def _run_synth(config: RunConfig, args: argparse.Namespace) -> None:
    with stage("synth"):
        catalog, log = generate_retail_log(args.n_events, args.n_products, args.n_customers, seed=config.seed)
        write_products_csv(catalog, config.out_dir / "products.csv")
        write_sales_csv(log, config.out_dir / "sales.csv")


COMMANDS: dict[str, Callable[[RunConfig, argparse.Namespace], None]] = {
    "ingest": _run_ingest,
    "pairs": _run_pairs,
    "graph": _run_graph,
    "prune": _run_prune,
    "stats": _run_stats,
    "tiles": _run_tiles,
    "cover": _run_cover,
    "report": _run_report,
    "pipeline": _run_pipeline,
    "synth": _run_synth,
}

_SETTINGS = (
    "window_days",
    "threshold_n",
    "n_sweep",
    "staple_percent",
    "min_component",
    "min_tile",
    "cpm_k",
    "min_gain",
    "dedup_per_customer",
    "top_staples",
    "seed",
    "workers",
    "out_dir",
    "products",
    "sales",
)


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the `minicat` command

    Returns:
        int: 0 on success, 2 when a stage or the configuration fails
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)
    overrides: dict[str, Any] = {name: getattr(args, name) for name in _SETTINGS}
    try:
        config = resolve_config(args.config, overrides)
        config.out_dir.mkdir(parents=True, exist_ok=True)
    except (MinicatError, OSError) as exc:
        sys.stderr.write(f"minicat: config: {exc}\n")
        return 2
    try:
        COMMANDS[args.command](config, args)
    except MinicatError as exc:
        sys.stderr.write(f"minicat: {exc}\n")
        return 2
    logger.info("minicat %s done", args.command)
    return 0
