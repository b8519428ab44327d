"""End-to-end mini-category pipeline.

Stages run in order ingest, pairs, graph, prune, stats, tiles, cover, report. Every stage is a
function that takes the resolved `RunConfig` plus the in-memory results of earlier stages and
writes its own artifacts into `config.out_dir`; the CLI subcommands run the same functions after
reading the earlier artifacts back, so both routes write identical files. A failing stage raises
`StageError` naming it.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any, NamedTuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, NonNegativeInt

from minicat.config import RunConfig
from minicat.core.cooccur import count_copurchases, load_pairs, write_pairs_tsv
from minicat.core.coverage import greedy_cover, overcoverage, sample_tiles, selected_tiles, tile_table
from minicat.core.exceptions import ConfigError, MetricError, MinicatError, StageError
from minicat.core.graph import (
    build_graph,
    component_stats,
    degree_histogram,
    gcc_nodes,
    prune_staples,
    remove_small_components,
)
from minicat.core.ingest import load_products, load_sales, write_products_csv, write_sales_csv
from minicat.core.metrics import fit_power_law, interpurchase_histogram, rank_correlation, size_entropy
from minicat.core.tiles import extract_all
from minicat.core.types import (
    TILE_LABELS,
    CoOccurrenceCounts,
    CoverageSolution,
    EntropyReport,
    Histogram,
    NetworkStats,
    PowerLawFit,
    ProductCatalog,
    SaleLog,
    Staple,
    Tile,
    TileKind,
    TileLabel,
    TileTable,
)
from minicat.core.validator import TileValidator
from minicat.export import (
    histogram_rows,
    read_coverage,
    read_graphml,
    read_json,
    read_tiles,
    write_coverage,
    write_dot,
    write_edges_tsv,
    write_graphml,
    write_histogram_csv,
    write_json,
    write_tile_dot,
    write_tiles,
)

__all__ = (
    "ARTIFACTS",
    "HISTOGRAMS",
    "Distributions",
    "EssentialTile",
    "IngestSummary",
    "NetworkTable",
    "PipelineReport",
    "PruneResult",
    "StapleCutoff",
    "ThresholdRow",
    "TileMember",
    "assemble_report",
    "cover_stage",
    "graph_stage",
    "ingest_stage",
    "load_counts",
    "load_coverage",
    "load_graph",
    "load_ingested",
    "load_tiles",
    "network_table",
    "pairs_stage",
    "prune_stage",
    "report_stage",
    "run_pipeline",
    "stage",
    "stats_stage",
    "tiles_stage",
)

logger = logging.getLogger(__name__)

ARTIFACTS = {
    "products": "products_clean.csv",
    "sales": "sales_clean.csv",
    "ingest": "ingest.json",
    "pairs": "pairs.tsv",
    "graphml": "graph.graphml",
    "edges": "edges.tsv",
    "dot": "graph.dot",
    "staples": "staples.json",
    "gstar": "gstar.graphml",
    "stats": "stats.json",
    "tiles": "tiles.json",
    "coverage": "coverage.json",
    "report": "report.json",
    "samples": "samples",
}
"""Artifact name -> file name inside the output directory"""

HISTOGRAMS = {
    "interpurchase": ("hist_interpurchase.csv", "gap_days", "count"),
    "degree": ("hist_degree.csv", "degree", "nodes"),
    "sales": ("hist_sales.csv", "sales_volume", "products"),
    "overcoverage_before": ("hist_overcoverage_before.csv", "tiles", "nodes"),
    "overcoverage_after": ("hist_overcoverage_after.csv", "tiles", "nodes"),
}


# ---------------------------------------------------------------------------------------
# Report types
# ---------------------------------------------------------------------------------------
class IngestSummary(BaseModel):
    """Load metadata of the raw input files"""

    model_config = ConfigDict(frozen=True)

    products: NonNegativeInt
    excluded_non_material: NonNegativeInt
    excluded_mixed: NonNegativeInt
    sale_events: NonNegativeInt
    returns_dropped: NonNegativeInt
    unknown_dropped: NonNegativeInt
    duplicates_collapsed: NonNegativeInt

    @classmethod
    def of(cls, catalog: ProductCatalog, log: SaleLog) -> IngestSummary:
        return cls(
            products=len(catalog),
            excluded_non_material=catalog.excluded_non_material,
            excluded_mixed=catalog.excluded_mixed,
            sale_events=len(log),
            returns_dropped=log.returns_dropped,
            unknown_dropped=log.unknown_dropped,
            duplicates_collapsed=log.duplicates_collapsed,
        )


class ThresholdRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    threshold_n: int
    stats: NetworkStats


class NetworkTable(BaseModel):
    """Network statistics per threshold, plus the row of the pruned network G* at the configured threshold"""

    model_config = ConfigDict(frozen=True)

    rows: tuple[ThresholdRow, ...]
    pruned: NetworkStats


class StapleCutoff(BaseModel):
    """Staples have degree >= `min_staple_degree`; no remaining GCC node exceeds `max_remaining_degree`"""

    model_config = ConfigDict(frozen=True)

    staple_count: NonNegativeInt
    min_staple_degree: NonNegativeInt | None = None
    max_remaining_degree: NonNegativeInt | None = None


class TileMember(BaseModel):
    model_config = ConfigDict(frozen=True)

    product_id: str
    description: str


class EssentialTile(BaseModel):
    """A selected tile with its member descriptions. A star lists its center first"""

    model_config = ConfigDict(frozen=True)

    tile_id: str
    kind: TileKind
    label: TileLabel
    gain: int
    size: int
    members: tuple[TileMember, ...]


class Distributions(BaseModel):
    """Degree and sales-volume distributions of the product network at the configured threshold"""

    model_config = ConfigDict(frozen=True)

    degree_fit: PowerLawFit | None = None
    sales_fit: PowerLawFit | None = None
    degree_sales_spearman: float | None = None


class PipelineReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: dict[str, Any]
    ingest: IngestSummary
    network_stats: tuple[ThresholdRow, ...]
    pruned_stats: NetworkStats
    staple_cutoff: StapleCutoff
    staples: tuple[Staple, ...]
    tile_table: TileTable
    essential_tiles: tuple[EssentialTile, ...]
    entropy: dict[str, EntropyReport | None]
    distributions: Distributions
    overcoverage_before: dict[str, int]
    overcoverage_after: dict[str, int]
    interpurchase: dict[str, int]
    samples: dict[str, list[str]]


class PruneResult(NamedTuple):
    """Output of the prune stage: G after staple removal, G* after small-component removal"""

    pruned: nx.Graph
    gstar: nx.Graph
    staples: tuple[Staple, ...]


# ---------------------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------------------
@contextmanager
def stage(name: str) -> Iterator[None]:
    """Log a stage and convert its failures into `StageError`"""
    logger.info("Stage %s started", name)
    try:
        yield
    except StageError:
        raise
    except (MinicatError, ValueError, KeyError, OSError) as exc:
        logger.error("Stage %s failed: %s", name, exc)
        raise StageError(name, exc) from exc
    logger.info("Stage %s finished", name)


def _path(config: RunConfig, artifact: str) -> Path:
    return config.out_dir / ARTIFACTS[artifact]


def ingest_stage(config: RunConfig) -> tuple[ProductCatalog, SaleLog, IngestSummary]:
    """Load the raw catalog and sales log, write their clean copies and the load metadata"""
    with stage("ingest"):
        if config.products is None or config.sales is None:
            raise ConfigError("Both a products file and a sales file are needed")
        catalog = load_products(config.products)
        log = load_sales(config.sales, catalog)
        summary = IngestSummary.of(catalog, log)
        write_products_csv(catalog, _path(config, "products"))
        write_sales_csv(log, _path(config, "sales"))
        write_json(summary.model_dump(mode="json"), _path(config, "ingest"))
    return catalog, log, summary


def load_ingested(config: RunConfig) -> tuple[ProductCatalog, SaleLog, IngestSummary]:
    """Read back what `ingest_stage` wrote"""
    with stage("ingest"):
        catalog = load_products(_path(config, "products"))
        log = load_sales(_path(config, "sales"), catalog)
        summary = IngestSummary.model_validate(read_json(_path(config, "ingest")))
    return catalog, log, summary


def pairs_stage(config: RunConfig, log: SaleLog) -> CoOccurrenceCounts:
    with stage("pairs"):
        counts = count_copurchases(
            log,
            window_days=config.window_days,
            dedup_per_customer=config.dedup_per_customer,
            workers=config.workers,
        )
        write_pairs_tsv(counts, _path(config, "pairs"))
    return counts


def load_counts(config: RunConfig) -> CoOccurrenceCounts:
    with stage("pairs"):
        return load_pairs(_path(config, "pairs"), config.window_days, config.dedup_per_customer)


def graph_stage(config: RunConfig, counts: CoOccurrenceCounts, catalog: ProductCatalog, log: SaleLog) -> nx.Graph:
    with stage("graph"):
        graph = build_graph(counts, catalog, log, threshold_n=config.threshold_n)
        write_graphml(graph, _path(config, "graphml"))
        write_edges_tsv(graph, _path(config, "edges"))
        write_dot(graph, _path(config, "dot"))
    return graph


def load_graph(config: RunConfig, artifact: str = "graphml") -> nx.Graph:
    with stage("graph" if artifact == "graphml" else "prune"):
        return read_graphml(_path(config, artifact))


def prune_stage(config: RunConfig, graph: nx.Graph) -> PruneResult:
    """Remove staples and small components; write the staples and G*"""
    with stage("prune"):
        pruned, staples = prune_staples(graph, staple_percent=config.staple_percent)
        gstar = remove_small_components(pruned, min_component=config.min_component)
        write_json([staple.model_dump(mode="json") for staple in staples], _path(config, "staples"))
        write_graphml(gstar, _path(config, "gstar"))
    return PruneResult(pruned=pruned, gstar=gstar, staples=tuple(staples))


def network_table(
    config: RunConfig, counts: CoOccurrenceCounts, catalog: ProductCatalog, log: SaleLog, pruned: nx.Graph
) -> NetworkTable:
    """Statistics of the network at every sweep threshold and of the pruned network"""
    rows = tuple(
        ThresholdRow(threshold_n=n, stats=component_stats(build_graph(counts, catalog, log, threshold_n=n)))
        for n in config.thresholds
    )
    return NetworkTable(rows=rows, pruned=component_stats(pruned))


def stats_stage(
    config: RunConfig, counts: CoOccurrenceCounts, catalog: ProductCatalog, log: SaleLog, pruned: nx.Graph
) -> NetworkTable:
    with stage("stats"):
        table = network_table(config, counts, catalog, log, pruned)
        write_json(table.model_dump(mode="json"), _path(config, "stats"))
    return table


def tiles_stage(config: RunConfig, gstar: nx.Graph) -> list[Tile]:
    with stage("tiles"):
        tiles = extract_all(gstar, k=config.cpm_k, min_size=config.min_tile, workers=config.workers)
        TileValidator.check_all(tiles, gstar, min_size=config.min_tile)
        write_tiles(tiles, _path(config, "tiles"))
    return tiles


def load_tiles(config: RunConfig) -> list[Tile]:
    with stage("tiles"):
        return read_tiles(_path(config, "tiles"))


def cover_stage(config: RunConfig, tiles: list[Tile], gstar: nx.Graph) -> CoverageSolution:
    with stage("cover"):
        solution = greedy_cover(tiles, gstar.nodes, min_gain=config.min_gain)
        write_coverage(solution, tiles, _path(config, "coverage"))
    return solution


def load_coverage(config: RunConfig) -> CoverageSolution:
    with stage("cover"):
        return read_coverage(_path(config, "coverage"))


# ---------------------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------------------
def _entropy(sizes: list[int]) -> EntropyReport | None:
    return size_entropy(sizes) if sizes else None


def _fit(histogram: Histogram) -> PowerLawFit | None:
    try:
        return fit_power_law(histogram)
    except MetricError as exc:
        logger.warning("No power-law fit: %s", exc)
        return None


def _spearman(graph: nx.Graph) -> float | None:
    nodes = [node for node, degree in graph.degree() if degree > 0]
    try:
        return rank_correlation(
            [graph.degree(node) for node in nodes], [graph.nodes[node]["sales_volume"] for node in nodes]
        )
    except MetricError as exc:
        logger.warning("No degree/sales correlation: %s", exc)
        return None


def _sales_histogram(graph: nx.Graph) -> Histogram:
    counts = Counter(int(volume) for _, volume in graph.nodes(data="sales_volume"))
    return {volume: counts[volume] for volume in sorted(counts)}


def _staple_cutoff(graph: nx.Graph, staples: tuple[Staple, ...]) -> StapleCutoff:
    if not staples:
        return StapleCutoff(staple_count=0)
    removed = {staple.product_id for staple in staples}
    remaining = [graph.degree(node) for node in gcc_nodes(graph) if node not in removed]
    return StapleCutoff(
        staple_count=len(staples),
        min_staple_degree=min(staple.degree for staple in staples),
        max_remaining_degree=max(remaining) if remaining else None,
    )


def _essential(tile: Tile, gain: int, graph: nx.Graph) -> EssentialTile:
    order = [tile.center, *(node for node in tile.members if node != tile.center)] if tile.center else tile.members
    return EssentialTile(
        tile_id=tile.tile_id,
        kind=tile.kind,
        label=tile.label or TILE_LABELS[tile.kind],
        gain=gain,
        size=tile.size,
        members=tuple(
            TileMember(product_id=node, description=str(graph.nodes[node].get("description", ""))) for node in order
        ),
    )


def assemble_report(
    config: RunConfig,
    catalog: ProductCatalog,
    log: SaleLog,
    summary: IngestSummary,
    graph: nx.Graph,
    table: NetworkTable,
    prune: PruneResult,
    tiles: list[Tile],
    solution: CoverageSolution,
) -> tuple[PipelineReport, dict[str, Histogram], dict[TileKind, list[Tile]]]:
    """Build the run report from stage results

    Args:
        config (RunConfig): resolved configuration
        catalog (ProductCatalog): material catalog
        log (SaleLog): normalized sales
        summary (IngestSummary): raw-file load metadata
        graph (nx.Graph): product network at `config.threshold_n`
        table (NetworkTable): network statistics
        prune (PruneResult): staples and G*
        tiles (list[Tile]): all extracted tiles
        solution (CoverageSolution): essential tiles

    Returns:
        tuple[PipelineReport, dict[str, Histogram], dict[TileKind, list[Tile]]]: the report, the
            histograms exported next to it, and the sampled essential tiles
    """
    gstar = prune.gstar
    essential = selected_tiles(tiles, solution)
    histograms: dict[str, Histogram] = {
        "interpurchase": interpurchase_histogram(log),
        "degree": degree_histogram(graph),
        "sales": _sales_histogram(graph),
        "overcoverage_before": overcoverage(tiles, gstar.nodes),
        "overcoverage_after": overcoverage(essential, gstar.nodes),
    }
    samples = sample_tiles(essential, seed=config.seed)
    report = PipelineReport(
        config=config.echo(),
        ingest=summary,
        network_stats=table.rows,
        pruned_stats=table.pruned,
        staple_cutoff=_staple_cutoff(graph, prune.staples),
        staples=prune.staples[: config.top_staples],
        tile_table=tile_table(tiles, solution, gstar.nodes),
        essential_tiles=tuple(
            _essential(tile, gain, gstar) for tile, gain in zip(essential, solution.gains, strict=True)
        ),
        entropy={
            "group": _entropy(catalog.hierarchy_sizes("group")),
            "class": _entropy(catalog.hierarchy_sizes("class")),
            "subcategory": _entropy(catalog.hierarchy_sizes("subcategory")),
            "essential_tiles": _entropy([tile.size for tile in essential]),
        },
        distributions=Distributions(
            degree_fit=_fit(histograms["degree"]),
            sales_fit=_fit(histograms["sales"]),
            degree_sales_spearman=_spearman(graph),
        ),
        overcoverage_before=histogram_rows(histograms["overcoverage_before"]),
        overcoverage_after=histogram_rows(histograms["overcoverage_after"]),
        interpurchase=histogram_rows(histograms["interpurchase"]),
        samples={kind.value: [tile.tile_id for tile in picked] for kind, picked in samples.items()},
    )
    return report, histograms, samples


def report_stage(
    config: RunConfig,
    catalog: ProductCatalog,
    log: SaleLog,
    summary: IngestSummary,
    graph: nx.Graph,
    table: NetworkTable,
    prune: PruneResult,
    tiles: list[Tile],
    solution: CoverageSolution,
) -> PipelineReport:
    """Assemble the report and write it with the histogram CSVs and the sample tile DOT files"""
    with stage("report"):
        report, histograms, samples = assemble_report(
            config, catalog, log, summary, graph, table, prune, tiles, solution
        )
        write_json(report.model_dump(mode="json"), _path(config, "report"))
        for name, (file_name, value_name, count_name) in HISTOGRAMS.items():
            write_histogram_csv(histograms[name], config.out_dir / file_name, value_name, count_name)
        sample_dir = _path(config, "samples")
        sample_dir.mkdir(parents=True, exist_ok=True)
        for picked in samples.values():
            for tile in picked:
                write_tile_dot(tile, prune.gstar, sample_dir / f"{tile.tile_id}.dot")
    return report


def run_pipeline(config: RunConfig) -> PipelineReport:
    """Run every stage on `config.products` and `config.sales`, writing all artifacts to `config.out_dir`

    Args:
        config (RunConfig): resolved configuration with both input paths set

    Raises:
        StageError: naming the first stage that failed

    Returns:
        PipelineReport: the report also written to `report.json`
    """
    with stage("setup"):
        config.out_dir.mkdir(parents=True, exist_ok=True)
    catalog, log, summary = ingest_stage(config)
    counts = pairs_stage(config, log)
    graph = graph_stage(config, counts, catalog, log)
    prune = prune_stage(config, graph)
    table = stats_stage(config, counts, catalog, log, prune.pruned)
    tiles = tiles_stage(config, prune.gstar)
    solution = cover_stage(config, tiles, prune.gstar)
    report = report_stage(config, catalog, log, summary, graph, table, prune, tiles, solution)
    logger.info(
        "Pipeline finished: %d essential tiles out of %d, report in %s",
        len(report.essential_tiles),
        len(tiles),
        _path(config, "report"),
    )
    return report
