from pathlib import Path

import pytest

from minicat.cli import main
from minicat.config import RunConfig
from minicat.core.exceptions import StageError
from minicat.core.ingest import load_products, load_sales
from minicat.core.synth import (
    generate_planted_graph,
    generate_retail_log,
    generate_transactions,
    write_products_csv,
    write_sales_csv,
)
from minicat.core.types import PlantSpec, ProductCatalog, ProductRecord, TileKind
from minicat.export import read_coverage, read_json, read_tiles
from minicat.pipeline import ARTIFACTS, HISTOGRAMS, PipelineReport, run_pipeline

STAGES = ["ingest", "pairs", "graph", "prune", "stats", "tiles", "cover", "report"]


@pytest.fixture(scope="module")
def inputs(tmp_path_factory: pytest.TempPathFactory) -> tuple[Path, Path]:
    root = tmp_path_factory.mktemp("inputs")
    catalog, log = generate_retail_log(20_000, 300, 1_000, seed=5, n_days=120)
    write_products_csv(catalog, root / "products.csv")
    write_sales_csv(log, root / "sales.csv")
    return root / "products.csv", root / "sales.csv"


def config_for(inputs: tuple[Path, Path], out_dir: Path, **settings: object) -> RunConfig:
    products, sales = inputs
    return RunConfig.model_validate({"products": products, "sales": sales, "out_dir": out_dir, **settings})


def snapshot(directory: Path) -> dict[str, bytes]:
    return {str(path.relative_to(directory)): path.read_bytes() for path in sorted(directory.rglob("*")) if path.is_file()}


def test_run_pipeline(inputs: tuple[Path, Path], tmp_path: Path) -> None:
    config = config_for(inputs, tmp_path, workers=2)
    report = run_pipeline(config)
    for name in ARTIFACTS.values():
        assert (tmp_path / name).exists(), name
    for file_name, _, _ in HISTOGRAMS.values():
        assert (tmp_path / file_name).exists(), file_name

    written = read_json(tmp_path / "report.json")
    assert written["ingest"] == report.ingest.model_dump(mode="json")
    assert list(written) == list(PipelineReport.model_fields)
    assert report.config["threshold_n"] == 5
    assert "workers" not in report.config
    assert [row.threshold_n for row in report.network_stats] == [1, 5, 10, 20]
    edges = [row.stats.edges for row in report.network_stats]
    assert edges == sorted(edges, reverse=True)
    assert report.ingest.sale_events > 0

    tiles = read_tiles(tmp_path / "tiles.json")
    solution = read_coverage(tmp_path / "coverage.json")
    assert len(report.essential_tiles) == len(solution.selected)
    assert report.tile_table.total_before.count == len(tiles)
    assert report.tile_table.mean_tiles_per_node_after <= report.tile_table.mean_tiles_per_node_before
    assert all(tile.size >= config.min_tile for tile in tiles)
    for essential in report.essential_tiles:
        if essential.kind == TileKind.STAR:
            assert essential.members[0].product_id in {t.center for t in tiles if t.tile_id == essential.tile_id}
    assert len(report.staples) <= config.top_staples
    samples = [tid for picked in report.samples.values() for tid in picked]
    assert sorted(path.stem for path in (tmp_path / "samples").glob("*.dot")) == sorted(samples)


def test_workers_do_not_change_results(inputs: tuple[Path, Path], tmp_path: Path) -> None:
    run_pipeline(config_for(inputs, tmp_path / "one", workers=1))
    run_pipeline(config_for(inputs, tmp_path / "eight", workers=8))
    assert snapshot(tmp_path / "one") == snapshot(tmp_path / "eight")


def test_cli_stages_match_pipeline(inputs: tuple[Path, Path], tmp_path: Path) -> None:
    products, sales = inputs
    assert main(["pipeline", "--products", str(products), "--sales", str(sales), "--out-dir", str(tmp_path / "a")]) == 0
    assert main(["ingest", "--products", str(products), "--sales", str(sales), "--out-dir", str(tmp_path / "b")]) == 0
    for name in STAGES[1:]:
        assert main([name, "--out-dir", str(tmp_path / "b")]) == 0, name
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")


def test_flags_reach_the_report(inputs: tuple[Path, Path], tmp_path: Path) -> None:
    products, sales = inputs
    argv = ["pipeline", "--products", str(products), "--sales", str(sales), "--out-dir", str(tmp_path)]
    assert main([*argv, "--threshold", "3", "--n-sweep", "2,4", "--no-dedup-per-customer", "--cpm-k", "4"]) == 0
    report = read_json(tmp_path / "report.json")
    assert report["config"]["threshold_n"] == 3
    assert report["config"]["cpm_k"] == 4
    assert [row["threshold_n"] for row in report["network_stats"]] == [2, 3, 4]


def test_threshold_above_every_count(inputs: tuple[Path, Path], tmp_path: Path) -> None:
    report = run_pipeline(config_for(inputs, tmp_path, threshold_n=10**6, n_sweep=(10**6,)))
    assert report.network_stats[0].stats.edges == 0
    assert report.essential_tiles == ()
    assert report.entropy["essential_tiles"] is None
    assert report.distributions.degree_fit is None
    assert report.distributions.degree_sales_spearman is None
    assert report.staples == ()


def test_missing_inputs_name_the_stage(tmp_path: Path) -> None:
    with pytest.raises(StageError) as info:
        run_pipeline(RunConfig(out_dir=tmp_path))
    assert info.value.stage == "ingest"


def test_later_stage_without_artifacts(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["tiles", "--out-dir", str(tmp_path)]) == 2
    assert capsys.readouterr().err.startswith("minicat: prune:")


def test_bad_config_exits_with_two(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    config = tmp_path / "minicat.yaml"
    config.write_text("staple_percent: 3\n")
    assert main(["pipeline", "--config", str(config), "--out-dir", str(tmp_path)]) == 2
    assert "staple_percent" in capsys.readouterr().err


def test_synth_command(tmp_path: Path) -> None:
    argv = ["synth", "--n-events", "2000", "--n-products", "100", "--n-customers", "200", "--seed", "7"]
    assert main([*argv, "--out-dir", str(tmp_path)]) == 0
    catalog = load_products(tmp_path / "products.csv")
    assert len(catalog) == 100
    assert 0 < len(load_sales(tmp_path / "sales.csv", catalog)) <= 2000


@pytest.mark.slow
def test_desk_scale_run(tmp_path: Path) -> None:
    catalog, log = generate_retail_log(1_000_000, 20_000, 100_000, seed=1)
    write_products_csv(catalog, tmp_path / "products.csv")
    write_sales_csv(log, tmp_path / "sales.csv")
    report = run_pipeline(config_for((tmp_path / "products.csv", tmp_path / "sales.csv"), tmp_path / "out"))
    assert report.ingest.sale_events == len(log)
    assert report.tile_table.total_after.count <= report.tile_table.total_before.count


def test_planted_structures_survive_the_pipeline(tmp_path: Path) -> None:
    graph, truth = generate_planted_graph(
        PlantSpec(star_specs=[(5, 1), (4, 0), (7, 2)], clique_specs=[5, 6], path_specs=[6, 9], seed=3)
    )
    catalog = ProductCatalog(
        products={
            node: ProductRecord(product_id=node, description=f"product {node}", subcategory_id="SC1", class_id="CL1", group_id="GR1")
            for node in graph.nodes
        }
    )
    # every planted edge is bought together exactly threshold_n times
    log = generate_transactions(40, [(edge, 5) for edge in graph.edges], window_days=7, seed=3)
    write_products_csv(catalog, tmp_path / "products.csv")
    write_sales_csv(log, tmp_path / "sales.csv")
    config = config_for((tmp_path / "products.csv", tmp_path / "sales.csv"), tmp_path / "out", staple_percent=0.0)
    report = run_pipeline(config)

    assert read_tiles(tmp_path / "out" / "tiles.json") == truth
    for kind in TileKind:
        assert report.tile_table.before[kind].count == sum(1 for tile in truth if tile.kind == kind)
    assert report.staples == ()
    assert report.tile_table.total_after.node_coverage == graph.number_of_nodes()
