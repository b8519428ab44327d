import networkx as nx
import pytest

from minicat.core.cooccur import count_copurchases
from minicat.core.exceptions import PlantError
from minicat.core.graph import build_graph
from minicat.core.synth import generate_planted_graph, generate_retail_log, generate_transactions
from minicat.core.types import PlantSpec, ProductCatalog, ProductRecord, TileKind


def catalog_of(products: list[str]) -> ProductCatalog:
    return ProductCatalog(
        products={
            pid: ProductRecord(product_id=pid, subcategory_id="SC1", class_id="CL1", group_id="GR1") for pid in products
        }
    )


# ---------------------------------------------------------------------------------------
# Planted graphs
# ---------------------------------------------------------------------------------------
SPEC = PlantSpec(star_specs=[(4, 0), (6, 3)], clique_specs=[5], path_specs=[7], filler_nodes=30, noise_edges=20)


def test_planted_graph_layout() -> None:
    graph, truth = generate_planted_graph(SPEC)
    assert graph.number_of_nodes() == 5 + 7 + 5 + 7 + 30
    assert graph.number_of_edges() == 4 + (6 + 3) + 10 + 6 + 20
    assert nx.is_frozen(graph)
    assert [tile.kind for tile in truth] == [TileKind.COMMUNITY] + [TileKind.LINEAR] * 3 + [TileKind.STAR] * 2
    star = truth[-1]
    assert star.center == "P000005"
    assert star.chord_count == 3
    assert graph.has_edge("P000006", "P000007")
    assert all(graph.nodes[node]["sales_volume"] == graph.degree(node) + 1 for node in graph.nodes)


def test_planted_graph_is_deterministic() -> None:
    first, truth = generate_planted_graph(SPEC)
    second, again = generate_planted_graph(SPEC)
    assert list(first.edges) == list(second.edges)
    assert truth == again


def test_seed_moves_only_noise() -> None:
    first, truth = generate_planted_graph(SPEC)
    second, again = generate_planted_graph(SPEC.model_copy(update={"seed": 1}))
    assert set(first.edges) != set(second.edges)
    assert truth == again


@pytest.mark.parametrize(
    "spec",
    [
        # Too few leaves
        PlantSpec(star_specs=[(3, 0)]),
        # Chords beyond a leaf matching
        PlantSpec(star_specs=[(4, 3)]),
        PlantSpec(clique_specs=[4]),
        PlantSpec(path_specs=[4]),
        # Four filler nodes hold six edges
        PlantSpec(filler_nodes=4, noise_edges=7),
    ],
)
def test_planted_graph_rejects(spec: PlantSpec) -> None:
    with pytest.raises(PlantError):
        generate_planted_graph(spec)


# ---------------------------------------------------------------------------------------
# Planted transactions
# ---------------------------------------------------------------------------------------
PAIRS = [(("A", "B"), 5), (("B", "C"), 2), (("C", "A"), 1), (("D", "E"), 4)]


@pytest.mark.parametrize("seed", range(5))
def test_transactions_realize_counts(seed: int) -> None:
    log = generate_transactions(20, PAIRS, window_days=7, seed=seed)
    counts = count_copurchases(log, window_days=7)
    assert dict(counts.items()) == {("A", "B"): 5, ("B", "C"): 2, ("A", "C"): 1, ("D", "E"): 4}
    graph = build_graph(counts, catalog_of(["A", "B", "C", "D", "E"]), log, threshold_n=5)
    assert list(graph.edges) == [("A", "B")]


def test_single_customer_still_exact() -> None:
    log = generate_transactions(1, PAIRS, window_days=3, seed=2)
    assert count_copurchases(log, window_days=3)["A", "B"] == 5
    assert len(log) == 2 * sum(repetitions for _, repetitions in PAIRS)


def test_no_customers() -> None:
    log = generate_transactions(0, PAIRS)
    assert len(log) == 0


@pytest.mark.parametrize(
    "pairs, window, error",
    [
        ([(("A", "B"), 0)], 7, PlantError),
        ([(("A", "A"), 2)], 7, PlantError),
        ([(("A", "B"), 2)], 0, ValueError),
    ],
)
def test_transactions_reject(pairs: list[tuple[tuple[str, str], int]], window: int, error: type[Exception]) -> None:
    with pytest.raises(error):
        generate_transactions(3, pairs, window_days=window)


# ---------------------------------------------------------------------------------------
# Retail logs
# ---------------------------------------------------------------------------------------
def test_retail_log_is_deterministic() -> None:
    catalog, log = generate_retail_log(5_000, 200, 300, seed=3)
    again_catalog, again_log = generate_retail_log(5_000, 200, 300, seed=3)
    assert catalog == again_catalog
    assert log == again_log
    _, other = generate_retail_log(5_000, 200, 300, seed=4)
    assert log != other


def test_retail_log_shape() -> None:
    catalog, log = generate_retail_log(5_000, 200, 300, seed=3, n_stores=4)
    assert len(catalog) == 200
    assert 0 < len(log) <= 5_000
    assert log.is_sorted()
    assert set(log.frame["product_id"]) <= set(catalog.products)
    assert log.frame["store_id"].nunique() <= 4
    assert sum(catalog.hierarchy_sizes("subcategory")) == 200
    assert len(catalog.hierarchy_sizes("group")) <= len(catalog.hierarchy_sizes("class"))


def test_empty_retail_log() -> None:
    catalog, log = generate_retail_log(0, 10, 10)
    assert len(catalog) == 10
    assert len(log) == 0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_products": 0},
        {"n_customers": 0},
        {"n_events": -1},
        {"bundle_share": 1.5},
    ],
)
def test_retail_log_rejects(kwargs: dict[str, float]) -> None:
    args = {"n_events": 100, "n_products": 10, "n_customers": 10} | kwargs
    with pytest.raises(ValueError):
        generate_retail_log(**args)  # type: ignore[arg-type]
