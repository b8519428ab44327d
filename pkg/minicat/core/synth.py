"""Deterministic synthetic data with known structure.

- `generate_planted_graph`: vertex-disjoint stars, cliques and paths plus filler nodes, with the tiles
  the extractors must find (extraction defaults: k=3, min_tile=5).
- `generate_transactions`: a sale log whose togetherness counts equal the planted pair repetitions.
- `generate_retail_log`: a catalog and a large sale log with power-law popularity and co-purchased
  bundles, used for threshold sweeps and timing runs.

Every generator draws from one `numpy.random.Generator` seeded with `SeedSequence(seed)`; child
streams are spawned in a fixed order.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import networkx as nx
import numpy as np
import pandas as pd

from minicat.core.exceptions import PlantError
from minicat.core.graph import canonicalize
from minicat.core.ingest import normalize_sales, write_products_csv, write_sales_csv
from minicat.core.tiles import MIN_STAR_LEAVES, number_tiles
from minicat.core.types import PlantSpec, ProductCatalog, ProductRecord, SaleLog, Tile, TileKind

__all__ = (
    "EPOCH",
    "MIN_PLANTED_SIZE",
    "generate_planted_graph",
    "generate_retail_log",
    "generate_transactions",
    "write_products_csv",
    "write_sales_csv",
)

logger = logging.getLogger(__name__)

EPOCH = pd.Timestamp("2024-01-01")
"""Day 0 of every generated log"""

MIN_PLANTED_SIZE = 5


def _node(index: int) -> str:
    return f"P{index:06d}"


def _check_plantable(spec: PlantSpec) -> None:
    for leaves, chords in spec.star_specs:
        if leaves < MIN_STAR_LEAVES:
            raise PlantError(f"A star needs at least {MIN_STAR_LEAVES} leaves, given: {leaves}")
        # chords form a matching on the leaves so that every leaf keeps degree <= 2
        if chords > leaves // 2:
            raise PlantError(f"A star with {leaves} leaves takes at most {leaves // 2} chords, given: {chords}")
    for size in spec.clique_specs:
        if size < MIN_PLANTED_SIZE:
            raise PlantError(f"A clique needs at least {MIN_PLANTED_SIZE} nodes, given: {size}")
    for size in spec.path_specs:
        if size < MIN_PLANTED_SIZE:
            raise PlantError(f"A path needs at least {MIN_PLANTED_SIZE} nodes, given: {size}")
    capacity = spec.filler_nodes * (spec.filler_nodes - 1) // 2
    if spec.noise_edges > capacity:
        raise PlantError(f"{spec.filler_nodes} filler nodes hold at most {capacity} noise edges")


def _noise_edges(rng: np.random.Generator, filler: Sequence[str], count: int) -> list[tuple[str, str]]:
    """`count` distinct uniform pairs of filler nodes, drawn by rejection in a fixed order"""
    chosen: set[tuple[int, int]] = set()
    n = len(filler)
    while len(chosen) < count:
        a, b = (int(x) for x in rng.integers(0, n, size=2))
        if a != b:
            chosen.add((min(a, b), max(a, b)))
    return sorted((filler[a], filler[b]) for a, b in chosen)


def generate_planted_graph(spec: PlantSpec) -> tuple[nx.Graph, list[Tile]]:
    """Graph with planted structures and its ground-truth tiles

    Nodes are numbered `P000000, P000001, ...` in the order stars, cliques, paths, filler. A star with
    `c` chords joins leaf pairs (0, 1), (2, 3), ... Path lengths count nodes. Noise edges join filler
    nodes only, so only the filler depends on the seed.

    Ground truth holds one star tile per star, one linear tile per star (its leaves merge through the
    center into a single tile anchored at the center), one community per clique and one linear tile
    per path.

    Args:
        spec (PlantSpec): structures to plant

    Raises:
        PlantError: if a star has fewer than 4 leaves or more chords than `leaves // 2`, a clique or
            path has fewer than 5 nodes, or the filler cannot hold the noise edges

    Returns:
        tuple[nx.Graph, list[Tile]]: frozen graph, ground truth ordered community, linear, star
    """
    _check_plantable(spec)
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    graph = nx.Graph()
    stars: list[dict[str, object]] = []
    communities: list[dict[str, object]] = []
    linear: list[dict[str, object]] = []
    cursor = 0

    for leaves, chords in spec.star_specs:
        members = [_node(cursor + i) for i in range(leaves + 1)]
        center, rest = members[0], members[1:]
        graph.add_edges_from(nx.relabel_nodes(nx.star_graph(leaves), dict(enumerate(members))).edges())
        graph.add_edges_from((rest[2 * i], rest[2 * i + 1]) for i in range(chords))
        stars.append({"members": set(members), "center": center, "chord_count": chords})
        linear.append({"members": set(members), "anchors": {center}})
        cursor += leaves + 1

    for size in spec.clique_specs:
        members = [_node(cursor + i) for i in range(size)]
        graph.add_edges_from(nx.relabel_nodes(nx.complete_graph(size), dict(enumerate(members))).edges())
        communities.append({"members": set(members), "k": 3})
        cursor += size

    for size in spec.path_specs:
        members = [_node(cursor + i) for i in range(size)]
        nx.add_path(graph, members)
        linear.append({"members": set(members), "anchors": set()})
        cursor += size

    filler = [_node(cursor + i) for i in range(spec.filler_nodes)]
    graph.add_nodes_from(filler)
    graph.add_edges_from(_noise_edges(rng, filler, spec.noise_edges))

    for node in graph.nodes:
        graph.nodes[node]["sales_volume"] = graph.degree(node) + 1
        graph.nodes[node]["description"] = f"product {node}"
    truth = (
        number_tiles(TileKind.COMMUNITY, communities)
        + number_tiles(TileKind.LINEAR, linear)
        + number_tiles(TileKind.STAR, stars)
    )
    logger.info(
        "Planted %d stars, %d cliques, %d paths on %d nodes with %d noise edges",
        len(spec.star_specs),
        len(spec.clique_specs),
        len(spec.path_specs),
        graph.number_of_nodes(),
        spec.noise_edges,
    )
    return canonicalize(graph), truth


def _frame(
    customers: Sequence[str],
    products: Sequence[str],
    seconds: np.ndarray,
    registers: Sequence[str],
    stores: Sequence[str],
) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "customer_id": pd.Series(customers, dtype=object),
            "product_id": pd.Series(products, dtype=object),
            "timestamp": EPOCH + pd.to_timedelta(np.asarray(seconds, dtype=np.int64), unit="s"),
            "register_id": pd.Series(registers, dtype=object),
            "store_id": pd.Series(stores, dtype=object),
            "quantity": np.ones(len(customers), dtype=np.int64),
        }
    )


def generate_transactions(
    n_customers: int,
    planted_pairs: Sequence[tuple[tuple[str, str], int]],
    window_days: int = 7,
    seed: int = 0,
) -> SaleLog:
    """Sale log realizing planted co-purchase counts

    Each repetition of a pair is one episode: a random customer buys the first product and, 0 to
    `window_days` days later, the second. Episodes of one customer are more than `window_days`
    apart, so `count_copurchases` with the same window counts every planted pair exactly its
    repetitions (pairs listed twice add up) and finds no other pair.

    Args:
        n_customers (int): customer pool; 0 yields an empty log
        planted_pairs (Sequence[tuple[tuple[str, str], int]]): ((product_a, product_b), repetitions)
        window_days (int, optional): togetherness window. Defaults to 7.
        seed (int, optional): random seed. Defaults to 0.

    Raises:
        PlantError: on repetitions below 1 or a pair of identical products
        ValueError: if `window_days` < 1

    Returns:
        SaleLog: normalized log
    """
    if window_days < 1:
        raise ValueError(f"window_days must be positive, given: {window_days}")
    for (a, b), repetitions in planted_pairs:
        if repetitions < 1:
            raise PlantError(f"Repetitions must be positive, given {repetitions} for ({a}, {b})")
        if a == b:
            raise PlantError(f"A planted pair needs two distinct products, given: ({a}, {b})")
    if n_customers <= 0:
        return normalize_sales(_frame([], [], np.empty(0, dtype=np.int64), [], []))

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    next_day = np.zeros(n_customers, dtype=np.int64)
    customers: list[str] = []
    products: list[str] = []
    seconds: list[int] = []
    for (a, b), repetitions in planted_pairs:
        for _ in range(repetitions):
            who = int(rng.integers(n_customers))
            gap = int(rng.integers(0, window_days + 1))
            first, second = (int(s) for s in rng.integers(8 * 3600, 21 * 3600, size=2))
            if gap == 0 and second <= first:
                second = first + 1
            day = int(next_day[who])
            customers += [f"C{who:06d}"] * 2
            products += [a, b]
            seconds += [day * 86400 + first, (day + gap) * 86400 + second]
            next_day[who] = day + gap + window_days + 1
    n = len(customers)
    log = normalize_sales(_frame(customers, products, np.asarray(seconds), ["R1"] * n, ["S1"] * n))
    logger.info("Generated %d sale events for %d planted pairs", len(log), len(planted_pairs))
    return log


def _catalog(rng: np.random.Generator, n_products: int, per_subcategory: int) -> ProductCatalog:
    n_sub = max(1, n_products // per_subcategory)
    # uneven subcategory sizes; classes hold 5 subcategories and groups 5 classes
    subcategory = np.sort(rng.integers(0, n_sub, size=n_products))
    products = {}
    for index, sub in enumerate(subcategory):
        product_id = _node(index)
        products[product_id] = ProductRecord(
            product_id=product_id,
            description=f"item {index} of subcategory {sub}",
            subcategory_id=f"SC{sub:05d}",
            class_id=f"CL{sub // 5:05d}",
            group_id=f"GR{sub // 25:05d}",
        )
    return ProductCatalog(products=products)


def generate_retail_log(
    n_events: int,
    n_products: int,
    n_customers: int,
    seed: int = 0,
    *,
    n_days: int = 365,
    popularity_exponent: float = 1.0,
    bundle_share: float = 0.3,
    bundle_size: int = 6,
    n_stores: int = 10,
    registers_per_store: int = 4,
) -> tuple[ProductCatalog, SaleLog]:
    """Catalog and sale log at scale

    Events come in shopping trips (one customer, one register, one timestamp) of geometric size with
    mean 2.5. A trip is a bundle trip with probability `bundle_share` and then draws its items from
    one fixed random bundle of `bundle_size` products; otherwise items follow Zipf popularity
    `rank ** -popularity_exponent`. Repeated items within a trip collapse into one event, so the log
    can be slightly shorter than `n_events`.

    Args:
        n_events (int): sale rows to draw
        n_products (int): catalog size
        n_customers (int): customer pool
        seed (int, optional): random seed. Defaults to 0.
        n_days (int, optional): length of the sales period. Defaults to 365.
        popularity_exponent (float, optional): Zipf exponent. Defaults to 1.0.
        bundle_share (float, optional): probability of a bundle trip. Defaults to 0.3.
        bundle_size (int, optional): products per bundle. Defaults to 6.
        n_stores (int, optional): stores; customers shop at `customer % n_stores`. Defaults to 10.
        registers_per_store (int, optional): registers per store. Defaults to 4.

    Raises:
        ValueError: on a non-positive size, or a bundle share outside [0, 1]

    Returns:
        tuple[ProductCatalog, SaleLog]: material-only catalog and normalized log
    """
    for name, value in (("n_products", n_products), ("n_customers", n_customers), ("n_days", n_days)):
        if value < 1:
            raise ValueError(f"{name} must be positive, given: {value}")
    if n_events < 0:
        raise ValueError(f"n_events must be non-negative, given: {n_events}")
    if not 0.0 <= bundle_share <= 1.0:
        raise ValueError(f"bundle_share must lie in [0, 1], given: {bundle_share}")
    catalog_stream, trip_stream, item_stream = np.random.SeedSequence(seed).spawn(3)
    catalog = _catalog(np.random.default_rng(catalog_stream), n_products, per_subcategory=20)

    rng = np.random.default_rng(trip_stream)
    sizes = rng.geometric(0.4, size=max(1, n_events))
    ends = np.cumsum(sizes)
    n_trips = int(np.searchsorted(ends, n_events)) + 1 if n_events else 0
    sizes = sizes[:n_trips]
    if n_trips:
        sizes[-1] -= int(ends[n_trips - 1]) - n_events
    who = rng.integers(0, n_customers, size=n_trips)
    seconds = rng.integers(0, n_days, size=n_trips) * 86400 + rng.integers(8 * 3600, 21 * 3600, size=n_trips)
    register = rng.integers(0, registers_per_store, size=n_trips)
    is_bundle = rng.random(n_trips) < bundle_share

    items = np.random.default_rng(item_stream)
    size = min(bundle_size, n_products)
    n_bundles = max(1, n_products // (4 * size))
    bundles = np.stack([items.choice(n_products, size=size, replace=False) for _ in range(n_bundles)])
    weights = np.arange(1, n_products + 1, dtype=np.float64) ** -popularity_exponent
    ranking = items.permutation(n_products)
    popular = ranking[items.choice(n_products, size=n_events, p=weights / weights.sum())]
    trip_bundle = np.repeat(items.integers(0, n_bundles, size=n_trips), sizes)
    bundled = bundles[trip_bundle, items.integers(0, size, size=n_events)]
    product = np.where(np.repeat(is_bundle, sizes), bundled, popular)

    trip_who = np.repeat(who, sizes)
    store = trip_who % n_stores
    frame = _frame(
        [f"C{c:06d}" for c in trip_who],
        [_node(int(p)) for p in product],
        np.repeat(seconds, sizes),
        [f"S{s:03d}-R{r}" for s, r in zip(store, np.repeat(register, sizes), strict=True)],
        [f"S{s:03d}" for s in store],
    )
    log = normalize_sales(frame)
    logger.info(
        "Generated %d sale events (%d trips) over %d products and %d customers",
        len(log),
        n_trips,
        n_products,
        n_customers,
    )
    return catalog, log
