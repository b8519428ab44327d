"""The simple undirected product network and its component-level operations.

Every operation returns a new, frozen `networkx.Graph` whose nodes carry `sales_volume` and
`description` attributes. Nodes are inserted in product_id order so that iteration, and therefore
every export, is deterministic.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable

import networkx as nx

from minicat.core.types import CoOccurrenceCounts, Histogram, NetworkStats, ProductCatalog, SaleLog, Staple
from minicat.core.utils import round_half_up
from minicat.core.validator import GraphValidator

__all__ = (
    "build_graph",
    "canonicalize",
    "component_stats",
    "components",
    "degree_histogram",
    "gcc_nodes",
    "induced",
    "prune_staples",
    "remove_small_components",
    "total_sales",
)

logger = logging.getLogger(__name__)


def canonicalize(graph: nx.Graph) -> nx.Graph:
    """Frozen copy with nodes in product_id order and edges inserted in canonical pair order.

    Two graphs with the same nodes, attributes and edges canonicalize to graphs that iterate, and
    therefore export, identically.
    """
    GraphValidator.check_simple(graph)
    result = nx.Graph()
    result.add_nodes_from((node, graph.nodes[node]) for node in sorted(graph.nodes))
    result.add_edges_from(sorted((a, b) if a < b else (b, a) for a, b in graph.edges()))
    return nx.freeze(result)


def induced(graph: nx.Graph, nodes: Iterable[str]) -> nx.Graph:
    """Frozen, canonical copy of the subgraph induced by `nodes`"""
    keep = set(nodes)
    sub = nx.Graph()
    sub.add_nodes_from((node, data) for node, data in graph.nodes(data=True) if node in keep)
    sub.add_edges_from((a, b) for a, b in graph.edges() if a in keep and b in keep)
    return canonicalize(sub)


def build_graph(
    counts: CoOccurrenceCounts,
    catalog: ProductCatalog,
    log: SaleLog,
    threshold_n: int = 5,
) -> nx.Graph:
    """Binarize togetherness counts into the product network

    Nodes are all products with at least one sale in `log`; `A - B` is an edge iff the pair was
    purchased together at least `threshold_n` times.

    Args:
        counts (CoOccurrenceCounts): pair counts
        catalog (ProductCatalog): descriptions for node attributes
        log (SaleLog): source of the node set and of `sales_volume` (number of sale events)
        threshold_n (int, optional): minimum togetherness count. Defaults to 5.

    Raises:
        ValueError: if `threshold_n` < 1

    Returns:
        nx.Graph: frozen simple graph
    """
    if threshold_n < 1:
        raise ValueError(f"threshold_n must be positive, given: {threshold_n}")
    volume = log.sales_volume()
    graph = nx.Graph()
    for product_id, sales in volume.items():
        description = catalog[product_id].description if product_id in catalog else ""
        graph.add_node(product_id, sales_volume=sales, description=description)
    strong = counts.at_least(threshold_n)
    graph.add_edges_from(
        (a, b) for a, b in zip(strong["product_a"], strong["product_b"], strict=True) if a in volume and b in volume
    )
    logger.info(
        "Built product network N=%d: %d nodes, %d edges", threshold_n, graph.number_of_nodes(), graph.number_of_edges()
    )
    return canonicalize(graph)


def components(graph: nx.Graph) -> list[list[str]]:
    """Connected components, each sorted, ordered by size descending then smallest member"""
    found = [sorted(component) for component in nx.connected_components(graph)]
    found.sort(key=lambda component: (-len(component), component[0]))
    return found


def gcc_nodes(graph: nx.Graph) -> list[str]:
    """Members of the giant connected component. Ties go to the component holding the smallest id"""
    found = components(graph)
    return found[0] if found else []


def total_sales(graph: nx.Graph, nodes: Iterable[str] | None = None) -> int:
    nodes = graph.nodes if nodes is None else nodes
    return sum(int(graph.nodes[node].get("sales_volume", 0)) for node in nodes)


def component_stats(graph: nx.Graph) -> NetworkStats:
    """Network statistics table row for `graph`

    Args:
        graph (nx.Graph): product network

    Returns:
        NetworkStats: edge, node, isolate and component counts plus GCC size and sales share
    """
    found = components(graph)
    sizes = Counter(len(component) for component in found)
    nodes = graph.number_of_nodes()
    gcc = found[0] if found else []
    sales = total_sales(graph)
    return NetworkStats(
        edges=graph.number_of_edges(),
        nodes=nodes,
        isolated_nodes=sizes.get(1, 0),
        isolated_pairs=sizes.get(2, 0),
        components=len(found),
        gcc_size_abs=len(gcc),
        gcc_size_rel=len(gcc) / nodes if nodes else 0.0,
        gcc_sales_share=total_sales(graph, gcc) / sales if sales else 0.0,
    )


def prune_staples(graph: nx.Graph, staple_percent: float = 0.05) -> tuple[nx.Graph, list[Staple]]:
    """Remove the highest-degree GCC nodes (staples)

    `m = round_half_up(staple_percent * |GCC|)` GCC nodes are removed, ranked by degree, then sales
    volume (both descending), then product_id.

    Args:
        graph (nx.Graph): product network G
        staple_percent (float, optional): fraction of the GCC to remove. Defaults to 0.05.

    Raises:
        ValueError: if `staple_percent` is outside [0, 1]

    Returns:
        tuple[nx.Graph, list[Staple]]: G* and the removed staples ordered by rank
    """
    if not 0.0 <= staple_percent <= 1.0:
        raise ValueError(f"staple_percent must lie in [0, 1], given: {staple_percent}")
    gcc = gcc_nodes(graph)
    count = round_half_up(staple_percent * len(gcc))
    if count == 0:
        return graph, []
    ranked = sorted(gcc, key=lambda node: (-graph.degree(node), -int(graph.nodes[node]["sales_volume"]), node))
    removed = ranked[:count]
    staples = [
        Staple(
            product_id=node,
            degree=graph.degree(node),
            sales_volume=int(graph.nodes[node]["sales_volume"]),
            description=str(graph.nodes[node].get("description", "")),
        )
        for node in removed
    ]
    dropped = set(removed)
    pruned = induced(graph, (node for node in graph.nodes if node not in dropped))
    logger.info(
        "Pruned %d staples (degree %d..%d) from a GCC of %d nodes",
        count,
        staples[-1].degree,
        staples[0].degree,
        len(gcc),
    )
    return pruned, staples


def remove_small_components(graph: nx.Graph, min_component: int = 5) -> nx.Graph:
    """Drop every connected component with fewer than `min_component` nodes

    Raises:
        ValueError: if `min_component` < 1
    """
    if min_component < 1:
        raise ValueError(f"min_component must be positive, given: {min_component}")
    keep = [node for component in components(graph) if len(component) >= min_component for node in component]
    result = induced(graph, keep)
    logger.info(
        "Removed components below %d nodes: %d nodes, %d edges remain",
        min_component,
        result.number_of_nodes(),
        result.number_of_edges(),
    )
    return result


def degree_histogram(graph: nx.Graph, include_zero: bool = False) -> Histogram:
    """Degree -> number of nodes, ascending degree"""
    counts = Counter(degree for _, degree in graph.degree())
    return {degree: counts[degree] for degree in sorted(counts) if include_zero or degree > 0}
