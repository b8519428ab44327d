"""Structural tile extraction from G*.

Three extractors, all read-only over a frozen graph:

- `extract_stars`: imperfect stars, a hub with at least four neighbors of global degree <= 2 and at
  most floor(n/2) chords among them.
- `extract_linear`: components of the degree 1..3 subgraph with their degree >= 4 anchors attached,
  small tiles merged into the largest anchor-sharing tile.
- `extract_communities`: k-clique percolation communities.

Tiles of different kinds may overlap. Every extractor returns its tiles sorted by member list with
ids `<kind>-<n>` assigned in that order.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import networkx as nx

from minicat.core.types import Tile, TileKind

__all__ = (
    "MIN_STAR_LEAVES",
    "extract_all",
    "extract_communities",
    "extract_linear",
    "extract_stars",
    "number_tiles",
    "tile_id",
)

logger = logging.getLogger(__name__)

MIN_STAR_LEAVES = 4


def tile_id(kind: TileKind, index: int) -> str:
    return f"{kind.value}-{index:06d}"


def number_tiles(kind: TileKind, candidates: Iterable[dict[str, Any]]) -> list[Tile]:
    """Build tiles of one kind from field dicts, sorted by member list and numbered from 1"""
    ordered = sorted(candidates, key=lambda item: sorted(item["members"]))
    return [Tile(tile_id=tile_id(kind, i), kind=kind, **item) for i, item in enumerate(ordered, start=1)]


def extract_stars(graph: nx.Graph, min_leaves: int = MIN_STAR_LEAVES, min_size: int = 5) -> list[Tile]:
    """Imperfect stars of `graph`

    For every node `c`, the leaves `L(c)` are the neighbors of `c` whose degree in `graph` is at most
    2. A star is emitted when `|L(c)| >= min_leaves` and the chords (edges among leaves) number at
    most floor((|L(c)| + 1) / 2), i.e. floor(n/2) for the n-node star. Stars may share leaves.

    Args:
        graph (nx.Graph): G* after small-component removal
        min_leaves (int, optional): leaf floor. Defaults to 4.
        min_size (int, optional): member floor, center included. Defaults to 5.

    Returns:
        list[Tile]: star tiles with `center` and `chord_count`
    """
    degree = dict(graph.degree())
    found: list[dict[str, Any]] = []
    rejected = 0
    for center in graph.nodes:
        leaves = {node for node in graph[center] if degree[node] <= 2}
        if len(leaves) < min_leaves or len(leaves) + 1 < min_size:
            continue
        chords = sum(1 for leaf in leaves for other in graph[leaf] if other in leaves and leaf < other)
        if chords > (len(leaves) + 1) // 2:
            rejected += 1
            continue
        found.append({"members": leaves | {center}, "center": center, "chord_count": chords})
    tiles = number_tiles(TileKind.STAR, found)
    logger.info("Extracted %d stars (%d rejected for chords)", len(tiles), rejected)
    return tiles


def _merge_small(
    tiles: dict[int, tuple[set[str], set[str]]], by_anchor: dict[str, set[int]], min_size: int
) -> None:
    """Merge small tiles into their largest anchor-sharing neighbor until nothing moves"""
    changed = True
    while changed:
        changed = False
        for tid in sorted(tiles):
            if tid not in tiles:
                continue
            members, anchors = tiles[tid]
            if len(members) >= min_size:
                continue
            partners = {other for anchor in anchors for other in by_anchor[anchor] if other != tid}
            if not partners:
                continue
            target = min(partners, key=lambda other: (-len(tiles[other][0]), other))
            target_members, target_anchors = tiles[target]
            tiles[target] = (target_members | members, target_anchors | anchors)
            for anchor in anchors:
                by_anchor[anchor].discard(tid)
                by_anchor[anchor].add(target)
            del tiles[tid]
            changed = True


def extract_linear(graph: nx.Graph, min_size: int = 5) -> list[Tile]:
    """Linear tiles (chains and pendants) of `graph`

    Raw tiles are the connected components of the subgraph induced by nodes of degree 1..3. Each raw
    tile gets as anchors every degree >= 4 node adjacent to one of its members. A tile with fewer than
    `min_size` members is merged into the anchor-sharing tile with the most members (ties to the
    smaller raw index); tiles still too small with no partner are discarded.

    Args:
        graph (nx.Graph): G* after small-component removal
        min_size (int, optional): size floor. Defaults to 5.

    Returns:
        list[Tile]: linear tiles with `anchors`
    """
    degree = dict(graph.degree())
    low = [node for node in graph.nodes if 1 <= degree[node] <= 3]
    raw = sorted(sorted(component) for component in nx.connected_components(graph.subgraph(low)))
    tiles: dict[int, tuple[set[str], set[str]]] = {}
    by_anchor: dict[str, set[int]] = defaultdict(set)
    for index, component in enumerate(raw):
        anchors = {other for node in component for other in graph[node] if degree[other] >= 4}
        tiles[index] = (set(component) | anchors, anchors)
        for anchor in anchors:
            by_anchor[anchor].add(index)
    small_before = sum(1 for members, _ in tiles.values() if len(members) < min_size)
    _merge_small(tiles, by_anchor, min_size)
    kept = [
        {"members": members, "anchors": anchors} for members, anchors in tiles.values() if len(members) >= min_size
    ]
    result = number_tiles(TileKind.LINEAR, kept)
    logger.info(
        "Extracted %d linear tiles from %d raw tiles (%d below %d members before merging)",
        len(result),
        len(raw),
        small_before,
        min_size,
    )
    return result


def extract_communities(graph: nx.Graph, k: int = 3, min_size: int = 5) -> list[Tile]:
    """k-clique percolation communities of `graph`

    A community is the union of k-cliques connected through pairs sharing k-1 nodes. Computed from
    maximal cliques of size >= k, which yields the same communities as percolating all k-cliques.

    Args:
        graph (nx.Graph): G* after small-component removal
        k (int, optional): clique size. Defaults to 3.
        min_size (int, optional): communities with fewer members are dropped. Defaults to 5.

    Raises:
        ValueError: if `k` < 3

    Returns:
        list[Tile]: community tiles with `k`
    """
    if k < 3:
        raise ValueError(f"Clique percolation needs k >= 3, given: {k}")
    found = [
        {"members": set(community), "k": k}
        for community in nx.community.k_clique_communities(graph, k)
        if len(community) >= min_size
    ]
    tiles = number_tiles(TileKind.COMMUNITY, found)
    logger.info("Extracted %d %d-clique communities", len(tiles), k)
    return tiles


def extract_all(graph: nx.Graph, k: int = 3, min_size: int = 5, workers: int = 1) -> list[Tile]:
    """All three tile kinds, ordered community, linear, star, each by member list"""
    jobs: list[Callable[[], list[Tile]]] = [
        lambda: extract_communities(graph, k=k, min_size=min_size),
        lambda: extract_linear(graph, min_size=min_size),
        lambda: extract_stars(graph, min_size=min_size),
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(lambda job: job(), jobs))
    else:
        results = [job() for job in jobs]
    return [tile for batch in results for tile in batch]
