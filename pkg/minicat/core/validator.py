from __future__ import annotations

from itertools import combinations
from typing import TYPE_CHECKING

import networkx as nx

from minicat.core.exceptions import InvariantError
from minicat.core.types import Tile, TileKind

if TYPE_CHECKING:
    from collections.abc import Iterable

__all__ = (
    "GraphValidator",
    "TileValidator",
)


class GraphValidator:
    @staticmethod
    def check_simple(graph: nx.Graph) -> None:
        """Check that a product network is a simple graph

        A product network is undirected, has no loops and no parallel edges. networkx `Graph` cannot
        hold parallel edges, so only the graph class and self loops need checking.

        Args:
            graph (nx.Graph): product network

        Raises:
            InvariantError: on a directed or multi graph, or on a self loop
        """
        if graph.is_directed() or graph.is_multigraph():
            raise InvariantError(f"Product networks are simple undirected graphs, given: {type(graph).__name__}")
        loops = nx.number_of_selfloops(graph)
        if loops:
            raise InvariantError(f"Product network contains {loops} self loop(s)")


class TileValidator:
    @staticmethod
    def check(tile: Tile, graph: nx.Graph, min_size: int = 5) -> None:
        """Check a tile against its type invariants in `graph` (G*)

        - every tile: at least `min_size` members, all of them nodes of `graph`.
        - star: every leaf adjacent to the center with degree <= 2, chords within floor(n/2).
        - linear: non-anchor members have degree 1..3, anchors have degree >= 4, members connected.
        - community: members connected and each member lies in a k-clique inside the tile.

        Args:
            tile (Tile): tile to check
            graph (nx.Graph): the graph the tile was extracted from
            min_size (int, optional): size floor. Defaults to 5.

        Raises:
            InvariantError: naming the violated invariant
        """
        if tile.size < min_size:
            raise InvariantError(f"{tile.tile_id}: {tile.size} members, fewer than {min_size}")
        missing = [node for node in tile.members if node not in graph]
        if missing:
            raise InvariantError(f"{tile.tile_id}: members not in graph: {missing[:5]}")
        match tile.kind:
            case TileKind.STAR:
                TileValidator._check_star(tile, graph)
            case TileKind.LINEAR:
                TileValidator._check_linear(tile, graph)
            case TileKind.COMMUNITY:
                TileValidator._check_community(tile, graph)

    @staticmethod
    def check_all(tiles: Iterable[Tile], graph: nx.Graph, min_size: int = 5) -> None:
        for tile in tiles:
            TileValidator.check(tile, graph, min_size)

    @staticmethod
    def _check_star(tile: Tile, graph: nx.Graph) -> None:
        center = tile.center
        leaves = [node for node in tile.members if node != center]
        for leaf in leaves:
            if not graph.has_edge(center, leaf):
                raise InvariantError(f"{tile.tile_id}: leaf {leaf} is not adjacent to center {center}")
            if graph.degree(leaf) > 2:
                raise InvariantError(f"{tile.tile_id}: leaf {leaf} has degree {graph.degree(leaf)} > 2")
        chords = sum(1 for a, b in combinations(leaves, 2) if graph.has_edge(a, b))
        if chords != tile.chord_count:
            raise InvariantError(f"{tile.tile_id}: chord_count {tile.chord_count}, counted {chords}")
        if chords > tile.size // 2:
            raise InvariantError(f"{tile.tile_id}: {chords} chords exceed floor({tile.size}/2)")

    @staticmethod
    def _check_linear(tile: Tile, graph: nx.Graph) -> None:
        anchors = set(tile.anchors)
        for node in tile.members:
            degree = graph.degree(node)
            if node in anchors and degree < 4:
                raise InvariantError(f"{tile.tile_id}: anchor {node} has degree {degree} < 4")
            if node not in anchors and not 1 <= degree <= 3:
                raise InvariantError(f"{tile.tile_id}: member {node} has degree {degree} outside 1..3")
        if not nx.is_connected(graph.subgraph(tile.members)):
            raise InvariantError(f"{tile.tile_id}: linear tile is not connected")

    @staticmethod
    def _check_community(tile: Tile, graph: nx.Graph) -> None:
        if tile.k is None or tile.k < 3:
            raise InvariantError(f"{tile.tile_id}: community needs k >= 3, given: {tile.k}")
        sub = graph.subgraph(tile.members)
        if not nx.is_connected(sub):
            raise InvariantError(f"{tile.tile_id}: community is not connected")
        in_clique: set[str] = set()
        for clique in nx.find_cliques(sub):
            if len(clique) >= tile.k:
                in_clique.update(clique)
        outside = set(tile.members) - in_clique
        if outside:
            raise InvariantError(f"{tile.tile_id}: members outside every {tile.k}-clique: {sorted(outside)[:5]}")
