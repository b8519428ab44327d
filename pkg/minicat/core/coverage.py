"""Essential tile selection by greedy maximum coverage.

At each step the unused tile covering the most not-yet-covered universe nodes is selected; ties go
to the larger tile, then to kind (community, star, linear), then to the smaller tile_id. Selection
stops when the best gain falls below `min_gain`. Coverage gains only shrink as tiles are selected,
so the selection runs lazily over a heap of stale gains and still picks exactly what an eager
rescan would pick.
"""

from __future__ import annotations

import heapq
import logging
from collections import Counter
from collections.abc import Collection, Iterable, Sequence

import numpy as np

from minicat.core.types import CoverageSolution, Histogram, KindSummary, Selection, Tile, TileKind, TileTable

__all__ = (
    "KIND_PRIORITY",
    "greedy_cover",
    "mean_tiles_per_node",
    "overcoverage",
    "sample_tiles",
    "selected_tiles",
    "summarize",
    "tile_table",
)

logger = logging.getLogger(__name__)

KIND_PRIORITY: dict[TileKind, int] = {TileKind.COMMUNITY: 0, TileKind.STAR: 1, TileKind.LINEAR: 2}


def greedy_cover(tiles: Sequence[Tile], universe: Collection[str], min_gain: int = 1) -> CoverageSolution:
    """Select essential tiles by greedy maximum coverage

    Args:
        tiles (Sequence[Tile]): candidate tiles
        universe (Collection[str]): nodes to cover (G* after small-component removal). Members
            outside the universe never count as gain.
        min_gain (int, optional): smallest gain worth a tile. Defaults to 1.

    Raises:
        ValueError: if `min_gain` < 1

    Returns:
        CoverageSolution: selected tiles with their gains, in selection order
    """
    if min_gain < 1:
        raise ValueError(f"min_gain must be positive, given: {min_gain}")
    universe = frozenset(universe)
    members = [tile.member_set & universe for tile in tiles]
    heap = [
        (-len(members[i]), -tile.size, KIND_PRIORITY[tile.kind], tile.tile_id, i) for i, tile in enumerate(tiles)
    ]
    heapq.heapify(heap)
    covered: set[str] = set()
    selected: list[Selection] = []
    chosen: list[Tile] = []
    while heap:
        stale, size_key, kind_key, tid, i = heap[0]
        gain = len(members[i] - covered)
        if gain != -stale:
            heapq.heapreplace(heap, (-gain, size_key, kind_key, tid, i))
            continue
        if gain < min_gain:
            break
        heapq.heappop(heap)
        covered |= members[i]
        selected.append(Selection(tile_id=tid, gain=gain))
        chosen.append(tiles[i])

    per_type = Counter(tile.kind for tile in chosen)
    sizes: dict[TileKind, list[int]] = {kind: [] for kind in TileKind}
    for tile in chosen:
        sizes[tile.kind].append(tile.size)
    solution = CoverageSolution(
        selected=tuple(selected),
        covered=frozenset(covered),
        uncovered_count=len(universe) - len(covered),
        per_type_counts={kind: per_type.get(kind, 0) for kind in TileKind},
        mean_size_per_type={kind: float(np.mean(values)) if values else 0.0 for kind, values in sizes.items()},
    )
    logger.info(
        "Selected %d of %d tiles, %d of %d nodes covered",
        len(selected),
        len(tiles),
        len(covered),
        len(universe),
    )
    return solution


def selected_tiles(tiles: Iterable[Tile], solution: CoverageSolution) -> list[Tile]:
    """The tiles of `solution`, in selection order"""
    by_id = {tile.tile_id: tile for tile in tiles}
    return [by_id[tid] for tid in solution.tile_ids]


def overcoverage(tiles: Iterable[Tile], universe: Collection[str]) -> Histogram:
    """Tiles-per-node histogram over `universe`. Bin 0 holds uncovered nodes; empty bins are omitted"""
    counts: Counter[str] = Counter()
    for tile in tiles:
        counts.update(tile.members)
    bins = Counter(counts.get(node, 0) for node in universe)
    return {b: bins[b] for b in sorted(bins)}


def mean_tiles_per_node(histogram: Histogram) -> float:
    nodes = sum(histogram.values())
    return sum(b * n for b, n in histogram.items()) / nodes if nodes else 0.0


def _summary(tiles: Sequence[Tile]) -> KindSummary:
    return KindSummary(
        count=len(tiles),
        node_coverage=len(set().union(*(tile.members for tile in tiles))),
        mean_size=float(np.mean([tile.size for tile in tiles])) if tiles else 0.0,
    )


def summarize(tiles: Iterable[Tile]) -> dict[TileKind, KindSummary]:
    """Count, node coverage (size of the member union) and mean size per kind"""
    grouped: dict[TileKind, list[Tile]] = {kind: [] for kind in TileKind}
    for tile in tiles:
        grouped[tile.kind].append(tile)
    return {kind: _summary(group) for kind, group in grouped.items()}


def tile_table(tiles: Sequence[Tile], solution: CoverageSolution, universe: Collection[str]) -> TileTable:
    """Tile accounting before and after coverage optimization"""
    essential = selected_tiles(tiles, solution)
    return TileTable(
        before=summarize(tiles),
        after=summarize(essential),
        total_before=_summary(tiles),
        total_after=_summary(essential),
        mean_tiles_per_node_before=mean_tiles_per_node(overcoverage(tiles, universe)),
        mean_tiles_per_node_after=mean_tiles_per_node(overcoverage(essential, universe)),
    )


def sample_tiles(tiles: Sequence[Tile], seed: int = 0, per_kind: int = 3) -> dict[TileKind, list[Tile]]:
    """Randomly chosen average-sized tiles of each kind

    The candidate pool of a kind is its `3 * per_kind` tiles nearest to the kind's mean size (ties by
    tile_id); `per_kind` of them are drawn without replacement.

    Args:
        tiles (Sequence[Tile]): usually the essential tiles
        seed (int, optional): random seed. Defaults to 0.
        per_kind (int, optional): tiles per kind. Defaults to 3.

    Returns:
        dict[TileKind, list[Tile]]: samples ordered by tile_id
    """
    rng = np.random.default_rng(seed)
    samples: dict[TileKind, list[Tile]] = {}
    for kind in TileKind:
        group = sorted((tile for tile in tiles if tile.kind == kind), key=lambda tile: tile.tile_id)
        if not group:
            samples[kind] = []
            continue
        mean = float(np.mean([tile.size for tile in group]))
        pool = sorted(group, key=lambda tile: (abs(tile.size - mean), tile.tile_id))[: 3 * per_kind]
        picks = rng.choice(len(pool), size=min(per_kind, len(pool)), replace=False)
        samples[kind] = sorted((pool[int(i)] for i in picks), key=lambda tile: tile.tile_id)
    return samples
