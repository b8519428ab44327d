"""Plant known structures, extract tiles and pick the essential ones."""

from minicat.core.coverage import greedy_cover, tile_table
from minicat.core.graph import remove_small_components
from minicat.core.synth import generate_planted_graph
from minicat.core.tiles import extract_all
from minicat.core.types import PlantSpec

spec = PlantSpec(
    star_specs=[(6, 2), (4, 0)],
    clique_specs=[5, 7],
    path_specs=[8],
    filler_nodes=40,
    noise_edges=10,
    seed=42,
)
graph, truth = generate_planted_graph(spec)
gstar = remove_small_components(graph, min_component=5)

tiles = extract_all(gstar)
solution = greedy_cover(tiles, gstar.nodes)
table = tile_table(tiles, solution, gstar.nodes)

for item in solution.selected:
    print(item.tile_id, item.gain)
print(f"{table.total_after.count} essential tiles out of {table.total_before.count}")
