"""File formats of the pipeline artifacts.

JSON goes through msgspec with two-space indentation, floats rounded to six significant digits and
a trailing newline, so that identical inputs give byte-identical files. Graphs are written as
GraphML (networkx), DOT (pydot) and a tab-separated edge list; histograms as two-column CSV.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import msgspec
import networkx as nx
import pandas as pd
from networkx.drawing import nx_pydot

from minicat.core.coverage import selected_tiles, summarize
from minicat.core.exceptions import ContractError
from minicat.core.graph import canonicalize, induced
from minicat.core.types import CoverageSolution, Selection, Tile, TileKind
from minicat.core.utils import round_floats

__all__ = (
    "encode_json",
    "histogram_rows",
    "read_coverage",
    "read_graphml",
    "read_json",
    "read_tiles",
    "write_coverage",
    "write_dot",
    "write_edges_tsv",
    "write_graphml",
    "write_histogram_csv",
    "write_json",
    "write_tile_dot",
    "write_tiles",
)

def encode_json(obj: Any, digits: int = 6) -> bytes:
    """Deterministic JSON bytes of a tree of builtins. Dict keys keep their insertion order"""
    return msgspec.json.format(msgspec.json.encode(round_floats(obj, digits)), indent=2) + b"\n"


def write_json(obj: Any, path: str | Path) -> None:
    Path(path).write_bytes(encode_json(obj))


def read_json(path: str | Path) -> Any:
    try:
        return msgspec.json.decode(Path(path).read_bytes())
    except msgspec.DecodeError as exc:
        raise ContractError(f"{path} is not valid JSON: {exc}") from exc


def histogram_rows(histogram: Mapping[int, int]) -> dict[str, int]:
    """JSON form of a histogram: string keys in ascending numeric order"""
    return {str(key): int(histogram[key]) for key in sorted(histogram)}


def write_histogram_csv(histogram: Mapping[int, int], path: str | Path, value_name: str, count_name: str) -> None:
    frame = pd.DataFrame(
        {value_name: sorted(histogram), count_name: [histogram[key] for key in sorted(histogram)]},
        columns=[value_name, count_name],
    )
    frame.to_csv(path, index=False, lineterminator="\n")


# ---------------------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------------------
def write_edges_tsv(graph: nx.Graph, path: str | Path) -> None:
    """`productA<TAB>productB` per edge, canonical pair order, no header"""
    edges = sorted((a, b) if a < b else (b, a) for a, b in graph.edges())
    pd.DataFrame(edges, columns=["product_a", "product_b"]).to_csv(
        path, sep="\t", header=False, index=False, lineterminator="\n"
    )


def write_graphml(graph: nx.Graph, path: str | Path) -> None:
    """GraphML with `sales_volume`, `description` and `degree` node attributes"""
    out = nx.Graph()
    out.add_nodes_from(
        (
            node,
            {
                "sales_volume": int(data.get("sales_volume", 0)),
                "description": str(data.get("description", "")),
                "degree": graph.degree(node),
            },
        )
        for node, data in graph.nodes(data=True)
    )
    out.add_edges_from(graph.edges())
    nx.write_graphml(out, path, encoding="utf-8")


def read_graphml(path: str | Path) -> nx.Graph:
    """Read a graph written by `write_graphml` back into its canonical frozen form

    Raises:
        ContractError: if the file is not a GraphML product network
    """
    try:
        raw = nx.read_graphml(path, node_type=str)
    except (OSError, nx.NetworkXError) as exc:
        raise ContractError(f"Cannot read GraphML {path}: {exc}") from exc
    if raw.is_directed() or raw.is_multigraph():
        raise ContractError(f"{path} holds a {type(raw).__name__}, expected an undirected simple graph")
    graph = nx.Graph()
    graph.add_nodes_from(
        (
            node,
            {
                "sales_volume": int(data.get("sales_volume", 0)),
                "description": str(data.get("description") or ""),
            },
        )
        for node, data in raw.nodes(data=True)
    )
    graph.add_edges_from(raw.edges())
    return canonicalize(graph)


def _dot_graph(graph: nx.Graph) -> nx.Graph:
    out = nx.Graph()
    out.add_nodes_from(
        (node, {"label": str(data.get("description") or node), "sales_volume": int(data.get("sales_volume", 0))})
        for node, data in graph.nodes(data=True)
    )
    out.add_edges_from(graph.edges())
    return out


def write_dot(graph: nx.Graph, path: str | Path) -> None:
    """DOT rendering, nodes labelled by description"""
    Path(path).write_text(nx_pydot.to_pydot(_dot_graph(graph)).to_string())


def write_tile_dot(tile: Tile, graph: nx.Graph, path: str | Path) -> None:
    """DOT rendering of the subgraph of `graph` induced by one tile; a star's center is drawn as a box"""
    dot = nx_pydot.to_pydot(_dot_graph(induced(graph, tile.members)))
    dot.set_name(tile.tile_id.replace("-", "_"))
    if tile.center is not None:
        for node in dot.get_node(tile.center) or dot.get_node(f'"{tile.center}"'):
            node.set("shape", "box")
    Path(path).write_text(dot.to_string())


# ---------------------------------------------------------------------------------------
# Tiles and coverage
# ---------------------------------------------------------------------------------------
def write_tiles(tiles: Iterable[Tile], path: str | Path) -> None:
    write_json([tile.model_dump(mode="json") for tile in tiles], path)


def read_tiles(path: str | Path) -> list[Tile]:
    data = read_json(path)
    if not isinstance(data, list):
        raise ContractError(f"{path} must hold a list of tiles")
    return [Tile.model_validate(item) for item in data]


def write_coverage(solution: CoverageSolution, tiles: Sequence[Tile], path: str | Path) -> None:
    """coverage.json: the selection with its gains, the covered nodes and count, node coverage and mean
    size of the selected tiles per kind"""
    per_type = summarize(selected_tiles(tiles, solution))
    write_json(
        {
            "selected": [item.model_dump(mode="json") for item in solution.selected],
            "covered": sorted(solution.covered),
            "uncovered_count": solution.uncovered_count,
            "per_type": {kind.value: per_type[kind].model_dump(mode="json") for kind in TileKind},
        },
        path,
    )


def read_coverage(path: str | Path) -> CoverageSolution:
    """Read coverage.json back

    Raises:
        ContractError: if the file does not hold a coverage solution
    """
    data = read_json(path)
    try:
        per_type: Mapping[str, dict[str, Any]] = data["per_type"]
        return CoverageSolution(
            selected=tuple(Selection.model_validate(item) for item in data["selected"]),
            covered=frozenset(data["covered"]),
            uncovered_count=data["uncovered_count"],
            per_type_counts={TileKind(kind): item["count"] for kind, item in per_type.items()},
            mean_size_per_type={TileKind(kind): item["mean_size"] for kind, item in per_type.items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractError(f"{path} is not a coverage solution: {exc}") from exc
