from __future__ import annotations

from collections.abc import Callable, Sequence
from pathlib import Path

import networkx as nx
import pandas as pd

from minicat.core.graph import canonicalize
from minicat.core.ingest import normalize_sales
from minicat.core.types import SaleLog

CsvWriter = Callable[[str, Sequence[str], Sequence[Sequence[object]]], Path]


def make_graph(edges: Sequence[tuple[str, str]], isolated: Sequence[str] = ()) -> nx.Graph:
    """Frozen product network with every node selling once per incident edge plus one"""
    graph = nx.Graph()
    graph.add_nodes_from(isolated)
    graph.add_edges_from(edges)
    for node in graph.nodes:
        graph.nodes[node]["sales_volume"] = graph.degree(node) + 1
        graph.nodes[node]["description"] = f"item {node}"
    return canonicalize(graph)


def star(center: str, leaves: Sequence[str]) -> list[tuple[str, str]]:
    return [(center, leaf) for leaf in leaves]


def path(nodes: Sequence[str]) -> list[tuple[str, str]]:
    return list(zip(nodes[:-1], nodes[1:], strict=True))


def clique(nodes: Sequence[str]) -> list[tuple[str, str]]:
    return [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1 :]]


EPOCH = pd.Timestamp("2024-01-01")


def make_log(rows: Sequence[tuple[str, str, int]]) -> SaleLog:
    """Sale log of (customer, product, day) rows at one register, each row at its own second"""
    frame = pd.DataFrame(
        {
            "customer_id": [c for c, _, _ in rows],
            "product_id": [p for _, p, _ in rows],
            "timestamp": [EPOCH + pd.Timedelta(days=d, seconds=i) for i, (_, _, d) in enumerate(rows)],
            "register_id": "r1",
            "store_id": "s1",
            "quantity": 1,
        }
    )
    return normalize_sales(frame)
