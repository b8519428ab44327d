from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

import pytest

from minicat.core.ingest import PRODUCT_HEADER, SALES_HEADER
from tests.helpers import CsvWriter


@pytest.fixture
def write_csv(tmp_path: Path) -> CsvWriter:
    def write(name: str, header: Sequence[str], rows: Sequence[Sequence[object]]) -> Path:
        path = tmp_path / name
        lines = [",".join(header)] + [",".join(str(value) for value in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write


@pytest.fixture
def product_rows() -> list[tuple[str, ...]]:
    return [
        ("A", "hammer", "s1", "c1", "g1", "material"),
        ("B", "nails", "s1", "c1", "g1", "material"),
        ("C", "saw", "s2", "c1", "g1", "material"),
        ("D", "paint", "s3", "c2", "g1", "material"),
        ("X", "installation", "s9", "c9", "g9", "non_material"),
        ("Y", "fence with setup", "s9", "c9", "g9", "mixed"),
    ]


@pytest.fixture
def products_csv(write_csv: CsvWriter, product_rows: list[tuple[str, ...]]) -> Path:
    return write_csv("products.csv", PRODUCT_HEADER, product_rows)


@pytest.fixture
def sales_csv(write_csv: CsvWriter) -> Path:
    return write_csv(
        "sales.csv",
        SALES_HEADER,
        [
            ("c2", "B", "2024-01-03T10:00:00", "r1", "s1", 1, "sale"),
            ("c1", "A", "2024-01-01T09:00:00", "r1", "s1", 1, "sale"),
            ("c1", "B", "2024-01-01T09:00:00", "r1", "s1", 2, "sale"),
            ("c1", "B", "2024-01-01T09:00:00", "r1", "s1", 1, "sale"),
            ("c1", "C", "2024-01-08T12:30:00", "r2", "s1", 1, "sale"),
            ("c1", "D", "2024-01-15T12:30:00", "r2", "s1", 1, "sale"),
            ("c1", "A", "2024-01-02T09:00:00", "r1", "s1", 1, "return"),
            ("c2", "X", "2024-01-03T10:00:00", "r1", "s1", 1, "sale"),
            ("c2", "Z", "2024-01-03T10:00:00", "r1", "s1", 1, "sale"),
            ("c2", "A", "2024-01-04T10:00:00", "r3", "s2", 3, "sale"),
        ],
    )
