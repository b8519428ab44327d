"""Catalog and sales-log loading.

Both loaders parse strictly (RFC 4180 via `csv`, exact column count per row) so that malformed
input fails with its line number; the validated columns are then handed to pandas for the
vectorized filtering, deduplication and sorting.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterator, Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from minicat.core.exceptions import IngestError
from minicat.core.types import SALES_COLUMNS, ProductCatalog, ProductKind, ProductRecord, SaleKind, SaleLog

__all__ = (
    "PRODUCT_HEADER",
    "SALES_HEADER",
    "load_products",
    "load_sales",
    "normalize_sales",
    "write_products_csv",
    "write_sales_csv",
)

logger = logging.getLogger(__name__)

PRODUCT_HEADER = ("product_id", "description", "subcategory_id", "class_id", "group_id", "kind")
SALES_HEADER = ("customer_id", "product_id", "timestamp", "register_id", "store_id", "quantity", "kind")

_DEDUP_KEY = ["customer_id", "product_id", "register_id", "timestamp"]
_ORDER_KEY = ["customer_id", "timestamp", "product_id", "register_id"]
_UTC_OFFSET = r"(?<=\d)(?:Z|[+-]\d{2}:?\d{2})$"


def _read_rows(path: str | Path, required: Sequence[str]) -> Iterator[tuple[int, list[str]]]:
    """Yield `(line, values)` for every data row, `values` ordered as `required`.

    Extra columns (price, discount, ...) are accepted and ignored. Blank lines are skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"No such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise IngestError(f"{path.name}: empty file, expected header {','.join(required)}", line=1)
        header = [name.strip() for name in header]
        missing = [name for name in required if name not in header]
        if missing:
            raise IngestError(f"{path.name}: header is missing {missing}", line=1)
        index = [header.index(name) for name in required]
        width = len(header)
        for row in reader:
            if not row:
                continue
            if len(row) != width:
                raise IngestError(f"{path.name}: expected {width} fields, found {len(row)}", line=reader.line_num)
            yield reader.line_num, [row[i] for i in index]


def load_products(path: str | Path) -> ProductCatalog:
    """Load the product catalog, keeping material items only

    Non-material and mixed material/service rows are counted and excluded.

    Args:
        path (str | Path): products.csv with header `PRODUCT_HEADER`

    Raises:
        IngestError: missing file, wrong column count, empty product or hierarchy id, unknown kind, or a duplicate
            product_id (the message cites both lines)

    Returns:
        ProductCatalog: material products and exclusion counts
    """
    products: dict[str, ProductRecord] = {}
    first_seen: dict[str, int] = {}
    excluded = {ProductKind.NON_MATERIAL: 0, ProductKind.MIXED: 0}
    for line, (product_id, description, subcategory_id, class_id, group_id, kind) in _read_rows(
        path, PRODUCT_HEADER
    ):
        product_id = product_id.strip()
        if not product_id:
            raise IngestError("empty product_id", line=line)
        if product_id in first_seen:
            raise IngestError(
                f"duplicate product_id {product_id!r} on lines {first_seen[product_id]} and {line}", line=line
            )
        first_seen[product_id] = line
        try:
            product_kind = ProductKind(kind.strip())
        except ValueError:
            raise IngestError(f"unknown product kind {kind!r}", line=line) from None
        if product_kind != ProductKind.MATERIAL:
            excluded[product_kind] += 1
            continue
        levels = {"subcategory_id": subcategory_id.strip(), "class_id": class_id.strip(), "group_id": group_id.strip()}
        for name, value in levels.items():
            if not value:
                raise IngestError(f"empty {name} for product {product_id!r}", line=line)
        products[product_id] = ProductRecord(
            product_id=product_id,
            description=description,
            kind=product_kind,
            **levels,
        )
    catalog = ProductCatalog(
        products=products,
        excluded_non_material=excluded[ProductKind.NON_MATERIAL],
        excluded_mixed=excluded[ProductKind.MIXED],
    )
    if catalog.excluded:
        logger.warning(
            "Excluded %d non-material and %d mixed catalog rows", catalog.excluded_non_material, catalog.excluded_mixed
        )
    logger.info("Loaded %d material products from %s", len(catalog), path)
    return catalog


def load_sales(path: str | Path, catalog: ProductCatalog) -> SaleLog:
    """Load the sales log against a loaded catalog

    Returns are dropped, rows whose product is not a material catalog item are dropped, and rows
    sharing (customer, product, register, timestamp) collapse into one sale whose quantity is the
    sum. Timestamps are compared at second precision, so rows that differ only below one second
    collapse too. A UTC offset is dropped and the local wall time kept: a sale belongs to the calendar
    day of the store that rang it up, whatever the offset of the other rows.

    Args:
        path (str | Path): sales.csv with header `SALES_HEADER`
        catalog (ProductCatalog): material products

    Raises:
        IngestError: missing file, wrong column count, unparseable timestamp, non-integer quantity,
            non-positive quantity on a sale, or unknown kind

    Returns:
        SaleLog: deduplicated log sorted by (customer_id, timestamp, product_id)
    """
    lines: list[int] = []
    columns: list[list[str]] = [[] for _ in SALES_HEADER]
    for line, values in _read_rows(path, SALES_HEADER):
        lines.append(line)
        for column, value in zip(columns, values, strict=True):
            column.append(value.strip())
    frame = pd.DataFrame(dict(zip(SALES_HEADER, columns, strict=True)), dtype=object)
    line_numbers = np.asarray(lines, dtype=np.int64)

    kinds = frame["kind"]
    bad_kind = ~kinds.isin([kind.value for kind in SaleKind])
    if bad_kind.any():
        at = int(np.flatnonzero(bad_kind.to_numpy())[0])
        raise IngestError(f"unknown sale kind {kinds.iloc[at]!r}", line=int(line_numbers[at]))

    wall_time = frame["timestamp"].str.replace(_UTC_OFFSET, "", regex=True)
    timestamps = pd.to_datetime(wall_time, format="ISO8601", errors="coerce")
    if timestamps.isna().any():
        at = int(np.flatnonzero(timestamps.isna().to_numpy())[0])
        raise IngestError(f"unparseable timestamp {frame['timestamp'].iloc[at]!r}", line=int(line_numbers[at]))
    frame["timestamp"] = timestamps.dt.floor("s")

    quantities = pd.to_numeric(frame["quantity"], errors="coerce")
    bad_quantity = quantities.isna() | (quantities != np.floor(quantities))
    if bad_quantity.any():
        at = int(np.flatnonzero(bad_quantity.to_numpy())[0])
        raise IngestError(f"quantity {frame['quantity'].iloc[at]!r} is not an integer", line=int(line_numbers[at]))
    frame["quantity"] = quantities.astype("int64")

    is_sale = (kinds == SaleKind.SALE.value).to_numpy()
    non_positive = is_sale & (frame["quantity"].to_numpy() < 1)
    if non_positive.any():
        at = int(np.flatnonzero(non_positive)[0])
        raise IngestError(
            f"quantity {int(frame['quantity'].iloc[at])} on a sale must be positive", line=int(line_numbers[at])
        )

    returns_dropped = int((~is_sale).sum())
    frame = frame[is_sale]
    known = frame["product_id"].isin(catalog.products.keys())
    unknown_dropped = int((~known).sum())
    frame = frame[known]
    if returns_dropped:
        logger.warning("Dropped %d return rows", returns_dropped)
    if unknown_dropped:
        logger.warning("Dropped %d rows referencing unknown or non-material products", unknown_dropped)

    log = normalize_sales(frame, returns_dropped=returns_dropped, unknown_dropped=unknown_dropped)
    logger.info("Loaded %d sale events from %s", len(log), path)
    return log


def normalize_sales(frame: pd.DataFrame, returns_dropped: int = 0, unknown_dropped: int = 0) -> SaleLog:
    """Collapse duplicate sales and sort

    Args:
        frame (pd.DataFrame): sale rows with customer_id, product_id, timestamp (datetime64),
            register_id, store_id and quantity columns
        returns_dropped (int, optional): carried into the log metadata. Defaults to 0.
        unknown_dropped (int, optional): carried into the log metadata. Defaults to 0.

    Returns:
        SaleLog: one row per (customer_id, product_id, register_id, timestamp), quantities summed,
            ordered by (customer_id, timestamp, product_id, register_id)
    """
    if frame.empty:
        empty = pd.DataFrame({name: pd.Series(dtype=object) for name in SALES_COLUMNS})
        empty["timestamp"] = pd.Series(dtype="datetime64[ns]")
        empty["day"] = pd.Series(dtype="int64")
        empty["quantity"] = pd.Series(dtype="int64")
        return SaleLog(empty, returns_dropped=returns_dropped, unknown_dropped=unknown_dropped)
    grouped = (
        frame.groupby(_DEDUP_KEY, sort=False, observed=True)
        .agg(store_id=("store_id", "first"), quantity=("quantity", "sum"))
        .reset_index()
    )
    duplicates_collapsed = len(frame) - len(grouped)
    if duplicates_collapsed:
        logger.warning("Collapsed %d duplicate sale rows", duplicates_collapsed)
    grouped = grouped.sort_values(_ORDER_KEY, kind="mergesort").reset_index(drop=True)
    grouped["day"] = grouped["timestamp"].to_numpy().astype("datetime64[D]").astype("int64")
    grouped["quantity"] = grouped["quantity"].astype("int64")
    return SaleLog(
        grouped,
        returns_dropped=returns_dropped,
        unknown_dropped=unknown_dropped,
        duplicates_collapsed=duplicates_collapsed,
    )


def write_products_csv(catalog: ProductCatalog, path: str | Path) -> None:
    """Write a catalog in the products.csv format, ordered by product_id"""
    rows = [
        (r.product_id, r.description, r.subcategory_id, r.class_id, r.group_id, r.kind.value)
        for _, r in sorted(catalog.products.items())
    ]
    frame = pd.DataFrame(rows, columns=list(PRODUCT_HEADER))
    frame.to_csv(path, index=False, lineterminator="\n")


def write_sales_csv(log: SaleLog, path: str | Path) -> None:
    """Write a sale log in the sales.csv format, in log order"""
    frame = log.frame
    out = pd.DataFrame(
        {
            "customer_id": frame["customer_id"],
            "product_id": frame["product_id"],
            "timestamp": frame["timestamp"].dt.strftime("%Y-%m-%dT%H:%M:%S"),
            "register_id": frame["register_id"],
            "store_id": frame["store_id"],
            "quantity": frame["quantity"],
            "kind": SaleKind.SALE.value,
        },
        columns=list(SALES_HEADER),
    )
    out.to_csv(path, index=False, lineterminator="\n")
