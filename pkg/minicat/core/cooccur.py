"""Togetherness counts for unordered product pairs.

Two sale events are *together* when one customer made them within `window_days` calendar days of
each other (pairwise, not basket partitioning: days 0 and 7 co-occur, 0 and 14 do not, whatever
happens on day 7). Each qualifying pair of events with distinct products adds one to its pair.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import numpy.typing as npt
import pandas as pd

from minicat.core.exceptions import ContractError
from minicat.core.types import CoOccurrenceCounts, SaleLog

__all__ = (
    "count_copurchases",
    "load_pairs",
    "write_pairs_tsv",
)

logger = logging.getLogger(__name__)

IntArray = npt.NDArray[np.int64]


def _chunk_pair_keys(
    customers: IntArray, days: IntArray, products: IntArray, n_products: int, window_days: int, dedup: bool
) -> IntArray:
    """Canonical pair keys `lo * n_products + hi` for every qualifying event pair of one chunk.

    Rows are sorted by customer then day, so if no pair at offset `s` qualifies, none at `s + 1` does.
    """
    keys: list[IntArray] = []
    owners: list[IntArray] = []
    n = len(customers)
    offset = 1
    while offset < n:
        head, tail = slice(0, n - offset), slice(offset, n)
        together = (customers[head] == customers[tail]) & (days[tail] - days[head] <= window_days)
        if not together.any():
            break
        a = products[head][together]
        b = products[tail][together]
        distinct = a != b
        a, b = a[distinct], b[distinct]
        keys.append(np.minimum(a, b) * n_products + np.maximum(a, b))
        if dedup:
            owners.append(customers[head][together][distinct])
        offset += 1
    if not keys:
        return np.empty(0, dtype=np.int64)
    pair_keys = np.concatenate(keys)
    if dedup:
        stacked = np.unique(np.stack([np.concatenate(owners), pair_keys]), axis=1)
        return stacked[1]
    return pair_keys


def _partition(customers: IntArray, parts: int) -> list[tuple[int, int]]:
    """Split row range into at most `parts` slices that never cut through a customer"""
    n = len(customers)
    if n == 0 or parts <= 1:
        return [(0, n)]
    starts = np.flatnonzero(np.r_[True, customers[1:] != customers[:-1]])
    bounds = [0]
    for i in range(1, parts):
        target = i * n // parts
        cut = int(starts[np.searchsorted(starts, target)]) if target <= starts[-1] else n
        if cut > bounds[-1]:
            bounds.append(cut)
    if bounds[-1] != n:
        bounds.append(n)
    return list(zip(bounds[:-1], bounds[1:], strict=True))


def count_copurchases(
    log: SaleLog,
    window_days: int = 7,
    dedup_per_customer: bool = False,
    workers: int = 1,
) -> CoOccurrenceCounts:
    """Count togetherness for every unordered product pair

    Quantities do not affect counts. Same-day purchases of distinct products are together.

    Args:
        log (SaleLog): log sorted by (customer_id, timestamp)
        window_days (int, optional): largest day difference that still counts as together. Defaults to 7.
        dedup_per_customer (bool, optional): count a pair at most once per customer. Defaults to False.
        workers (int, optional): threads over customer partitions. The result does not depend on it.
            Defaults to 1.

    Raises:
        ValueError: if `window_days` < 1
        ContractError: if the log is not sorted

    Returns:
        CoOccurrenceCounts: pair counts, lexicographically ordered
    """
    if window_days < 1:
        raise ValueError(f"window_days must be positive, given: {window_days}")
    if not log.is_sorted():
        raise ContractError("count_copurchases needs a log sorted by (customer_id, timestamp)")
    frame = log.frame
    product_codes, product_ids = pd.factorize(frame["product_id"], sort=True)
    customer_codes, _ = pd.factorize(frame["customer_id"], sort=True)
    customers = customer_codes.astype(np.int64)
    products = product_codes.astype(np.int64)
    days = frame["day"].to_numpy(dtype=np.int64)
    n_products = len(product_ids)

    chunks = _partition(customers, max(1, workers))
    args = [
        (customers[lo:hi], days[lo:hi], products[lo:hi], n_products, window_days, dedup_per_customer)
        for lo, hi in chunks
    ]
    if len(args) == 1:
        parts = [_chunk_pair_keys(*args[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _chunk_pair_keys(*a), args))
    keys = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    unique, counts = np.unique(keys, return_counts=True)

    names = np.asarray(product_ids, dtype=object)
    result = pd.DataFrame(
        {
            "product_a": names[unique // max(n_products, 1)] if len(unique) else np.empty(0, dtype=object),
            "product_b": names[unique % max(n_products, 1)] if len(unique) else np.empty(0, dtype=object),
            "count": counts.astype(np.int64),
        }
    )
    logger.info(
        "Counted %d product pairs from %d events (window %d days, %d chunk(s))",
        len(result),
        len(log),
        window_days,
        len(chunks),
    )
    return CoOccurrenceCounts(result, window_days=window_days, dedup_per_customer=dedup_per_customer)


def write_pairs_tsv(counts: CoOccurrenceCounts, path: str | Path) -> None:
    """Write `productA<TAB>productB<TAB>count` lines, canonical pair order, no header"""
    counts.frame.to_csv(path, sep="\t", header=False, index=False, lineterminator="\n")


def load_pairs(path: str | Path, window_days: int = 7, dedup_per_customer: bool = False) -> CoOccurrenceCounts:
    """Read a pairs.tsv written by `write_pairs_tsv`"""
    frame = pd.read_csv(
        path,
        sep="\t",
        header=None,
        names=["product_a", "product_b", "count"],
        dtype={"product_a": str, "product_b": str, "count": np.int64},
        keep_default_na=False,
    )
    return CoOccurrenceCounts(frame, window_days=window_days, dedup_per_customer=dedup_per_customer)
