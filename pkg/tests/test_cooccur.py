from collections import Counter
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from minicat.core.cooccur import count_copurchases, load_pairs, write_pairs_tsv
from minicat.core.exceptions import ContractError
from minicat.core.ingest import load_products, load_sales
from minicat.core.types import SALES_COLUMNS, CoOccurrenceCounts, SaleLog
from tests.helpers import EPOCH, make_log


def random_log(seed: int) -> SaleLog:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(0, 201))
    customers = rng.integers(0, 6, size=n)
    products = rng.integers(0, 9, size=n)
    days = rng.integers(0, 40, size=n)
    return make_log([(f"c{c}", f"p{p}", int(d)) for c, p, d in zip(customers, products, days, strict=True)])


def brute_force(log: SaleLog, window_days: int, dedup: bool = False) -> dict[tuple[str, str], int]:
    events = list(zip(log.frame["customer_id"], log.frame["product_id"], log.frame["day"], strict=True))
    counts: Counter[tuple[str, str]] = Counter()
    seen: set[tuple[str, str, str]] = set()
    for i, (c1, p1, d1) in enumerate(events):
        for c2, p2, d2 in events[i + 1 :]:
            if c1 != c2 or p1 == p2 or abs(int(d1) - int(d2)) > window_days:
                continue
            pair = (min(p1, p2), max(p1, p2))
            if dedup:
                if (c1, *pair) in seen:
                    continue
                seen.add((c1, *pair))
            counts[pair] += 1
    return dict(counts)


# ---------------------------------------------------------------------------------------
# Window semantics
# ---------------------------------------------------------------------------------------
@pytest.mark.parametrize(
    "rows, window, exp",
    [
        # Days 0 and 7 co-occur
        ([("c", "A", 0), ("c", "B", 7)], 7, {("A", "B"): 1}),
        # Days 0 and 14 do not, whatever happens on day 7
        ([("c", "A", 0), ("c", "C", 7), ("c", "B", 14)], 7, {("A", "C"): 1, ("B", "C"): 1}),
        # Same day counts
        ([("c", "A", 3), ("c", "B", 3)], 7, {("A", "B"): 1}),
        # Different customers never co-occur
        ([("c", "A", 0), ("d", "B", 0)], 7, {}),
        # Repeat purchases of one product are no pair
        ([("c", "A", 0), ("c", "A", 1)], 7, {}),
        # Event pairs: two A and one B give two togetherness events
        ([("c", "A", 0), ("c", "A", 1), ("c", "B", 2)], 7, {("A", "B"): 2}),
        # Window of one day
        ([("c", "A", 0), ("c", "B", 1), ("c", "C", 2)], 1, {("A", "B"): 1, ("B", "C"): 1}),
    ],
)
def test_count_copurchases_window(rows: list[tuple[str, str, int]], window: int, exp: dict) -> None:
    counts = count_copurchases(make_log(rows), window_days=window)
    assert dict(counts.items()) == exp


def test_counts_of_fixture_files(products_csv: Path, sales_csv: Path) -> None:
    log = load_sales(sales_csv, load_products(products_csv))
    counts = count_copurchases(log)
    assert dict(counts.items()) == {("A", "B"): 2, ("A", "C"): 1, ("B", "C"): 1, ("C", "D"): 1}
    assert counts["B", "A"] == 2


def test_dedup_per_customer() -> None:
    log = make_log([("c", "A", 0), ("c", "B", 1), ("c", "A", 20), ("c", "B", 21), ("d", "A", 0), ("d", "B", 0)])
    assert dict(count_copurchases(log).items()) == {("A", "B"): 3}
    assert dict(count_copurchases(log, dedup_per_customer=True).items()) == {("A", "B"): 2}


@pytest.mark.parametrize("seed", range(100))
def test_matches_brute_force(seed: int) -> None:
    log = random_log(seed)
    window = 1 + seed % 10
    assert dict(count_copurchases(log, window_days=window).items()) == brute_force(log, window)


@pytest.mark.parametrize("seed", range(0, 100, 10))
def test_dedup_matches_brute_force(seed: int) -> None:
    log = random_log(seed)
    assert dict(count_copurchases(log, dedup_per_customer=True).items()) == brute_force(log, 7, dedup=True)


@pytest.mark.parametrize(
    "seed, narrow, wide",
    [
        (1, 1, 7),
        (2, 3, 4),
        (4, 7, 30),
        (5, 1, 40),
    ],
)
def test_wider_window_never_loses_pairs(seed: int, narrow: int, wide: int) -> None:
    log = random_log(seed)
    small = count_copurchases(log, window_days=narrow)
    large = count_copurchases(log, window_days=wide)
    assert all(large.get(pair, 0) >= count for pair, count in small.items())


@pytest.mark.parametrize("seed", range(0, 50, 7))
def test_customers_count_independently(seed: int) -> None:
    log = random_log(seed)
    total: Counter[tuple[str, str]] = Counter()
    for _, rows in log.frame.groupby("customer_id", sort=True):
        total.update(dict(count_copurchases(SaleLog(rows.reset_index(drop=True))).items()))
    assert dict(count_copurchases(log).items()) == dict(total)


@pytest.mark.parametrize("workers", [2, 3, 8, 64])
def test_workers_do_not_change_counts(workers: int) -> None:
    log = random_log(7)
    single = count_copurchases(log, workers=1)
    parallel = count_copurchases(log, workers=workers)
    assert parallel == single
    assert parallel.frame.equals(single.frame)


def test_counts_are_ordered() -> None:
    frame = count_copurchases(random_log(3)).frame
    pairs = list(zip(frame["product_a"], frame["product_b"], strict=True))
    assert pairs == sorted(pairs)
    assert all(a < b for a, b in pairs)


# ---------------------------------------------------------------------------------------
# Errors and edge cases
# ---------------------------------------------------------------------------------------
def test_empty_log() -> None:
    assert len(count_copurchases(make_log([]))) == 0


def test_invalid_window() -> None:
    with pytest.raises(ValueError):
        count_copurchases(make_log([("c", "A", 0)]), window_days=0)


def test_unsorted_log_is_rejected() -> None:
    frame = pd.DataFrame(
        {
            "customer_id": ["c2", "c1"],
            "product_id": ["A", "B"],
            "timestamp": [EPOCH, EPOCH],
            "day": [0, 0],
            "register_id": "r1",
            "store_id": "s1",
            "quantity": 1,
        },
        columns=list(SALES_COLUMNS),
    )
    with pytest.raises(ContractError):
        count_copurchases(SaleLog(frame))


def test_pairs_tsv(tmp_path: Path) -> None:
    counts = CoOccurrenceCounts.from_dict({("B", "A"): 3, ("A", "C"): 1}, window_days=7)
    path = tmp_path / "pairs.tsv"
    write_pairs_tsv(counts, path)
    assert path.read_text() == "A\tB\t3\nA\tC\t1\n"
    assert load_pairs(path) == counts
