from __future__ import annotations

import logging
import warnings
from collections.abc import Mapping, Sequence

import numpy as np
from scipy import stats

from minicat.core.exceptions import ContractError, MetricError
from minicat.core.types import EntropyReport, Histogram, PowerLawFit, SaleLog

__all__ = (
    "fit_power_law",
    "interpurchase_histogram",
    "rank_correlation",
    "size_entropy",
)

logger = logging.getLogger(__name__)


def size_entropy(member_sizes: Sequence[int]) -> EntropyReport:
    """Entropy of a member-size distribution against the uniform distribution, in bits

    With `p_i = size_i / sum(size)`: `h1 = -sum(p_i * log2(p_i))` and `h0 = log2(n)`. Higher entropy
    means more homogeneous members; `h1 == h0` iff all sizes are equal.

    Args:
        member_sizes (Sequence[int]): sizes, all >= 1

    Raises:
        MetricError: on an empty list or a size below 1

    Returns:
        EntropyReport: sizes, h1 and h0
    """
    sizes = np.asarray(list(member_sizes), dtype=np.float64)
    if sizes.size == 0:
        raise MetricError("size_entropy needs at least one member size")
    if (sizes < 1).any():
        raise MetricError(f"member sizes must be >= 1, given minimum: {sizes.min():g}")
    p = sizes / sizes.sum()
    h1 = float(-(p * np.log2(p)).sum())
    h0 = float(np.log2(sizes.size))
    # floating point can push h1 a hair past h0 for uniform sizes
    return EntropyReport(member_sizes=tuple(int(s) for s in sizes), h1=max(0.0, min(h1, h0)), h0=h0)


def interpurchase_histogram(log: SaleLog) -> Histogram:
    """Day gaps between consecutive distinct purchase dates of each customer

    Args:
        log (SaleLog): log sorted by (customer_id, timestamp)

    Raises:
        ContractError: if the log is not sorted

    Returns:
        Histogram: gap in days -> number of gaps, ascending gap
    """
    if not log.is_sorted():
        raise ContractError("interpurchase_histogram needs a log sorted by (customer_id, timestamp)")
    visits = log.frame[["customer_id", "day"]].drop_duplicates()
    customers = visits["customer_id"].to_numpy()
    days = visits["day"].to_numpy(dtype=np.int64)
    same = customers[1:] == customers[:-1]
    gaps = (days[1:] - days[:-1])[same]
    values, counts = np.unique(gaps, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts, strict=True)}


def fit_power_law(histogram: Mapping[float, float]) -> PowerLawFit:
    """Least-squares line of log2(count) against log2(value)

    Only bins with a positive value and a positive count take part. No binning, no maximum likelihood.

    Args:
        histogram (Mapping[float, float]): value -> count

    Raises:
        MetricError: with fewer than two usable bins, or when all usable values are equal

    Returns:
        PowerLawFit: slope `alpha`, intercept and r_squared
    """
    usable = sorted((float(v), float(c)) for v, c in histogram.items() if v > 0 and c > 0)
    if len(usable) < 2:
        raise MetricError(f"fit_power_law needs at least two usable bins, given: {len(usable)}")
    x = np.log2([v for v, _ in usable])
    y = np.log2([c for _, c in usable])
    if np.ptp(x) == 0:
        raise MetricError("fit_power_law needs at least two distinct values")
    slope, intercept = np.polyfit(x, y, deg=1)
    residual = y - (slope * x + intercept)
    total = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 - float((residual**2).sum()) / total if total > 0 else 1.0
    return PowerLawFit(alpha=float(slope), intercept=float(intercept), r_squared=min(1.0, max(0.0, r_squared)))


def rank_correlation(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation, ties take their average rank

    Args:
        xs (Sequence[float]): first sample
        ys (Sequence[float]): second sample, same length

    Raises:
        MetricError: on a length mismatch, fewer than two points, or a constant input

    Returns:
        float: correlation in [-1, 1]
    """
    if len(xs) != len(ys):
        raise MetricError(f"rank_correlation needs equal lengths, given: {len(xs)} and {len(ys)}")
    if len(xs) < 2:
        raise MetricError("rank_correlation needs at least two points")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise MetricError("rank_correlation is undefined for a constant input")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rho = stats.spearmanr(x, y).statistic
    return float(min(1.0, max(-1.0, rho)))
