import math
from collections.abc import Callable

import numpy as np
import pytest

from minicat.core.exceptions import ContractError, MetricError
from minicat.core.metrics import fit_power_law, interpurchase_histogram, rank_correlation, size_entropy
from minicat.core.types import SaleLog
from tests.helpers import make_log


# ---------------------------------------------------------------------------------------
# Entropy
# ---------------------------------------------------------------------------------------
@pytest.mark.parametrize(
    "n, exp_h0",
    [
        (15, 3.91),
        (235, 7.88),
        (1778, 10.79),
        (818, 9.68),
    ],
)
def test_uniform_entropy(n: int, exp_h0: float) -> None:
    report = size_entropy([4] * n)
    assert report.h0 == pytest.approx(exp_h0, abs=0.01)
    assert report.h1 == pytest.approx(report.h0)
    assert report.h1 <= report.h0


def test_single_member() -> None:
    report = size_entropy([7])
    assert report.h1 == 0.0
    assert report.h0 == 0.0


def test_uneven_sizes_lower_entropy() -> None:
    report = size_entropy([1, 1, 1, 97])
    assert report.h0 == 2.0
    assert 0.0 < report.h1 < report.h0
    expected = -sum(p * math.log2(p) for p in (0.01, 0.01, 0.01, 0.97))
    assert report.h1 == pytest.approx(expected)
    assert report.member_sizes == (1, 1, 1, 97)


@pytest.mark.parametrize(
    "sizes, same",
    [
        # Member order does not matter
        ([1, 2, 3], [3, 1, 2]),
        ([5, 1, 1, 9], [1, 9, 5, 1]),
        # Only the proportions matter
        ([1, 2, 3], [10, 20, 30]),
        ([2, 7], [6, 21]),
    ],
)
def test_entropy_invariance(sizes: list[int], same: list[int]) -> None:
    report, other = size_entropy(sizes), size_entropy(same)
    assert other.h1 == pytest.approx(report.h1)
    assert other.h0 == report.h0


@pytest.mark.parametrize("sizes", [[], [3, 0], [2, -1]])
def test_entropy_rejects(sizes: list[int]) -> None:
    with pytest.raises(MetricError):
        size_entropy(sizes)


# ---------------------------------------------------------------------------------------
# Inter-purchase times
# ---------------------------------------------------------------------------------------
def test_interpurchase_histogram() -> None:
    log = make_log(
        [
            ("c1", "A", 0),
            ("c1", "B", 0),
            ("c1", "A", 3),
            ("c1", "C", 10),
            ("c2", "A", 5),
            ("c2", "B", 6),
            ("c3", "D", 2),
        ]
    )
    # same-day purchases are one visit; c3 has no gap
    assert interpurchase_histogram(log) == {1: 1, 3: 1, 7: 1}


def test_interpurchase_empty() -> None:
    assert interpurchase_histogram(make_log([])) == {}


def test_interpurchase_needs_sorted_log() -> None:
    log = make_log([("c1", "A", 0), ("c1", "B", 4), ("c2", "A", 1)])
    with pytest.raises(ContractError):
        interpurchase_histogram(SaleLog(log.frame.iloc[::-1]))


# ---------------------------------------------------------------------------------------
# Power law
# ---------------------------------------------------------------------------------------
def test_exact_power_law() -> None:
    histogram = {v: 2.0**20 * v**-1.25 for v in range(1, 60)}
    fit = fit_power_law(histogram)
    assert fit.alpha == pytest.approx(-1.25, abs=1e-6)
    assert fit.intercept == pytest.approx(20.0, abs=1e-6)
    assert fit.r_squared == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(5))
def test_perturbed_power_law(seed: int) -> None:
    rng = np.random.default_rng(seed)
    histogram = {v: 2.0**20 * v**-1.25 * rng.uniform(0.9, 1.1) for v in range(1, 200)}
    fit = fit_power_law(histogram)
    assert fit.alpha == pytest.approx(-1.25, abs=0.1)
    assert 0.9 < fit.r_squared <= 1.0


def test_power_law_skips_empty_bins() -> None:
    histogram = {0: 100, 1: 64, 2: 0, 4: 16, 16: 1}
    assert fit_power_law(histogram).alpha == pytest.approx(-1.5)


@pytest.mark.parametrize(
    "histogram, exp_alpha, exp_r_squared",
    [
        # Counts quarter when the value doubles
        ({1: 8, 2: 2}, -2.0, 1.0),
        # A flat histogram has no slope and nothing left to explain
        ({1: 4, 2: 4, 4: 4}, 0.0, 1.0),
        # Counts double when the value doubles
        ({1: 1, 2: 2, 4: 4, 8: 8}, 1.0, 1.0),
    ],
)
def test_power_law_slopes(histogram: dict[int, int], exp_alpha: float, exp_r_squared: float) -> None:
    fit = fit_power_law(histogram)
    assert fit.alpha == pytest.approx(exp_alpha, abs=1e-9)
    assert fit.r_squared == pytest.approx(exp_r_squared)


@pytest.mark.parametrize(
    "histogram",
    [
        # One usable bin
        {3: 10},
        # Only zero values and zero counts
        {0: 5, 4: 0},
        {},
    ],
)
def test_power_law_rejects(histogram: dict[int, int]) -> None:
    with pytest.raises(MetricError):
        fit_power_law(histogram)


# ---------------------------------------------------------------------------------------
# Rank correlation
# ---------------------------------------------------------------------------------------
@pytest.mark.parametrize(
    "xs, ys, exp",
    [
        ([1, 2, 3, 4, 5], [10, 20, 35, 100, 1000], 1.0),
        ([1, 2, 3, 4], [9, 5, 3, 1], -1.0),
        # Ties take their average rank
        ([1, 2, 3, 4], [1, 1, 2, 2], 4 / math.sqrt(20)),
        # One swapped pair out of three
        ([1, 2, 3], [1, 3, 2], 0.5),
    ],
)
def test_rank_correlation(xs: list[float], ys: list[float], exp: float) -> None:
    assert rank_correlation(xs, ys) == pytest.approx(exp)


@pytest.mark.parametrize(
    "xs, ys",
    [
        ([1, 2], [1, 2, 3]),
        ([1], [1]),
        ([3, 3, 3], [1, 2, 3]),
    ],
)
def test_rank_correlation_rejects(xs: list[float], ys: list[float]) -> None:
    with pytest.raises(MetricError):
        rank_correlation(xs, ys)


@pytest.mark.parametrize(
    "transform",
    [
        np.exp,
        lambda v: v**3,
        lambda v: 5.0 * v - 2.0,
        np.arctan,
    ],
)
@pytest.mark.parametrize("seed", range(3))
def test_rank_correlation_ignores_monotone_transforms(
    transform: Callable[[np.ndarray], np.ndarray], seed: int
) -> None:
    rng = np.random.default_rng(seed)
    xs = rng.normal(size=30)
    ys = xs + rng.normal(size=30)
    exp = rank_correlation(list(xs), list(ys))
    assert rank_correlation(list(transform(xs)), list(ys)) == pytest.approx(exp)
    assert rank_correlation(list(xs), list(transform(ys))) == pytest.approx(exp)
