from __future__ import annotations

import datetime
from collections.abc import Iterator, Mapping
from enum import StrEnum
from functools import cached_property
from typing import Annotated, Any, Self

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, model_validator

from minicat.core.utils import canonical_pair

__all__ = (
    "SALES_COLUMNS",
    "TILE_LABELS",
    "CoOccurrenceCounts",
    "CoverageSolution",
    "EntropyReport",
    "Histogram",
    "KindSummary",
    "NetworkStats",
    "PlantSpec",
    "PowerLawFit",
    "ProductCatalog",
    "ProductKind",
    "ProductRecord",
    "SaleEvent",
    "SaleKind",
    "SaleLog",
    "Selection",
    "Staple",
    "Tile",
    "TileKind",
    "TileLabel",
    "TileTable",
)

Histogram = dict[int, int]
"""Value -> count. Keys are kept in ascending order by every producer in this package"""

SALES_COLUMNS = ("customer_id", "product_id", "timestamp", "day", "register_id", "store_id", "quantity")
"""Columns of a normalized sales frame. `day` is the calendar day as days since 1970-01-01"""


class ProductKind(StrEnum):
    MATERIAL = "material"
    NON_MATERIAL = "non_material"
    MIXED = "mixed"


class SaleKind(StrEnum):
    SALE = "sale"
    RETURN = "return"


class TileKind(StrEnum):
    COMMUNITY = "community"
    LINEAR = "linear"
    STAR = "star"


class TileLabel(StrEnum):
    COMPLEMENTS = "complements"
    SUBSTITUTES_BY_CHOICE = "substitutes_by_choice"
    SUBSTITUTES_BY_IGNORANCE = "substitutes_by_ignorance"


TILE_LABELS: dict[TileKind, TileLabel] = {
    TileKind.COMMUNITY: TileLabel.COMPLEMENTS,
    TileKind.STAR: TileLabel.SUBSTITUTES_BY_CHOICE,
    TileKind.LINEAR: TileLabel.SUBSTITUTES_BY_IGNORANCE,
}


# ---------------------------------------------------------------------------------------
# Ingest
# ---------------------------------------------------------------------------------------
class ProductRecord(BaseModel):
    """One catalog row. Each product sits in exactly one subcategory, class and group"""

    model_config = ConfigDict(frozen=True)

    product_id: str = Field(min_length=1)
    description: str = ""
    subcategory_id: str = Field(min_length=1)
    class_id: str = Field(min_length=1)
    group_id: str = Field(min_length=1)
    kind: ProductKind = ProductKind.MATERIAL


class SaleEvent(BaseModel):
    """One purchase row after ingestion"""

    model_config = ConfigDict(frozen=True)

    customer_id: str
    product_id: str
    timestamp: datetime.datetime
    register_id: str
    store_id: str
    quantity: PositiveInt
    kind: SaleKind = SaleKind.SALE

    @property
    def date(self) -> datetime.date:
        return self.timestamp.date()


class ProductCatalog(BaseModel):
    """Material products keyed by product_id, with the load metadata of the file they came from"""

    model_config = ConfigDict(frozen=True)

    products: dict[str, ProductRecord] = Field(default_factory=dict)
    excluded_non_material: NonNegativeInt = 0
    excluded_mixed: NonNegativeInt = 0

    @property
    def excluded(self) -> int:
        return self.excluded_non_material + self.excluded_mixed

    def __len__(self) -> int:
        return len(self.products)

    def __contains__(self, product_id: object) -> bool:
        return product_id in self.products

    def __getitem__(self, product_id: str) -> ProductRecord:
        return self.products[product_id]

    def hierarchy_sizes(self, level: str) -> list[int]:
        """Member sizes of one hierarchy level, ordered by member id.

        Args:
            level (str): one of `group`, `class`, `subcategory`

        Raises:
            KeyError: unknown level

        Returns:
            list[int]: number of products per member
        """
        attr = {"group": "group_id", "class": "class_id", "subcategory": "subcategory_id"}[level]
        sizes: dict[str, int] = {}
        for record in self.products.values():
            key = getattr(record, attr)
            sizes[key] = sizes.get(key, 0) + 1
        return [sizes[key] for key in sorted(sizes)]


class SaleLog:
    """Deduplicated sales, sorted by (customer_id, timestamp, product_id).

    The log wraps a pandas frame with the columns of `SALES_COLUMNS`. The frame is shared, not
    copied; treat it as read-only.
    """

    def __init__(
        self,
        frame: pd.DataFrame,
        returns_dropped: int = 0,
        unknown_dropped: int = 0,
        duplicates_collapsed: int = 0,
    ) -> None:
        missing = set(SALES_COLUMNS) - set(frame.columns)
        if missing:
            raise KeyError(f"Sales frame is missing columns: {sorted(missing)}")
        self._frame = frame.loc[:, list(SALES_COLUMNS)].reset_index(drop=True)
        self.returns_dropped = returns_dropped
        self.unknown_dropped = unknown_dropped
        self.duplicates_collapsed = duplicates_collapsed

    @property
    def frame(self) -> pd.DataFrame:
        return self._frame

    def __len__(self) -> int:
        return len(self._frame)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SaleLog):
            return NotImplemented
        return (
            self._frame.equals(other._frame)
            and self.returns_dropped == other.returns_dropped
            and self.unknown_dropped == other.unknown_dropped
            and self.duplicates_collapsed == other.duplicates_collapsed
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"SaleLog(events={len(self)}, returns_dropped={self.returns_dropped}, unknown_dropped={self.unknown_dropped})"

    def is_sorted(self) -> bool:
        """Whether rows are ordered by customer and, within a customer, by calendar day"""
        frame = self._frame
        if len(frame) < 2:
            return True
        customers = frame["customer_id"].to_numpy()
        days = frame["day"].to_numpy()
        same = customers[1:] == customers[:-1]
        ascending = customers[1:] > customers[:-1]
        return bool(((ascending) | (same & (days[1:] >= days[:-1]))).all())

    def events(self) -> Iterator[SaleEvent]:
        for row in self._frame.itertuples(index=False):
            yield SaleEvent(
                customer_id=row.customer_id,
                product_id=row.product_id,
                timestamp=row.timestamp.to_pydatetime(),
                register_id=row.register_id,
                store_id=row.store_id,
                quantity=int(row.quantity),
            )

    def sales_volume(self) -> dict[str, int]:
        """Number of sale events per product, ordered by product_id"""
        counts = self._frame["product_id"].value_counts()
        return {str(pid): int(counts[pid]) for pid in sorted(counts.index)}


# ---------------------------------------------------------------------------------------
# Co-occurrence
# ---------------------------------------------------------------------------------------
class CoOccurrenceCounts(Mapping[tuple[str, str], int]):
    """Unordered product pair -> togetherness count.

    Keys are canonical `(a, b)` tuples with `a < b`. Lookups canonicalize, so `counts["B", "A"]`
    returns the count stored under `("A", "B")`. The backing frame holds the columns
    `product_a, product_b, count`, sorted lexicographically by pair.
    """

    def __init__(self, frame: pd.DataFrame, window_days: int, dedup_per_customer: bool = False) -> None:
        if window_days < 1:
            raise ValueError(f"window_days must be positive, given: {window_days}")
        self._frame = frame.loc[:, ["product_a", "product_b", "count"]].reset_index(drop=True)
        self.window_days = window_days
        self.dedup_per_customer = dedup_per_customer

    @classmethod
    def from_dict(cls, pairs: Mapping[tuple[str, str], int], window_days: int) -> Self:
        rows = sorted((*canonical_pair(a, b), int(count)) for (a, b), count in pairs.items())
        frame = pd.DataFrame(rows, columns=["product_a", "product_b", "count"])
        frame["count"] = frame["count"].astype("int64")
        return cls(frame, window_days=window_days)

    @property
    def frame(self) -> pd.DataFrame:
        return self._frame

    @cached_property
    def _lookup(self) -> dict[tuple[str, str], int]:
        frame = self._frame
        return {
            (a, b): int(c)
            for a, b, c in zip(frame["product_a"], frame["product_b"], frame["count"], strict=True)
        }

    def __getitem__(self, key: tuple[str, str]) -> int:
        return self._lookup[canonical_pair(*key)]

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(self._lookup)

    def __len__(self) -> int:
        return len(self._frame)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, CoOccurrenceCounts):
            return self.window_days == other.window_days and self._lookup == other._lookup
        return super().__eq__(other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"CoOccurrenceCounts(pairs={len(self)}, window_days={self.window_days})"

    def at_least(self, threshold: int) -> pd.DataFrame:
        """Pairs whose count is at least `threshold`, in canonical order"""
        return self._frame[self._frame["count"] >= threshold]


# ---------------------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------------------
class NetworkStats(BaseModel):
    """One row of the network statistics table"""

    model_config = ConfigDict(frozen=True)

    edges: NonNegativeInt
    nodes: NonNegativeInt
    isolated_nodes: NonNegativeInt
    isolated_pairs: NonNegativeInt
    components: NonNegativeInt
    gcc_size_abs: NonNegativeInt
    gcc_size_rel: float = Field(ge=0.0, le=1.0)
    gcc_sales_share: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def check_counts(self) -> Self:
        """Isolated members and the GCC must fit in the node count

        Raises:
            ValueError: if the counts are inconsistent

        Returns:
            Self: instance
        """
        if self.isolated_nodes + 2 * self.isolated_pairs > self.nodes:
            raise ValueError("isolated_nodes + 2 * isolated_pairs exceeds nodes")
        if self.gcc_size_abs > self.nodes:
            raise ValueError("gcc_size_abs exceeds nodes")
        return self


class Staple(BaseModel):
    model_config = ConfigDict(frozen=True)

    product_id: str
    degree: NonNegativeInt
    sales_volume: NonNegativeInt
    description: str = ""


# ---------------------------------------------------------------------------------------
# Tiles
# ---------------------------------------------------------------------------------------
class Tile(BaseModel):
    """A star, linear or community subnetwork of G*.

    `members` is kept sorted so that tiles compare and serialize deterministically. `label` follows
    from `kind` and is filled in when omitted.
    """

    model_config = ConfigDict(frozen=True)

    tile_id: str
    kind: TileKind
    members: tuple[str, ...]
    center: str | None = None
    anchors: tuple[str, ...] = ()
    chord_count: NonNegativeInt | None = None
    k: int | None = None
    label: TileLabel | None = None

    @model_validator(mode="before")
    @classmethod
    def fill_label(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            data["members"] = tuple(sorted(set(data.get("members", ()))))
            data["anchors"] = tuple(sorted(set(data.get("anchors", ()))))
            if data.get("label") is None and data.get("kind") is not None:
                data["label"] = TILE_LABELS[TileKind(data["kind"])]
        return data

    @model_validator(mode="after")
    def check_kind_fields(self) -> Self:
        """Validate kind specific metadata

        Raises:
            ValueError: on a label that does not match the kind, a star without a member center, or
                anchors outside the member set

        Returns:
            Self: instance
        """
        if self.label != TILE_LABELS[self.kind]:
            raise ValueError(f"{self.kind} tiles are labelled {TILE_LABELS[self.kind]}, given: {self.label}")
        if self.kind == TileKind.STAR and (self.center is None or self.center not in self.members):
            raise ValueError("A star must have its center among its members")
        if not set(self.anchors).issubset(self.members):
            raise ValueError("Anchors must be members of the tile")
        return self

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def member_set(self) -> frozenset[str]:
        return frozenset(self.members)


# ---------------------------------------------------------------------------------------
# Coverage
# ---------------------------------------------------------------------------------------
class Selection(BaseModel):
    model_config = ConfigDict(frozen=True)

    tile_id: str
    gain: PositiveInt


class CoverageSolution(BaseModel):
    """Essential tiles in selection order"""

    model_config = ConfigDict(frozen=True)

    selected: tuple[Selection, ...] = ()
    covered: frozenset[str] = frozenset()
    uncovered_count: NonNegativeInt = 0
    per_type_counts: dict[TileKind, int] = Field(default_factory=dict)
    mean_size_per_type: dict[TileKind, float] = Field(default_factory=dict)

    @property
    def tile_ids(self) -> list[str]:
        return [item.tile_id for item in self.selected]

    @property
    def gains(self) -> list[int]:
        return [item.gain for item in self.selected]


# ---------------------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------------------
class EntropyReport(BaseModel):
    """Observed entropy `h1` of a member-size distribution against the uniform entropy `h0` (bits)"""

    model_config = ConfigDict(frozen=True)

    member_sizes: tuple[PositiveInt, ...]
    h1: float = Field(ge=0.0)
    h0: float = Field(ge=0.0)


class PowerLawFit(BaseModel):
    """Least-squares line on log2-log2 axes. `alpha` is the slope"""

    model_config = ConfigDict(frozen=True)

    alpha: float
    intercept: float
    r_squared: float = Field(ge=0.0, le=1.0)


# ---------------------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------------------
class PlantSpec(BaseModel):
    """Vertex-disjoint structures to plant in a synthetic graph"""

    model_config = ConfigDict(frozen=True)

    star_specs: list[tuple[NonNegativeInt, NonNegativeInt]] = Field(default_factory=list)
    """(leaf_count, chord_count) per star"""
    clique_specs: list[NonNegativeInt] = Field(default_factory=list)
    path_specs: list[NonNegativeInt] = Field(default_factory=list)
    filler_nodes: NonNegativeInt = 0
    noise_edges: NonNegativeInt = 0
    seed: Annotated[int, Field(ge=0, lt=2**64)] = 0


class KindSummary(BaseModel):
    """Count / node coverage / mean size of one tile kind"""

    model_config = ConfigDict(frozen=True)

    count: NonNegativeInt = 0
    node_coverage: NonNegativeInt = 0
    mean_size: float = Field(default=0.0, ge=0.0)


class TileTable(BaseModel):
    """Tile accounting before and after coverage optimization"""

    model_config = ConfigDict(frozen=True)

    before: dict[TileKind, KindSummary]
    after: dict[TileKind, KindSummary]
    total_before: KindSummary
    total_after: KindSummary
    mean_tiles_per_node_before: float = Field(ge=0.0)
    mean_tiles_per_node_after: float = Field(ge=0.0)
