"""Structural metrics for a windowed view of the transfer graph.

Every operation takes a ``WindowView`` and an optional layer index;
``layer=None`` pools all layers into one directed graph over the same
node set (distinct source/target pairs regardless of token).

Conventions, applied uniformly:
  * an "active" node has at least one event in the window, either side;
  * self-transfers count toward transactions, volumes, activity and the
    node's own degree, but the pair (u, u) is excluded from reciprocity,
    density, clustering and connectivity;
  * every ratio on an empty window is 0.0, never NaN.
"""
from __future__ import annotations

import datetime as dt
from collections import defaultdict
from dataclasses import dataclass
from decimal import Decimal
from typing import NamedTuple, Optional

import numpy as np

from .decimalutil import ZERO, dmul, dsum
from .graph import WindowView
from .ingest import PriceSeries
from .timeutil import DAY, date_from_ts

_LOW32 = np.int64((1 << 32) - 1)


def _event_pair_keys(view: WindowView, layer: int) -> np.ndarray:
    src, dst, _ = view.arrays(layer)
    return (src.astype(np.int64) << np.int64(32)) | dst.astype(np.int64)


def _layer_list(view: WindowView, layer: Optional[int]) -> list[int]:
    return list(view.layers) if layer is None else [layer]


def unique_pairs(view: WindowView, layer: Optional[int] = None) -> np.ndarray:
    """Sorted distinct directed (source, target) keys, self-pairs included."""
    parts = [_event_pair_keys(view, l) for l in _layer_list(view, layer)]
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(parts))


def _split_keys(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return keys >> np.int64(32), keys & _LOW32


class Census(NamedTuple):
    nodes: int
    active_out: int
    active_in: int
    sources: int
    sinks: int


def census(view: WindowView, layer: Optional[int] = None) -> Census:
    """Active node counts; a source never receives, a sink never sends."""
    out_parts, in_parts = [], []
    for l in _layer_list(view, layer):
        src, dst, _ = view.arrays(l)
        out_parts.append(src)
        in_parts.append(dst)
    if not out_parts:
        return Census(0, 0, 0, 0, 0)
    out_nodes = np.unique(np.concatenate(out_parts))
    in_nodes = np.unique(np.concatenate(in_parts))
    active = np.union1d(out_nodes, in_nodes)
    sources = np.setdiff1d(out_nodes, in_nodes, assume_unique=True)
    sinks = np.setdiff1d(in_nodes, out_nodes, assume_unique=True)
    return Census(len(active), len(out_nodes), len(in_nodes), len(sources), len(sinks))


def transactions(view: WindowView, layer: Optional[int] = None) -> int:
    return sum(view.layer_event_count(l) for l in _layer_list(view, layer))


def unique_edges(view: WindowView, layer: Optional[int] = None) -> int:
    """Distinct directed pairs with at least one transfer (self-pairs count)."""
    return int(len(unique_pairs(view, layer)))


def token_volume(view: WindowView, layer: Optional[int] = None) -> Decimal:
    """Exact sum of transferred token amounts (across layers when pooled)."""
    total = ZERO
    for l in _layer_list(view, layer):
        total += dsum(view.amounts(l))
    return total


def reciprocity(view: WindowView, layer: Optional[int] = None) -> float:
    """Fraction of distinct non-self pairs whose reverse pair also occurs."""
    keys = unique_pairs(view, layer)
    u, v = _split_keys(keys)
    nonself = u != v
    if not np.any(nonself):
        return 0.0
    reversed_keys = (v[nonself] << np.int64(32)) | u[nonself]
    mutual = np.isin(reversed_keys, keys, assume_unique=False)
    return float(np.count_nonzero(mutual) / np.count_nonzero(nonself))


def _degree_table(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-node count of distinct counterparties (in/out pooled, self once)."""
    if len(keys) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    u, v = _split_keys(keys)
    owner = np.concatenate([u, v])
    partner = np.concatenate([v, u])
    owner_partner = np.unique((owner << np.int64(32)) | partner)
    owners = owner_partner >> np.int64(32)
    ids, counts = np.unique(owners, return_counts=True)
    return ids, counts


def avg_degree(view: WindowView, layer: Optional[int] = None) -> float:
    """Mean distinct-counterparty degree over active nodes."""
    _, counts = _degree_table(unique_pairs(view, layer))
    if len(counts) == 0:
        return 0.0
    return float(counts.mean())


def density(view: WindowView, layer: Optional[int] = None) -> float:
    """Distinct non-self pairs over n(n-1) ordered slots; 0 when n <= 1."""
    keys = unique_pairs(view, layer)
    u, v = _split_keys(keys)
    n = len(np.union1d(u, v))
    if n <= 1:
        return 0.0
    return float(np.count_nonzero(u != v) / (n * (n - 1)))


def _undirected_adjacency(keys: np.ndarray) -> dict[int, set[int]]:
    """Simple undirected projection of the pair set, self-pairs dropped."""
    u, v = _split_keys(keys)
    nonself = u != v
    a = np.minimum(u[nonself], v[nonself])
    b = np.maximum(u[nonself], v[nonself])
    links = np.unique((a << np.int64(32)) | b)
    la, lb = _split_keys(links)
    adjacency: dict[int, set[int]] = defaultdict(set)
    for x, y in zip(la.tolist(), lb.tolist()):
        adjacency[x].add(y)
        adjacency[y].add(x)
    return adjacency


def clustering(view: WindowView, layer: Optional[int] = None, transitivity: bool = False) -> float:
    """Clustering of the undirected simple projection.

    Default is the mean local coefficient over every active node (nodes
    with fewer than two neighbours contribute 0). ``transitivity=True``
    switches to the global triangle ratio: closed triplets over all
    triplets, which weights hubs by their triplet count instead of
    averaging per node.
    """
    keys = unique_pairs(view, layer)
    if len(keys) == 0:
        return 0.0
    u, v = _split_keys(keys)
    n_active = len(np.union1d(u, v))
    adjacency = _undirected_adjacency(keys)
    local_sum = 0.0
    closed = 0
    triplets = 0
    for node, neighbors in adjacency.items():
        k = len(neighbors)
        if k < 2:
            continue
        links = sum(len(adjacency[nb] & neighbors) for nb in neighbors) // 2
        closed += links
        triplets += k * (k - 1) // 2
        local_sum += 2.0 * links / (k * (k - 1))
    if transitivity:
        return closed / triplets if triplets else 0.0
    return local_sum / n_active if n_active else 0.0


class UnionFind:
    """Disjoint sets over arbitrary hashable items, path-halving + size union."""

    def __init__(self) -> None:
        self.parent: dict[int, int] = {}
        self.size: dict[int, int] = {}

    def add(self, item: int) -> None:
        if item not in self.parent:
            self.parent[item] = item
            self.size[item] = 1

    def find(self, item: int) -> int:
        parent = self.parent
        while parent[item] != item:
            parent[item] = parent[parent[item]]
            item = parent[item]
        return item

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def largest(self) -> int:
        return max((self.size[r] for r in self.parent if self.parent[r] == r), default=0)


def largest_wcc_fraction(view: WindowView, layer: Optional[int] = None) -> float:
    """Share of active nodes in the largest weakly connected component."""
    keys = unique_pairs(view, layer)
    if len(keys) == 0:
        return 0.0
    u, v = _split_keys(keys)
    active = np.union1d(u, v)
    uf = UnionFind()
    for node in active.tolist():
        uf.add(node)
    for x, y in zip(u.tolist(), v.tolist()):
        if x != y:
            uf.union(x, y)
    return uf.largest() / len(active)


@dataclass(frozen=True)
class LogBin:
    lo: int            # inclusive
    hi: int            # exclusive
    count: int
    density: float     # probability mass / bin width

    @property
    def center(self) -> float:
        return float(np.sqrt(self.lo * (self.hi - 1))) if self.hi - 1 >= self.lo else float(self.lo)


@dataclass(frozen=True)
class DegreeHistogram:
    """Degree frequency over active nodes; degrees are >= 1 by construction."""

    degrees: tuple[int, ...]
    counts: tuple[int, ...]

    @property
    def active_nodes(self) -> int:
        return sum(self.counts)

    def probabilities(self) -> tuple[float, ...]:
        total = self.active_nodes
        if total == 0:
            return ()
        return tuple(c / total for c in self.counts)

    def log_binned(self, ratio: float = 2.0) -> list[LogBin]:
        """Geometric bins [lo, lo*ratio) starting at 1, empty bins dropped."""
        if ratio <= 1.0:
            raise ValueError("bin ratio must exceed 1")
        total = self.active_nodes
        if total == 0:
            return []
        bins: list[LogBin] = []
        lo = 1
        max_degree = self.degrees[-1]
        while lo <= max_degree:
            hi = max(int(lo * ratio), lo + 1)
            count = sum(c for d, c in zip(self.degrees, self.counts) if lo <= d < hi)
            if count:
                bins.append(LogBin(lo, hi, count, count / total / (hi - lo)))
            lo = hi
        return bins


def degree_distribution(view: WindowView, layer: Optional[int] = None) -> DegreeHistogram:
    _, counts = _degree_table(unique_pairs(view, layer))
    if len(counts) == 0:
        return DegreeHistogram((), ())
    values, freq = np.unique(counts, return_counts=True)
    return DegreeHistogram(tuple(int(d) for d in values), tuple(int(c) for c in freq))


class UsdVolume(NamedTuple):
    total: Decimal
    priced_events: int
    skipped_events: int


_MISSING = object()


def usd_volume(view: WindowView, prices: PriceSeries, layer: Optional[int] = None) -> UsdVolume:
    """Sum of amount x same-day close; events with no quote are skipped and counted."""
    priced = 0
    skipped = 0
    parts: list[Decimal] = []
    for l in _layer_list(view, layer):
        ticker = view.graph.registry.ticker(l)
        _, _, ts = view.arrays(l)
        amounts = view.amounts(l)
        day_close: dict[int, Optional[Decimal]] = {}
        for i in range(len(ts)):
            day_index = int(ts[i]) // DAY
            close = day_close.get(day_index, _MISSING)
            if close is _MISSING:
                close = prices.close(ticker, date_from_ts(int(ts[i])))
                day_close[day_index] = close
            if close is None:
                skipped += 1
            else:
                parts.append(dmul(amounts[i], close))
                priced += 1
    return UsdVolume(dsum(parts), priced, skipped)


@dataclass(frozen=True)
class LayerMetrics:
    nodes: int
    unique_edges: int
    transactions: int
    token_volume: Decimal
    usd_volume: Optional[Decimal]
    usd_skipped: int
    active_out: int
    active_in: int
    sources: int
    sinks: int
    reciprocity: float
    avg_degree: float
    density: float
    clustering: float
    largest_wcc_fraction: float


def layer_metrics(
    view: WindowView,
    layer: Optional[int] = None,
    prices: Optional[PriceSeries] = None,
    transitivity: bool = False,
) -> LayerMetrics:
    """All structural metrics of one window, one layer (or pooled)."""
    counts = census(view, layer)
    usd = usd_volume(view, prices, layer) if prices is not None else None
    return LayerMetrics(
        nodes=counts.nodes,
        unique_edges=unique_edges(view, layer),
        transactions=transactions(view, layer),
        token_volume=token_volume(view, layer),
        usd_volume=usd.total if usd is not None else None,
        usd_skipped=usd.skipped_events if usd is not None else 0,
        active_out=counts.active_out,
        active_in=counts.active_in,
        sources=counts.sources,
        sinks=counts.sinks,
        reciprocity=reciprocity(view, layer),
        avg_degree=avg_degree(view, layer),
        density=density(view, layer),
        clustering=clustering(view, layer, transitivity=transitivity),
        largest_wcc_fraction=largest_wcc_fraction(view, layer),
    )
