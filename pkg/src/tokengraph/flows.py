"""Flow-level analyses: novelty, multi-layer activity, favorites, whales.

These operate on wallet behaviour rather than window structure: when a
directed pair first appears, how many layers a wallet touches, which
layer it favours, and how concentrated one day's selling is.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Optional, Sequence

import numpy as np

from .decimalutil import ZERO, ddiv, dsum
from .graph import TemporalMultilayerGraph, WindowView, rolling_windows
from .metrics import _split_keys, unique_pairs
from .timeutil import DAY, TimeWindow

# Mint/burn counterparty; excluded from seller rankings by default.
ZERO_ADDRESS = "0x" + "0" * 40


@dataclass(frozen=True)
class NoveltySeries:
    """Tumbling-window counts of first-ever pairs and first-ever wallets."""

    window_starts: tuple[int, ...]
    width: int
    new_edges: tuple[int, ...]
    new_nodes: tuple[int, ...]


def new_edge_series(
    graph: TemporalMultilayerGraph,
    width: int = DAY,
    window_range: Optional[TimeWindow] = None,
) -> NoveltySeries:
    """Bucket every pair's and wallet's dataset-wide first appearance.

    Over the full span the bucket counts sum exactly to the number of
    distinct pairs (wallets): each first appearance lands in one bucket.
    """
    if width <= 0:
        raise ValueError("bucket width must be positive")
    if window_range is None:
        window_range = graph.span
    if window_range is None:
        return NoveltySeries((), width, (), ())
    windows = rolling_windows(window_range, width, width)
    edge_counts = [0] * len(windows)
    node_counts = [0] * len(windows)

    def bucket(ts: int) -> Optional[int]:
        if not window_range.contains(ts):
            return None
        return (ts - window_range.start) // width

    for ts in graph.first_seen_pair.values():
        index = bucket(ts)
        if index is not None:
            edge_counts[index] += 1
    for ts in graph.first_seen_node.values():
        index = bucket(ts)
        if index is not None:
            node_counts[index] += 1
    starts = tuple(w.start for w in windows)
    return NoveltySeries(starts, width, tuple(edge_counts), tuple(node_counts))


def _layer_masks(view: WindowView, cohort: Optional[set[int]] = None) -> dict[int, int]:
    """Bitmask of layers each wallet touched in the window (either side)."""
    masks: dict[int, int] = defaultdict(int)
    for layer in view.layers:
        src, dst, _ = view.arrays(layer)
        if len(src) == 0:
            continue
        bit = 1 << layer
        for node in np.union1d(src, dst).tolist():
            masks[node] |= bit
    if cohort is not None:
        return {node: mask for node, mask in masks.items() if node in cohort}
    return dict(masks)


@dataclass(frozen=True)
class ActivityDistribution:
    """How many wallets were active on exactly k layers, k = 1..num_layers."""

    counts: tuple[int, ...]

    @property
    def total_users(self) -> int:
        return sum(self.counts)

    def share(self, k: int) -> float:
        total = self.total_users
        return self.counts[k - 1] / total if total else 0.0


def period_layer_activity(
    graph: TemporalMultilayerGraph,
    window: TimeWindow,
    cohort: Optional[set[int]] = None,
) -> ActivityDistribution:
    masks = _layer_masks(graph.window(window), cohort)
    counts = [0] * graph.num_layers
    for mask in masks.values():
        counts[mask.bit_count() - 1] += 1
    return ActivityDistribution(tuple(counts))


@dataclass(frozen=True)
class ActivitySeries:
    window_starts: tuple[int, ...]
    num_layers: int
    counts: tuple[tuple[int, ...], ...]   # one distribution per window


def layer_activity_series(
    graph: TemporalMultilayerGraph,
    window_range: Optional[TimeWindow] = None,
    width: int = DAY,
    cohort: Optional[set[int]] = None,
) -> ActivitySeries:
    """Per-day (by default) distribution of wallets by layer count."""
    if window_range is None:
        window_range = graph.span
    if window_range is None:
        return ActivitySeries((), graph.num_layers, ())
    windows = rolling_windows(window_range, width, width)
    rows = [period_layer_activity(graph, w, cohort).counts for w in windows]
    return ActivitySeries(tuple(w.start for w in windows), graph.num_layers, tuple(rows))


def _favorites(view: WindowView) -> dict[int, int]:
    """Favourite layer per active wallet: most distinct incident pairs.

    Ties resolve to the earlier registry position because layers are
    scanned in order and only a strictly larger count replaces.
    """
    best_count: dict[int, int] = {}
    best_layer: dict[int, int] = {}
    for layer in view.layers:
        keys = unique_pairs(view, layer)
        if len(keys) == 0:
            continue
        u, v = _split_keys(keys)
        owners = np.concatenate([u, v[v != u]])
        ids, counts = np.unique(owners, return_counts=True)
        for node, count in zip(ids.tolist(), counts.tolist()):
            if count > best_count.get(node, 0):
                best_count[node] = count
                best_layer[node] = layer
    return best_layer


def favorite_layer(view: WindowView, node: int) -> Optional[int]:
    """Layer where the wallet has most distinct pairs; None if inactive."""
    return _favorites(view).get(node)


INACTIVE_LABEL = "inactive"


@dataclass(frozen=True)
class TransitionMatrix:
    """Counts of wallets moving from a pre-period favourite to a post one.

    Row/column order is registry order with an extra trailing
    "inactive" slot; cells sum to the cohort size.
    """

    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    cohort_size: int


def favorite_transitions(
    graph: TemporalMultilayerGraph,
    pre: TimeWindow,
    post: TimeWindow,
    focus_layer: int,
) -> TransitionMatrix:
    """Cohort = wallets touching ``focus_layer`` in ``pre``, either side."""
    pre_view = graph.window(pre)
    src, dst, _ = pre_view.arrays(focus_layer)
    cohort = set(np.union1d(src, dst).tolist())
    pre_fav = _favorites(pre_view)
    post_fav = _favorites(graph.window(post))
    size = graph.num_layers + 1
    inactive = graph.num_layers
    counts = [[0] * size for _ in range(size)]
    for node in cohort:
        row = pre_fav.get(node, inactive)
        col = post_fav.get(node, inactive)
        counts[row][col] += 1
    labels = graph.registry.tickers + (INACTIVE_LABEL,)
    return TransitionMatrix(labels, tuple(tuple(r) for r in counts), len(cohort))


@dataclass(frozen=True)
class SellerShare:
    wallet: str
    tokens: Decimal
    share: Decimal


@dataclass(frozen=True)
class ConcentrationReport:
    window: TimeWindow
    ticker: str
    top: tuple[SellerShare, ...]
    tail_share: Decimal
    tail_wallets: int
    total_tokens: Decimal

    @property
    def no_activity(self) -> bool:
        return self.total_tokens == 0


def seller_concentration(
    graph: TemporalMultilayerGraph,
    window: TimeWindow,
    layer: int,
    top_k: int = 10,
    exclude: Iterable[str] = (ZERO_ADDRESS,),
) -> ConcentrationReport:
    """Share of one layer's outgoing token volume held by the top sellers.

    Excluded wallets (the mint address by default) are dropped before
    totals, so shares are over genuine sellers only. Top shares plus the
    tail share always sum to 1 for an active window.
    """
    if top_k <= 0:
        raise ValueError("top_k must be positive")
    view = graph.window(window)
    src, _, _ = view.arrays(layer)
    amounts = view.amounts(layer)
    excluded_ids = {graph.node_id(address) for address in exclude}
    sold: dict[int, list[Decimal]] = defaultdict(list)
    for i in range(len(src)):
        node = int(src[i])
        if node in excluded_ids:
            continue
        sold[node].append(amounts[i])
    totals = [(graph.address(node), dsum(parts)) for node, parts in sold.items()]
    ticker = graph.registry.ticker(layer)
    total = dsum(t for _, t in totals)
    if total == 0:
        return ConcentrationReport(window, ticker, (), ZERO, 0, ZERO)
    totals.sort(key=lambda item: item[0])
    totals.sort(key=lambda item: item[1], reverse=True)
    top = tuple(
        SellerShare(wallet, tokens, ddiv(tokens, total))
        for wallet, tokens in totals[:top_k]
    )
    tail_tokens = dsum(tokens for _, tokens in totals[top_k:])
    return ConcentrationReport(
        window, ticker, top, ddiv(tail_tokens, total), max(len(totals) - top_k, 0), total
    )


def recurrent_top_sellers(
    reports: Sequence[ConcentrationReport],
    min_count: int = 2,
) -> list[tuple[str, int]]:
    """Wallets in the top list of at least ``min_count`` reports.

    Ordered by appearance count descending, then wallet ascending.
    """
    appearances: dict[str, int] = defaultdict(int)
    for report in reports:
        for share in report.top:
            appearances[share.wallet] += 1
    hits = [(wallet, count) for wallet, count in appearances.items() if count >= min_count]
    hits.sort(key=lambda item: item[0])
    hits.sort(key=lambda item: item[1], reverse=True)
    return hits
