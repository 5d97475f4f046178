"""Temporal multilayer graph over token transfers.

Nodes are wallet addresses, assigned dense integer ids in order of first
appearance. Each registry token is one layer holding its events as
parallel numpy arrays sorted by timestamp, so a time window reduces to a
``searchsorted`` index range per layer. Amounts stay exact Decimals in a
plain list aligned with the arrays.
"""
from __future__ import annotations

import datetime as dt
import struct
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .decimalutil import ZERO, dsum
from .ingest import LayerInfo, LayerRegistry, TransferEvent
from .timeutil import TimeWindow, ts_from_date

SNAPSHOT_MAGIC = b"TMLG"
SNAPSHOT_VERSION = 1


class GraphBuildError(ValueError):
    pass


class SnapshotError(ValueError):
    pass


class Event(NamedTuple):
    src: int
    dst: int
    ts: int
    amount: Decimal
    layer: int


def rolling_windows(window_range: TimeWindow, width: int, step: int) -> list[TimeWindow]:
    """Windows [range.start + i*step, +width) for every start inside the range.

    A window may extend past the range end; only its start must fall in
    the range, so a tail shorter than ``width`` is still observed.
    """
    if width <= 0 or step <= 0:
        raise ValueError("window width and step must be positive")
    windows: list[TimeWindow] = []
    start = window_range.start
    while start < window_range.end:
        windows.append(TimeWindow(start, start + width))
        start += step
    return windows


@dataclass(frozen=True)
class PeriodConfig:
    """Pre-crash and post-crash study periods separated by an excluded gap."""

    pre: TimeWindow
    exclusion: TimeWindow
    post: TimeWindow

    def __post_init__(self) -> None:
        if not (self.pre.end <= self.exclusion.start and self.exclusion.end <= self.post.start):
            raise ValueError("periods must be ordered: pre, exclusion, post")

    @property
    def span(self) -> TimeWindow:
        return TimeWindow(self.pre.start, self.post.end)


def default_periods() -> PeriodConfig:
    return PeriodConfig(
        pre=TimeWindow.from_dates(dt.date(2022, 4, 1), dt.date(2022, 5, 2)),
        exclusion=TimeWindow.from_dates(dt.date(2022, 5, 2), dt.date(2022, 5, 17)),
        post=TimeWindow.from_dates(dt.date(2022, 5, 17), dt.date(2022, 6, 16)),
    )


# Event markers rendered on time-series reports, at UTC midnight.
CRASH_MARKERS: dict[str, int] = {
    "S1": ts_from_date(dt.date(2022, 4, 3)),
    "S2": ts_from_date(dt.date(2022, 4, 19)),
    "C": ts_from_date(dt.date(2022, 5, 9)),
    "T2": ts_from_date(dt.date(2022, 5, 27)),
}


class TemporalMultilayerGraph:
    def __init__(
        self,
        registry: LayerRegistry,
        addresses: list[str],
        layer_src: list[np.ndarray],
        layer_dst: list[np.ndarray],
        layer_ts: list[np.ndarray],
        layer_amounts: list[list[Decimal]],
    ):
        if not (len(layer_src) == len(layer_dst) == len(layer_ts) == len(layer_amounts) == len(registry)):
            raise GraphBuildError("layer array count does not match registry")
        self.registry = registry
        self._addresses = addresses
        self._id_of = {address: node for node, address in enumerate(addresses)}
        self._layer_src = layer_src
        self._layer_dst = layer_dst
        self._layer_ts = layer_ts
        self._layer_amounts = layer_amounts
        for arrays in (layer_src, layer_dst, layer_ts):
            for arr in arrays:
                arr.flags.writeable = False

        # First-occurrence indexes over the whole dataset, layer-blind.
        self.first_seen_pair: dict[tuple[int, int], int] = {}
        self.first_seen_node: dict[int, int] = {}
        for layer in range(len(registry)):
            src, dst, ts = layer_src[layer], layer_dst[layer], layer_ts[layer]
            for i in range(len(ts)):
                u, v, when = int(src[i]), int(dst[i]), int(ts[i])
                key = (u, v)
                if self.first_seen_pair.get(key, when + 1) > when:
                    self.first_seen_pair[key] = when
                if self.first_seen_node.get(u, when + 1) > when:
                    self.first_seen_node[u] = when
                if self.first_seen_node.get(v, when + 1) > when:
                    self.first_seen_node[v] = when

    @classmethod
    def build(cls, events: Sequence[TransferEvent], registry: LayerRegistry) -> "TemporalMultilayerGraph":
        """Construct from timestamp-sorted events; unsorted input is an error."""
        addresses: list[str] = []
        id_of: dict[str, int] = {}

        def intern(address: str) -> int:
            node = id_of.get(address)
            if node is None:
                node = len(addresses)
                id_of[address] = node
                addresses.append(address)
            return node

        num_layers = len(registry)
        src_lists: list[list[int]] = [[] for _ in range(num_layers)]
        dst_lists: list[list[int]] = [[] for _ in range(num_layers)]
        ts_lists: list[list[int]] = [[] for _ in range(num_layers)]
        amount_lists: list[list[Decimal]] = [[] for _ in range(num_layers)]

        previous = None
        for position, event in enumerate(events):
            if previous is not None and event.timestamp < previous:
                raise GraphBuildError(
                    f"events not sorted by timestamp at position {position}"
                )
            previous = event.timestamp
            if not 0 <= event.layer < num_layers:
                raise GraphBuildError(f"event layer {event.layer} outside registry")
            u = intern(event.sender)
            v = intern(event.receiver)
            src_lists[event.layer].append(u)
            dst_lists[event.layer].append(v)
            ts_lists[event.layer].append(event.timestamp)
            amount_lists[event.layer].append(event.amount)

        layer_src = [np.asarray(lst, dtype=np.int32) for lst in src_lists]
        layer_dst = [np.asarray(lst, dtype=np.int32) for lst in dst_lists]
        layer_ts = [np.asarray(lst, dtype=np.int64) for lst in ts_lists]
        return cls(registry, addresses, layer_src, layer_dst, layer_ts, amount_lists)

    @property
    def num_nodes(self) -> int:
        return len(self._addresses)

    @property
    def num_layers(self) -> int:
        return len(self.registry)

    @property
    def num_events(self) -> int:
        return sum(len(ts) for ts in self._layer_ts)

    def address(self, node: int) -> str:
        return self._addresses[node]

    def node_id(self, address: str) -> Optional[int]:
        return self._id_of.get(address.lower())

    @property
    def span(self) -> Optional[TimeWindow]:
        """Smallest half-open window containing every event; None if empty."""
        lo = min((int(ts[0]) for ts in self._layer_ts if len(ts)), default=None)
        if lo is None:
            return None
        hi = max(int(ts[-1]) for ts in self._layer_ts if len(ts))
        return TimeWindow(lo, hi + 1)

    def window(self, window: TimeWindow) -> "WindowView":
        return WindowView(self, window)

    def layer_arrays(self, layer: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._layer_src[layer], self._layer_dst[layer], self._layer_ts[layer]

    def layer_amounts(self, layer: int) -> list[Decimal]:
        return self._layer_amounts[layer]


class WindowView:
    """A graph restricted to [window.start, window.end).

    Events stamped at the window start are included, events at the end
    excluded; per-layer slices come from binary search on the sorted
    timestamp arrays.
    """

    def __init__(self, graph: TemporalMultilayerGraph, window: TimeWindow):
        self.graph = graph
        self.window = window
        self._ranges: list[tuple[int, int]] = []
        for layer in range(graph.num_layers):
            ts = graph.layer_arrays(layer)[2]
            lo = int(np.searchsorted(ts, window.start, side="left"))
            hi = int(np.searchsorted(ts, window.end, side="left"))
            self._ranges.append((lo, hi))

    @property
    def layers(self) -> range:
        return range(self.graph.num_layers)

    def layer_range(self, layer: int) -> tuple[int, int]:
        return self._ranges[layer]

    def arrays(self, layer: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src, dst, ts = self.graph.layer_arrays(layer)
        lo, hi = self._ranges[layer]
        return src[lo:hi], dst[lo:hi], ts[lo:hi]

    def amounts(self, layer: int) -> list[Decimal]:
        lo, hi = self._ranges[layer]
        return self.graph.layer_amounts(layer)[lo:hi]

    def layer_event_count(self, layer: int) -> int:
        lo, hi = self._ranges[layer]
        return hi - lo

    @property
    def event_count(self) -> int:
        return sum(hi - lo for lo, hi in self._ranges)

    def events(self) -> Iterator[Event]:
        """All events in the window, grouped by layer, time-sorted within each."""
        for layer in self.layers:
            src, dst, ts = self.arrays(layer)
            amounts = self.amounts(layer)
            for i in range(len(ts)):
                yield Event(int(src[i]), int(dst[i]), int(ts[i]), amounts[i], layer)


def degree(view: WindowView, node: int) -> int:
    """Distinct counterparties of ``node`` in the window, in and out pooled.

    A self-transfer makes the node its own counterparty, counted once.
    """
    counterparties: set[int] = set()
    for layer in view.layers:
        src, dst, _ = view.arrays(layer)
        counterparties.update(np.unique(dst[src == node]).tolist())
        counterparties.update(np.unique(src[dst == node]).tolist())
    return len(counterparties)


def node_balance(view: WindowView, node: int, layer: int) -> Decimal:
    """Received minus sent token amount on one layer, exact."""
    src, dst, _ = view.arrays(layer)
    amounts = view.amounts(layer)
    received = dsum(amounts[i] for i in np.nonzero(dst == node)[0])
    sent = dsum(amounts[i] for i in np.nonzero(src == node)[0])
    return received - sent if received or sent else ZERO


def first_seen_edge(graph: TemporalMultilayerGraph, src: int, dst: int) -> Optional[int]:
    """Timestamp of the first transfer src -> dst on any layer, else None."""
    return graph.first_seen_pair.get((src, dst))


def _write_str(out, text: str) -> None:
    data = text.encode("utf-8")
    out.write(struct.pack("<I", len(data)))
    out.write(data)


def _read_exact(handle, size: int) -> bytes:
    data = handle.read(size)
    if len(data) != size:
        raise SnapshotError("truncated snapshot")
    return data


def _read_str(handle) -> str:
    (length,) = struct.unpack("<I", _read_exact(handle, 4))
    return _read_exact(handle, length).decode("utf-8")


def write_snapshot(graph: TemporalMultilayerGraph, path: str) -> None:
    """Binary dump: header, node table, then per-layer event arrays."""
    with open(path, "wb") as out:
        out.write(SNAPSHOT_MAGIC)
        out.write(struct.pack("<IQI", SNAPSHOT_VERSION, graph.num_nodes, graph.num_layers))
        for node in range(graph.num_nodes):
            _write_str(out, graph.address(node))
        for layer in range(graph.num_layers):
            info = graph.registry.info(layer)
            _write_str(out, info.address)
            _write_str(out, info.ticker)
            out.write(struct.pack("<I", info.decimals))
            src, dst, ts = graph.layer_arrays(layer)
            out.write(struct.pack("<Q", len(ts)))
            out.write(src.astype("<i4", copy=False).tobytes())
            out.write(dst.astype("<i4", copy=False).tobytes())
            out.write(ts.astype("<i8", copy=False).tobytes())
            for amount in graph.layer_amounts(layer):
                _write_str(out, str(amount))


def read_snapshot(path: str) -> TemporalMultilayerGraph:
    with open(path, "rb") as handle:
        if _read_exact(handle, 4) != SNAPSHOT_MAGIC:
            raise SnapshotError(f"{path}: not a graph snapshot")
        version, num_nodes, num_layers = struct.unpack("<IQI", _read_exact(handle, 16))
        if version != SNAPSHOT_VERSION:
            raise SnapshotError(f"{path}: unsupported snapshot version {version}")
        addresses = [_read_str(handle) for _ in range(num_nodes)]
        infos: list[LayerInfo] = []
        layer_src: list[np.ndarray] = []
        layer_dst: list[np.ndarray] = []
        layer_ts: list[np.ndarray] = []
        layer_amounts: list[list[Decimal]] = []
        for _ in range(num_layers):
            address = _read_str(handle)
            ticker = _read_str(handle)
            (decimals,) = struct.unpack("<I", _read_exact(handle, 4))
            infos.append(LayerInfo(address=address, ticker=ticker, decimals=decimals))
            (count,) = struct.unpack("<Q", _read_exact(handle, 8))
            src = np.frombuffer(_read_exact(handle, 4 * count), dtype="<i4").astype(np.int32)
            dst = np.frombuffer(_read_exact(handle, 4 * count), dtype="<i4").astype(np.int32)
            ts = np.frombuffer(_read_exact(handle, 8 * count), dtype="<i8").astype(np.int64)
            if count and np.any(np.diff(ts) < 0):
                raise SnapshotError(f"{path}: layer {ticker} events not time-sorted")
            if count and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= num_nodes):
                raise SnapshotError(f"{path}: layer {ticker} references unknown nodes")
            amounts = [Decimal(_read_str(handle)) for _ in range(count)]
            layer_src.append(src)
            layer_dst.append(dst)
            layer_ts.append(ts)
            layer_amounts.append(amounts)
        if handle.read(1):
            raise SnapshotError(f"{path}: trailing bytes after snapshot")
    registry = LayerRegistry(infos)
    return TemporalMultilayerGraph(registry, addresses, layer_src, layer_dst, layer_ts, layer_amounts)
