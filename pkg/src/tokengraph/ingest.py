"""Loading of transfer logs, token registries and daily close prices.

Input files are plain CSV (``.gz`` accepted, detected by suffix). The
registry file fixes the layer order: line order in the file is the layer
index used everywhere downstream.
"""
from __future__ import annotations

import csv
import datetime as dt
import gzip
import io
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterator, Optional, Sequence

from .decimalutil import ddiv, shift_point
from .timeutil import TimeWindow, parse_date

MAX_DECIMALS = 36

REGISTRY_COLUMNS = ("contract_address", "ticker", "decimals")
TRANSFER_COLUMNS = ("from_address", "to_address", "time_stamp", "value", "contract_address")
PRICE_COLUMNS = ("date", "ticker", "close")

SKIP_MALFORMED = "malformed"
SKIP_UNKNOWN_CONTRACT = "unknown_contract"
SKIP_BAD_TIMESTAMP = "bad_timestamp"
SKIP_BAD_VALUE = "bad_value"
SKIP_OUT_OF_BOUNDS = "out_of_bounds"


class IngestError(ValueError):
    """Raised for unusable input files; message carries file and line."""

    def __init__(self, path: str, line: Optional[int], message: str):
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class LayerInfo:
    address: str
    ticker: str
    decimals: int


class LayerRegistry:
    """Ordered set of token contracts; position in the file is the layer id."""

    def __init__(self, layers: Sequence[LayerInfo] = ()):
        self._layers: list[LayerInfo] = list(layers)
        self._by_address: dict[str, int] = {}
        seen_tickers: set[str] = set()
        for index, info in enumerate(self._layers):
            address = info.address.lower()
            if address in self._by_address:
                raise ValueError(f"duplicate contract address {address}")
            if info.ticker in seen_tickers:
                raise ValueError(f"duplicate ticker {info.ticker}")
            if not 0 <= info.decimals <= MAX_DECIMALS:
                raise ValueError(f"decimals out of range for {info.ticker}: {info.decimals}")
            self._by_address[address] = index
            seen_tickers.add(info.ticker)

    def __len__(self) -> int:
        return len(self._layers)

    def __iter__(self) -> Iterator[LayerInfo]:
        return iter(self._layers)

    def layer_of(self, address: str) -> Optional[int]:
        return self._by_address.get(address.lower())

    def info(self, layer: int) -> LayerInfo:
        return self._layers[layer]

    def ticker(self, layer: int) -> str:
        return self._layers[layer].ticker

    def decimals(self, layer: int) -> int:
        return self._layers[layer].decimals

    @property
    def tickers(self) -> tuple[str, ...]:
        return tuple(info.ticker for info in self._layers)

    def layer_of_ticker(self, ticker: str) -> int:
        for index, info in enumerate(self._layers):
            if info.ticker == ticker:
                return index
        raise KeyError(ticker)


@dataclass(frozen=True)
class TransferEvent:
    sender: str
    receiver: str
    timestamp: int
    amount: Decimal
    layer: int


@dataclass
class IngestStats:
    rows_read: int = 0
    rows_kept: int = 0
    skipped: Counter = field(default_factory=Counter)

    @property
    def rows_skipped(self) -> int:
        return sum(self.skipped.values())


def _open_text(path: str) -> io.TextIOBase:
    if path.endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", newline="")
    return open(path, "r", encoding="utf-8", newline="")


def _reader(path: str, required: Sequence[str], allow_empty: bool) -> tuple[Optional[csv.DictReader], io.TextIOBase]:
    handle = _open_text(path)
    reader = csv.DictReader(handle)
    if reader.fieldnames is None:
        if allow_empty:
            return None, handle
        handle.close()
        raise IngestError(path, 1, f"missing header, expected columns {','.join(required)}")
    missing = [col for col in required if col not in reader.fieldnames]
    if missing:
        handle.close()
        raise IngestError(path, 1, f"missing columns: {','.join(missing)}")
    return reader, handle


def load_registry(path: str) -> LayerRegistry:
    """Read the token registry; the file's row order defines layer indexes."""
    reader, handle = _reader(path, REGISTRY_COLUMNS, allow_empty=True)
    layers: list[LayerInfo] = []
    seen_addresses: set[str] = set()
    seen_tickers: set[str] = set()
    with handle:
        if reader is None:
            return LayerRegistry()
        for row in reader:
            line = reader.line_num
            address = (row.get("contract_address") or "").strip().lower()
            ticker = (row.get("ticker") or "").strip()
            decimals_text = (row.get("decimals") or "").strip()
            if not address or not ticker or not decimals_text:
                raise IngestError(path, line, "malformed registry row")
            try:
                decimals = int(decimals_text)
            except ValueError:
                raise IngestError(path, line, f"bad decimals {decimals_text!r}") from None
            if not 0 <= decimals <= MAX_DECIMALS:
                raise IngestError(path, line, f"decimals out of range: {decimals}")
            if address in seen_addresses:
                raise IngestError(path, line, f"duplicate contract address {address}")
            if ticker in seen_tickers:
                raise IngestError(path, line, f"duplicate ticker {ticker}")
            seen_addresses.add(address)
            seen_tickers.add(ticker)
            layers.append(LayerInfo(address=address, ticker=ticker, decimals=decimals))
    return LayerRegistry(layers)


def load_transfers(
    path: str,
    registry: LayerRegistry,
    strict: bool = False,
    bounds: Optional[TimeWindow] = None,
) -> tuple[list[TransferEvent], IngestStats]:
    """Read transfer rows and return them sorted by timestamp.

    Rows that cannot be used (unknown contract, junk timestamp or value)
    are counted and skipped, or raise when ``strict`` is set. ``bounds``
    filters rows to a half-open time window; filtered rows are counted
    under their own reason and never raise. Ties in the sort keep file
    order.
    """
    reader, handle = _reader(path, TRANSFER_COLUMNS, allow_empty=False)
    assert reader is not None
    stats = IngestStats()
    events: list[TransferEvent] = []

    def reject(line: int, reason: str, detail: str) -> None:
        if strict and reason != SKIP_OUT_OF_BOUNDS:
            raise IngestError(path, line, detail)
        stats.skipped[reason] += 1

    with handle:
        for row in reader:
            line = reader.line_num
            stats.rows_read += 1
            sender = (row.get("from_address") or "").strip().lower()
            receiver = (row.get("to_address") or "").strip().lower()
            ts_text = (row.get("time_stamp") or "").strip()
            value_text = (row.get("value") or "").strip()
            contract = (row.get("contract_address") or "").strip()
            if not sender or not receiver:
                reject(line, SKIP_MALFORMED, "missing address")
                continue
            layer = registry.layer_of(contract) if contract else None
            if layer is None:
                reject(line, SKIP_UNKNOWN_CONTRACT, f"unknown contract {contract!r}")
                continue
            try:
                timestamp = int(ts_text)
            except ValueError:
                reject(line, SKIP_BAD_TIMESTAMP, f"bad timestamp {ts_text!r}")
                continue
            if timestamp < 0:
                reject(line, SKIP_BAD_TIMESTAMP, f"negative timestamp {timestamp}")
                continue
            try:
                raw = int(value_text)
            except ValueError:
                reject(line, SKIP_BAD_VALUE, f"bad value {value_text!r}")
                continue
            if raw < 0:
                reject(line, SKIP_BAD_VALUE, f"negative value {raw}")
                continue
            if bounds is not None and not bounds.contains(timestamp):
                stats.skipped[SKIP_OUT_OF_BOUNDS] += 1
                continue
            amount = shift_point(raw, registry.decimals(layer))
            events.append(TransferEvent(sender, receiver, timestamp, amount, layer))
            stats.rows_kept += 1

    events.sort(key=lambda event: event.timestamp)  # stable: ties keep file order
    return events, stats


class PriceSeries:
    """Daily close prices keyed by (ticker, UTC date)."""

    def __init__(self) -> None:
        self._by_ticker: dict[str, dict[dt.date, Decimal]] = {}

    def add(self, ticker: str, day: dt.date, close: Decimal) -> None:
        series = self._by_ticker.setdefault(ticker, {})
        if day in series:
            raise ValueError(f"duplicate price for {ticker} on {day.isoformat()}")
        if close < 0:
            raise ValueError(f"negative price for {ticker} on {day.isoformat()}")
        series[day] = close

    def close(self, ticker: str, day: dt.date) -> Optional[Decimal]:
        series = self._by_ticker.get(ticker)
        if series is None:
            return None
        return series.get(day)

    def days(self, ticker: str) -> list[dt.date]:
        return sorted(self._by_ticker.get(ticker, {}))

    @property
    def tickers(self) -> tuple[str, ...]:
        return tuple(sorted(self._by_ticker))

    def __contains__(self, ticker: str) -> bool:
        return ticker in self._by_ticker

    def __len__(self) -> int:
        return sum(len(series) for series in self._by_ticker.values())


def load_prices(path: str) -> PriceSeries:
    reader, handle = _reader(path, PRICE_COLUMNS, allow_empty=True)
    prices = PriceSeries()
    with handle:
        if reader is None:
            return prices
        for row in reader:
            line = reader.line_num
            date_text = (row.get("date") or "").strip()
            ticker = (row.get("ticker") or "").strip()
            close_text = (row.get("close") or "").strip()
            if not date_text or not ticker or not close_text:
                raise IngestError(path, line, "malformed price row")
            try:
                day = parse_date(date_text)
            except ValueError:
                raise IngestError(path, line, f"bad date {date_text!r}") from None
            try:
                close = Decimal(close_text)
            except ArithmeticError:
                raise IngestError(path, line, f"bad close {close_text!r}") from None
            if not close.is_finite():
                raise IngestError(path, line, f"bad close {close_text!r}")
            try:
                prices.add(ticker, day, close)
            except ValueError as exc:
                raise IngestError(path, line, str(exc)) from None
    return prices


def normalize_price_series(prices: PriceSeries, start_day: Optional[dt.date] = None) -> PriceSeries:
    """Rebase every ticker to its close on ``start_day`` (default: its first day).

    The rebased series is exactly 1 on the start day. A ticker with no
    price on an explicit ``start_day`` is an error naming that ticker.
    """
    rebased = PriceSeries()
    for ticker in prices.tickers:
        days = prices.days(ticker)
        base_day = start_day if start_day is not None else days[0]
        base = prices.close(ticker, base_day)
        if base is None or base == 0:
            raise ValueError(
                f"cannot normalize {ticker}: no usable price on {base_day.isoformat()}"
            )
        for day in days:
            close = prices.close(ticker, day)
            assert close is not None
            rebased.add(ticker, day, ddiv(close, base))
    return rebased
