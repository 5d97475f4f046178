"""Per-window metric series and lagged cross-correlation between them.

A series has one float per rolling window. Correlation at lag k pairs
x[t-k] with y[t] over their overlap, so a positive best lag means x
leads y. Each overlap segment is normalized on its own mean and
variance (sample Pearson); segments shorter than ``min_overlap`` or
with zero variance yield no coefficient for that lag.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graph import TemporalMultilayerGraph, rolling_windows
from .ingest import PriceSeries
from .metrics import LayerMetrics, layer_metrics
from .timeutil import TimeWindow

SERIES_METRICS = (
    "nodes",
    "transactions",
    "unique_edges",
    "token_volume",
    "usd_volume",
    "reciprocity",
    "avg_degree",
    "density",
    "clustering",
    "largest_wcc_fraction",
)

DEFAULT_MAX_LAG = 10
DEFAULT_MIN_OVERLAP = 10


class DegenerateSeriesError(ValueError):
    """No lag produced a coefficient: series too short or constant everywhere."""


@dataclass(frozen=True)
class MetricSeries:
    metric: str
    label: str
    window_starts: tuple[int, ...]
    values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)


def metric_value(row: LayerMetrics, metric: str) -> float:
    if metric not in SERIES_METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    if metric == "usd_volume":
        if row.usd_volume is None:
            raise ValueError("usd_volume requires price data")
        return float(row.usd_volume)
    value = getattr(row, metric)
    return float(value)


def series_from_rows(
    metric: str,
    label: str,
    window_starts: Sequence[int],
    rows: Sequence[LayerMetrics],
) -> MetricSeries:
    values = tuple(metric_value(row, metric) for row in rows)
    return MetricSeries(metric, label, tuple(window_starts), values)


def extract_series(
    graph: TemporalMultilayerGraph,
    metric: str,
    width: int,
    step: int,
    window_range: Optional[TimeWindow] = None,
    layer: Optional[int] = None,
    prices: Optional[PriceSeries] = None,
) -> MetricSeries:
    """One metric value per rolling window over the range (default: full span)."""
    if metric not in SERIES_METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    if metric == "usd_volume" and prices is None:
        raise ValueError("usd_volume requires price data")
    if window_range is None:
        window_range = graph.span
    label = graph.registry.ticker(layer) if layer is not None else "full_graph"
    if window_range is None:
        return MetricSeries(metric, label, (), ())
    windows = rolling_windows(window_range, width, step)
    rows = [
        layer_metrics(graph.window(w), layer, prices if metric == "usd_volume" else None)
        for w in windows
    ]
    return series_from_rows(metric, label, [w.start for w in windows], rows)


def _pearson(xs: np.ndarray, ys: np.ndarray) -> Optional[float]:
    xm = xs - xs.mean()
    ym = ys - ys.mean()
    sx = float(np.dot(xm, xm))
    sy = float(np.dot(ym, ym))
    if sx == 0.0 or sy == 0.0:
        return None
    return float(np.dot(xm, ym) / math.sqrt(sx * sy))


@dataclass(frozen=True)
class CrossCorrelation:
    lags: tuple[int, ...]        # ascending; only lags that produced a value
    rhos: tuple[float, ...]
    best_lag: int
    best_rho: float

    def rho(self, lag: int) -> float:
        try:
            return self.rhos[self.lags.index(lag)]
        except ValueError:
            raise KeyError(f"no coefficient at lag {lag}") from None


def cross_correlation(
    x: Sequence[float],
    y: Sequence[float],
    max_lag: int = DEFAULT_MAX_LAG,
    min_overlap: int = DEFAULT_MIN_OVERLAP,
) -> CrossCorrelation:
    """Signed-maximum lagged Pearson between two equal-length series.

    Best lag maximizes the signed coefficient; ties go to the smallest
    |k|, then to the negative lag. Raises DegenerateSeriesError when no
    lag qualifies.
    """
    if len(x) != len(y):
        raise ValueError(f"series length mismatch: {len(x)} vs {len(y)}")
    if max_lag < 0 or min_overlap < 2:
        raise ValueError("max_lag must be >= 0 and min_overlap >= 2")
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    n = len(xs)
    by_lag: dict[int, float] = {}
    for k in range(-max_lag, max_lag + 1):
        overlap = n - abs(k)
        if overlap < min_overlap:
            continue
        if k >= 0:
            seg_x, seg_y = xs[: n - k], ys[k:]
        else:
            seg_x, seg_y = xs[-k:], ys[: n + k]
        rho = _pearson(seg_x, seg_y)
        if rho is not None:
            by_lag[k] = rho
    if not by_lag:
        raise DegenerateSeriesError(
            "degenerate series: no lag with enough overlap and non-constant values"
        )
    best_lag = None
    best_rho = -math.inf
    for k in sorted(by_lag, key=lambda k: (abs(k), k)):
        if by_lag[k] > best_rho:
            best_rho = by_lag[k]
            best_lag = k
    lags = tuple(sorted(by_lag))
    return CrossCorrelation(lags, tuple(by_lag[k] for k in lags), best_lag, best_rho)


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    rhos: tuple[tuple[float, ...], ...]       # symmetric, unit diagonal
    best_lags: tuple[tuple[int, ...], ...]    # antisymmetric

    def rho(self, i: int, j: int) -> float:
        return self.rhos[i][j]


def correlation_matrix(
    series_list: Sequence[MetricSeries],
    max_lag: int = DEFAULT_MAX_LAG,
    min_overlap: int = DEFAULT_MIN_OVERLAP,
) -> CorrelationMatrix:
    """Pairwise best-lag coefficients; diagonal pinned to exactly 1."""
    count = len(series_list)
    labels = tuple(s.label for s in series_list)
    rhos = [[1.0] * count for _ in range(count)]
    lags = [[0] * count for _ in range(count)]
    for i in range(count):
        for j in range(i + 1, count):
            try:
                cc = cross_correlation(
                    series_list[i].values, series_list[j].values, max_lag, min_overlap
                )
            except DegenerateSeriesError as exc:
                raise DegenerateSeriesError(
                    f"{exc} (pair {labels[i]}, {labels[j]})"
                ) from None
            rhos[i][j] = rhos[j][i] = cc.best_rho
            lags[i][j] = cc.best_lag
            lags[j][i] = -cc.best_lag
    return CorrelationMatrix(
        labels,
        tuple(tuple(row) for row in rhos),
        tuple(tuple(row) for row in lags),
    )
