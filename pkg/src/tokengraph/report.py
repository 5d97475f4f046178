"""Deterministic report files plus a digest manifest.

Every writer renders full text in memory, hashes it, then writes it, so
re-running an analysis on the same inputs produces byte-identical files
and an identical manifest. Nothing here embeds wall-clock time, host
names or absolute paths. Decimals are written fixed-point, floats with
``repr`` (shortest round-trip), timestamps both as Unix seconds and
ISO-8601.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from decimal import Decimal
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from .decimalutil import fmt
from .flows import ActivityDistribution, ActivitySeries, ConcentrationReport, NoveltySeries, TransitionMatrix
from .graph import CRASH_MARKERS, PeriodConfig
from .metrics import DegreeHistogram, LayerMetrics
from .series import CorrelationMatrix, MetricSeries
from .timeutil import iso_from_ts

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1

TABLE_COLUMNS = (
    "label",
    "nodes",
    "unique_edges",
    "transactions",
    "token_volume",
    "usd_volume",
    "usd_skipped",
    "active_out",
    "active_in",
    "sources",
    "sinks",
    "reciprocity",
    "avg_degree",
    "density",
    "clustering",
    "largest_wcc_fraction",
)


def render(value: Any) -> str:
    """One canonical text form per value type; empty string for absent."""
    if value is None:
        return ""
    if isinstance(value, Decimal):
        return fmt(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in rows:
        writer.writerow([render(cell) for cell in row])
    return buffer.getvalue()


def _json_text(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


class ReportBundle:
    """A directory of report files described by one manifest.

    The manifest lists every file with its analysis name, parameters and
    content digest; entries are sorted by path so the manifest itself is
    reproducible.
    """

    def __init__(
        self,
        out_dir: str,
        periods: Optional[PeriodConfig] = None,
        markers: Optional[Mapping[str, int]] = None,
    ):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.periods = periods
        self.markers = dict(CRASH_MARKERS if markers is None else markers)
        self._entries: list[dict[str, Any]] = []
        self._paths: set[str] = set()

    def _emit(self, analysis: str, filename: str, text: str, parameters: Mapping[str, Any]) -> Path:
        if filename in self._paths:
            raise ValueError(f"duplicate report path {filename!r}")
        data = text.encode("utf-8")
        path = self.out_dir / filename
        path.write_bytes(data)
        self._entries.append(
            {
                "analysis": analysis,
                "parameters": dict(parameters),
                "path": filename,
                "sha256": hashlib.sha256(data).hexdigest(),
            }
        )
        self._paths.add(filename)
        return path

    def _annotations(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "markers": [
                {"name": name, "unix": ts, "iso": iso_from_ts(ts)}
                for name, ts in self.markers.items()
            ]
        }
        if self.periods is not None:
            exclusion = self.periods.exclusion
            payload["exclusion"] = {
                "start_unix": exclusion.start,
                "start_iso": iso_from_ts(exclusion.start),
                "end_unix": exclusion.end,
                "end_iso": iso_from_ts(exclusion.end),
            }
        return payload

    def write_series(
        self,
        name: str,
        series_list: Sequence[MetricSeries],
        parameters: Optional[Mapping[str, Any]] = None,
        annotate: bool = True,
    ) -> Path:
        """Wide CSV: one row per window, one value column per series label."""
        if not series_list:
            raise ValueError("no series to write")
        starts = series_list[0].window_starts
        for s in series_list[1:]:
            if s.window_starts != starts:
                raise ValueError("series share one file only with identical windows")
        header = ["window_start_unix", "window_start_iso"] + [s.label for s in series_list]
        rows: list[Sequence[Any]] = [header]
        for i, start in enumerate(starts):
            rows.append([start, iso_from_ts(start)] + [s.values[i] for s in series_list])
        params = dict(parameters or {})
        params.setdefault("metric", series_list[0].metric)
        path = self._emit(name, f"{name}.csv", _csv_text(rows), params)
        if annotate:
            self._emit(
                f"{name}.annotations",
                f"{name}.annotations.json",
                _json_text(self._annotations()),
                {},
            )
        return path

    def write_matrix(
        self,
        name: str,
        matrix: CorrelationMatrix,
        parameters: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        """Correlation matrix plus the best-lag matrix alongside it."""
        rho_rows: list[Sequence[Any]] = [["label", *matrix.labels]]
        lag_rows: list[Sequence[Any]] = [["label", *matrix.labels]]
        for i, label in enumerate(matrix.labels):
            rho_rows.append([label, *matrix.rhos[i]])
            lag_rows.append([label, *matrix.best_lags[i]])
        params = dict(parameters or {})
        path = self._emit(name, f"{name}.csv", _csv_text(rho_rows), params)
        self._emit(f"{name}.lags", f"{name}.lags.csv", _csv_text(lag_rows), params)
        return path

    def write_table(
        self,
        name: str,
        rows: Sequence[tuple[str, LayerMetrics]],
        parameters: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        """Per-layer metric rows, typically led by the pooled full-graph row."""
        table: list[Sequence[Any]] = [list(TABLE_COLUMNS)]
        for label, m in rows:
            table.append(
                [
                    label,
                    m.nodes,
                    m.unique_edges,
                    m.transactions,
                    m.token_volume,
                    m.usd_volume,
                    m.usd_skipped,
                    m.active_out,
                    m.active_in,
                    m.sources,
                    m.sinks,
                    m.reciprocity,
                    m.avg_degree,
                    m.density,
                    m.clustering,
                    m.largest_wcc_fraction,
                ]
            )
        return self._emit(name, f"{name}.csv", _csv_text(table), parameters or {})

    def write_novelty(
        self,
        name: str,
        novelty: NoveltySeries,
        parameters: Optional[Mapping[str, Any]] = None,
        annotate: bool = True,
    ) -> Path:
        rows: list[Sequence[Any]] = [
            ["window_start_unix", "window_start_iso", "new_edges", "new_nodes"]
        ]
        for i, start in enumerate(novelty.window_starts):
            rows.append([start, iso_from_ts(start), novelty.new_edges[i], novelty.new_nodes[i]])
        params = dict(parameters or {})
        params.setdefault("width", novelty.width)
        path = self._emit(name, f"{name}.csv", _csv_text(rows), params)
        if annotate:
            self._emit(
                f"{name}.annotations",
                f"{name}.annotations.json",
                _json_text(self._annotations()),
                {},
            )
        return path

    def write_activity_series(
        self,
        name: str,
        series: ActivitySeries,
        labels: Sequence[str],
        parameters: Optional[Mapping[str, Any]] = None,
        annotate: bool = True,
    ) -> Path:
        if len(labels) != series.num_layers:
            raise ValueError("label count does not match layer count")
        header = ["window_start_unix", "window_start_iso"] + [
            f"layers_{k}" for k in range(1, series.num_layers + 1)
        ]
        rows: list[Sequence[Any]] = [header]
        for i, start in enumerate(series.window_starts):
            rows.append([start, iso_from_ts(start), *series.counts[i]])
        path = self._emit(name, f"{name}.csv", _csv_text(rows), parameters or {})
        if annotate:
            self._emit(
                f"{name}.annotations",
                f"{name}.annotations.json",
                _json_text(self._annotations()),
                {},
            )
        return path

    def write_activity_table(
        self,
        name: str,
        distributions: Sequence[tuple[str, ActivityDistribution]],
        parameters: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        """One row per period: wallet counts and shares by layer count."""
        if not distributions:
            raise ValueError("no distributions to write")
        num_layers = len(distributions[0][1].counts)
        header = (
            ["label", "total_users"]
            + [f"users_{k}" for k in range(1, num_layers + 1)]
            + [f"share_{k}" for k in range(1, num_layers + 1)]
        )
        rows: list[Sequence[Any]] = [header]
        for label, dist in distributions:
            if len(dist.counts) != num_layers:
                raise ValueError("distributions disagree on layer count")
            shares = [dist.share(k) for k in range(1, num_layers + 1)]
            rows.append([label, dist.total_users, *dist.counts, *shares])
        return self._emit(name, f"{name}.csv", _csv_text(rows), parameters or {})

    def write_degree_histogram(
        self,
        name: str,
        histogram: DegreeHistogram,
        parameters: Optional[Mapping[str, Any]] = None,
        log_ratio: float = 2.0,
    ) -> Path:
        rows: list[Sequence[Any]] = [["degree", "count", "probability"]]
        probabilities = histogram.probabilities()
        for i, degree in enumerate(histogram.degrees):
            rows.append([degree, histogram.counts[i], probabilities[i]])
        params = dict(parameters or {})
        path = self._emit(name, f"{name}.csv", _csv_text(rows), params)
        bin_rows: list[Sequence[Any]] = [["bin_lo", "bin_hi", "count", "density"]]
        for b in histogram.log_binned(log_ratio):
            bin_rows.append([b.lo, b.hi, b.count, b.density])
        self._emit(
            f"{name}.logbins",
            f"{name}.logbins.csv",
            _csv_text(bin_rows),
            {**params, "ratio": log_ratio},
        )
        return path

    def write_transitions(
        self,
        name: str,
        matrix: TransitionMatrix,
        parameters: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        rows: list[Sequence[Any]] = [["label", *matrix.labels]]
        for i, label in enumerate(matrix.labels):
            rows.append([label, *matrix.counts[i]])
        params = dict(parameters or {})
        params.setdefault("cohort_size", matrix.cohort_size)
        return self._emit(name, f"{name}.csv", _csv_text(rows), params)

    def write_concentration(
        self,
        name: str,
        reports: Sequence[ConcentrationReport],
        parameters: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        """Ranked seller rows per window; a final per-window tail row."""
        rows: list[Sequence[Any]] = [
            ["window_start_unix", "window_start_iso", "ticker", "rank", "wallet", "tokens", "share"]
        ]
        for report in reports:
            start = report.window.start
            iso = iso_from_ts(start)
            if report.no_activity:
                rows.append([start, iso, report.ticker, "none", "", Decimal(0), Decimal(0)])
                continue
            for rank, share in enumerate(report.top, start=1):
                rows.append([start, iso, report.ticker, rank, share.wallet, share.tokens, share.share])
            rows.append(
                [
                    start,
                    iso,
                    report.ticker,
                    "tail",
                    f"{report.tail_wallets} wallets",
                    report.total_tokens - sum((s.tokens for s in report.top), Decimal(0)),
                    report.tail_share,
                ]
            )
        return self._emit(name, f"{name}.csv", _csv_text(rows), parameters or {})

    def write_recurrent(
        self,
        name: str,
        hits: Sequence[tuple[str, int]],
        parameters: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        rows: list[Sequence[Any]] = [["wallet", "appearances"]]
        rows.extend(hits)
        return self._emit(name, f"{name}.csv", _csv_text(rows), parameters or {})

    def write_json(
        self,
        name: str,
        payload: Any,
        parameters: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        return self._emit(name, f"{name}.json", _json_text(payload), parameters or {})

    def write_prices(
        self,
        name: str,
        days: Sequence[str],
        columns: Mapping[str, Sequence[Optional[Decimal]]],
        parameters: Optional[Mapping[str, Any]] = None,
        annotate: bool = True,
    ) -> Path:
        """Wide daily price CSV: one column per ticker, blanks for gaps."""
        tickers = list(columns)
        rows: list[Sequence[Any]] = [["date", *tickers]]
        for i, day in enumerate(days):
            rows.append([day, *(columns[t][i] for t in tickers)])
        path = self._emit(name, f"{name}.csv", _csv_text(rows), parameters or {})
        if annotate:
            self._emit(
                f"{name}.annotations",
                f"{name}.annotations.json",
                _json_text(self._annotations()),
                {},
            )
        return path

    def finalize(self) -> str:
        """Write the manifest; returns its content digest."""
        manifest = {
            "version": MANIFEST_VERSION,
            "entries": sorted(self._entries, key=lambda entry: entry["path"]),
        }
        text = _json_text(manifest)
        (self.out_dir / MANIFEST_NAME).write_text(text, encoding="utf-8")
        return hashlib.sha256(text.encode("utf-8")).hexdigest()
