"""Command-line entry point.

One process, one run: load inputs, compute the requested analyses, write
a report bundle, exit. Options come from defaults, then the environment
(`TOKENGRAPH_OUT` for the output directory), then a JSON config file,
then explicit flags, each layer overriding the previous one.

Exit codes: 0 success, 2 usage, 3 missing input, 4 invalid config,
5 degenerate series, 6 unusable input data, 1 anything else. Failures
print a single line `error[<code>]: <message>` to stderr.
"""
from __future__ import annotations

import argparse
import datetime as dt
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .flows import (
    favorite_transitions,
    layer_activity_series,
    new_edge_series,
    period_layer_activity,
    recurrent_top_sellers,
    seller_concentration,
)
from .graph import (
    GraphBuildError,
    PeriodConfig,
    SnapshotError,
    TemporalMultilayerGraph,
    default_periods,
    rolling_windows,
)
from .ingest import (
    IngestError,
    IngestStats,
    LayerRegistry,
    PriceSeries,
    load_prices,
    load_registry,
    load_transfers,
    normalize_price_series,
)
from .metrics import LayerMetrics, degree_distribution, layer_metrics
from .report import ReportBundle
from .series import (
    SERIES_METRICS,
    DegenerateSeriesError,
    MetricSeries,
    correlation_matrix,
    series_from_rows,
)
from .timeutil import DAY, TimeWindow, parse_date, parse_duration

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_INVALID_CONFIG = 4
EXIT_DEGENERATE = 5
EXIT_BAD_DATA = 6

ENV_OUT_DIR = "TOKENGRAPH_OUT"

DEFAULT_CONCENTRATION_DAYS = (
    "2022-04-02",
    "2022-04-03",
    "2022-04-11",
    "2022-04-19",
    "2022-05-01",
)

CORRELATE_METRICS = ("transactions", "unique_edges")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    transfers: Optional[str] = None
    registry: Optional[str] = None
    prices: Optional[str] = None
    out: str = "reports"
    window: int = DAY
    step: int = DAY
    lag: int = 10
    min_overlap: int = 10
    top_k: int = 10
    focus: Optional[str] = None
    tau: int = DAY
    strict: bool = False
    threads: int = 1
    transitivity: bool = False
    days: tuple[str, ...] = DEFAULT_CONCENTRATION_DAYS
    periods: PeriodConfig = field(default_factory=default_periods)


_CONFIG_KEYS = {
    "transfers": str,
    "registry": str,
    "prices": str,
    "out": str,
    "window": str,
    "step": str,
    "pre": str,
    "post": str,
    "exclusion": str,
    "lag": int,
    "min_overlap": int,
    "top_k": int,
    "focus": str,
    "tau": str,
    "strict": bool,
    "threads": int,
    "transitivity": bool,
    "days": list,
}


def _parse_date_range(text: str, flag: str) -> TimeWindow:
    parts = text.split(":")
    if len(parts) != 2:
        raise CliError(EXIT_INVALID_CONFIG, f"{flag} wants START:END dates, got {text!r}")
    try:
        return TimeWindow.from_dates(parse_date(parts[0]), parse_date(parts[1]))
    except ValueError as exc:
        raise CliError(EXIT_INVALID_CONFIG, f"{flag}: {exc}") from None


def _parse_duration_flag(text: str, flag: str) -> int:
    try:
        return parse_duration(text)
    except ValueError as exc:
        raise CliError(EXIT_INVALID_CONFIG, f"{flag}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tokengraph",
        description="Windowed analytics over temporal multilayer token-transfer graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "stats": "per-period structural tables, degree histograms, activity table",
        "series": "rolling-window metric series for every layer",
        "correlate": "lagged cross-correlation matrices between layers",
        "novelty": "first-appearance counts per tumbling window",
        "activity": "daily distribution of wallets by layer count",
        "transitions": "favourite-layer shifts of the focus cohort",
        "concentration": "top-seller shares per day and layer",
        "all": "every analysis into one bundle",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with any of the long options")
        p.add_argument("--transfers", help="transfer CSV (.gz ok)")
        p.add_argument("--registry", help="token registry CSV; row order fixes layers")
        p.add_argument("--prices", help="daily close CSV")
        p.add_argument("--out", help=f"output directory (default ${ENV_OUT_DIR} or ./reports)")
        p.add_argument("--window", help="rolling window width, e.g. 1d (default 1d)")
        p.add_argument("--step", help="rolling window step (default: window width)")
        p.add_argument("--pre", help="pre period START:END dates")
        p.add_argument("--post", help="post period START:END dates")
        p.add_argument("--exclusion", help="excluded gap START:END dates")
        p.add_argument("--lag", type=int, help="max correlation lag in windows (default 10)")
        p.add_argument("--min-overlap", type=int, dest="min_overlap",
                       help="min points per correlation segment (default 10)")
        p.add_argument("--top-k", type=int, dest="top_k", help="sellers to rank (default 10)")
        p.add_argument("--focus", help="ticker for cohort analyses (default: first layer)")
        p.add_argument("--tau", help="novelty bucket width, e.g. 7d (default 1d)")
        p.add_argument("--days", help="comma-separated dates for concentration reports")
        p.add_argument("--strict", action="store_true", default=None,
                       help="fail on any malformed transfer row instead of skipping")
        p.add_argument("--threads", type=int, help="worker threads for window metrics")
        p.add_argument("--transitivity", action="store_true", default=None,
                       help="report global transitivity instead of mean local clustering")
    return parser


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except FileNotFoundError:
        raise CliError(EXIT_MISSING_INPUT, f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_INVALID_CONFIG, f"config file {path}: {exc}") from None
    if not isinstance(payload, dict):
        raise CliError(EXIT_INVALID_CONFIG, f"config file {path}: expected a JSON object")
    for key, value in payload.items():
        if key not in _CONFIG_KEYS:
            raise CliError(EXIT_INVALID_CONFIG, f"config file {path}: unknown option {key!r}")
        if not isinstance(value, _CONFIG_KEYS[key]):
            raise CliError(
                EXIT_INVALID_CONFIG,
                f"config file {path}: option {key!r} wants {_CONFIG_KEYS[key].__name__}",
            )
    return payload


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < environment < config file < flags."""
    merged: dict = {}
    if os.environ.get(ENV_OUT_DIR):
        merged["out"] = os.environ[ENV_OUT_DIR]
    if getattr(args, "config", None):
        merged.update(_load_config_file(args.config))
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value

    config = RunConfig()
    for key in ("transfers", "registry", "prices", "out", "focus"):
        if key in merged:
            setattr(config, key, merged[key])
    if "window" in merged:
        config.window = _parse_duration_flag(str(merged["window"]), "--window")
    config.step = (
        _parse_duration_flag(str(merged["step"]), "--step") if "step" in merged else config.window
    )
    if "tau" in merged:
        config.tau = _parse_duration_flag(str(merged["tau"]), "--tau")
    for key in ("lag", "min_overlap", "top_k", "threads"):
        if key in merged:
            value = int(merged[key])
            if value <= 0 and key != "lag":
                raise CliError(EXIT_INVALID_CONFIG, f"--{key.replace('_', '-')} must be positive")
            if key == "lag" and value < 0:
                raise CliError(EXIT_INVALID_CONFIG, "--lag must be >= 0")
            setattr(config, key, value)
    for key in ("strict", "transitivity"):
        if key in merged:
            setattr(config, key, bool(merged[key]))
    if "days" in merged:
        raw = merged["days"]
        items = [d.strip() for d in raw.split(",")] if isinstance(raw, str) else list(raw)
        if not items:
            raise CliError(EXIT_INVALID_CONFIG, "--days: empty date list")
        for item in items:
            try:
                parse_date(item)
            except ValueError:
                raise CliError(EXIT_INVALID_CONFIG, f"--days: bad date {item!r}") from None
        config.days = tuple(items)

    base = default_periods()
    pre = _parse_date_range(merged["pre"], "--pre") if "pre" in merged else base.pre
    post = _parse_date_range(merged["post"], "--post") if "post" in merged else base.post
    exclusion = (
        _parse_date_range(merged["exclusion"], "--exclusion")
        if "exclusion" in merged
        else base.exclusion
    )
    try:
        config.periods = PeriodConfig(pre=pre, exclusion=exclusion, post=post)
    except ValueError as exc:
        raise CliError(EXIT_INVALID_CONFIG, str(exc)) from None
    return config


@dataclass
class Workspace:
    graph: TemporalMultilayerGraph
    registry: LayerRegistry
    prices: Optional[PriceSeries]
    stats: IngestStats
    config: RunConfig

    @property
    def span(self) -> TimeWindow:
        return self.config.periods.span

    def focus_layer(self) -> int:
        if self.config.focus is None:
            if len(self.registry) == 0:
                raise CliError(EXIT_BAD_DATA, "registry has no layers")
            return 0
        try:
            return self.registry.layer_of_ticker(self.config.focus)
        except KeyError:
            raise CliError(
                EXIT_INVALID_CONFIG, f"--focus: unknown ticker {self.config.focus!r}"
            ) from None


def load_workspace(config: RunConfig) -> Workspace:
    if not config.transfers:
        raise CliError(EXIT_MISSING_INPUT, "missing required input: --transfers")
    if not config.registry:
        raise CliError(EXIT_MISSING_INPUT, "missing required input: --registry")
    registry = load_registry(config.registry)
    events, stats = load_transfers(
        config.transfers, registry, strict=config.strict, bounds=config.periods.span
    )
    graph = TemporalMultilayerGraph.build(events, registry)
    prices = load_prices(config.prices) if config.prices else None
    return Workspace(graph, registry, prices, stats, config)


def _window_rows(
    ws: Workspace,
    windows: Sequence[TimeWindow],
    layer: Optional[int],
    with_prices: bool,
) -> list[LayerMetrics]:
    """One LayerMetrics per window; thread count never changes the result."""
    prices = ws.prices if with_prices else None

    def compute(window: TimeWindow) -> LayerMetrics:
        return layer_metrics(
            ws.graph.window(window), layer, prices, transitivity=ws.config.transitivity
        )

    if ws.config.threads > 1:
        with ThreadPoolExecutor(max_workers=ws.config.threads) as pool:
            return list(pool.map(compute, windows))
    return [compute(w) for w in windows]


def _labelled_layers(ws: Workspace) -> list[tuple[str, Optional[int]]]:
    return [("full_graph", None)] + [
        (ticker, layer) for layer, ticker in enumerate(ws.registry.tickers)
    ]


def run_stats(ws: Workspace, bundle: ReportBundle) -> None:
    periods = ws.config.periods
    spans = [("span", ws.span), ("pre", periods.pre), ("post", periods.post)]
    for period_name, window in spans:
        view = ws.graph.window(window)
        rows = [
            (label, layer_metrics(view, layer, ws.prices, transitivity=ws.config.transitivity))
            for label, layer in _labelled_layers(ws)
        ]
        bundle.write_table(
            f"structure_{period_name}",
            rows,
            {"window_start": window.start, "window_end": window.end},
        )
        distributions = [
            (period_name, period_layer_activity(ws.graph, window))
        ]
        bundle.write_activity_table(
            f"layer_activity_{period_name}",
            distributions,
            {"window_start": window.start, "window_end": window.end},
        )
    for period_name, window in (("pre", periods.pre), ("post", periods.post)):
        view = ws.graph.window(window)
        for label, layer in _labelled_layers(ws):
            bundle.write_degree_histogram(
                f"degree_{period_name}_{label}",
                degree_distribution(view, layer),
                {"window_start": window.start, "window_end": window.end, "label": label},
            )
    bundle.write_json(
        "ingest_stats",
        {
            "rows_read": ws.stats.rows_read,
            "rows_kept": ws.stats.rows_kept,
            "rows_skipped": ws.stats.rows_skipped,
            "skipped_by_reason": dict(sorted(ws.stats.skipped.items())),
        },
    )


def run_series(ws: Workspace, bundle: ReportBundle) -> None:
    config = ws.config
    windows = rolling_windows(ws.span, config.window, config.step)
    starts = [w.start for w in windows]
    with_prices = ws.prices is not None
    rows_by_label = {
        label: _window_rows(ws, windows, layer, with_prices)
        for label, layer in _labelled_layers(ws)
    }
    metrics = [m for m in SERIES_METRICS if m != "usd_volume" or with_prices]
    for metric in metrics:
        series_list = [
            series_from_rows(metric, label, starts, rows)
            for label, rows in rows_by_label.items()
        ]
        bundle.write_series(
            f"series_{metric}",
            series_list,
            {"width": config.window, "step": config.step},
        )
    if ws.prices is not None:
        _write_price_panels(ws, bundle)


def _write_price_panels(ws: Workspace, bundle: ReportBundle) -> None:
    assert ws.prices is not None
    for name, prices in (
        ("prices_close", ws.prices),
        ("prices_normalized", normalize_price_series(ws.prices)),
    ):
        tickers = [t for t in ws.registry.tickers if t in prices] or list(prices.tickers)
        all_days = sorted({day for t in tickers for day in prices.days(t)})
        columns = {t: [prices.close(t, day) for day in all_days] for t in tickers}
        bundle.write_prices(name, [d.isoformat() for d in all_days], columns)


def run_correlate(ws: Workspace, bundle: ReportBundle) -> None:
    config = ws.config
    metrics = list(CORRELATE_METRICS)
    if ws.prices is not None:
        metrics.append("usd_volume")
    for period_name, window in (("pre", config.periods.pre), ("post", config.periods.post)):
        windows = rolling_windows(window, config.window, config.step)
        starts = [w.start for w in windows]
        rows_by_ticker = {
            ticker: _window_rows(ws, windows, layer, ws.prices is not None)
            for layer, ticker in enumerate(ws.registry.tickers)
        }
        for metric in metrics:
            series_list = [
                series_from_rows(metric, ticker, starts, rows)
                for ticker, rows in rows_by_ticker.items()
            ]
            matrix = correlation_matrix(series_list, config.lag, config.min_overlap)
            bundle.write_matrix(
                f"correlation_{metric}_{period_name}",
                matrix,
                {
                    "metric": metric,
                    "max_lag": config.lag,
                    "min_overlap": config.min_overlap,
                    "width": config.window,
                    "step": config.step,
                    "window_start": window.start,
                    "window_end": window.end,
                },
            )


def run_novelty(ws: Workspace, bundle: ReportBundle) -> None:
    novelty = new_edge_series(ws.graph, ws.config.tau, ws.span)
    bundle.write_novelty("novelty", novelty, {"width": ws.config.tau})


def run_activity(ws: Workspace, bundle: ReportBundle) -> None:
    series = layer_activity_series(ws.graph, ws.span, DAY)
    bundle.write_activity_series("layer_activity_daily", series, ws.registry.tickers)
    if ws.config.focus is not None:
        layer = ws.focus_layer()
        view = ws.graph.window(ws.span)
        src, dst, _ = view.arrays(layer)
        cohort = set(int(n) for n in src) | set(int(n) for n in dst)
        focus_series = layer_activity_series(ws.graph, ws.span, DAY, cohort)
        bundle.write_activity_series(
            f"layer_activity_daily_{ws.config.focus}",
            focus_series,
            ws.registry.tickers,
            {"cohort": ws.config.focus},
        )


def run_transitions(ws: Workspace, bundle: ReportBundle) -> None:
    layer = ws.focus_layer()
    ticker = ws.registry.ticker(layer)
    matrix = favorite_transitions(
        ws.graph, ws.config.periods.pre, ws.config.periods.post, layer
    )
    bundle.write_transitions(
        f"favorite_transitions_{ticker}", matrix, {"focus": ticker}
    )


def run_concentration(ws: Workspace, bundle: ReportBundle) -> None:
    config = ws.config
    layers = (
        [(ws.focus_layer(), ws.registry.ticker(ws.focus_layer()))]
        if config.focus is not None
        else list(enumerate(ws.registry.tickers))
    )
    for layer, ticker in layers:
        reports = []
        for day_text in config.days:
            window = TimeWindow.day(parse_date(day_text))
            reports.append(
                seller_concentration(ws.graph, window, layer, config.top_k)
            )
        bundle.write_concentration(
            f"seller_concentration_{ticker}",
            reports,
            {"ticker": ticker, "top_k": config.top_k, "days": list(config.days)},
        )
        bundle.write_recurrent(
            f"recurrent_top_sellers_{ticker}",
            recurrent_top_sellers(reports),
            {"ticker": ticker, "top_k": config.top_k, "min_count": 2},
        )


RUNNERS: dict[str, Callable[[Workspace, ReportBundle], None]] = {
    "stats": run_stats,
    "series": run_series,
    "correlate": run_correlate,
    "novelty": run_novelty,
    "activity": run_activity,
    "transitions": run_transitions,
    "concentration": run_concentration,
}


def run_all(ws: Workspace, bundle: ReportBundle) -> None:
    for runner in RUNNERS.values():
        runner(ws, bundle)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        ws = load_workspace(config)
        bundle = ReportBundle(config.out, config.periods)
        if args.command == "all":
            run_all(ws, bundle)
        else:
            RUNNERS[args.command](ws, bundle)
        digest = bundle.finalize()
        print(f"wrote {len(bundle._entries)} report files to {config.out} manifest sha256={digest}")
        return EXIT_OK
    except CliError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error[{EXIT_MISSING_INPUT}]: missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except DegenerateSeriesError as exc:
        print(f"error[{EXIT_DEGENERATE}]: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (IngestError, GraphBuildError, SnapshotError) as exc:
        print(f"error[{EXIT_BAD_DATA}]: {exc}", file=sys.stderr)
        return EXIT_BAD_DATA
    except ValueError as exc:
        print(f"error[{EXIT_INVALID_CONFIG}]: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG


if __name__ == "__main__":
    sys.exit(main())
