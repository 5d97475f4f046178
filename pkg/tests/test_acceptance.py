"""End-to-end acceptance checks.

Each test here encodes one promised behaviour of the package as a whole:
metric agreement with independent oracles on randomized inputs, exact
window semantics, correlation recovery of planted lags, novelty
conservation, planted-whale detection, reference values on the real
dataset (skipped unless the dataset is present), and bit-identical
output regardless of thread count.
"""
from __future__ import annotations

import math
import os
import random
import time
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fixturegen
import oracles
from tokengraph import (
    LayerInfo,
    LayerRegistry,
    PriceSeries,
    TemporalMultilayerGraph,
    TimeWindow,
    TransferEvent,
    avg_degree,
    census,
    clustering,
    correlation_matrix,
    cross_correlation,
    default_periods,
    degree_distribution,
    density,
    extract_series,
    largest_wcc_fraction,
    load_registry,
    load_transfers,
    new_edge_series,
    period_layer_activity,
    reciprocity,
    recurrent_top_sellers,
    rolling_windows,
    seller_concentration,
    transactions,
    unique_edges,
    usd_volume,
)
from tokengraph.cli import main
from tokengraph.timeutil import DAY, date_from_ts, parse_date

DATASET_ENV = "TOKENGRAPH_DATASET_TRANSFERS"
DATASET_REGISTRY_ENV = "TOKENGRAPH_DATASET_REGISTRY"


# ---------------------------------------------------------------- metrics


def _random_fixture(rng: random.Random):
    """Graph of <=200 nodes, <=2000 events, <=3 layers, plus spotty prices."""
    num_layers = rng.randint(1, 3)
    registry = LayerRegistry(
        [
            LayerInfo(f"0x{i:040x}", f"T{i}", rng.choice((0, 6, 18)))
            for i in range(1, num_layers + 1)
        ]
    )
    pool = rng.randint(2, 200)
    span = rng.randint(1, 4) * DAY
    count = rng.randint(1, 2000)
    raw = []
    for _ in range(count):
        u = rng.randrange(pool)
        v = u if rng.random() < 0.05 else rng.randrange(pool)
        layer = rng.randrange(num_layers)
        ts = rng.randrange(span)
        units = rng.randint(1, 10**12)
        raw.append((u, v, ts, units, layer))
    raw.sort(key=lambda r: r[2])
    events = [
        TransferEvent(f"w{u}", f"w{v}", ts, Decimal(units) / (10 ** registry.decimals(layer)), layer)
        for u, v, ts, units, layer in raw
    ]
    # amounts via exact division by a power of ten: safe at this size,
    # and independently recomputed below with Fractions anyway
    graph = TemporalMultilayerGraph.build(events, registry)
    prices = PriceSeries()
    closes: dict[tuple[str, object], Fraction] = {}
    for layer in range(num_layers):
        ticker = registry.ticker(layer)
        for day_index in range(span // DAY + 1):
            if rng.random() < 0.85:
                close = Decimal(rng.randint(1, 5_000)) / 100
                day = date_from_ts(day_index * DAY)
                prices.add(ticker, day, close)
                closes[(ticker, day)] = Fraction(close)
    if rng.random() < 0.5:
        window = TimeWindow(0, span)
    else:
        a = rng.randrange(span)
        b = rng.randrange(a + 1, span + 1)
        window = TimeWindow(a, b)
    return graph, registry, prices, closes, raw, window


def _check_against_oracles(graph, registry, prices, closes, raw, window, layer):
    view = graph.window(window)
    in_window = [r for r in raw if window.start <= r[2] < window.end]
    if layer is not None:
        in_window = [r for r in in_window if r[4] == layer]
    pairs = [(u, v) for u, v, _, _, _ in in_window]

    assert census(view, layer) == oracles.census(pairs)
    assert unique_edges(view, layer) == oracles.unique_edges(pairs)
    assert transactions(view, layer) == len(in_window)
    assert math.isclose(reciprocity(view, layer), oracles.reciprocity(pairs), abs_tol=1e-9)
    assert math.isclose(avg_degree(view, layer), oracles.avg_degree(pairs), abs_tol=1e-9)
    assert math.isclose(density(view, layer), oracles.density(pairs), abs_tol=1e-9)
    assert math.isclose(
        clustering(view, layer), oracles.clustering_local_mean(pairs), abs_tol=1e-9
    )
    assert math.isclose(
        clustering(view, layer, transitivity=True), oracles.transitivity(pairs), abs_tol=1e-9
    )
    assert math.isclose(
        largest_wcc_fraction(view, layer), oracles.wcc_fraction(pairs), abs_tol=1e-9
    )
    hist = degree_distribution(view, layer)
    assert dict(zip(hist.degrees, hist.counts)) == oracles.degree_histogram(pairs)

    rows = [
        (Fraction(Decimal(units)) / 10 ** registry.decimals(lay), registry.ticker(lay),
         date_from_ts(ts))
        for _, _, ts, units, lay in in_window
    ]
    expected_total, expected_priced, expected_skipped = oracles.usd_total(rows, closes)
    got = usd_volume(view, prices, layer)
    assert Fraction(got.total) == expected_total
    assert (got.priced_events, got.skipped_events) == (expected_priced, expected_skipped)


def test_metrics_match_oracles_on_randomized_graphs():
    rng = random.Random(0xA1)
    started = time.perf_counter()
    for trial in range(100):
        graph, registry, prices, closes, raw, window = _random_fixture(rng)
        _check_against_oracles(graph, registry, prices, closes, raw, window, None)
        if len(registry) > 1 and trial % 3 == 0:
            layer = rng.randrange(len(registry))
            _check_against_oracles(graph, registry, prices, closes, raw, window, layer)
    assert time.perf_counter() - started < 60.0


# ---------------------------------------------------------------- windows


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.integers(0, 999), min_size=1, max_size=80),
    st.integers(0, 999),
    st.integers(1, 400),
)
def test_window_membership_is_half_open(timestamps, start, duration):
    timestamps.sort()
    registry = LayerRegistry([LayerInfo("0x01", "T", 0)])
    events = [TransferEvent("a", "b", ts, Decimal(1), 0) for ts in timestamps]
    graph = TemporalMultilayerGraph.build(events, registry)
    window = TimeWindow(start, start + duration)
    expected = sum(1 for ts in timestamps if start <= ts < start + duration)
    assert graph.window(window).event_count == expected


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.integers(0, 999), min_size=1, max_size=80),
    st.integers(1, 300),
)
def test_tumbling_windows_count_every_event_once(timestamps, width):
    timestamps.sort()
    registry = LayerRegistry([LayerInfo("0x01", "T", 0)])
    events = [TransferEvent("a", "b", ts, Decimal(1), 0) for ts in timestamps]
    graph = TemporalMultilayerGraph.build(events, registry)
    windows = rolling_windows(graph.span, width, width)
    counted = sum(graph.window(w).event_count for w in windows)
    assert counted == len(timestamps)
    # adjacent windows tile without gap or overlap
    for left, right in zip(windows, windows[1:]):
        assert left.end == right.start


# ------------------------------------------------------------ correlation


def test_correlation_identity_and_sign_flip():
    rng = random.Random(7)
    x = [rng.uniform(-5, 5) for _ in range(60)]
    same = cross_correlation(x, x, max_lag=10)
    assert abs(same.rho(0) - 1.0) <= 1e-9
    assert same.best_lag == 0
    flipped = cross_correlation(x, [-v for v in x], max_lag=10)
    assert abs(flipped.rho(0) + 1.0) <= 1e-9


@pytest.mark.parametrize("shift", [1, 3, 7])
def test_correlation_recovers_planted_shift(shift):
    rng = random.Random(100 + shift)
    base = [rng.uniform(0, 10) for _ in range(60 + shift)]
    x = base[shift:]           # length 60
    y = base[: len(base) - shift]  # y[t] == x[t - shift]
    assert len(x) == len(y) == 60
    cc = cross_correlation(x, y, max_lag=10)
    assert cc.best_lag == shift
    assert abs(cc.best_rho - 1.0) <= 1e-9


# ---------------------------------------------------------------- novelty


@pytest.mark.parametrize("tau_days", [1, 7, 14])
def test_novelty_buckets_conserve_totals(loaded, tau_days):
    graph, _, _, _ = loaded
    novelty = new_edge_series(graph, width=tau_days * DAY, window_range=default_periods().span)
    assert sum(novelty.new_edges) == len(graph.first_seen_pair)
    assert sum(novelty.new_nodes) == graph.num_nodes


@pytest.mark.parametrize("tau_days", [1, 7, 14])
def test_novelty_conservation_on_randomized_graphs(tau_days):
    rng = random.Random(0xA4 * tau_days)
    registry = LayerRegistry(
        [LayerInfo("0x01", "A", 0), LayerInfo("0x02", "B", 0)]
    )
    for _ in range(25):
        span = rng.randint(1, 40) * DAY
        raw = sorted(
            (
                rng.randrange(30),
                rng.randrange(30),
                rng.randrange(span),
                rng.randrange(2),
            )
            for _ in range(rng.randint(1, 400))
        )
        raw.sort(key=lambda r: r[2])
        events = [
            TransferEvent(f"w{u}", f"w{v}", ts, Decimal(1), layer)
            for u, v, ts, layer in raw
        ]
        graph = TemporalMultilayerGraph.build(events, registry)
        novelty = new_edge_series(graph, width=tau_days * DAY)
        assert sum(novelty.new_edges) == len({(u, v) for u, v, _, _ in raw})
        assert sum(novelty.new_nodes) == len({w for u, v, _, _ in raw for w in (u, v)})


# ----------------------------------------------------------------- whales


def _outflow_by_seller(dataset, day):
    """Raw-unit tally straight from the CSV text; shares are scale-free."""
    import csv
    import io

    contract = fixturegen.contract(fixturegen.WHALE_LAYER)
    start = fixturegen.day_start(day)
    sold: dict[str, int] = {}
    for row in csv.DictReader(io.StringIO(dataset.transfers_csv)):
        if row["contract_address"] != contract or row["from_address"] == fixturegen.ZERO:
            continue
        ts = int(row["time_stamp"])
        if start <= ts < start + 86_400:
            sold[row["from_address"]] = sold.get(row["from_address"], 0) + int(row["value"])
    return sold


def test_planted_whale_dominates_only_its_days(loaded, dataset):
    graph, registry, _, _ = loaded
    layer = registry.layer_of_ticker("USTC")
    for day in fixturegen.WHALE_DAYS:
        report = seller_concentration(graph, TimeWindow.day(day), layer, top_k=10)
        assert report.top[0].wallet == dataset.whale
        assert report.top[0].share >= Decimal("0.95")
        sold = _outflow_by_seller(dataset, day)
        total = sum(sold.values())
        for seller in report.top:
            expected = Fraction(sold[seller.wallet], total)
            assert abs(Fraction(seller.share) - expected) <= Fraction(1, 10**9)
        expected_tail = 1 - sum(Fraction(sold[s.wallet], total) for s in report.top)
        assert abs(Fraction(report.tail_share) - expected_tail) <= Fraction(1, 10**9)
    for day in fixturegen.CONTROL_DAYS:
        report = seller_concentration(graph, TimeWindow.day(day), layer, top_k=10)
        assert not report.no_activity
        assert report.top[0].share < Decimal("0.5")


def test_recurrent_sellers_on_planted_days_is_exactly_the_whale(loaded, dataset):
    graph, registry, _, _ = loaded
    layer = registry.layer_of_ticker("USTC")
    reports = [
        seller_concentration(graph, TimeWindow.day(day), layer, top_k=1)
        for day in fixturegen.WHALE_DAYS
    ]
    assert recurrent_top_sellers(reports) == [(dataset.whale, 2)]


# ------------------------------------------------------------ determinism


def test_thread_count_never_changes_the_bundle(dataset_dir, tmp_path, capsys):
    digests = []
    for threads in (1, 8):
        out = tmp_path / f"threads_{threads}"
        args = [
            "all",
            "--transfers", str(dataset_dir["transfers"]),
            "--registry", str(dataset_dir["registry"]),
            "--prices", str(dataset_dir["prices"]),
            "--out", str(out),
            "--threads", str(threads),
        ]
        assert main(args) == 0
        digests.append((out / "manifest.json").read_bytes())
    assert digests[0] == digests[1]
    capsys.readouterr()


def test_every_subcommand_finishes_fast(dataset_dir, tmp_path, capsys):
    for command in ("stats", "series", "correlate", "novelty", "activity",
                    "transitions", "concentration", "all"):
        started = time.perf_counter()
        args = [
            command,
            "--transfers", str(dataset_dir["transfers"]),
            "--registry", str(dataset_dir["registry"]),
            "--prices", str(dataset_dir["prices"]),
            "--out", str(tmp_path / command),
        ]
        assert main(args) == 0
        assert time.perf_counter() - started < 5.0, command
    capsys.readouterr()


# ----------------------------------------------------- reference dataset


requires_dataset = pytest.mark.skipif(
    DATASET_ENV not in os.environ,
    reason=f"set {DATASET_ENV} to the transfer CSV to run reference checks",
)


@pytest.fixture(scope="module")
def reference():
    registry_path = os.environ.get(
        DATASET_REGISTRY_ENV,
        os.path.join(os.path.dirname(__file__), "..", "data", "registry_mainnet.csv"),
    )
    registry = load_registry(registry_path)
    events, _ = load_transfers(
        os.environ[DATASET_ENV], registry, bounds=default_periods().span
    )
    return TemporalMultilayerGraph.build(events, registry), registry


@requires_dataset
def test_reference_structure_counts(reference):
    graph, registry = reference
    view = graph.window(default_periods().span)
    assert census(view).nodes == 2_908_261
    assert unique_edges(view) == 5_963_549
    assert transactions(view) == 26_209_860
    usdp = registry.layer_of_ticker("USDP")
    assert census(view, usdp).nodes == 6_163
    assert unique_edges(view, usdp) == 9_115
    assert transactions(view, usdp) == 60_082


@requires_dataset
def test_reference_layer_activity(reference):
    graph, _ = reference
    periods = default_periods()
    full = period_layer_activity(graph, periods.span)
    assert full.counts[5] == 56
    pre = period_layer_activity(graph, periods.pre)
    assert pre.counts[0] == 1_201_638


@requires_dataset
def test_reference_precrash_transaction_correlations(reference):
    graph, registry = reference
    pre = default_periods().pre
    series_list = [
        extract_series(graph, "transactions", DAY, DAY, pre, layer)
        for layer in range(len(registry))
    ]
    matrix = correlation_matrix(series_list)
    for i in range(len(registry)):
        for j in range(len(registry)):
            assert matrix.rhos[i][j] >= 0.9


@requires_dataset
def test_reference_whale_days(reference):
    graph, registry = reference
    layer = registry.layer_of_ticker("USTC")

    def top10_share(day_text):
        report = seller_concentration(
            graph, TimeWindow.day(parse_date(day_text)), layer, top_k=10
        )
        return sum(s.share for s in report.top)

    for day in ("2022-04-03", "2022-04-19"):
        assert top10_share(day) >= Decimal("0.95")
    for day in ("2022-04-02", "2022-04-11", "2022-05-01"):
        assert top10_share(day) <= Decimal("0.75")
