"""Windowed analytics over temporal multilayer token-transfer graphs."""

from .decimalutil import shift_point
from .flows import (
    ZERO_ADDRESS,
    ActivityDistribution,
    ActivitySeries,
    ConcentrationReport,
    NoveltySeries,
    TransitionMatrix,
    favorite_layer,
    favorite_transitions,
    layer_activity_series,
    new_edge_series,
    period_layer_activity,
    recurrent_top_sellers,
    seller_concentration,
)
from .graph import (
    CRASH_MARKERS,
    Event,
    GraphBuildError,
    PeriodConfig,
    SnapshotError,
    TemporalMultilayerGraph,
    WindowView,
    default_periods,
    degree,
    first_seen_edge,
    node_balance,
    read_snapshot,
    rolling_windows,
    write_snapshot,
)
from .ingest import (
    IngestError,
    IngestStats,
    LayerInfo,
    LayerRegistry,
    PriceSeries,
    TransferEvent,
    load_prices,
    load_registry,
    load_transfers,
    normalize_price_series,
)
from .metrics import (
    Census,
    DegreeHistogram,
    LayerMetrics,
    UsdVolume,
    avg_degree,
    census,
    clustering,
    degree_distribution,
    density,
    largest_wcc_fraction,
    layer_metrics,
    reciprocity,
    token_volume,
    transactions,
    unique_edges,
    usd_volume,
)
from .report import ReportBundle
from .series import (
    SERIES_METRICS,
    CorrelationMatrix,
    CrossCorrelation,
    DegenerateSeriesError,
    MetricSeries,
    correlation_matrix,
    cross_correlation,
    extract_series,
)
from .timeutil import DAY, HOUR, WEEK, TimeWindow

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
