from __future__ import annotations

import pytest

import fixturegen
from tokengraph import (
    TemporalMultilayerGraph,
    default_periods,
    load_prices,
    load_registry,
    load_transfers,
)


@pytest.fixture(scope="session")
def dataset():
    return fixturegen.build_dataset()


@pytest.fixture(scope="session")
def dataset_dir(dataset, tmp_path_factory):
    return dataset.write(tmp_path_factory.mktemp("dataset"))


@pytest.fixture(scope="session")
def loaded(dataset_dir):
    """(graph, registry, prices, stats) over the standard synthetic dataset."""
    registry = load_registry(str(dataset_dir["registry"]))
    events, stats = load_transfers(
        str(dataset_dir["transfers"]), registry, bounds=default_periods().span
    )
    graph = TemporalMultilayerGraph.build(events, registry)
    prices = load_prices(str(dataset_dir["prices"]))
    return graph, registry, prices, stats
