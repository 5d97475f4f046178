from __future__ import annotations

import json
import hashlib
from decimal import Decimal
from pathlib import Path

import pytest

from tokengraph import (
    CRASH_MARKERS,
    DegreeHistogram,
    LayerMetrics,
    MetricSeries,
    ReportBundle,
    TimeWindow,
    default_periods,
)
from tokengraph.flows import ActivityDistribution, ConcentrationReport, SellerShare, TransitionMatrix
from tokengraph.report import render
from tokengraph.series import CorrelationMatrix


def metrics_row(**overrides) -> LayerMetrics:
    base = dict(
        nodes=3,
        unique_edges=2,
        transactions=5,
        token_volume=Decimal("12.5"),
        usd_volume=Decimal("99.25"),
        usd_skipped=1,
        active_out=2,
        active_in=2,
        sources=1,
        sinks=1,
        reciprocity=0.5,
        avg_degree=1.5,
        density=1 / 3,
        clustering=0.0,
        largest_wcc_fraction=1.0,
    )
    base.update(overrides)
    return LayerMetrics(**base)


def sample_series(label="full_graph"):
    return MetricSeries("transactions", label, (0, 86_400), (3.0, 7.0))


class TestRender:
    def test_decimals_never_scientific(self):
        assert render(Decimal("1E+20")) == "100000000000000000000"
        assert render(Decimal("1E-20")) == "0.00000000000000000001"
        assert render(Decimal((0, (1, 2, 3), 70))) == "123" + "0" * 70
        assert "E" not in render(Decimal(2) ** 256 / Decimal(10) ** 30)

    def test_floats_round_trip(self):
        for value in (0.1, 1 / 3, 1e-12, 123456.789):
            assert float(render(value)) == value

    def test_none_is_empty(self):
        assert render(None) == ""

    def test_bools_are_lowercase(self):
        assert render(True) == "true" and render(False) == "false"


class TestBundle:
    def test_rerun_is_byte_identical(self, tmp_path):
        def produce(directory: Path) -> str:
            bundle = ReportBundle(str(directory), default_periods())
            bundle.write_series("s", [sample_series()], {"width": 86_400})
            bundle.write_table("t", [("full_graph", metrics_row())])
            return bundle.finalize()

        d1, d2 = tmp_path / "one", tmp_path / "two"
        digest1, digest2 = produce(d1), produce(d2)
        assert digest1 == digest2
        files1 = sorted(p.name for p in d1.iterdir())
        assert files1 == sorted(p.name for p in d2.iterdir())
        for name in files1:
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_manifest_lists_every_file_with_true_digests(self, tmp_path):
        bundle = ReportBundle(str(tmp_path), default_periods())
        bundle.write_series("s", [sample_series()])
        bundle.write_json("extra", {"k": 1})
        bundle.finalize()
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        paths = [e["path"] for e in manifest["entries"]]
        assert paths == sorted(paths)
        assert set(paths) == {"s.csv", "s.annotations.json", "extra.json"}
        for entry in manifest["entries"]:
            data = (tmp_path / entry["path"]).read_bytes()
            assert hashlib.sha256(data).hexdigest() == entry["sha256"]

    def test_duplicate_path_rejected(self, tmp_path):
        bundle = ReportBundle(str(tmp_path))
        bundle.write_json("x", {})
        with pytest.raises(ValueError):
            bundle.write_json("x", {})

    def test_no_timestamps_anywhere(self, tmp_path):
        bundle = ReportBundle(str(tmp_path), default_periods())
        bundle.write_table("t", [("full_graph", metrics_row())])
        bundle.finalize()
        manifest = (tmp_path / "manifest.json").read_text()
        assert "generated_at" not in manifest and str(tmp_path) not in manifest


class TestSeriesFile:
    def test_unix_and_iso_columns(self, tmp_path):
        bundle = ReportBundle(str(tmp_path), default_periods())
        bundle.write_series("s", [sample_series(), sample_series("USTC")])
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "window_start_unix,window_start_iso,full_graph,USTC"
        assert lines[1] == "0,1970-01-01T00:00:00Z,3.0,3.0"
        assert len(lines) == 3

    def test_annotations_carry_markers_and_exclusion(self, tmp_path):
        bundle = ReportBundle(str(tmp_path), default_periods())
        bundle.write_series("s", [sample_series()])
        payload = json.loads((tmp_path / "s.annotations.json").read_text())
        names = {m["name"] for m in payload["markers"]}
        assert names == {"S1", "S2", "C", "T2"}
        for marker in payload["markers"]:
            assert marker["unix"] == CRASH_MARKERS[marker["name"]]
            assert marker["iso"].endswith("T00:00:00Z")
        exclusion = payload["exclusion"]
        assert exclusion["start_iso"] == "2022-05-02T00:00:00Z"
        assert exclusion["end_iso"] == "2022-05-17T00:00:00Z"

    def test_mismatched_windows_rejected(self, tmp_path):
        bundle = ReportBundle(str(tmp_path))
        other = MetricSeries("transactions", "x", (5,), (1.0,))
        with pytest.raises(ValueError):
            bundle.write_series("s", [sample_series(), other])


class TestTableAndMatrixFiles:
    def test_table_row_shape(self, tmp_path):
        bundle = ReportBundle(str(tmp_path))
        bundle.write_table(
            "t", [("full_graph", metrics_row()), ("USTC", metrics_row(usd_volume=None))]
        )
        lines = (tmp_path / "t.csv").read_text().splitlines()
        assert lines[0].startswith("label,nodes,unique_edges,transactions,token_volume")
        assert lines[1].split(",")[0] == "full_graph"
        assert lines[1].split(",")[4] == "12.5"
        assert lines[2].split(",")[5] == ""      # absent usd stays blank

    def test_matrix_and_lags(self, tmp_path):
        bundle = ReportBundle(str(tmp_path))
        matrix = CorrelationMatrix(
            labels=("A", "B"),
            rhos=((1.0, 0.25), (0.25, 1.0)),
            best_lags=((0, -3), (3, 0)),
        )
        bundle.write_matrix("m", matrix)
        lines = (tmp_path / "m.csv").read_text().splitlines()
        assert lines == ["label,A,B", "A,1.0,0.25", "B,0.25,1.0"]
        lag_lines = (tmp_path / "m.lags.csv").read_text().splitlines()
        assert lag_lines == ["label,A,B", "A,0,-3", "B,3,0"]

    def test_quoting_is_rfc4180(self, tmp_path):
        bundle = ReportBundle(str(tmp_path))
        bundle.write_recurrent("r", [('wall,et "q"', 2)])
        text = (tmp_path / "r.csv").read_text()
        assert '"wall,et ""q"""' in text


class TestFlowFiles:
    def test_concentration_rows(self, tmp_path):
        bundle = ReportBundle(str(tmp_path))
        active = ConcentrationReport(
            window=TimeWindow(0, 86_400),
            ticker="USTC",
            top=(SellerShare("0xaaa", Decimal(60), Decimal("0.6")),),
            tail_share=Decimal("0.4"),
            tail_wallets=3,
            total_tokens=Decimal(100),
        )
        idle = ConcentrationReport(
            window=TimeWindow(86_400, 2 * 86_400),
            ticker="USTC",
            top=(),
            tail_share=Decimal(0),
            tail_wallets=0,
            total_tokens=Decimal(0),
        )
        bundle.write_concentration("c", [active, idle])
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[1] == "0,1970-01-01T00:00:00Z,USTC,1,0xaaa,60,0.6"
        assert lines[2] == "0,1970-01-01T00:00:00Z,USTC,tail,3 wallets,40,0.4"
        assert lines[3].endswith("USTC,none,,0,0")

    def test_activity_table(self, tmp_path):
        bundle = ReportBundle(str(tmp_path))
        bundle.write_activity_table(
            "a", [("pre", ActivityDistribution((8, 2)))]
        )
        lines = (tmp_path / "a.csv").read_text().splitlines()
        assert lines[0] == "label,total_users,users_1,users_2,share_1,share_2"
        assert lines[1] == "pre,10,8,2,0.8,0.2"

    def test_transitions_file(self, tmp_path):
        bundle = ReportBundle(str(tmp_path))
        matrix = TransitionMatrix(("A", "B", "inactive"), ((1, 0, 2), (0, 0, 0), (0, 0, 0)), 3)
        bundle.write_transitions("tr", matrix)
        lines = (tmp_path / "tr.csv").read_text().splitlines()
        assert lines[0] == "label,A,B,inactive"
        assert lines[1] == "A,1,0,2"

    def test_degree_histogram_files(self, tmp_path):
        bundle = ReportBundle(str(tmp_path))
        bundle.write_degree_histogram("d", DegreeHistogram((1, 2, 4), (5, 3, 2)))
        lines = (tmp_path / "d.csv").read_text().splitlines()
        assert lines[0] == "degree,count,probability"
        assert lines[1] == "1,5,0.5"
        bins = (tmp_path / "d.logbins.csv").read_text().splitlines()
        assert bins[0] == "bin_lo,bin_hi,count,density"
        assert len(bins) >= 3
