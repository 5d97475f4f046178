import { describe, expect, it } from "vitest";

import {
  SchemaError,
  dateToUnix,
  readActivitySeries,
  readAnnotations,
  readConcentration,
  readDegreeHistogram,
  readLogBins,
  readMatrix,
  readPrices,
  readSeries,
} from "../src/schema.js";
import { fx, tempFile } from "./helpers.js";

describe("series reader", () => {
  it("parses the wide metric table", () => {
    const table = readSeries(fx("series_transactions.csv"));
    expect(table.labels).toEqual(["full_graph", "USDC", "DAI", "USDT", "USTC", "WLUNC", "USDP"]);
    expect(table.starts.length).toBe(76);
    expect(table.starts[0]).toBe(1648771200);
    expect(table.isoStarts[0]).toBe("2022-04-01T00:00:00Z");
    expect(table.values.length).toBe(7);
    expect(table.values[0]![0]).toBe(107.0);
  });

  it("keeps blank cells as null", () => {
    const path = tempFile(
      "window_start_unix,window_start_iso,a\n0,1970-01-01T00:00:00Z,\n86400,1970-01-02T00:00:00Z,3.5\n",
    );
    const table = readSeries(path);
    expect(table.values[0]).toEqual([null, 3.5]);
  });

  it("points at the offending line for a bad number", () => {
    const path = tempFile(
      "window_start_unix,window_start_iso,a\n0,1970-01-01T00:00:00Z,1\nnope,1970-01-02T00:00:00Z,2\n",
    );
    try {
      readSeries(path);
      expect.unreachable();
    } catch (error) {
      expect(error).toBeInstanceOf(SchemaError);
      expect((error as SchemaError).line).toBe(3);
      expect((error as SchemaError).message).toContain(`${path}:3:`);
    }
  });

  it("rejects files without the window columns", () => {
    const path = tempFile("time,a\n0,1\n");
    expect(() => readSeries(path)).toThrow(/missing column/);
  });

  it("rejects ragged rows", () => {
    const path = tempFile("window_start_unix,window_start_iso,a\n0,1970-01-01T00:00:00Z\n");
    expect(() => readSeries(path)).toThrow(/expected 3 cells/);
  });
});

describe("annotations reader", () => {
  it("parses markers and the exclusion zone", () => {
    const annotations = readAnnotations(fx("series_transactions.annotations.json"));
    expect(annotations.markers.map((m) => m.name)).toEqual(["S1", "S2", "C", "T2"]);
    const c = annotations.markers.find((m) => m.name === "C")!;
    expect(c.unix).toBe(1652054400);
    expect(c.iso).toBe("2022-05-09T00:00:00Z");
    expect(annotations.exclusion).toBeDefined();
    expect(annotations.exclusion!.startIso).toBe("2022-05-02T00:00:00Z");
    expect(annotations.exclusion!.endUnix).toBe(1652745600);
  });

  it("rejects non-JSON", () => {
    const path = tempFile("{not json", "a.json");
    expect(() => readAnnotations(path)).toThrow(/invalid JSON/);
  });

  it("rejects a malformed marker", () => {
    const path = tempFile('{"markers": [{"name": 5}]}', "a.json");
    expect(() => readAnnotations(path)).toThrow(/marker 0/);
  });
});

describe("matrix reader", () => {
  it("parses a 6x6 correlation grid with unit diagonal", () => {
    const matrix = readMatrix(fx("correlation_transactions_pre.csv"));
    expect(matrix.labels.length).toBe(6);
    for (let i = 0; i < 6; i++) {
      expect(matrix.values[i]![i]).toBe(1.0);
      for (let j = 0; j < 6; j++) {
        expect(matrix.values[i]![j]).toBe(matrix.values[j]![i]);
      }
    }
  });

  it("parses integer transition counts", () => {
    const matrix = readMatrix(fx("favorite_transitions_USTC.csv"));
    expect(matrix.labels[matrix.labels.length - 1]).toBe("inactive");
    const total = matrix.values.flat().reduce((a, b) => a + b, 0);
    expect(total).toBeGreaterThan(0);
  });

  it("rejects a non-square file", () => {
    const path = tempFile("label,a,b\na,1,0\n");
    expect(() => readMatrix(path)).toThrow(/expected 2 rows/);
  });

  it("rejects mismatched row labels", () => {
    const path = tempFile("label,a,b\na,1,0\nc,0,1\n");
    try {
      readMatrix(path);
      expect.unreachable();
    } catch (error) {
      expect((error as SchemaError).line).toBe(3);
    }
  });
});

describe("degree and bin readers", () => {
  it("reads histogram rows with probabilities summing to one", () => {
    const histogram = readDegreeHistogram(fx("degree_pre_full_graph.csv"));
    const sum = histogram.probabilities.reduce((a, b) => a + b, 0);
    expect(sum).toBeCloseTo(1.0, 9);
    expect(histogram.degrees.length).toBe(histogram.counts.length);
  });

  it("reads log bins with counts matching the histogram", () => {
    const histogram = readDegreeHistogram(fx("degree_pre_full_graph.csv"));
    const bins = readLogBins(fx("degree_pre_full_graph.logbins.csv"));
    const histogramTotal = histogram.counts.reduce((a, b) => a + b, 0);
    const binTotal = bins.counts.reduce((a, b) => a + b, 0);
    expect(binTotal).toBe(histogramTotal);
  });
});

describe("activity reader", () => {
  it("parses layers_1..layers_6 columns", () => {
    const table = readActivitySeries(fx("layer_activity_daily.csv"));
    expect(table.layerLabels).toEqual([
      "layers_1",
      "layers_2",
      "layers_3",
      "layers_4",
      "layers_5",
      "layers_6",
    ]);
    expect(table.counts.length).toBe(table.starts.length);
  });

  it("rejects out-of-order layer columns", () => {
    const path = tempFile("window_start_unix,window_start_iso,layers_2\n0,x,1\n");
    expect(() => readActivitySeries(path)).toThrow(/expected column layers_1/);
  });
});

describe("concentration reader", () => {
  it("groups rows by window and keeps rank order", () => {
    const windows = readConcentration(fx("seller_concentration_USTC.csv"));
    expect(windows.length).toBe(5);
    for (const window of windows) {
      expect(window.ticker).toBe("USTC");
      const ranks = window.entries
        .map((e) => e.rank)
        .filter((r): r is number => typeof r === "number");
      expect(ranks).toEqual(ranks.map((_, i) => i + 1));
      expect(window.entries[window.entries.length - 1]!.rank).toBe("tail");
      const shareSum = window.entries.reduce((a, e) => a + e.share, 0);
      expect(shareSum).toBeCloseTo(1.0, 9);
    }
  });
});

describe("price reader", () => {
  it("parses the wide close table with gaps", () => {
    const prices = readPrices(fx("prices_close.csv"));
    expect(prices.tickers).toEqual(["USDC", "DAI", "USDT", "USTC", "WLUNC", "USDP"]);
    expect(prices.dates[0]).toBe("2022-04-01");
    const wlunc = prices.closes[prices.tickers.indexOf("WLUNC")]!;
    expect(wlunc.some((v) => v === null)).toBe(true);
  });

  it("rejects a bad date", () => {
    const path = tempFile("date,a\n2022/04/01,1\n");
    expect(() => readPrices(path)).toThrow(/bad date/);
  });

  it("maps dates to UTC midnight", () => {
    expect(dateToUnix("1970-01-02")).toBe(86400);
    expect(dateToUnix("2022-05-09")).toBe(1652054400);
  });
});
