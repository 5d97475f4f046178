export {
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
} from "./schema.js";
export { document, el, render, px, color, PALETTE } from "./svg.js";
export { renderSeriesPanel } from "./figures/seriesPanel.js";
export { renderPricePanel } from "./figures/pricePanel.js";
export { renderHeatmap, divergingColor } from "./figures/heatmap.js";
export { renderDegreePdf } from "./figures/degreePdf.js";
export { renderActivityLines } from "./figures/activityLines.js";
export { renderSankey } from "./figures/sankey.js";
export { renderConcentrationBars } from "./figures/concentrationBars.js";
export { run, EXIT_OK, EXIT_ERROR, EXIT_USAGE } from "./cli.js";
