import { readFileSync, writeFileSync } from "fs";

import { aggregate, Series, YAxis } from "./aggregate.js";
import { parseSweepCsv } from "./csv.js";
import { renderSvg } from "./svg.js";

export interface PlotSpec {
  input: string;
  output: string;
  param: string;
  y: YAxis;
  schemes?: string[];
}

export interface PlotResult {
  series: Series[];
  svg: string;
}

/** Read a sweep CSV, aggregate it, and write the figure. Read-only over
 *  the CSV; the SVG bytes are a pure function of (CSV, spec). */
export function renderPlot(spec: PlotSpec): PlotResult {
  const text = readFileSync(spec.input, "utf-8");
  const rows = parseSweepCsv(text);
  const series = aggregate(rows, spec.param, spec.y, spec.schemes);
  const svg = renderSvg(series, spec.param, spec.y);
  writeFileSync(spec.output, svg, "utf-8");
  return { series, svg };
}
