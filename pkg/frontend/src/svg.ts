import { Series } from "./aggregate.js";
import { YAxis } from "./aggregate.js";

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { left: 72, right: 20, top: 44, bottom: 58 };

const COLORS: Record<string, string> = {
  centralized: "#1f77b4",
  diffusion: "#ff7f0e",
  bounding_box: "#2ca02c",
  hybrid: "#d62728",
};
const FALLBACK_COLORS = ["#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

const PARAM_LABELS: Record<string, string> = {
  sink_count: "sink count (nodes)",
  comm_range: "communication range (m)",
  node_count: "node count (nodes)",
};

function color(scheme: string, index: number): string {
  return COLORS[scheme] ?? FALLBACK_COLORS[index % FALLBACK_COLORS.length];
}

/** Short deterministic number format for coordinates and tick labels. */
function fmt(x: number): string {
  if (Number.isInteger(x)) return String(x);
  return parseFloat(x.toPrecision(6)).toString();
}

function niceStep(rough: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  for (const m of [1, 2, 5, 10]) {
    if (rough <= m * mag) return m * mag;
  }
  return 10 * mag;
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Render series as a line chart with a shaded +-1 std band per series.
 *  Pure string building: the same input always yields identical bytes. */
export function renderSvg(series: Series[], param: string, y: YAxis): string {
  const values = [...new Set(series.flatMap((s) => s.points.map((p) => p.value)))].sort(
    (a, b) => a - b,
  );
  const xMin = values[0];
  const xMax = values[values.length - 1];
  const xSpan = xMax - xMin || 1;
  const yMax =
    Math.max(...series.flatMap((s) => s.points.map((p) => p.mean + p.std))) || 1;
  const yTop = yMax * 1.08;

  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (v: number) => MARGIN.left + ((v - xMin) / xSpan) * innerW;
  const sy = (v: number) => MARGIN.top + innerH - (v / yTop) * innerH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  const yLabel =
    y === "norm" ? "mean normalized error (error / comm range)" : "mean error (m)";
  const xLabel = PARAM_LABELS[param] ?? param;
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">` +
      `${escapeXml(`mean localization error vs ${xLabel}`)}</text>`,
  );

  // gridlines + y ticks
  const step = niceStep(yTop / 5);
  for (let t = 0; t <= yTop + 1e-12; t += step) {
    const yy = sy(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(yy)}" x2="${WIDTH - MARGIN.right}" ` +
        `y2="${fmt(yy)}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(yy + 4)}" text-anchor="end" ` +
        `font-size="11" class="y-tick">${fmt(parseFloat(t.toPrecision(10)))}</text>`,
    );
  }

  // x ticks at the swept values themselves
  for (const v of values) {
    const xx = sx(v);
    parts.push(
      `<line x1="${fmt(xx)}" y1="${MARGIN.top + innerH}" x2="${fmt(xx)}" ` +
        `y2="${MARGIN.top + innerH + 5}" stroke="#333333" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${fmt(xx)}" y="${MARGIN.top + innerH + 20}" text-anchor="middle" ` +
        `font-size="11" class="x-tick">${fmt(v)}</text>`,
    );
  }

  // axes
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
      `y2="${MARGIN.top + innerH}" stroke="#333333" stroke-width="1.5"/>`,
  );
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + innerH}" ` +
      `x2="${WIDTH - MARGIN.right}" y2="${MARGIN.top + innerH}" ` +
      `stroke="#333333" stroke-width="1.5"/>`,
  );
  parts.push(
    `<text x="${MARGIN.left + innerW / 2}" y="${HEIGHT - 14}" text-anchor="middle" ` +
      `font-size="13" class="x-label">${escapeXml(xLabel)}</text>`,
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + innerH / 2}" text-anchor="middle" font-size="13" ` +
      `class="y-label" transform="rotate(-90 20 ${MARGIN.top + innerH / 2})">` +
      `${escapeXml(yLabel)}</text>`,
  );

  // bands first so every line stays visible on top of every band
  series.forEach((s, i) => {
    const c = color(s.scheme, i);
    const upper = s.points.map((p) => `${fmt(sx(p.value))},${fmt(sy(p.mean + p.std))}`);
    const lower = [...s.points]
      .reverse()
      .map((p) => `${fmt(sx(p.value))},${fmt(sy(Math.max(p.mean - p.std, 0)))}`);
    parts.push(
      `<polygon points="${upper.join(" ")} ${lower.join(" ")}" fill="${c}" ` +
        `fill-opacity="0.15" stroke="none" data-band="${s.scheme}"/>`,
    );
  });
  series.forEach((s, i) => {
    const c = color(s.scheme, i);
    const pts = s.points.map((p) => `${fmt(sx(p.value))},${fmt(sy(p.mean))}`);
    parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${c}" ` +
        `stroke-width="2" data-series="${s.scheme}"/>`,
    );
    for (const p of s.points) {
      parts.push(
        `<circle cx="${fmt(sx(p.value))}" cy="${fmt(sy(p.mean))}" r="3" fill="${c}"/>`,
      );
    }
  });

  // legend, top right inside the plot area
  const legendX = WIDTH - MARGIN.right - 170;
  let legendY = MARGIN.top + 10;
  parts.push(
    `<rect x="${legendX - 8}" y="${legendY - 14}" width="178" ` +
      `height="${series.length * 18 + 10}" fill="white" fill-opacity="0.85" ` +
      `stroke="#cccccc" class="legend"/>`,
  );
  series.forEach((s, i) => {
    const c = color(s.scheme, i);
    parts.push(
      `<line x1="${legendX}" y1="${legendY}" x2="${legendX + 22}" y2="${legendY}" ` +
        `stroke="${c}" stroke-width="2"/>`,
    );
    parts.push(
      `<text x="${legendX + 28}" y="${legendY + 4}" font-size="12" ` +
        `class="legend-item">${escapeXml(s.scheme)}</text>`,
    );
    legendY += 18;
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
