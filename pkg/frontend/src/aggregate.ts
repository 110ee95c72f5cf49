import { SweepRow } from "./csv.js";

export type YAxis = "norm" | "m";

export interface SeriesPoint {
  value: number;
  mean: number;
  std: number; // across reps; 0 for a single rep
  reps: number;
}

export interface Series {
  scheme: string;
  points: SeriesPoint[]; // ascending by value
}

const SCHEME_ORDER = ["centralized", "diffusion", "bounding_box", "hybrid"];

export class FilterError extends Error {}

function schemeRank(s: string): number {
  const i = SCHEME_ORDER.indexOf(s);
  return i === -1 ? SCHEME_ORDER.length : i;
}

/** Reduce sweep rows to one (mean, std-over-reps) point per (scheme, value).
 *  Rows whose chosen metric is NaN (scheme failures) are dropped; a point
 *  with no surviving rep is dropped with it. */
export function aggregate(
  rows: SweepRow[],
  param: string,
  y: YAxis,
  schemes?: string[],
): Series[] {
  const matching = rows.filter((r) => r.param === param);
  if (matching.length === 0) {
    const present = [...new Set(rows.map((r) => r.param))].sort();
    throw new FilterError(
      `no rows with param=${param}; CSV contains param values: ${present.join(", ") || "(none)"}`,
    );
  }
  const wanted =
    schemes === undefined
      ? [...new Set(matching.map((r) => r.scheme))]
      : schemes;
  const filtered = matching.filter((r) => wanted.includes(r.scheme));
  if (filtered.length === 0) {
    const present = [...new Set(matching.map((r) => r.scheme))].sort();
    throw new FilterError(
      `scheme filter [${(schemes ?? []).join(", ")}] matches no rows; ` +
        `CSV contains schemes: ${present.join(", ")}`,
    );
  }

  const metric = (r: SweepRow) => (y === "norm" ? r.mean_err_norm : r.mean_err_m);
  const bySeries = new Map<string, Map<number, number[]>>();
  for (const r of filtered) {
    const v = metric(r);
    if (Number.isNaN(v)) continue;
    let perValue = bySeries.get(r.scheme);
    if (!perValue) bySeries.set(r.scheme, (perValue = new Map()));
    let reps = perValue.get(r.value);
    if (!reps) perValue.set(r.value, (reps = []));
    reps.push(v);
  }

  const out: Series[] = [];
  const names = [...bySeries.keys()].sort(
    (a, b) => schemeRank(a) - schemeRank(b) || a.localeCompare(b),
  );
  for (const scheme of names) {
    const perValue = bySeries.get(scheme)!;
    const points = [...perValue.entries()]
      .sort((a, b) => a[0] - b[0])
      .map(([value, reps]) => {
        const mean = reps.reduce((s, x) => s + x, 0) / reps.length;
        const variance =
          reps.reduce((s, x) => s + (x - mean) * (x - mean), 0) / reps.length;
        return { value, mean, std: Math.sqrt(variance), reps: reps.length };
      });
    if (points.length > 0) out.push({ scheme, points });
  }
  if (out.length === 0) {
    throw new FilterError("every matching row has a NaN metric; nothing to plot");
  }
  return out;
}
