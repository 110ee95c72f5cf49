import Papa from "papaparse";

/** Exact header contract of the simulator's sweep CSV. */
export const CSV_COLUMNS = [
  "scheme",
  "param",
  "value",
  "rep",
  "seed",
  "mean_err_norm",
  "mean_err_m",
  "std_err_norm",
  "n_unknown",
  "n_sink",
  "comm_range",
  "flags",
] as const;

export interface SweepRow {
  scheme: string;
  param: string;
  value: number;
  rep: number;
  mean_err_norm: number;
  mean_err_m: number;
  flags: string;
}

export class SchemaError extends Error {}

/** Parse sweep CSV text, checking the column contract before anything else.
 *  Missing columns are reported by name so a producer/consumer version skew
 *  is immediately visible. */
export function parseSweepCsv(text: string): SweepRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  const missing = CSV_COLUMNS.filter((c) => !fields.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(`CSV is missing required column(s): ${missing.join(", ")}`);
  }
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`CSV parse error at row ${e.row}: ${e.message}`);
  }
  return parsed.data.map((raw) => ({
    scheme: raw.scheme,
    param: raw.param,
    value: Number(raw.value),
    rep: Number(raw.rep),
    mean_err_norm: Number(raw.mean_err_norm),
    mean_err_m: Number(raw.mean_err_m),
    flags: raw.flags,
  }));
}
