export const HEADER =
  "scheme,param,value,rep,seed,mean_err_norm,mean_err_m,std_err_norm," +
  "n_unknown,n_sink,comm_range,flags";

const SCHEMES = ["centralized", "diffusion", "bounding_box", "hybrid"];

/** Build sweep CSV text in the simulator's format: one row per
 *  (value, rep, scheme), deterministic fake errors. */
export function makeCsv(param: string, values: number[], reps: number): string {
  const lines = [HEADER];
  values.forEach((value, vi) => {
    for (let rep = 0; rep < reps; rep++) {
      SCHEMES.forEach((scheme, si) => {
        const err = 0.5 / (vi + 1) + 0.07 * si + 0.01 * rep;
        lines.push(
          [
            scheme,
            param,
            value,
            rep,
            1000 + vi * 100 + rep,
            err.toPrecision(6),
            (err * 30).toPrecision(6),
            "0.05",
            "76",
            "9",
            "30",
            "uncovered=0;contradictions=0;orphaned=0",
          ].join(","),
        );
      });
    }
  });
  return lines.join("\n") + "\n";
}
