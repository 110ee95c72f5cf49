#!/usr/bin/env node
import yargs from "yargs";

import { FilterError } from "./aggregate.js";
import { SchemaError } from "./csv.js";
import { renderPlot } from "./plot.js";

export async function runCli(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .usage("plot --in <csv> --out <svg> --param <name> [--y norm|m] [--schemes a,b,c]")
    .option("in", { type: "string", demandOption: true, describe: "sweep CSV from the simulator" })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .option("param", {
      choices: ["sink_count", "comm_range", "node_count"] as const,
      demandOption: true,
      describe: "swept parameter the CSV holds",
    })
    .option("y", {
      choices: ["norm", "m"] as const,
      default: "norm" as const,
      describe: "y axis: normalized error or meters",
    })
    .option("schemes", { type: "string", describe: "comma-separated scheme filter" })
    .strict()
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    })
    .parse();

  const schemes = args.schemes
    ?.split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0);

  try {
    const result = renderPlot({
      input: args.in,
      output: args.out,
      param: args.param,
      y: args.y,
      schemes,
    });
    const names = result.series.map((s) => s.scheme).join(", ");
    console.error(`wrote ${args.out} (${result.series.length} series: ${names})`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof FilterError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && (err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: cannot read ${args.in}: no such file`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  runCli(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (err) => {
      console.error(`error: ${err instanceof Error ? err.message : err}`);
      process.exit(2);
    },
  );
}
