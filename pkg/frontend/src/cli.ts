#!/usr/bin/env node
/**
 * render --input results.csv --out figs/ --metric mean_avg_utility
 *
 * Exit codes: 0 written, 1 unreadable or schema-invalid input, 2 bad usage.
 */
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { METRICS, renderFile, SchemaError } from "./render.js";

const USAGE =
  "usage: render --input results.csv --out figs/ [--metric mean_avg_utility]\n" +
  `metrics: ${Object.keys(METRICS).join(", ")}\n`;

export function runCli(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        input: { type: "string" },
        out: { type: "string" },
        metric: { type: "string", default: "mean_avg_utility" },
        help: { type: "boolean", default: false },
      },
      allowPositionals: false,
    });
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n${USAGE}`);
    return 2;
  }
  const { input, out, metric, help } = parsed.values;
  if (help) {
    process.stdout.write(USAGE);
    return 0;
  }
  if (!input || !out) {
    process.stderr.write(`--input and --out are required\n${USAGE}`);
    return 2;
  }
  if (!(metric as string in METRICS)) {
    process.stderr.write(`unknown metric "${metric}"\n${USAGE}`);
    return 2;
  }
  try {
    const written = renderFile({ input, outDir: out, metric: metric as string });
    for (const file of written) {
      process.stdout.write(`${file}\n`);
    }
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      process.stderr.write(`${err.message}\n`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(runCli(process.argv.slice(2)));
}
