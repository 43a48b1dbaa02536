/**
 * Turns one result CSV into one figure per cost facet: a line per sigma over
 * the round checkpoints, with a two-standard-error band when the selected
 * metric publishes one.
 */
import * as fs from "node:fs";
import * as path from "node:path";

import { parseResults, ResultRow, SchemaError } from "./csv.js";
import { buildChart, Series } from "./svg.js";

// metric -> companion standard-error column (null when the CSV has none)
export const METRICS: Record<string, keyof ResultRow | null> = {
  mean_avg_utility: "se_avg_utility",
  alt_convention_utility: null,
  mean_max_quality: "se_max_quality",
  mean_items_explored: null,
};

export interface RenderOptions {
  input: string;
  outDir: string;
  metric: string;
}

function costSlug(cost: number): string {
  return `c${String(cost).replace(/\./g, "_")}`;
}

function readSidecarVersion(csvPath: string): string | null {
  const sidecar = csvPath.replace(/\.csv$/, "") + ".json";
  if (sidecar === csvPath || !fs.existsSync(sidecar)) {
    return null;
  }
  try {
    const meta = JSON.parse(fs.readFileSync(sidecar, "utf8"));
    return typeof meta.engine_version === "string" ? meta.engine_version : null;
  } catch {
    process.stderr.write(`warning: ignoring unreadable sidecar ${sidecar}\n`);
    return null;
  }
}

function facetSeries(rows: ResultRow[], metric: string): Series[] {
  const seColumn = METRICS[metric] ?? null;
  const bySigma = new Map<number, ResultRow[]>();
  for (const row of rows) {
    const group = bySigma.get(row.sigma);
    if (group) {
      group.push(row);
    } else {
      bySigma.set(row.sigma, [row]);
    }
  }
  const sigmas = [...bySigma.keys()].sort((a, b) => a - b);
  return sigmas.map((sigma) => {
    const points = (bySigma.get(sigma) ?? [])
      .slice()
      .sort((a, b) => a.T - b.T)
      .map((row) => ({
        t: row.T,
        y: row[metric as keyof ResultRow] as number,
        se: seColumn === null ? null : (row[seColumn] as number),
      }));
    return { label: `sigma = ${sigma}`, points };
  });
}

/** Render every cost facet of the CSV; returns the written image paths. */
export function renderFile(options: RenderOptions): string[] {
  if (!(options.metric in METRICS)) {
    throw new RangeError(
      `unknown metric "${options.metric}"; choose one of ${Object.keys(METRICS).join(", ")}`,
    );
  }
  const text = fs.readFileSync(options.input, "utf8");
  const rows = parseResults(text);
  const version = readSidecarVersion(options.input);

  const byCost = new Map<number, ResultRow[]>();
  for (const row of rows) {
    const group = byCost.get(row.cost);
    if (group) {
      group.push(row);
    } else {
      byCost.set(row.cost, [row]);
    }
  }

  fs.mkdirSync(options.outDir, { recursive: true });
  const written: string[] = [];
  for (const cost of [...byCost.keys()].sort((a, b) => a - b)) {
    const facetRows = byCost.get(cost) ?? [];
    const svg = buildChart({
      title: `${options.metric} by rounds (cost = ${cost})`,
      xLabel: "rounds T (log scale)",
      yLabel: options.metric,
      series: facetSeries(facetRows, options.metric),
      note: version === null ? undefined : `engine ${version}`,
    });
    const file = path.join(options.outDir, `${options.metric}-${costSlug(cost)}.svg`);
    fs.writeFileSync(file, svg);
    written.push(file);
  }
  return written;
}

export { SchemaError };
