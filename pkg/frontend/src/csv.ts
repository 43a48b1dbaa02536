/**
 * Strict reader for the simulation result CSV.
 *
 * The engine publishes a fixed fourteen-column schema; this module accepts
 * exactly that schema and nothing else, so a drifting producer fails loudly
 * here instead of rendering a silently wrong figure.
 */

export const COLUMNS = [
  "sigma",
  "T",
  "mean_avg_utility",
  "se_avg_utility",
  "alt_convention_utility",
  "mean_max_quality",
  "se_max_quality",
  "mean_items_explored",
  "runs",
  "seed",
  "model",
  "cost",
  "diamond_p",
  "diamond_D",
] as const;

export class SchemaError extends Error {
  override name = "SchemaError";
}

export interface ResultRow {
  sigma: number;
  T: number;
  mean_avg_utility: number;
  se_avg_utility: number;
  alt_convention_utility: number;
  mean_max_quality: number;
  se_max_quality: number;
  mean_items_explored: number;
  runs: number;
  seed: number;
  model: string;
  cost: number;
  // empty in the CSV whenever the run had no rare-jump component
  diamond_p: number | null;
  diamond_D: number | null;
}

function parseNumber(field: string, raw: string, line: number): number {
  const value = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(value)) {
    throw new SchemaError(`line ${line}: column ${field} is not a finite number: "${raw}"`);
  }
  return value;
}

function parseOptional(field: string, raw: string, line: number): number | null {
  if (raw === "") {
    return null;
  }
  return parseNumber(field, raw, line);
}

/** Parse the full CSV text, enforcing the schema. Throws SchemaError. */
export function parseResults(text: string): ResultRow[] {
  const lines = text.split("\n").map((l) => (l.endsWith("\r") ? l.slice(0, -1) : l));
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new SchemaError("empty file: expected a header row");
  }
  const header = (lines[0] ?? "").split(",");
  if (header.length !== COLUMNS.length || header.some((h, i) => h !== COLUMNS[i])) {
    throw new SchemaError(
      `header mismatch: expected "${COLUMNS.join(",")}" got "${lines[0]}"`,
    );
  }
  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const lineNo = i + 1;
    const raw = lines[i] ?? "";
    if (raw === "") {
      throw new SchemaError(`line ${lineNo}: blank row inside the table`);
    }
    const cells = raw.split(",");
    if (cells.length !== COLUMNS.length) {
      throw new SchemaError(
        `line ${lineNo}: expected ${COLUMNS.length} fields, got ${cells.length}`,
      );
    }
    const model = cells[10] ?? "";
    if (model === "") {
      throw new SchemaError(`line ${lineNo}: column model is empty`);
    }
    const row: ResultRow = {
      sigma: parseNumber("sigma", cells[0] ?? "", lineNo),
      T: parseNumber("T", cells[1] ?? "", lineNo),
      mean_avg_utility: parseNumber("mean_avg_utility", cells[2] ?? "", lineNo),
      se_avg_utility: parseNumber("se_avg_utility", cells[3] ?? "", lineNo),
      alt_convention_utility: parseNumber("alt_convention_utility", cells[4] ?? "", lineNo),
      mean_max_quality: parseNumber("mean_max_quality", cells[5] ?? "", lineNo),
      se_max_quality: parseNumber("se_max_quality", cells[6] ?? "", lineNo),
      mean_items_explored: parseNumber("mean_items_explored", cells[7] ?? "", lineNo),
      runs: parseNumber("runs", cells[8] ?? "", lineNo),
      seed: parseNumber("seed", cells[9] ?? "", lineNo),
      model,
      cost: parseNumber("cost", cells[11] ?? "", lineNo),
      diamond_p: parseOptional("diamond_p", cells[12] ?? "", lineNo),
      diamond_D: parseOptional("diamond_D", cells[13] ?? "", lineNo),
    };
    if (!Number.isInteger(row.T) || row.T < 1) {
      throw new SchemaError(`line ${lineNo}: T must be a positive integer, got ${cells[1]}`);
    }
    if (!Number.isInteger(row.runs) || row.runs < 1) {
      throw new SchemaError(`line ${lineNo}: runs must be a positive integer`);
    }
    if (row.se_avg_utility < 0 || row.se_max_quality < 0) {
      throw new SchemaError(`line ${lineNo}: standard errors must be nonnegative`);
    }
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new SchemaError("no data rows after the header");
  }
  return rows;
}
