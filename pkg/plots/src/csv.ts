/**
 * Readers for the sampler CLI's CSV outputs.  The files are plain
 * comma-separated with a header row and no quoting; we validate headers
 * hard so a schema drift fails with the column name, not a bad plot.
 */

import { readFileSync } from "node:fs";

export class CsvError extends Error {}

export interface Table {
  header: string[];
  rows: string[][];
  path: string;
}

export function readTable(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new CsvError(`${path}: cannot read (${(err as Error).message})`);
  }
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 1) {
    throw new CsvError(`${path}: empty file`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  for (const [i, row] of rows.entries()) {
    if (row.length !== header.length) {
      throw new CsvError(`${path}: row ${i + 2} has ${row.length} fields, expected ${header.length}`);
    }
  }
  return { header, rows, path };
}

export function requireColumns(table: Table, names: string[]): Map<string, number> {
  const index = new Map<string, number>();
  for (const name of names) {
    const i = table.header.indexOf(name);
    if (i < 0) {
      throw new CsvError(`${table.path}: missing column "${name}" (header: ${table.header.join(",")})`);
    }
    index.set(name, i);
  }
  return index;
}

function num(table: Table, row: string[], col: number, rowIdx: number): number {
  const v = Number(row[col]);
  if (!Number.isFinite(v)) {
    throw new CsvError(`${table.path}: row ${rowIdx + 2} column "${table.header[col]}" is not a number: ${row[col]}`);
  }
  return v;
}

export interface MixingCurve {
  method: string;
  n: number[];
  eMean: number[];
  eMin: number[];
  eMax: number[];
  seeds: number;
  path: string;
}

/** One curve per file: columns method, n, e_mean, e_min, e_max, seeds. */
export function readMixingCurve(path: string): MixingCurve {
  const table = readTable(path);
  const cols = requireColumns(table, ["method", "n", "e_mean", "e_min", "e_max", "seeds"]);
  if (table.rows.length === 0) {
    throw new CsvError(`${path}: no data rows`);
  }
  const method = table.rows[0][cols.get("method")!];
  const curve: MixingCurve = {
    method, n: [], eMean: [], eMin: [], eMax: [],
    seeds: num(table, table.rows[0], cols.get("seeds")!, 0), path,
  };
  table.rows.forEach((row, i) => {
    if (row[cols.get("method")!] !== method) {
      throw new CsvError(`${path}: row ${i + 2} changes method from "${method}"`);
    }
    curve.n.push(num(table, row, cols.get("n")!, i));
    curve.eMean.push(num(table, row, cols.get("e_mean")!, i));
    curve.eMin.push(num(table, row, cols.get("e_min")!, i));
    curve.eMax.push(num(table, row, cols.get("e_max")!, i));
  });
  for (let i = 1; i < curve.n.length; i++) {
    if (curve.n[i] <= curve.n[i - 1]) {
      throw new CsvError(`${path}: work column n must be increasing (row ${i + 2})`);
    }
  }
  return curve;
}

export interface ScalingData {
  deltas: number[];
  meanRejection: number[];
  stderr: number[];
  slope: number | null;
  path: string;
}

/** Scaling study: numeric ladder rows plus one "slope" summary row. */
export function readScaling(path: string): ScalingData {
  const table = readTable(path);
  const cols = requireColumns(table, ["delta", "mean_rejection", "stderr"]);
  const out: ScalingData = { deltas: [], meanRejection: [], stderr: [], slope: null, path };
  table.rows.forEach((row, i) => {
    const first = row[cols.get("delta")!];
    if (first === "slope") {
      const v = row[cols.get("mean_rejection")!];
      out.slope = v === "n/a" ? null : num(table, row, cols.get("mean_rejection")!, i);
      return;
    }
    out.deltas.push(num(table, row, cols.get("delta")!, i));
    out.meanRejection.push(num(table, row, cols.get("mean_rejection")!, i));
    out.stderr.push(num(table, row, cols.get("stderr")!, i));
  });
  if (out.deltas.length === 0) {
    throw new CsvError(`${path}: no ladder rows`);
  }
  return out;
}

export interface InvarianceData {
  modes: number[];
  chainRatio: number[];
  sdeRatio: (number | null)[];
  path: string;
}

export function readInvariance(path: string): InvarianceData {
  const table = readTable(path);
  const cols = requireColumns(table, ["mode", "lambda_sq", "chain_var", "chain_ratio"]);
  const sdeCol = table.header.indexOf("sde_ratio");
  const out: InvarianceData = { modes: [], chainRatio: [], sdeRatio: [], path };
  table.rows.forEach((row, i) => {
    out.modes.push(num(table, row, cols.get("mode")!, i));
    out.chainRatio.push(num(table, row, cols.get("chain_ratio")!, i));
    if (sdeCol >= 0 && row[sdeCol] !== "n/a") {
      out.sdeRatio.push(num(table, row, sdeCol, i));
    } else {
      out.sdeRatio.push(null);
    }
  });
  if (out.modes.length === 0) {
    throw new CsvError(`${path}: no data rows`);
  }
  return out;
}

/** Decide which diagnostic a CSV holds from its header. */
export function classifyDiagnostic(path: string): "scaling" | "invariance" {
  const table = readTable(path);
  if (table.header.includes("mean_rejection")) return "scaling";
  if (table.header.includes("chain_ratio")) return "invariance";
  throw new CsvError(
    `${path}: not a recognized diagnostic CSV; expected a "mean_rejection" (scaling) or "chain_ratio" (invariance) column, got: ${table.header.join(",")}`);
}
