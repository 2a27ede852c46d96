#!/usr/bin/env node
/**
 * plot mixing DIR --out FILE [--log]   render every curve CSV in DIR
 * plot diag FILE --out FILE            render a scaling or invariance CSV
 *
 * PNG output at 150 dpi.  Exit codes: 0 ok, 1 bad input (message names the
 * offending file or column), 2 usage error.
 */

import { readdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { pathToFileURL } from "node:url";

import { classifyDiagnostic, CsvError, readInvariance, readMixingCurve, readScaling } from "./csv.js";
import { invarianceFigure, mixingFigure, scalingFigure, RenderedFigure } from "./charts.js";
import { encodePng } from "./png.js";

interface Args {
  command: string;
  target: string;
  out: string;
  log: boolean;
}

export function parseArgs(argv: string[]): Args {
  const [command, target, ...rest] = argv;
  if (!command || !target || (command !== "mixing" && command !== "diag")) {
    throw new UsageError(
      "usage: plot mixing DIR --out FILE [--log] | plot diag FILE --out FILE");
  }
  let out = "";
  let log = false;
  for (let i = 0; i < rest.length; i++) {
    if (rest[i] === "--out") {
      out = rest[++i] ?? "";
    } else if (rest[i] === "--log") {
      log = true;
    } else {
      throw new UsageError(`unknown argument: ${rest[i]}`);
    }
  }
  if (!out) {
    throw new UsageError("missing --out FILE");
  }
  return { command, target, out, log };
}

export class UsageError extends Error {}

export function buildMixing(dir: string, logY: boolean): RenderedFigure {
  let names: string[];
  try {
    names = readdirSync(dir).filter((f) => f.endsWith(".csv")).sort();
  } catch (err) {
    throw new CsvError(`${dir}: cannot list directory (${(err as Error).message})`);
  }
  const curves = names.map((f) => readMixingCurve(join(dir, f)));
  if (curves.length === 0) {
    throw new CsvError(`no curves found in ${dir}`);
  }
  const seen = new Set<string>();
  for (const c of curves) {
    if (seen.has(c.method)) {
      throw new CsvError(`${c.path}: duplicate method label "${c.method}"`);
    }
    seen.add(c.method);
  }
  return mixingFigure(curves, logY);
}

export function buildDiag(file: string): RenderedFigure {
  const kind = classifyDiagnostic(file);
  return kind === "scaling"
    ? scalingFigure(readScaling(file))
    : invarianceFigure(readInvariance(file));
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`plot: ${(err as Error).message}`);
    return 2;
  }
  try {
    const figure = args.command === "mixing"
      ? buildMixing(args.target, args.log)
      : buildDiag(args.target);
    const png = encodePng(figure.raster.width, figure.raster.height, figure.raster.data);
    writeFileSync(args.out, png);
    console.error(
      `plot: wrote ${args.out} (${figure.raster.width}x${figure.raster.height}, ` +
      `${figure.model.legend.length} legend entries)`);
    return 0;
  } catch (err) {
    console.error(`plot: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
