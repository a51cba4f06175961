/** Loading metric series from one or more per-seed CSV files. */

import { readFileSync } from "fs";
import { basename } from "path";

import { SchemaError, numericColumn, parseCsv } from "./csv.js";

export class DataError extends Error {}

export interface SeriesSpec {
  paths: string[];
  label: string;
}

/** `path1,path2:label`; the label defaults to the first file's base name. */
export function parseSeriesArg(arg: string): SeriesSpec {
  let paths = arg;
  let label = "";
  const colon = arg.lastIndexOf(":");
  if (colon >= 0 && !arg.slice(colon + 1).includes("/")) {
    paths = arg.slice(0, colon);
    label = arg.slice(colon + 1);
  }
  const files = paths.split(",").map((p) => p.trim()).filter((p) => p.length > 0);
  if (files.length === 0) {
    throw new DataError(`no files in series argument: ${arg}`);
  }
  if (!label) {
    label = basename(files[0]).replace(/\.csv$/, "");
  }
  return { paths: files, label };
}

export interface Series {
  label: string;
  episodes: number[];
  /** per-episode mean of the chosen column across the series' files */
  values: number[];
  /** per-episode values per file, for spread statistics */
  samples: number[][];
}

export function loadSeries(spec: SeriesSpec, column: string): Series {
  let episodes: number[] | null = null;
  const perFile: number[][] = [];
  for (const path of spec.paths) {
    const table = parseCsv(readFileSync(path, "utf8"));
    if (table.rows.length === 0) {
      throw new SchemaError(`${path}: no data rows`);
    }
    const eps = numericColumn(table, "episode", path);
    const vals = numericColumn(table, column, path);
    if (episodes === null) {
      episodes = eps;
    } else if (eps.length !== episodes.length || eps.some((e, i) => e !== episodes![i])) {
      throw new DataError(`${path}: episode column disagrees with ${spec.paths[0]}`);
    }
    perFile.push(vals);
  }
  const n = perFile.length;
  const values = episodes!.map((_, i) => perFile.reduce((acc, f) => acc + f[i], 0) / n);
  const samples = episodes!.map((_, i) => perFile.map((f) => f[i]));
  return { label: spec.label, episodes: episodes!, values, samples };
}

export function movingAverage(values: number[], window: number): number[] {
  if (window <= 1) {
    return values.slice();
  }
  if (window > values.length) {
    throw new DataError(`window ${window} longer than series (${values.length})`);
  }
  const out: number[] = [];
  let acc = 0;
  for (let i = 0; i < values.length; i++) {
    acc += values[i];
    if (i >= window) {
      acc -= values[i - window];
    }
    if (i >= window - 1) {
      out.push(acc / window);
    }
  }
  return out;
}

export function mean(values: number[]): number {
  return values.reduce((a, b) => a + b, 0) / values.length;
}

/** Standard error: sample standard deviation over sqrt(n); 0 for n = 1. */
export function standardError(values: number[]): number {
  const n = values.length;
  if (n <= 1) {
    return 0;
  }
  const m = mean(values);
  const variance = values.reduce((acc, v) => acc + (v - m) * (v - m), 0) / (n - 1);
  return Math.sqrt(variance) / Math.sqrt(n);
}
