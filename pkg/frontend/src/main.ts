#!/usr/bin/env node
/**
 * Render figures from experiment CSVs.
 *
 *   plots <cumulative|bars|gap> --csv path[,path2...][:label] ... --out file.svg
 *         [--window N] [--baseline label] [--column name]
 *
 * `bars` also writes a text summary (label,value,stderr) next to the SVG.
 * Exit codes: 0 success, 1 bad usage/arguments, 2 data or I/O failure.
 */

import { pathToFileURL } from "url";

import { SchemaError } from "./csv.js";
import { renderFigure } from "./figures.js";
import { DataError, SeriesSpec, parseSeriesArg } from "./series.js";

class UsageError extends Error {}

interface Args {
  kind: string;
  specs: SeriesSpec[];
  out: string;
  window: number;
  baseline?: string;
  column?: string;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new UsageError("missing figure kind (cumulative | bars | gap)");
  }
  const [kind, ...rest] = argv;
  const specs: SeriesSpec[] = [];
  let out = "";
  let window = 30;
  let baseline: string | undefined;
  let column: string | undefined;
  for (let i = 0; i < rest.length; i++) {
    const flag = rest[i];
    const value = rest[i + 1];
    const need = () => {
      if (value === undefined) {
        throw new UsageError(`${flag} needs a value`);
      }
      i++;
      return value;
    };
    switch (flag) {
      case "--csv":
        specs.push(parseSeriesArg(need()));
        break;
      case "--out":
        out = need();
        break;
      case "--window": {
        window = Number(need());
        if (!Number.isInteger(window) || window < 1) {
          throw new UsageError(`--window must be a positive integer, got ${value}`);
        }
        break;
      }
      case "--baseline":
        baseline = need();
        break;
      case "--column":
        column = need();
        break;
      default:
        throw new UsageError(`unknown argument ${flag}`);
    }
  }
  if (!out) {
    throw new UsageError("missing --out <file.svg>");
  }
  return { kind, specs, out, window, baseline, column };
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const written = renderFigure(args.kind, args.specs, args.out, {
      window: args.kind === "gap" ? args.window : 1,
      baseline: args.baseline,
      column: args.column,
    });
    for (const path of written) {
      console.log(`wrote ${path}`);
    }
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 1;
    }
    if (err instanceof DataError || err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

if (process.argv[1] !== undefined &&
    import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
