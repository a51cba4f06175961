/** The three figure kinds built from experiment CSVs. */

import { writeFileSync } from "fs";

import { DataError, Series, SeriesSpec, loadSeries, mean, movingAverage, standardError } from "./series.js";
import { Bar, barPlot, linePlot } from "./svg.js";

export interface FigureOptions {
  column?: string;
  window: number;
  baseline?: string;
}

function loadAll(specs: SeriesSpec[], column: string): Series[] {
  const seen = new Set<string>();
  for (const s of specs) {
    if (seen.has(s.label)) {
      throw new DataError(`duplicate series label "${s.label}"`);
    }
    seen.add(s.label);
  }
  return specs.map((s) => loadSeries(s, column));
}

/** One line per series of the (running) reward column against episodes. */
export function cumulativeFigure(specs: SeriesSpec[], opts: FigureOptions): string {
  const column = opts.column ?? "running_mean_reward";
  const series = loadAll(specs, column);
  return linePlot(series.map((s) => ({ label: s.label, xs: s.episodes, ys: s.values })),
                  "Episode", column.replace(/_/g, " "));
}

/** Bars of the per-episode means with standard-error whiskers. */
export function barsFigure(specs: SeriesSpec[], opts: FigureOptions): { svg: string; summary: string } {
  const column = opts.column ?? "mean_reward";
  const series = loadAll(specs, column);
  const bars: Bar[] = series.map((s) => ({
    label: s.label,
    value: mean(s.values),
    error: standardError(s.values),
  }));
  const lines = ["label,value,stderr,episodes,files"];
  series.forEach((s, i) => {
    lines.push([s.label, String(bars[i].value), String(bars[i].error),
                String(s.episodes.length), String(s.samples[0].length)].join(","));
  });
  return { svg: barPlot(bars, column.replace(/_/g, " ")), summary: lines.join("\n") + "\n" };
}

/** Per-episode difference against a named baseline, moving-averaged. */
export function gapFigure(specs: SeriesSpec[], opts: FigureOptions): string {
  if (!opts.baseline) {
    throw new DataError("gap figure needs --baseline <label>");
  }
  const column = opts.column ?? "mean_reward";
  const series = loadAll(specs, column);
  const base = series.find((s) => s.label === opts.baseline);
  if (!base) {
    throw new DataError(`baseline "${opts.baseline}" not among series: ` +
      series.map((s) => s.label).join(", "));
  }
  const lines = series.filter((s) => s !== base).map((s) => {
    if (s.episodes.length !== base.episodes.length ||
        s.episodes.some((e, i) => e !== base.episodes[i])) {
      throw new DataError(`series "${s.label}" episodes do not align with baseline`);
    }
    const diff = s.values.map((v, i) => v - base.values[i]);
    const ys = movingAverage(diff, opts.window);
    const xs = s.episodes.slice(s.episodes.length - ys.length);
    return { label: s.label, xs, ys };
  });
  if (lines.length === 0) {
    throw new DataError("gap figure needs at least one non-baseline series");
  }
  return linePlot(lines, "Episode",
                  `${column.replace(/_/g, " ")} gap vs ${opts.baseline}` +
                  (opts.window > 1 ? ` (window ${opts.window})` : ""));
}

export function renderFigure(kind: string, specs: SeriesSpec[], out: string,
                             opts: FigureOptions): string[] {
  if (specs.length === 0) {
    throw new DataError("need at least one --csv series");
  }
  if (kind === "cumulative") {
    writeFileSync(out, cumulativeFigure(specs, opts));
    return [out];
  }
  if (kind === "bars") {
    const { svg, summary } = barsFigure(specs, opts);
    const summaryPath = out.replace(/\.svg$/, "") + ".txt";
    writeFileSync(out, svg);
    writeFileSync(summaryPath, summary);
    return [out, summaryPath];
  }
  if (kind === "gap") {
    writeFileSync(out, gapFigure(specs, opts));
    return [out];
  }
  throw new DataError(`unknown figure kind "${kind}" (cumulative | bars | gap)`);
}
