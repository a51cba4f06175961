/** Hand-rolled SVG charts: multi-line plots and bar charts with whiskers. */

const WIDTH = 760;
const HEIGHT = 440;
const MARGIN = { top: 28, right: 24, bottom: 52, left: 72 };

// series order mirrors the experiment write-ups: baseline first, then the
// periodic, adaptive and reference schemes
export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
  "#8c564b", "#17becf", "#7f7f7f",
];

interface Extent {
  min: number;
  max: number;
}

function extent(values: number[]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  return { min, max };
}

/** 1-2-5 tick spacing covering the extent with about `count` ticks. */
export function ticks(ext: Extent, count = 6): number[] {
  const span = ext.max - ext.min;
  const raw = span / count;
  const power = Math.pow(10, Math.floor(Math.log10(raw)));
  const candidates = [1, 2, 5, 10].map((m) => m * power);
  const step = candidates.find((c) => span / c <= count) ?? candidates[3];
  const first = Math.ceil(ext.min / step) * step;
  const out: number[] = [];
  for (let v = first; v <= ext.max + 1e-12; v += step) {
    out.push(Math.abs(v) < step / 1e6 ? 0 : v);
  }
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1000 || abs < 0.001) return v.toExponential(1);
  return String(Number(v.toPrecision(4)));
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

class Scene {
  parts: string[] = [];

  add(part: string): void {
    this.parts.push(part);
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

interface Frame {
  x: (v: number) => number;
  y: (v: number) => number;
}

function drawFrame(scene: Scene, xExt: Extent, yExt: Extent,
                   xLabel: string, yLabel: string,
                   xTicks: number[], yTicks: number[]): Frame {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const x = (v: number) => MARGIN.left + ((v - xExt.min) / (xExt.max - xExt.min)) * plotW;
  const y = (v: number) => MARGIN.top + plotH - ((v - yExt.min) / (yExt.max - yExt.min)) * plotH;

  for (const t of yTicks) {
    scene.add(`<line x1="${MARGIN.left}" y1="${y(t)}" x2="${WIDTH - MARGIN.right}" ` +
      `y2="${y(t)}" stroke="#dddddd"/>`);
    scene.add(`<text x="${MARGIN.left - 8}" y="${y(t) + 4}" text-anchor="end">${fmt(t)}</text>`);
  }
  for (const t of xTicks) {
    scene.add(`<line x1="${x(t)}" y1="${MARGIN.top}" x2="${x(t)}" ` +
      `y2="${HEIGHT - MARGIN.bottom}" stroke="#eeeeee"/>`);
    scene.add(`<text x="${x(t)}" y="${HEIGHT - MARGIN.bottom + 18}" ` +
      `text-anchor="middle">${fmt(t)}</text>`);
  }
  scene.add(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
    `fill="none" stroke="#333333"/>`);
  scene.add(`<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" ` +
    `text-anchor="middle">${esc(xLabel)}</text>`);
  scene.add(`<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
    `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${esc(yLabel)}</text>`);
  return { x, y };
}

export interface Line {
  label: string;
  xs: number[];
  ys: number[];
}

export function linePlot(lines: Line[], xLabel: string, yLabel: string): string {
  const scene = new Scene();
  const xExt = extent(lines.flatMap((l) => l.xs));
  const yExt = extent(lines.flatMap((l) => l.ys));
  const pad = (yExt.max - yExt.min) * 0.05;
  const frame = drawFrame(scene, xExt, { min: yExt.min - pad, max: yExt.max + pad },
                          xLabel, yLabel, ticks(xExt), ticks(yExt));
  lines.forEach((line, i) => {
    const color = PALETTE[i % PALETTE.length];
    const points = line.xs.map((x, k) => `${frame.x(x).toFixed(2)},${frame.y(line.ys[k]).toFixed(2)}`);
    scene.add(`<polyline fill="none" stroke="${color}" stroke-width="1.5" ` +
      `data-label="${esc(line.label)}" points="${points.join(" ")}"/>`);
    const lx = MARGIN.left + 12;
    const ly = MARGIN.top + 16 + i * 16;
    scene.add(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" ` +
      `stroke="${color}" stroke-width="2"/>`);
    scene.add(`<text x="${lx + 28}" y="${ly}">${esc(line.label)}</text>`);
  });
  return scene.render();
}

export interface Bar {
  label: string;
  value: number;
  error: number;
}

export function barPlot(bars: Bar[], yLabel: string): string {
  const scene = new Scene();
  const top = Math.max(...bars.map((b) => b.value + b.error), 0) * 1.15 + 1e-9;
  const bottom = Math.min(...bars.map((b) => b.value - b.error), 0);
  const yExt = { min: bottom, max: top };
  const xExt = { min: 0, max: bars.length };
  const frame = drawFrame(scene, xExt, yExt, "", yLabel, [], ticks(yExt));
  const slot = (WIDTH - MARGIN.left - MARGIN.right) / bars.length;
  bars.forEach((bar, i) => {
    const cx = MARGIN.left + slot * (i + 0.5);
    const w = slot * 0.5;
    const y0 = frame.y(Math.max(0, yExt.min));
    const y1 = frame.y(bar.value);
    scene.add(`<rect x="${cx - w / 2}" y="${Math.min(y0, y1)}" width="${w}" ` +
      `height="${Math.abs(y0 - y1)}" fill="${PALETTE[4]}" fill-opacity="0.65" ` +
      `stroke="#333333" data-label="${esc(bar.label)}" data-value="${bar.value}" ` +
      `data-error="${bar.error}"/>`);
    if (bar.error > 0) {
      const yl = frame.y(bar.value - bar.error);
      const yh = frame.y(bar.value + bar.error);
      scene.add(`<line x1="${cx}" y1="${yl}" x2="${cx}" y2="${yh}" stroke="#111111"/>`);
      scene.add(`<line x1="${cx - 6}" y1="${yh}" x2="${cx + 6}" y2="${yh}" stroke="#111111"/>`);
      scene.add(`<line x1="${cx - 6}" y1="${yl}" x2="${cx + 6}" y2="${yl}" stroke="#111111"/>`);
    }
    scene.add(`<text x="${cx}" y="${HEIGHT - MARGIN.bottom + 18}" ` +
      `text-anchor="middle">${esc(bar.label)}</text>`);
  });
  return scene.render();
}
