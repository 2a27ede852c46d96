/**
 * Chart builders.  Each takes parsed CSV data, lays out a figure model
 * (scales, ticks, legend), and rasters it.  Plots reflect the CSV contents
 * only; nothing statistical is recomputed here.
 */

import { InvarianceData, MixingCurve, ScalingData } from "./csv.js";
import { Color, Raster } from "./raster.js";

export const PALETTE: Color[] = [
  [31, 119, 180, 255],
  [214, 39, 40, 255],
  [44, 160, 44, 255],
  [148, 103, 189, 255],
  [255, 127, 14, 255],
  [23, 190, 207, 255],
  [140, 86, 75, 255],
  [127, 127, 127, 255],
];

const BLACK: Color = [0, 0, 0, 255];
const GREY: Color = [200, 200, 200, 255];
const BAND_ALPHA = 48;

export interface LegendEntry {
  label: string;
  color: Color;
}

export interface Axis {
  min: number;
  max: number;
  ticks: number[];
  log: boolean;
}

export interface FigureModel {
  title: string;
  xLabel: string;
  yLabel: string;
  x: Axis;
  y: Axis;
  legend: LegendEntry[];
}

function niceTicks(min: number, max: number, count = 5): number[] {
  if (!(max > min)) return [min];
  const span = max - min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 2.5 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count + 1) ?? 10 * step;
  const ticks: number[] = [];
  for (let t = Math.ceil(min / chosen) * chosen; t <= max + 1e-12 * span; t += chosen) {
    ticks.push(Number(t.toPrecision(12)));
  }
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 10000 || a < 0.001) return v.toExponential(0).replace("+", "");
  return Number(v.toPrecision(4)).toString();
}

interface Frame {
  raster: Raster;
  left: number;
  right: number;
  top: number;
  bottom: number;
  model: FigureModel;
  sx: (v: number) => number;
  sy: (v: number) => number;
}

function makeFrame(model: FigureModel, width: number, height: number): Frame {
  const raster = new Raster(width, height);
  const left = 86;
  const right = width - 24;
  const top = 46;
  const bottom = height - 58;
  const tx = (v: number) => (model.x.log ? Math.log10(v) : v);
  const ty = (v: number) => (model.y.log ? Math.log10(v) : v);
  const x0 = tx(model.x.min);
  const x1 = tx(model.x.max);
  const y0 = ty(model.y.min);
  const y1 = ty(model.y.max);
  const sx = (v: number) => left + ((tx(v) - x0) / (x1 - x0 || 1)) * (right - left);
  const sy = (v: number) => bottom - ((ty(v) - y0) / (y1 - y0 || 1)) * (bottom - top);
  // axes, ticks, labels
  raster.line(left, top, left, bottom, BLACK);
  raster.line(left, bottom, right, bottom, BLACK);
  for (const t of model.x.ticks) {
    const px = Math.round(sx(t));
    raster.line(px, bottom, px, bottom + 4, BLACK);
    const label = fmtTick(t);
    raster.text(px - raster.textWidth(label, 1) / 2, bottom + 8, label, BLACK, 1);
  }
  for (const t of model.y.ticks) {
    const py = Math.round(sy(t));
    raster.line(left - 4, py, left, py, BLACK);
    const label = fmtTick(t);
    raster.text(left - 8 - raster.textWidth(label, 1), py - 3, label, BLACK, 1);
    raster.line(left, py, right, py, [235, 235, 235, 255]);
  }
  raster.text(left, 16, model.title, BLACK, 2);
  raster.text(
    left + (right - left) / 2 - raster.textWidth(model.xLabel, 1) / 2,
    bottom + 26, model.xLabel, BLACK, 1);
  raster.text(8, top - 20, model.yLabel, BLACK, 1);
  return { raster, left, right, top, bottom, model, sx, sy };
}

function drawLegend(frame: Frame): void {
  const { raster, model } = frame;
  const scale = 1;
  const lineH = 14;
  const textW = Math.max(...model.legend.map((e) => raster.textWidth(e.label, scale)));
  const w = textW + 34;
  const h = model.legend.length * lineH + 10;
  const x = frame.right - w - 6;
  const y = frame.top + 6;
  raster.fillRect(x, y, w, h, [255, 255, 255, 230]);
  raster.line(x, y, x + w, y, GREY);
  raster.line(x, y + h, x + w, y + h, GREY);
  raster.line(x, y, x, y + h, GREY);
  raster.line(x + w, y, x + w, y + h, GREY);
  model.legend.forEach((entry, i) => {
    const ly = y + 8 + i * lineH;
    raster.line(x + 6, ly + 3, x + 22, ly + 3, entry.color, 3);
    raster.text(x + 28, ly, entry.label, BLACK, scale);
  });
}

export interface RenderedFigure {
  model: FigureModel;
  raster: Raster;
}

/** Seed-averaged mixing curves, one per method, with min/max bands. */
export function mixingFigure(curves: MixingCurve[], logY = false,
                             width = 900, height = 620): RenderedFigure {
  if (curves.length === 0) {
    throw new Error("no curves found");
  }
  const allN = curves.flatMap((c) => c.n);
  const allE = curves.flatMap((c) => (logY ? c.eMean : c.eMax.concat(c.eMean)));
  const positive = allE.filter((v) => v > 0);
  const xMax = Math.max(...allN);
  const yMax = Math.max(...allE);
  const yMin = logY ? Math.min(...positive) : 0;
  const y: Axis = logY
    ? { min: yMin, max: yMax, log: true,
        ticks: niceTicks(Math.log10(yMin), Math.log10(yMax), 5).map((t) => Math.pow(10, t)) }
    : { min: 0, max: yMax * 1.05, ticks: niceTicks(0, yMax * 1.05), log: false };
  const model: FigureModel = {
    title: "mixing statistic e(n)",
    xLabel: "work n (integrator steps)",
    yLabel: logY ? "e(n), log scale" : "e(n)",
    x: { min: 0, max: xMax, ticks: niceTicks(0, xMax), log: false },
    y,
    legend: curves.map((c, i) => ({ label: c.method, color: PALETTE[i % PALETTE.length] })),
  };
  const frame = makeFrame(model, width, height);
  curves.forEach((curve, i) => {
    const color = PALETTE[i % PALETTE.length];
    const keep = (v: number) => !logY || v > 0;
    const pts = curve.n.map((n, k) => ({ n, mean: curve.eMean[k], lo: curve.eMin[k], hi: curve.eMax[k] }))
      .filter((p) => keep(p.mean) && (p.n > 0 || !model.x.log));
    const xs = pts.map((p) => frame.sx(p.n));
    if (!logY) {
      frame.raster.bandBetween(
        xs, pts.map((p) => frame.sy(p.lo)), pts.map((p) => frame.sy(p.hi)),
        [color[0], color[1], color[2], BAND_ALPHA]);
    }
    frame.raster.polyline(xs, pts.map((p) => frame.sy(p.mean)), color, 2);
  });
  drawLegend(frame);
  return { model, raster: frame.raster };
}

/** Log-log rejection scatter with the CSV's fitted slope drawn through the centroid. */
export function scalingFigure(data: ScalingData, width = 720, height = 560): RenderedFigure {
  const xs = data.deltas;
  const ys = data.meanRejection;
  const xMin = Math.min(...xs) / 1.4;
  const xMax = Math.max(...xs) * 1.4;
  const positives = ys.filter((v) => v > 0);
  const yMin = (positives.length ? Math.min(...positives) : 1e-6) / 2;
  const yMax = (positives.length ? Math.max(...positives) : 1) * 2;
  const slopeLabel = data.slope === null ? "slope n/a" : `slope = ${data.slope.toFixed(2)}`;
  const model: FigureModel = {
    title: "rejection probability vs step",
    xLabel: "delta (log scale)",
    yLabel: "mean 1-alpha (log scale)",
    x: { min: xMin, max: xMax, log: true,
         ticks: xs.slice() },
    y: { min: yMin, max: yMax, log: true,
         ticks: niceTicks(Math.log10(yMin), Math.log10(yMax), 4).map((t) => Math.pow(10, t)) },
    legend: [{ label: slopeLabel, color: PALETTE[1] }],
  };
  const frame = makeFrame(model, width, height);
  // fitted line from the CSV slope, anchored at the centroid of the points
  if (data.slope !== null && positives.length >= 2) {
    const cx = xs.reduce((s, v) => s + Math.log10(v), 0) / xs.length;
    const cy = ys.reduce((s, v) => s + Math.log10(Math.max(v, yMin)), 0) / ys.length;
    const yAt = (x: number) => Math.pow(10, cy + data.slope! * (Math.log10(x) - cx));
    frame.raster.line(
      frame.sx(xMin), frame.sy(yAt(xMin)), frame.sx(xMax), frame.sy(yAt(xMax)),
      PALETTE[1], 2);
    frame.raster.text(frame.left + 12, frame.top + 8, slopeLabel, [0, 0, 0, 255], 2);
  }
  for (let i = 0; i < xs.length; i++) {
    if (ys[i] <= 0) continue;
    const px = frame.sx(xs[i]);
    const py = frame.sy(ys[i]);
    frame.raster.fillRect(px - 3, py - 3, 7, 7, PALETTE[0]);
  }
  return { model, raster: frame.raster };
}

/** Per-mode variance-ratio bars with the 0.95..1.05 target band. */
export function invarianceFigure(data: InvarianceData, width = 900, height = 560): RenderedFigure {
  const hasSde = data.sdeRatio.some((v) => v !== null);
  const ratios = data.chainRatio.concat(
    data.sdeRatio.filter((v): v is number => v !== null));
  const yMax = Math.max(1.1, ...ratios) * 1.05;
  const yMin = Math.min(0.9, ...ratios) * 0.95;
  const model: FigureModel = {
    title: "per-mode variance ratio",
    xLabel: "mode j",
    yLabel: "var / lambda_j^2",
    x: { min: 0, max: data.modes.length + 1, ticks: data.modes.filter(
      (m) => m <= 10 || m % Math.ceil(data.modes.length / 10) === 0), log: false },
    y: { min: yMin, max: yMax, ticks: niceTicks(yMin, yMax, 6), log: false },
    legend: hasSde
      ? [{ label: "chain", color: PALETTE[0] }, { label: "sde", color: PALETTE[4] }]
      : [{ label: "chain", color: PALETTE[0] }],
  };
  const frame = makeFrame(model, width, height);
  // target band [0.95, 1.05] and the exact-invariance line
  frame.raster.bandBetween(
    [frame.left, frame.right],
    [frame.sy(0.95), frame.sy(0.95)],
    [frame.sy(1.05), frame.sy(1.05)],
    [44, 160, 44, 40]);
  frame.raster.line(frame.left, frame.sy(1.0), frame.right, frame.sy(1.0),
                    [44, 160, 44, 255], 1);
  const slot = (frame.right - frame.left) / (data.modes.length + 1);
  const barW = Math.max(2, Math.floor(hasSde ? slot * 0.3 : slot * 0.5));
  data.modes.forEach((_, i) => {
    const cx = frame.left + slot * (i + 1);
    const base = frame.sy(Math.max(model.y.min, 0));
    const topChain = frame.sy(data.chainRatio[i]);
    frame.raster.fillRect(cx - (hasSde ? barW : barW / 2), Math.min(topChain, base),
                          barW, Math.abs(base - topChain), PALETTE[0]);
    const sde = data.sdeRatio[i];
    if (sde !== null) {
      const topSde = frame.sy(sde);
      frame.raster.fillRect(cx + 1, Math.min(topSde, base), barW,
                            Math.abs(base - topSde), PALETTE[4]);
    }
  });
  drawLegend(frame);
  return { model, raster: frame.raster };
}
