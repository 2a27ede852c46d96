/** Software RGBA framebuffer with the primitives the charts need. */

import { GLYPH_HEIGHT, GLYPH_WIDTH, glyphFor } from "./font.js";

export type Color = [number, number, number, number]; // r, g, b, a (0..255)

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: Color = [255, 255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      this.data.set(background, i * 4);
    }
  }

  /** Source-over blend of a single pixel; no-op outside the canvas. */
  blend(x: number, y: number, [r, g, b, a]: Color): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    const alpha = a / 255;
    this.data[i] = Math.round(r * alpha + this.data[i] * (1 - alpha));
    this.data[i + 1] = Math.round(g * alpha + this.data[i + 1] * (1 - alpha));
    this.data[i + 2] = Math.round(b * alpha + this.data[i + 2] * (1 - alpha));
    this.data[i + 3] = 255;
  }

  fillRect(x0: number, y0: number, w: number, h: number, color: Color): void {
    for (let y = Math.floor(y0); y < y0 + h; y++) {
      for (let x = Math.floor(x0); x < x0 + w; x++) {
        this.blend(x, y, color);
      }
    }
  }

  /** Solid line with the given thickness, drawn as stamped squares. */
  line(x0: number, y0: number, x1: number, y1: number, color: Color, thickness = 1): void {
    const steps = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0), 1);
    const half = Math.floor(thickness / 2);
    for (let s = 0; s <= steps; s++) {
      const x = Math.round(x0 + ((x1 - x0) * s) / steps);
      const y = Math.round(y0 + ((y1 - y0) * s) / steps);
      for (let dy = -half; dy < thickness - half; dy++) {
        for (let dx = -half; dx < thickness - half; dx++) {
          this.blend(x + dx, y + dy, color);
        }
      }
    }
  }

  polyline(xs: number[], ys: number[], color: Color, thickness = 1): void {
    for (let i = 1; i < xs.length; i++) {
      this.line(xs[i - 1], ys[i - 1], xs[i], ys[i], color, thickness);
    }
  }

  /** Vertical band between two curves (used for min/max envelopes). */
  bandBetween(xs: number[], yLo: number[], yHi: number[], color: Color): void {
    for (let i = 1; i < xs.length; i++) {
      const xa = Math.round(xs[i - 1]);
      const xb = Math.round(xs[i]);
      for (let x = xa; x <= xb; x++) {
        const t = xb === xa ? 0 : (x - xa) / (xb - xa);
        const lo = Math.round(yLo[i - 1] + (yLo[i] - yLo[i - 1]) * t);
        const hi = Math.round(yHi[i - 1] + (yHi[i] - yHi[i - 1]) * t);
        for (let y = Math.min(lo, hi); y <= Math.max(lo, hi); y++) {
          this.blend(x, y, color);
        }
      }
    }
  }

  /** 5x7 bitmap text, scaled by an integer factor; input is case-folded. */
  text(x: number, y: number, s: string, color: Color, scale = 2): void {
    let cx = x;
    for (const ch of s) {
      const glyph = glyphFor(ch);
      for (let col = 0; col < GLYPH_WIDTH; col++) {
        for (let row = 0; row < GLYPH_HEIGHT; row++) {
          if ((glyph[col] >> row) & 1) {
            this.fillRect(cx + col * scale, y + row * scale, scale, scale, color);
          }
        }
      }
      cx += (GLYPH_WIDTH + 1) * scale;
    }
  }

  textWidth(s: string, scale = 2): number {
    return s.length * (GLYPH_WIDTH + 1) * scale;
  }
}
