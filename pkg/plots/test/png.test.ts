import { inflateSync } from "node:zlib";
import { describe, expect, it } from "vitest";

import { encodePng } from "../src/png.js";
import { Raster } from "../src/raster.js";

function readChunks(buf: Buffer): Map<string, Buffer[]> {
  const out = new Map<string, Buffer[]>();
  let off = 8;
  while (off < buf.length) {
    const len = buf.readUInt32BE(off);
    const type = buf.subarray(off + 4, off + 8).toString("ascii");
    const data = buf.subarray(off + 8, off + 8 + len);
    out.set(type, (out.get(type) ?? []).concat([Buffer.from(data)]));
    off += 12 + len;
  }
  return out;
}

describe("encodePng", () => {
  it("writes a decodable RGBA image with the right dimensions", () => {
    const r = new Raster(37, 23);
    r.fillRect(0, 0, 10, 10, [255, 0, 0, 255]);
    const png = encodePng(r.width, r.height, r.data);
    expect([...png.subarray(0, 8)]).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    const chunks = readChunks(png);
    const ihdr = chunks.get("IHDR")![0];
    expect(ihdr.readUInt32BE(0)).toBe(37);
    expect(ihdr.readUInt32BE(4)).toBe(23);
    expect(ihdr[8]).toBe(8);
    expect(ihdr[9]).toBe(6);
    const raw = inflateSync(Buffer.concat(chunks.get("IDAT")!));
    expect(raw.length).toBe(23 * (1 + 37 * 4));
    // top-left pixel is the red rectangle (after the filter byte)
    expect([...raw.subarray(1, 5)]).toEqual([255, 0, 0, 255]);
    expect(chunks.has("IEND")).toBe(true);
  });

  it("stamps 150 dpi into pHYs", () => {
    const r = new Raster(4, 4);
    const chunks = readChunks(encodePng(4, 4, r.data));
    const phys = chunks.get("pHYs")![0];
    expect(phys.readUInt32BE(0)).toBe(Math.round(150 / 0.0254));
    expect(phys[8]).toBe(1);
  });

  it("rejects a mismatched buffer", () => {
    expect(() => encodePng(10, 10, new Uint8Array(3))).toThrowError(/framebuffer/);
  });
});

describe("raster text", () => {
  it("renders visible glyphs", () => {
    const r = new Raster(120, 24);
    r.text(2, 2, "e(n) = 0.95", [0, 0, 0, 255], 2);
    let dark = 0;
    for (let i = 0; i < r.data.length; i += 4) {
      if (r.data[i] < 128) dark++;
    }
    expect(dark).toBeGreaterThan(50);
  });
});
