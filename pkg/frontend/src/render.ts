/**
 * Canvas rasterizer: the browser-side pure function from layout to
 * pixels. Identical layouts draw identical rasters (fixed fonts
 * assumed), so request bodies are reproducible.
 */

import type { Rasterizer } from "./editor.js";
import type { DesignLayout, LayoutElement, RGBA } from "./types.js";

function cssColor(c: RGBA): string {
  return `rgba(${c.r},${c.g},${c.b},${c.a / 255})`;
}

const imageCache = new Map<string, HTMLImageElement>();

function imageFor(b64: string): Promise<HTMLImageElement> {
  const cached = imageCache.get(b64);
  if (cached) return Promise.resolve(cached);
  return new Promise((resolve, reject) => {
    const img = new Image();
    img.onload = () => {
      imageCache.set(b64, img);
      resolve(img);
    };
    img.onerror = () => reject(new Error("bad embedded image"));
    img.src = `data:image/png;base64,${b64}`;
  });
}

async function drawElement(
  ctx: CanvasRenderingContext2D,
  el: LayoutElement,
): Promise<void> {
  const [x, y, w, h] = el.bbox;
  ctx.save();
  ctx.globalAlpha = el.opacity;
  if (el.kind === "shape") {
    ctx.fillStyle = cssColor(el.fill);
    ctx.fillRect(x, y, w, h);
  } else if (el.kind === "text" && el.text) {
    ctx.fillStyle = cssColor(el.fill);
    ctx.font = `${el.text.size_pt}px ${el.text.font_family}`;
    ctx.textBaseline = "top";
    ctx.beginPath();
    ctx.rect(x, y, w, h);
    ctx.clip();
    const lineHeight = el.text.size_pt * 1.3;
    const words = el.text.content.split(/\s+/);
    let line = "";
    let yy = y;
    for (const word of words) {
      const probe = line ? `${line} ${word}` : word;
      if (ctx.measureText(probe).width > w && line) {
        ctx.fillText(line, x, yy);
        line = word;
        yy += lineHeight;
        if (yy > y + h) break;
      } else {
        line = probe;
      }
    }
    if (line && yy <= y + h) ctx.fillText(line, x, yy);
  } else if (el.kind === "image" && el.image_png_base64) {
    try {
      const img = await imageFor(el.image_png_base64);
      ctx.drawImage(img, x, y, w, h);
    } catch {
      ctx.fillStyle = "rgba(200,200,200,1)";
      ctx.fillRect(x, y, w, h);
    }
  }
  ctx.restore();
}

export async function drawLayout(
  ctx: CanvasRenderingContext2D,
  layout: DesignLayout,
): Promise<void> {
  const { width, height, background } = layout.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = cssColor(background);
  ctx.fillRect(0, 0, width, height);
  const ordered = [...layout.elements].sort((a, b) => a.z - b.z);
  for (const el of ordered) {
    await drawElement(ctx, el);
  }
}

export class CanvasRasterizer implements Rasterizer {
  private canvas = document.createElement("canvas");

  async render(layout: DesignLayout): Promise<Uint8Array> {
    this.canvas.width = layout.canvas.width;
    this.canvas.height = layout.canvas.height;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) throw new Error("no 2d context");
    await drawLayout(ctx, layout);
    const blob: Blob = await new Promise((resolve, reject) =>
      this.canvas.toBlob(
        (b) => (b ? resolve(b) : reject(new Error("toBlob failed"))),
        "image/png",
      ),
    );
    return new Uint8Array(await blob.arrayBuffer());
  }
}
