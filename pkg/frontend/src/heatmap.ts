/**
 * Warm-color heatmap overlay: higher importance draws hotter. The
 * service's 16-bit map PNG decodes to the canvas at display precision,
 * which is all the overlay needs; byte-exact comparisons happen on the
 * raw response bytes kept in the editor state.
 */

/** Blue -> cyan -> green -> yellow -> red ramp. */
export function warmColor(v: number): [number, number, number] {
  const t = Math.min(Math.max(v, 0), 1) * 4;
  if (t < 1) return [0, Math.round(255 * t), 255];
  if (t < 2) return [0, 255, Math.round(255 * (2 - t))];
  if (t < 3) return [Math.round(255 * (t - 2)), 255, 0];
  return [255, Math.round(255 * (4 - t)), 0];
}

export async function paintHeatmap(
  target: HTMLCanvasElement,
  mapPng: Uint8Array,
  opacity: number,
): Promise<void> {
  const bitmap = await createImageBitmap(
    new Blob([mapPng as BlobPart], { type: "image/png" }),
  );
  target.width = bitmap.width;
  target.height = bitmap.height;
  const ctx = target.getContext("2d");
  if (!ctx) throw new Error("no 2d context");
  ctx.drawImage(bitmap, 0, 0);
  const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  const px = data.data;
  for (let i = 0; i < px.length; i += 4) {
    const v = px[i] / 255; // grayscale map: R carries the value
    const [r, g, b] = warmColor(v);
    px[i] = r;
    px[i + 1] = g;
    px[i + 2] = b;
    px[i + 3] = Math.round(255 * opacity * (0.15 + 0.85 * v));
  }
  ctx.putImageData(data, 0, 0);
}
