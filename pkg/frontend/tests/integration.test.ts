/**
 * End-to-end check against a live importance service. Set
 * EDITOR_SERVICE_URL (e.g. http://127.0.0.1:8000) to enable; skipped
 * otherwise so `npm test` works offline.
 *
 * Verifies the editor loop contract: every overlay produced by a
 * scripted edit sequence is byte-identical to a direct /predict call on
 * the raster exported for that same layout, and element scores match
 * /score.
 */

import { describe, expect, it } from "vitest";

import { HttpImportanceApi } from "../src/api.js";
import { EditorCore } from "../src/editor.js";
import type { DesignLayout } from "../src/types.js";
import { segmentationOf } from "../src/types.js";
import { NodePngRasterizer } from "./png.js";

const url = process.env.EDITOR_SERVICE_URL;
const suite = url ? describe : describe.skip;

function baseLayout(): DesignLayout {
  return {
    canvas: { width: 160, height: 120, background: { r: 245, g: 244, b: 240, a: 255 } },
    elements: [
      {
        id: "headline",
        kind: "text",
        bbox: [10, 8, 100, 24],
        z: 2,
        opacity: 1,
        fill: { r: 20, g: 20, b: 40, a: 255 },
        text: { content: "Sale", font_family: "sans-serif", size_pt: 18 },
      },
      {
        id: "hero",
        kind: "shape",
        bbox: [20, 50, 70, 50],
        z: 1,
        opacity: 1,
        fill: { r: 220, g: 90, b: 40, a: 255 },
      },
    ],
  };
}

suite("editor loop against the live service", () => {
  it("overlays are byte-identical to direct /predict on the exported raster", async () => {
    const api = new HttpImportanceApi(url!);
    const rasterizer = new NodePngRasterizer();
    const editor = new EditorCore({
      api,
      rasterizer,
      layout: baseLayout(),
      debounceMs: 10,
    });

    const captured: { layoutJson: string; map: Uint8Array }[] = [];
    const script = [
      { type: "move", id: "hero", dx: 40, dy: 10 },
      { type: "resize", id: "headline", w: 130, h: 30 },
      { type: "recolor", id: "hero", fill: { r: 30, g: 120, b: 210, a: 255 } },
    ] as const;
    for (const action of script) {
      editor.edit(action);
      await editor.flush();
      expect(editor.state.overlay.stale).toBe(false);
      expect(editor.state.overlay.revision).toBe(editor.state.revision);
      captured.push({
        layoutJson: editor.exportLayout(),
        map: editor.state.overlay.mapPng!,
      });
    }

    expect(captured).toHaveLength(3);
    const distinct = new Set(captured.map((c) => Buffer.from(c.map).toString("base64")));
    expect(distinct.size).toBe(3); // each edit really changed the prediction input
    for (const c of captured) {
      const layout = JSON.parse(c.layoutJson) as DesignLayout;
      const raster = await rasterizer.render(layout);
      const direct = await api.predict(raster);
      expect(Buffer.from(direct.mapPng).equals(Buffer.from(c.map))).toBe(true);
    }
  }, 30000);

  it("badge scores equal a direct /score call on the exported raster", async () => {
    const api = new HttpImportanceApi(url!);
    const rasterizer = new NodePngRasterizer();
    const editor = new EditorCore({
      api,
      rasterizer,
      layout: baseLayout(),
      debounceMs: 10,
    });
    editor.edit({ type: "move", id: "headline", dx: 6, dy: 4 });
    await editor.flush();
    const raster = await editor.exportRaster();
    const direct = await api.score(
      raster,
      segmentationOf(JSON.parse(editor.exportLayout()) as DesignLayout),
    );
    expect(editor.state.overlay.scores).toEqual(direct);
  }, 30000);
});
