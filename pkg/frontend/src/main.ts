/**
 * DOM wiring for the editor: canvas stack, drag/resize interactions,
 * property controls, score badges, overlay opacity, export/import.
 */

import { HttpImportanceApi } from "./api.js";
import { EditorCore, emptyLayout } from "./editor.js";
import { paintHeatmap } from "./heatmap.js";
import { CanvasRasterizer, drawLayout } from "./render.js";
import type { EditorState, LayoutElement, RGBA } from "./types.js";

const $ = <T extends HTMLElement>(sel: string): T => {
  const el = document.querySelector(sel);
  if (!el) throw new Error(`missing ${sel}`);
  return el as T;
};

const designCanvas = $<HTMLCanvasElement>("#design");
const overlayCanvas = $<HTMLCanvasElement>("#overlay");
const badgeList = $<HTMLUListElement>("#badges");
const staleBox = $<HTMLSpanElement>("#stale");
const serverInput = $<HTMLInputElement>("#server");
const overlayOpacity = $<HTMLInputElement>("#overlay-opacity");
const fillInput = $<HTMLInputElement>("#fill");
const opacityInput = $<HTMLInputElement>("#opacity");
const fontSizeInput = $<HTMLInputElement>("#font-size");
const fontFamilyInput = $<HTMLInputElement>("#font-family");
const textContent = $<HTMLTextAreaElement>("#text-content");

serverInput.value = localStorage.getItem("visimp-server") ?? "http://localhost:8000";

let editor = buildEditor(serverInput.value);

function buildEditor(serverUrl: string): EditorCore {
  const core = new EditorCore({
    api: new HttpImportanceApi(serverUrl),
    rasterizer: new CanvasRasterizer(),
    layout: emptyLayout(480, 360),
    onChange: render,
  });
  if (!core.loadFrom(localStorage)) {
    seed(core);
  }
  return core;
}

function seed(core: EditorCore): void {
  core.edit({
    type: "add",
    element: {
      id: "title",
      kind: "text",
      bbox: [24, 20, 300, 48],
      z: 2,
      opacity: 1,
      fill: { r: 20, g: 20, b: 60, a: 255 },
      text: { content: "Weekend fun run", font_family: "sans-serif", size_pt: 28 },
    },
  });
  core.edit({
    type: "add",
    element: {
      id: "block",
      kind: "shape",
      bbox: [40, 120, 180, 140],
      z: 1,
      opacity: 1,
      fill: { r: 240, g: 120, b: 60, a: 255 },
    },
  });
  core.edit({
    type: "add",
    element: {
      id: "caption",
      kind: "text",
      bbox: [250, 180, 200, 90],
      z: 2,
      opacity: 1,
      fill: { r: 40, g: 40, b: 40, a: 255 },
      text: {
        content: "Saturday 9am at the river loop. All paces welcome.",
        font_family: "sans-serif",
        size_pt: 14,
      },
    },
  });
}

function hexColor(c: RGBA): string {
  const h = (v: number) => v.toString(16).padStart(2, "0");
  return `#${h(c.r)}${h(c.g)}${h(c.b)}`;
}

function parseHex(hex: string, a = 255): RGBA {
  return {
    r: parseInt(hex.slice(1, 3), 16),
    g: parseInt(hex.slice(3, 5), 16),
    b: parseInt(hex.slice(5, 7), 16),
    a,
  };
}

let lastOverlayRevision = -2;

async function render(state: EditorState): Promise<void> {
  designCanvas.width = state.layout.canvas.width;
  designCanvas.height = state.layout.canvas.height;
  const ctx = designCanvas.getContext("2d");
  if (ctx) {
    await drawLayout(ctx, state.layout);
    const sel = state.selection && editor.element(state.selection);
    if (sel) {
      const [x, y, w, h] = sel.bbox;
      ctx.save();
      ctx.strokeStyle = "#2266ff";
      ctx.setLineDash([4, 3]);
      ctx.strokeRect(x + 0.5, y + 0.5, w - 1, h - 1);
      ctx.fillStyle = "#2266ff";
      ctx.fillRect(x + w - 6, y + h - 6, 6, 6); // resize handle
      ctx.restore();
    }
  }
  staleBox.style.display = state.overlay.stale ? "inline" : "none";
  if (state.overlay.mapPng && state.overlay.revision !== lastOverlayRevision) {
    lastOverlayRevision = state.overlay.revision;
    await paintHeatmap(
      overlayCanvas,
      state.overlay.mapPng,
      parseFloat(overlayOpacity.value),
    );
  }
  badgeList.innerHTML = "";
  const entries = Object.entries(state.overlay.scores).sort((a, b) => b[1] - a[1]);
  for (const [id, score] of entries) {
    const li = document.createElement("li");
    li.textContent = `${id}: ${score.toFixed(3)}`;
    if (id === state.selection) li.classList.add("selected");
    badgeList.appendChild(li);
  }
  const sel = state.selection && editor.element(state.selection);
  $<HTMLDivElement>("#props").style.visibility = sel ? "visible" : "hidden";
  if (sel) {
    fillInput.value = hexColor(sel.fill);
    opacityInput.value = String(sel.opacity);
    const isText = sel.kind === "text" && sel.text;
    $<HTMLDivElement>("#text-props").style.display = isText ? "block" : "none";
    if (isText && sel.text) {
      fontSizeInput.value = String(sel.text.size_pt);
      fontFamilyInput.value = sel.text.font_family;
      textContent.value = sel.text.content;
    }
  }
  editor.saveTo(localStorage);
}

// ------------------------------------------------------------ interactions

type DragMode = { kind: "move" | "resize"; id: string; lastX: number; lastY: number };
let drag: DragMode | null = null;

function canvasPoint(ev: MouseEvent): [number, number] {
  const rect = designCanvas.getBoundingClientRect();
  return [ev.clientX - rect.left, ev.clientY - rect.top];
}

function hitTest(x: number, y: number): LayoutElement | null {
  const ordered = [...editor.state.layout.elements].sort((a, b) => b.z - a.z);
  for (const el of ordered) {
    const [ex, ey, ew, eh] = el.bbox;
    if (x >= ex && x < ex + ew && y >= ey && y < ey + eh) return el;
  }
  return null;
}

designCanvas.addEventListener("mousedown", (ev) => {
  const [x, y] = canvasPoint(ev);
  const el = hitTest(x, y);
  editor.select(el?.id ?? null);
  if (!el) return;
  const [ex, ey, ew, eh] = el.bbox;
  const onHandle = x >= ex + ew - 8 && y >= ey + eh - 8;
  drag = { kind: onHandle ? "resize" : "move", id: el.id, lastX: x, lastY: y };
});

window.addEventListener("mousemove", (ev) => {
  if (!drag) return;
  const [x, y] = canvasPoint(ev);
  const el = editor.element(drag.id);
  if (!el) return;
  if (drag.kind === "move") {
    editor.edit({ type: "move", id: drag.id, dx: x - drag.lastX, dy: y - drag.lastY });
  } else {
    editor.edit({
      type: "resize",
      id: drag.id,
      w: el.bbox[2] + (x - drag.lastX),
      h: el.bbox[3] + (y - drag.lastY),
    });
  }
  drag.lastX = x;
  drag.lastY = y;
});

window.addEventListener("mouseup", () => (drag = null));

// ----------------------------------------------------------------- controls

let nextId = 1;

$<HTMLButtonElement>("#add-text").addEventListener("click", () => {
  editor.edit({
    type: "add",
    element: {
      id: `text-${nextId++}`,
      kind: "text",
      bbox: [30, 30, 180, 40],
      z: 2,
      opacity: 1,
      fill: { r: 20, g: 20, b: 20, a: 255 },
      text: { content: "New text", font_family: "sans-serif", size_pt: 18 },
    },
  });
});

$<HTMLButtonElement>("#add-shape").addEventListener("click", () => {
  editor.edit({
    type: "add",
    element: {
      id: `shape-${nextId++}`,
      kind: "shape",
      bbox: [60, 60, 120, 80],
      z: 1,
      opacity: 1,
      fill: { r: 90, g: 160, b: 220, a: 255 },
    },
  });
});

$<HTMLInputElement>("#add-image").addEventListener("change", async (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  const bytes = new Uint8Array(await file.arrayBuffer());
  let b64 = "";
  for (const b of bytes) b64 += String.fromCharCode(b);
  editor.edit({
    type: "add",
    element: {
      id: `image-${nextId++}`,
      kind: "image",
      bbox: [80, 80, 160, 120],
      z: 1,
      opacity: 1,
      fill: { r: 0, g: 0, b: 0, a: 0 },
      image_png_base64: btoa(b64),
    },
  });
  input.value = "";
});

$<HTMLButtonElement>("#delete").addEventListener("click", () => {
  if (editor.state.selection) {
    editor.edit({ type: "delete", id: editor.state.selection });
  }
});

fillInput.addEventListener("input", () => {
  if (editor.state.selection) {
    editor.edit({
      type: "recolor",
      id: editor.state.selection,
      fill: parseHex(fillInput.value),
    });
  }
});

opacityInput.addEventListener("input", () => {
  if (editor.state.selection) {
    editor.edit({
      type: "reopacity",
      id: editor.state.selection,
      opacity: parseFloat(opacityInput.value),
    });
  }
});

fontSizeInput.addEventListener("change", () => {
  if (editor.state.selection) {
    editor.edit({
      type: "refont",
      id: editor.state.selection,
      size_pt: parseFloat(fontSizeInput.value),
    });
  }
});

fontFamilyInput.addEventListener("change", () => {
  if (editor.state.selection) {
    editor.edit({
      type: "refont",
      id: editor.state.selection,
      font_family: fontFamilyInput.value,
    });
  }
});

textContent.addEventListener("change", () => {
  const sel = editor.state.selection && editor.element(editor.state.selection);
  if (sel && sel.kind === "text" && sel.text) {
    sel.text.content = textContent.value;
    editor.edit({ type: "move", id: sel.id, dx: 0, dy: 0 }); // bump revision
  }
});

overlayOpacity.addEventListener("input", () => {
  const { mapPng } = editor.state.overlay;
  if (mapPng) {
    void paintHeatmap(overlayCanvas, mapPng, parseFloat(overlayOpacity.value));
  }
});

serverInput.addEventListener("change", () => {
  localStorage.setItem("visimp-server", serverInput.value);
  const layout = editor.exportLayout();
  editor = buildEditor(serverInput.value);
  editor.importLayout(layout);
});

function download(name: string, blob: Blob): void {
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = name;
  a.click();
  URL.revokeObjectURL(a.href);
}

$<HTMLButtonElement>("#export-json").addEventListener("click", () => {
  download("design.json", new Blob([editor.exportLayout()], { type: "application/json" }));
});

$<HTMLButtonElement>("#export-png").addEventListener("click", async () => {
  const png = await editor.exportRaster();
  download("design.png", new Blob([png as BlobPart], { type: "image/png" }));
});

$<HTMLInputElement>("#import-json").addEventListener("change", async (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  editor.importLayout(await file.text());
  input.value = "";
});

void editor.refreshNow();
