/**
 * Editor core: local-first layout editing with debounced, newest-wins
 * importance refreshes.
 *
 * Edits always apply synchronously to the in-memory layout; the network
 * never blocks the UI. Each edit schedules a debounced refresh that
 * rasterizes the current layout, posts it to /predict and /score, and
 * installs the overlay if it still corresponds to the newest layout
 * revision. When the service is unreachable the previous overlay is
 * kept and flagged stale; editing continues.
 */

import type { ImportanceApi } from "./api.js";
import { NewestWins } from "./api.js";
import { debounce } from "./debounce.js";
import type {
  DesignLayout,
  EditAction,
  EditorState,
  LayoutElement,
} from "./types.js";
import { segmentationOf } from "./types.js";

export interface Rasterizer {
  /** PNG encoding of the layout; must be a pure function of the layout. */
  render(layout: DesignLayout): Promise<Uint8Array>;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export interface EditorOptions {
  api: ImportanceApi;
  rasterizer: Rasterizer;
  layout?: DesignLayout;
  debounceMs?: number;
  onChange?: (state: EditorState) => void;
}

export const DEFAULT_DEBOUNCE_MS = 250;
export const STORAGE_KEY = "visimp-editor-layout";

export function emptyLayout(width = 480, height = 360): DesignLayout {
  return {
    canvas: { width, height, background: { r: 255, g: 255, b: 255, a: 255 } },
    elements: [],
  };
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(Math.max(v, lo), hi);
}

export class EditorCore {
  readonly state: EditorState;
  private api: ImportanceApi;
  private rasterizer: Rasterizer;
  private refreshDebounce;
  private inflight = new NewestWins();
  private onChange?: (state: EditorState) => void;
  /** Counts requests actually issued; the debounce tests read this. */
  requestsIssued = 0;

  constructor(opts: EditorOptions) {
    this.api = opts.api;
    this.rasterizer = opts.rasterizer;
    this.onChange = opts.onChange;
    this.state = {
      layout: opts.layout ?? emptyLayout(),
      selection: null,
      overlay: { mapPng: null, scores: {}, revision: -1, stale: false },
      dirty: false,
      revision: 0,
    };
    this.refreshDebounce = debounce(
      opts.debounceMs ?? DEFAULT_DEBOUNCE_MS,
      () => void this.refreshNow(),
    );
  }

  element(id: string): LayoutElement | undefined {
    return this.state.layout.elements.find((e) => e.id === id);
  }

  select(id: string | null): void {
    this.state.selection = id;
    this.notify();
  }

  /** Applies the action locally and schedules an overlay refresh. */
  edit(action: EditAction): void {
    const { layout } = this.state;
    const need = (id: string): LayoutElement => {
      const el = this.element(id);
      if (!el) throw new Error(`no element ${id}`);
      return el;
    };
    switch (action.type) {
      case "move": {
        const el = need(action.id);
        const [x, y, w, h] = el.bbox;
        el.bbox = [
          clamp(x + action.dx, 0, layout.canvas.width - w),
          clamp(y + action.dy, 0, layout.canvas.height - h),
          w,
          h,
        ];
        break;
      }
      case "resize": {
        const el = need(action.id);
        const [x, y] = el.bbox;
        el.bbox = [
          x,
          y,
          clamp(Math.round(action.w), 1, layout.canvas.width - x),
          clamp(Math.round(action.h), 1, layout.canvas.height - y),
        ];
        break;
      }
      case "recolor":
        need(action.id).fill = { ...action.fill };
        break;
      case "refont": {
        const el = need(action.id);
        if (el.kind !== "text" || !el.text) {
          throw new Error(`element ${action.id} is not text`);
        }
        if (action.font_family !== undefined) el.text.font_family = action.font_family;
        if (action.size_pt !== undefined) el.text.size_pt = action.size_pt;
        break;
      }
      case "reopacity":
        need(action.id).opacity = clamp(action.opacity, 0, 1);
        break;
      case "add": {
        if (this.element(action.element.id)) {
          throw new Error(`duplicate element id ${action.element.id}`);
        }
        layout.elements.push(structuredClone(action.element));
        break;
      }
      case "delete": {
        const i = layout.elements.findIndex((e) => e.id === action.id);
        if (i < 0) throw new Error(`no element ${action.id}`);
        layout.elements.splice(i, 1);
        if (this.state.selection === action.id) this.state.selection = null;
        break;
      }
    }
    this.state.revision += 1;
    this.state.dirty = true;
    this.notify();
    this.refreshDebounce.call();
  }

  /** Cancels any pending debounced refresh and refreshes immediately. */
  flush(): Promise<void> {
    this.refreshDebounce.cancel();
    return this.refreshNow();
  }

  /**
   * Rasterizes the current layout and fetches overlay + scores now,
   * bypassing the debounce (the debounced path lands here too).
   */
  async refreshNow(): Promise<void> {
    const revision = this.state.revision;
    const layout = structuredClone(this.state.layout);
    this.requestsIssued += 1;
    const result = await this.inflight.run(async (signal) => {
      const png = await this.rasterizer.render(layout);
      const prediction = await this.api.predict(png, signal);
      const scores =
        layout.elements.length > 0
          ? await this.api.score(png, segmentationOf(layout), signal)
          : {};
      return { prediction, scores };
    }).catch(() => {
      // service unreachable: keep editing, mark what we show as stale
      if (this.state.overlay.revision !== this.state.revision) {
        this.state.overlay.stale = true;
      }
      this.notify();
      return null;
    });
    if (result === null) return; // superseded or failed
    // install only if nothing newer has been edited meanwhile
    if (revision === this.state.revision) {
      this.state.overlay = {
        mapPng: result.prediction.mapPng,
        scores: result.scores,
        revision,
        stale: false,
      };
      this.state.dirty = false;
      this.notify();
    }
  }

  /** Layout JSON, stable for export -> import round trips. */
  exportLayout(): string {
    return JSON.stringify(this.state.layout);
  }

  importLayout(json: string): void {
    const layout = JSON.parse(json) as DesignLayout;
    if (!layout.canvas || !Array.isArray(layout.elements)) {
      throw new Error("not a design layout");
    }
    this.state.layout = layout;
    this.state.selection = null;
    this.state.revision += 1;
    this.state.dirty = true;
    this.notify();
    this.refreshDebounce.call();
  }

  /** PNG of the current layout — the same bytes the service receives. */
  exportRaster(): Promise<Uint8Array> {
    return this.rasterizer.render(structuredClone(this.state.layout));
  }

  saveTo(storage: StorageLike): void {
    storage.setItem(STORAGE_KEY, this.exportLayout());
  }

  loadFrom(storage: StorageLike): boolean {
    const saved = storage.getItem(STORAGE_KEY);
    if (!saved) return false;
    this.importLayout(saved);
    return true;
  }

  private notify(): void {
    this.onChange?.(this.state);
  }
}
