/** Shared test doubles: a recording API stub and a trivial rasterizer. */

import type { ImportanceApi, PredictResult } from "../src/api.js";
import type { Rasterizer } from "../src/editor.js";
import type { DesignLayout, SegmentationElement } from "../src/types.js";

export class FakeApi implements ImportanceApi {
  predictCalls: Uint8Array[] = [];
  scoreCalls: { elements: SegmentationElement[] }[] = [];
  failNext = false;
  /** When set, predict() parks until the deferred resolves. */
  gate: Promise<void> | null = null;

  async predict(png: Uint8Array, signal?: AbortSignal): Promise<PredictResult> {
    if (this.failNext) {
      this.failNext = false;
      throw new Error("service down");
    }
    this.predictCalls.push(png);
    const n = this.predictCalls.length;
    if (this.gate) {
      await this.gate;
      if (signal?.aborted) throw new DOMException("aborted", "AbortError");
    }
    return { mapPng: new Uint8Array([0x42, n & 0xff, (n >> 8) & 0xff]), computeTimeMs: 1 };
  }

  async score(
    _png: Uint8Array,
    segmentation: { elements: SegmentationElement[] },
    signal?: AbortSignal,
  ): Promise<Record<string, number>> {
    if (signal?.aborted) throw new DOMException("aborted", "AbortError");
    this.scoreCalls.push(segmentation);
    const out: Record<string, number> = {};
    segmentation.elements.forEach((e, i) => {
      out[e.id] = (i + 1) / (segmentation.elements.length + 1);
    });
    return out;
  }
}

/** Deterministic stand-in renderer: bytes are a digest of the layout. */
export class JsonRasterizer implements Rasterizer {
  async render(layout: DesignLayout): Promise<Uint8Array> {
    return new TextEncoder().encode(JSON.stringify(layout));
  }
}
