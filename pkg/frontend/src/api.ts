/**
 * Client for the importance service. At most one prediction request is
 * in flight; starting a new one aborts the old (newest wins).
 */

import type { SegmentationElement } from "./types.js";

export interface PredictResult {
  mapPng: Uint8Array;
  computeTimeMs: number;
}

export interface ImportanceApi {
  predict(png: Uint8Array, signal?: AbortSignal): Promise<PredictResult>;
  score(
    png: Uint8Array,
    segmentation: { elements: SegmentationElement[] },
    signal?: AbortSignal,
  ): Promise<Record<string, number>>;
}

export class HttpImportanceApi implements ImportanceApi {
  constructor(private baseUrl: string) {}

  async predict(png: Uint8Array, signal?: AbortSignal): Promise<PredictResult> {
    const resp = await fetch(`${this.baseUrl}/predict`, {
      method: "POST",
      body: png as BodyInit,
      headers: { "Content-Type": "image/png" },
      signal,
    });
    if (!resp.ok) {
      throw new Error(`predict failed: HTTP ${resp.status}`);
    }
    const bytes = new Uint8Array(await resp.arrayBuffer());
    const timing = parseFloat(resp.headers.get("X-Compute-Time-Ms") ?? "0");
    return { mapPng: bytes, computeTimeMs: timing };
  }

  async score(
    png: Uint8Array,
    segmentation: { elements: SegmentationElement[] },
    signal?: AbortSignal,
  ): Promise<Record<string, number>> {
    const form = new FormData();
    form.append(
      "image",
      new Blob([png as BlobPart], { type: "image/png" }),
      "design.png",
    );
    form.append("segmentation", JSON.stringify(segmentation));
    const resp = await fetch(`${this.baseUrl}/score`, {
      method: "POST",
      body: form,
      signal,
    });
    if (!resp.ok) {
      throw new Error(`score failed: HTTP ${resp.status}`);
    }
    const doc = (await resp.json()) as { scores: Record<string, number> };
    return doc.scores;
  }
}

/** Serializes predictions: a newer request aborts the in-flight one. */
export class NewestWins {
  private controller: AbortController | null = null;
  private generation = 0;

  /** Runs fn with a fresh signal; resolves null if superseded. */
  async run<T>(fn: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const gen = ++this.generation;
    try {
      const result = await fn(controller.signal);
      return gen === this.generation ? result : null;
    } catch (err) {
      if (controller.signal.aborted) {
        return null;
      }
      throw err;
    }
  }
}
