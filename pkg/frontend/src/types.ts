/**
 * Layout and editor state types. Field names follow the service's wire
 * schema (see GET /schema on the importance service), so layouts can be
 * exported, persisted, and re-imported without translation.
 */

export interface RGBA {
  r: number;
  g: number;
  b: number;
  a: number;
}

export interface Canvas {
  width: number;
  height: number;
  background: RGBA;
}

export interface TextPayload {
  content: string;
  font_family: string;
  size_pt: number;
}

export type ElementKind = "text" | "image" | "shape";

export interface LayoutElement {
  id: string;
  kind: ElementKind;
  /** (x, y, w, h) in canvas pixels */
  bbox: [number, number, number, number];
  z: number;
  opacity: number;
  fill: RGBA;
  text?: TextPayload;
  image_png_base64?: string;
}

export interface DesignLayout {
  canvas: Canvas;
  elements: LayoutElement[];
}

/** Segmentation kinds understood by POST /score. */
export type SegmentKind =
  | "title"
  | "axis_label"
  | "paragraph"
  | "legend"
  | "data"
  | "image"
  | "other";

export interface SegmentationElement {
  id: string;
  kind: SegmentKind;
  bbox: [number, number, number, number];
}

export interface Overlay {
  /** Raw 16-bit PNG bytes exactly as returned by POST /predict. */
  mapPng: Uint8Array | null;
  scores: Record<string, number>;
  /** Layout revision the overlay was computed for. */
  revision: number;
  /** True when the service could not be reached for the latest layout. */
  stale: boolean;
}

export interface EditorState {
  layout: DesignLayout;
  selection: string | null;
  overlay: Overlay;
  dirty: boolean;
  revision: number;
}

export type EditAction =
  | { type: "move"; id: string; dx: number; dy: number }
  | { type: "resize"; id: string; w: number; h: number }
  | { type: "recolor"; id: string; fill: RGBA }
  | { type: "refont"; id: string; font_family?: string; size_pt?: number }
  | { type: "reopacity"; id: string; opacity: number }
  | { type: "add"; element: LayoutElement }
  | { type: "delete"; id: string };

export const SEGMENT_KIND_BY_ELEMENT: Record<ElementKind, SegmentKind> = {
  text: "paragraph",
  image: "image",
  shape: "other",
};

export function segmentationOf(layout: DesignLayout): {
  elements: SegmentationElement[];
} {
  return {
    elements: layout.elements.map((e) => ({
      id: e.id,
      kind: SEGMENT_KIND_BY_ELEMENT[e.kind],
      bbox: e.bbox,
    })),
  };
}
