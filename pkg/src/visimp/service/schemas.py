"""Pydantic models for the HTTP API and the published wire formats.

DesignLayout is the persistence/interchange format for the editor: the
client rasterizes it and posts bitmaps, so the server never renders —
the layout travels only for element boxes and save/load.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator


class SegmentationElement(BaseModel):
    id: str
    kind: Literal["title", "axis_label", "paragraph", "legend", "data", "image", "other"]
    bbox: tuple[int, int, int, int] = Field(description="(x, y, w, h) in pixels")


class SegmentationIn(BaseModel):
    elements: list[SegmentationElement]


class ScoreResponse(BaseModel):
    scores: dict[str, float]
    compute_time_ms: float


class HealthResponse(BaseModel):
    status: str
    model_loaded: bool


class RGBA(BaseModel):
    r: int = Field(ge=0, le=255)
    g: int = Field(ge=0, le=255)
    b: int = Field(ge=0, le=255)
    a: int = Field(default=255, ge=0, le=255)


class Canvas(BaseModel):
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    background: RGBA = RGBA(r=255, g=255, b=255, a=255)


class TextPayload(BaseModel):
    content: str
    font_family: str = "sans-serif"
    size_pt: float = Field(default=16, gt=0)


class LayoutElement(BaseModel):
    id: str
    kind: Literal["text", "image", "shape"]
    bbox: tuple[int, int, int, int]
    z: int = 0
    opacity: float = Field(default=1.0, ge=0.0, le=1.0)
    fill: RGBA = RGBA(r=0, g=0, b=0, a=255)
    text: Optional[TextPayload] = None
    image_png_base64: Optional[str] = None


class DesignLayout(BaseModel):
    canvas: Canvas
    elements: list[LayoutElement] = []

    @field_validator("elements")
    @classmethod
    def _unique_ids_inside_canvas(cls, v, info):
        ids = [e.id for e in v]
        if len(set(ids)) != len(ids):
            raise ValueError("element ids must be unique")
        canvas = info.data.get("canvas")
        if canvas is not None:
            for e in v:
                x, y, w, h = e.bbox
                if w < 1 or h < 1 or x < 0 or y < 0 or x + w > canvas.width or y + h > canvas.height:
                    raise ValueError(f"element {e.id}: bbox outside canvas")
        return v


class ClickPointModel(BaseModel):
    x: float
    y: float
    t: Optional[float] = Field(default=None, description="milliseconds")


class ClickParticipantModel(BaseModel):
    id: str
    points: list[ClickPointModel] = []


class ClickLogModel(BaseModel):
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    participants: list[ClickParticipantModel]


class AnnotationManifestModel(BaseModel):
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    masks: list[str] = Field(description="per-participant binary-mask PNG paths")


class CropParams(BaseModel):
    aspect: Optional[str] = Field(default=None, description='"W:H", e.g. "1:4"')
    width: Optional[int] = Field(default=None, ge=1)
    height: Optional[int] = Field(default=None, ge=1)
    method: Literal["importance", "edge"] = "importance"


class ThumbnailParams(BaseModel):
    side: int = Field(ge=1)
    method: Literal["importance", "edge"] = "importance"


WIRE_SCHEMAS = {
    "click_log": ClickLogModel,
    "annotation_manifest": AnnotationManifestModel,
    "segmentation": SegmentationIn,
    "score_response": ScoreResponse,
    "design_layout": DesignLayout,
    "crop_params": CropParams,
    "thumbnail_params": ThumbnailParams,
}
