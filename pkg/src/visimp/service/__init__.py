"""FastAPI service wrapping the core package."""

from .app import ComputeGate, PredictorHolder, Settings, create_app
from .schemas import (
    AnnotationManifestModel,
    ClickLogModel,
    CropParams,
    DesignLayout,
    ScoreResponse,
    SegmentationIn,
    ThumbnailParams,
    WIRE_SCHEMAS,
)

__all__ = [
    "AnnotationManifestModel",
    "ClickLogModel",
    "ComputeGate",
    "CropParams",
    "DesignLayout",
    "PredictorHolder",
    "ScoreResponse",
    "SegmentationIn",
    "Settings",
    "ThumbnailParams",
    "WIRE_SCHEMAS",
    "create_app",
]
