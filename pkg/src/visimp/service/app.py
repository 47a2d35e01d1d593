"""HTTP service exposing prediction, scoring, retargeting and thumbnailing.

The service is a pure function of (loaded checkpoint, request): handlers
share nothing mutable beyond an atomically swappable predictor snapshot,
so identical bodies always produce identical responses and concurrent
requests cannot interleave state. A FIFO compute gate bounds concurrent
heavy work to the worker-pool size; requests that cannot start within
the queue timeout get 503.

Configuration (env, overridable via Settings):
  VISIMP_PORT           listen port (serve entrypoint)
  VISIMP_CKPT           checkpoint path for the toy-net predictor
  VISIMP_EXTMAP         16-bit map PNG served by the external-map predictor
  VISIMP_MAXPX          request size cap, pixels per side (default 1500)
  VISIMP_WORKERS        compute gate width (default: cpu count)
  VISIMP_QUEUE_TIMEOUT  seconds a request may wait for the gate (default 10)
"""

from __future__ import annotations

import io
import json
import os
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from PIL import Image, UnidentifiedImageError

from ..errors import DataError, ParameterError
from ..metrics import ElementSegmentation, score_elements
from ..predictor import CheckpointPredictor, ExternalMapPredictor, ImportancePredictor
from ..raster import BitmapImage, ImportanceMap, decode_image, edge_energy, encode_image, encode_map
from ..retarget import CropSpec, best_crop, retarget_image
from ..thumbnail import make_thumbnail
from .schemas import (
    CropParams,
    HealthResponse,
    ScoreResponse,
    SegmentationIn,
    WIRE_SCHEMAS,
)

DEFAULT_MAX_PX = 1500


@dataclass
class Settings:
    checkpoint_path: Optional[str] = None
    external_map_path: Optional[str] = None
    max_px: int = DEFAULT_MAX_PX
    workers: int = 0  # 0 -> cpu count
    queue_timeout: float = 10.0

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            checkpoint_path=os.environ.get("VISIMP_CKPT") or None,
            external_map_path=os.environ.get("VISIMP_EXTMAP") or None,
            max_px=int(os.environ.get("VISIMP_MAXPX", DEFAULT_MAX_PX)),
            workers=int(os.environ.get("VISIMP_WORKERS", 0)),
            queue_timeout=float(os.environ.get("VISIMP_QUEUE_TIMEOUT", 10.0)),
        )


class PredictorHolder:
    """Atomic snapshot of the active predictor; reload swaps, never mutates."""

    def __init__(self, predictor: ImportancePredictor | None = None):
        self._predictor = predictor

    def get(self) -> ImportancePredictor | None:
        return self._predictor

    def swap(self, predictor: ImportancePredictor | None) -> None:
        self._predictor = predictor


class ComputeGate:
    """FIFO handoff semaphore: at most `limit` holders, waiters in order."""

    def __init__(self, limit: int, timeout: float):
        self._limit = max(1, limit)
        self._timeout = timeout
        self._lock = threading.Lock()
        self._active = 0
        self._waiters: deque[threading.Event] = deque()

    def acquire(self) -> bool:
        with self._lock:
            if self._active < self._limit and not self._waiters:
                self._active += 1
                return True
            ev = threading.Event()
            self._waiters.append(ev)
        if ev.wait(self._timeout):
            return True
        with self._lock:
            if ev.is_set():  # granted in the race with the timeout
                return True
            self._waiters.remove(ev)
            return False

    def release(self) -> None:
        with self._lock:
            if self._waiters:
                self._waiters.popleft().set()  # slot handed over directly
            else:
                self._active -= 1


def _png_dimensions(data: bytes) -> tuple[int, int]:
    try:
        img = Image.open(io.BytesIO(data))
        if img.format != "PNG":
            raise HTTPException(400, f"body must be a PNG image, got {img.format}")
        return img.size
    except HTTPException:
        raise
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise HTTPException(400, f"undecodable image: {exc}") from exc


def _quantize(map_: ImportanceMap) -> ImportanceMap:
    # round through the 16-bit wire encoding so server-side scores equal
    # what a client computes from the returned PNG
    return ImportanceMap(np.round(map_.values * 65535.0) / 65535.0)


def create_app(
    settings: Settings | None = None,
    predictor: ImportancePredictor | None = None,
) -> FastAPI:
    settings = settings or Settings.from_env()
    if predictor is None:
        if settings.checkpoint_path:
            predictor = CheckpointPredictor.from_file(settings.checkpoint_path)
        elif settings.external_map_path:
            predictor = ExternalMapPredictor(settings.external_map_path)
    holder = PredictorHolder(predictor)
    workers = settings.workers or (os.cpu_count() or 2)
    gate = ComputeGate(workers, settings.queue_timeout)

    app = FastAPI(title="visimp", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["*"],
    )
    app.state.holder = holder
    app.state.settings = settings

    def check_size(data: bytes) -> None:
        w, h = _png_dimensions(data)
        if w > settings.max_px or h > settings.max_px:
            raise HTTPException(
                413, f"image {w}x{h} exceeds {settings.max_px} px per side"
            )

    def current_predictor() -> ImportancePredictor:
        p = holder.get()
        if p is None:
            raise HTTPException(503, "model not loaded")
        return p

    def gated(fn, *args):
        if not gate.acquire():
            raise HTTPException(503, "compute queue timeout")
        try:
            return fn(*args)
        finally:
            gate.release()

    def importance_for(image: BitmapImage, method: str) -> ImportanceMap:
        if method == "edge":
            return edge_energy(image)
        return current_predictor().predict(image)

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        return HealthResponse(status="ok", model_loaded=holder.get() is not None)

    @app.get("/schema")
    def schema():
        return {name: model.model_json_schema() for name, model in WIRE_SCHEMAS.items()}

    # PNG-in/PNG-out endpoints take the raw request body; only /score,
    # which pairs an image with JSON, uses multipart framing
    @app.post("/predict", response_class=Response)
    async def predict(request: Request):
        data = await request.body()
        check_size(data)
        image = _decode_or_400(data)
        t0 = time.perf_counter()
        map_ = gated(current_predictor().predict, image)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        return Response(
            content=encode_map(map_),
            media_type="image/png",
            headers={"X-Compute-Time-Ms": f"{elapsed_ms:.3f}"},
        )

    @app.post("/score", response_model=ScoreResponse)
    async def score(
        image: UploadFile = File(...),
        segmentation: str = Form(...),
    ):
        data = await image.read()
        check_size(data)
        bitmap = _decode_or_400(data)
        try:
            seg_model = SegmentationIn.model_validate_json(segmentation)
        except ValueError as exc:
            raise HTTPException(400, f"malformed segmentation: {exc}") from exc
        try:
            seg = ElementSegmentation.from_dict(
                {"elements": [
                    {"id": e.id, "kind": e.kind, "bbox": list(e.bbox)}
                    for e in seg_model.elements
                ]}
            )
        except DataError as exc:
            raise HTTPException(400, str(exc)) from exc
        t0 = time.perf_counter()
        map_ = gated(current_predictor().predict, bitmap)
        try:
            scores = score_elements(_quantize(map_), seg)
        except DataError as exc:
            raise HTTPException(422, str(exc)) from exc
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        return ScoreResponse(scores=scores, compute_time_ms=elapsed_ms)

    @app.post("/retarget", response_class=Response)
    async def retarget(
        request: Request,
        aspect: str | None = None,
        width: int | None = None,
        height: int | None = None,
        method: str = "importance",
    ):
        params = _crop_params_or_400(aspect, width, height, method)
        data = await request.body()
        check_size(data)
        image = _decode_or_400(data)
        map_ = gated(importance_for, image, params.method)
        try:
            if params.aspect:
                spec = CropSpec.parse_aspect(params.aspect)
            else:
                spec = CropSpec(size=(params.width, params.height))
            crop = best_crop(map_, spec)
        except ParameterError as exc:
            raise HTTPException(400, str(exc)) from exc
        out = retarget_image(image, crop)
        x, y, w, h = crop.rect
        return Response(
            content=encode_image(out),
            media_type="image/png",
            headers={
                "X-Crop-Rect": f"{x},{y},{w},{h}",
                "X-Contained-Importance": f"{crop.contained_importance:.6f}",
                "X-Crop-Method": params.method,
            },
        )

    @app.post("/thumbnail", response_class=Response)
    async def thumbnail(
        request: Request, side: int = 128, method: str = "importance"
    ):
        if side < 1:
            raise HTTPException(400, "side must be at least 1")
        if method not in ("importance", "edge"):
            raise HTTPException(400, f"unknown method {method!r}")
        data = await request.body()
        check_size(data)
        image = _decode_or_400(data)
        map_ = gated(importance_for, image, method)
        try:
            out = make_thumbnail(image, map_, side)
        except ParameterError as exc:
            raise HTTPException(400, str(exc)) from exc
        return Response(content=encode_image(out), media_type="image/png")

    return app


def _decode_or_400(data: bytes) -> BitmapImage:
    try:
        return decode_image(data)
    except DataError as exc:
        raise HTTPException(400, str(exc)) from exc


def _crop_params_or_400(aspect, width, height, method) -> CropParams:
    if method not in ("importance", "edge"):
        raise HTTPException(400, f"unknown method {method!r}")
    if aspect is not None and (width is not None or height is not None):
        raise HTTPException(400, "give either aspect or width+height, not both")
    if aspect is None and (width is None or height is None):
        raise HTTPException(400, "give aspect or both width and height")
    try:
        return CropParams(aspect=aspect, width=width, height=height, method=method)
    except ValueError as exc:
        raise HTTPException(400, str(exc)) from exc
