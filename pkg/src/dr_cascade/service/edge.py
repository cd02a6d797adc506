"""Edge triage service: answers whether an image should be forwarded to the cloud."""

from __future__ import annotations

import base64
import binascii
import io
import logging

import numpy as np
from fastapi import FastAPI
from PIL import Image, UnidentifiedImageError
from starlette.concurrency import run_in_threadpool

from ..errors import CapabilityMissing, InputError
from ..preprocess import tier1_preprocess
from ..scores import ScoreProvider, triage_score
from ..tuning import OperatingPoint
from .errors import error_response, install_error_handlers
from .schemas import EdgeHealth, TriageRequest, TriageResponse

logger = logging.getLogger(__name__)


def decode_image(payload: str) -> np.ndarray:
    try:
        raw = base64.b64decode(payload, validate=True)
        with Image.open(io.BytesIO(raw)) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (binascii.Error, UnidentifiedImageError, OSError) as exc:
        raise InputError(f"could not decode image: {exc}") from None


def create_edge_app(provider: ScoreProvider, op_point: OperatingPoint) -> FastAPI:
    if not provider.has_tier1:
        raise CapabilityMissing("edge service needs a provider with tier-1 scores")
    threshold = op_point.threshold
    app = FastAPI(title="dr-cascade edge triage", version="0.1.0")
    install_error_handlers(app)

    @app.get("/v1/healthz", response_model=EdgeHealth)
    async def healthz():
        return EdgeHealth(threshold=threshold)

    @app.post("/v1/triage", response_model=TriageResponse, responses={400: {}, 404: {}})
    async def triage(req: TriageRequest):
        if req.image is not None:
            try:
                tensor = await run_in_threadpool(lambda: tier1_preprocess(decode_image(req.image)))
            except (InputError, ValueError) as exc:
                return error_response("bad_request", str(exc))
            logger.debug("preprocessed %s to %s", req.image_id, tensor.shape)
        score = triage_score(provider, req.image_id)
        return TriageResponse(image_id=req.image_id, referable_score=score, forward=score >= threshold, threshold=threshold)

    return app
