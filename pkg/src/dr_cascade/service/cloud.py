"""Cloud grading service: severity score, rounded ICDR grade and deployed class for forwarded images."""

from __future__ import annotations

import threading

from fastapi import FastAPI

from ..errors import CapabilityMissing
from ..grading import to_deployed
from ..scores import ScoreProvider, round_clip_grade
from .errors import install_error_handlers
from .schemas import CloudHealth, GradeRequest, GradeResponse


class RequestCounter:
    def __init__(self):
        self._lock = threading.Lock()
        self._value = 0

    def increment(self) -> None:
        with self._lock:
            self._value += 1

    @property
    def value(self) -> int:
        with self._lock:
            return self._value


def create_cloud_app(provider: ScoreProvider) -> FastAPI:
    """Build the grading app. ``app.state.grade_requests`` counts every POST /v1/grade received."""
    if not provider.has_tier2:
        raise CapabilityMissing("cloud service needs a provider with tier-2 scores")
    app = FastAPI(title="dr-cascade cloud grading", version="0.1.0")
    app.state.grade_requests = RequestCounter()
    install_error_handlers(app)

    @app.get("/v1/healthz", response_model=CloudHealth)
    async def healthz():
        return CloudHealth()

    @app.post("/v1/grade", response_model=GradeResponse, responses={400: {}, 404: {}, 409: {}})
    async def grade(req: GradeRequest):
        app.state.grade_requests.increment()
        score = provider.tier2_score(req.image_id)
        g = round_clip_grade(score)
        return GradeResponse(image_id=req.image_id, severity_score=score, grade=g, deployed_class=to_deployed(g).label)

    return app
