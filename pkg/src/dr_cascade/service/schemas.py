"""Wire schemas. Unknown request fields are ignored; responses carry exactly these fields."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class TriageRequest(BaseModel):
    image_id: str = Field(..., min_length=1)
    # base64-encoded PNG/JPEG; when given it is decoded and run through tier-1 preprocessing
    image: Optional[str] = None


class TriageResponse(BaseModel):
    image_id: str
    referable_score: float
    forward: bool
    threshold: float


class GradeRequest(BaseModel):
    image_id: str = Field(..., min_length=1)


class GradeResponse(BaseModel):
    image_id: str
    severity_score: float
    grade: int = Field(..., ge=0, le=4)
    deployed_class: Literal["class01", "class2", "class3", "class4"]


class EdgeHealth(BaseModel):
    status: str = "ok"
    tier: Literal["edge"] = "edge"
    threshold: float


class CloudHealth(BaseModel):
    status: str = "ok"
    tier: Literal["cloud"] = "cloud"


class ErrorResponse(BaseModel):
    error: Literal["unknown_id", "bad_request", "missing_tier2_score"]
    detail: Optional[str] = None
