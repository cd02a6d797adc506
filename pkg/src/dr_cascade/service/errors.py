"""Map domain errors onto the JSON error payloads shared by both services."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..errors import MissingTier2Score, UnknownId

STATUS = {"unknown_id": 404, "bad_request": 400, "missing_tier2_score": 409}


def error_response(code: str, detail: str | None = None) -> JSONResponse:
    return JSONResponse(status_code=STATUS[code], content={"error": code, "detail": detail})


def install_error_handlers(app: FastAPI) -> None:
    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return error_response("bad_request", "request body does not match the schema")

    @app.exception_handler(UnknownId)
    async def _unknown(request: Request, exc: UnknownId):
        return error_response("unknown_id", str(exc))

    @app.exception_handler(MissingTier2Score)
    async def _missing(request: Request, exc: MissingTier2Score):
        return error_response("missing_tier2_score", str(exc))
