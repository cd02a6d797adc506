"""Drive the cascade over HTTP: triage every image at the edge, grade only forwarded ones in the cloud."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

import httpx

from ..cascade import CascadeOutcome, RoutingDecision, make_outcome
from ..errors import CascadeError, CloudUnreachable, MissingTier2Score, ServiceError, UnknownId

CLOUD_BACKOFF = (0.1, 0.4)


def _raise_for_error(resp: httpx.Response, image_id: str) -> None:
    try:
        code = resp.json().get("error")
    except ValueError:
        code = None
    if code == "unknown_id":
        raise UnknownId(image_id)
    if code == "missing_tier2_score":
        raise MissingTier2Score(image_id)
    raise ServiceError(f"{resp.request.url} answered {resp.status_code} for {image_id!r}: {resp.text[:200]}")


class CascadeClient:
    """HTTP client for one edge and one cloud endpoint.

    Cloud calls are retried after each delay in ``backoff`` on connection
    failures and 5xx answers, then surface as :class:`CloudUnreachable`.
    """

    def __init__(
        self,
        edge_url: str,
        cloud_url: str,
        *,
        backoff: Sequence[float] = CLOUD_BACKOFF,
        timeout: float = 10.0,
        max_connections: int = 64,
    ):
        self.edge_url = edge_url.rstrip("/")
        self.cloud_url = cloud_url.rstrip("/")
        self.backoff = tuple(backoff)
        limits = httpx.Limits(max_connections=max_connections, max_keepalive_connections=max_connections)
        self._http = httpx.Client(timeout=timeout, limits=limits)

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "CascadeClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def healthz(self, which: str) -> dict:
        base = {"edge": self.edge_url, "cloud": self.cloud_url}[which]
        resp = self._http.get(f"{base}/v1/healthz")
        resp.raise_for_status()
        return resp.json()

    def triage(self, image_id: str, image_b64: str | None = None) -> dict:
        body = {"image_id": image_id}
        if image_b64 is not None:
            body["image"] = image_b64
        try:
            resp = self._http.post(f"{self.edge_url}/v1/triage", json=body)
        except httpx.TransportError as exc:
            raise ServiceError(f"edge service unreachable for {image_id!r}: {exc}") from exc
        if resp.status_code != 200:
            _raise_for_error(resp, image_id)
        return resp.json()

    def grade(self, image_id: str) -> dict:
        reason = ""
        for attempt in range(len(self.backoff) + 1):
            if attempt:
                time.sleep(self.backoff[attempt - 1])
            try:
                resp = self._http.post(f"{self.cloud_url}/v1/grade", json={"image_id": image_id})
            except httpx.TransportError as exc:
                reason = f"{type(exc).__name__}: {exc}"
                continue
            if resp.status_code >= 500:
                reason = f"HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                _raise_for_error(resp, image_id)
            return resp.json()
        raise CloudUnreachable(image_id, reason)

    def run_one(self, image_id: str, override: bool = True) -> CascadeOutcome:
        t = self.triage(image_id)
        decision = RoutingDecision(image_id, float(t["referable_score"]), bool(t["forward"]), float(t["threshold"]))
        grade = self.grade(image_id)["grade"] if decision.forwarded else None
        return make_outcome(decision, grade, override)

    def replay(
        self,
        ids: Iterable[str],
        *,
        override: bool = True,
        workers: int = 16,
        return_exceptions: bool = False,
    ) -> list[CascadeOutcome | CascadeError]:
        """Outcomes in input order.

        With ``return_exceptions`` a failing image yields its exception in place
        of an outcome and the other images are unaffected; otherwise the first
        failure (in input order) is raised.
        """
        ids = list(ids)

        def one(image_id: str) -> CascadeOutcome | CascadeError:
            try:
                return self.run_one(image_id, override)
            except CascadeError as exc:
                return exc

        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            results = list(pool.map(one, ids))
        if not return_exceptions:
            for r in results:
                if isinstance(r, CascadeError):
                    raise r
        return results


def networked_replay(
    ids: Iterable[str],
    edge_url: str,
    cloud_url: str,
    *,
    override: bool = True,
    workers: int = 16,
    return_exceptions: bool = False,
    backoff: Sequence[float] = CLOUD_BACKOFF,
) -> list[CascadeOutcome | CascadeError]:
    with CascadeClient(edge_url, cloud_url, backoff=backoff) as client:
        return client.replay(ids, override=override, workers=workers, return_exceptions=return_exceptions)
