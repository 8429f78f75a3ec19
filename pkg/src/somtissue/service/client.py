"""Thin httpx client for the tissue service."""
from __future__ import annotations

from typing import Any, Iterable, Optional

import httpx


class ServiceError(RuntimeError):
    def __init__(self, status: int, detail: str):
        super().__init__(f"service returned {status}: {detail}")
        self.status = status
        self.detail = detail


class TissueClient:
    def __init__(self, base_url: str, *, client: Optional[httpx.Client] = None, timeout: float = 60.0):
        self.http = client or httpx.Client(base_url=base_url.rstrip("/"), timeout=timeout)

    def _check(self, resp: httpx.Response) -> httpx.Response:
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise ServiceError(resp.status_code, str(detail))
        return resp

    def create_session(self, config: dict[str, Any], seed: Optional[int] = None,
                       snapshot: Optional[dict[str, Any]] = None) -> str:
        body = {"config": config, "seed": seed, "snapshot": snapshot}
        return self._check(self.http.post("/sessions", json=body)).json()["id"]

    def delete_session(self, sid: str) -> None:
        self._check(self.http.delete(f"/sessions/{sid}"))

    def ingest_lines(self, sid: str, lines: Iterable[str]) -> dict[str, Any]:
        content = "".join(line if line.endswith("\n") else line + "\n" for line in lines)
        resp = self.http.post(f"/sessions/{sid}/ingest", content=content.encode("utf-8"),
                              headers={"content-type": "application/x-ndjson"})
        return self._check(resp).json()

    def metrics(self, sid: str) -> dict[str, Any]:
        return self._check(self.http.get(f"/sessions/{sid}/metrics")).json()

    def grid_csv(self, sid: str) -> str:
        return self._check(self.http.get(f"/sessions/{sid}/grid")).text

    def field_csv(self, sid: str) -> str:
        return self._check(self.http.get(f"/sessions/{sid}/field")).text

    def snapshot(self, sid: str) -> str:
        return self._check(self.http.get(f"/sessions/{sid}/snapshot")).text
