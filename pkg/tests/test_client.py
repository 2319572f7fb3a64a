from __future__ import annotations

import hashlib
import json
import time

import httpx
import pytest
from _pytest.monkeypatch import MonkeyPatch

from thue_mahler_kit.client import (
    AuthorizationError,
    BadRequestError,
    ForbiddenError,
    InsufficientStorageClientError,
    NotFoundError,
    ReportClient,
    ReportClientError,
)

_PAYLOAD = b'{"command": "constants"}\n'
_RID = hashlib.sha256(_PAYLOAD).hexdigest()


class _MockServer:
    """In-memory stand-in for the report service."""

    def __init__(self, key: str) -> None:
        self._key = key
        self._reports: dict[str, bytes] = {}
        self.failures_left = 0
        self.requests: list[httpx.Request] = []

    def _error(self, code: int, kind: str) -> httpx.Response:
        body = {"kind": kind, "message": kind.lower(), "request_id": None}
        return httpx.Response(code, text=json.dumps(body))

    def _post_run(self, request: httpx.Request) -> httpx.Response:
        doc: dict[str, list[str]] = json.loads(request.content.decode("utf-8"))
        argv = doc["argv"]
        if argv == ["nonsense"]:
            return self._error(400, "usage")
        if argv == ["full"]:
            return self._error(507, "INSUFFICIENT_STORAGE")
        if argv == ["broken"]:
            return httpx.Response(201, text=json.dumps({"report_id": 7}))
        self._reports[_RID] = _PAYLOAD
        return httpx.Response(
            201, text=json.dumps({"report_id": _RID, "exit_code": 0, "sha256": _RID})
        )

    def _get_report(self, rid: str) -> httpx.Response:
        if rid == "tampered":
            return httpx.Response(200, content=b"other bytes")
        if rid == "forbidden":
            return self._error(403, "FORBIDDEN")
        if rid == "flaky":
            return self._error(502, "BAD_GATEWAY")
        payload = self._reports.get(rid)
        if payload is None:
            return self._error(404, "NOT_FOUND")
        return httpx.Response(200, content=payload, headers={"ETag": rid})

    def _get_info(self, rid: str) -> httpx.Response:
        if rid == "garbled":
            return httpx.Response(200, text="not json")
        payload = self._reports.get(rid)
        if payload is None:
            return self._error(404, "NOT_FOUND")
        body = {
            "report_id": rid,
            "size": len(payload),
            "command": "constants",
            "format": "json",
            "exit_code": 0,
            "created_at": "2026-01-01T00:00:00+00:00",
        }
        return httpx.Response(200, text=json.dumps(body))

    def handle(self, request: httpx.Request) -> httpx.Response:
        self.requests.append(request)
        if self.failures_left > 0:
            self.failures_left -= 1
            return self._error(503, "UNAVAILABLE")
        path = request.url.path
        if path == "/healthz":
            return httpx.Response(200, text=json.dumps({"status": "ok"}))
        if request.headers.get("x-api-key") != self._key:
            return self._error(401, "UNAUTHORIZED")
        if path == "/runs" and request.method == "POST":
            return self._post_run(request)
        if path.endswith("/info") and request.method == "GET":
            return self._get_info(path.split("/")[-2])
        if path.startswith("/reports/") and request.method == "GET":
            return self._get_report(path.split("/")[-1])
        return self._error(500, "ERROR")


def _no_sleep(_seconds: float) -> None:
    return None


def _client(server: _MockServer, key: str = "k") -> ReportClient:
    cx = httpx.Client(transport=httpx.MockTransport(server.handle))
    return ReportClient("http://testserver/", api_key=key, retries=2, client=cx)


def test_run_then_fetch() -> None:
    server = _MockServer("k")
    client = _client(server)
    assert client.health()
    result = client.run(["constants"], request_id="rid-1")
    assert result.report_id == _RID
    assert result.exit_code == 0
    assert result.sha256 == _RID
    assert server.requests[-1].headers["x-request-id"] == "rid-1"
    assert client.fetch(result.report_id) == _PAYLOAD

    info = client.info(result.report_id)
    assert info.size == len(_PAYLOAD)
    assert info.command == "constants"
    assert info.output_format == "json"
    assert info.created_at is not None
    with pytest.raises(ReportClientError, match="not JSON"):
        client.info("garbled")


def test_error_kind_comes_from_body() -> None:
    client = _client(_MockServer("k"))
    with pytest.raises(BadRequestError) as info:
        client.run(["nonsense"])
    assert info.value.kind == "usage"
    assert str(info.value) == "usage"


def test_fetch_checks_hash() -> None:
    client = _client(_MockServer("k"))
    with pytest.raises(ReportClientError):
        client.fetch("tampered")
    assert client.fetch("tampered", verify_etag=False) == b"other bytes"


def test_error_mappings(monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setattr(time, "sleep", _no_sleep)
    server = _MockServer("k")
    client = _client(server)
    with pytest.raises(BadRequestError):
        client.run(["nonsense"])
    with pytest.raises(InsufficientStorageClientError):
        client.run(["full"])
    with pytest.raises(ReportClientError):
        client.run(["broken"])
    with pytest.raises(NotFoundError):
        client.fetch("0" * 64)
    with pytest.raises(ForbiddenError):
        client.fetch("forbidden")
    with pytest.raises(ReportClientError, match="HTTP 502"):
        client.fetch("flaky")
    with pytest.raises(AuthorizationError):
        _client(server, key="wrong").run(["constants"])


def test_retries_server_errors(monkeypatch: MonkeyPatch) -> None:
    delays: list[float] = []

    def _record(seconds: float) -> None:
        delays.append(seconds)

    monkeypatch.setattr(time, "sleep", _record)
    server = _MockServer("k")
    server.failures_left = 2
    assert _client(server).run(["constants"]).report_id == _RID
    assert delays == [0.5, 1.0]

    server.failures_left = 5
    assert not _client(server).health()
    assert len(server.requests) == 3 + 3


def test_transport_errors_exhaust_retries(monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setattr(time, "sleep", _no_sleep)
    calls: list[str] = []

    def _down(request: httpx.Request) -> httpx.Response:
        calls.append(request.url.path)
        raise httpx.ConnectError("connection refused", request=request)

    cx = httpx.Client(transport=httpx.MockTransport(_down))
    client = ReportClient("http://testserver", api_key="k", retries=1, client=cx)
    with pytest.raises(ReportClientError, match="transport error"):
        client.health()
    assert calls == ["/healthz", "/healthz"]
