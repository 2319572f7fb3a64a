"""Typed client for the report service.

Reports are addressed by the sha256 of their bytes, so every call here is
safe to repeat and all of them are retried on 5xx and transport failures.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass
from typing import Final

import httpx

from .config import is_json_object

_logger = logging.getLogger(__name__)


class ReportClientError(Exception):
    def __init__(self: ReportClientError, message: str, *, kind: str | None = None) -> None:
        super().__init__(message)
        self.kind = kind


class AuthorizationError(ReportClientError):
    pass


class ForbiddenError(ReportClientError):
    pass


class NotFoundError(ReportClientError):
    pass


class BadRequestError(ReportClientError):
    pass


class InsufficientStorageClientError(ReportClientError):
    pass


_STATUS_ERRORS: Final[dict[int, type[ReportClientError]]] = {
    400: BadRequestError,
    401: AuthorizationError,
    403: ForbiddenError,
    404: NotFoundError,
    507: InsufficientStorageClientError,
}


@dataclass(frozen=True)
class RunResult:
    report_id: str
    exit_code: int
    sha256: str


@dataclass(frozen=True)
class ReportInfo:
    report_id: str
    size: int
    command: str
    output_format: str
    exit_code: int
    created_at: str | None


def _json_object(resp: httpx.Response, what: str) -> dict[str, object]:
    try:
        body: object = json.loads(resp.text)
    except json.JSONDecodeError as exc:
        raise ReportClientError(f"{what} is not JSON: {resp.text[:200]}") from exc
    if not is_json_object(body):
        raise ReportClientError(f"{what} is not a JSON object")
    return body


def _error_from(resp: httpx.Response) -> ReportClientError:
    kind: str | None = None
    message = resp.text
    try:
        body: object = json.loads(resp.text)
    except json.JSONDecodeError:
        body = None
    if is_json_object(body):
        raw_kind = body.get("kind")
        raw_message = body.get("message")
        kind = raw_kind if isinstance(raw_kind, str) else None
        message = raw_message if isinstance(raw_message, str) else message
    error_type = _STATUS_ERRORS.get(resp.status_code)
    if error_type is None:
        return ReportClientError(f"HTTP {resp.status_code}: {message}", kind=kind)
    return error_type(message, kind=kind)


class ReportClient:
    def __init__(
        self: ReportClient,
        base_url: str,
        api_key: str,
        *,
        timeout_seconds: float = 600.0,
        retries: int = 3,
        backoff_seconds: float = 0.5,
        client: httpx.Client | None = None,
    ) -> None:
        self._base_url: Final[str] = base_url.rstrip("/")
        self._api_key: Final[str] = api_key
        self._timeout: Final[float] = timeout_seconds
        self._retries: Final[int] = max(0, retries)
        self._backoff: Final[float] = max(0.0, backoff_seconds)
        self._http: Final[httpx.Client] = client or httpx.Client(timeout=timeout_seconds)

    def _headers(self: ReportClient, request_id: str | None) -> dict[str, str]:
        headers = {"X-API-Key": self._api_key}
        if request_id:
            headers["X-Request-ID"] = request_id
        return headers

    def _send(
        self: ReportClient,
        method: str,
        path: str,
        request_id: str | None,
        payload: dict[str, object] | None = None,
    ) -> httpx.Response:
        headers = self._headers(request_id)
        content: bytes | None = None
        if payload is not None:
            headers["Content-Type"] = "application/json"
            content = json.dumps(payload).encode("utf-8")
        url = self._base_url + path
        for attempt in range(self._retries + 1):
            last = attempt == self._retries
            try:
                resp = self._http.request(
                    method, url, headers=headers, content=content, timeout=self._timeout
                )
            except httpx.TransportError as exc:
                if last:
                    raise ReportClientError(f"transport error: {exc}") from exc
                _logger.warning("%s %s failed (%s), retrying", method, path, exc)
            else:
                if resp.status_code < 500 or last:
                    return resp
                _logger.warning("%s %s returned %d, retrying", method, path, resp.status_code)
            time.sleep(self._backoff * (attempt + 1))
        raise ReportClientError("retry loop exhausted")

    def _checked(
        self: ReportClient,
        method: str,
        path: str,
        request_id: str | None,
        payload: dict[str, object] | None = None,
    ) -> httpx.Response:
        resp = self._send(method, path, request_id, payload)
        if resp.status_code >= 400:
            raise _error_from(resp)
        return resp

    def health(self: ReportClient, *, request_id: str | None = None) -> bool:
        return self._send("GET", "/healthz", request_id).status_code == 200

    def run(self: ReportClient, argv: list[str], *, request_id: str | None = None) -> RunResult:
        argv_json: list[object] = list(argv)
        resp = self._checked("POST", "/runs", request_id, {"argv": argv_json})
        body = _json_object(resp, "run response")
        report_id = body.get("report_id")
        exit_code = body.get("exit_code")
        if not isinstance(report_id, str) or not isinstance(exit_code, int):
            raise ReportClientError(f"malformed run response: {resp.text}")
        return RunResult(report_id=report_id, exit_code=exit_code, sha256=report_id)

    def info(self: ReportClient, report_id: str, *, request_id: str | None = None) -> ReportInfo:
        resp = self._checked("GET", f"/reports/{report_id}/info", request_id)
        body = _json_object(resp, "report info")
        size = body.get("size")
        command = body.get("command")
        fmt = body.get("format")
        exit_code = body.get("exit_code")
        created_at = body.get("created_at")
        if (
            not isinstance(size, int)
            or not isinstance(command, str)
            or not isinstance(fmt, str)
            or not isinstance(exit_code, int)
        ):
            raise ReportClientError(f"malformed report info: {resp.text}")
        return ReportInfo(
            report_id=report_id,
            size=size,
            command=command,
            output_format=fmt,
            exit_code=exit_code,
            created_at=created_at if isinstance(created_at, str) else None,
        )

    def fetch(
        self: ReportClient,
        report_id: str,
        *,
        request_id: str | None = None,
        verify_etag: bool = True,
    ) -> bytes:
        payload = self._checked("GET", f"/reports/{report_id}", request_id).content
        if verify_etag and hashlib.sha256(payload).hexdigest() != report_id:
            raise ReportClientError("downloaded report hash does not match its id")
        return payload
