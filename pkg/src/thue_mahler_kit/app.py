"""Report service: runs CLI invocations and serves the stored reports."""

from __future__ import annotations

import logging
import os
import shutil
import tempfile
import threading
import time
from collections.abc import Callable
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request, Response, status
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .cli import COMMANDS, REQUIRED, execute, parse_invocation, render_report
from .config import Settings
from .errors import UsageError, error_body
from .logging import setup_logging
from .storage import (
    InsufficientStorageError,
    ReportMetadata,
    ReportStore,
    StorageError,
    StoredReportNotFoundError,
)

_logger = logging.getLogger(__name__)

Permission = Literal["run", "read"]
Handler = Callable[[str, Request], Response | dict[str, object]]
Render = Callable[[ReportMetadata], Response | dict[str, object]]


class RunRequest(BaseModel):
    argv: list[str]


def _request_id(request: Request) -> str | None:
    rid = request.headers.get("X-Request-ID", "").strip()
    return rid or None


def _error(code: int, kind: str, message: str, request: Request) -> JSONResponse:
    return JSONResponse(status_code=code, content=error_body(kind, message, _request_id(request)))


def _storage_problem(root: Path, min_free_gb: int) -> str | None:
    """Reason the store cannot take reports, or ``None`` when it can."""
    try:
        root.mkdir(parents=True, exist_ok=True)
        fd, scratch = tempfile.mkstemp(prefix=".writable_", dir=root)
        os.close(fd)
        os.unlink(scratch)
    except OSError:
        return "storage not writable"
    if _free_gb(root) < min_free_gb:
        return "low disk"
    return None


def _free_gb(path: Path) -> float:
    return shutil.disk_usage(path).free / float(1 << 30)


def _denied(cfg: Settings, perm: Permission, request: Request) -> JSONResponse | None:
    allowed = cfg.api_run_keys if perm == "run" else cfg.api_read_keys
    # An empty key set turns auth off for that permission.
    if not allowed:
        return None
    key = request.headers.get("X-API-Key", "").strip()
    if not key:
        return _error(status.HTTP_401_UNAUTHORIZED, "UNAUTHORIZED", "missing API key", request)
    if key not in allowed:
        return _error(
            status.HTTP_403_FORBIDDEN, "FORBIDDEN", f"API key may not {perm} reports", request
        )
    return None


def _build_readyz_handler(cfg: Settings) -> Callable[[Response], dict[str, str]]:
    def handler(resp: Response) -> dict[str, str]:
        reason = _storage_problem(Path(cfg.report_root), cfg.min_free_gb)
        if reason is not None:
            resp.status_code = status.HTTP_503_SERVICE_UNAVAILABLE
            return {"status": "degraded", "reason": reason}
        return {"status": "ready"}

    return handler


def _build_commands_handler() -> Callable[[], dict[str, object]]:
    listing: dict[str, object] = {
        name: {"required": [f"--{flag.replace('_', '-')}" for flag in REQUIRED.get(name, ())]}
        for name in COMMANDS
    }

    def handler() -> dict[str, object]:
        return {"commands": listing}

    return handler


def _build_run_handler(
    store: ReportStore, cfg: Settings, lock: threading.Lock
) -> Callable[[RunRequest, Request], Response | dict[str, object]]:
    def handler(body: RunRequest, request: Request) -> Response | dict[str, object]:
        denied = _denied(cfg, "run", request)
        if denied is not None:
            return denied
        try:
            inv = parse_invocation(body.argv, cfg)
        except UsageError as err:
            return _error(status.HTTP_400_BAD_REQUEST, err.kind, str(err), request)
        started = time.perf_counter()
        # flint precision is process-global; one run at a time.
        with lock:
            report, code = execute(inv)
        payload = render_report(report, inv.output_format)
        try:
            meta = store.save(
                payload, command=inv.command, output_format=inv.output_format, exit_code=code
            )
        except InsufficientStorageError as err:
            return _error(507, "INSUFFICIENT_STORAGE", str(err), request)
        _logger.info(
            "run %s exit=%d report=%s in %.2fs",
            inv.command,
            code,
            meta.report_id,
            time.perf_counter() - started,
        )
        return {"report_id": meta.report_id, "exit_code": code, "sha256": meta.report_id}

    return handler


def _build_lookup_handler(store: ReportStore, cfg: Settings, respond: Render) -> Handler:
    """Read-permission route over one stored report; ``respond`` renders it."""

    def handler(report_id: str, request: Request) -> Response | dict[str, object]:
        denied = _denied(cfg, "read", request)
        if denied is not None:
            return denied
        try:
            return respond(store.head(report_id))
        except StoredReportNotFoundError:
            return _error(status.HTTP_404_NOT_FOUND, "NOT_FOUND", "report not found", request)
        except StorageError as err:
            return _error(status.HTTP_400_BAD_REQUEST, "BAD_REQUEST", str(err), request)

    return handler


def create_app(settings: Settings | None = None) -> FastAPI:
    cfg = settings or Settings.from_env()
    setup_logging(cfg.log_level)
    app = FastAPI(title="thue-mahler-kit", version="0.1.0")
    store = ReportStore(root=Path(cfg.report_root), min_free_gb=cfg.min_free_gb)
    lock = threading.Lock()

    def report_bytes(meta: ReportMetadata) -> Response:
        media = "text/csv" if meta.output_format == "csv" else "application/json"
        return Response(
            content=store.load(meta.report_id),
            headers={"ETag": meta.report_id},
            media_type=media,
        )

    def report_info(meta: ReportMetadata) -> dict[str, object]:
        return meta.to_json()

    def healthz() -> dict[str, str]:
        return {"status": "ok"}

    app.add_api_route("/healthz", healthz, methods=["GET"], response_model=None)
    app.add_api_route("/readyz", _build_readyz_handler(cfg), methods=["GET"], response_model=None)
    app.add_api_route(
        "/commands", _build_commands_handler(), methods=["GET"], response_model=None
    )
    app.add_api_route(
        "/runs",
        _build_run_handler(store, cfg, lock),
        methods=["POST"],
        status_code=status.HTTP_201_CREATED,
        response_model=None,
    )
    app.add_api_route(
        "/reports/{report_id}",
        _build_lookup_handler(store, cfg, report_bytes),
        methods=["GET"],
        response_model=None,
    )
    app.add_api_route(
        "/reports/{report_id}/info",
        _build_lookup_handler(store, cfg, report_info),
        methods=["GET"],
        response_model=None,
    )
    return app
