from __future__ import annotations

import hashlib
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass
from datetime import UTC, datetime
from pathlib import Path

from .config import OutputFormat


@dataclass(frozen=True)
class ReportMetadata:
    report_id: str
    size_bytes: int
    command: str
    output_format: OutputFormat
    exit_code: int
    created_at: str | None

    def to_json(self: ReportMetadata) -> dict[str, object]:
        return {
            "report_id": self.report_id,
            "size": self.size_bytes,
            "command": self.command,
            "format": self.output_format,
            "exit_code": self.exit_code,
            "created_at": self.created_at,
        }


class StorageError(Exception):
    pass


class InsufficientStorageError(StorageError):
    pass


class StoredReportNotFoundError(StorageError):
    pass


def _is_hex(s: str) -> bool:
    return all(c in "0123456789abcdef" for c in s)


class ReportStore:
    """Content-addressed report files: the id is the sha256 of the rendered bytes.

    Identical runs map to the same id, so saving is idempotent.
    """

    def __init__(self: ReportStore, root: Path, min_free_gb: int) -> None:
        self._root = root
        self._min_free_bytes = int(min_free_gb) * 1024 * 1024 * 1024
        self._logger = logging.getLogger(__name__)

    @property
    def root(self: ReportStore) -> Path:
        return self._root

    def _stem_for(self: ReportStore, report_id: str) -> Path:
        rid = report_id.strip().lower()
        if len(rid) != 64 or not _is_hex(rid):
            raise StorageError("invalid report_id")
        return self._root / rid[:2] / rid[2:4] / rid

    def _path_for(self: ReportStore, report_id: str) -> Path:
        return self._stem_for(report_id).with_suffix(".report")

    def _meta_path_for(self: ReportStore, report_id: str) -> Path:
        return self._stem_for(report_id).with_suffix(".meta")

    def _read_sidecar(self: ReportStore, report_id: str) -> dict[str, str]:
        fields: dict[str, str] = {}
        mpath = self._meta_path_for(report_id)
        try:
            with mpath.open("r", encoding="utf-8", errors="ignore") as mf:
                for line in mf:
                    key, sep, value = line.partition("=")
                    if sep != "" and value.strip() != "":
                        fields[key.strip()] = value.strip()
        except OSError:
            self._logger.warning("no readable sidecar for %s", report_id)
        return fields

    def _ensure_free_space(self: ReportStore) -> None:
        self._root.mkdir(parents=True, exist_ok=True)
        usage = shutil.disk_usage(self._root)
        if int(usage.free) < self._min_free_bytes:
            raise InsufficientStorageError("insufficient free space")

    def _write_atomic(self: ReportStore, target: Path, data: bytes) -> None:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix="report_", dir=str(target.parent))
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, target)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def save(
        self: ReportStore,
        payload: bytes,
        *,
        command: str,
        output_format: OutputFormat,
        exit_code: int,
    ) -> ReportMetadata:
        self._ensure_free_space()
        report_id = hashlib.sha256(payload).hexdigest()
        target = self._path_for(report_id)
        if target.exists():
            self._logger.info("report %s already stored", report_id)
            return self.head(report_id)
        self._write_atomic(target, payload)
        created_at = datetime.now(tz=UTC).isoformat()
        sidecar = (
            f"command={command}\n"
            f"format={output_format}\n"
            f"exit_code={exit_code}\n"
            f"created_at={created_at}\n"
        )
        self._write_atomic(self._meta_path_for(report_id), sidecar.encode("utf-8"))
        self._logger.info("stored report %s (%s, %d bytes)", report_id, command, len(payload))
        return ReportMetadata(
            report_id=report_id,
            size_bytes=len(payload),
            command=command,
            output_format=output_format,
            exit_code=exit_code,
            created_at=created_at,
        )

    def head(self: ReportStore, report_id: str) -> ReportMetadata:
        path = self._path_for(report_id)
        if not path.is_file():
            raise StoredReportNotFoundError(report_id)
        meta = self._read_sidecar(report_id)
        code = meta.get("exit_code", "0")
        return ReportMetadata(
            report_id=report_id.strip().lower(),
            size_bytes=path.stat().st_size,
            command=meta.get("command", "unknown"),
            output_format="csv" if meta.get("format") == "csv" else "json",
            exit_code=int(code) if code.isdigit() else 0,
            created_at=meta.get("created_at"),
        )

    def load(self: ReportStore, report_id: str) -> bytes:
        path = self._path_for(report_id)
        if not path.is_file():
            raise StoredReportNotFoundError(report_id)
        return path.read_bytes()
