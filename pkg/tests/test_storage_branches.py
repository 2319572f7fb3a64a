from __future__ import annotations

import hashlib
import os
from pathlib import Path

import pytest
from _pytest.monkeypatch import MonkeyPatch

from thue_mahler_kit.storage import (
    InsufficientStorageError,
    ReportStore,
    StorageError,
    StoredReportNotFoundError,
)


def _store(tmp_path: Path) -> ReportStore:
    return ReportStore(root=tmp_path / "reports", min_free_gb=0)


def test_invalid_report_id_raises(tmp_path: Path) -> None:
    s = _store(tmp_path)
    with pytest.raises(StorageError):
        s.head("zz")
    with pytest.raises(StorageError):
        s.load("g" * 64)


def test_head_and_load_not_found(tmp_path: Path) -> None:
    s = _store(tmp_path)
    missing = "ab" * 32
    with pytest.raises(StoredReportNotFoundError):
        s.head(missing)
    with pytest.raises(StoredReportNotFoundError):
        s.load(missing)


def test_save_is_content_addressed(tmp_path: Path) -> None:
    s = _store(tmp_path)
    payload = b'{"command": "constants"}\n'
    meta = s.save(payload, command="constants", output_format="json", exit_code=0)
    assert meta.report_id == hashlib.sha256(payload).hexdigest()
    assert meta.size_bytes == len(payload)
    rid = meta.report_id
    assert (s.root / rid[:2] / rid[2:4] / f"{rid}.report").read_bytes() == payload
    assert s.load(rid.upper()) == payload

    again = s.save(payload, command="other", output_format="csv", exit_code=1)
    assert again.report_id == rid
    assert again.command == "constants"
    assert again.output_format == "json"
    assert again.created_at == meta.created_at


def test_head_reads_sidecar(tmp_path: Path) -> None:
    s = _store(tmp_path)
    meta = s.save(b"key,value\n", command="constants", output_format="csv", exit_code=1)
    head = s.head(meta.report_id)
    assert head == meta
    assert head.to_json() == {
        "report_id": meta.report_id,
        "size": 10,
        "command": "constants",
        "format": "csv",
        "exit_code": 1,
        "created_at": meta.created_at,
    }


def test_head_without_sidecar_uses_defaults(tmp_path: Path) -> None:
    s = _store(tmp_path)
    meta = s.save(b"{}", command="field", output_format="csv", exit_code=2)
    rid = meta.report_id
    (s.root / rid[:2] / rid[2:4] / f"{rid}.meta").unlink()
    head = s.head(rid)
    assert head.command == "unknown"
    assert head.output_format == "json"
    assert head.exit_code == 0
    assert head.created_at is None


def test_save_requires_free_space(tmp_path: Path) -> None:
    s = ReportStore(root=tmp_path / "reports", min_free_gb=1_000_000)
    with pytest.raises(InsufficientStorageError):
        s.save(b"x", command="constants", output_format="json", exit_code=0)


def _raise_oserror(*_args: object, **_kwargs: object) -> None:
    raise OSError("replace failed")


def test_failed_write_leaves_no_temp_files(tmp_path: Path, monkeypatch: MonkeyPatch) -> None:
    s = _store(tmp_path)
    monkeypatch.setattr(os, "replace", _raise_oserror)
    with pytest.raises(OSError):
        s.save(b"payload", command="constants", output_format="json", exit_code=0)
    leftovers = [p for p in s.root.rglob("*") if p.is_file()]
    assert leftovers == []
