from __future__ import annotations

import io
import json
import logging
import threading
from fractions import Fraction
from pathlib import Path

import pytest
from _pytest.capture import CaptureFixture
from _pytest.monkeypatch import MonkeyPatch

from thue_mahler_kit.config import Settings, load_field_config, parse_field_config
from thue_mahler_kit.errors import ConfigError
from thue_mahler_kit.logging import setup_logging


def test_settings_from_env_reads_values(monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setenv("REPORT_ROOT", "/x")
    monkeypatch.setenv("MIN_FREE_GB", "7")
    monkeypatch.setenv("THUE_PRECISION", "256")
    monkeypatch.setenv("THUE_CAP", "1000")
    monkeypatch.setenv("THUE_WORKERS", "4")
    monkeypatch.setenv("THUE_FORMAT", "CSV")
    s = Settings.from_env()
    assert s.report_root == "/x"
    assert s.min_free_gb == 7
    assert s.precision == 256
    assert s.cap == 1000
    assert s.workers == 4
    assert s.output_format == "csv"


def test_json_logging_includes_exc_info(capfd: CaptureFixture[str]) -> None:
    setup_logging("INFO")
    log = logging.getLogger("test")
    try:
        raise RuntimeError("boom")
    except RuntimeError:
        log.exception("failed")
    out = capfd.readouterr().err.strip().splitlines()[-1]
    record: dict[str, str] = json.loads(out)
    assert record["level"] == "ERROR"
    assert record["logger"] == "test"
    assert "RuntimeError: boom" in record["exc_info"]


def test_logging_to_given_stream() -> None:
    buf = io.StringIO()
    setup_logging("debug", stream=buf)
    logging.getLogger("thue_mahler_kit.lattice").debug("box %d", 3)
    record: dict[str, str] = json.loads(buf.getvalue().strip())
    assert record["msg"] == "box 3"
    assert record["level"] == "DEBUG"
    assert "thread" not in record


def test_logging_names_worker_threads() -> None:
    buf = io.StringIO()
    setup_logging("info", stream=buf)
    worker = threading.Thread(
        target=logging.getLogger("thue_mahler_kit.parallel").info, args=("chunk",), name="chunk-1"
    )
    worker.start()
    worker.join()
    record: dict[str, str] = json.loads(buf.getvalue().strip())
    assert record["thread"] == "chunk-1"
    assert record["ts"].endswith("+00:00")


def test_unknown_log_level_is_config_error() -> None:
    with pytest.raises(ConfigError):
        setup_logging("chatty")


def test_settings_api_keys_from_env(monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setenv("API_RUN_KEYS", "u1,u2")
    monkeypatch.delenv("API_READ_KEYS", raising=False)
    s = Settings.from_env()
    assert s.api_run_keys == frozenset({"u1", "u2"})
    assert s.api_read_keys == s.api_run_keys


def test_field_config_round_trip(tmp_path: Path) -> None:
    path = tmp_path / "field.json"
    path.write_text(
        json.dumps(
            {
                "min_poly": [-2, 0, 1],
                "trust_level": "trusted",
                "h_K": 1,
                "fundamental_units": [[1, 1]],
                "basis": [["1", "0"], [0, 1]],
            }
        ),
        encoding="utf-8",
    )
    cfg = load_field_config(path)
    assert cfg.min_poly == (-2, 0, 1)
    assert cfg.class_number == 1
    assert cfg.fundamental_units == ((Fraction(1), Fraction(1)),)
    assert cfg.basis == ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))


@pytest.mark.parametrize(
    "body",
    [
        {"min_poly": [1]},
        {"min_poly": [1, True]},
        {"min_poly": [-2, 0, 1], "trust_level": "maybe"},
        {"min_poly": [-2, 0, 1], "h_K": 1},
        {"min_poly": [-2, 0, 1], "trust_level": "trusted", "h_K": 0},
        {"min_poly": [-2, 0, 1], "basis": [[1, 0]]},
        {"min_poly": [-2, 0, 1], "trust_level": "trusted", "fundamental_units": [["x", 1]]},
    ],
)
def test_field_config_rejects(body: dict[str, object]) -> None:
    with pytest.raises(ConfigError):
        parse_field_config(body)


def test_field_config_file_errors(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        load_field_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_field_config(broken)
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_field_config(listed)
