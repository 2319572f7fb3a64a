from __future__ import annotations

import pytest
from _pytest.monkeypatch import MonkeyPatch

from thue_mahler_kit.config import Settings
from thue_mahler_kit.errors import ConfigError

_VARS = (
    "REPORT_ROOT",
    "MIN_FREE_GB",
    "THUE_PRECISION",
    "THUE_CAP",
    "THUE_WORKERS",
    "THUE_FORMAT",
    "LOG_LEVEL",
    "API_RUN_KEYS",
    "API_READ_KEYS",
)


def test_defaults_when_env_missing(monkeypatch: MonkeyPatch) -> None:
    for name in _VARS:
        monkeypatch.delenv(name, raising=False)
    s = Settings.from_env()
    assert s == Settings()
    assert s.report_root == "/data/reports"
    assert s.precision == 128
    assert s.cap == 100_000_000
    assert s.api_run_keys == frozenset()
    assert s.api_read_keys == frozenset()


def test_blank_strings_fall_back_to_defaults(monkeypatch: MonkeyPatch) -> None:
    for name in _VARS:
        monkeypatch.setenv(name, "  ")
    s = Settings.from_env()
    assert s.report_root == "/data/reports"
    assert s.min_free_gb == 1
    assert s.output_format == "json"
    assert s.log_level == "INFO"


def test_api_keys_parsing_trims_and_dedups(monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setenv("API_RUN_KEYS", " a , a , b ,  c ")
    s = Settings.from_env()
    assert s.api_run_keys == frozenset({"a", "b", "c"})


def test_read_keys_override_and_fallback(monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setenv("API_RUN_KEYS", "u1,u2")
    monkeypatch.setenv("API_READ_KEYS", "")
    assert Settings.from_env().api_read_keys == frozenset({"u1", "u2"})

    monkeypatch.setenv("API_READ_KEYS", "r1, r2")
    s = Settings.from_env()
    assert s.api_run_keys == frozenset({"u1", "u2"})
    assert s.api_read_keys == frozenset({"r1", "r2"})


@pytest.mark.parametrize(
    ("name", "value"),
    [
        ("MIN_FREE_GB", "abc"),
        ("MIN_FREE_GB", "-1"),
        ("THUE_PRECISION", "16"),
        ("THUE_CAP", "0"),
        ("THUE_WORKERS", "many"),
        ("THUE_FORMAT", "xml"),
        ("LOG_LEVEL", "chatty"),
    ],
)
def test_invalid_values_raise(monkeypatch: MonkeyPatch, name: str, value: str) -> None:
    monkeypatch.setenv(name, value)
    with pytest.raises(ConfigError):
        Settings.from_env()


def test_precision_boundary(monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setenv("THUE_PRECISION", "32")
    assert Settings.from_env().precision == 32
