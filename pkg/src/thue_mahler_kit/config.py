from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Final, Literal, TypeGuard

from .errors import ConfigError
from .logging import resolve_level

TrustLevel = Literal["verify", "trusted"]
OutputFormat = Literal["json", "csv"]

MIN_PRECISION: Final[int] = 32


@dataclass(frozen=True)
class Settings:
    precision: int = 128
    cap: int = 100_000_000
    workers: int = 1
    output_format: OutputFormat = "json"
    log_level: str = "INFO"
    report_root: str = "/data/reports"
    min_free_gb: int = 1
    api_run_keys: frozenset[str] = frozenset()
    api_read_keys: frozenset[str] = frozenset()

    @staticmethod
    def _get_env_str(name: str, default: str) -> str:
        v = os.getenv(name)
        return v if v is not None and v.strip() != "" else default

    @staticmethod
    def _csv_env_set(name: str) -> frozenset[str]:
        raw = os.getenv(name)
        if raw is None or raw.strip() == "":
            return frozenset()
        parts = [p.strip() for p in raw.split(",") if p.strip() != ""]
        return frozenset(parts)

    @staticmethod
    def _get_env_int(name: str, default: int, *, minimum: int) -> int:
        raw = Settings._get_env_str(name, str(default))
        try:
            value = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{name} must be an integer, got {raw!r}") from exc
        if value < minimum:
            raise ConfigError(f"{name} must be >= {minimum}, got {value}")
        return value

    @classmethod
    def from_env(cls: type[Settings]) -> Settings:
        fmt = cls._get_env_str("THUE_FORMAT", "json").lower()
        if fmt not in {"json", "csv"}:
            raise ConfigError(f"THUE_FORMAT must be json or csv, got {fmt!r}")
        output_format: OutputFormat = "csv" if fmt == "csv" else "json"
        log_level = cls._get_env_str("LOG_LEVEL", "INFO").upper()
        resolve_level(log_level)

        run_keys: Final[frozenset[str]] = cls._csv_env_set("API_RUN_KEYS")
        read_keys: Final[frozenset[str]] = cls._csv_env_set("API_READ_KEYS") or run_keys

        return cls(
            precision=cls._get_env_int("THUE_PRECISION", 128, minimum=MIN_PRECISION),
            cap=cls._get_env_int("THUE_CAP", 100_000_000, minimum=1),
            workers=cls._get_env_int("THUE_WORKERS", 1, minimum=1),
            output_format=output_format,
            log_level=log_level,
            report_root=cls._get_env_str("REPORT_ROOT", "/data/reports"),
            min_free_gb=cls._get_env_int("MIN_FREE_GB", 1, minimum=0),
            api_run_keys=run_keys,
            api_read_keys=read_keys,
        )


@dataclass(frozen=True)
class FieldConfig:
    """Field description loaded from a JSON config file.

    ``basis`` and ``fundamental_units`` are coordinate vectors in the power
    basis of the root of ``min_poly`` (lowest power first).
    """

    min_poly: tuple[int, ...]
    basis: tuple[tuple[Fraction, ...], ...] | None = None
    class_number: int | None = None
    fundamental_units: tuple[tuple[Fraction, ...], ...] | None = None
    trust_level: TrustLevel = "verify"

    def has_trusted_data(self: FieldConfig) -> bool:
        return self.class_number is not None or self.fundamental_units is not None


def is_json_list(value: object) -> TypeGuard[list[object]]:
    return isinstance(value, list)


def is_json_object(value: object) -> TypeGuard[dict[str, object]]:
    return isinstance(value, dict)


def _as_fraction(value: object, where: str) -> Fraction:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: booleans are not numbers")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{where}: not a rational {value!r}") from exc
    raise ConfigError(f"{where}: expected integer or rational string")


def _as_vectors(value: object, d: int, where: str) -> tuple[tuple[Fraction, ...], ...]:
    if not is_json_list(value):
        raise ConfigError(f"{where}: expected a list of coordinate vectors")
    rows: list[tuple[Fraction, ...]] = []
    for i, row in enumerate(value):
        if not is_json_list(row) or len(row) != d:
            raise ConfigError(f"{where}[{i}]: expected {d} coordinates")
        rows.append(tuple(_as_fraction(c, f"{where}[{i}]") for c in row))
    return tuple(rows)


def parse_field_config(body: dict[str, object]) -> FieldConfig:
    raw_poly = body.get("min_poly")
    if not is_json_list(raw_poly) or len(raw_poly) < 2:
        raise ConfigError("min_poly: expected [c0, ..., cd] with d >= 1")
    coeffs: list[int] = []
    for c in raw_poly:
        if isinstance(c, bool) or not isinstance(c, int):
            raise ConfigError("min_poly: coefficients must be integers")
        coeffs.append(c)
    d = len(coeffs) - 1

    trust = body.get("trust_level", "verify")
    if trust not in {"verify", "trusted"}:
        raise ConfigError(f"trust_level must be verify or trusted, got {trust!r}")
    trust_level: TrustLevel = "trusted" if trust == "trusted" else "verify"

    basis_raw = body.get("basis")
    basis = None if basis_raw is None else _as_vectors(basis_raw, d, "basis")
    if basis is not None and len(basis) != d:
        raise ConfigError(f"basis: expected {d} elements")

    h_raw = body.get("h_K")
    class_number: int | None = None
    if h_raw is not None:
        if isinstance(h_raw, bool) or not isinstance(h_raw, int) or h_raw < 1:
            raise ConfigError("h_K must be a positive integer")
        class_number = h_raw

    units_raw = body.get("fundamental_units")
    units = None if units_raw is None else _as_vectors(units_raw, d, "fundamental_units")

    cfg = FieldConfig(
        min_poly=tuple(coeffs),
        basis=basis,
        class_number=class_number,
        fundamental_units=units,
        trust_level=trust_level,
    )
    if cfg.trust_level == "verify" and cfg.has_trusted_data():
        raise ConfigError("h_K / fundamental_units supplied but trust_level is 'verify'")
    return cfg


def load_field_config(path: Path) -> FieldConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read field config {path}: {exc}") from exc
    try:
        body: dict[str, object] = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"field config {path} is not valid JSON: {exc}") from exc
    if not is_json_object(body):
        raise ConfigError("field config must be a JSON object")
    return parse_field_config(body)


def rational_field_config() -> FieldConfig:
    return FieldConfig(min_poly=(0, 1))
