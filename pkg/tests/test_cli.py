from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import pytest
from _pytest.capture import CaptureFixture
from _pytest.monkeypatch import MonkeyPatch

from thue_mahler_kit.cli import (
    FAMILY_HEADER,
    execute,
    main,
    parse_element,
    parse_invocation,
    run,
)
from thue_mahler_kit.config import Settings, is_json_object
from thue_mahler_kit.errors import UsageError
from thue_mahler_kit.number_field import NumberField

SETTINGS = Settings()


def _doc(payload: bytes) -> dict[str, object]:
    doc: dict[str, object] = json.loads(payload.decode("utf-8"))
    return doc


def _section(doc: dict[str, object], key: str) -> dict[str, object]:
    value = doc.get(key)
    assert is_json_object(value), f"{key} is not an object: {value!r}"
    return value


def _result(argv: list[str]) -> dict[str, object]:
    out = run(argv, SETTINGS)
    assert out.code == 0, out.payload.decode("utf-8")
    return _section(_doc(out.payload), "result")


def _cubic_config(tmp_path: Path) -> Path:
    path = tmp_path / "cubic.json"
    path.write_text(json.dumps({"min_poly": [-1, -1, 0, 1]}), encoding="utf-8")
    return path


def test_constants_over_rationals() -> None:
    result = _result(["constants"])
    assert result["kappa5"] == "4"
    assert result["kappa6"] == "64"
    assert _section(result, "problem")["m"] == "1"


def test_sunit_solve_counts_solutions() -> None:
    result = _result(["sunit-solve", "--deltas", "1,1", "--primes", "2,3", "--box", "10"])
    assert result["count"] == 21


def test_enumerate_box_and_delta() -> None:
    assert _result(["enumerate-box", "--height", "53/10"])["count"] == 11
    delta = _result(["delta-k", "--height", "7/10"])
    assert delta["witness"] is not None


def test_config_echo_leaves_out_workers() -> None:
    out = run(["constants", "--workers", "3"], SETTINGS)
    config = _section(_doc(out.payload), "config")
    assert "workers" not in config
    assert config["command"] == "constants"
    assert config["precision"] == 128


def test_reports_are_deterministic() -> None:
    argv = ["solve-family", "--primes", "2", "--xy-box", "2", "--box", "1"]
    first = run(argv, SETTINGS)
    second = run([*argv, "--workers", "4"], SETTINGS)
    assert first.code == 0
    assert first.payload == second.payload


def test_family_csv_table() -> None:
    argv = ["solve-family", "--primes", "2", "--xy-box", "2", "--box", "1", "--format", "csv"]
    out = run(argv, SETTINGS)
    lines = out.payload.decode("utf-8").splitlines()
    assert lines[0] == ",".join(FAMILY_HEADER)
    assert len(lines) > 1
    assert all(len(line.split(",")) == len(FAMILY_HEADER) for line in lines)


def test_csv_without_table_lists_keys() -> None:
    out = run(["constants", "--format", "csv"], SETTINGS)
    lines = out.payload.decode("utf-8").splitlines()
    assert lines[0] == "key,value"
    assert 'kappa5,"""4"""' in lines


def test_classify_and_canonicalize() -> None:
    solution = ["--primes", "2,3", "--solution", "3,1,1,1,2,-1,8"]
    assert _result(["classify-subsums", *solution])["case"] == "3+3-repeated-beta"
    rep = _result(["canonicalize", *solution])
    assert rep["x0"] == ["3/2"]
    assert rep["y0"] == ["1/2"]


def test_equiv_and_ns_solve() -> None:
    result = _result(["equiv", "--form", "1,0,1", "--form-g", "1,2,2", "--box", "1"])
    assert result["status"] == "equivalent"
    ns = _result(["ns-solve", "--form", "1,0,1", "--m", "2", "--xy-box", "1"])
    assert ns["count"] == 8
    assert ns["classes"] == 4


def test_twist_search_with_config(tmp_path: Path) -> None:
    config = str(_cubic_config(tmp_path))
    argv = ["twist-search", "--config", config, "--form", "1,0,-1,-1", "--box", "0"]
    result = _result([*argv, "--xy-box", "4"])
    count = result["count"]
    assert isinstance(count, int) and count >= 4


def test_field_self_check(tmp_path: Path) -> None:
    argv = ["field", "--config", str(_cubic_config(tmp_path)), "--samples", "5", "--seed", "1"]
    result = _result(argv)
    check = _section(result, "self_check")
    assert check["samples"] == check["product_formula_passed"]
    assert _section(result, "field")["discriminant"] == "-23"


def test_usage_errors_exit_two() -> None:
    missing = run(["twist-search", "--form", "1,0,-1,-1"], SETTINGS)
    assert missing.code == 2
    assert not missing.parsed
    doc = _doc(missing.payload)
    assert _section(doc, "error")["kind"] == "usage"
    assert "usage:" in str(doc["usage"])
    assert run(["nonsense"], SETTINGS).code == 2
    assert run(["constants", "--precision", "16"], SETTINGS).code == 2
    assert run(["enumerate-box", "--height", "abc"], SETTINGS).code == 2


def test_handler_usage_error_is_reported() -> None:
    out = run(["classify-subsums", "--solution", "1,2,3"], SETTINGS)
    assert out.code == 2
    assert out.parsed
    assert _section(_doc(out.payload), "error")["kind"] == "usage"


def test_domain_errors_exit_one() -> None:
    out = run(["sunit-solve", "--deltas", "1,0"], SETTINGS)
    assert out.code == 1
    assert _section(_doc(out.payload), "error")["kind"] == "zero_input"
    argv = ["sunit-solve", "--deltas", "1,1", "--primes", "2", "--box", "50", "--cap", "10"]
    capped = run(argv, SETTINGS)
    assert capped.code == 1
    assert _section(_doc(capped.payload), "error")["kind"] == "cap_exceeded"


def test_errors_render_as_json_even_for_csv() -> None:
    out = run(["sunit-solve", "--deltas", "1,0", "--format", "csv"], SETTINGS)
    assert "error" in _doc(out.payload)


def test_parse_invocation_defaults() -> None:
    inv = parse_invocation(["solve-family"], Settings(cap=500, workers=2))
    assert inv.cap == 500
    assert inv.workers == 2
    assert inv.alphas == ("1", "1", "1")
    assert not inv.normalized
    assert parse_invocation(["solve-family", "--normalized"], SETTINGS).normalized
    with pytest.raises(UsageError):
        parse_invocation(["solve-family", "--box", "-1"], SETTINGS)
    report, code = execute(parse_invocation(["constants"], SETTINGS))
    assert code == 0
    assert report.error is None


def test_parse_element() -> None:
    k = NumberField([1, 0, 1])
    assert parse_element(k, "3/2").coords == (Fraction(3, 2), Fraction(0))
    assert parse_element(k, "1:-1").coords == (Fraction(1), Fraction(-1))
    with pytest.raises(UsageError):
        parse_element(k, "1:2:3")
    with pytest.raises(UsageError):
        parse_element(k, "x")


def _clear_env(monkeypatch: MonkeyPatch) -> None:
    for name in ("THUE_PRECISION", "THUE_CAP", "THUE_WORKERS", "THUE_FORMAT", "LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def test_main_writes_stdout(capsys: CaptureFixture[str], monkeypatch: MonkeyPatch) -> None:
    _clear_env(monkeypatch)
    assert main(["constants"]) == 0
    doc: dict[str, object] = json.loads(capsys.readouterr().out)
    assert doc["command"] == "constants"


def test_main_writes_out_file(tmp_path: Path, monkeypatch: MonkeyPatch) -> None:
    _clear_env(monkeypatch)
    target = tmp_path / "report.json"
    assert main(["constants", "--out", str(target)]) == 0
    assert _section(_doc(target.read_bytes()), "result")["kappa5"] == "4"


def test_main_usage_goes_to_stderr(
    capsys: CaptureFixture[str], monkeypatch: MonkeyPatch
) -> None:
    _clear_env(monkeypatch)
    assert main(["equiv"]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert '"kind": "usage"' in captured.err


def test_main_rejects_bad_environment(
    capsys: CaptureFixture[str], monkeypatch: MonkeyPatch
) -> None:
    monkeypatch.setenv("THUE_PRECISION", "8")
    assert main(["constants"]) == 2
    assert '"kind": "config"' in capsys.readouterr().err
