from __future__ import annotations

import hashlib
import json
from pathlib import Path

from _pytest.monkeypatch import MonkeyPatch
from fastapi.testclient import TestClient

from thue_mahler_kit import app as app_mod
from thue_mahler_kit.app import create_app
from thue_mahler_kit.config import Settings, is_json_object


def _client(tmp_path: Path, **overrides: frozenset[str]) -> TestClient:
    cfg = Settings(
        report_root=str(tmp_path / "reports"),
        min_free_gb=0,
        api_run_keys=overrides.get("run", frozenset()),
        api_read_keys=overrides.get("read", frozenset()),
    )
    return TestClient(create_app(cfg))


def _body(text: str) -> dict[str, object]:
    body: dict[str, object] = json.loads(text)
    return body


def _post_run(client: TestClient, argv: list[str], key: str | None = None) -> dict[str, object]:
    headers = {"X-API-Key": key} if key is not None else {}
    resp = client.post("/runs", json={"argv": argv}, headers=headers)
    assert resp.status_code == 201, resp.text
    body: dict[str, object] = json.loads(resp.text)
    return body


def test_healthz_and_readyz(tmp_path: Path) -> None:
    client = _client(tmp_path)
    assert _body(client.get("/healthz").text) == {"status": "ok"}
    r = client.get("/readyz")
    assert r.status_code == 200
    assert _body(r.text) == {"status": "ready"}


def test_readyz_degraded_when_not_writable(tmp_path: Path) -> None:
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory", encoding="utf-8")
    cfg = Settings(report_root=str(blocker / "reports"), min_free_gb=0)
    r = TestClient(create_app(cfg)).get("/readyz")
    assert r.status_code == 503
    assert _body(r.text)["reason"] == "storage not writable"


def test_readyz_degraded_on_low_disk(tmp_path: Path, monkeypatch: MonkeyPatch) -> None:
    def _tiny(path: Path) -> float:
        return 0.0

    monkeypatch.setattr(app_mod, "_free_gb", _tiny)
    cfg = Settings(report_root=str(tmp_path / "reports"), min_free_gb=1)
    r = TestClient(create_app(cfg)).get("/readyz")
    assert r.status_code == 503
    assert _body(r.text)["reason"] == "low disk"


def test_commands_listing(tmp_path: Path) -> None:
    body = _body(_client(tmp_path).get("/commands").text)
    commands = body["commands"]
    assert is_json_object(commands)
    assert commands["equiv"] == {"required": ["--form", "--form-g"]}
    assert commands["constants"] == {"required": []}


def test_run_store_and_fetch(tmp_path: Path) -> None:
    client = _client(tmp_path)
    body = _post_run(client, ["constants"])
    rid = body["report_id"]
    assert isinstance(rid, str)
    assert body["exit_code"] == 0
    assert body["sha256"] == rid

    r = client.get(f"/reports/{rid}")
    assert r.status_code == 200
    assert r.headers["ETag"] == rid
    assert r.headers["content-type"].startswith("application/json")
    assert hashlib.sha256(r.content).hexdigest() == rid
    report: dict[str, object] = json.loads(r.text)
    assert report["command"] == "constants"

    info = client.get(f"/reports/{rid}/info")
    assert info.status_code == 200
    meta: dict[str, object] = json.loads(info.text)
    assert meta["command"] == "constants"
    assert meta["format"] == "json"
    assert meta["size"] == len(r.content)


def test_identical_runs_share_an_id(tmp_path: Path) -> None:
    client = _client(tmp_path)
    first = _post_run(client, ["constants"])
    second = _post_run(client, ["constants", "--workers", "2"])
    assert first["report_id"] == second["report_id"]


def test_csv_report_media_type(tmp_path: Path) -> None:
    client = _client(tmp_path)
    body = _post_run(client, ["constants", "--format", "csv"])
    r = client.get(f"/reports/{body['report_id']}")
    assert r.headers["content-type"].startswith("text/csv")
    assert r.text.splitlines()[0] == "key,value"


def test_domain_error_is_stored_with_exit_code(tmp_path: Path) -> None:
    client = _client(tmp_path)
    body = _post_run(client, ["sunit-solve", "--deltas", "1,0"])
    assert body["exit_code"] == 1
    info: dict[str, object] = json.loads(client.get(f"/reports/{body['report_id']}/info").text)
    assert info["exit_code"] == 1


def test_run_rejects_bad_argv(tmp_path: Path) -> None:
    client = _client(tmp_path)
    r = client.post("/runs", json={"argv": ["nonsense"]}, headers={"X-Request-ID": "rid-7"})
    assert r.status_code == 400
    body: dict[str, object] = json.loads(r.text)
    assert body["kind"] == "usage"
    assert body["request_id"] == "rid-7"


def test_unknown_and_invalid_report_ids(tmp_path: Path) -> None:
    client = _client(tmp_path)
    missing = "0" * 64
    assert client.get(f"/reports/{missing}").status_code == 404
    assert client.get(f"/reports/{missing}/info").status_code == 404
    bad = client.get("/reports/not-a-hash")
    assert bad.status_code == 400
    assert _body(bad.text)["kind"] == "BAD_REQUEST"
    assert client.get("/reports/not-a-hash/info").status_code == 400


def test_auth_for_run_and_read(tmp_path: Path) -> None:
    client = _client(tmp_path, run=frozenset({"runner"}), read=frozenset({"reader"}))
    assert client.post("/runs", json={"argv": ["constants"]}).status_code == 401
    wrong = client.post("/runs", json={"argv": ["constants"]}, headers={"X-API-Key": "reader"})
    assert wrong.status_code == 403
    assert _body(wrong.text)["kind"] == "FORBIDDEN"

    body = _post_run(client, ["constants"], key="runner")
    rid = body["report_id"]
    assert client.get(f"/reports/{rid}").status_code == 401
    assert client.get(f"/reports/{rid}", headers={"X-API-Key": "runner"}).status_code == 403
    ok = client.get(f"/reports/{rid}/info", headers={"X-API-Key": "reader"})
    assert ok.status_code == 200


def test_run_reports_insufficient_storage(tmp_path: Path) -> None:
    cfg = Settings(report_root=str(tmp_path / "reports"), min_free_gb=1_000_000)
    client = TestClient(create_app(cfg))
    r = client.post("/runs", json={"argv": ["constants"]})
    assert r.status_code == 507
    assert _body(r.text)["kind"] == "INSUFFICIENT_STORAGE"


def test_create_app_reads_environment(tmp_path: Path, monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setenv("REPORT_ROOT", str(tmp_path / "env-reports"))
    monkeypatch.setenv("MIN_FREE_GB", "0")
    client = TestClient(create_app())
    body = _post_run(client, ["constants"])
    rid = body["report_id"]
    assert isinstance(rid, str)
    assert (tmp_path / "env-reports" / rid[:2] / rid[2:4] / f"{rid}.report").is_file()
