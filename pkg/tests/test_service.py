import json

import pytest
from fastapi.testclient import TestClient

from conftest import sine
from toneval.audio import save_wav
from toneval.errors import SchemaError
from toneval.service import EvalServer, create_app, load_study
from toneval.service.core import TokenCodec, TokenError
from toneval.stats import load_ratings_csv

CONDITIONS = ["Natural", "SystemA", "SystemB"]
IDS = ["MZ00051-7", "MZ00053-17", "MZ000113-13"]
EXPORT_TOKEN = "test-operator-token"


def make_study(tmp_path, seed=4242, n_ids=3):
    audio_dir = tmp_path / "audio"
    audio_dir.mkdir(exist_ok=True)
    stimuli = []
    for i, raw_id in enumerate(IDS[:n_ids]):
        for j, cond in enumerate(CONDITIONS):
            rel = f"audio/{i}_{j}.wav"
            save_wav(tmp_path / rel, sine(200 + 20 * i + 5 * j, 0.1))
            stimuli.append({"id": raw_id, "condition": cond, "audio": rel})
    manifest = {
        "study_id": "study-1",
        "conditions": CONDITIONS,
        "seed": seed,
        "stimuli": stimuli,
    }
    path = tmp_path / "study.json"
    path.write_text(json.dumps(manifest), encoding="utf-8")
    return path


@pytest.fixture
def client(tmp_path):
    study = load_study(make_study(tmp_path))
    server = EvalServer(study, tmp_path / "ratings.jsonl")
    app = create_app(server, EXPORT_TOKEN)
    with TestClient(app) as c:
        yield c, server


def _run_session(client, subject, rate=lambda k: (("Real", 5) if k % 2 else ("Artificial", 2))):
    responses = []
    r = client.post("/api/session", json={"subject_id": subject})
    responses.append(r)
    sid = r.json()["session_id"]
    k = 0
    while True:
        r = client.get(f"/api/session/{sid}/next")
        responses.append(r)
        body = r.json()
        if body.get("done"):
            break
        audio = client.get(body["audio_url"])
        responses.append(audio)
        nat, likert = rate(k)
        sub = client.post(
            f"/api/session/{sid}/rating",
            json={"token": body["token"], "naturalness": nat, "likert": likert},
        )
        responses.append(sub)
        assert sub.status_code == 200, sub.text
        k += 1
    return sid, responses


def test_study_load_rejects_missing_audio(tmp_path):
    path = make_study(tmp_path)
    manifest = json.loads(path.read_text())
    manifest["stimuli"][0]["audio"] = "audio/nope.wav"
    path.write_text(json.dumps(manifest))
    with pytest.raises(SchemaError, match="nope.wav"):
        load_study(path)


def test_study_load_rejects_duplicate_stimulus(tmp_path):
    path = make_study(tmp_path)
    manifest = json.loads(path.read_text())
    manifest["stimuli"].append(dict(manifest["stimuli"][0]))
    path.write_text(json.dumps(manifest))
    with pytest.raises(SchemaError, match="duplicate"):
        load_study(path)


def test_token_codec_roundtrip():
    codec = TokenCodec(99)
    token = codec.encode("sess-a", 7)
    assert codec.decode("sess-a", token) == 7
    with pytest.raises(TokenError):
        codec.decode("sess-b", token)  # foreign session
    with pytest.raises(TokenError):
        codec.decode("sess-a", token[:-2] + "zz")


def test_health(client):
    c, _ = client
    assert c.get("/api/health").json()["study_id"] == "study-1"


def test_session_resume_same_order(client):
    c, server = client
    r1 = c.post("/api/session", json={"subject_id": "alice"})
    r2 = c.post("/api/session", json={"subject_id": "alice"})
    assert r1.json()["session_id"] == r2.json()["session_id"]


def test_two_subjects_different_orders(client):
    c, server = client
    a = c.post("/api/session", json={"subject_id": "alice"}).json()["session_id"]
    b = c.post("/api/session", json={"subject_id": "bob"}).json()["session_id"]
    assert server.sessions[a].order != server.sessions[b].order


def test_full_session_flow_and_export(client):
    c, server = client
    sid, _ = _run_session(c, "alice")
    done = c.get(f"/api/session/{sid}/next").json()
    assert done["done"] is True
    assert done["progress"] == {"completed": 9, "total": 9}

    r = c.get("/api/export", headers={"Authorization": f"Bearer {EXPORT_TOKEN}"})
    assert r.status_code == 200
    records = load_ratings_csv(r.text)
    assert len(records) == 9
    # one rating per (utterance, condition)
    assert len({(rec.utterance_id.raw, rec.condition) for rec in records}) == 9


def test_condition_blindness(client):
    c, _ = client
    _, responses = _run_session(c, "alice")
    forbidden = CONDITIONS + IDS
    for resp in responses:
        payload = resp.content
        for needle in forbidden:
            assert needle.encode() not in payload, (resp.request.url, needle)
        for header, value in resp.headers.items():
            for needle in forbidden:
                assert needle not in value and needle not in header


def test_export_requires_token(client):
    c, _ = client
    assert c.get("/api/export").status_code == 401
    bad = c.get("/api/export", headers={"Authorization": "Bearer wrong"})
    assert bad.status_code == 401


def test_export_zero_ratings_header_only(client):
    c, _ = client
    r = c.get("/api/export", headers={"Authorization": f"Bearer {EXPORT_TOKEN}"})
    assert r.text == "subject,sentence,type,mos,naturalness\n"


def test_likert_out_of_range_rejected(client):
    c, server = client
    sid = c.post("/api/session", json={"subject_id": "alice"}).json()["session_id"]
    body = c.get(f"/api/session/{sid}/next").json()
    before = server.sessions[sid].cursor
    r = c.post(
        f"/api/session/{sid}/rating",
        json={"token": body["token"], "naturalness": "Real", "likert": 6},
    )
    assert r.status_code == 400
    assert server.sessions[sid].cursor == before


def test_foreign_token_rejected(client):
    c, _ = client
    sid_a = c.post("/api/session", json={"subject_id": "alice"}).json()["session_id"]
    sid_b = c.post("/api/session", json={"subject_id": "bob"}).json()["session_id"]
    token_a = c.get(f"/api/session/{sid_a}/next").json()["token"]
    r = c.post(
        f"/api/session/{sid_b}/rating",
        json={"token": token_a, "naturalness": "Real", "likert": 3},
    )
    assert r.status_code == 403


def test_unknown_session_404(client):
    c, _ = client
    assert c.get("/api/session/nope/next").status_code == 404


def test_resubmission_latest_wins(client):
    c, server = client
    sid = c.post("/api/session", json={"subject_id": "alice"}).json()["session_id"]
    body = c.get(f"/api/session/{sid}/next").json()
    first = c.post(
        f"/api/session/{sid}/rating",
        json={"token": body["token"], "naturalness": "Real", "likert": 2},
    )
    assert first.status_code == 200
    again = c.post(
        f"/api/session/{sid}/rating",
        json={"token": body["token"], "naturalness": "Artificial", "likert": 4},
    )
    assert again.status_code == 200
    r = c.get("/api/export", headers={"Authorization": f"Bearer {EXPORT_TOKEN}"})
    rows = [ln for ln in r.text.splitlines()[1:] if ln]
    assert len(rows) == 1
    assert rows[0].endswith("4,Artificial")
    # supersession recorded in the log
    log = (server.log_path).read_text().splitlines()
    last = json.loads(log[-1])
    assert last["resubmission"] is True


def test_audio_bytes_served(client):
    c, _ = client
    sid = c.post("/api/session", json={"subject_id": "alice"}).json()["session_id"]
    body = c.get(f"/api/session/{sid}/next").json()
    audio = c.get(body["audio_url"])
    assert audio.status_code == 200
    assert audio.headers["content-type"] == "audio/wav"
    assert audio.content[:4] == b"RIFF"


def test_restart_preserves_sessions_and_ratings(tmp_path):
    study = load_study(make_study(tmp_path))
    log = tmp_path / "ratings.jsonl"
    server1 = EvalServer(study, log)
    app1 = create_app(server1, EXPORT_TOKEN)
    with TestClient(app1) as c:
        sid, _ = _run_session(c, "alice")
        c.post("/api/session", json={"subject_id": "bob"})
        export_before = c.get(
            "/api/export", headers={"Authorization": f"Bearer {EXPORT_TOKEN}"}
        ).text
    server1.close()

    server2 = EvalServer(study, log)
    app2 = create_app(server2, EXPORT_TOKEN)
    with TestClient(app2) as c:
        # same session id and cursor survive the restart
        r = c.post("/api/session", json={"subject_id": "alice"})
        assert r.json()["session_id"] == sid
        assert r.json()["progress"]["completed"] == 9
        export_after = c.get(
            "/api/export", headers={"Authorization": f"Bearer {EXPORT_TOKEN}"}
        ).text
    assert export_after == export_before


def test_export_deterministic_across_equal_runs(tmp_path):
    exports = []
    for run in range(2):
        root = tmp_path / f"run{run}"
        root.mkdir()
        study = load_study(make_study(root, seed=777))
        server = EvalServer(study, root / "ratings.jsonl")
        with TestClient(create_app(server, EXPORT_TOKEN)) as c:
            _run_session(c, "alice")
            _run_session(c, "bob")
            exports.append(
                c.get("/api/export", headers={"Authorization": f"Bearer {EXPORT_TOKEN}"}).text
            )
        server.close()
    assert exports[0] == exports[1]


def test_static_ui_mount(tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>listening test</title>")
    study = load_study(make_study(tmp_path))
    server = EvalServer(study, tmp_path / "r.jsonl")
    with TestClient(create_app(server, EXPORT_TOKEN, ui_dir=str(ui))) as c:
        page = c.get("/")
        assert page.status_code == 200
        assert "listening test" in page.text
        # API routes still take precedence over the static mount.
        assert c.get("/api/health").json()["ok"] is True
    server.close()


def test_torn_trailing_log_line_dropped(tmp_path):
    study = load_study(make_study(tmp_path))
    log = tmp_path / "ratings.jsonl"
    server = EvalServer(study, log)
    server.create_session("alice")
    server.close()
    with open(log, "ab") as fh:
        fh.write(b'{"kind":"rating","session')  # torn write, never acked
    with pytest.warns(UserWarning, match="torn"):
        server2 = EvalServer(study, log)
    assert "alice" in server2.by_subject
    server2.close()
