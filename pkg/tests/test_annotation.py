import http.client
import json
import threading

import pytest

from garble.annotation import AnnotationStore, escape_text, unescape_text
from garble.errors import (
    DuplicateAnnotatorError,
    NoRecordsError,
    NotAssignedError,
    UnknownAnnotatorError,
    UnknownConditionError,
)
from garble.server import make_server

from conftest import make_corpus


@pytest.fixture
def conditions_dir(tmp_path):
    """Two conditions, 5 files each, mirroring a harness output tree."""
    root = tmp_path / "conditions"
    for label in ("x", "x+d-15"):
        make_corpus(root / label, count=5, seconds=0.2)
        for txt in (root / label).glob("*.txt"):
            txt.unlink()
    return root


def new_store(tmp_path, conditions_dir, seed=0, name="records.tsv"):
    return AnnotationStore(conditions_dir, tmp_path / name, seed=seed)


# --- session logic ---

def test_assignment_clamps_to_condition_size(tmp_path, conditions_dir):
    store = new_store(tmp_path, conditions_dir)
    session = store.create_session("ann1", "x")
    assert len(session.assigned_audio_ids) == 5
    assert sorted(session.assigned_audio_ids) == sorted(set(session.assigned_audio_ids))


def test_assignment_deterministic_for_seed_and_ordinal(tmp_path, conditions_dir):
    # same (seed, condition, ordinal) -> same draw, regardless of annotator name
    first = new_store(tmp_path, conditions_dir, seed=42, name="a.tsv")
    second = new_store(tmp_path, conditions_dir, seed=42, name="b.tsv")
    assert (first.create_session("x1", "x").assigned_audio_ids
            == second.create_session("y1", "x").assigned_audio_ids)
    pool = {p.stem for p in (conditions_dir / "x").glob("*.wav")}
    assert set(first.sessions["x1"].assigned_audio_ids) <= pool


def test_duplicate_annotator_rejected(tmp_path, conditions_dir):
    store = new_store(tmp_path, conditions_dir)
    store.create_session("ann1", "x")
    with pytest.raises(DuplicateAnnotatorError):
        store.create_session("ann1", "x+d-15")


def test_unknown_condition_rejected(tmp_path, conditions_dir):
    with pytest.raises(UnknownConditionError):
        new_store(tmp_path, conditions_dir).create_session("ann1", "x+d-99")


def test_next_item_walks_assignment_in_order(tmp_path, conditions_dir):
    store = new_store(tmp_path, conditions_dir)
    session = store.create_session("ann1", "x")
    seen = []
    while (item := store.next_item("ann1")) is not None:
        seen.append(item)
        store.submit("ann1", item, f"words for {item}")
    assert seen == session.assigned_audio_ids
    assert store.next_item("ann1") is None


def test_submit_unassigned_rejected(tmp_path, conditions_dir):
    store = new_store(tmp_path, conditions_dir)
    store.create_session("ann1", "x")
    with pytest.raises(NotAssignedError):
        store.submit("ann1", "not-a-real-id", "text")


def test_unknown_annotator_rejected(tmp_path, conditions_dir):
    store = new_store(tmp_path, conditions_dir)
    with pytest.raises(UnknownAnnotatorError):
        store.next_item("ghost")
    with pytest.raises(UnknownAnnotatorError):
        store.submit("ghost", "utt00", "text")


def test_resubmission_latest_wins_on_export(tmp_path, conditions_dir):
    store = new_store(tmp_path, conditions_dir)
    session = store.create_session("ann1", "x")
    first_item = session.assigned_audio_ids[0]
    store.submit("ann1", first_item, "first attempt")
    store.submit("ann1", first_item, "second attempt")
    records = store.latest_records()
    assert len(records) == 1
    assert records[0].raw_text == "second attempt"
    # raw store keeps both lines (append-only)
    assert len(store.records) == 2


def test_export_raises_without_records(tmp_path, conditions_dir):
    with pytest.raises(NoRecordsError):
        new_store(tmp_path, conditions_dir).export_records(tmp_path / "exp")


def test_export_round_trip_verbatim(tmp_path, conditions_dir):
    store = new_store(tmp_path, conditions_dir)
    session = store.create_session("ann1", "x")
    gnarly = "line one\nline two\twith tab \\ backslash"
    store.submit("ann1", session.assigned_audio_ids[0], gnarly)
    out = store.export_records(tmp_path / "exp")
    line = out.read_text().strip()
    fields = line.split("\t")
    assert fields[0] == "ann1"
    assert unescape_text(fields[3]) == gnarly


def test_escape_round_trip():
    for text in ["plain", "tab\there", "nl\nhere", "back\\slash", "\\t literal", ""]:
        assert unescape_text(escape_text(text)) == text


def test_store_reload_recovers_state(tmp_path, conditions_dir):
    store = new_store(tmp_path, conditions_dir)
    session = store.create_session("ann1", "x")
    store.submit("ann1", session.assigned_audio_ids[0], "hello there")
    reloaded = new_store(tmp_path, conditions_dir)
    assert reloaded.sessions["ann1"].assigned_audio_ids == session.assigned_audio_ids
    assert reloaded.next_item("ann1") == session.assigned_audio_ids[1]
    assert reloaded.progress("ann1") == (1, 5)


def test_torn_final_line_does_not_corrupt_store(tmp_path, conditions_dir):
    store = new_store(tmp_path, conditions_dir)
    session = store.create_session("ann1", "x")
    store.submit("ann1", session.assigned_audio_ids[0], "kept")
    with open(store.records_path, "a", encoding="utf-8") as fh:
        fh.write("ann1\ttruncated-rec")  # crash mid-write, no newline
    reloaded = new_store(tmp_path, conditions_dir)
    assert len(reloaded.records) == 1
    assert reloaded.records[0].raw_text == "kept"


# --- HTTP layer, scripted requests ---

class Client:
    def __init__(self, port):
        self.port = port

    def request(self, method, path, payload=None):
        conn = http.client.HTTPConnection("127.0.0.1", self.port, timeout=5)
        body = json.dumps(payload).encode() if payload is not None else None
        headers = {"Content-Type": "application/json"} if body else {}
        conn.request(method, path, body=body, headers=headers)
        resp = conn.getresponse()
        data = resp.read()
        conn.close()
        return resp.status, resp.getheader("Content-Type", ""), data

    def json(self, method, path, payload=None):
        status, _ctype, data = self.request(method, path, payload)
        return status, json.loads(data) if data else {}


@pytest.fixture
def live_server(tmp_path, conditions_dir):
    store = new_store(tmp_path, conditions_dir, seed=7)
    server = make_server(store, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield Client(server.server_address[1]), store
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)


def test_http_full_annotation_loop(live_server):
    client, store = live_server
    status, body = client.json("POST", "/api/session",
                               {"annotator_id": "ann1", "condition": "x+d-15"})
    assert status == 200 and body["assigned_count"] == 5

    done = 0
    while True:
        status, body = client.json("GET", "/api/next?annotator=ann1")
        assert status == 200
        if body.get("done"):
            assert body["completed"] == 5
            break
        audio_id = body["audio_id"]
        status, ctype, wav = client.request("GET", f"/api/audio/{audio_id}?annotator=ann1")
        assert status == 200 and ctype == "audio/wav" and wav[:4] == b"RIFF"
        status, _ = client.json("POST", "/api/transcription",
                                {"annotator_id": "ann1", "audio_id": audio_id,
                                 "text": f"heard {audio_id}"})
        assert status == 204
        done += 1
    assert done == 5

    status, _ctype, dump = client.request("GET", "/api/export")
    assert status == 200
    assert len(dump.decode().strip().splitlines()) == 5


def test_http_error_codes(live_server):
    client, _store = live_server
    status, body = client.json("POST", "/api/session",
                               {"annotator_id": "e1", "condition": "x"})
    assert status == 200
    status, _ = client.json("POST", "/api/session",
                            {"annotator_id": "e1", "condition": "x"})
    assert status == 409
    status, _ = client.json("POST", "/api/session",
                            {"annotator_id": "e2", "condition": "bogus"})
    assert status == 404
    status, _ = client.json("GET", "/api/next?annotator=ghost")
    assert status == 404
    status, _ = client.json("POST", "/api/transcription",
                            {"annotator_id": "e1", "audio_id": "nope", "text": "x"})
    assert status == 403
    status, _ = client.json("POST", "/api/session", {"annotator_id": "e3"})
    assert status == 400


def test_http_export_empty_is_404(live_server):
    client, _store = live_server
    status, _ = client.json("GET", "/api/export")
    assert status == 404


def test_http_serves_fallback_page(live_server):
    client, _store = live_server
    status, ctype, body = client.request("GET", "/")
    assert status == 200 and ctype.startswith("text/html")


def test_http_concurrent_submissions(live_server):
    client, store = live_server
    client.json("POST", "/api/session", {"annotator_id": "c1", "condition": "x"})
    ids = store.sessions["c1"].assigned_audio_ids

    def submit(audio_id):
        status, _ = client.json("POST", "/api/transcription",
                                {"annotator_id": "c1", "audio_id": audio_id,
                                 "text": f"t {audio_id}"})
        assert status == 204

    threads = [threading.Thread(target=submit, args=(i,)) for i in ids]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert store.progress("c1") == (5, 5)
    # every line in the log parses cleanly
    reloaded = AnnotationStore(store.conditions_dir, store.records_path)
    assert len(reloaded.records) == 5
