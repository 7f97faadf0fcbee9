"""HTTP front of the annotation store: JSON API plus static UI serving.

Endpoints (JSON bodies, UTF-8):
  POST /api/session        {annotator_id, condition} -> {assigned_count}
  GET  /api/next?annotator=ID -> {audio_id, completed, total} | {done, ...}
  GET  /api/audio/{audio_id}?annotator=ID -> audio/wav bytes
  POST /api/transcription  {annotator_id, audio_id, text} -> 204
  GET  /api/export         -> text/plain record dump
Everything else is served from the UI bundle directory at /.
"""

from __future__ import annotations

import json
import logging
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

from .annotation import AnnotationStore
from .errors import (
    DuplicateAnnotatorError,
    GarbleError,
    NoRecordsError,
    NotAssignedError,
    UnknownAnnotatorError,
    UnknownConditionError,
)

log = logging.getLogger(__name__)

_STATUS_FOR = {
    DuplicateAnnotatorError: 409,
    UnknownConditionError: 404,
    UnknownAnnotatorError: 404,
    NotAssignedError: 403,
    NoRecordsError: 404,
}

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
    ".png": "image/png",
}

_FALLBACK_PAGE = b"""<!doctype html>
<html><head><meta charset="utf-8"><title>annotation service</title></head>
<body><p>Annotation API is running. No UI bundle is installed;
point --ui-dir at a built frontend to serve it here.</p></body></html>
"""


class AnnotationHandler(BaseHTTPRequestHandler):
    store: AnnotationStore  # set by make_server
    ui_dir: Path | None = None

    # --- plumbing ---

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _send(self, code: int, content_type: str, body: bytes) -> None:
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, code: int, payload: dict) -> None:
        self._send(code, "application/json; charset=utf-8",
                   json.dumps(payload).encode("utf-8"))

    def _send_error_json(self, exc: Exception) -> None:
        code = _STATUS_FOR.get(type(exc), 400)
        self._send_json(code, {"error": str(exc)})

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", "0"))
        body = self.rfile.read(length) if length else b""
        try:
            payload = json.loads(body.decode("utf-8")) if body else {}
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValueError(f"bad JSON body: {exc}") from exc
        if not isinstance(payload, dict):
            raise ValueError("JSON body must be an object")
        return payload

    # --- verbs ---

    def do_GET(self):
        url = urlparse(self.path)
        query = parse_qs(url.query)
        try:
            if url.path == "/api/next":
                self._handle_next(query)
            elif url.path.startswith("/api/audio/"):
                self._handle_audio(unquote(url.path[len("/api/audio/"):]), query)
            elif url.path == "/api/export":
                self._send(200, "text/plain; charset=utf-8",
                           self.store.export_text().encode("utf-8"))
            elif url.path == "/api/conditions":
                self._send_json(200, {"conditions": self.store.conditions()})
            elif url.path.startswith("/api/"):
                self._send_json(404, {"error": f"no such endpoint {url.path}"})
            else:
                self._handle_static(url.path)
        except (GarbleError, ValueError) as exc:
            self._send_error_json(exc)

    def do_POST(self):
        url = urlparse(self.path)
        try:
            payload = self._read_json()
            if url.path == "/api/session":
                self._handle_create_session(payload)
            elif url.path == "/api/transcription":
                self._handle_transcription(payload)
            else:
                self._send_json(404, {"error": f"no such endpoint {url.path}"})
        except (GarbleError, ValueError) as exc:
            self._send_error_json(exc)

    # --- endpoint bodies ---

    def _require(self, payload: dict, key: str) -> str:
        value = payload.get(key)
        if not isinstance(value, str) or not value:
            raise ValueError(f"missing field {key!r}")
        return value

    def _handle_create_session(self, payload: dict) -> None:
        annotator = self._require(payload, "annotator_id")
        condition = self._require(payload, "condition")
        session = self.store.create_session(annotator, condition)
        self._send_json(200, {"assigned_count": len(session.assigned_audio_ids)})

    def _handle_next(self, query: dict) -> None:
        annotator = (query.get("annotator") or [""])[0]
        if not annotator:
            raise ValueError("missing query parameter 'annotator'")
        audio_id = self.store.next_item(annotator)
        completed, total = self.store.progress(annotator)
        if audio_id is None:
            self._send_json(200, {"done": True, "completed": completed, "total": total})
        else:
            self._send_json(200, {"audio_id": audio_id, "completed": completed, "total": total})

    def _handle_audio(self, audio_id: str, query: dict) -> None:
        annotator = (query.get("annotator") or [""])[0]
        if not annotator:
            raise ValueError("missing query parameter 'annotator'")
        path = self.store.audio_path(annotator, audio_id)
        if "/" in audio_id or not path.is_file():
            self._send_json(404, {"error": f"no audio {audio_id!r}"})
            return
        self._send(200, "audio/wav", path.read_bytes())

    def _handle_transcription(self, payload: dict) -> None:
        annotator = self._require(payload, "annotator_id")
        audio_id = self._require(payload, "audio_id")
        text = payload.get("text")
        if not isinstance(text, str):
            raise ValueError("missing field 'text'")
        self.store.submit(annotator, audio_id, text)
        self.send_response(204)
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _handle_static(self, path: str) -> None:
        if self.ui_dir is None:
            self._send(200, "text/html; charset=utf-8", _FALLBACK_PAGE)
            return
        rel = unquote(path).lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not target.is_relative_to(self.ui_dir.resolve()) or not target.is_file():
            self._send_json(404, {"error": f"no such file {path}"})
            return
        content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, content_type, target.read_bytes())


def make_server(store: AnnotationStore, port: int = 0,
                ui_dir: str | Path | None = None) -> ThreadingHTTPServer:
    """Build a threaded HTTP server bound to 0.0.0.0:port (0 = ephemeral)."""
    handler = type("BoundAnnotationHandler", (AnnotationHandler,), {
        "store": store,
        "ui_dir": Path(ui_dir) if ui_dir else None,
    })
    return ThreadingHTTPServer(("0.0.0.0", port), handler)
