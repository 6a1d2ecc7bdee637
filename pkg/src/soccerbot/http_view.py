"""HTTP image endpoints: /camera.png (latest synthetic frame) and
/classes.png (per-cell dominant-class overlay), plus static file serving for
the dashboard. Port 7778, env NOP_HTTP_PORT."""

from __future__ import annotations

import io
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np
from PIL import Image

from .vision.classify import yuv_to_rgb

DEFAULT_PORT = 7778

# overlay colors per class id (unknown, ball, field, line, goal, obstacle)
OVERLAY_RGB = np.array([
    [40, 40, 40], [255, 96, 0], [30, 140, 40], [235, 235, 235],
    [230, 220, 0], [10, 10, 10],
], dtype=np.uint8)

MIME = {".html": "text/html", ".js": "text/javascript", ".css": "text/css",
        ".map": "application/json", ".png": "image/png", ".ico": "image/x-icon"}


def http_port() -> int:
    return int(os.environ.get("NOP_HTTP_PORT", DEFAULT_PORT))


class ImageServer:
    def __init__(self, image_source, host: str = "127.0.0.1",
                 port: int | None = None, static_dir=None):
        """image_source() -> (planes|None, counts|None)."""
        self.image_source = image_source
        self.static_dir = Path(static_dir) if static_dir else None
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _send(self, code: int, content_type: str, body: bytes):
                self.send_response(code)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(body)))
                self.send_header("Access-Control-Allow-Origin", "*")
                self.send_header("Cache-Control", "no-store")
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                path = self.path.split("?", 1)[0]
                try:
                    if path == "/camera.png":
                        self._send_png(outer.camera_png())
                    elif path == "/classes.png":
                        self._send_png(outer.classes_png())
                    else:
                        self._static(path)
                except (BrokenPipeError, ConnectionResetError):
                    pass

            def _send_png(self, png: bytes | None):
                if png is None:
                    self._send(503, "text/plain", b"no frame yet")
                else:
                    self._send(200, "image/png", png)

            def _static(self, path: str):
                if outer.static_dir is None:
                    self._send(404, "text/plain", b"not found")
                    return
                if path == "/":
                    path = "/index.html"
                target = (outer.static_dir / path.lstrip("/")).resolve()
                if (not str(target).startswith(str(outer.static_dir.resolve()))
                        or not target.is_file()):
                    self._send(404, "text/plain", b"not found")
                    return
                mime = MIME.get(target.suffix, "application/octet-stream")
                self._send(200, mime, target.read_bytes())

        self.server = ThreadingHTTPServer(
            (host, port if port is not None else http_port()), Handler)
        self.port = self.server.server_address[1]
        self._thread = threading.Thread(target=self.server.serve_forever,
                                        daemon=True)
        self._thread.start()

    def camera_png(self) -> bytes | None:
        planes, _counts = self.image_source()
        if planes is None:
            return None
        rgb = yuv_to_rgb(np.stack(planes, axis=-1))
        return _encode_png(rgb)

    def classes_png(self) -> bytes | None:
        _planes, counts = self.image_source()
        if counts is None:
            return None
        dominant = counts.argmax(axis=0).astype(np.uint8)
        rgb = OVERLAY_RGB[dominant].repeat(4, axis=0).repeat(4, axis=1)
        return _encode_png(rgb)

    def close(self):
        self.server.shutdown()
        self.server.server_close()


def _encode_png(rgb: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
