"""Config/telemetry wire service.

One TCP port (default 7777, env NOP_CONFIG_PORT) speaks newline-delimited
JSON; a connection whose first bytes form an HTTP GET is upgraded to a
WebSocket carrying the same messages, so browsers can attach directly.

Requests: {"op": "set|get|list|subscribe|save|load|lut_upload|lut_download",
"path": ..., "value": ..., "id": n} -> {"id": n, "ok": true, ...}.
Subscription events stream as {"event": "param", "path", "value", "seq"};
telemetry frames as {"event": "telemetry", ...}.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import queue
import socket
import struct
import threading

from .config import NotFound, ParamTree

DEFAULT_PORT = 7777
WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


def config_port() -> int:
    return int(os.environ.get("NOP_CONFIG_PORT", DEFAULT_PORT))


class _LineTransport:
    def __init__(self, sock: socket.socket, initial: bytes = b""):
        self.sock = sock
        self._buf = bytearray(initial)

    def recv_message(self) -> str | None:
        while b"\n" not in self._buf:
            chunk = self.sock.recv(4096)
            if not chunk:
                return None
            self._buf += chunk
        line, _, rest = bytes(self._buf).partition(b"\n")
        self._buf = bytearray(rest)
        return line.decode("utf-8", errors="replace")

    def send_message(self, text: str):
        self.sock.sendall(text.encode("utf-8") + b"\n")

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


class _WsTransport:
    """Minimal RFC 6455 server endpoint (text frames only)."""

    def __init__(self, sock: socket.socket, initial: bytes):
        self.sock = sock
        self._buf = bytearray(initial)
        self._handshake()
        self._send_lock = threading.Lock()

    def _read_until(self, token: bytes) -> bytes:
        while token not in self._buf:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("socket closed during handshake")
            self._buf += chunk
        head, _, rest = bytes(self._buf).partition(token)
        self._buf = bytearray(rest)
        return head

    def _handshake(self):
        head = self._read_until(b"\r\n\r\n").decode("latin-1")
        key = None
        for line in head.split("\r\n")[1:]:
            name, _, value = line.partition(":")
            if name.strip().lower() == "sec-websocket-key":
                key = value.strip()
        if key is None:
            raise ConnectionError("not a websocket upgrade request")
        accept = base64.b64encode(
            hashlib.sha1((key + WS_GUID).encode()).digest()).decode()
        self.sock.sendall(
            ("HTTP/1.1 101 Switching Protocols\r\n"
             "Upgrade: websocket\r\nConnection: Upgrade\r\n"
             f"Sec-WebSocket-Accept: {accept}\r\n\r\n").encode())

    def _read_exact(self, count: int) -> bytes:
        while len(self._buf) < count:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("socket closed")
            self._buf += chunk
        out = bytes(self._buf[:count])
        del self._buf[:count]
        return out

    def recv_message(self) -> str | None:
        while True:
            try:
                hdr = self._read_exact(2)
            except ConnectionError:
                return None
            opcode = hdr[0] & 0x0F
            masked = bool(hdr[1] & 0x80)
            length = hdr[1] & 0x7F
            if length == 126:
                length = struct.unpack(">H", self._read_exact(2))[0]
            elif length == 127:
                length = struct.unpack(">Q", self._read_exact(8))[0]
            mask = self._read_exact(4) if masked else b"\x00" * 4
            payload = bytearray(self._read_exact(length))
            if masked:
                for i in range(len(payload)):
                    payload[i] ^= mask[i % 4]
            if opcode == 0x8:  # close
                return None
            if opcode == 0x9:  # ping -> pong
                self._send_frame(0xA, bytes(payload))
                continue
            if opcode in (0x1, 0x2):
                return payload.decode("utf-8", errors="replace")

    def _send_frame(self, opcode: int, payload: bytes):
        header = bytearray([0x80 | opcode])
        n = len(payload)
        if n < 126:
            header.append(n)
        elif n < 1 << 16:
            header.append(126)
            header += struct.pack(">H", n)
        else:
            header.append(127)
            header += struct.pack(">Q", n)
        with self._send_lock:
            self.sock.sendall(bytes(header) + payload)

    def send_message(self, text: str):
        self._send_frame(0x1, text.encode("utf-8"))

    def close(self):
        try:
            self._send_frame(0x8, b"")
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


class _Connection:
    def __init__(self, service: "ConfigService", transport):
        self.service = service
        self.transport = transport
        self.outbound: queue.Queue = queue.Queue(maxsize=4096)
        self.subscription = None
        self.alive = True
        self._writer = threading.Thread(target=self._write_loop, daemon=True)
        self._writer.start()

    def enqueue(self, message: dict):
        try:
            self.outbound.put_nowait(message)
        except queue.Full:
            try:  # drop the oldest to keep the stream moving
                self.outbound.get_nowait()
                self.outbound.put_nowait(message)
            except (queue.Empty, queue.Full):
                pass

    def _write_loop(self):
        while self.alive:
            try:
                message = self.outbound.get(timeout=0.2)
            except queue.Empty:
                continue
            try:
                self.transport.send_message(json.dumps(message, sort_keys=True))
            except (OSError, ConnectionError):
                self.alive = False

    def serve(self):
        try:
            while self.alive:
                raw = self.transport.recv_message()
                if raw is None:
                    break
                if not raw.strip():
                    continue
                try:
                    request = json.loads(raw)
                except json.JSONDecodeError:
                    self.enqueue({"ok": False, "error": "malformed json"})
                    continue
                self.enqueue(self.service.handle(request, self))
        except (OSError, ConnectionError):
            pass
        finally:
            self.alive = False
            if self.subscription is not None:
                self.service.tree.unsubscribe(self.subscription)
            self.service._drop(self)
            self.transport.close()


class ConfigService:
    """Serves a ParamTree (and optional telemetry/LUT hooks) over TCP/WS."""

    def __init__(self, tree: ParamTree, host: str = "127.0.0.1",
                 port: int | None = None, telemetry_hub=None,
                 lut_get=None, lut_set=None, motion_get=None, motion_set=None,
                 motion_list=None):
        self.tree = tree
        self.host = host
        self.port = port if port is not None else config_port()
        self.telemetry_hub = telemetry_hub
        self.lut_get = lut_get
        self.lut_set = lut_set
        self.motion_get = motion_get
        self.motion_set = motion_set
        self.motion_list = motion_list
        self._connections: list[_Connection] = []
        self._lock = threading.Lock()
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((self.host, self.port))
        self.port = self._sock.getsockname()[1]
        self._sock.listen(16)
        self._running = True
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        if telemetry_hub is not None:
            telemetry_hub.add_listener(self._on_telemetry)

    def _accept_loop(self):
        while self._running:
            try:
                sock, _addr = self._sock.accept()
            except OSError:
                break
            threading.Thread(target=self._handle_socket, args=(sock,),
                             daemon=True).start()

    def _handle_socket(self, sock: socket.socket):
        try:
            first = sock.recv(4, socket.MSG_PEEK)
            if first.startswith(b"GET "):
                transport = _WsTransport(sock, b"")
            else:
                transport = _LineTransport(sock)
        except (OSError, ConnectionError):
            sock.close()
            return
        conn = _Connection(self, transport)
        with self._lock:
            self._connections.append(conn)
        conn.serve()

    def _drop(self, conn: _Connection):
        with self._lock:
            if conn in self._connections:
                self._connections.remove(conn)

    def _on_telemetry(self, frame):
        message = {"event": "telemetry", **json.loads(frame.to_json_line())}
        with self._lock:
            conns = list(self._connections)
        for conn in conns:
            conn.enqueue(message)

    # -- request handling ------------------------------------------------------

    def handle(self, request: dict, conn: _Connection) -> dict:
        rid = request.get("id")
        op = request.get("op")
        try:
            if op == "set":
                value = self.tree.set(request["path"], request["value"])
                return {"id": rid, "ok": True, "value": value}
            if op == "get":
                return {"id": rid, "ok": True, "value": self.tree.get(request["path"])}
            if op == "list":
                entries = []
                for path, value, meta in self.tree.list(request.get("path", "/")):
                    entries.append({
                        "path": path, "value": value,
                        "meta": None if meta is None else {
                            "min": meta.min, "max": meta.max,
                            "step": meta.step, "default": meta.default},
                    })
                return {"id": rid, "ok": True, "entries": entries}
            if op == "subscribe":
                prefix = request.get("path", "/")
                if conn.subscription is not None:
                    self.tree.unsubscribe(conn.subscription)
                conn.subscription = self.tree.subscribe(prefix)
                self._start_pump(conn)
                return {"id": rid, "ok": True}
            if op == "save":
                self.tree.save(request["path"])
                return {"id": rid, "ok": True}
            if op == "load":
                self.tree.load(request["path"])
                return {"id": rid, "ok": True}
            if op == "lut_upload":
                if self.lut_set is None:
                    raise RuntimeError("no LUT consumer attached")
                self.lut_set(base64.b64decode(request["data"]))
                return {"id": rid, "ok": True}
            if op == "lut_download":
                if self.lut_get is None:
                    raise RuntimeError("no LUT source attached")
                data = base64.b64encode(self.lut_get()).decode("ascii")
                return {"id": rid, "ok": True, "data": data}
            if op == "motion_upload":
                if self.motion_set is None:
                    raise RuntimeError("no motion consumer attached")
                self.motion_set(request["name"], request["data"])
                return {"id": rid, "ok": True}
            if op == "motion_download":
                if self.motion_get is None:
                    raise RuntimeError("no motion source attached")
                return {"id": rid, "ok": True,
                        "data": self.motion_get(request["name"])}
            if op == "motion_list":
                if self.motion_list is None:
                    raise RuntimeError("no motion source attached")
                return {"id": rid, "ok": True, "names": self.motion_list()}
            return {"id": rid, "ok": False, "error": f"unknown op {op!r}"}
        except NotFound as exc:
            return {"id": rid, "ok": False, "error": f"not found: {exc}"}
        except (KeyError, TypeError, ValueError, RuntimeError, OSError) as exc:
            return {"id": rid, "ok": False, "error": str(exc)}

    def _start_pump(self, conn: _Connection):
        sub = conn.subscription

        def pump():
            while conn.alive and not sub.closed:
                item = sub.pop(timeout=0.2)
                if item is None:
                    continue
                path, value, seq = item
                conn.enqueue({"event": "param", "path": path, "value": value,
                              "seq": seq})

        threading.Thread(target=pump, daemon=True).start()

    def close(self):
        self._running = False
        try:
            self._sock.close()
        except OSError:
            pass
        if self.telemetry_hub is not None:
            self.telemetry_hub.remove_listener(self._on_telemetry)
        with self._lock:
            conns = list(self._connections)
        for conn in conns:
            conn.alive = False
            conn.transport.close()
