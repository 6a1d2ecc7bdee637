import base64
import json
import socket
import time

import pytest

from soccerbot.config import ParamTree
from soccerbot.defaults import declare_all
from soccerbot.runtime.telemetry import TelemetryFrame, TelemetryHub
from soccerbot.server import ConfigService
from soccerbot.vision.lut import ColorLut


class NdjsonClient:
    def __init__(self, port):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=5)
        self.buf = b""
        self._next_id = 0

    def request(self, **kwargs):
        self._next_id += 1
        kwargs.setdefault("id", self._next_id)
        self.sock.sendall((json.dumps(kwargs) + "\n").encode())
        while True:
            msg = self.read_message()
            if msg.get("id") == kwargs["id"]:
                return msg

    def read_message(self, timeout=5.0):
        self.sock.settimeout(timeout)
        while b"\n" not in self.buf:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("closed")
            self.buf += chunk
        line, _, self.buf = self.buf.partition(b"\n")
        return json.loads(line)

    def close(self):
        self.sock.close()


@pytest.fixture
def service():
    tree = declare_all(ParamTree())
    hub = TelemetryHub()
    lut_store = {"lut": ColorLut()}
    svc = ConfigService(tree, port=0, telemetry_hub=hub,
                        lut_get=lambda: lut_store["lut"].to_bytes(),
                        lut_set=lambda b: lut_store.update(lut=ColorLut.from_bytes(b)))
    yield svc, tree, hub, lut_store
    svc.close()


def test_set_get_over_tcp(service):
    svc, tree, _, _ = service
    client = NdjsonClient(svc.port)
    reply = client.request(op="set", path="/gait/freq", value=2.0)
    assert reply["ok"] and reply["value"] == 2.0
    assert tree.get("/gait/freq") == 2.0
    reply = client.request(op="get", path="/gait/freq")
    assert reply["value"] == 2.0
    client.close()


def test_set_clamps_and_reports(service):
    svc, _, _, _ = service
    client = NdjsonClient(svc.port)
    reply = client.request(op="set", path="/gait/freq", value=99.0)
    assert reply["ok"] and reply["value"] == 5.0
    client.close()


def test_list_carries_meta(service):
    svc, _, _, _ = service
    client = NdjsonClient(svc.port)
    reply = client.request(op="list", path="/gait")
    assert reply["ok"]
    entries = {e["path"]: e for e in reply["entries"]}
    assert entries["/gait/freq"]["meta"]["max"] == 5.0
    client.close()


def test_error_reply_for_unknown_path(service):
    svc, _, _, _ = service
    client = NdjsonClient(svc.port)
    reply = client.request(op="get", path="/nope")
    assert reply["ok"] is False
    client.close()


def test_subscription_events(service):
    svc, tree, _, _ = service
    client = NdjsonClient(svc.port)
    assert client.request(op="subscribe", path="/gait")["ok"]
    tree.set("/gait/freq", 2.2)
    event = client.read_message()
    assert event == {"event": "param", "path": "/gait/freq", "value": 2.2,
                     "seq": event["seq"]}
    client.close()


def test_telemetry_stream(service):
    svc, _, hub, _ = service
    client = NdjsonClient(svc.port)
    client.request(op="get", path="/gait/freq")  # ensure connected
    frame = TelemetryFrame(cycle=12, t_us=96000, targets=[0.0] * 20,
                           positions=[0.0] * 20,
                           attitude={"roll": 0, "pitch": 0, "yaw": 0},
                           fall_state="stable", behavior_state="search",
                           battery_v=16.8, detections={})
    hub.publish(frame)
    event = client.read_message()
    assert event["event"] == "telemetry"
    assert event["cycle"] == 12
    client.close()


def test_lut_upload_download(service):
    svc, _, _, store = service
    client = NdjsonClient(svc.port)
    lut = ColorLut()
    lut.grow(133, 53, 215, 1, radius=1)
    reply = client.request(op="lut_upload",
                           data=base64.b64encode(lut.to_bytes()).decode())
    assert reply["ok"]
    assert store["lut"].lookup(133, 53, 215) == 1
    reply = client.request(op="lut_download")
    assert base64.b64decode(reply["data"]) == lut.to_bytes()
    client.close()


def test_save_load_over_wire(service, tmp_path):
    svc, tree, _, _ = service
    client = NdjsonClient(svc.port)
    client.request(op="set", path="/gait/freq", value=3.3)
    path = str(tmp_path / "config.json")
    assert client.request(op="save", path=path)["ok"]
    client.request(op="set", path="/gait/freq", value=1.0)
    assert client.request(op="load", path=path)["ok"]
    assert tree.get("/gait/freq") == 3.3
    client.close()


# -- websocket upgrade ---------------------------------------------------------

def ws_handshake(port):
    sock = socket.create_connection(("127.0.0.1", port), timeout=5)
    sock.sendall(b"GET / HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\n"
                 b"Connection: Upgrade\r\nSec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\n"
                 b"Sec-WebSocket-Version: 13\r\n\r\n")
    response = b""
    while b"\r\n\r\n" not in response:
        response += sock.recv(4096)
    return sock, response


def ws_send_text(sock, text):
    payload = text.encode()
    mask = b"\x01\x02\x03\x04"
    masked = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    header = bytearray([0x81])
    if len(payload) < 126:
        header.append(0x80 | len(payload))
    else:
        header.append(0x80 | 126)
        header += len(payload).to_bytes(2, "big")
    sock.sendall(bytes(header) + mask + masked)


def ws_recv_text(sock):
    def read_exact(n):
        out = b""
        while len(out) < n:
            chunk = sock.recv(n - len(out))
            if not chunk:
                raise ConnectionError
            out += chunk
        return out
    hdr = read_exact(2)
    length = hdr[1] & 0x7F
    if length == 126:
        length = int.from_bytes(read_exact(2), "big")
    elif length == 127:
        length = int.from_bytes(read_exact(8), "big")
    return read_exact(length).decode()


def test_websocket_upgrade_and_request(service):
    svc, tree, _, _ = service
    sock, response = ws_handshake(svc.port)
    assert b"101 Switching Protocols" in response
    # RFC 6455 sample key has a known accept token
    assert b"s3pPLMBiTxaQ9kYGzzhZRbK+xOo=" in response
    ws_send_text(sock, json.dumps({"op": "set", "path": "/gait/freq",
                                   "value": 2.4, "id": 1}))
    reply = json.loads(ws_recv_text(sock))
    assert reply["ok"] and reply["value"] == 2.4
    assert tree.get("/gait/freq") == 2.4
    sock.close()


def test_websocket_subscription(service):
    svc, tree, _, _ = service
    sock, _ = ws_handshake(svc.port)
    ws_send_text(sock, json.dumps({"op": "subscribe", "path": "/", "id": 1}))
    assert json.loads(ws_recv_text(sock))["ok"]
    tree.set("/behavior/stale_s", 1.5)
    event = json.loads(ws_recv_text(sock))
    assert event["event"] == "param"
    assert event["path"] == "/behavior/stale_s"
    sock.close()


def test_http_image_endpoints():
    import urllib.request
    import numpy as np
    from soccerbot.http_view import ImageServer

    planes = (np.full((600, 800), 96, np.uint8),
              np.full((600, 800), 97, np.uint8),
              np.full((600, 800), 81, np.uint8))
    counts = np.zeros((6, 150, 200), np.uint8)
    counts[2] = 16
    server = ImageServer(lambda: (planes, counts), port=0)
    try:
        with urllib.request.urlopen(
                f"http://127.0.0.1:{server.port}/camera.png") as reply:
            assert reply.status == 200
            assert reply.read()[:8] == b"\x89PNG\r\n\x1a\n"
        with urllib.request.urlopen(
                f"http://127.0.0.1:{server.port}/classes.png") as reply:
            assert reply.read()[:8] == b"\x89PNG\r\n\x1a\n"
    finally:
        server.close()
