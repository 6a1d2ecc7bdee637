"""Config service demo: start the wire API, poke parameters over a raw TCP
socket, watch subscription events and clamping behavior."""

import json
import socket
import threading
import time

from soccerbot.config import ParamTree
from soccerbot.defaults import declare_all
from soccerbot.server import ConfigService

tree = declare_all(ParamTree())
service = ConfigService(tree, port=0)
print(f"service listening on 127.0.0.1:{service.port}")

sock = socket.create_connection(("127.0.0.1", service.port))
buf = b""

def request(**kw):
    global buf
    sock.sendall((json.dumps(kw) + "\n").encode())
    while True:
        while b"\n" not in buf:
            buf += sock.recv(4096)
        line, _, buf = buf.partition(b"\n")
        msg = json.loads(line)
        if msg.get("id") == kw.get("id"):
            return msg
        print(f"  [event] {msg}")

print("\n-- subscribe to /gait, then tune --")
print(request(op="subscribe", path="/gait", id=1))
print(request(op="set", path="/gait/freq", value=2.2, id=2))
time.sleep(0.2)

print("\n-- a second writer triggers an event on our socket --")
tree.set("/gait/a_lat", 0.08)
time.sleep(0.2)
request(op="get", path="/gait/a_lat", id=3)  # drains the event en route

print("\n-- clamping: ask for 99 Hz, get the meta max --")
print(request(op="set", path="/gait/freq", value=99.0, id=4))

print("\n-- list a subtree with slider metadata --")
reply = request(op="list", path="/fall", id=5)
for entry in reply["entries"]:
    print(f"  {entry['path']}: {entry['value']} {entry['meta']}")

sock.close()
service.close()
