"""Servo bus walkthrough: framing, checksums, corruption handling, and a
conversation with the simulated devices."""

import numpy as np

from soccerbot import bus
from soccerbot.bus import BusPacket, SimBus

print("== encoding ==")
ping = BusPacket(id=1, instruction=bus.INSTR_PING)
wire = bus.encode(ping)
print(f"PING id=1          -> {wire.hex(' ')}")

goal = BusPacket(id=5, instruction=bus.INSTR_WRITE, params=bytes([30, 0x00, 0x08]))
print(f"WRITE goal=2048    -> {bus.encode(goal).hex(' ')}")

print("\n== decoding a noisy stream ==")
stream = b"\x13\x37" + wire + bus.encode(goal)
offset = 0
while offset < len(stream):
    try:
        pkt, consumed = bus.decode(stream[offset:])
    except bus.NeedMoreData:
        break
    print(f"  consumed {consumed:2d} bytes -> {pkt}")
    offset += consumed

print("\n== checksum protection ==")
corrupted = bytearray(wire)
corrupted[2] ^= 0x40
try:
    bus.decode(bytes(corrupted))
except (bus.ChecksumMismatch, bus.NeedMoreData) as exc:
    print(f"  flipped one bit -> {type(exc).__name__}")

print("\n== talking to the simulated bus ==")
sim = SimBus()
sim.transact(BusPacket(3, bus.INSTR_WRITE, bytes([bus.REG_GOAL_POSITION, 0x00, 0x09])))
for step in range(200):
    sim.step(0.008)
reply = sim.transact(BusPacket(3, bus.INSTR_READ, bytes([bus.REG_PRESENT_POSITION, 2])))
pos = int.from_bytes(reply[0].params, "little")
print(f"  servo 3 commanded to 2304 ticks, settled at {pos} ticks")

print("\n== bulk read of every device ==")
request = bytearray([0])
for dev in range(1, 21):
    request += bytes([2, dev, bus.REG_PRESENT_POSITION])
replies = sim.transact(BusPacket(254, bus.INSTR_BULK_READ, bytes(request)))
positions = [int.from_bytes(r.params, "little") for r in replies]
print(f"  {len(replies)} replies, positions {positions[:6]} ...")
