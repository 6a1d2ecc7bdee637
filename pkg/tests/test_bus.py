import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from soccerbot import bus, model
from soccerbot.bus import (
    BusPacket, StatusPacket, ChecksumMismatch, DeviceTimeout, NeedMoreData,
    SimBus, BusMaster, PacketLog,
    INSTR_PING, INSTR_READ, INSTR_WRITE, INSTR_SYNC_WRITE, INSTR_BULK_READ,
    REG_GOAL_POSITION, REG_PRESENT_POSITION, REG_TORQUE_ENABLE,
)


def test_encode_ping():
    # ~(0x01 + 0x02 + 0x01) & 0xFF = 0xFB, hand-computed
    assert bus.encode(BusPacket(1, INSTR_PING)) == bytes.fromhex("ffff010201fb")


def test_encode_write_goal():
    pkt = BusPacket(5, INSTR_WRITE, bytes([30, 0x00, 0x08]))
    # ~(0x05+0x05+0x03+0x1E+0x00+0x08) & 0xFF = 0xCC, hand-computed
    assert bus.encode(pkt) == bytes.fromhex("ffff0505031e0008cc")


def test_encode_broadcast_id_byte():
    wire = bus.encode(BusPacket(254, INSTR_SYNC_WRITE, bytes([30, 2, 1, 0, 8])))
    assert wire[2] == 0xFE


def test_encode_oversize_params():
    with pytest.raises(bus.EncodeError):
        bus.encode(BusPacket(1, INSTR_WRITE, bytes(251)))


def test_decode_inverse_of_encode():
    pkt, consumed = bus.decode(bytes.fromhex("ffff010201fb"))
    assert pkt == BusPacket(1, INSTR_PING, b"")
    assert consumed == 6


def test_decode_checksum_mismatch():
    data = bytearray(bytes.fromhex("ffff010201fb"))
    data[-1] = 0xFA
    with pytest.raises(ChecksumMismatch) as exc:
        bus.decode(bytes(data))
    assert exc.value.consumed == 6


def test_decode_skips_garbage():
    wire = b"\x12\x34\x56" + bus.encode(BusPacket(1, INSTR_PING))
    pkt, consumed = bus.decode(wire)
    assert pkt == BusPacket(1, INSTR_PING, b"")
    assert consumed == len(wire)


def test_decode_partial_stream():
    wire = bus.encode(BusPacket(5, INSTR_WRITE, bytes([30, 0, 8])))
    with pytest.raises(NeedMoreData):
        bus.decode(wire[:4])


def test_decode_status_side():
    status = StatusPacket(id=3, error=0, params=b"\x00\x08")
    parsed, _ = bus.decode(bus.encode_status(status), status=True)
    assert parsed == status


packet_strategy = st.builds(
    BusPacket,
    id=st.sampled_from(list(range(1, 21)) + [200, 254]),
    instruction=st.sampled_from(sorted(bus.INSTRUCTIONS)),
    params=st.binary(max_size=64),
)


@settings(max_examples=300, deadline=None)
@given(packet_strategy)
def test_round_trip_property(pkt):
    decoded, consumed = bus.decode(bus.encode(pkt))
    assert decoded == pkt
    assert consumed == len(bus.encode(pkt))


def test_round_trip_10k_random_packets():
    rng = np.random.default_rng(2024)
    stream = bytearray()
    packets = []
    for _ in range(10_000):
        pkt = BusPacket(
            id=int(rng.choice(list(range(1, 21)) + [200, 254])),
            instruction=int(rng.choice(sorted(bus.INSTRUCTIONS))),
            params=bytes(rng.integers(0, 256, size=int(rng.integers(0, 32)),
                                      dtype=np.uint8)),
        )
        packets.append(pkt)
        stream += bus.encode(pkt)
    # decode the concatenated stream back out
    view = bytes(stream)
    offset = 0
    for expected in packets:
        pkt, consumed = bus.decode(view[offset:])
        assert pkt == expected
        offset += consumed
    assert offset == len(view)


def test_single_byte_corruption_detected():
    wire = bytearray(bus.encode(BusPacket(7, INSTR_WRITE, bytes([30, 0x22, 0x01]))))
    original = bytes(wire)
    # Flip each byte to a sample of other values; the packet must never decode
    # to a *valid but different* packet silently.
    for i in range(2, len(wire)):  # checksum covers id..params
        for delta in range(1, 256, 7):
            corrupted = bytearray(original)
            corrupted[i] = (corrupted[i] + delta) % 256
            try:
                pkt, _ = bus.decode(bytes(corrupted))
            except (ChecksumMismatch, NeedMoreData):
                continue
            assert pkt != bus.decode(original)[0] or bytes(corrupted) == original
            # Any clean decode from a corrupted frame must not masquerade as
            # the original packet.
            assert bus.encode(pkt) != original


def test_transact_write_then_settle_read():
    sim = SimBus()
    target = 2048 + 300
    sim.transact(BusPacket(3, INSTR_WRITE, bytes([REG_GOAL_POSITION]) +
                           target.to_bytes(2, "little")))
    for _ in range(500):
        sim.step(0.008)
    statuses = sim.transact(BusPacket(3, INSTR_READ, bytes([REG_PRESENT_POSITION, 2])))
    pos = int.from_bytes(statuses[0].params, "little")
    assert abs(pos - target) <= 2


def test_transact_ping_unknown_id_times_out():
    sim = SimBus()
    with pytest.raises(DeviceTimeout):
        sim.transact(BusPacket(21, INSTR_PING))


def test_bulk_read_order():
    sim = SimBus()
    params = bytes([0, 2, 1, REG_PRESENT_POSITION, 2, 2, REG_PRESENT_POSITION])
    statuses = sim.transact(BusPacket(254, INSTR_BULK_READ, params))
    assert [s.id for s in statuses] == [1, 2]


def test_invalid_address_sets_error_flag():
    sim = SimBus()
    statuses = sim.transact(BusPacket(1, INSTR_READ, bytes([70, 10])))
    assert statuses[0].error & bus.ERR_RANGE


def test_sync_write_equivalent_to_individual_writes():
    sim_a, sim_b = SimBus(), SimBus()
    rng = np.random.default_rng(7)
    goals = {i: int(rng.integers(1500, 2600)) for i in range(1, 21)}

    groups = b"".join(bytes([i]) + goals[i].to_bytes(2, "little") for i in goals)
    sim_a.transact(BusPacket(254, INSTR_SYNC_WRITE,
                             bytes([REG_GOAL_POSITION, 2]) + groups))
    for i, goal in goals.items():
        sim_b.transact(BusPacket(i, INSTR_WRITE, bytes([REG_GOAL_POSITION]) +
                                 goal.to_bytes(2, "little")))
    for i in range(1, 21):
        a = sim_a.transact(BusPacket(i, INSTR_READ, bytes([REG_GOAL_POSITION, 2])))
        b = sim_b.transact(BusPacket(i, INSTR_READ, bytes([REG_GOAL_POSITION, 2])))
        assert a[0].params == b[0].params


def test_sync_write_returns_no_status():
    sim = SimBus()
    out = sim.transact(BusPacket(254, INSTR_SYNC_WRITE,
                                 bytes([REG_GOAL_POSITION, 2, 1, 0, 8])))
    assert out == []


def test_broadcast_write_no_status():
    sim = SimBus()
    out = sim.transact(BusPacket(254, INSTR_WRITE, bytes([REG_TORQUE_ENABLE, 0])))
    assert out == []
    assert all(not s.torque_enabled for s in sim.servos)


def test_write_to_readonly_region_rejected():
    sim = SimBus()
    statuses = sim.transact(BusPacket(1, INSTR_WRITE,
                                      bytes([REG_PRESENT_POSITION, 0, 8])))
    assert statuses[0].error & bus.ERR_RANGE


def test_imu_register_encoding():
    sim = SimBus()
    sim.imu.set_inertial((0.1, -0.2, 0.0), (0.0, 0.0, 9.81))
    statuses = sim.transact(BusPacket(200, INSTR_READ, bytes([bus.REG_IMU_GYRO, 13])))
    raw = statuses[0].params
    gx = int.from_bytes(raw[0:2], "little", signed=True)
    gy = int.from_bytes(raw[2:4], "little", signed=True)
    az = int.from_bytes(raw[10:12], "little", signed=True)
    assert gx == 100 and gy == -200
    assert az == 9810


def test_packet_log_round_trip(tmp_path):
    path = tmp_path / "bus.log"
    log = PacketLog(path)
    frames = [bus.encode(BusPacket(1, INSTR_PING)),
              bus.encode(BusPacket(2, INSTR_READ, bytes([36, 2])))]
    log.write(1000, frames[0])
    log.write(9000, frames[1])
    log.close()
    records = PacketLog.read(path)
    assert records == [(1000, frames[0]), (9000, frames[1])]


def test_bus_master_corruption_counted():
    sim = SimBus()
    master = BusMaster(sim, rng=np.random.default_rng(3), corrupt_rate=0.5)
    timeouts = 0
    for _ in range(50):
        try:
            master.transact(BusPacket(1, INSTR_PING))
        except DeviceTimeout:
            timeouts += 1
    assert timeouts > 0
    assert master.warnings == timeouts


def test_bus_master_clean_transact():
    master = BusMaster(SimBus())
    statuses = master.transact(BusPacket(1, INSTR_PING))
    assert statuses == [StatusPacket(id=1)]
