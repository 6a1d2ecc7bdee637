"""One-wire servo bus: byte-exact packet codec and a simulated bus.

Framing follows the classic Dynamixel 1.0 convention so the codec can be
checked against public protocol documentation:

    [0xFF 0xFF] [id] [length] [instruction] [param ...] [checksum]

length = param_count + 2, checksum = ~(id + length + instruction + sum(params))
truncated to the low byte. Status packets use the same frame with the error
byte in the instruction slot. The simulated bus hosts 20 position-controlled
servos (ids 1..20) and one IMU/power board (id 200).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import actuation, model
from .errors import DomainError

HEADER = b"\xff\xff"
BROADCAST_ID = 254
IMU_BOARD_ID = 200

INSTR_PING = 0x01
INSTR_READ = 0x02
INSTR_WRITE = 0x03
INSTR_SYNC_WRITE = 0x83
INSTR_BULK_READ = 0x92
INSTRUCTIONS = {INSTR_PING, INSTR_READ, INSTR_WRITE, INSTR_SYNC_WRITE, INSTR_BULK_READ}

MAX_PARAMS = 250

# Servo register map (subset of the MX-series table we model).
REG_TORQUE_ENABLE = 24
REG_GOAL_POSITION = 30
REG_MOVING_SPEED = 32
REG_PRESENT_POSITION = 36
REG_PRESENT_SPEED = 38
REG_PRESENT_LOAD = 40
REG_PRESENT_VOLTAGE = 42
REG_PRESENT_TEMP = 43
REGISTER_FILE_SIZE = 74
WRITABLE_LIMIT = 36  # registers at/above PRESENT_POSITION are sensor outputs

# IMU board registers (little-endian signed 16-bit, milli-units).
REG_IMU_GYRO = 38
REG_IMU_ACCEL = 44
REG_IMU_VOLTAGE = 50

# Status error flags.
ERR_INPUT_VOLTAGE = 1 << 0
ERR_OVERHEAT = 1 << 2
ERR_RANGE = 1 << 3
ERR_OVERLOAD = 1 << 5


class EncodeError(ValueError):
    pass


class ChecksumMismatch(ValueError):
    """Frame failed its checksum. `consumed` bytes should be discarded."""

    def __init__(self, msg: str, consumed: int):
        super().__init__(msg)
        self.consumed = consumed


class NeedMoreData(Exception):
    """Stream holds no complete frame. `skipped` garbage bytes may be dropped."""

    def __init__(self, skipped: int = 0):
        super().__init__("incomplete packet")
        self.skipped = skipped


class DeviceTimeout(Exception):
    """An addressed device does not exist; the bus read timed out."""


@dataclass(frozen=True)
class BusPacket:
    id: int
    instruction: int
    params: bytes = b""


@dataclass(frozen=True)
class StatusPacket:
    id: int
    error: int = 0
    params: bytes = b""


def checksum(body: bytes) -> int:
    """Bitwise-NOT of the byte sum over id..params, truncated to one byte."""
    return (~sum(body)) & 0xFF


def encode(packet: BusPacket) -> bytes:
    if len(packet.params) > MAX_PARAMS:
        raise EncodeError(f"params too long ({len(packet.params)} > {MAX_PARAMS})")
    if not (1 <= packet.id <= 253 or packet.id == BROADCAST_ID):
        raise EncodeError(f"invalid bus id {packet.id}")
    body = bytes([packet.id, len(packet.params) + 2, packet.instruction]) + packet.params
    return HEADER + body + bytes([checksum(body)])


def encode_status(status: StatusPacket) -> bytes:
    if len(status.params) > MAX_PARAMS:
        raise EncodeError(f"params too long ({len(status.params)} > {MAX_PARAMS})")
    body = bytes([status.id, len(status.params) + 2, status.error]) + status.params
    return HEADER + body + bytes([checksum(body)])


def decode(data: bytes, *, status: bool = False):
    """Extract the first complete packet from a byte stream.

    Resynchronizes on the 0xFF 0xFF header, skipping garbage. Returns
    (packet, consumed_count) where consumed covers garbage plus the frame.
    Raises NeedMoreData when no complete frame is present and
    ChecksumMismatch when a frame is corrupt (its bytes count as consumed).
    """
    n = len(data)
    start = 0
    while True:
        idx = data.find(HEADER, start)
        if idx < 0:
            # Trailing lone 0xFF may be the start of a header.
            keep = 1 if n and data[-1] == 0xFF else 0
            raise NeedMoreData(skipped=max(0, n - keep))
        # 0xFF FF FF ...: treat the first 0xFF as garbage and resync.
        if idx + 2 < n and data[idx + 2] == 0xFF:
            start = idx + 1
            continue
        if idx + 4 > n:
            raise NeedMoreData(skipped=idx)
        pid = data[idx + 2]
        length = data[idx + 3]
        if length < 2 or length > MAX_PARAMS + 2 or pid > BROADCAST_ID:
            start = idx + 2  # not a plausible frame; rescan past the header
            continue
        end = idx + 4 + length
        if end > n:
            raise NeedMoreData(skipped=idx)
        frame = data[idx:end]
        body = frame[2:-1]
        if checksum(body) != frame[-1]:
            raise ChecksumMismatch("bad checksum", consumed=end)
        code = frame[4]
        params = bytes(frame[5:-1])
        if status:
            return StatusPacket(id=pid, error=code, params=params), end
        return BusPacket(id=pid, instruction=code, params=params), end


def _u16(lo: int, hi: int) -> int:
    return lo | (hi << 8)


def _le16(value: int) -> bytes:
    return struct.pack("<H", value & 0xFFFF)


def _sle16(value: int) -> bytes:
    return struct.pack("<h", max(-32768, min(32767, int(round(value)))))


class ServoDevice:
    """Register file plus second-order plant state for one servo."""

    def __init__(self, dev_id: int, joint: int, constants: model.RobotConstants):
        self.id = dev_id
        self.joint = joint
        self.constants = constants
        self.regs = bytearray(REGISTER_FILE_SIZE)
        self.q = 0.0
        self.qd = 0.0
        self.regs[REG_TORQUE_ENABLE] = 1
        self.regs[REG_GOAL_POSITION:REG_GOAL_POSITION + 2] = _le16(model.TICK_CENTER)
        self.regs[REG_PRESENT_VOLTAGE] = 148
        self.regs[REG_PRESENT_TEMP] = 38
        self._sync_outputs(0.0)

    @property
    def torque_enabled(self) -> bool:
        return self.regs[REG_TORQUE_ENABLE] != 0

    @property
    def goal_ticks(self) -> int:
        return _u16(self.regs[REG_GOAL_POSITION], self.regs[REG_GOAL_POSITION + 1])

    def step(self, dt: float, tau_ext: float, params: actuation.ServoDynamicsParams):
        lo = self.constants.limits_lo[self.joint]
        hi = self.constants.limits_hi[self.joint]
        cmd = self.goal_ticks if self.torque_enabled else None
        self.q, self.qd, tau = actuation.step_servo(
            self.q, self.qd, cmd, tau_ext, dt, params, limits=(lo, hi)
        )
        self._sync_outputs(tau)

    def _sync_outputs(self, tau: float):
        self.regs[REG_PRESENT_POSITION:REG_PRESENT_POSITION + 2] = _le16(
            model.rad_to_ticks(self.q)
        )
        # Speed in 0.001 rad/s, load in 0.01 N·m, both signed.
        self.regs[REG_PRESENT_SPEED:REG_PRESENT_SPEED + 2] = _sle16(self.qd * 1000.0)
        self.regs[REG_PRESENT_LOAD:REG_PRESENT_LOAD + 2] = _sle16(tau * 100.0)


class ImuBoard:
    """Bus device carrying the inertial sensors and the battery monitor."""

    def __init__(self):
        self.id = IMU_BOARD_ID
        self.regs = bytearray(REGISTER_FILE_SIZE)
        self.set_voltage(14.8)

    def set_inertial(self, gyro, accel):
        """gyro in rad/s, accel in m/s²; stored as signed milli-units."""
        buf = b"".join(_sle16(v * 1000.0) for v in gyro)
        self.regs[REG_IMU_GYRO:REG_IMU_GYRO + 6] = buf
        buf = b"".join(_sle16(v * 1000.0) for v in accel)
        self.regs[REG_IMU_ACCEL:REG_IMU_ACCEL + 6] = buf

    def set_voltage(self, volts: float):
        self.regs[REG_IMU_VOLTAGE] = max(0, min(255, int(round(volts * 10.0))))


class SimBus:
    """Single-master simulated bus hosting 20 servos and the IMU board."""

    def __init__(self, constants: model.RobotConstants = model.DEFAULT_CONSTANTS,
                 servo_params: actuation.ServoDynamicsParams | None = None):
        self.constants = constants
        self.servo_params = servo_params or actuation.ServoDynamicsParams()
        self.servos = [ServoDevice(i + 1, i, constants) for i in range(model.N_JOINTS)]
        self.imu = ImuBoard()
        self.devices = {s.id: s for s in self.servos}
        self.devices[self.imu.id] = self.imu

    def transact(self, packet: BusPacket) -> list[StatusPacket]:
        """Apply one instruction packet, returning status packets in order."""
        instr = packet.instruction
        if instr == INSTR_SYNC_WRITE:
            return self._sync_write(packet.params)
        if instr == INSTR_BULK_READ:
            return self._bulk_read(packet.params)

        if packet.id == BROADCAST_ID:
            for dev in self.devices.values():
                self._apply(dev, instr, packet.params)
            return []
        dev = self.devices.get(packet.id)
        if dev is None:
            raise DeviceTimeout(f"no device with id {packet.id}")
        return [self._apply(dev, instr, packet.params)]

    def _apply(self, dev, instr: int, params: bytes) -> StatusPacket:
        if instr == INSTR_PING:
            return StatusPacket(id=dev.id)
        if instr == INSTR_READ:
            if len(params) != 2:
                return StatusPacket(id=dev.id, error=ERR_RANGE)
            addr, count = params
            if addr + count > REGISTER_FILE_SIZE:
                return StatusPacket(id=dev.id, error=ERR_RANGE)
            return StatusPacket(id=dev.id, params=bytes(dev.regs[addr:addr + count]))
        if instr == INSTR_WRITE:
            if not params:
                return StatusPacket(id=dev.id, error=ERR_RANGE)
            addr = params[0]
            data = params[1:]
            if addr + len(data) > REGISTER_FILE_SIZE or addr + len(data) > WRITABLE_LIMIT:
                return StatusPacket(id=dev.id, error=ERR_RANGE)
            dev.regs[addr:addr + len(data)] = data
            return StatusPacket(id=dev.id)
        return StatusPacket(id=dev.id, error=ERR_RANGE)

    def _sync_write(self, params: bytes) -> list[StatusPacket]:
        # params = [addr, L, id, d0..dL-1, id, ...]; never answered.
        if len(params) < 2:
            return []
        addr, dlen = params[0], params[1]
        groups = params[2:]
        if dlen == 0 or len(groups) % (dlen + 1) != 0:
            return []
        writes = []
        for off in range(0, len(groups), dlen + 1):
            dev = self.devices.get(groups[off])
            data = groups[off + 1:off + 1 + dlen]
            if dev is not None and addr + dlen <= WRITABLE_LIMIT:
                writes.append((dev, data))
        for dev, data in writes:  # applied at one simulated instant
            dev.regs[addr:addr + dlen] = data
        return []

    def _bulk_read(self, params: bytes) -> list[StatusPacket]:
        # params = [0x00, len, id, addr, len, id, addr, ...]
        if not params or (len(params) - 1) % 3 != 0:
            raise DomainError("malformed bulk read")
        out = []
        for off in range(1, len(params), 3):
            count, dev_id, addr = params[off], params[off + 1], params[off + 2]
            dev = self.devices.get(dev_id)
            if dev is None:
                raise DeviceTimeout(f"no device with id {dev_id}")
            if addr + count > REGISTER_FILE_SIZE:
                out.append(StatusPacket(id=dev_id, error=ERR_RANGE))
            else:
                out.append(StatusPacket(id=dev_id, params=bytes(dev.regs[addr:addr + count])))
        return out

    def step(self, dt: float, external_torques=None):
        """Advance all servo plants by dt (gravity torques optional)."""
        taus = np.zeros(model.N_JOINTS) if external_torques is None else external_torques
        for servo in self.servos:
            servo.step(dt, float(taus[servo.joint]), self.servo_params)

    def positions(self) -> np.ndarray:
        return np.array([s.q for s in self.servos])


class PacketLog:
    """Binary packet log: 8-byte LE microsecond timestamp, u16 LE length, frame."""

    RECORD_HEADER = struct.Struct("<QH")

    def __init__(self, path):
        self._fh = open(path, "wb")

    def write(self, timestamp_us: int, frame: bytes):
        self._fh.write(self.RECORD_HEADER.pack(timestamp_us, len(frame)))
        self._fh.write(frame)

    def close(self):
        self._fh.close()

    @staticmethod
    def read(path) -> list[tuple[int, bytes]]:
        records = []
        with open(path, "rb") as fh:
            data = fh.read()
        off = 0
        while off < len(data):
            ts, length = PacketLog.RECORD_HEADER.unpack_from(data, off)
            off += PacketLog.RECORD_HEADER.size
            records.append((ts, data[off:off + length]))
            off += length
        return records


class BusMaster:
    """Byte-level master for a SimBus: encodes, optionally corrupts, logs.

    corrupt_rate is the per-byte probability of a random bit flip (seeded
    rng supplied by the caller); corrupted instruction frames are dropped by
    the devices, corrupted status frames are dropped by the master. Both are
    reported via DeviceTimeout / counted in `warnings`.
    """

    def __init__(self, bus: SimBus, rng: np.random.Generator | None = None,
                 corrupt_rate: float = 0.0, log: PacketLog | None = None):
        self.bus = bus
        self.rng = rng or np.random.default_rng(0)
        self.corrupt_rate = corrupt_rate
        self.log = log
        self.warnings = 0
        self.clock_us = 0

    def _maybe_corrupt(self, frame: bytes) -> bytes:
        if self.corrupt_rate <= 0.0:
            return frame
        flips = self.rng.random(len(frame)) < self.corrupt_rate
        if not flips.any():
            return frame
        buf = bytearray(frame)
        for i in np.flatnonzero(flips):
            buf[i] ^= 1 << int(self.rng.integers(0, 8))
        return bytes(buf)

    def transact(self, packet: BusPacket) -> list[StatusPacket]:
        wire = encode(packet)
        if self.log:
            self.log.write(self.clock_us, wire)
        wire = self._maybe_corrupt(wire)
        try:
            decoded, _ = decode(wire)
        except (ChecksumMismatch, NeedMoreData):
            self.warnings += 1
            raise DeviceTimeout("instruction frame corrupted")
        statuses = self.bus.transact(decoded)
        out = []
        for status in statuses:
            sw = encode_status(status)
            if self.log:
                self.log.write(self.clock_us, sw)
            sw = self._maybe_corrupt(sw)
            try:
                parsed, _ = decode(sw, status=True)
                out.append(parsed)
            except (ChecksumMismatch, NeedMoreData):
                self.warnings += 1
                raise DeviceTimeout("status frame corrupted") from None
        return out
