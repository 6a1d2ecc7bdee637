"""The 8 ms control loop wiring every subsystem together.

Cycle order: advance clock, bulk-read servo positions and the IMU over the
byte-level bus, update the attitude estimate, run vision on every 5th cycle
(25 Hz), tick the behavior FSM, produce joint targets from the active source
(gait or motion playback), apply the feed-forward offsets, sync-write goals
(or broadcast torque-off on relax), apply pending config changes, step the
world, and emit telemetry every 12th cycle.

In virtual-clock mode the vision pipeline runs synchronously inside the
cycle so that runs are bit-for-bit reproducible; realtime mode moves it to a
latest-wins worker thread and paces the loop with the wall clock.
"""

from __future__ import annotations

import math
import os
import queue
import threading
import time
from dataclasses import replace

import numpy as np

from .. import actuation, behavior, bus, gait, model, motions
from ..attitude import AttitudeEstimate, FallDetector, FallState, ImuSample, update_attitude
from ..config import ParamTree
from ..defaults import declare_all
from ..vision.lens import LensModel
from ..vision.lut import ColorLut, make_palette, reference_lut
from ..vision.pipeline import CameraPose, Detections, VisionPipeline
from .render import CameraRenderer
from .telemetry import TelemetryFrame, TelemetryHub
from .world import FieldGeometry, WorldState

CYCLE_US = 8000
DT = CYCLE_US / 1e6
VISION_EVERY = 5
TELEMETRY_EVERY = 12


class VisionWorker:
    """Latest-wins frame mailbox for realtime mode."""

    def __init__(self, pipeline: VisionPipeline):
        self.pipeline = pipeline
        self._mailbox: queue.Queue = queue.Queue(maxsize=1)
        self._result_lock = threading.Lock()
        self._latest: Detections | None = None
        self._stop = False
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def submit(self, frame: bytes, pose: CameraPose):
        try:
            self._mailbox.put_nowait((frame, pose))
        except queue.Full:  # drop the stale frame, keep the new one
            try:
                self._mailbox.get_nowait()
            except queue.Empty:
                pass
            self._mailbox.put_nowait((frame, pose))

    def poll(self) -> Detections | None:
        with self._result_lock:
            latest, self._latest = self._latest, None
            return latest

    def _run(self):
        while not self._stop:
            try:
                frame, pose = self._mailbox.get(timeout=0.1)
            except queue.Empty:
                continue
            detections = self.pipeline.process(frame, pose)
            with self._result_lock:
                self._latest = detections

    def stop(self):
        self._stop = True
        self._thread.join(timeout=1.0)


class Simulation:
    """Owns all robot and world state; single-threaded cycle execution."""

    def __init__(self, tree: ParamTree | None = None, seed: int = 0,
                 telemetry_path=None, packet_log_path=None,
                 realtime: bool = False, scenario: list | None = None,
                 lut: ColorLut | None = None):
        self.tree = tree or declare_all(ParamTree())
        self.rng = np.random.default_rng(seed)
        self.realtime = realtime

        self.constants = model.from_tree(self.tree)
        self._refresh_params()

        log = bus.PacketLog(packet_log_path) if packet_log_path else None
        self.bus = bus.SimBus(self.constants, self._servo_params)
        self.master = bus.BusMaster(self.bus, rng=self.rng,
                                    corrupt_rate=self.tree.get("/bus/corrupt_rate"),
                                    log=log)

        geom = FieldGeometry(
            length=self.tree.get("/world/field_length"),
            width=self.tree.get("/world/field_width"),
            line_width=self.tree.get("/world/line_width"),
            goal_width=self.tree.get("/world/goal_width"),
            ball_radius=self.tree.get("/world/ball_radius"),
        )
        self.world = WorldState(geom, battery_v=self.tree.get("/world/battery_start"))

        palette = make_palette(self.tree.get("/vision/goal_class_hue"))
        self.lens = LensModel()
        self.renderer = CameraRenderer(self.lens, palette)
        self._custom_lut = lut is not None
        self.pipeline = VisionPipeline(
            lut or reference_lut(palette),
            self.lens,
            threshold=self.tree.get("/vision/block_threshold"),
        )
        self.vision_worker = VisionWorker(self.pipeline) if realtime else None

        # control state
        self.estimate = AttitudeEstimate()
        self.fall = FallDetector(self.tree.get("/fall/trigger_rad"),
                                 self.tree.get("/fall/fallen_rad"),
                                 self.tree.get("/fall/dwell_s"))
        self.fsm = behavior.Behavior(self._behavior_params)
        self.gait_state = gait.init_state(self._gait_params)
        self.belief = behavior.WorldBelief()
        self.motion_files = motions.standard_motions()
        self.playback: motions.MotionPlayback | None = None
        self.playback_name: str | None = None
        self._kick_struck = False
        self._torque_on = True
        self._relaxed = False
        self._last_source = "gait"
        self._requested_motion: str | None = None
        self._override_motion = False

        stand = gait.stand_pose(self._gait_params)
        self.positions = stand.copy()
        self.velocities = np.zeros(model.N_JOINTS)
        self.targets = stand.copy()
        self.commanded = stand.copy()
        self._neck = np.zeros(2)
        for servo, angle in zip(self.bus.servos, stand):
            servo.q = float(angle)
            servo.regs[bus.REG_GOAL_POSITION:bus.REG_GOAL_POSITION + 2] = \
                int(model.rad_to_ticks(float(angle))).to_bytes(2, "little")
            servo._sync_outputs(0.0)
        self._sync_imu_registers()

        self.telemetry = TelemetryHub(telemetry_path)
        self.detections: Detections | None = None
        self.cycle = 0
        self.clock_us = 0
        self.vision_runs = 0
        self.notices: list[str] = []
        self._pending_notices: list[str] = []
        self.scenario = sorted(scenario or [], key=lambda e: e["at_s"])
        self._scenario_idx = 0
        self._config_sub = self.tree.subscribe("/", maxlen=4096)
        self._frame_lock = threading.Lock()
        self._last_planes = None
        self._last_counts = None
        self.jitter_stats: dict | None = None
        self.on_lut_change = None

    # -- parameter snapshots -------------------------------------------------

    def _refresh_params(self):
        t = self.tree
        self._gait_params = gait.params_from_tree(t)
        self._behavior_params = behavior.params_from_tree(t)
        self._servo_params = actuation.ServoDynamicsParams(
            inertia=t.get("/servo/inertia"), stiffness=t.get("/servo/stiffness"),
            viscous=t.get("/servo/viscous"), coulomb=t.get("/servo/coulomb"),
            torque_max=t.get("/servo/torque_max"))
        self._alpha = t.get("/estimator/alpha")
        self._ff = (t.get("/ff/k_v"), t.get("/ff/k_c"), t.get("/ff/k_g"))
        self._cam_height = t.get("/vision/camera_height")
        self._cam_tilt = t.get("/vision/camera_tilt")
        self._gyro_noise = t.get("/imu/gyro_noise")
        self._accel_noise = t.get("/imu/accel_noise")
        self._battery_decay = t.get("/world/battery_decay")
        self._kick_strike_s = t.get("/behavior/kick_strike_s")
        self._kick_speed = t.get("/behavior/kick_speed")

    def _apply_config_changes(self):
        events = self._config_sub.drain()
        if not events:
            return
        paths = {path for path, _, _ in events}
        if "/motion/play" in paths:
            name = self.tree.get("/motion/play")
            if name:
                if name in self.motion_files:
                    self._requested_motion = name
                self.tree.set("/motion/play", "")
        self._refresh_params()
        self.fsm.params = self._behavior_params
        self.bus.servo_params = self._servo_params
        if "/bus/corrupt_rate" in paths:
            self.master.corrupt_rate = self.tree.get("/bus/corrupt_rate")
        if any(p.startswith("/fall/") for p in paths):
            self.fall.trigger_rad = self.tree.get("/fall/trigger_rad")
            self.fall.fallen_rad = self.tree.get("/fall/fallen_rad")
            self.fall.dwell_s = self.tree.get("/fall/dwell_s")
        if "/vision/block_threshold" in paths:
            self.pipeline.threshold = self.tree.get("/vision/block_threshold")
        if "/vision/goal_class_hue" in paths:
            palette = make_palette(self.tree.get("/vision/goal_class_hue"))
            self.renderer = CameraRenderer(self.lens, palette)
            if not self._custom_lut:
                self.pipeline.set_lut(reference_lut(palette))

    # -- LUT exchange (wire API extension) ------------------------------------

    def set_lut_bytes(self, blob: bytes):
        lut = ColorLut.from_bytes(blob)
        self._custom_lut = True
        self.pipeline.set_lut(lut)

    def get_lut_bytes(self) -> bytes:
        return self.pipeline.lut.to_bytes()

    # -- motion exchange (wire API extension) ----------------------------------

    def register_motion(self, name: str, text: str):
        motion = motions.load_motion(text, self.constants)
        self.motion_files[name] = motion

    def get_motion_text(self, name: str) -> str:
        return motions.serialize(self.motion_files[name])

    def motion_names(self) -> list[str]:
        return sorted(self.motion_files)

    # -- sensors ---------------------------------------------------------------

    def _sync_imu_registers(self):
        gyro, accel = self.world.imu_sample(self.rng, self._gyro_noise,
                                            self._accel_noise)
        self.bus.imu.set_inertial(gyro, accel)
        self.bus.imu.set_voltage(self.world.battery_v)

    def _bulk_read(self):
        request = bytearray([0])
        for dev_id in range(1, model.N_JOINTS + 1):
            request += bytes([2, dev_id, bus.REG_PRESENT_POSITION])
        request += bytes([13, bus.IMU_BOARD_ID, bus.REG_IMU_GYRO])
        try:
            statuses = self.master.transact(
                bus.BusPacket(bus.BROADCAST_ID, bus.INSTR_BULK_READ, bytes(request)))
        except bus.DeviceTimeout:
            return None
        positions = np.array([
            model.ticks_to_rad(int.from_bytes(s.params, "little"))
            for s in statuses[:model.N_JOINTS]
        ])
        raw = statuses[model.N_JOINTS].params
        gyro = np.array([int.from_bytes(raw[i:i + 2], "little", signed=True)
                         for i in (0, 2, 4)]) / 1000.0
        accel = np.array([int.from_bytes(raw[i:i + 2], "little", signed=True)
                          for i in (6, 8, 10)]) / 1000.0
        voltage = raw[12] / 10.0
        return positions, gyro, accel, voltage

    # -- actuation --------------------------------------------------------------

    def _write_goals(self, commanded: np.ndarray):
        groups = bytearray([bus.REG_GOAL_POSITION, 2])
        for dev_id, angle in enumerate(commanded, start=1):
            groups += bytes([dev_id])
            groups += int(model.rad_to_ticks(float(angle))).to_bytes(2, "little")
        try:
            self.master.transact(
                bus.BusPacket(bus.BROADCAST_ID, bus.INSTR_SYNC_WRITE, bytes(groups)))
        except bus.DeviceTimeout:
            pass

    def _set_torque(self, enabled: bool):
        if self._torque_on == enabled:
            return
        try:
            self.master.transact(bus.BusPacket(
                bus.BROADCAST_ID, bus.INSTR_WRITE,
                bytes([bus.REG_TORQUE_ENABLE, 1 if enabled else 0])))
            self._torque_on = enabled
        except bus.DeviceTimeout:
            pass

    def _start_motion(self, name: str):
        self.playback = motions.MotionPlayback(self.motion_files[name],
                                               self.positions)
        self.playback_name = name
        self._kick_struck = False

    def _camera_view(self):
        neck_yaw = float(self.positions[model.JOINT_INDEX["neck_yaw"]])
        neck_pitch = float(self.positions[model.JOINT_INDEX["neck_pitch"]])
        view = self.renderer.view_for(self.world, neck_yaw, neck_pitch,
                                      self._cam_height, self._cam_tilt)
        pose = CameraPose(yaw=neck_yaw,
                          pitch=self._cam_tilt + neck_pitch + self.estimate.pitch,
                          height=self._cam_height)
        return view, pose

    # -- the cycle -----------------------------------------------------------------

    def run_cycle(self):
        # (1) clock
        self.cycle += 1
        self.clock_us += CYCLE_US
        now_s = self.clock_us / 1e6

        # (2) bulk read
        reading = self._bulk_read()
        if reading is not None:
            new_positions, gyro, accel, _volt = reading
            self.velocities = (new_positions - self.positions) / DT
            self.positions = new_positions
            sample = ImuSample(gyro=tuple(gyro), accel=tuple(accel))
        else:
            sample = ImuSample(gyro=(0.0, 0.0, 0.0), accel=(0.0, 0.0, 9.81))

        # (3) attitude estimate + fall detection
        self.estimate = update_attitude(self.estimate, sample, DT, self._alpha)
        fall_state = self.fall.update(self.estimate, DT)

        # (4) vision at 25 Hz
        fresh = None
        if (self.cycle - 1) % VISION_EVERY == 0:
            view, cam_pose = self._camera_view()
            planes = self.renderer.render_planes(self.world, view)
            frame = None
            if self.vision_worker is not None:
                from ..vision.classify import pack_yuyv
                self.vision_worker.submit(pack_yuyv(*planes), cam_pose)
                fresh = self.vision_worker.poll()
            else:
                from ..vision.classify import pack_yuyv
                frame = pack_yuyv(*planes)
                fresh = self.pipeline.process(frame, cam_pose)
            with self._frame_lock:
                self._last_planes = planes
                self._last_counts = self.pipeline.last_counts
            self.vision_runs += 1
            if fresh is not None:
                self.detections = fresh

        motion_active = self.playback is not None and self.playback.active
        self.belief = behavior.update_belief(
            replace(self.belief, fall_state=fall_state,
                    motion_active=motion_active),
            fresh, self.estimate, DT, self._behavior_params)

        # (5) behavior
        action = self.fsm.tick(self.belief)

        # externally requested playback (dashboard/config) rides on top of
        # gait actions; fall protection and FSM motions still preempt it
        if isinstance(action, behavior.GaitAction):
            if self._requested_motion:
                action = behavior.MotionAction(self._requested_motion)
                self._requested_motion = None
                self._override_motion = True
            elif (self._override_motion and self.playback is not None
                    and self.playback.active):
                action = behavior.MotionAction(self.playback_name)
            else:
                self._override_motion = False

        # (6) target source
        gait_active = False
        twist = (0.0, 0.0, 0.0)
        if isinstance(action, behavior.RelaxAction):
            self._set_torque(False)
            self._relaxed = True
            self._last_source = "relax"
            self.playback = None
            self.playback_name = None
        elif isinstance(action, behavior.MotionAction):
            self._set_torque(True)
            self._relaxed = False
            self._last_source = "motion"
            if (self.playback is None or self.playback_name != action.name):
                self._start_motion(action.name)
            was_active = self.playback.active
            self.targets = self.constants.clamp(self.playback.step(DT))
            if was_active and not self.playback.active:
                self._finish_motion()
        else:  # gait (or stand)
            self._set_torque(True)
            self._relaxed = False
            self.playback = None
            self.playback_name = None
            if self._last_source != "gait":
                # re-anchor the rate limiter at the measured pose
                self.gait_state = gait.GaitState(phase=self.gait_state.phase,
                                                 last=self.positions.copy())
                self._neck = np.array([
                    float(self.positions[model.JOINT_INDEX["neck_yaw"]]),
                    float(self.positions[model.JOINT_INDEX["neck_pitch"]]),
                ])
            self._last_source = "gait"
            self.gait_state, body = gait.gait_step(
                self.gait_state, action.command, self._gait_params,
                self.estimate, DT, self.constants)
            neck_target = np.array([action.neck_yaw, action.neck_pitch])
            self._neck += np.clip(neck_target - self._neck, -0.1, 0.1)
            body[model.JOINT_INDEX["neck_yaw"]] = self._neck[0]
            body[model.JOINT_INDEX["neck_pitch"]] = self._neck[1]
            self.targets = self.constants.clamp(body)
            gait_active = action.command.enabled and fall_state == FallState.STABLE
            if gait_active:
                twist = gait.body_twist(action.command, self._gait_params)

        # (7) feed-forward
        k_v, k_c, k_g = self._ff
        if k_v or k_c or k_g:
            qd_des = (self.targets - self.commanded) / DT
            gravity = actuation.gravity_torques(self.targets, self.constants)
            offsets = k_v * qd_des + k_c * np.sign(qd_des) + k_g * gravity
            self.commanded = self.constants.clamp(self.targets + offsets)
        else:
            self.commanded = self.targets

        # (8) write goals
        if not self._relaxed:
            self._write_goals(self.commanded)

        # (9) pending config
        self._apply_config_changes()

        # (10) world step
        self._apply_scenario(now_s)
        gravity = actuation.gravity_torques(self.positions, self.constants)
        self.bus.step(DT, gravity)
        self.world.step(DT, twist)
        if gait_active:
            self._pending_notices += self.world.drain_battery(self._battery_decay)
        if (self.playback_name == "kick" and self.playback is not None
                and not self._kick_struck
                and self.playback.elapsed_s >= self._kick_strike_s):
            self._kick_struck = True
            if self.world.kick_ball(self._kick_speed):
                self._pending_notices.append("ball_kicked")
        self._sync_imu_registers()
        self.master.clock_us = self.clock_us

        # (11) telemetry
        if self.cycle % TELEMETRY_EVERY == 0:
            self._emit_telemetry()

    def _finish_motion(self):
        if self.playback_name in ("getup_prone", "getup_supine"):
            self.world.reset_upright()
            self.fall.reset()
            # the kinematic reset covers the estimate too, otherwise the
            # filter's decay from the fallen angle re-triggers the detector
            self.estimate = AttitudeEstimate(yaw=self.estimate.yaw)
            self._pending_notices.append("getup_complete")

    def _apply_scenario(self, now_s: float):
        while (self._scenario_idx < len(self.scenario)
               and self.scenario[self._scenario_idx]["at_s"] <= now_s):
            event = self.scenario[self._scenario_idx]["event"]
            self._scenario_idx += 1
            kind = event.get("type")
            if kind == "push":
                self.world.push(event.get("pitch", 0.0), event.get("roll", 0.0),
                                event.get("duration_s", 0.3))
            elif kind == "teleport":
                self.world.teleport(event["x"], event["y"],
                                    event.get("heading", 0.0))
            elif kind == "set_ball":
                self.world.set_ball(event["x"], event["y"],
                                    event.get("vx", 0.0), event.get("vy", 0.0))
            elif kind == "set":
                self.tree.set(event["path"], event["value"])
            else:
                raise ValueError(f"unknown scenario event {kind!r}")
            self._pending_notices.append(f"event:{kind}")

    def _emit_telemetry(self):
        ball = self.belief.ball
        det = {
            "ball": None if ball is None else {
                "bearing": ball.bearing,
                "distance": ball.distance,
                "age_s": round(ball.age_s, 6),
            },
            "goal_posts": 0 if self.detections is None else len(self.detections.goal_posts),
            "crossings": 0 if self.detections is None else len(self.detections.crossings),
        }
        frame = TelemetryFrame(
            cycle=self.cycle,
            t_us=self.clock_us,
            targets=[round(float(x), 9) for x in self.commanded],
            positions=[round(float(x), 9) for x in self.positions],
            attitude={"roll": round(self.estimate.roll, 9),
                      "pitch": round(self.estimate.pitch, 9),
                      "yaw": round(self.estimate.yaw, 9)},
            fall_state=self.fall.state.value,
            behavior_state=self.fsm.state.value,
            battery_v=round(self.world.battery_v, 6),
            detections=det,
            notices=list(self._pending_notices),
            warnings=self.master.warnings,
        )
        self._pending_notices = []
        self.notices += frame.notices
        self.telemetry.publish(frame)

    # -- run helpers -------------------------------------------------------------

    def run(self, seconds: float):
        cycles = int(round(seconds / DT))
        if not self.realtime:
            for _ in range(cycles):
                self.run_cycle()
            return
        self._try_fifo_scheduler()
        periods = []
        deadline = time.monotonic()
        last = deadline
        for _ in range(cycles):
            deadline += DT
            self.run_cycle()
            sleep = deadline - time.monotonic()
            if sleep > 0:
                time.sleep(sleep)
            now = time.monotonic()
            periods.append(now - last)
            last = now
        periods = np.array(periods[1:]) if len(periods) > 1 else np.array(periods)
        self.jitter_stats = {
            "mean_ms": float(periods.mean() * 1e3),
            "p99_ms": float(np.percentile(periods, 99) * 1e3),
            "max_ms": float(periods.max() * 1e3),
        }

    @staticmethod
    def _try_fifo_scheduler():
        try:
            os.sched_setscheduler(0, os.SCHED_FIFO, os.sched_param(10))
            return True
        except (PermissionError, OSError, AttributeError):
            return False

    def latest_images(self):
        with self._frame_lock:
            return self._last_planes, self._last_counts

    def close(self):
        if self.vision_worker is not None:
            self.vision_worker.stop()
        self.telemetry.close()
        if self.master.log:
            self.master.log.close()
