import math

import numpy as np
import pytest

from soccerbot.attitude import (
    AttitudeEstimate, FallDetector, FallState, ImuSample, accel_angles,
    update_attitude,
)

LEVEL = ImuSample(gyro=(0.0, 0.0, 0.0), accel=(0.0, 0.0, 9.81))


def rotation_accel(roll, pitch):
    """Body-frame specific force for a static pose (rotation-matrix oracle)."""
    g = 9.81
    return (-g * math.sin(pitch),
            g * math.sin(roll) * math.cos(pitch),
            g * math.cos(roll) * math.cos(pitch))


def test_level_convergence_geometric():
    est = AttitudeEstimate(roll=0.4, pitch=-0.3)
    alpha = 0.1
    for i in range(1, 40):
        est = update_attitude(est, LEVEL, 0.008, alpha=alpha)
        assert est.roll == pytest.approx(0.4 * (1 - alpha) ** i, abs=1e-12)
        assert est.pitch == pytest.approx(-0.3 * (1 - alpha) ** i, abs=1e-12)


def test_pure_gyro_integration():
    est = AttitudeEstimate()
    sample = ImuSample(gyro=(0.1, 0.0, 0.0), accel=(0.0, 0.0, 9.81))
    for _ in range(125):
        est = update_attitude(est, sample, 0.008, alpha=0.0)
    assert est.roll == pytest.approx(0.1, abs=1e-12)


def test_static_roll_30_degrees_converges():
    true_roll = math.radians(30.0)
    sample = ImuSample(gyro=(0.0, 0.0, 0.0), accel=rotation_accel(true_roll, 0.0))
    est = AttitudeEstimate()
    for _ in range(250):  # 2 s at 8 ms
        est = update_attitude(est, sample, 0.008, alpha=0.02)
    assert abs(est.roll - true_roll) < math.radians(0.5)


def test_alpha_one_snaps_to_accel():
    sample = ImuSample(gyro=(0.0, 0.0, 0.0), accel=rotation_accel(0.25, -0.15))
    est = update_attitude(AttitudeEstimate(roll=1.0, pitch=1.0), sample, 0.008,
                          alpha=1.0)
    ra, pa = accel_angles(sample.accel)
    assert est.roll == pytest.approx(ra)
    assert est.pitch == pytest.approx(pa)


def test_fusion_is_convex():
    rng = np.random.default_rng(11)
    est = AttitudeEstimate()
    for _ in range(200):
        gyro = tuple(rng.normal(0, 0.5, 3))
        roll, pitch = rng.uniform(-0.5, 0.5, 2)
        sample = ImuSample(gyro=gyro, accel=rotation_accel(roll, pitch))
        prev = est
        est = update_attitude(est, sample, 0.008, alpha=0.2)
        gyro_roll = prev.roll + gyro[0] * 0.008
        accel_roll, _ = accel_angles(sample.accel)
        lo, hi = min(gyro_roll, accel_roll), max(gyro_roll, accel_roll)
        assert lo - 1e-12 <= est.roll <= hi + 1e-12


def test_accel_gate_high_g():
    est = AttitudeEstimate(roll=0.2)
    sample = ImuSample(gyro=(0.05, 0.0, 0.0), accel=(0.0, 0.0, 15.0))
    out = update_attitude(est, sample, 0.008, alpha=0.5)
    assert out.roll == pytest.approx(0.2 + 0.05 * 0.008)  # pure gyro this step


def test_yaw_integrates_and_unwraps():
    est = AttitudeEstimate()
    sample = ImuSample(gyro=(0.0, 0.0, 1.0), accel=(0.0, 0.0, 9.81))
    for _ in range(1000):
        est = update_attitude(est, sample, 0.008, alpha=0.02)
    assert est.yaw == pytest.approx(8.0, abs=1e-9)  # > pi, continuous


def test_fall_ramp_triggers_before_fallen_threshold():
    det = FallDetector()
    dt = 0.008
    pitch = 0.0
    triggered_at = None
    for i in range(100):  # 0 -> 1.6 rad over 0.8 s
        pitch = 1.6 * (i + 1) / 100
        est = AttitudeEstimate(pitch=pitch, pitch_rate=2.0)
        state = det.update(est, dt)
        if state == FallState.FALLING and triggered_at is None:
            triggered_at = pitch
    assert triggered_at is not None
    assert triggered_at < 1.3


def test_small_constant_tilt_stays_stable():
    det = FallDetector()
    est = AttitudeEstimate(pitch=0.2)
    for _ in range(2000):
        assert det.update(est, 0.008) == FallState.STABLE


def test_supine_after_dwell():
    det = FallDetector()
    det.state = FallState.FALLING
    est = AttitudeEstimate(pitch=-1.5)
    state = FallState.FALLING
    for _ in range(75):  # 0.6 s
        state = det.update(est, 0.008)
    assert state == FallState.FALLEN_SUPINE


def test_dwell_not_met_keeps_falling():
    det = FallDetector()
    det.state = FallState.FALLING
    est = AttitudeEstimate(pitch=1.5)
    for _ in range(30):  # 0.24 s < 0.5 s
        state = det.update(est, 0.008)
    assert state == FallState.FALLING


def test_never_fallen_without_falling():
    det = FallDetector()
    est = AttitudeEstimate(pitch=1.6, pitch_rate=3.0)
    seen = []
    for _ in range(200):
        seen.append(det.update(est, 0.008))
    first_fallen = seen.index(FallState.FALLEN_PRONE)
    assert FallState.FALLING in seen[:first_fallen]


def test_roll_fall_tie_resolves_prone():
    det = FallDetector()
    det.state = FallState.FALLING
    est = AttitudeEstimate(roll=1.5, pitch=0.0)
    state = FallState.FALLING
    for _ in range(75):
        state = det.update(est, 0.008)
    assert state == FallState.FALLEN_PRONE


def test_reset_returns_to_stable():
    det = FallDetector()
    det.state = FallState.FALLEN_PRONE
    det.reset()
    assert det.state == FallState.STABLE
