import math

import numpy as np
import pytest

from soccerbot import actuation, model
from soccerbot.actuation import (
    FeedForwardModel, ReferenceTrajectory, ServoDynamicsParams,
    feedforward, fit_coefficients, gravity_torque, ilc_iterate, step_servo,
)
from soccerbot.errors import DomainError

DEFAULTS = ServoDynamicsParams()


def test_equilibrium_is_fixed_point():
    cmd = model.rad_to_ticks(0.25)
    q0 = model.ticks_to_rad(cmd)  # on the tick lattice, q == q_cmd exactly
    q, qd, _ = step_servo(q0, 0.0, cmd, 0.0, 0.008, DEFAULTS)
    assert q == q0
    assert qd == 0.0


def test_constant_load_droop():
    # Torque balance: K_p * (0 - q) = tau_ext  =>  q = -tau_ext / K_p = -0.125
    q, qd = 0.0, 0.0
    for _ in range(2000):
        q, qd, _ = step_servo(q, qd, model.rad_to_ticks(0.0), 1.0, 0.008, DEFAULTS)
    assert q == pytest.approx(-0.125, abs=0.02)
    assert abs(qd) < 0.05


def test_undamped_step_matches_analytic_oracle():
    # Closed form for J*q'' = K_p*(qc - q): q(t) = qc*(1 - cos(w t)),
    # w = sqrt(K_p/J). Frictionless params, small step.
    params = ServoDynamicsParams(viscous=0.0, coulomb=0.0)
    w = math.sqrt(params.stiffness / params.inertia)
    qc = 0.05
    cmd = model.rad_to_ticks(qc)
    dt = 0.002
    q, qd = 0.0, 0.0
    t = 0.0
    worst = 0.0
    while t < 0.1:
        q, qd, _ = step_servo(q, qd, cmd, 0.0, dt, params)
        t += dt
        exact = qc * (1.0 - math.cos(w * t))
        worst = max(worst, abs(q - exact))
    assert worst <= 0.02 * qc * 2.0  # 2% of the peak-to-peak response


def test_torque_clamp_respected():
    params = ServoDynamicsParams(torque_max=2.0)
    q, qd = -2.0, 0.0
    for _ in range(200):
        q, qd, tau = step_servo(q, qd, model.rad_to_ticks(2.0), 0.0, 0.008, params)
        assert abs(tau) <= params.torque_max + 1e-12


def test_position_clamped_to_limits():
    q, qd, _ = step_servo(0.0, 0.0, model.rad_to_ticks(2.0), 0.0, 1.0, DEFAULTS,
                          limits=(-0.5, 0.5))
    assert q <= 0.5


def test_feedforward_zero_model():
    ffm = FeedForwardModel(u=np.zeros(10))
    assert feedforward(0.3, 1.0, 2.0, ffm, 5) == 0.0


def test_feedforward_gravity_cancels_droop():
    # k_g = 1/K_p turns a known torque into the exact counter-offset.
    ffm = FeedForwardModel(k_g=1.0 / DEFAULTS.stiffness)
    offset = feedforward(0.0, 0.0, 1.0, ffm, 0)
    q, qd = 0.0, 0.0
    for _ in range(2000):
        q, qd, _ = step_servo(q, qd, model.rad_to_ticks(0.0 + offset), 1.0,
                              0.008, DEFAULTS)
    assert q == pytest.approx(0.0, abs=0.02)


def test_feedforward_sign_term():
    ffm = FeedForwardModel(k_c=0.01)
    assert feedforward(0.0, -1.0, 0.0, ffm, 0) == pytest.approx(-0.01)


def test_feedforward_residual_indexing():
    ffm = FeedForwardModel(u=np.array([0.0, 0.5, 0.0]))
    assert feedforward(0, 0, 0, ffm, 1) == 0.5
    assert feedforward(0, 0, 0, ffm, 99) == 0.0  # out of range reads 0


def make_traj(n=50, dt=0.008):
    t = np.arange(n) * dt
    return ReferenceTrajectory(0.5 + 0.3 * np.sin(2 * math.pi * t), dt=dt)


def test_ilc_zero_error_constant_u_unchanged():
    traj = make_traj()
    ffm = FeedForwardModel(u=np.full(len(traj), 0.07))
    out = ilc_iterate(ffm, traj, np.zeros(len(traj)))
    assert np.allclose(out.u, 0.07)


def test_ilc_constant_error_propagates():
    traj = make_traj()
    ffm = FeedForwardModel(u=np.zeros(len(traj)))
    out = ilc_iterate(ffm, traj, np.full(len(traj), 0.1), gamma=1.0, lead=0)
    assert np.allclose(out.u[2:-2], 0.1)


def test_ilc_lead_shift():
    traj = make_traj(n=10)
    err = np.zeros(10)
    err[5] = 1.0
    out = ilc_iterate(FeedForwardModel(u=np.zeros(10)), traj, err,
                      gamma=1.0, lead=2, smooth_width=1)
    assert out.u[3] == pytest.approx(1.0)
    assert out.u[5] == pytest.approx(0.0)


def test_ilc_length_mismatch():
    traj = make_traj(n=10)
    with pytest.raises(DomainError):
        ilc_iterate(FeedForwardModel(u=np.zeros(10)), traj, np.zeros(9))


def test_ilc_benchmark_converges():
    rms, _ = actuation.run_ilc_benchmark(iterations=10)
    assert rms[10] <= 0.25 * rms[0]
    # non-increasing from iteration 2 on
    for k in range(2, 10):
        assert rms[k + 1] <= rms[k] + 1e-9


def test_fit_recovers_planted_velocity_coefficient():
    traj = make_traj(n=200)
    gravity = np.cos(np.linspace(0.0, 3.0, len(traj)))
    u = 0.02 * traj.velocities
    fitted, singular = fit_coefficients(FeedForwardModel(u=u), traj, gravity)
    assert not singular
    assert fitted.k_v == pytest.approx(0.02, abs=1e-6)
    assert fitted.k_c == pytest.approx(0.0, abs=1e-6)
    assert fitted.k_g == pytest.approx(0.0, abs=1e-6)


def test_fit_recovers_all_planted_coefficients():
    traj = make_traj(n=300)
    gravity = 1.5 + np.cos(np.linspace(0.0, 5.0, len(traj)))
    u = (0.02 * traj.velocities + 0.01 * np.sign(traj.velocities) + 0.125 * gravity)
    fitted, singular = fit_coefficients(FeedForwardModel(u=u), traj, gravity)
    assert not singular
    assert fitted.k_v == pytest.approx(0.02, abs=1e-6)
    assert fitted.k_c == pytest.approx(0.01, abs=1e-6)
    assert fitted.k_g == pytest.approx(0.125, abs=1e-6)
    assert np.max(np.abs(fitted.u)) < 1e-9


def test_fit_zero_u_gives_zero_coefficients():
    traj = make_traj(n=100)
    gravity = np.cos(np.linspace(0.0, 3.0, len(traj)))
    fitted, singular = fit_coefficients(FeedForwardModel(u=np.zeros(len(traj))),
                                        traj, gravity)
    assert not singular
    assert (fitted.k_v, fitted.k_c, fitted.k_g) == (0.0, 0.0, 0.0)


def test_fit_singular_on_constant_velocity():
    # Constant-velocity ramp: velocity and sign columns are collinear.
    n = 100
    ramp = ReferenceTrajectory(np.linspace(0.0, 1.0, n), dt=0.008)
    gravity = np.cos(np.linspace(0.0, 3.0, n))
    previous = FeedForwardModel(k_v=0.5, u=np.zeros(n))
    fitted, singular = fit_coefficients(previous, ramp, gravity)
    assert singular
    assert fitted.k_v == 0.5  # previous coefficients kept


def test_gravity_torque_vertical_chain_zero():
    assert gravity_torque(model.joint_vector(), "left_knee_pitch") == 0.0


def test_gravity_torque_hand_computed_pendulum():
    # Shank+foot folded into one 1.0 kg point mass 0.15 m from the knee:
    # tau = 1.0 * 9.81 * 0.15 * sin(pi/2) = 1.4715 N*m.
    c = model.RobotConstants(shank_kg=1.0, foot_kg=0.0, shank_m=0.3, foot_m=0.0)
    pose = model.joint_vector()
    pose[model.joint_index("left_knee_pitch")] = math.pi / 2
    tau = gravity_torque(pose, "left_knee_pitch", c)
    assert tau == pytest.approx(1.4715, abs=1e-9)


def test_gravity_torque_non_pitch_zero():
    pose = model.joint_vector(np.full(20, 0.5))
    pose = model.DEFAULT_CONSTANTS.clamp(pose)
    assert gravity_torque(pose, "left_ankle_roll") == 0.0
    assert gravity_torque(pose, "neck_pitch") == 0.0


def test_gravity_torque_symmetric_pose():
    pose = model.joint_vector()
    for name in ("hip_pitch", "knee_pitch", "ankle_pitch"):
        pose[model.joint_index(f"left_{name}")] = 0.4
        pose[model.joint_index(f"right_{name}")] = 0.4
    left = gravity_torque(pose, "left_hip_pitch")
    right = gravity_torque(pose, "right_hip_pitch")
    assert left == pytest.approx(right)
    assert left != 0.0


def test_gravity_torque_uses_proximal_orientation():
    # Hip bent forward tips the shank's world angle even with the knee straight.
    pose = model.joint_vector()
    pose[model.joint_index("left_hip_pitch")] = 0.6
    assert gravity_torque(pose, "left_knee_pitch") > 0.0
