"""Central declaration of every tunable parameter in the config tree."""

from __future__ import annotations

from . import behavior, gait, model
from .actuation import ServoDynamicsParams
from .config import ParamTree


def declare_all(tree: ParamTree) -> ParamTree:
    model.declare_params(tree)
    gait.declare_params(tree)
    behavior.declare_params(tree)

    servo = ServoDynamicsParams()
    tree.declare("/servo/inertia", servo.inertia, min=0.001, max=1.0, step=0.001)
    tree.declare("/servo/stiffness", servo.stiffness, min=0.5, max=100.0, step=0.5)
    tree.declare("/servo/viscous", servo.viscous, min=0.0, max=2.0, step=0.01)
    tree.declare("/servo/coulomb", servo.coulomb, min=0.0, max=2.0, step=0.01)
    tree.declare("/servo/torque_max", servo.torque_max, min=0.5, max=50.0, step=0.5)

    tree.declare("/ilc/gamma", 0.5, min=0.01, max=1.0, step=0.01)
    tree.declare("/ilc/lead", 2, min=0, max=20, step=1)
    tree.declare("/ilc/smooth_width", 5, min=1, max=25, step=2)

    # feed-forward coefficients applied in the control loop (0 = pure position)
    tree.declare("/ff/k_v", 0.0, min=-1.0, max=1.0, step=0.001)
    tree.declare("/ff/k_c", 0.0, min=-1.0, max=1.0, step=0.001)
    tree.declare("/ff/k_g", 0.0, min=-1.0, max=1.0, step=0.001)

    tree.declare("/fall/trigger_rad", 0.9, min=0.2, max=1.5, step=0.05)
    tree.declare("/fall/fallen_rad", 1.3, min=0.5, max=2.0, step=0.05)
    tree.declare("/fall/dwell_s", 0.5, min=0.05, max=2.0, step=0.05)

    tree.declare("/estimator/alpha", 0.02, min=0.0, max=1.0, step=0.005)

    tree.declare("/imu/gyro_noise", 0.002, min=0.0, max=0.1, step=0.001)
    tree.declare("/imu/accel_noise", 0.01, min=0.0, max=1.0, step=0.005)

    tree.declare("/bus/corrupt_rate", 0.0, min=0.0, max=0.2, step=0.0005)

    tree.declare("/vision/goal_class_hue", 60.0, min=0.0, max=359.0, step=1.0)
    tree.declare("/vision/camera_height", 0.85, min=0.2, max=1.5, step=0.01)
    tree.declare("/vision/camera_tilt", 0.35, min=-0.5, max=1.2, step=0.01)
    tree.declare("/vision/block_threshold", 8, min=1, max=16, step=1)

    tree.declare("/behavior/kick_strike_s", 1.25, min=0.1, max=4.0, step=0.05)
    tree.declare("/behavior/kick_speed", 2.5, min=0.2, max=8.0, step=0.1)

    # set to a motion name (e.g. from the dashboard) to trigger playback
    tree.declare("/motion/play", "")

    tree.declare("/world/field_length", 9.0, min=2.0, max=20.0, step=0.5)
    tree.declare("/world/field_width", 6.0, min=2.0, max=14.0, step=0.5)
    tree.declare("/world/line_width", 0.05, min=0.01, max=0.2, step=0.01)
    tree.declare("/world/goal_width", 2.6, min=1.0, max=4.0, step=0.1)
    tree.declare("/world/ball_radius", 0.11, min=0.03, max=0.3, step=0.01)
    tree.declare("/world/battery_start", 16.8, min=12.8, max=16.8, step=0.1)
    tree.declare("/world/battery_decay", 0.0001, min=0.0, max=0.01, step=0.0001)
    return tree


def default_tree() -> ParamTree:
    return declare_all(ParamTree())
