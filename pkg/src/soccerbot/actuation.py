"""Servo plant dynamics and model-based feed-forward position control.

The plant is the simplest second-order model exhibiting the effects the
feed-forward path compensates: gravity droop, coulomb/viscous friction lag,
and a torque-limited position spring. The repeatable part of the tracking
error is learned per trajectory sample by iterative learning control and
then generalized into velocity / friction-sign / gravity coefficients by a
least-squares fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import model
from .errors import DomainError


@dataclass(frozen=True)
class ServoDynamicsParams:
    inertia: float = 0.01        # J, kg·m²
    stiffness: float = 8.0       # K_p, N·m/rad (low-gain position spring)
    viscous: float = 0.25        # b, N·m·s/rad; keeps the plant damped enough
                                 # for serial ILC to contract (zeta ~ 0.44)
    coulomb: float = 0.1         # τ_c, N·m
    torque_max: float = 10.0     # clamp on spring torque, N·m

    def __post_init__(self):
        if min(self.inertia, self.stiffness, self.viscous, self.coulomb) < 0:
            raise DomainError("dynamics parameters must be non-negative")
        if self.torque_max <= 0:
            raise DomainError("torque_max must be positive")


def step_servo(q, qd, cmd_ticks, tau_ext, dt, params: ServoDynamicsParams,
               limits=None):
    """Advance one servo plant by dt using 4 semi-implicit Euler substeps.

    cmd_ticks of None means torque off (free joint). Returns (q, qd, tau)
    where tau is the motor torque applied in the last substep. Accepts
    scalars or equal-length arrays.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    if cmd_ticks is None:
        q_cmd = None
    else:
        q_cmd = np.asarray(
            [model.ticks_to_rad(t) for t in np.atleast_1d(cmd_ticks)]
            if np.ndim(cmd_ticks) else model.ticks_to_rad(int(cmd_ticks)),
            dtype=float,
        )
        q_cmd = q_cmd.reshape(np.shape(q))
    h = dt / 4.0
    tau = np.zeros_like(q)
    for _ in range(4):
        if q_cmd is None:
            tau = np.zeros_like(q)
        else:
            tau = np.clip(params.stiffness * (q_cmd - q),
                          -params.torque_max, params.torque_max)
        acc = (tau - params.viscous * qd - params.coulomb * np.sign(qd)
               - tau_ext) / params.inertia
        qd = qd + h * acc
        q = q + h * qd
        if limits is not None:
            lo, hi = limits
            clipped = np.clip(q, lo, hi)
            qd = np.where(clipped != q, 0.0, qd)
            q = clipped
    if q.ndim == 0:
        return float(q), float(qd), float(tau)
    return q, qd, tau


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Uniformly sampled position reference with derived rates."""

    samples: np.ndarray
    dt: float = 0.008
    velocities: np.ndarray = field(init=False, repr=False)
    accelerations: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or len(samples) < 3:
            raise DomainError("trajectory needs at least 3 samples")
        if self.dt <= 0:
            raise DomainError("dt must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "velocities", np.gradient(samples, self.dt))
        object.__setattr__(self, "accelerations",
                          np.gradient(self.velocities, self.dt))

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class FeedForwardModel:
    """Velocity / friction-sign / gravity coefficients plus learned residual."""

    k_v: float = 0.0
    k_c: float = 0.0
    k_g: float = 0.0
    u: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        if not (math.isfinite(self.k_v) and math.isfinite(self.k_c)
                and math.isfinite(self.k_g)):
            raise DomainError("coefficients must be finite")


def feedforward(q_des: float, qd_des: float, gravity_torque: float,
                ffm: FeedForwardModel, i: int) -> float:
    """Command offset added to q_des; residual u is indexed by sample."""
    u_i = ffm.u[i] if 0 <= i < len(ffm.u) else 0.0
    return (ffm.k_v * qd_des + ffm.k_c * np.sign(qd_des)
            + ffm.k_g * gravity_torque + u_i)


def _moving_average(x: np.ndarray, width: int) -> np.ndarray:
    """Centered moving average; windows truncate at the edges."""
    half = width // 2
    csum = np.concatenate(([0.0], np.cumsum(x)))
    n = len(x)
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def ilc_iterate(ffm: FeedForwardModel, traj: ReferenceTrajectory,
                errors: np.ndarray, gamma: float = 0.5, lead: int = 2,
                smooth_width: int = 5) -> FeedForwardModel:
    """One learning update: u <- smooth(u + gamma * shift(e, lead)).

    Errors are q_des - q_measured from the last rollout; samples read past
    the trajectory end are zero. The lead advances the correction to beat
    plant lag.
    """
    errors = np.asarray(errors, dtype=float)
    if len(errors) != len(traj):
        raise DomainError("error array length must match trajectory")
    if not 0.0 < gamma <= 1.0:
        raise DomainError("gamma must be in (0, 1]")
    u = ffm.u if len(ffm.u) == len(traj) else np.zeros(len(traj))
    shifted = np.zeros_like(errors)
    if lead < len(errors):
        shifted[:len(errors) - lead] = errors[lead:]
    u_next = _moving_average(u + gamma * shifted, smooth_width)
    return replace(ffm, u=u_next)


def fit_coefficients(ffm: FeedForwardModel, traj: ReferenceTrajectory,
                     gravity: np.ndarray):
    """Fit (k_v, k_c, k_g) to the learned residual by least squares.

    Returns (model, singular). A rank-deficient regressor matrix keeps the
    previous coefficients and reports singular=True; otherwise u is replaced
    by the fit residual so the coefficients generalize across trajectories.
    """
    if len(ffm.u) != len(traj):
        raise DomainError("model residual length must match trajectory")
    gravity = np.asarray(gravity, dtype=float)
    X = np.column_stack([traj.velocities, np.sign(traj.velocities), gravity])
    rank = np.linalg.matrix_rank(X, tol=1e-9 * max(1.0, np.abs(X).max()))
    if rank < 3:
        return ffm, True
    coef, *_ = np.linalg.lstsq(X, ffm.u, rcond=None)
    residual = ffm.u - X @ coef
    fitted = FeedForwardModel(k_v=float(coef[0]), k_c=float(coef[1]),
                              k_g=float(coef[2]), u=residual)
    return fitted, False


# Sagittal chains for the planar gravity model: (pitch joint, link length
# attr, link mass attr) from the trunk outward. Point masses at link centers.
_PITCH_CHAINS = {
    "leg": (("hip_pitch", "thigh_m", "thigh_kg"),
            ("knee_pitch", "shank_m", "shank_kg"),
            ("ankle_pitch", "foot_m", "foot_kg")),
    "arm": (("shoulder_pitch", "upper_arm_m", "upper_arm_kg"),
            ("elbow_pitch", "forearm_m", "forearm_kg")),
}


def gravity_torque(joints: np.ndarray, joint: int | str,
                   constants: model.RobotConstants = model.DEFAULT_CONSTANTS) -> float:
    """Gravity load on a sagittal pitch joint from the distal link masses.

    Planar chain, trunk upright, links hanging: a link at accumulated pitch
    angle phi from straight-down places its center of mass at horizontal
    offset l_com*sin(phi). Non-pitch joints (and the neck) return 0.
    """
    joints = model.joint_vector(joints)
    name = joint if isinstance(joint, str) else model.JOINT_NAMES[joint]
    side, _, short = name.partition("_")
    if side not in ("left", "right"):
        return 0.0
    chain = next((c for c in _PITCH_CHAINS.values()
                  if any(short == j for j, _, _ in c)), None)
    if chain is None:
        return 0.0
    start = next(i for i, (j, _, _) in enumerate(chain) if j == short)

    # Walk the whole chain to accumulate world pitch angles, then sum moments
    # of the links distal to the queried joint about its axis.
    phi = 0.0
    x = 0.0  # horizontal offset of the current joint from the chain root
    x_joint = None
    torque = 0.0
    for i, (jname, len_attr, mass_attr) in enumerate(chain):
        phi += joints[model.joint_index(f"{side}_{jname}")]
        if i == start:
            x_joint = x
        length = getattr(constants, len_attr)
        mass = getattr(constants, mass_attr)
        if i >= start:
            x_com = x + 0.5 * length * math.sin(phi)
            torque += mass * model.GRAVITY * (x_com - x_joint)
        x += length * math.sin(phi)
    return torque


def gravity_torques(joints: np.ndarray,
                    constants: model.RobotConstants = model.DEFAULT_CONSTANTS) -> np.ndarray:
    """Gravity load for every joint (zero for non-pitch joints)."""
    return np.array([gravity_torque(joints, i, constants)
                     for i in range(model.N_JOINTS)])


def run_ilc_benchmark(joint: str = "left_knee_pitch", iterations: int = 10,
                      gamma: float = 0.5, lead: int = 2, smooth_width: int = 5,
                      params: ServoDynamicsParams | None = None,
                      constants: model.RobotConstants = model.DEFAULT_CONSTANTS,
                      duration_s: float = 2.0, dt: float = 0.008):
    """Pendulum tracking benchmark: one joint, gravity load, sinusoid reference.

    Runs `iterations` learning passes on the simulated plant and returns
    (rms_per_iteration, model). Iteration 0 is the unassisted rollout.
    """
    idx = model.joint_index(joint)
    n = int(round(duration_s / dt))
    t = np.arange(n) * dt
    # Start on the reference; swing stays well inside the knee range.
    q_des = 0.9 + 0.5 * np.sin(2.0 * math.pi * 0.5 * t - math.pi / 2.0)
    traj = ReferenceTrajectory(q_des, dt=dt)
    params = params or ServoDynamicsParams()
    limits = (constants.limits_lo[idx], constants.limits_hi[idx])

    def load(q: float) -> float:
        pose = model.joint_vector()
        pose[idx] = q
        return gravity_torque(pose, idx, constants)

    # Gravity along the reference is "known in advance"; the plant sees the
    # load at its actual position.
    load_des = np.array([load(qd_i) for qd_i in q_des])
    ffm = FeedForwardModel(u=np.zeros(n))
    rms_history = []
    for _ in range(iterations + 1):
        q, qd = float(q_des[0]), 0.0
        err = np.zeros(n)
        for i in range(n):
            offset = feedforward(q_des[i], traj.velocities[i], load_des[i], ffm, i)
            cmd = model.rad_to_ticks(q_des[i] + offset)
            q, qd, _ = step_servo(q, qd, cmd, load(q), dt, params, limits=limits)
            err[i] = q_des[i] - q
        rms_history.append(float(np.sqrt(np.mean(err ** 2))))
        ffm = ilc_iterate(ffm, traj, err, gamma=gamma, lead=lead,
                          smooth_width=smooth_width)
    return rms_history[:iterations + 1], ffm
