"""Reward evaluators and the joint PD law, as pure functions over samples.

These score externally supplied robot samples (from the reduced simulator's
logs or any robot log); nothing here depends on the simulator. The task
terms peak at 1 (base height), 2 (base heading), 4 (velocity tracking), and
9 (contact schedule); eleven regularization terms mirror the weighted
penalty table, with the termination term evaluating its five conditions on
the sample (self-collision is an input flag, not computed).

Note the heading term decays with |error|/sigma, not the squared error;
its shaping scale therefore carries different units than the height term.
This is deliberate and kept verbatim.
"""

import math
from dataclasses import dataclass

import numpy as np

from .gait import GaitState, contact_schedule as gait_contact_schedule, swing_foot

RIGHT, LEFT = 0, 1


def _arr(v) -> np.ndarray:
    return np.asarray(v, dtype=np.float64).reshape(-1)


@dataclass(frozen=True)
class RobotSample:
    """One observation of the robot; vector fields default to empty."""

    base_height: float = 0.62
    base_heading: float = 0.0
    base_vel_world: np.ndarray = (0.0, 0.0)
    base_vel_z: float = 0.0
    base_ang_vel: np.ndarray = (0.0, 0.0, 0.0)
    gravity_proj: np.ndarray = (0.0, 0.0, -1.0)
    q: np.ndarray = ()
    dq: np.ndarray = ()
    tau: np.ndarray = ()
    foot_pos: np.ndarray = ((0.0, 0.0), (0.0, 0.0))
    foot_contact: tuple = (False, False)
    action: np.ndarray = ()
    action_prev: np.ndarray = ()
    action_prev2: np.ndarray = ()
    q_hip_xz: np.ndarray = ()
    self_collision: bool = False

    def __post_init__(self):
        for name in ("base_vel_world", "base_ang_vel", "gravity_proj", "q", "dq",
                     "tau", "action", "action_prev", "action_prev2", "q_hip_xz"):
            object.__setattr__(self, name, _arr(getattr(self, name)))
        object.__setattr__(self, "foot_pos",
                           np.asarray(self.foot_pos, dtype=np.float64).reshape(2, 2))


@dataclass(frozen=True)
class RewardParams:
    sigma: float = 0.25
    base_height_target: float = 0.62
    heading_target: float = 0.0
    vel_cmd: np.ndarray = (0.0, 0.0)
    tau_max: np.ndarray = math.inf
    q_max: np.ndarray = math.inf
    action_dt: float = 0.01
    step_duration: float = 0.35
    w_torque: float = 1e-4
    w_torque_limits: float = 1e-2
    w_joint_vel: float = 1e-3
    w_joint_limits: float = 10.0
    w_smooth1: float = 1e-3
    w_smooth2: float = 1e-4
    w_hip: float = 1.25
    w_rollpitch: float = 1e-2
    w_zvel: float = 1e-1
    w_tilt: float = 1.0
    w_termination: float = 100.0

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.action_dt <= 0.0:
            raise ValueError(f"action dt must be positive, got {self.action_dt}")
        object.__setattr__(self, "vel_cmd", _arr(self.vel_cmd))


def r_base_height(s: RobotSample, params: RewardParams) -> float:
    """exp(-(target - height)^2 / sigma), peak 1 at exact tracking."""
    err = params.base_height_target - s.base_height
    return math.exp(-err * err / params.sigma)


def r_base_orientation(s: RobotSample, params: RewardParams) -> float:
    """2 exp(-|target - heading| / sigma), peak 2; error wrapped to [0, pi]."""
    d = math.fmod(params.heading_target - s.base_heading, 2.0 * math.pi)
    if d > math.pi:
        d -= 2.0 * math.pi
    elif d < -math.pi:
        d += 2.0 * math.pi
    return 2.0 * math.exp(-abs(d) / params.sigma)


def r_velocity_tracking(s: RobotSample, params: RewardParams) -> float:
    """4 exp(-|(v_cmd - v)/(1 + |v_cmd|)|^2 / sigma), peak 4.

    The error vector is normalized by 1 + |v_cmd| and enters as its squared
    Euclidean norm.
    """
    v_cmd = params.vel_cmd
    err = (v_cmd - s.base_vel_world) / (1.0 + float(np.linalg.norm(v_cmd)))
    return 4.0 * math.exp(-float(err @ err) / params.sigma)


def _schedule_and_stance(gait, stance_side):
    if isinstance(gait, GaitState):
        c = gait_contact_schedule(gait)
        if stance_side is None:
            stance_side = RIGHT if swing_foot(gait) == "left" else LEFT
    else:
        c = float(gait)
        if stance_side is None:
            stance_side = RIGHT if c >= 0.0 else LEFT
    return c, stance_side


def r_contact_schedule(s: RobotSample, params: RewardParams, gait,
                       targets, stance_side: int | None = None) -> float:
    """9 (1_r - 1_l) C exp(-||p_d - p|| / sigma), in [-9, 9].

    `gait` is a GaitState or a raw schedule value C. targets is a (2, 2)
    array of per-foot desired placements [right, left]; the placement error
    is the stance foot's distance to its target (its touchdown location),
    the stance side deriving from the gait parity (or the sign of C) unless
    given explicitly.
    """
    c, stance_side = _schedule_and_stance(gait, stance_side)
    targets = np.asarray(targets, dtype=np.float64).reshape(2, 2)
    indicator = float(bool(s.foot_contact[RIGHT])) - float(bool(s.foot_contact[LEFT]))
    err = float(np.linalg.norm(targets[stance_side] - s.foot_pos[stance_side]))
    return 9.0 * indicator * c * math.exp(-err / params.sigma)


def pd_torque(q_ref, dq_action, q, qd, kp=30.0, kd=1.0) -> np.ndarray:
    """Joint PD law tau = Kp (q_ref + dq_action - q) + Kd (0 - qd).

    kp and kd are the diagonal gains, scalar or per-joint.
    """
    q_ref, dq_action, q, qd = _arr(q_ref), _arr(dq_action), _arr(q), _arr(qd)
    return np.asarray(kp) * (q_ref + dq_action - q) - np.asarray(kd) * qd


def _terminated(s: RobotSample) -> bool:
    v = math.sqrt(float(s.base_vel_world @ s.base_vel_world) + s.base_vel_z ** 2)
    if s.self_collision:
        return True
    if v >= 10.0:
        return True
    if float(np.linalg.norm(s.base_ang_vel)) >= 5.0:
        return True
    if abs(s.gravity_proj[0]) >= 0.7 or abs(s.gravity_proj[1]) >= 0.7:
        return True
    if s.base_height < 0.3:
        return True
    return False


def regularization(s: RobotSample, params: RewardParams) -> dict:
    """Weighted regularization terms, keyed by name."""
    sig = params.sigma
    dt = params.action_dt
    tau_max = np.broadcast_to(np.asarray(params.tau_max, dtype=np.float64), s.tau.shape)
    q_max = np.broadcast_to(np.asarray(params.q_max, dtype=np.float64), s.q.shape)
    a, a1, a2 = s.action, s.action_prev, s.action_prev2
    terms = {
        "joint_torques": params.w_torque * -float(s.tau @ s.tau),
        "torque_limits": params.w_torque_limits
            * -float(np.maximum(np.abs(s.tau) - 0.9 * tau_max, 0.0).sum()),
        "joint_velocity": params.w_joint_vel * -float(s.dq @ s.dq),
        "joint_limits": params.w_joint_limits
            * -float(np.clip(np.abs(s.q) - 0.9 * q_max, 0.0, 1.0).sum()),
        "action_smoothness_1": params.w_smooth1
            * -float(np.sum(((a - a1) / dt) ** 2)) if a.size else 0.0,
        "action_smoothness_2": params.w_smooth2
            * -float(np.sum(((a - 2.0 * a1 + a2) / dt) ** 2)) if a.size else 0.0,
        "hip_regularization": params.w_hip
            * math.exp(-float(s.q_hip_xz @ s.q_hip_xz) / sig),
        "base_rollpitch_velocity": params.w_rollpitch
            * -(s.base_ang_vel[0] ** 2 + s.base_ang_vel[1] ** 2),
        "base_z_velocity": params.w_zvel * -(s.base_vel_z ** 2),
        "base_tilting": params.w_tilt
            * math.exp(-(s.gravity_proj[0] ** 2 + s.gravity_proj[1] ** 2) / sig),
        "termination": params.w_termination * (-1.0 if _terminated(s) else 0.0),
    }
    return terms


def total_reward(s: RobotSample, params: RewardParams, gait, targets,
                 stance_side: int | None = None) -> tuple[float, dict]:
    """Sum of the four task terms and all regularization terms.

    Returns (total, breakdown); the breakdown sums to the total exactly.
    """
    breakdown = {
        "base_height": r_base_height(s, params),
        "base_orientation": r_base_orientation(s, params),
        "velocity_tracking": r_velocity_tracking(s, params),
        "contact_schedule": r_contact_schedule(s, params, gait, targets, stance_side),
    }
    breakdown.update(regularization(s, params))
    total = 0.0
    for v in breakdown.values():
        total += v
    return total, breakdown
