"""Closed-loop stepping simulator on the reduced pendulum model.

The plant is the pendulum itself: support transfers to the planned target
instantaneously at each step boundary, the stance height re-derives the
pendulum frequency (commanded base height minus stance height), and the
CoM propagates analytically between boundaries. Planning runs either once
per step or every tick; targets are snapped to steppable ground and their
elevation refined from the heightmap. Failure is recorded, not raised:
a touchdown farther than the reach limit from the capture point or the
CoM, no steppable ground within the snap radius, or a non-finite state.

Trajectory CSV schema (one row per tick):
    time, com_x, com_y, vel_x, vel_y, icp_x, icp_y, stance_x, stance_y,
    stance_z, target_x, target_y, target_z, target_heading, parity,
    contact_schedule, phase_sin, phase_cos, outcome_flag
outcome_flag is the run outcome code stamped on every row (0 completed,
2 failed). A step-event JSON log accompanies the CSV.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, terrain as terrain_mod
from .gait import GaitParams
from .lip_core import FootPosition, LipParams, LipState
from .planner import PlannedStep, StepCommand
from .terrain import Heightmap, TerrainSpec

REPLAN_AT_STEP_START = "at-step-start"
REPLAN_EVERY_TICK = "every-tick"

CSV_COLUMNS = (
    "time", "com_x", "com_y", "vel_x", "vel_y", "icp_x", "icp_y",
    "stance_x", "stance_y", "stance_z", "target_x", "target_y", "target_z",
    "target_heading", "parity", "contact_schedule", "phase_sin", "phase_cos",
    "outcome_flag",
)

_FAIL_REASONS = {
    _kernels.OUTCOME_REACH: "step beyond reach limit",
    _kernels.OUTCOME_NO_GROUND: "no steppable ground within search radius",
    _kernels.OUTCOME_NON_FINITE: "non-finite state",
    _kernels.OUTCOME_BAD_HEIGHT: "non-positive pendulum height",
}


@dataclass(frozen=True)
class SimConfig:
    cmd: StepCommand
    gait: GaitParams = field(default_factory=GaitParams)
    lip: LipParams = field(default_factory=LipParams)
    dt: float = 0.01
    total_duration: float = 10.0
    replan: str = REPLAN_AT_STEP_START
    terrain: "Heightmap | TerrainSpec | None" = None
    reach_limit: float = 0.6

    def __post_init__(self):
        if self.replan not in (REPLAN_AT_STEP_START, REPLAN_EVERY_TICK):
            raise ValueError(f"unknown replanning mode {self.replan!r}")
        if self.total_duration <= 0.0:
            raise ValueError(f"total duration must be positive, got {self.total_duration}")
        if self.reach_limit <= 0.0:
            raise ValueError(f"reach limit must be positive, got {self.reach_limit}")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        Ts = self.gait.step_duration
        k = round(Ts / self.dt)
        if k < 1 or abs(k * self.dt - Ts) > 1e-9:
            raise ValueError(f"dt = {self.dt} must divide the step duration {Ts}")

    @property
    def ticks_per_step(self) -> int:
        return round(self.gait.step_duration / self.dt)

    @property
    def n_ticks(self) -> int:
        n = round(self.total_duration / self.dt)
        return max(1, n)


@dataclass(frozen=True)
class TrajectorySample:
    time: float
    com_pos: np.ndarray
    com_vel: np.ndarray
    icp: np.ndarray
    stance_pos: np.ndarray
    swing_target: PlannedStep
    parity: int
    contact_schedule: float
    phase_sin: float
    phase_cos: float


@dataclass(frozen=True)
class StepEvent:
    time: float
    planned: PlannedStep
    realized: np.ndarray


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    outcome: str
    failure_reason: str | None
    failure_time: float | None
    step_events: tuple
    sample_array: np.ndarray

    @property
    def completed(self) -> bool:
        return self.outcome == "completed"

    @property
    def samples(self) -> tuple:
        return tuple(self._sample(i) for i in range(self.sample_array.shape[0]))

    def _sample(self, i: int) -> TrajectorySample:
        row = self.sample_array[i]
        target = PlannedStep(
            p_d=row[_kernels.COL_TARGET_X:_kernels.COL_TARGET_Y + 1],
            z_d=row[_kernels.COL_TARGET_Z],
            heading=row[_kernels.COL_TARGET_HEADING],
            parity=int(row[_kernels.COL_PARITY]))
        return TrajectorySample(
            time=row[_kernels.COL_TIME],
            com_pos=row[_kernels.COL_COM_X:_kernels.COL_COM_Y + 1].copy(),
            com_vel=row[_kernels.COL_VEL_X:_kernels.COL_VEL_Y + 1].copy(),
            icp=row[_kernels.COL_ICP_X:_kernels.COL_ICP_Y + 1].copy(),
            stance_pos=row[_kernels.COL_STANCE_X:_kernels.COL_STANCE_Z + 1].copy(),
            swing_target=target,
            parity=int(row[_kernels.COL_PARITY]),
            contact_schedule=row[_kernels.COL_CONTACT_SCHED],
            phase_sin=row[_kernels.COL_PHASE_SIN],
            phase_cos=row[_kernels.COL_PHASE_COS])

    def boundary_samples(self) -> np.ndarray:
        """Rows recorded at step-boundary instants (touchdowns)."""
        k = self.config.ticks_per_step
        n = self.sample_array.shape[0]
        return self.sample_array[np.arange(0, n, k)]


def default_initial(config: SimConfig) -> tuple[LipState, FootPosition]:
    """CoM above the midpoint between feet, at rest, right foot in stance
    (half a step width to the right of the midline)."""
    half = config.cmd.w_cmd / 2.0
    state = LipState(com_pos=(0.0, 0.0), com_vel=(0.0, 0.0), params=config.lip)
    stance = FootPosition(p=(0.0, -half), z=0.0)
    return state, stance


def _auto_extent(config: SimConfig, schedule) -> tuple[float, float, float, float]:
    margin = 2.0
    x_lo = x_hi = y_lo = y_hi = 0.0
    t_prev = 0.0
    for i, (t_start, vx, vy, _w) in enumerate(schedule):
        t_end = schedule[i + 1][0] if i + 1 < len(schedule) else config.total_duration
        span = max(0.0, t_end - max(t_start, t_prev))
        x_hi += max(vx, 0.0) * span * 1.5
        x_lo += min(vx, 0.0) * span * 1.5
        y_hi += max(vy, 0.0) * span * 1.5
        y_lo += min(vy, 0.0) * span * 1.5
        t_prev = t_end
    return (x_lo - margin, y_lo - margin, x_hi + margin, y_hi + margin)


def _materialize_terrain(config: SimConfig, schedule, resolution: float = 0.05):
    t = config.terrain
    if t is None:
        return None
    if isinstance(t, Heightmap):
        return t
    if isinstance(t, TerrainSpec):
        if t.kind == "flat":
            return None
        return terrain_mod.generate(t, _auto_extent(config, schedule), resolution)
    raise TypeError(f"terrain must be a Heightmap, TerrainSpec, or None, got {type(t)}")


def _run_arrays(config: SimConfig, schedule, initial=None):
    """Kernel invocation; returns (samples, outcome_code, fail_time, events)."""
    if initial is None:
        state, stance = default_initial(config)
    else:
        state, stance = initial
    hmap = _materialize_terrain(config, schedule)
    if hmap is None:
        has_terrain = False
        heights = np.zeros((2, 2))
        mask = np.zeros((2, 2), dtype=np.uint8)
        ox = oy = 0.0
        res = 1.0
    else:
        if not hmap.contains(stance.p):
            raise ValueError("initial stance foot lies outside the heightmap")
        has_terrain = True
        heights = hmap.heights
        mask = hmap.mask
        ox, oy = float(hmap.origin[0]), float(hmap.origin[1])
        res = hmap.resolution

    n_ticks = config.n_ticks
    cmd_ticks = np.array([round(t / config.dt) for t, *_ in schedule], dtype=np.int64)
    cmd_vx = np.array([s[1] for s in schedule])
    cmd_vy = np.array([s[2] for s in schedule])
    cmd_w = np.array([s[3] for s in schedule])
    samples = np.zeros((n_ticks, _kernels.N_SAMPLE_COLS))
    cap = n_ticks // config.ticks_per_step + 2
    ev_time = np.zeros(cap)
    ev_step = np.zeros((cap, 4))
    ev_realized = np.zeros((cap, 3))
    ev_parity = np.zeros(cap, dtype=np.int64)

    n_rec, outcome, fail_time, n_events = _kernels.sim_loop(
        n_ticks, config.dt, config.ticks_per_step,
        config.lip.g, config.lip.z0,
        cmd_ticks, cmd_vx, cmd_vy, cmd_w,
        config.replan == REPLAN_EVERY_TICK, config.reach_limit,
        has_terrain, heights, mask, ox, oy, res,
        terrain_mod.FOOT_RADIUS, terrain_mod.MAX_HEIGHT_DEV,
        terrain_mod.SNAP_SEARCH_RADIUS,
        state.com_pos[0], state.com_pos[1], state.com_vel[0], state.com_vel[1],
        stance.p[0], stance.p[1],
        samples, ev_time, ev_step, ev_realized, ev_parity)

    events = (ev_time[:n_events], ev_step[:n_events], ev_realized[:n_events],
              ev_parity[:n_events])
    return samples[:n_rec], outcome, fail_time, events


def _build_result(config: SimConfig, samples, outcome_code, fail_time, events) -> SimResult:
    ev_time, ev_step, ev_realized, ev_parity = events
    step_events = tuple(
        StepEvent(time=float(ev_time[i]),
                  planned=PlannedStep(p_d=ev_step[i, :2], z_d=float(ev_step[i, 2]),
                                      heading=float(ev_step[i, 3]),
                                      parity=int(ev_parity[i]) - 1),
                  realized=ev_realized[i].copy())
        for i in range(len(ev_time)))
    completed = outcome_code == _kernels.OUTCOME_COMPLETED
    return SimResult(
        config=config,
        outcome="completed" if completed else "failed",
        failure_reason=None if completed else _FAIL_REASONS[outcome_code],
        failure_time=None if completed else float(fail_time),
        step_events=step_events,
        sample_array=samples)


def run(config: SimConfig, initial: "tuple[LipState, FootPosition] | None" = None) -> SimResult:
    """Simulate under a constant command for the configured duration."""
    v = config.cmd.v_cmd
    schedule = [(0.0, float(v[0]), float(v[1]), config.cmd.w_cmd)]
    return _build_result(config, *_run_arrays(config, schedule, initial))


def turn_maneuver(config: SimConfig, turn_angle: float,
                  switch_time: float = 3.0,
                  initial: "tuple[LipState, FootPosition] | None" = None) -> SimResult:
    """Run with the velocity command rotated by turn_angle at switch_time.

    turn_angle is in radians; 0 reproduces run() exactly.
    """
    v = config.cmd.v_cmd
    c, s = math.cos(turn_angle), math.sin(turn_angle)
    v2 = (c * v[0] - s * v[1], s * v[0] + c * v[1])
    schedule = [(0.0, float(v[0]), float(v[1]), config.cmd.w_cmd),
                (switch_time, float(v2[0]), float(v2[1]), config.cmd.w_cmd)]
    return _build_result(config, *_run_arrays(config, schedule, initial))


def _window_mean_vx(samples: np.ndarray, window: float) -> float:
    times = samples[:, _kernels.COL_TIME]
    t_end = times[-1]
    sel = times >= t_end - window + 1e-12
    return float(samples[sel, _kernels.COL_VEL_X].mean())


def success_metric(result: SimResult, vx_cmd: float, window: float,
                   tolerance: float = 0.1) -> bool:
    """True when the run completed and the mean forward velocity over the
    trailing window is within the relative tolerance of the command
    (absolute tolerance when the command is zero)."""
    if window > result.config.total_duration:
        raise ValueError(f"window {window} exceeds run duration "
                         f"{result.config.total_duration}")
    if not result.completed:
        return False
    mean_vx = _window_mean_vx(result.sample_array, window)
    scale = abs(vx_cmd) if vx_cmd != 0.0 else 1.0
    return abs(mean_vx - vx_cmd) <= tolerance * scale


@dataclass(frozen=True)
class SweepRow:
    config_index: int
    vx_cmd: float
    terrain_label: str
    trials: int
    successes: int

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else math.nan


def _trial_seed(base_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([base_seed, trial]).generate_state(1)[0])


def _terrain_label(t) -> str:
    if t is None:
        return "flat"
    if isinstance(t, TerrainSpec):
        if t.kind == "rough":
            return f"rough:{t.amplitude}:{t.correlation}"
        if t.kind == "gap":
            return f"gap:{t.gap_width}:{t.gap_period}:{t.gap_offset}"
        return "flat"
    return "heightmap"


def sweep(configs, trials: int, base_seed: int = 0, window: float = 5.0,
          tolerance: float = 0.1) -> list[SweepRow]:
    """Success fraction per config over seeded trials.

    Rough-terrain specs are re-seeded per trial; trial seeds depend only on
    (base_seed, trial index) so trials are paired across configs. Results
    are deterministic in (configs, trials, base_seed).
    """
    if not configs:
        raise ValueError("sweep needs at least one config")
    rows = []
    for ci, config in enumerate(configs):
        successes = 0
        for trial in range(trials):
            cfg = config
            if isinstance(config.terrain, TerrainSpec) and config.terrain.kind == "rough":
                spec = config.terrain.with_seed(_trial_seed(base_seed, trial))
                cfg = SimConfig(cmd=config.cmd, gait=config.gait, lip=config.lip,
                                dt=config.dt, total_duration=config.total_duration,
                                replan=config.replan, terrain=spec,
                                reach_limit=config.reach_limit)
            result = run(cfg)
            if success_metric(result, float(cfg.cmd.v_cmd[0]), window, tolerance):
                successes += 1
        rows.append(SweepRow(config_index=ci, vx_cmd=float(config.cmd.v_cmd[0]),
                             terrain_label=_terrain_label(config.terrain),
                             trials=trials, successes=successes))
    return rows


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(result: SimResult, path) -> None:
    """One row per tick, 17 significant digits, '.' decimal separator."""
    flag = 0 if result.completed else 2
    arr = result.sample_array
    with open(path, "w", newline="") as f:
        f.write(",".join(CSV_COLUMNS) + "\n")
        for row in arr:
            vals = [_fmt(row[c]) for c in range(_kernels.COL_PARITY)]
            vals.append(str(int(row[_kernels.COL_PARITY])))
            vals.extend(_fmt(row[c]) for c in
                        (_kernels.COL_CONTACT_SCHED, _kernels.COL_PHASE_SIN,
                         _kernels.COL_PHASE_COS))
            vals.append(str(flag))
            f.write(",".join(vals) + "\n")


def write_step_events(result: SimResult, path) -> None:
    events = [
        {
            "time": ev.time,
            "planned": {
                "x": float(ev.planned.p_d[0]),
                "y": float(ev.planned.p_d[1]),
                "z": ev.planned.z_d,
                "heading": ev.planned.heading,
                "parity": ev.planned.parity,
            },
            "realized": {
                "x": float(ev.realized[0]),
                "y": float(ev.realized[1]),
                "z": float(ev.realized[2]),
            },
        }
        for ev in result.step_events
    ]
    with open(path, "w") as f:
        json.dump({"step_events": events}, f, indent=2, sort_keys=True)
        f.write("\n")
