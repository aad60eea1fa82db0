"""Environment composition: dynamics + track + reward engine + opponent,
plus observation assembly."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dynamics, opponent, rewards
from .dynamics import DroneState, DynamicsConfig, ImuReading
from .geometry import (DEFAULT_DRONE_RADIUS, PassEvent, Track,
                       segment_frame_collision, segment_gate_crossing,
                       sample_spawn)
from .rewards import EpisodeStatus, RewardConfig, TERM_NONE

OBS_DIM = 21
TIMER_OBS_SCALE = 0.1


def _yaw_frame(vec: np.ndarray, yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([c * vec[0] + s * vec[1],
                     -s * vec[0] + c * vec[1],
                     vec[2]])


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def build_observation(agent: DroneState, opponent_gps, status: EpisodeStatus,
                      track: Track, imu: ImuReading, gps) -> np.ndarray:
    """21-dim observation: IMU (9), own GPS (3), target vector in the
    agent's yaw frame (3), target relative yaw (1), vector to opponent
    GPS in the yaw frame (3), gates-passed fraction (1), scaled time
    remaining on the gate timer (1)."""
    if status.done != TERM_NONE:
        raise ValueError("cannot observe a finished episode")
    gate = track.gates[status.target_gate]
    yaw = agent.yaw
    to_gate = _yaw_frame(gate.center - agent.position, yaw)
    to_opp = _yaw_frame(np.asarray(opponent_gps) - agent.position, yaw)
    rel_yaw = _wrap_angle(gate.yaw - yaw)
    frac = status.gates_passed / track.n_gates
    timer = (status.gate_deadline - agent.time) * TIMER_OBS_SCALE
    return np.concatenate([
        imu.linear_velocity, imu.angular_velocity, imu.attitude,
        np.asarray(gps, dtype=np.float64), to_gate, [rel_yaw], to_opp,
        [frac], [timer],
    ])


@dataclass
class EpisodeInfo:
    episode_return: float
    gates_passed: int
    collisions: int
    duration: float
    termination: str
    steps: int


class RacingEnv:
    """Single agent racing the waypoint-following opponent on one track.

    Owns per-episode state and the spawn / sensor random streams; the
    caller drives it with clipped action vectors.
    """

    def __init__(self, track: Track, dyn_cfg: DynamicsConfig,
                 reward_cfg: RewardConfig,
                 opponent_cfg: "OpponentSettings | None" = None,
                 spawn_rng: np.random.Generator | None = None,
                 sensor_rng: np.random.Generator | None = None,
                 drone_radius: float = DEFAULT_DRONE_RADIUS):
        from .config import OpponentSettings

        self.track = track
        self.dyn_cfg = dyn_cfg
        self.reward_cfg = reward_cfg
        self.opp_cfg = opponent_cfg or OpponentSettings()
        self.spawn_rng = spawn_rng or np.random.default_rng(0)
        self.sensor_rng = sensor_rng or np.random.default_rng(1)
        self.drone_radius = drone_radius
        self.plan = opponent.plan(
            track, cruise_speed=self.opp_cfg.cruise_speed,
            approach_offset=self.opp_cfg.approach_offset,
            arrival_radius=self.opp_cfg.arrival_radius)

        self.agent: DroneState | None = None
        self.opp: opponent.FollowerState | None = None
        self.status: EpisodeStatus | None = None
        self.opponent_times: np.ndarray | None = None
        self.episode_steps = 0
        self.episode_raw_return = 0.0

    def reset(self, spawn_override: DroneState | None = None) -> np.ndarray:
        if spawn_override is not None:
            self.agent = spawn_override.copy()
        else:
            self.agent = sample_spawn(self.track, 0, self.spawn_rng)
        self.opp = opponent.FollowerState(drone=self.agent.copy())
        self.opponent_times = opponent.expected_gate_times(
            self.plan, self.agent.position)
        self.status = rewards.init_status(
            self.track, self.opponent_times, self.reward_cfg, t0=self.agent.time)
        self.episode_steps = 0
        self.episode_raw_return = 0.0
        return self.observe()

    def observe(self) -> np.ndarray:
        imu = dynamics.read_imu(self.agent, self.dyn_cfg.imu_noise_std,
                                self.sensor_rng)
        gps = dynamics.read_gps(self.agent, self.dyn_cfg.gps_noise_std,
                                self.sensor_rng)
        return build_observation(self.agent, self.opp.drone.position,
                                 self.status, self.track, imu, gps)

    def observe_final(self) -> np.ndarray:
        """Observation of the terminal state after a clock cutoff, for
        value bootstrapping; only valid for time-limit terminations."""
        from dataclasses import replace
        if self.status.done != rewards.TERM_TIME_LIMIT:
            raise ValueError("observe_final is only for time-limit cutoffs")
        imu = dynamics.read_imu(self.agent, self.dyn_cfg.imu_noise_std,
                                self.sensor_rng)
        gps = dynamics.read_gps(self.agent, self.dyn_cfg.gps_noise_std,
                                self.sensor_rng)
        status = replace(self.status, done=TERM_NONE)
        return build_observation(self.agent, self.opp.drone.position,
                                 status, self.track, imu, gps)

    def detect_events(self, prev: DroneState, nxt: DroneState) -> dict:
        """Geometric events for one step: the gate-pass test is only
        invoked near the target gate (a cheap distance trigger); frame
        collisions are checked against every gate within reach."""
        gate = self.track.gates[self.status.target_gate]
        travel_bound = self.dyn_cfg.v_max * self.dyn_cfg.dt
        pass_event = None
        d_next = float(np.linalg.norm(nxt.position - gate.center))
        # trigger radius must cover every point reachable in one step from
        # a crossing anywhere in the opening, or real passes get dropped
        reach = math.hypot(gate.half_width, gate.half_height) + travel_bound
        if d_next < self.reward_cfg.pass_check_radius + reach:
            point = segment_gate_crossing(prev.position, nxt.position, gate)
            if point is not None:
                pass_event = PassEvent(gate_id=gate.id, time=nxt.time,
                                       crossing_point=point)
        collision = False
        for g in self.track.gates:
            reach = (max(g.half_width, g.half_height) + g.frame_thickness
                     + self.drone_radius + travel_bound)
            if float(np.linalg.norm(nxt.position - g.center)) > reach:
                continue
            if segment_frame_collision(prev.position, nxt.position, g,
                                       self.drone_radius):
                collision = True
                break
        return {"pass": pass_event, "collision": collision}

    def step(self, action) -> tuple[float, bool, dict]:
        """Returns (raw_reward, done, info). Call observe() for the next
        observation while the episode is alive."""
        prev = self.agent
        nxt = dynamics.step(prev, action, self.dyn_cfg.dt, self.dyn_cfg)
        self.opp = opponent.advance(self.plan, self.opp, self.dyn_cfg.dt)
        events = self.detect_events(prev, nxt)
        reward, self.status = rewards.compute_step(
            prev, nxt, self.status, events, self.reward_cfg,
            self.opponent_times, self.track)
        self.agent = nxt
        self.episode_steps += 1
        self.episode_raw_return += reward
        done = self.status.done != TERM_NONE
        info = {"events": events}
        if done:
            info["episode"] = EpisodeInfo(
                episode_return=self.episode_raw_return,
                gates_passed=self.status.gates_passed,
                collisions=self.status.collisions,
                duration=self.agent.time,
                termination=self.status.done,
                steps=self.episode_steps,
            )
        return reward, done, info
