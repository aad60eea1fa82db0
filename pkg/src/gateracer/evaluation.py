"""Policy evaluation and head-to-head races against the planner."""

from __future__ import annotations

import math

import numpy as np

from .config import RunConfig, run_config_from_dict
from .env import OBS_DIM, RacingEnv
from .geometry import Track, sample_spawn, segment_gate_crossing, track_from_dict
from .networks import PolicyParams, forward, init_policy, sample_action
from .normalization import RunningStats, normalize_observation
from .rewards import TERM_ALL_GATES, resolved_time_limit
from . import opponent


def policy_from_checkpoint(state: dict):
    """(params, frozen RunningStats, RunConfig, base Track) from a loaded
    checkpoint state dict."""
    cfg = run_config_from_dict(state["config"])
    params = init_policy(np.random.default_rng(0), OBS_DIM)
    for i, p in enumerate(params.flat_list()):
        p[...] = state["arrays"][f"param{i:02d}"]
    stats = RunningStats(OBS_DIM)
    stats.load_state_dict({
        "count": state["scalars"]["obs_count"],
        "mean": state["arrays"]["obs_mean"],
        "m2": state["arrays"]["obs_m2"],
        "frozen": True,
    })
    track = track_from_dict(state["track"])
    return params, stats, cfg, track


def _policy_action(params, stats, obs_raw, deterministic, rng):
    obs_n = normalize_observation(stats, obs_raw)
    mean, log_std, _ = forward(params, obs_n)
    if deterministic:
        return np.clip(mean, -1.0, 1.0)
    _, clipped, _ = sample_action(mean, log_std, rng)
    return clipped


def _displaced_spawn(track: Track, rng, spawn_distance, yaw_error):
    """Spawn at a fixed center distance with a +/- yaw offset; used for
    the off-nominal recovery evaluation."""
    spawn = sample_spawn(track, 0, rng)
    gate = track.gates[0]
    to_gate = gate.center - spawn.position
    d = float(np.linalg.norm(to_gate))
    if spawn_distance is not None:
        spawn.position = gate.center - to_gate / d * spawn_distance
    if yaw_error:
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        spawn.attitude[2] += sign * yaw_error
    return spawn


def evaluate(ckpt_state: dict, episodes: int, deterministic: bool = False,
             track: Track | None = None, seed: int = 0,
             spawn_distance: float | None = None,
             yaw_error: float = 0.0) -> dict:
    """Run episodes with frozen normalization statistics; spawns are drawn
    per episode from the spawn band (optionally displaced)."""
    params, stats, cfg, base_track = policy_from_checkpoint(ckpt_state)
    track = track or base_track
    root = np.random.SeedSequence(seed)
    spawn_rng, sensor_rng, action_rng = (np.random.default_rng(c)
                                         for c in root.spawn(3))
    env = RacingEnv(track, cfg.dynamics, cfg.reward,
                    opponent_cfg=cfg.opponent, spawn_rng=spawn_rng,
                    sensor_rng=sensor_rng,
                    drone_radius=cfg.harness.drone_radius)
    completions = 0
    gates, times, collisions = [], [], []
    for _ in range(episodes):
        override = None
        if spawn_distance is not None or yaw_error:
            override = _displaced_spawn(track, spawn_rng, spawn_distance,
                                        yaw_error)
        obs_raw = env.reset(spawn_override=override)
        done = False
        while not done:
            action = _policy_action(params, stats, obs_raw, deterministic,
                                    action_rng)
            _, done, info = env.step(action)
            if not done:
                obs_raw = env.observe()
        ep = info["episode"]
        if ep.termination == TERM_ALL_GATES:
            completions += 1
        gates.append(ep.gates_passed)
        times.append(ep.duration)
        collisions.append(ep.collisions)
    return {
        "episodes": episodes,
        "completion_rate": completions / episodes,
        "mean_gates_passed": float(np.mean(gates)),
        "mean_time": float(np.mean(times)),
        "mean_collisions": float(np.mean(collisions)),
    }


def race(ckpt_state: dict, episodes: int, track: Track | None = None,
         seed: int = 0, deterministic: bool = True,
         action_fn=None) -> dict:
    """Agent and opponent step in lockstep from the same spawn; winner is
    the first to pass every gate, ties go to the opponent. Agent
    termination before finishing counts as a DNF."""
    params, stats, cfg, base_track = policy_from_checkpoint(ckpt_state)
    track = track or base_track
    root = np.random.SeedSequence(seed)
    spawn_rng, sensor_rng, action_rng = (np.random.default_rng(c)
                                         for c in root.spawn(3))
    env = RacingEnv(track, cfg.dynamics, cfg.reward,
                    opponent_cfg=cfg.opponent, spawn_rng=spawn_rng,
                    sensor_rng=sensor_rng,
                    drone_radius=cfg.harness.drone_radius)
    agent_wins = opponent_wins = dnfs = 0
    hard_time_cap = 4.0 * resolved_time_limit(cfg.reward, track)
    for _ in range(episodes):
        obs_raw = env.reset()
        opp_target = 0
        outcome = None
        while outcome is None:
            if action_fn is not None:
                action = action_fn(obs_raw, env)
            else:
                action = _policy_action(params, stats, obs_raw, deterministic,
                                        action_rng)
            opp_prev = env.opp.drone.position.copy()
            _, done, info = env.step(action)
            # track the opponent's own gate progress on the same step
            if opp_target < track.n_gates:
                point = segment_gate_crossing(opp_prev, env.opp.drone.position,
                                              track.gates[opp_target])
                if point is not None:
                    opp_target += 1
            agent_finished = done and info["episode"].termination == TERM_ALL_GATES
            opp_finished = opp_target >= track.n_gates
            if opp_finished:
                outcome = "opponent"  # ties break to the opponent
            elif agent_finished:
                outcome = "agent"
            elif done:
                outcome = "dnf"
            elif env.agent.time > hard_time_cap:
                outcome = "dnf"
            else:
                obs_raw = env.observe()
        if outcome == "agent":
            agent_wins += 1
        elif outcome == "opponent":
            opponent_wins += 1
        else:
            dnfs += 1
    return {"episodes": episodes, "agent_wins": agent_wins,
            "opponent_wins": opponent_wins, "agent_dnf": dnfs}
