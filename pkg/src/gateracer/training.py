"""Training driver: rollout collection, PPO updates, metrics, and
checkpoint/resume with bit-exact continuation."""

from __future__ import annotations

import os

import numpy as np

from . import checkpoint as ckpt
from .config import (RunConfig, resolve_track, run_config_from_dict,
                     run_config_to_dict)
from .dynamics import DroneState
from .env import OBS_DIM, RacingEnv
from .geometry import Track, track_from_dict, track_to_dict
from .metrics import MetricsLogger, MetricsRecord
from .networks import Adam, PolicyParams, forward, init_policy, sample_action
from .normalization import RewardScaler, RunningStats, normalize_observation
from .opponent import FollowerState
from .ppo import RolloutBuffer, compute_gae, ppo_update
from .rewards import TERM_TIME_LIMIT, EpisodeStatus

STREAM_NAMES = ("track", "spawn", "policy", "sensors", "update")


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    """Master seed fanned out into named independent streams."""
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(STREAM_NAMES))
    return {name: np.random.default_rng(child)
            for name, child in zip(STREAM_NAMES, children)}


def _drone_to_dict(d: DroneState) -> dict:
    return {"position": list(d.position), "velocity": list(d.velocity),
            "attitude": list(d.attitude),
            "angular_velocity": list(d.angular_velocity), "time": d.time}


def _drone_from_dict(d: dict) -> DroneState:
    return DroneState(position=np.array(d["position"]),
                      velocity=np.array(d["velocity"]),
                      attitude=np.array(d["attitude"]),
                      angular_velocity=np.array(d["angular_velocity"]),
                      time=float(d["time"]))


def _status_to_dict(s: EpisodeStatus) -> dict:
    return {"target_gate": s.target_gate, "gate_deadline": s.gate_deadline,
            "collisions": s.collisions, "gates_passed": s.gates_passed,
            "done": s.done, "episode_return": s.episode_return}


def _status_from_dict(d: dict) -> EpisodeStatus:
    return EpisodeStatus(target_gate=int(d["target_gate"]),
                         gate_deadline=float(d["gate_deadline"]),
                         collisions=int(d["collisions"]),
                         gates_passed=int(d["gates_passed"]),
                         done=d["done"],
                         episode_return=float(d["episode_return"]))


class Trainer:
    def __init__(self, run_cfg: RunConfig | None, seed: int, out_dir,
                 telemetry=None, resume: str | None = None):
        self.out_dir = str(out_dir)
        os.makedirs(self.out_dir, exist_ok=True)
        if not os.access(self.out_dir, os.W_OK):
            raise OSError(f"output directory not writable: {self.out_dir}")

        state = None
        if resume is not None:
            state = ckpt.load_checkpoint(resume)
            if run_cfg is None:
                run_cfg = run_config_from_dict(state["config"])
        self.cfg = run_cfg
        self.seed = seed
        self.rngs = make_streams(seed)
        self.params = init_policy(self.rngs["policy"], OBS_DIM)
        self.adam = Adam([p.shape for p in self.params.flat_list()])
        self.obs_stats = RunningStats(OBS_DIM)
        self.reward_scaler = RewardScaler(run_cfg.train.gamma)
        self.global_step = 0
        self.episode_count = 0
        self.update_count = 0
        self._last_update_stats: dict | None = None

        self._tl_bootstrap = os.environ.get("GATERACER_TL_BOOTSTRAP", "0") != "0"
        self.base_track = resolve_track(run_cfg)
        self.env = self._make_env(self.base_track)
        self.metrics = MetricsLogger(os.path.join(self.out_dir, "metrics.jsonl"),
                                     telemetry=telemetry)

        if state is not None:
            self._restore(state)
        else:
            obs_raw = self.env.reset()
            self._pending_obs = normalize_observation(self.obs_stats, obs_raw)

    def _make_env(self, track: Track) -> RacingEnv:
        return RacingEnv(track, self.cfg.dynamics, self.cfg.reward,
                         opponent_cfg=self.cfg.opponent,
                         spawn_rng=self.rngs["spawn"],
                         sensor_rng=self.rngs["sensors"],
                         drone_radius=self.cfg.harness.drone_radius)

    def _episode_reset(self) -> np.ndarray:
        if self.cfg.track.randomize_per_episode:
            self.env = self._make_env(resolve_track(self.cfg, self.rngs["track"]))
        return self.env.reset()

    # ------------------------------------------------------------------
    def collect_rollout(self) -> tuple[RolloutBuffer, list]:
        cfg = self.cfg.train
        buf = RolloutBuffer(cfg.rollout_steps, OBS_DIM)
        infos = []
        obs_n = self._pending_obs
        for _ in range(cfg.rollout_steps):
            mean, log_std, value = forward(self.params, obs_n)
            raw, clipped, logp = sample_action(mean, log_std,
                                               self.rngs["policy"])
            reward_raw, done, info = self.env.step(clipped)
            if not np.isfinite(reward_raw):
                raise RuntimeError(f"non-finite reward at step {self.global_step}")
            scaled = self.reward_scaler.scale(reward_raw, done)
            if (done and self._tl_bootstrap
                    and info["episode"].termination == TERM_TIME_LIMIT):
                # the clock, not the race, ended the episode: bootstrap the
                # cut-off return with the critic so loitering near the
                # horizon is not mistaken for a zero-value terminal state
                scaled += cfg.gamma * self._frozen_value(self.env.observe_final())
            buf.add(obs_n, raw, logp, scaled, reward_raw, value, done)
            self.global_step += 1
            if done:
                self.episode_count += 1
                infos.append(info["episode"])
                self._emit_episode(info["episode"])
                obs_raw = self._episode_reset()
            else:
                obs_raw = self.env.observe()
            if not np.all(np.isfinite(obs_raw)):
                raise RuntimeError(f"non-finite observation at step {self.global_step}")
            obs_n = normalize_observation(self.obs_stats, obs_raw)
        self._pending_obs = obs_n
        return buf, infos

    def _frozen_value(self, obs_raw: np.ndarray) -> float:
        """Critic value of a raw observation without touching the running
        normalization moments."""
        was_frozen = self.obs_stats.frozen
        self.obs_stats.frozen = True
        try:
            obs_n = normalize_observation(self.obs_stats, obs_raw)
        finally:
            self.obs_stats.frozen = was_frozen
        _, _, value = forward(self.params, obs_n)
        return value

    def _bootstrap_value(self, buf: RolloutBuffer) -> float:
        if buf.dones[-1]:
            return 0.0
        _, _, value = forward(self.params, self._pending_obs)
        return value

    def _emit_episode(self, ep) -> None:
        stats = self._last_update_stats or {}
        self.metrics.write(MetricsRecord(
            event="episode",
            global_step=self.global_step,
            episode=self.episode_count,
            episodic_return=ep.episode_return,
            gates_passed=ep.gates_passed,
            collisions=ep.collisions,
            duration=ep.duration,
            policy_loss=stats.get("policy_loss"),
            value_loss=stats.get("value_loss"),
            approx_kl=stats.get("approx_kl"),
            clip_fraction=stats.get("clip_fraction"),
        ))

    def _emit_update(self, stats: dict) -> None:
        self.metrics.write(MetricsRecord(
            event="update",
            global_step=self.global_step,
            episode=self.episode_count,
            episodic_return=None,
            gates_passed=None,
            collisions=None,
            duration=None,
            policy_loss=stats["policy_loss"],
            value_loss=stats["value_loss"],
            approx_kl=stats["approx_kl"],
            clip_fraction=stats["clip_fraction"],
        ))

    # ------------------------------------------------------------------
    def train(self) -> str:
        """Alternate rollout / GAE / update until the step budget; returns
        the final checkpoint path."""
        cfg = self.cfg.train
        total_updates = max(1, cfg.total_steps // cfg.rollout_steps)
        while self.global_step < cfg.total_steps:
            buf, _ = self.collect_rollout()
            compute_gae(buf, self._bootstrap_value(buf), cfg.gamma,
                        cfg.gae_lambda)
            lr = cfg.learning_rate
            if cfg.lr_decay:
                frac = 1.0 - self.update_count / total_updates
                lr = cfg.learning_rate * max(frac, 0.0)
            _, stats = ppo_update(self.params, buf, cfg, self.rngs["update"],
                                  adam=self.adam, lr=lr)
            self.update_count += 1
            self._last_update_stats = stats
            self._emit_update(stats)
            if self.update_count % self.cfg.harness.checkpoint_interval == 0:
                self.save(os.path.join(self.out_dir, "checkpoint.bin"))
        path = os.path.join(self.out_dir, "checkpoint.bin")
        self.save(path)
        self.metrics.close()
        return path

    # ------------------------------------------------------------------
    def _state_dict(self) -> dict:
        arrays = {f"param{i:02d}": p
                  for i, p in enumerate(self.params.flat_list())}
        arrays.update({f"adam_m{i:02d}": m for i, m in enumerate(self.adam.m)})
        arrays.update({f"adam_v{i:02d}": v for i, v in enumerate(self.adam.v)})
        arrays["obs_mean"] = self.obs_stats.mean
        arrays["obs_m2"] = self.obs_stats.m2
        arrays["pending_obs"] = self._pending_obs
        env = self.env
        env_state = {
            "agent": _drone_to_dict(env.agent),
            "opponent": _drone_to_dict(env.opp.drone),
            "opponent_waypoint": env.opp.waypoint_index,
            "status": _status_to_dict(env.status),
            "opponent_times": list(env.opponent_times),
            "episode_steps": env.episode_steps,
            "episode_raw_return": env.episode_raw_return,
            "track": track_to_dict(env.track),
        }
        return {
            "counters": {"global_step": self.global_step,
                         "episode_count": self.episode_count,
                         "update_count": self.update_count,
                         "seed": self.seed,
                         "last_update_stats": self._last_update_stats},
            "config": run_config_to_dict(self.cfg),
            "track": track_to_dict(self.base_track),
            "arrays": arrays,
            "scalars": {"adam_t": self.adam.t,
                        "obs_count": self.obs_stats.count,
                        "reward_scaler": self.reward_scaler.state_dict()},
            "rng": {name: gen.bit_generator.state
                    for name, gen in self.rngs.items()},
            "env": env_state,
        }

    def save(self, path) -> str:
        ckpt.save_checkpoint(path, self._state_dict())
        return path

    def _restore(self, state: dict) -> None:
        arrays = state["arrays"]
        flat = self.params.flat_list()
        for i, p in enumerate(flat):
            p[...] = arrays[f"param{i:02d}"]
        self.adam.load_state_dict({
            "t": state["scalars"]["adam_t"],
            "m": [arrays[f"adam_m{i:02d}"] for i in range(len(flat))],
            "v": [arrays[f"adam_v{i:02d}"] for i in range(len(flat))],
        })
        self.obs_stats.load_state_dict({
            "count": state["scalars"]["obs_count"],
            "mean": arrays["obs_mean"], "m2": arrays["obs_m2"],
            "frozen": False,
        })
        self.reward_scaler.load_state_dict(state["scalars"]["reward_scaler"])
        for name, gen in self.rngs.items():
            gen.bit_generator.state = state["rng"][name]
        c = state["counters"]
        self.global_step = int(c["global_step"])
        self.episode_count = int(c["episode_count"])
        self.update_count = int(c["update_count"])
        self._last_update_stats = c.get("last_update_stats")

        env_state = state["env"]
        track = track_from_dict(env_state["track"])
        self.env = self._make_env(track)
        self.env.agent = _drone_from_dict(env_state["agent"])
        self.env.opp = FollowerState(
            drone=_drone_from_dict(env_state["opponent"]),
            waypoint_index=int(env_state["opponent_waypoint"]))
        self.env.status = _status_from_dict(env_state["status"])
        self.env.opponent_times = np.array(env_state["opponent_times"])
        self.env.episode_steps = int(env_state["episode_steps"])
        self.env.episode_raw_return = float(env_state["episode_raw_return"])
        self._pending_obs = arrays["pending_obs"]
