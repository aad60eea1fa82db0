"""Simplified quadrotor plant: velocity-delta commands through a
first-order lag, plus synthetic IMU / GPS readouts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels


@dataclass
class DroneState:
    position: np.ndarray
    velocity: np.ndarray
    attitude: np.ndarray  # roll, pitch, yaw
    angular_velocity: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.velocity = np.asarray(self.velocity, dtype=np.float64)
        self.attitude = np.asarray(self.attitude, dtype=np.float64)
        self.angular_velocity = np.asarray(self.angular_velocity, dtype=np.float64)

    @property
    def yaw(self) -> float:
        return float(self.attitude[2])

    def copy(self) -> "DroneState":
        return DroneState(
            position=self.position.copy(),
            velocity=self.velocity.copy(),
            attitude=self.attitude.copy(),
            angular_velocity=self.angular_velocity.copy(),
            time=self.time,
        )


@dataclass
class DynamicsConfig:
    tau: float = 0.3
    command_scale: float = 2.0
    v_max: float = 15.0
    yaw_rate_max: float = float(np.pi)
    dt: float = 0.05
    # 3 linear-velocity stds, 3 angular-velocity stds, 1 shared attitude std
    imu_noise_std: tuple = (0.0,) * 7
    gps_noise_std: float = 0.0


@dataclass
class ImuReading:
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray
    attitude: np.ndarray


def step(state: DroneState, cmd, dt: float, cfg: DynamicsConfig) -> DroneState:
    """Advance one control step.

    The commanded velocity delta (clipped to [-1, 1] per axis, scaled by
    command_scale) defines a target velocity; the velocity relaxes toward
    it with lag time constant tau, position integrates the trapezoid, yaw
    slews toward the velocity heading, roll/pitch are a banked-turn proxy.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    dv = np.asarray(cmd, dtype=np.float64)
    pos, vel, att, angvel = kernels.dyn_step(
        state.position, state.velocity, state.attitude, dv, dt,
        cfg.tau, cfg.command_scale, cfg.v_max, cfg.yaw_rate_max)
    return DroneState(
        position=pos,
        velocity=vel,
        attitude=att,
        angular_velocity=angvel,
        time=state.time + dt,
    )


def read_imu(state: DroneState, noise_std, rng: np.random.Generator) -> ImuReading:
    """True IMU values plus independent zero-mean Gaussian noise; the 7
    channels are 3x linear velocity, 3x angular velocity, 1x attitude."""
    noise_std = np.asarray(noise_std, dtype=np.float64)
    if np.any(noise_std < 0):
        raise ValueError("noise_std must be non-negative")
    lin = state.velocity.copy()
    ang = state.angular_velocity.copy()
    att = state.attitude.copy()
    if np.any(noise_std > 0):
        eps = rng.standard_normal(9)
        lin = lin + noise_std[0:3] * eps[0:3]
        ang = ang + noise_std[3:6] * eps[3:6]
        att = att + noise_std[6] * eps[6:9]
    return ImuReading(linear_velocity=lin, angular_velocity=ang, attitude=att)


def read_gps(state: DroneState, noise_std: float, rng: np.random.Generator) -> np.ndarray:
    """Position plus isotropic Gaussian noise; exact when noise_std = 0."""
    if noise_std < 0:
        raise ValueError("noise_std must be non-negative")
    pos = state.position.copy()
    if noise_std > 0:
        pos = pos + noise_std * rng.standard_normal(3)
    return pos
