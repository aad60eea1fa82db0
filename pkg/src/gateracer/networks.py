"""From-scratch actor/critic MLPs (3 hidden tanh layers), the diagonal
Gaussian action head, and an adaptive-moment optimizer. All float64."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

HIDDEN_SIZE = 256
ACTION_DIM = 3
LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
LOG2PI = math.log(2.0 * math.pi)


def _orthogonal(rng: np.random.Generator, shape, gain: float) -> np.ndarray:
    a = rng.standard_normal(shape)
    q, r = np.linalg.qr(a if shape[0] >= shape[1] else a.T)
    q = q * np.sign(np.diag(r))
    if shape[0] < shape[1]:
        q = q.T
    return gain * q[: shape[0], : shape[1]]


def init_mlp(rng: np.random.Generator, in_dim: int, hidden: int,
             out_dim: int, final_gain: float) -> list[np.ndarray]:
    """Weights/biases [W1, b1, ..., W4, b4]; orthogonal init, sqrt(2) gain
    on hidden layers, final_gain on the output layer."""
    sizes = [in_dim, hidden, hidden, hidden, out_dim]
    params = []
    for i in range(4):
        gain = final_gain if i == 3 else math.sqrt(2.0)
        params.append(_orthogonal(rng, (sizes[i], sizes[i + 1]), gain))
        params.append(np.zeros(sizes[i + 1]))
    return params


@dataclass
class PolicyParams:
    actor: list[np.ndarray]
    log_std: np.ndarray
    critic: list[np.ndarray]

    @property
    def obs_dim(self) -> int:
        return self.actor[0].shape[0]

    def flat_list(self) -> list[np.ndarray]:
        """Canonical parameter ordering used by the optimizer and the
        checkpoint format."""
        return list(self.actor) + [self.log_std] + list(self.critic)

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            actor=[a.copy() for a in self.actor],
            log_std=self.log_std.copy(),
            critic=[c.copy() for c in self.critic],
        )


def init_policy(rng: np.random.Generator, obs_dim: int,
                hidden: int = HIDDEN_SIZE,
                action_dim: int = ACTION_DIM) -> PolicyParams:
    actor = init_mlp(rng, obs_dim, hidden, action_dim, final_gain=0.01)
    critic = init_mlp(rng, obs_dim, hidden, 1, final_gain=1.0)
    return PolicyParams(actor=actor, log_std=np.zeros(action_dim), critic=critic)


def forward(params: PolicyParams, obs: np.ndarray):
    """(mean, log_std, value) for a single observation."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape != (params.obs_dim,):
        raise ValueError(f"expected obs shape ({params.obs_dim},), got {obs.shape}")
    mean = kernels.mlp3_forward_1d(obs, *params.actor)
    value = kernels.mlp3_forward_1d(obs, *params.critic)
    return mean, params.log_std.copy(), float(value[0])


def forward_batch(net: list[np.ndarray], obs: np.ndarray):
    """Batched MLP forward; returns (h1, h2, h3, out)."""
    return kernels.mlp3_forward(np.ascontiguousarray(obs), *net)


def backward_batch(net: list[np.ndarray], obs, h1, h2, h3, dout):
    """Parameter gradients matching the init_mlp layout."""
    grads = kernels.mlp3_backward(np.ascontiguousarray(obs), h1, h2, h3,
                                  np.ascontiguousarray(dout),
                                  net[2], net[4], net[6])
    return list(grads)


def gaussian_log_prob(action, mean, log_std) -> np.ndarray:
    """Diagonal-Gaussian log density; summed over the action axis."""
    z = (action - mean) * np.exp(-log_std)
    return -0.5 * np.sum(z * z + 2.0 * log_std + LOG2PI, axis=-1)


def gaussian_entropy(log_std) -> float:
    return float(np.sum(log_std + 0.5 * (1.0 + LOG2PI)))


def sample_action(mean, log_std, rng: np.random.Generator):
    """(raw_action, clipped_action, log_prob). The log-prob is of the raw
    action; the environment receives the clipped one."""
    std = np.exp(log_std)
    raw = mean + std * rng.standard_normal(mean.shape[-1])
    logp = float(gaussian_log_prob(raw, mean, log_std))
    return raw, np.clip(raw, -1.0, 1.0), logp


class Adam:
    """First/second-moment adaptive steps with bias correction."""

    def __init__(self, shapes, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray],
             lr: float) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)

    def state_dict(self) -> dict:
        return {"t": self.t, "m": [a.copy() for a in self.m],
                "v": [a.copy() for a in self.v]}

    def load_state_dict(self, d: dict) -> None:
        self.t = int(d["t"])
        self.m = [np.asarray(a, dtype=np.float64).copy() for a in d["m"]]
        self.v = [np.asarray(a, dtype=np.float64).copy() for a in d["v"]]


def clip_grads_global(grads: list[np.ndarray], max_norm: float) -> float:
    """In-place global-norm clipping; returns the pre-clip norm."""
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if total > max_norm and total > 0:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total
