"""Proximal policy optimization with a two-headed numpy MLP and manual backprop."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

CHECKPOINT_VERSION = 1
PARAM_NAMES = ("W1", "b1", "W2", "b2", "Wp", "bp", "Wv", "bv")


@dataclass(frozen=True)
class PpoConfig:
    hidden_sizes: tuple[int, int] = (45, 30)
    update_frequency: int = 64
    trajectory_capacity: int = 256
    clip_ratio: float = 0.2
    discount: float = 0.99
    gae_lambda: float = 0.95
    learning_rate: float = 3e-4
    epochs_per_update: int = 4
    minibatch_size: int = 32
    entropy_coefficient: float = 0.01
    value_coefficient: float = 0.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.update_frequency > self.trajectory_capacity:
            raise ValueError("update_frequency must not exceed trajectory_capacity")
        if len(self.hidden_sizes) != 2:
            raise ValueError("the trunk has exactly two hidden layers")


def hidden_sizes_for(n_modes: int) -> tuple[int, int]:
    return (150, 90) if n_modes >= 6 else (45, 30)


def _orthogonal(rng, rows, cols, gain):
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    q = q if rows >= cols else q.T
    return gain * q[:rows, :cols]


class PolicyValueNet:
    """tanh trunk with two hidden layers, a softmax policy head and a scalar value head.

    Inputs pass through arcsinh first: heralded-state weights span many decades.
    """

    def __init__(self, n_inputs: int, n_actions: int, hidden=(45, 30), seed: int = 0):
        rng = np.random.default_rng(seed)
        h1, h2 = hidden
        self.n_inputs = n_inputs
        self.n_actions = n_actions
        self.params = {
            "W1": _orthogonal(rng, n_inputs, h1, math.sqrt(2.0)),
            "b1": np.zeros(h1),
            "W2": _orthogonal(rng, h1, h2, math.sqrt(2.0)),
            "b2": np.zeros(h2),
            "Wp": _orthogonal(rng, h2, n_actions, 0.01),
            "bp": np.zeros(n_actions),
            "Wv": _orthogonal(rng, h2, 1, 1.0),
            "bv": np.zeros(1),
        }

    def copy(self) -> "PolicyValueNet":
        other = object.__new__(PolicyValueNet)
        other.n_inputs, other.n_actions = self.n_inputs, self.n_actions
        other.params = {k: v.copy() for k, v in self.params.items()}
        return other

    def n_parameters(self) -> int:
        return sum(v.size for v in self.params.values())

    def _trunk(self, obs):
        p = self.params
        x = np.arcsinh(obs)
        h1 = np.tanh(x @ p["W1"] + p["b1"])
        h2 = np.tanh(h1 @ p["W2"] + p["b2"])
        return x, h1, h2

    def forward_batch(self, obs):
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        if obs.shape[1] != self.n_inputs:
            raise ValueError(f"observation width {obs.shape[1]} != {self.n_inputs}")
        x, h1, h2 = self._trunk(obs)
        logits = h2 @ self.params["Wp"] + self.params["bp"]
        logits = logits - logits.max(axis=1, keepdims=True)
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        values = (h2 @ self.params["Wv"] + self.params["bv"])[:, 0]
        return probs, values, (x, h1, h2)


def forward(net: PolicyValueNet, observation) -> tuple[np.ndarray, float]:
    probs, values, _ = net.forward_batch(observation)
    return probs[0], float(values[0])


def ppo_loss_and_grads(net: PolicyValueNet, obs, actions, old_logp, advantages, returns,
                       config: PpoConfig):
    """Loss = -clipped surrogate + c_v * value MSE - c_e * entropy, averaged over the batch."""
    probs, values, (x, h1, h2) = net.forward_batch(obs)
    n = len(actions)
    idx = np.arange(n)
    logp_all = np.log(np.maximum(probs, 1e-300))
    logp = logp_all[idx, actions]
    ratio = np.exp(logp - old_logp)
    eps = config.clip_ratio
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * advantages
    surrogate = np.minimum(unclipped, clipped)
    entropy = -(probs * logp_all).sum(axis=1)
    value_err = values - returns
    loss = (-surrogate.mean() + config.value_coefficient * np.mean(value_err ** 2)
            - config.entropy_coefficient * entropy.mean())

    # d surrogate / d ratio is A where the unclipped term is the active minimum
    active = unclipped <= clipped
    d_ratio = np.where(active, advantages, 0.0)
    onehot = np.zeros_like(probs)
    onehot[idx, actions] = 1.0
    d_logits = -(d_ratio * ratio)[:, None] * (onehot - probs)
    d_logits -= config.entropy_coefficient * (-probs * (logp_all + entropy[:, None]))
    d_logits /= n
    d_values = (2.0 * config.value_coefficient / n) * value_err

    p = net.params
    grads = {
        "Wp": h2.T @ d_logits,
        "bp": d_logits.sum(axis=0),
        "Wv": h2.T @ d_values[:, None],
        "bv": np.array([d_values.sum()]),
    }
    d_h2 = d_logits @ p["Wp"].T + d_values[:, None] @ p["Wv"].T
    d_z2 = d_h2 * (1.0 - h2 ** 2)
    grads["W2"] = h1.T @ d_z2
    grads["b2"] = d_z2.sum(axis=0)
    d_z1 = (d_z2 @ p["W2"].T) * (1.0 - h1 ** 2)
    grads["W1"] = x.T @ d_z1
    grads["b1"] = d_z1.sum(axis=0)
    info = {"loss": float(loss), "surrogate": float(surrogate.mean()),
            "value_loss": float(np.mean(value_err ** 2)), "entropy": float(entropy.mean())}
    return loss, grads, info


class Adam:
    def __init__(self, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k in PARAM_NAMES:
            g = grads[k]
            m = self.m.setdefault(k, np.zeros_like(g))
            v = self.v.setdefault(k, np.zeros_like(g))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class Trajectory:
    """Ring buffer of transitions in chronological order."""

    FIELDS = ("obs", "action", "logp", "reward", "value", "done")

    def __init__(self, capacity: int, obs_size: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_size))
        self.action = np.zeros(capacity, dtype=np.int64)
        self.logp = np.zeros(capacity)
        self.reward = np.zeros(capacity)
        self.value = np.zeros(capacity)
        self.done = np.zeros(capacity, dtype=bool)
        self.size = 0
        self.head = 0
        self.fresh = 0

    def add(self, obs, action, logp, reward, value, done) -> None:
        i = self.head
        self.obs[i] = obs
        self.action[i] = action
        self.logp[i] = logp
        self.reward[i] = reward
        self.value[i] = value
        self.done[i] = done
        self.head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        self.fresh += 1

    def ordered(self) -> dict[str, np.ndarray]:
        start = (self.head - self.size) % self.capacity
        idx = (start + np.arange(self.size)) % self.capacity
        return {f: getattr(self, f)[idx] for f in self.FIELDS}


def gae(rewards, values, dones, discount, lam):
    """Advantages and returns for complete episodes (the last entry must be terminal)."""
    adv = np.zeros(len(rewards))
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        if dones[t]:
            next_value, running = 0.0, 0.0
        else:
            next_value = values[t + 1]
        delta = rewards[t] + discount * next_value - values[t]
        running = delta + discount * lam * running
        adv[t] = running
    return adv, adv + values


class PpoAgent:
    def __init__(self, n_inputs: int, n_actions: int, config: PpoConfig | None = None):
        self.config = config or PpoConfig()
        self.net = PolicyValueNet(n_inputs, n_actions, self.config.hidden_sizes, self.config.seed)
        self.optimizer = Adam(self.config.learning_rate)
        self.buffer = Trajectory(self.config.trajectory_capacity, n_inputs)
        self.rng = np.random.default_rng(np.random.SeedSequence(self.config.seed, spawn_key=(1,)))
        self.updates = 0

    def act(self, obs) -> tuple[int, float, float]:
        probs, value = forward(self.net, obs)
        a = int(np.searchsorted(np.cumsum(probs), self.rng.random() * probs.sum(), side="right"))
        a = min(a, len(probs) - 1)
        return a, float(math.log(max(probs[a], 1e-300))), value

    def observe(self, obs, action, logp, reward, value, done) -> dict | None:
        self.buffer.add(obs, action, logp, reward, value, done)
        if self.buffer.fresh >= self.config.update_frequency:
            return self.update()
        return None

    def update(self) -> dict | None:
        info = ppo_update(self.net, self.buffer, self.config, self.optimizer, self.rng)
        if info is not None:
            self.updates += 1
        return info


def ppo_update(net: PolicyValueNet, trajectory: Trajectory, config: PpoConfig,
               optimizer: Adam, rng: np.random.Generator) -> dict | None:
    """GAE over the completed episodes in the buffer, then clipped-surrogate epochs.

    Returns None (and keeps the fresh count) while no episode in the buffer is complete.
    """
    if trajectory.size == 0:
        raise ValueError("empty trajectory")
    data = trajectory.ordered()
    ends = np.flatnonzero(data["done"])
    if len(ends) == 0:
        return None
    n = ends[-1] + 1
    adv, returns = gae(data["reward"][:n], data["value"][:n], data["done"][:n],
                       config.discount, config.gae_lambda)
    std = adv.std()
    adv = (adv - adv.mean()) / std if std > 1e-12 else adv - adv.mean()
    obs, actions, old_logp = data["obs"][:n], data["action"][:n], data["logp"][:n]
    diags = []
    for _ in range(config.epochs_per_update):
        perm = rng.permutation(n)
        for lo in range(0, n, config.minibatch_size):
            mb = perm[lo:lo + config.minibatch_size]
            _, grads, info = ppo_loss_and_grads(net, obs[mb], actions[mb], old_logp[mb],
                                                adv[mb], returns[mb], config)
            optimizer.step(net.params, grads)
            diags.append(info)
    trajectory.fresh = 0
    return {"surrogate": float(np.mean([d["surrogate"] for d in diags])),
            "value_loss": float(np.mean([d["value_loss"] for d in diags])),
            "batch": int(n)}


@dataclass
class TrainResult:
    best: object | None
    trace: list[float] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)


def train(env, config: PpoConfig | None = None, episodes: int = 100,
          agent: PpoAgent | None = None) -> TrainResult:
    """Run ``episodes`` episodes; the trace holds each episode's final CHSH."""
    if agent is None:
        agent = PpoAgent(env.observation_size, env.n_actions, config)
    result = TrainResult(None)
    for _ in range(episodes):
        obs = env.reset()
        done = False
        total = 0.0
        while not done:
            a, logp, value = agent.act(obs)
            next_obs, reward, done = env.step(a)
            agent.observe(obs, a, logp, reward, value, done)
            total += reward
            obs = next_obs
        rec = env.last_record
        result.trace.append(rec.chsh)
        result.rewards.append(total)
        if result.best is None or rec.chsh > result.best.chsh:
            result.best = rec
    return result


def save_checkpoint(path, agent: PpoAgent) -> None:
    arrays = {f"net_{k}": v for k, v in agent.net.params.items()}
    arrays.update({f"adam_m_{k}": v for k, v in agent.optimizer.m.items()})
    arrays.update({f"adam_v_{k}": v for k, v in agent.optimizer.v.items()})
    buf = agent.buffer
    arrays.update({f"buf_{f}": getattr(buf, f) for f in Trajectory.FIELDS})
    meta = {
        "version": CHECKPOINT_VERSION,
        "config": asdict(agent.config),
        "n_inputs": agent.net.n_inputs,
        "n_actions": agent.net.n_actions,
        "adam_t": agent.optimizer.t,
        "buffer": [buf.size, buf.head, buf.fresh],
        "updates": agent.updates,
        "rng": agent.rng.bit_generator.state,
    }
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta)), **arrays)


def load_checkpoint(path) -> PpoAgent:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        config = PpoConfig(**meta["config"])
        agent = PpoAgent(meta["n_inputs"], meta["n_actions"], config)
        for k in PARAM_NAMES:
            agent.net.params[k] = data[f"net_{k}"].copy()
            if f"adam_m_{k}" in data:
                agent.optimizer.m[k] = data[f"adam_m_{k}"].copy()
                agent.optimizer.v[k] = data[f"adam_v_{k}"].copy()
        agent.optimizer.t = meta["adam_t"]
        for f in Trajectory.FIELDS:
            getattr(agent.buffer, f)[...] = data[f"buf_{f}"]
        agent.buffer.size, agent.buffer.head, agent.buffer.fresh = meta["buffer"]
        agent.updates = meta["updates"]
        agent.rng.bit_generator.state = meta["rng"]
    return agent
