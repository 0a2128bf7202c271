"""Training agents: tabular Q-learning, REINFORCE, and a random baseline.

Each trainer takes a (possibly wrapped) training env and a separate clean
eval env, splits its seed into env/eval/agent streams, and returns a
RunRecord whose curve holds periodic deterministic evaluations. Eval returns
are undiscounted; the agent's own gamma only shapes learning.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .core import Continuous, Discrete, InvalidConfigError
from .records import EvalPoint, RunRecord
from .wrappers import perturbation_totals

__all__ = [
    "IncompatibleSpaceError",
    "UnknownAgentError",
    "TabularQConfig",
    "LinearGaussianPolicyConfig",
    "RandomPolicyConfig",
    "LinearGaussianPolicy",
    "q_update",
    "discretize",
    "q_learning_train",
    "reinforce_train",
    "random_agent_train",
    "AGENTS",
    "train_agent",
]


class IncompatibleSpaceError(TypeError):
    """The agent cannot act in this environment's action space."""


class UnknownAgentError(LookupError):
    """Requested agent name is not registered."""


def _split_seed(seed: int):
    """Derive independent env/eval/agent/aux seeds from one run seed."""
    streams = np.random.SeedSequence(int(seed)).generate_state(4, dtype=np.uint64)
    return tuple(int(s) for s in streams)


class _Evaluator:
    """Rolls deterministic eval episodes and reports mean/std of returns.

    The eval env is seeded once, on the first episode of the first call, and
    its stream runs on from there; returns are undiscounted sums, std is the
    population std (ddof=0) across episodes.
    """

    def __init__(self, env, episodes: int, seed: int):
        self.env = env
        self.episodes = episodes
        self._seed = seed

    def run(self, policy_fn) -> tuple[float, float]:
        returns = []
        for _ in range(self.episodes):
            obs = self.env.reset(seed=self._seed)
            self._seed = None
            total = 0.0
            while True:
                result = self.env.step(policy_fn(obs))
                total += result.reward
                obs = result.observation
                if result.terminated or result.truncated:
                    break
            returns.append(total)
        return float(np.mean(returns)), float(np.std(returns))


def _finish_record(seed, curve, train_env, eval_env) -> RunRecord:
    return RunRecord(
        fingerprint="",
        seed=int(seed),
        curve=curve,
        final_return=curve[-1].mean_return,
        train_perturbations=perturbation_totals(train_env),
        eval_perturbations=perturbation_totals(eval_env),
    )


def _eval_due(episode: int, total: int, interval: int) -> bool:
    return episode % interval == 0 or episode == total


# ---------------------------------------------------------------------------
# Tabular Q-learning


@dataclass
class TabularQConfig:
    episodes: int = 500
    alpha: float = 0.5
    gamma: float = 0.99
    epsilon_start: float = 1.0
    epsilon_final: float = 0.05
    epsilon_decay_fraction: float = 0.5
    resolution: float = 1.0

    def __post_init__(self):
        if self.episodes < 1:
            raise InvalidConfigError("episodes must be >= 1")
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidConfigError("alpha must be in (0, 1]")
        if not 0.0 < self.gamma <= 1.0:
            raise InvalidConfigError("gamma must be in (0, 1]")
        if not 0.0 <= self.epsilon_final <= self.epsilon_start <= 1.0:
            raise InvalidConfigError("need 0 <= epsilon_final <= epsilon_start <= 1")
        if not 0.0 <= self.epsilon_decay_fraction <= 1.0:
            raise InvalidConfigError("epsilon_decay_fraction must be in [0, 1]")
        if self.resolution <= 0:
            raise InvalidConfigError("resolution must be positive")


def discretize(obs, resolution: float) -> tuple:
    """Round each observation dimension to a grid key of the given resolution."""
    return tuple(int(round(float(v) / resolution)) for v in obs)


def q_update(value: float, reward: float, best_next: float, ended: bool,
             alpha: float, gamma: float) -> float:
    """One Q-learning backup. ``ended`` means the next state is terminal, so
    nothing is bootstrapped; a truncated episode still bootstraps."""
    target = reward if ended else reward + gamma * best_next
    return value + alpha * (target - value)


def _epsilon_at(config: TabularQConfig, episode: int) -> float:
    """Exploration rate before episode ``episode`` (0-based): linear decay from
    epsilon_start to epsilon_final over the first decay fraction of training."""
    cutoff = config.episodes * config.epsilon_decay_fraction
    if cutoff <= 0 or episode >= cutoff:
        return config.epsilon_final
    frac = episode / cutoff
    return config.epsilon_start + frac * (config.epsilon_final - config.epsilon_start)


def q_learning_train(env, config: TabularQConfig, eval_env, *, eval_interval: int = 100,
                     eval_episodes: int = 10, seed: int = 0) -> RunRecord:
    """Train epsilon-greedy tabular Q-learning; eval greedily on eval_env."""
    if not isinstance(env.action_space, Discrete):
        raise IncompatibleSpaceError("tabular Q-learning needs a discrete action space")
    env_seed, eval_seed, agent_seed, _ = _split_seed(seed)
    agent_rng = np.random.default_rng(agent_seed)
    n_actions = env.action_space.n
    q = defaultdict(lambda: np.zeros(n_actions))
    evaluator = _Evaluator(eval_env, eval_episodes, eval_seed)

    def greedy(obs):
        return int(np.argmax(q[discretize(obs, config.resolution)]))

    curve = []
    for episode in range(config.episodes):
        epsilon = _epsilon_at(config, episode)
        obs = env.reset(seed=env_seed) if episode == 0 else env.reset()
        state = discretize(obs, config.resolution)
        while True:
            if agent_rng.random() < epsilon:
                action = env.action_space.sample(agent_rng)
            else:
                action = int(np.argmax(q[state]))
            result = env.step(action)
            nxt = discretize(result.observation, config.resolution)
            q[state][action] = q_update(
                q[state][action], result.reward, float(np.max(q[nxt])),
                result.terminated, config.alpha, config.gamma,
            )
            state = nxt
            if result.terminated or result.truncated:
                break
        if _eval_due(episode + 1, config.episodes, eval_interval):
            mean, std = evaluator.run(greedy)
            curve.append(EvalPoint(episode + 1, mean, std))
    return _finish_record(seed, curve, env, eval_env)


# ---------------------------------------------------------------------------
# REINFORCE with a linear Gaussian policy


@dataclass
class LinearGaussianPolicyConfig:
    episodes: int = 2000
    learning_rate: float = 0.005
    gamma: float = 0.99
    init_log_std: float = math.log(0.5)

    LOG_STD_MIN = math.log(0.1)
    LOG_STD_MAX = 2.0
    ADVANTAGE_CLIP = 3.0

    def __post_init__(self):
        if self.episodes < 1:
            raise InvalidConfigError("episodes must be >= 1")
        if self.learning_rate < 0:
            raise InvalidConfigError("learning_rate must be >= 0")
        if not 0.0 < self.gamma <= 1.0:
            raise InvalidConfigError("gamma must be in (0, 1]")


class LinearGaussianPolicy:
    """Gaussian policy with a linear mean: a ~ N(W @ obs + b, diag(exp(log_std)^2)).

    Holds its parameters as plain arrays and knows the analytic gradients of
    its own log-density, which is all REINFORCE needs.
    """

    def __init__(self, obs_dims: int, act_dims: int, init_log_std: float = math.log(0.5)):
        self.W = np.zeros((act_dims, obs_dims))
        self.b = np.zeros(act_dims)
        self.log_std = np.full(act_dims, float(init_log_std))

    def mean(self, obs: np.ndarray) -> np.ndarray:
        return self.W @ obs + self.b

    def sample(self, obs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.mean(obs) + np.exp(self.log_std) * rng.standard_normal(self.b.size)

    def log_prob(self, obs: np.ndarray, action: np.ndarray) -> float:
        z = (action - self.mean(obs)) / np.exp(self.log_std)
        return float(
            -0.5 * np.dot(z, z) - np.sum(self.log_std) - 0.5 * self.b.size * math.log(2 * math.pi)
        )

    def log_prob_grads(self, obs: np.ndarray, action: np.ndarray):
        """Gradients of log_prob with respect to (W, b, log_std)."""
        std = np.exp(self.log_std)
        z = (action - self.mean(obs)) / std
        d_b = z / std
        d_W = np.outer(d_b, obs)
        d_log_std = z * z - 1.0
        return d_W, d_b, d_log_std


def reinforce_train(env, config: LinearGaussianPolicyConfig, eval_env, *,
                    eval_interval: int = 100, eval_episodes: int = 10,
                    seed: int = 0) -> RunRecord:
    """Whole-episode REINFORCE with a normalized return baseline.

    The advantage is the episode's discounted return minus a running mean,
    divided by a running std of returns, which keeps the update size
    independent of the reward scale (wrappers are free to rescale rewards
    arbitrarily); the learning rate decays linearly to zero so the policy
    settles. Actions are sampled from the Gaussian and clipped into the
    action space after sampling; the log-density gradient is taken at the
    unclipped sample. Deterministic evaluation plays the clipped mean action.
    """
    if not isinstance(env.action_space, Continuous):
        raise IncompatibleSpaceError("REINFORCE here needs a continuous action space")
    env_seed, eval_seed, agent_seed, _ = _split_seed(seed)
    agent_rng = np.random.default_rng(agent_seed)
    policy = LinearGaussianPolicy(
        env.observation_space.dims, env.action_space.dims, config.init_log_std
    )
    evaluator = _Evaluator(eval_env, eval_episodes, eval_seed)

    def play_mean(obs):
        return env.action_space.clip(policy.mean(obs))

    baseline = 0.0
    return_m2 = 0.0
    episodes_seen = 0
    curve = []
    for episode in range(config.episodes):
        obs = env.reset(seed=env_seed) if episode == 0 else env.reset()
        grad_W = np.zeros_like(policy.W)
        grad_b = np.zeros_like(policy.b)
        grad_s = np.zeros_like(policy.log_std)
        ep_return = 0.0
        discount = 1.0
        while True:
            raw = policy.sample(obs, agent_rng)
            result = env.step(env.action_space.clip(raw))
            d_W, d_b, d_s = policy.log_prob_grads(obs, raw)
            grad_W += d_W
            grad_b += d_b
            grad_s += d_s
            ep_return += discount * result.reward
            discount *= config.gamma
            obs = result.observation
            if result.terminated or result.truncated:
                break
        # Advantage against running stats of past returns, winsorized so one
        # outlier episode cannot blow up the parameters; the first episode
        # only seeds the stats (no spread to normalize by yet).
        return_std = math.sqrt(return_m2 / episodes_seen) if episodes_seen else 0.0
        advantage = (ep_return - baseline) / return_std if return_std > 0 else 0.0
        advantage = max(-config.ADVANTAGE_CLIP, min(config.ADVANTAGE_CLIP, advantage))
        lr = config.learning_rate * (1.0 - episode / config.episodes)
        step = lr * advantage
        policy.W += step * grad_W
        policy.b += step * grad_b
        policy.log_std += step * grad_s
        np.clip(policy.log_std, config.LOG_STD_MIN, config.LOG_STD_MAX,
                out=policy.log_std)
        episodes_seen += 1
        delta = ep_return - baseline
        baseline += delta / episodes_seen
        return_m2 += delta * (ep_return - baseline)
        if _eval_due(episode + 1, config.episodes, eval_interval):
            mean, std = evaluator.run(play_mean)
            curve.append(EvalPoint(episode + 1, mean, std))
    return _finish_record(seed, curve, env, eval_env)


# ---------------------------------------------------------------------------
# Random baseline


@dataclass
class RandomPolicyConfig:
    episodes: int = 100

    def __post_init__(self):
        if self.episodes < 1:
            raise InvalidConfigError("episodes must be >= 1")


def random_agent_train(env, config: RandomPolicyConfig, eval_env, *,
                       eval_interval: int = 100, eval_episodes: int = 10,
                       seed: int = 0) -> RunRecord:
    """Uniform-random actions in both phases; learns nothing, anchors tables."""
    env_seed, eval_seed, agent_seed, aux_seed = _split_seed(seed)
    agent_rng = np.random.default_rng(agent_seed)
    eval_rng = np.random.default_rng(aux_seed)
    evaluator = _Evaluator(eval_env, eval_episodes, eval_seed)
    space = env.action_space

    curve = []
    for episode in range(config.episodes):
        obs = env.reset(seed=env_seed) if episode == 0 else env.reset()
        while True:
            result = env.step(space.sample(agent_rng))
            if result.terminated or result.truncated:
                break
        if _eval_due(episode + 1, config.episodes, eval_interval):
            mean, std = evaluator.run(lambda _obs: space.sample(eval_rng))
            curve.append(EvalPoint(episode + 1, mean, std))
    return _finish_record(seed, curve, env, eval_env)


AGENTS = {
    "qlearning": (TabularQConfig, q_learning_train),
    "reinforce": (LinearGaussianPolicyConfig, reinforce_train),
    "random": (RandomPolicyConfig, random_agent_train),
}


def train_agent(name: str, env, eval_env, *, seed: int, episodes: int | None = None,
                eval_interval: int = 100, eval_episodes: int = 10,
                params: dict | None = None) -> RunRecord:
    """Build the named agent's config and run its trainer."""
    try:
        config_cls, train_fn = AGENTS[name]
    except KeyError:
        raise UnknownAgentError(
            f"unknown agent {name!r}; registered: {sorted(AGENTS)}"
        ) from None
    kwargs = dict(params or {})
    if episodes is not None:
        kwargs["episodes"] = episodes
    try:
        config = config_cls(**kwargs)
    except TypeError as exc:
        raise InvalidConfigError(f"bad parameters for agent {name!r}: {exc}") from None
    return train_fn(env, config, eval_env, eval_interval=eval_interval,
                    eval_episodes=eval_episodes, seed=seed)
