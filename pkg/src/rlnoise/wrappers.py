"""Noise-augmentation wrappers for episodic environments.

Each wrapper perturbs exactly one channel (observations, rewards, or episode
length) and delegates everything else to the wrapped environment. A noise
rate ``p`` gates every eligible emission: with probability ``p`` the emission
is perturbed, otherwise it passes through untouched. The gate and the noise
values are drawn from two separate streams derived from ``(seed, position in
the wrapper stack)``, so changing ``p`` alone never changes which noise
values get drawn, and stacked wrappers never share a stream.

Wrappers never mutate the inner environment's arrays and never touch ``info``;
perturbation counts are exposed through the read-only ``perturbations``
property instead.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import InvalidConfigError, StepResult

__all__ = [
    "PerturbationLog",
    "NoiseWrapper",
    "NormalNoisyObservation",
    "UniformNoisyObservation",
    "UniformScaleObservation",
    "MixupObservation",
    "DropoutObservation",
    "NormalNoisyReward",
    "UniformNoisyReward",
    "UniformScaleReward",
    "EarlyTermination",
    "WrapperConfig",
    "WRAPPER_KINDS",
    "PRESETS",
    "SWEEP_AXES",
    "gate_fires",
    "wrap",
    "config_from_dict",
    "preset",
    "kind_params",
    "wrapper_depth",
    "perturbation_totals",
]


def gate_fires(rate: float, rng: np.random.Generator) -> bool:
    """One Bernoulli(rate) gate decision; always consumes exactly one draw.

    Draws lie in [0, 1), so rate=0.0 never fires and rate=1.0 always does.
    """
    return rng.random() < rate


@dataclass
class PerturbationLog:
    """Counters of what a wrapper actually did.

    ``steps_total`` counts gated emissions (for observation wrappers this
    includes the reset observation), ``steps_perturbed`` the ones that were
    modified. ``episodes_perturbed`` counts episodes with at least one
    perturbation; for per-episode early termination it counts episodes the
    gate selected at reset.
    """

    steps_total: int = 0
    steps_perturbed: int = 0
    episodes_total: int = 0
    episodes_perturbed: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "steps_total": self.steps_total,
            "steps_perturbed": self.steps_perturbed,
            "episodes_total": self.episodes_total,
            "episodes_perturbed": self.episodes_perturbed,
        }

    def copy(self) -> "PerturbationLog":
        return replace(self)


def wrapper_depth(env) -> int:
    """Number of NoiseWrapper layers in ``env`` (0 for a bare environment)."""
    depth = 0
    while isinstance(env, NoiseWrapper):
        depth += 1
        env = env.env
    return depth


class NoiseWrapper:
    """Base wrapper: delegation, gate/noise streams, perturbation counters.

    The two RNG streams are seeded from ``(seed, stack depth)`` where depth is
    the number of wrappers already beneath this one, so every layer of a stack
    gets its own independent gate and noise streams even when all layers share
    a config seed. ``reset(seed=...)`` reseeds only the inner environment;
    wrapper streams are fixed at construction.
    """

    kind: str = ""

    def __init__(self, env, rate: float = 1.0, seed: int = 0):
        if not 0.0 <= float(rate) <= 1.0:
            raise InvalidConfigError("noise rate p must be in [0, 1]")
        self.env = env
        self.rate = float(rate)
        self.seed = int(seed)
        depth = wrapper_depth(env)
        self._gate_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(depth, 0))
        )
        self._noise_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(depth, 1))
        )
        self._log = PerturbationLog()
        self._episode_perturbed = False

    # Delegation -----------------------------------------------------------
    @property
    def observation_space(self):
        return self.env.observation_space

    @property
    def action_space(self):
        return self.env.action_space

    @property
    def horizon(self):
        return self.env.horizon

    @property
    def unwrapped(self):
        node = self.env
        while isinstance(node, NoiseWrapper):
            node = node.env
        return node

    @property
    def perturbations(self) -> PerturbationLog:
        """A copy of the wrapper's perturbation counters."""
        return self._log.copy()

    # Episode flow ----------------------------------------------------------
    def reset(self, seed: int | None = None) -> np.ndarray:
        obs = self.env.reset(seed=seed)
        self._log.episodes_total += 1
        self._episode_perturbed = False
        return self._on_reset(obs)

    def step(self, action) -> StepResult:
        return self._on_step(self.env.step(action))

    def _on_reset(self, obs: np.ndarray) -> np.ndarray:
        return obs

    def _on_step(self, result: StepResult) -> StepResult:
        return result

    def _register(self, perturbed: bool) -> None:
        self._log.steps_total += 1
        if perturbed:
            self._log.steps_perturbed += 1
            self._mark_episode_perturbed()

    def _mark_episode_perturbed(self) -> None:
        if not self._episode_perturbed:
            self._episode_perturbed = True
            self._log.episodes_perturbed += 1

    def __repr__(self) -> str:
        return f"{type(self).__name__}(p={self.rate}, env={type(self.env).__name__})"


class _ObservationNoise(NoiseWrapper):
    """Shared gating for wrappers that perturb emitted observations.

    Both step observations and the reset observation are gated. When the gate
    does not fire the inner result is returned as-is (same objects).
    """

    def __init__(self, env, rate: float = 1.0, seed: int = 0, clip_to_space: bool = False):
        super().__init__(env, rate=rate, seed=seed)
        self.clip_to_space = bool(clip_to_space)

    def _perturb(self, obs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _emit(self, obs):
        if gate_fires(self.rate, self._gate_rng):
            out = self._perturb(np.asarray(obs, dtype=float))
            if self.clip_to_space:
                out = self.observation_space.clip(out)
            self._register(True)
            return out
        self._register(False)
        return obs

    def _on_reset(self, obs):
        return self._emit(obs)

    def _on_step(self, result):
        out = self._emit(result.observation)
        if out is result.observation:
            return result
        return result._replace(observation=out)


class NormalNoisyObservation(_ObservationNoise):
    """Adds i.i.d. zero-mean Gaussian noise to emitted observations.

    Args:
        env: Environment to wrap.
        sigma: Noise standard deviation, > 0.
        rate: Probability of perturbing each emission.
        seed: Seed for the wrapper's gate and noise streams.
        clip_to_space: Clip perturbed observations back into the observation
            bounds (off by default; noise may leave the space).
    """

    kind = "normal_noisy_obs"

    def __init__(self, env, sigma: float, rate: float = 1.0, seed: int = 0,
                 clip_to_space: bool = False):
        if sigma <= 0:
            raise InvalidConfigError("sigma must be positive")
        super().__init__(env, rate=rate, seed=seed, clip_to_space=clip_to_space)
        self.sigma = float(sigma)

    def _perturb(self, obs):
        return obs + self._noise_rng.normal(0.0, self.sigma, size=obs.shape)


class UniformNoisyObservation(_ObservationNoise):
    """Adds i.i.d. uniform noise from [alpha, beta) to emitted observations.

    Args:
        env: Environment to wrap.
        alpha: Lower end of the noise interval.
        beta: Upper end of the noise interval; must exceed alpha.
        rate: Probability of perturbing each emission.
        seed: Seed for the wrapper's gate and noise streams.
        clip_to_space: Clip perturbed observations back into bounds.
    """

    kind = "uniform_noisy_obs"

    def __init__(self, env, alpha: float, beta: float, rate: float = 1.0, seed: int = 0,
                 clip_to_space: bool = False):
        if not alpha < beta:
            raise InvalidConfigError("alpha must be strictly less than beta")
        super().__init__(env, rate=rate, seed=seed, clip_to_space=clip_to_space)
        self.alpha = float(alpha)
        self.beta = float(beta)

    def _perturb(self, obs):
        return obs + self._noise_rng.uniform(self.alpha, self.beta, size=obs.shape)


class UniformScaleObservation(_ObservationNoise):
    """Multiplies emitted observations by a uniform random factor.

    By default a single scalar factor from [alpha, beta) scales the whole
    vector; with ``per_dimension=True`` each dimension draws its own factor.

    Args:
        env: Environment to wrap.
        alpha: Lower end of the scale interval.
        beta: Upper end of the scale interval; must exceed alpha.
        per_dimension: Draw one factor per observation dimension.
        rate: Probability of perturbing each emission.
        seed: Seed for the wrapper's gate and noise streams.
        clip_to_space: Clip perturbed observations back into bounds.
    """

    kind = "uniform_scale_obs"

    def __init__(self, env, alpha: float, beta: float, per_dimension: bool = False,
                 rate: float = 1.0, seed: int = 0, clip_to_space: bool = False):
        if not alpha < beta:
            raise InvalidConfigError("alpha must be strictly less than beta")
        super().__init__(env, rate=rate, seed=seed, clip_to_space=clip_to_space)
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.per_dimension = bool(per_dimension)

    def _perturb(self, obs):
        if self.per_dimension:
            factor = self._noise_rng.uniform(self.alpha, self.beta, size=obs.shape)
        else:
            factor = self._noise_rng.uniform(self.alpha, self.beta)
        return obs * factor


class MixupObservation(NoiseWrapper):
    """Blends each emitted observation with the previous raw observation.

    A gated step emits ``lam * obs + (1 - lam) * previous`` where ``previous``
    is the unperturbed observation from the step before (the reset observation
    at the start of an episode). The blend buffer always tracks raw inner
    observations, so what the agent saw last step never leaks into the blend.
    The reset observation itself seeds the buffer and is emitted unmodified.

    Args:
        env: Environment to wrap.
        lam: Blend weight on the current observation, in [0, 1]. lam=1 keeps
            the current observation; lam=0 repeats the previous one.
        rate: Probability of blending each step emission.
        seed: Seed for the wrapper's gate stream (no noise values are drawn).
    """

    kind = "mixup_obs"

    def __init__(self, env, lam: float, rate: float = 1.0, seed: int = 0):
        if not 0.0 <= lam <= 1.0:
            raise InvalidConfigError("lambda must be in [0, 1]")
        super().__init__(env, rate=rate, seed=seed)
        self.lam = float(lam)
        self._previous = None

    def _on_reset(self, obs):
        self._previous = np.array(obs, dtype=float, copy=True)
        return obs

    def _on_step(self, result):
        current = np.asarray(result.observation, dtype=float)
        if gate_fires(self.rate, self._gate_rng):
            mixed = self.lam * current + (1.0 - self.lam) * self._previous
            self._register(True)
            out = result._replace(observation=mixed)
        else:
            self._register(False)
            out = result
        self._previous = np.array(current, copy=True)
        return out


class DropoutObservation(_ObservationNoise):
    """Zeroes each observation dimension independently with prob 1 - keep_prob.

    Args:
        env: Environment to wrap.
        keep_prob: Probability of KEEPING each dimension, in [0, 1];
            keep_prob=1 keeps everything, keep_prob=0 zeroes the vector.
        rate: Probability of perturbing each emission.
        seed: Seed for the wrapper's gate and noise streams.
        clip_to_space: Clip perturbed observations back into bounds.
    """

    kind = "dropout_obs"

    def __init__(self, env, keep_prob: float, rate: float = 1.0, seed: int = 0,
                 clip_to_space: bool = False):
        if not 0.0 <= keep_prob <= 1.0:
            raise InvalidConfigError("keep_prob must be in [0, 1]")
        super().__init__(env, rate=rate, seed=seed, clip_to_space=clip_to_space)
        self.keep_prob = float(keep_prob)

    def _perturb(self, obs):
        mask = self._noise_rng.random(obs.shape) < self.keep_prob
        return obs * mask


class _RewardNoise(NoiseWrapper):
    """Shared gating for wrappers that perturb step rewards."""

    def _perturb(self, reward: float) -> float:
        raise NotImplementedError

    def _on_step(self, result):
        if gate_fires(self.rate, self._gate_rng):
            self._register(True)
            return result._replace(reward=float(self._perturb(result.reward)))
        self._register(False)
        return result


class NormalNoisyReward(_RewardNoise):
    """Adds zero-mean Gaussian noise to step rewards.

    Args:
        env: Environment to wrap.
        sigma: Noise standard deviation, > 0.
        rate: Probability of perturbing each reward.
        seed: Seed for the wrapper's gate and noise streams.
    """

    kind = "normal_noisy_reward"

    def __init__(self, env, sigma: float, rate: float = 1.0, seed: int = 0):
        if sigma <= 0:
            raise InvalidConfigError("sigma must be positive")
        super().__init__(env, rate=rate, seed=seed)
        self.sigma = float(sigma)

    def _perturb(self, reward):
        return reward + self._noise_rng.normal(0.0, self.sigma)


class UniformNoisyReward(_RewardNoise):
    """Adds uniform noise from [alpha, beta) to step rewards.

    Args:
        env: Environment to wrap.
        alpha: Lower end of the noise interval.
        beta: Upper end of the noise interval; must exceed alpha.
        rate: Probability of perturbing each reward.
        seed: Seed for the wrapper's gate and noise streams.
    """

    kind = "uniform_noisy_reward"

    def __init__(self, env, alpha: float, beta: float, rate: float = 1.0, seed: int = 0):
        if not alpha < beta:
            raise InvalidConfigError("alpha must be strictly less than beta")
        super().__init__(env, rate=rate, seed=seed)
        self.alpha = float(alpha)
        self.beta = float(beta)

    def _perturb(self, reward):
        return reward + self._noise_rng.uniform(self.alpha, self.beta)


class UniformScaleReward(_RewardNoise):
    """Multiplies step rewards by a uniform random factor from [alpha, beta).

    Args:
        env: Environment to wrap.
        alpha: Lower end of the scale interval.
        beta: Upper end of the scale interval; must exceed alpha.
        rate: Probability of perturbing each reward.
        seed: Seed for the wrapper's gate and noise streams.
    """

    kind = "uniform_scale_reward"

    def __init__(self, env, alpha: float, beta: float, rate: float = 1.0, seed: int = 0):
        if not alpha < beta:
            raise InvalidConfigError("alpha must be strictly less than beta")
        super().__init__(env, rate=rate, seed=seed)
        self.alpha = float(alpha)
        self.beta = float(beta)

    def _perturb(self, reward):
        return reward * self._noise_rng.uniform(self.alpha, self.beta)


class EarlyTermination(NoiseWrapper):
    """Cuts episodes short before the environment would end them.

    Two variants:

    * ``per_episode``: at reset, with probability ``rate`` the episode is
      selected and a cutoff ``T ~ UniformInteger[a, b]`` is drawn; the episode
      is cut at the end of step T if still running.
    * ``per_step``: every live step is cut independently with probability
      ``rate``, giving geometric episode lengths with mean ~ 1/rate (capped
      by the horizon). The gate stream is consulted on every step, including
      an episode's natural last one, so cut patterns do not depend on where
      previous episodes ended.

    A cut is reported as ``truncated=True`` (the task did not end; the budget
    did). ``treat_as_terminal=True`` reports ``terminated=True`` instead, for
    agents that should bootstrap as if the episode really ended.

    Args:
        env: Environment to wrap.
        a: Smallest possible cutoff step (per_episode only), integer >= 1.
        b: Largest possible cutoff step (per_episode only), integer >= a.
        variant: "per_episode" or "per_step".
        rate: Gate probability (per episode or per step).
        seed: Seed for the wrapper's gate and noise streams.
        treat_as_terminal: Report cuts as terminated instead of truncated.
    """

    kind = "early_termination"

    def __init__(self, env, a: int | None = None, b: int | None = None,
                 variant: str = "per_episode", rate: float = 1.0, seed: int = 0,
                 treat_as_terminal: bool = False):
        if variant not in ("per_episode", "per_step"):
            raise InvalidConfigError("variant must be 'per_episode' or 'per_step'")
        if variant == "per_episode":
            if a is None or b is None:
                raise InvalidConfigError("per_episode early termination requires a and b")
            a, b = int(a), int(b)
            if a < 1:
                raise InvalidConfigError("a must be an integer >= 1")
            if b < a:
                raise InvalidConfigError("b must be >= a")
        elif a is not None or b is not None:
            raise InvalidConfigError("a and b only apply to the per_episode variant")
        super().__init__(env, rate=rate, seed=seed)
        self.a = a
        self.b = b
        self.variant = variant
        self.treat_as_terminal = bool(treat_as_terminal)
        self._ep_steps = 0
        self._cutoff = None

    def _on_reset(self, obs):
        self._ep_steps = 0
        self._cutoff = None
        if self.variant == "per_episode" and gate_fires(self.rate, self._gate_rng):
            self._cutoff = int(self._noise_rng.integers(self.a, self.b + 1))
            self._mark_episode_perturbed()
        return obs

    def _cut(self, result: StepResult) -> StepResult:
        if self.treat_as_terminal:
            return result._replace(terminated=True, truncated=False)
        return result._replace(truncated=True)

    def _on_step(self, result):
        self._ep_steps += 1
        ended = result.terminated or result.truncated
        if self.variant == "per_step":
            fire = gate_fires(self.rate, self._gate_rng)
            if not ended:
                self._register(fire)
                if fire:
                    return self._cut(result)
        else:
            self._log.steps_total += 1
            if self._cutoff is not None and self._ep_steps >= self._cutoff and not ended:
                self._log.steps_perturbed += 1
                return self._cut(result)
        return result


WRAPPER_KINDS = {
    cls.kind: cls
    for cls in (
        NormalNoisyObservation,
        UniformNoisyObservation,
        UniformScaleObservation,
        MixupObservation,
        DropoutObservation,
        NormalNoisyReward,
        UniformNoisyReward,
        UniformScaleReward,
        EarlyTermination,
    )
}

# Parameter fields (beyond kind/p/seed) that apply to each kind.
_KIND_PARAMS = {
    "normal_noisy_obs": ("sigma", "clip_to_space"),
    "uniform_noisy_obs": ("alpha", "beta", "clip_to_space"),
    "uniform_scale_obs": ("alpha", "beta", "per_dimension", "clip_to_space"),
    "mixup_obs": ("lam",),
    "dropout_obs": ("keep_prob", "clip_to_space"),
    "normal_noisy_reward": ("sigma",),
    "uniform_noisy_reward": ("alpha", "beta"),
    "uniform_scale_reward": ("alpha", "beta"),
    "early_termination": ("a", "b", "variant", "treat_as_terminal"),
}

# Numeric fields a sweep may vary.
SWEEP_AXES = {"sigma", "alpha", "beta", "lam", "keep_prob", "a", "b"}


def kind_params(kind: str) -> tuple[str, ...]:
    """Parameter names (beyond kind/p/seed) that apply to a wrapper kind."""
    try:
        return _KIND_PARAMS[kind]
    except KeyError:
        raise InvalidConfigError(
            f"unknown wrapper kind {kind!r}; known kinds: {sorted(_KIND_PARAMS)}"
        ) from None


@dataclass(frozen=True)
class WrapperConfig:
    """Declarative description of one wrapper: kind, rate, seed, parameters.

    Only the parameters listed for the kind are meaningful; ``validate()``
    checks their constraints and ``wrap()`` builds the wrapper.
    """

    kind: str
    p: float = 1.0
    seed: int = 0
    sigma: float | None = None
    alpha: float | None = None
    beta: float | None = None
    lam: float | None = None
    keep_prob: float | None = None
    a: int | None = None
    b: int | None = None
    variant: str = "per_episode"
    per_dimension: bool = False
    clip_to_space: bool = False
    treat_as_terminal: bool = False

    def validate(self) -> None:
        if self.kind not in _KIND_PARAMS:
            raise InvalidConfigError(
                f"unknown wrapper kind {self.kind!r}; known kinds: {sorted(_KIND_PARAMS)}"
            )
        if not 0.0 <= self.p <= 1.0:
            raise InvalidConfigError("noise rate p must be in [0, 1]")
        kind = self.kind

        def require(name):
            if getattr(self, name) is None:
                raise InvalidConfigError(f"wrapper kind {kind!r} requires parameter {name!r}")

        if kind in ("normal_noisy_obs", "normal_noisy_reward"):
            require("sigma")
            if self.sigma <= 0:
                raise InvalidConfigError("sigma must be positive")
        elif kind in ("uniform_noisy_obs", "uniform_scale_obs",
                      "uniform_noisy_reward", "uniform_scale_reward"):
            require("alpha")
            require("beta")
            if not self.alpha < self.beta:
                raise InvalidConfigError("alpha must be strictly less than beta")
        elif kind == "mixup_obs":
            require("lam")
            if not 0.0 <= self.lam <= 1.0:
                raise InvalidConfigError("lambda must be in [0, 1]")
        elif kind == "dropout_obs":
            require("keep_prob")
            if not 0.0 <= self.keep_prob <= 1.0:
                raise InvalidConfigError("keep_prob must be in [0, 1]")
        elif kind == "early_termination":
            if self.variant not in ("per_episode", "per_step"):
                raise InvalidConfigError("variant must be 'per_episode' or 'per_step'")
            if self.variant == "per_episode":
                require("a")
                require("b")
                if int(self.a) != self.a or int(self.b) != self.b:
                    raise InvalidConfigError("a and b must be integers")
                if self.a < 1:
                    raise InvalidConfigError("a must be an integer >= 1")
                if self.b < self.a:
                    raise InvalidConfigError("b must be >= a")
            elif self.a is not None or self.b is not None:
                raise InvalidConfigError("a and b only apply to the per_episode variant")

    def to_dict(self) -> dict:
        """Canonical dict form: kind, p, seed, and the kind's parameters."""
        out = {"kind": self.kind, "p": self.p, "seed": self.seed}
        for name in _KIND_PARAMS[self.kind]:
            value = getattr(self, name)
            if value is not None:
                out["lambda" if name == "lam" else name] = value
        return out

    def label(self) -> str:
        """Human-readable name without rate or seed, for table rows."""
        parts = []
        for name in _KIND_PARAMS[self.kind]:
            value = getattr(self, name)
            if value is None or value is False:
                continue
            parts.append(f"{'lambda' if name == 'lam' else name}={value}")
        return f"{self.kind}({','.join(parts)})" if parts else self.kind


_CONFIG_KEY_TO_FIELD = {
    "kind": "kind",
    "p": "p",
    "seed": "seed",
    "sigma": "sigma",
    "alpha": "alpha",
    "beta": "beta",
    "lambda": "lam",
    "keep_prob": "keep_prob",
    "a": "a",
    "b": "b",
    "variant": "variant",
    "per_dimension": "per_dimension",
    "clip_to_space": "clip_to_space",
    "treat_as_terminal": "treat_as_terminal",
}


def config_from_dict(data: dict) -> WrapperConfig:
    """Parse a wrapper config mapping (as loaded from a config file).

    Accepts either a ``preset`` name (optionally overridden key by key) or an
    explicit ``kind`` plus parameters. Unknown keys and parameters that do not
    apply to the kind are rejected.
    """
    data = dict(data)
    if "preset" in data:
        base = preset(data.pop("preset")).to_dict()
        base.update(data)
        data = base
    unknown = sorted(set(data) - set(_CONFIG_KEY_TO_FIELD))
    if unknown:
        raise InvalidConfigError(f"unknown wrapper config keys: {unknown}")
    if "kind" not in data:
        raise InvalidConfigError("wrapper config needs a 'kind' (or a 'preset')")
    kind = data["kind"]
    if kind not in _KIND_PARAMS:
        raise InvalidConfigError(
            f"unknown wrapper kind {kind!r}; known kinds: {sorted(_KIND_PARAMS)}"
        )
    allowed = set(_KIND_PARAMS[kind]) | {"kind", "p", "seed"}
    for key in data:
        if _CONFIG_KEY_TO_FIELD[key] not in allowed:
            raise InvalidConfigError(
                f"parameter {key!r} does not apply to wrapper kind {kind!r}"
            )
    fields = {_CONFIG_KEY_TO_FIELD[key]: value for key, value in data.items()}
    config = WrapperConfig(**fields)
    config.validate()
    return config


def _preset(kind: str, **params) -> WrapperConfig:
    return WrapperConfig(kind=kind, **params)


# Named wrapper configurations shipped with the package (rate defaults to 1.0).
PRESETS = {
    "RandomDropoutObservation(0.1)": _preset("dropout_obs", keep_prob=0.1),
    "RandomEarlyTermination(1,100)": _preset("early_termination", a=1, b=100),
    "RandomEarlyTermination(50)": _preset("early_termination", a=50, b=50),
    "RandomMixupObservation(0.0)": _preset("mixup_obs", lam=0.0),
    "RandomMixupObservation(0.5)": _preset("mixup_obs", lam=0.5),
    "RandomNormalNoisyObservation(0.001)": _preset("normal_noisy_obs", sigma=0.001),
    "RandomNormalNoisyReward(0.001)": _preset("normal_noisy_reward", sigma=0.001),
    "RandomNormalNoisyReward(1.0)": _preset("normal_noisy_reward", sigma=1.0),
    "RandomUniformNoisyObservation(-0.001,0.001)": _preset(
        "uniform_noisy_obs", alpha=-0.001, beta=0.001
    ),
    "RandomUniformNoisyReward(-0.001,0.001)": _preset(
        "uniform_noisy_reward", alpha=-0.001, beta=0.001
    ),
    "RandomUniformScaleObservation(0.5,1.5)": _preset("uniform_scale_obs", alpha=0.5, beta=1.5),
    "RandomUniformScaleObservation(0.8,1.2)": _preset("uniform_scale_obs", alpha=0.8, beta=1.2),
    "RandomUniformScaleReward(0.5,1.5)": _preset("uniform_scale_reward", alpha=0.5, beta=1.5),
    "RandomUniformScaleReward(0.8,1.2)": _preset("uniform_scale_reward", alpha=0.8, beta=1.2),
}

_NORMALIZED_PRESETS = {name.replace(" ", ""): cfg for name, cfg in PRESETS.items()}


def preset(name: str) -> WrapperConfig:
    """Look up a named preset configuration (whitespace-insensitive)."""
    try:
        return _NORMALIZED_PRESETS[str(name).replace(" ", "")]
    except KeyError:
        raise InvalidConfigError(
            f"unknown preset {name!r}; known presets: {sorted(PRESETS)}"
        ) from None


def wrap(env, config: WrapperConfig):
    """Build the wrapper described by ``config`` around ``env``.

    The returned object satisfies the same reset/step interface as the
    environment it wraps.
    """
    config.validate()
    cls = WRAPPER_KINDS[config.kind]
    kwargs = {
        name: getattr(config, name)
        for name in _KIND_PARAMS[config.kind]
        if getattr(config, name) is not None
    }
    return cls(env, rate=config.p, seed=config.seed, **kwargs)


def perturbation_totals(env) -> dict[str, int]:
    """Perturbation counters summed over the wrapper chain (zeros for a bare env)."""
    totals = {"steps_total": 0, "steps_perturbed": 0,
              "episodes_total": 0, "episodes_perturbed": 0}
    node = env
    while isinstance(node, NoiseWrapper):
        for key, value in node.perturbations.as_dict().items():
            totals[key] += value
        node = node.env
    return totals
