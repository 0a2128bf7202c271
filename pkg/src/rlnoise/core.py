"""Core environment interface: spaces, step results, seeding, returns.

Environments are episodic and step-synchronous. All randomness flows through
a per-instance numpy ``Generator``, so the same seed and action sequence
replays a bit-identical trajectory.
"""
from __future__ import annotations

from typing import Any, NamedTuple

import numpy as np

__all__ = [
    "ActionOutOfSpaceError",
    "EpisodeFinishedError",
    "InvalidConfigError",
    "ObservationSpace",
    "Discrete",
    "Continuous",
    "StepResult",
    "Environment",
    "episodic_return",
]


class InvalidConfigError(ValueError):
    """A configuration value violates its documented constraint."""


class ActionOutOfSpaceError(ValueError):
    """An action does not conform to the environment's action space."""


class EpisodeFinishedError(RuntimeError):
    """step() was called before reset() or after the episode ended."""


class ObservationSpace:
    """Real-vector observation descriptor with optional per-dimension bounds.

    Args:
        dims: Number of observation dimensions, at least 1.
        lower: Optional per-dimension lower bounds (length ``dims``).
        upper: Optional per-dimension upper bounds (length ``dims``).
    """

    def __init__(self, dims: int, lower=None, upper=None):
        if int(dims) < 1:
            raise InvalidConfigError("dims must be >= 1")
        self.dims = int(dims)
        self.lower = None if lower is None else np.asarray(lower, dtype=float)
        self.upper = None if upper is None else np.asarray(upper, dtype=float)
        for name, bound in (("lower", self.lower), ("upper", self.upper)):
            if bound is not None and bound.shape != (self.dims,):
                raise InvalidConfigError(f"{name} bounds must have length {self.dims}")
        if (
            self.lower is not None
            and self.upper is not None
            and not np.all(self.lower <= self.upper)
        ):
            raise InvalidConfigError("lower bounds must not exceed upper bounds")

    @property
    def bounded(self) -> bool:
        return self.lower is not None or self.upper is not None

    def contains(self, obs) -> bool:
        obs = np.asarray(obs, dtype=float)
        if obs.shape != (self.dims,):
            return False
        if self.lower is not None and np.any(obs < self.lower):
            return False
        if self.upper is not None and np.any(obs > self.upper):
            return False
        return True

    def clip(self, obs: np.ndarray) -> np.ndarray:
        """Clip an observation into the bounds; a no-op if unbounded."""
        if not self.bounded:
            return obs
        return np.clip(obs, self.lower, self.upper)

    def __repr__(self) -> str:
        return f"ObservationSpace(dims={self.dims}, lower={self.lower!r}, upper={self.upper!r})"


class Discrete:
    """Action space {0, 1, ..., n - 1}."""

    def __init__(self, n: int):
        if int(n) < 1:
            raise InvalidConfigError("a discrete space needs n >= 1 actions")
        self.n = int(n)

    def validate(self, action) -> int:
        if isinstance(action, (bool, np.bool_)) or not isinstance(action, (int, np.integer)):
            raise ActionOutOfSpaceError(f"discrete action must be an integer, got {action!r}")
        action = int(action)
        if not 0 <= action < self.n:
            raise ActionOutOfSpaceError(f"action {action} outside [0, {self.n - 1}]")
        return action

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.n))

    def __repr__(self) -> str:
        return f"Discrete({self.n})"


class Continuous:
    """Box action space with finite per-dimension bounds."""

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.ndim != 1 or self.lower.shape != self.upper.shape:
            raise InvalidConfigError("continuous bounds must be 1-d and the same length")
        if self.lower.size < 1:
            raise InvalidConfigError("a continuous space needs at least one dimension")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise InvalidConfigError("continuous bounds must be finite")
        if not np.all(self.lower <= self.upper):
            raise InvalidConfigError("lower bounds must not exceed upper bounds")

    @property
    def dims(self) -> int:
        return self.lower.size

    def validate(self, action) -> np.ndarray:
        arr = np.asarray(action, dtype=float)
        if arr.shape != (self.dims,):
            raise ActionOutOfSpaceError(
                f"continuous action must have shape ({self.dims},), got {arr.shape}"
            )
        if np.any(arr < self.lower) or np.any(arr > self.upper):
            raise ActionOutOfSpaceError(f"action {arr} outside bounds")
        return arr

    def clip(self, action) -> np.ndarray:
        return np.clip(np.asarray(action, dtype=float), self.lower, self.upper)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lower, self.upper)

    def __repr__(self) -> str:
        return f"Continuous(lower={self.lower!r}, upper={self.upper!r})"


class StepResult(NamedTuple):
    """One environment transition.

    ``terminated`` means the task itself ended (absorbing state); ``truncated``
    means an external limit cut the episode short. Built-in environments never
    set both in the same result.
    """

    observation: np.ndarray
    reward: float
    terminated: bool
    truncated: bool
    info: dict[str, Any]


class Environment:
    """Base class for episodic environments.

    Subclasses implement ``_reset_state(rng)`` returning the initial
    observation and ``_transition(action)`` returning
    ``(observation, reward, terminated, info)``. Horizon truncation, episode
    bookkeeping, and seeding are handled here.
    """

    def __init__(self, observation_space: ObservationSpace, action_space, horizon: int):
        if int(horizon) < 1:
            raise InvalidConfigError("horizon must be >= 1")
        self.observation_space = observation_space
        self.action_space = action_space
        self.horizon = int(horizon)
        self._rng = np.random.default_rng()
        self._elapsed = 0
        self._live = False

    def reset(self, seed: int | None = None) -> np.ndarray:
        """Start a new episode, reseeding the env's RNG when a seed is given.

        May be called mid-episode; the running episode is abandoned.
        """
        if seed is not None:
            self._rng = np.random.default_rng(int(seed))
        self._elapsed = 0
        self._live = True
        return self._reset_state(self._rng)

    def step(self, action) -> StepResult:
        if not self._live:
            raise EpisodeFinishedError(
                "episode is finished (or reset() was never called); call reset()"
            )
        action = self.action_space.validate(action)
        observation, reward, terminated, info = self._transition(action)
        self._elapsed += 1
        truncated = (not terminated) and self._elapsed >= self.horizon
        if terminated or truncated:
            self._live = False
        return StepResult(observation, float(reward), terminated, truncated, info)

    def _reset_state(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _transition(self, action):
        raise NotImplementedError


def episodic_return(rewards, gamma: float = 1.0) -> float:
    """Discounted return sum(gamma**t * r_t) of a reward sequence.

    gamma must lie in (0, 1]; gamma=1 gives the plain sum.
    """
    if not 0.0 < gamma <= 1.0:
        raise InvalidConfigError("gamma must be in (0, 1]")
    total = 0.0
    weight = 1.0
    for r in rewards:
        total += weight * float(r)
        weight *= gamma
    return total
