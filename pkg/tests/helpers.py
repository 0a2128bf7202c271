"""Shared test helpers."""
from __future__ import annotations

import numpy as np

from rlnoise.core import Discrete, Environment, ObservationSpace


class Counter(Environment):
    """Deterministic env for wrapper tests: observation is [t]*dims, reward t.

    Runs to the horizon unless ``terminal_at`` is set. With ``record=True`` it
    keeps every raw observation array it emitted, so tests can check that
    wrappers neither mutate nor depend on anything but the raw stream.
    """

    def __init__(self, horizon=1_000_000, dims=1, terminal_at=None, record=False):
        super().__init__(ObservationSpace(dims), Discrete(1), horizon)
        self.dims = dims
        self.terminal_at = terminal_at
        self.record = record
        self.emitted = []

    def _reset_state(self, rng):
        self._t = 0
        obs = np.zeros(self.dims)
        if self.record:
            self.emitted.append(obs)
        return obs

    def _transition(self, action):
        self._t += 1
        obs = np.full(self.dims, float(self._t))
        if self.record:
            self.emitted.append(obs)
        terminated = self.terminal_at is not None and self._t >= self.terminal_at
        return obs, float(self._t), terminated, {"t": self._t}


def rollout(env, actions, seed=None):
    """Reset then step through actions (stopping at episode end).

    Returns (reset_obs, list of StepResults).
    """
    obs = env.reset(seed=seed)
    results = []
    for action in actions:
        result = env.step(action)
        results.append(result)
        if result.terminated or result.truncated:
            break
    return obs, results


def episode_length(env, seed=None, action=0):
    """Play one episode with a constant action; returns (length, last result)."""
    env.reset(seed=seed)
    steps = 0
    while True:
        result = env.step(action)
        steps += 1
        if result.terminated or result.truncated:
            return steps, result
