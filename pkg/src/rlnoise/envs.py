"""Small diagnostic environments with known optima.

All three are cheap enough to step millions of times in tests, and the two
discrete ones expose their transition model so value iteration can certify
agent behaviour.
"""
from __future__ import annotations

import numpy as np

from .core import Continuous, Discrete, Environment, InvalidConfigError, ObservationSpace

__all__ = [
    "GridWorld",
    "Chain",
    "PointMass",
    "UnknownEnvError",
    "ENVS",
    "make_env",
    "gridworld_optimal_return",
    "value_iteration",
    "greedy_policy",
]


class UnknownEnvError(LookupError):
    """Requested environment name is not registered."""


# Action index -> (dx, dy).
GRID_MOVES = ((1, 0), (0, 1), (-1, 0), (0, -1))


class GridWorld(Environment):
    """Deterministic grid: reach the goal cell on a step-cost budget.

    Observations are the agent's cell as floats ``[x, y]``. Actions are
    0=right, 1=up, 2=left, 3=down; moves off the edge leave the position
    unchanged but still cost a step. Entering the goal terminates the episode
    and adds ``goal_reward`` on top of the usual ``step_reward``.

    Args:
        width: Grid width, >= 2.
        height: Grid height, >= 2.
        start: Starting cell (x, y); must differ from the goal.
        goal: Goal cell, default the far corner.
        step_reward: Reward added on every step (default -1.0).
        goal_reward: Extra reward on the step that enters the goal.
        horizon: Step limit per episode.
        random_start: Start each episode from a uniformly random non-goal cell.
    """

    def __init__(
        self,
        width: int = 5,
        height: int = 5,
        start: tuple[int, int] = (0, 0),
        goal: tuple[int, int] | None = None,
        step_reward: float = -1.0,
        goal_reward: float = 0.0,
        horizon: int = 100,
        random_start: bool = False,
    ):
        width, height = int(width), int(height)
        if width < 2 or height < 2:
            raise InvalidConfigError("grid must be at least 2x2")
        if goal is None:
            goal = (width - 1, height - 1)
        start = (int(start[0]), int(start[1]))
        goal = (int(goal[0]), int(goal[1]))
        for name, cell in (("start", start), ("goal", goal)):
            if not (0 <= cell[0] < width and 0 <= cell[1] < height):
                raise InvalidConfigError(f"{name} cell {cell} outside the {width}x{height} grid")
        if start == goal:
            raise InvalidConfigError("start and goal must differ")
        self.width = width
        self.height = height
        self.start = start
        self.goal = goal
        self.step_reward = float(step_reward)
        self.goal_reward = float(goal_reward)
        self.random_start = bool(random_start)
        obs_space = ObservationSpace(2, lower=[0.0, 0.0], upper=[width - 1.0, height - 1.0])
        super().__init__(obs_space, Discrete(4), horizon)

    def _reset_state(self, rng):
        if self.random_start:
            while True:
                cell = (int(rng.integers(self.width)), int(rng.integers(self.height)))
                if cell != self.goal:
                    break
        else:
            cell = self.start
        self._cell = cell
        return np.array(cell, dtype=float)

    def _transition(self, action):
        dx, dy = GRID_MOVES[action]
        x = min(max(self._cell[0] + dx, 0), self.width - 1)
        y = min(max(self._cell[1] + dy, 0), self.height - 1)
        self._cell = (x, y)
        terminated = self._cell == self.goal
        reward = self.step_reward + (self.goal_reward if terminated else 0.0)
        info = {"x": float(x), "y": float(y)}
        return np.array([x, y], dtype=float), reward, terminated, info

    # Transition model for planning (states are (x, y) tuples).
    def model_states(self):
        return [(x, y) for y in range(self.height) for x in range(self.width)]

    def model_n_actions(self) -> int:
        return 4

    def is_terminal_state(self, state) -> bool:
        return tuple(state) == self.goal

    def model_transition(self, state, action):
        dx, dy = GRID_MOVES[action]
        x = min(max(state[0] + dx, 0), self.width - 1)
        y = min(max(state[1] + dy, 0), self.height - 1)
        terminated = (x, y) == self.goal
        reward = self.step_reward + (self.goal_reward if terminated else 0.0)
        return (x, y), reward, terminated


class Chain(Environment):
    """Linear chain of states testing delayed-reward credit assignment.

    The agent starts at state 0. Action 1 moves forward one state for zero
    reward, except that entering the final state pays ``large_reward`` and
    terminates. Action 0 moves back one state (floored at 0) and pays the
    immediate ``small_reward``. Observations are ``[state]`` as a float.

    Args:
        n_states: Number of states, >= 3.
        horizon: Step limit per episode.
        small_reward: Immediate reward for moving back.
        large_reward: Terminal reward for reaching the last state.
    """

    BACK = 0
    FORWARD = 1

    def __init__(
        self,
        n_states: int = 5,
        horizon: int = 50,
        small_reward: float = 0.1,
        large_reward: float = 10.0,
    ):
        n_states = int(n_states)
        if n_states < 3:
            raise InvalidConfigError("chain needs n_states >= 3")
        self.n_states = n_states
        self.small_reward = float(small_reward)
        self.large_reward = float(large_reward)
        obs_space = ObservationSpace(1, lower=[0.0], upper=[n_states - 1.0])
        super().__init__(obs_space, Discrete(2), horizon)

    def _reset_state(self, rng):
        self._state = 0
        return np.array([0.0])

    def _transition(self, action):
        if action == self.FORWARD:
            state = self._state + 1
            terminated = state == self.n_states - 1
            reward = self.large_reward if terminated else 0.0
        else:
            state = max(self._state - 1, 0)
            terminated = False
            reward = self.small_reward
        self._state = state
        return np.array([float(state)]), reward, terminated, {"state": state}

    def model_states(self):
        return list(range(self.n_states))

    def model_n_actions(self) -> int:
        return 2

    def is_terminal_state(self, state) -> bool:
        return state == self.n_states - 1

    def model_transition(self, state, action):
        if action == self.FORWARD:
            nxt = state + 1
            terminated = nxt == self.n_states - 1
            return nxt, (self.large_reward if terminated else 0.0), terminated
        return max(state - 1, 0), self.small_reward, False


class PointMass(Environment):
    """1-d point mass pushed toward a goal position by bounded force.

    State is position and velocity; each step integrates
    ``x += v * dt`` then ``v += a * dt`` and pays
    ``-(x - goal)**2 - action_cost * a**2`` on the post-update position.
    There is no terminal state; episodes end at the horizon.

    Args:
        dt: Integration step.
        goal: Target position.
        force_limit: Action bound; actions live in [-force_limit, force_limit].
        action_cost: Quadratic control penalty coefficient.
        horizon: Steps per episode.
        start_noise: Half-width of a uniform perturbation of the start position.
    """

    def __init__(
        self,
        dt: float = 0.1,
        goal: float = 1.0,
        force_limit: float = 1.0,
        action_cost: float = 0.01,
        horizon: int = 50,
        start_noise: float = 0.0,
    ):
        if dt <= 0:
            raise InvalidConfigError("dt must be positive")
        if force_limit <= 0:
            raise InvalidConfigError("force_limit must be positive")
        if start_noise < 0:
            raise InvalidConfigError("start_noise must be >= 0")
        self.dt = float(dt)
        self.goal = float(goal)
        self.force_limit = float(force_limit)
        self.action_cost = float(action_cost)
        self.start_noise = float(start_noise)
        obs_space = ObservationSpace(2)
        action_space = Continuous([-self.force_limit], [self.force_limit])
        super().__init__(obs_space, action_space, horizon)

    def _reset_state(self, rng):
        x = 0.0
        if self.start_noise > 0.0:
            x = float(rng.uniform(-self.start_noise, self.start_noise))
        self._x = x
        self._v = 0.0
        return np.array([self._x, self._v])

    def _transition(self, action):
        a = float(action[0])
        self._x += self._v * self.dt
        self._v += a * self.dt
        reward = -((self._x - self.goal) ** 2) - self.action_cost * a * a
        info = {"x": self._x, "v": self._v}
        return np.array([self._x, self._v]), reward, False, info


ENVS = {
    "gridworld": GridWorld,
    "chain": Chain,
    "pointmass": PointMass,
}


def make_env(name: str, **params) -> Environment:
    """Instantiate a registered environment by name.

    Raises UnknownEnvError for unregistered names and InvalidConfigError for
    parameters the environment does not accept.
    """
    try:
        cls = ENVS[name]
    except KeyError:
        raise UnknownEnvError(
            f"unknown env {name!r}; registered: {sorted(ENVS)}"
        ) from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise InvalidConfigError(f"bad parameters for env {name!r}: {exc}") from None


def gridworld_optimal_return(env: GridWorld) -> float:
    """Undiscounted return of the shortest path from the fixed start.

    Every step costs ``step_reward`` and the goal entry adds ``goal_reward``,
    so the optimum is Manhattan distance times step cost plus the bonus.
    """
    distance = abs(env.goal[0] - env.start[0]) + abs(env.goal[1] - env.start[1])
    return distance * env.step_reward + env.goal_reward


def value_iteration(env, gamma: float, accuracy: float = 1e-8, max_sweeps: int = 1_000_000):
    """Optimal state values of a discrete deterministic env, as a dict.

    Runs synchronous Bellman sweeps until the value function is within
    ``accuracy`` of the fixed point (for gamma < 1 via the contraction bound;
    for gamma = 1 until a sweep changes nothing). Terminal states have value 0.
    """
    if not 0.0 < gamma <= 1.0:
        raise InvalidConfigError("gamma must be in (0, 1]")
    states = env.model_states()
    n_actions = env.model_n_actions()
    if gamma < 1.0:
        stop = accuracy * (1.0 - gamma) / gamma
    else:
        stop = 0.0
    values = {s: 0.0 for s in states}
    for _ in range(max_sweeps):
        delta = 0.0
        updated = {}
        for s in states:
            if env.is_terminal_state(s):
                updated[s] = 0.0
                continue
            best = -np.inf
            for a in range(n_actions):
                nxt, reward, terminated = env.model_transition(s, a)
                q = reward + (0.0 if terminated else gamma * values[nxt])
                if q > best:
                    best = q
            updated[s] = best
            delta = max(delta, abs(best - values[s]))
        values = updated
        if delta <= stop:
            return values
    raise RuntimeError("value iteration did not converge within max_sweeps")


def greedy_policy(env, values: dict, gamma: float) -> dict:
    """One-step-lookahead greedy policy for a value function (ties -> lowest action)."""
    policy = {}
    for s in env.model_states():
        if env.is_terminal_state(s):
            continue
        best_a, best_q = 0, -np.inf
        for a in range(env.model_n_actions()):
            nxt, reward, terminated = env.model_transition(s, a)
            q = reward + (0.0 if terminated else gamma * values[nxt])
            if q > best_q:
                best_a, best_q = a, q
        policy[s] = best_a
    return policy
