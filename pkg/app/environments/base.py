"""
Generative model contract: deterministic transitions, bounded zero-mean
reward noise (|sample - r(x, a)| <= b), checkpoint or reset access.
"""
import copy
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, Sequence

import numpy as np


class AccessMode(str, Enum):
    CHECKPOINT = "checkpoint"
    RESET = "reset"


class NoiseKind(str, Enum):
    NONE = "none"
    UNIFORM = "uniform"
    RADEMACHER = "rademacher"
    TRUNCATED_GAUSSIAN = "truncated-gaussian"


# std of the truncated gaussian before truncation, in units of b
_TRUNC_SIGMA = 0.5


@dataclass(frozen=True)
class NoiseModel:
    kind: NoiseKind = NoiseKind.NONE
    b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        object.__setattr__(self, "b", float(self.b))
        if not math.isfinite(self.b) or self.b < 0:
            raise ValueError(f"Noise range must be finite and >= 0, got {self.b}.")
        if self.kind is NoiseKind.NONE and self.b != 0.0:
            raise ValueError("Noise kind 'none' requires b = 0.")

    @property
    def is_noiseless(self) -> bool:
        return self.kind is NoiseKind.NONE or self.b == 0.0

    def unit_draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Zero-mean draws supported on [-1, 1]; independent of b."""
        if self.kind is NoiseKind.NONE:
            return np.zeros(size)
        if self.kind is NoiseKind.UNIFORM:
            return rng.uniform(-1.0, 1.0, size)
        if self.kind is NoiseKind.RADEMACHER:
            return rng.integers(0, 2, size) * 2.0 - 1.0

        out = np.empty(size)
        filled = 0
        while filled < size:
            draws = rng.normal(0.0, _TRUNC_SIGMA, size - filled)
            keep = draws[np.abs(draws) <= 1.0]
            out[filled:filled + keep.size] = keep
            filled += keep.size
        return out

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.b * self.unit_draw(rng, size)

    def scaled(self, alpha: float) -> "NoiseModel":
        return NoiseModel(self.kind, self.b * alpha)


class GenerativeModel(ABC):
    """
    Subclasses provide `transition` and `true_mean`; sampling and stepping
    are shared. `true_mean` is oracle access: planners never call it.
    """

    n_actions: int
    gamma: float
    r_max: float
    noise: NoiseModel
    access: AccessMode
    reward_shift: float = 0.0

    @property
    @abstractmethod
    def root_state(self) -> Any: ...

    @abstractmethod
    def transition(self, state: Any, action: int) -> Any: ...

    @abstractmethod
    def true_mean(self, state: Any, action: int) -> float: ...

    @abstractmethod
    def with_root(self, state: Any) -> "GenerativeModel": ...

    def check_action(self, action: int) -> None:
        if not 0 <= action < self.n_actions:
            raise ValueError(f"Action {action} outside [0, {self.n_actions}).")

    def sample_rewards(self, state: Any, action: int, m: int,
                       rng: np.random.Generator) -> np.ndarray:
        self.check_action(action)
        mean = self.true_mean(state, action)
        if self.noise.kind is NoiseKind.NONE:
            return np.full(m, mean, dtype=float)
        return mean + self.noise.draw(rng, m)

    def sample_reward(self, state: Any, action: int, rng: np.random.Generator) -> float:
        return float(self.sample_rewards(state, action, 1, rng)[0])

    def step(self, state: Any, action: int, rng: np.random.Generator) -> tuple[Any, float]:
        reward = self.sample_reward(state, action, rng)
        return self.transition(state, action), reward

    def value_tail(self, gamma: float, h: int) -> float:
        """Bound on what rewards from depth h on can add to the root value."""
        return gamma ** h * self.r_max / (1.0 - gamma)

    def with_noise(self, noise: NoiseModel) -> "GenerativeModel":
        clone = copy.copy(self)
        object.__setattr__(clone, "noise", noise)
        return clone


def path_states(env: GenerativeModel, actions: Sequence[int], state: Any = None) -> list:
    """States visited along `actions`, starting state included."""
    x = env.root_state if state is None else state
    states = [x]
    for a in actions:
        env.check_action(a)
        x = env.transition(x, a)
        states.append(x)
    return states


def path_value(env: GenerativeModel, actions: Sequence[int], *, gamma: float | None = None,
               state: Any = None) -> float:
    """u(a): discounted sum of true mean rewards along a finite sequence."""
    g = env.gamma if gamma is None else gamma
    x = env.root_state if state is None else state
    total = 0.0
    for t, a in enumerate(actions):
        total += g ** t * env.true_mean(x, a)
        x = env.transition(x, a)
    return total
