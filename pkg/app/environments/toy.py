"""
Two-state "stay or switch" MDP.

A state is (bin, d). Taking action a != bin pays a base reward of 2 and
moves to (a, 0); taking a == bin pays d and moves to (a, d + 1). Every
reward is shifted by +100 so bounded noise never makes it negative.
"""
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .base import AccessMode, GenerativeModel, NoiseModel

SWITCH_REWARD = 2.0
DEFAULT_SHIFT = 100.0
DEFAULT_R_MAX = 130.0


class ToyMDPState(NamedTuple):
    bin: int
    d: int


def toy_transition(state: ToyMDPState, action: int) -> ToyMDPState:
    if state.bin != action:
        return ToyMDPState(action, 0)
    return ToyMDPState(action, state.d + 1)


def toy_base_reward(state: ToyMDPState, action: int) -> float:
    if state.bin != action:
        return SWITCH_REWARD
    return float(state.d)


def toy_step(state: ToyMDPState, action: int, noise: NoiseModel, rng: np.random.Generator,
             *, shift: float = DEFAULT_SHIFT, scale: float = 1.0) -> tuple[ToyMDPState, float]:
    if action not in (0, 1):
        raise ValueError(f"Toy MDP action must be 0 or 1, got {action}.")
    mean = scale * (toy_base_reward(state, action) + shift)
    sample = mean + float(noise.draw(rng, 1)[0]) if not noise.is_noiseless else mean
    return toy_transition(state, action), sample


@dataclass(frozen=True, eq=False)
class ToyMDP(GenerativeModel):
    gamma: float = 0.95
    noise: NoiseModel = field(default_factory=NoiseModel)
    shift: float = DEFAULT_SHIFT
    r_max: float = DEFAULT_R_MAX
    scale: float = 1.0
    access: AccessMode = AccessMode.CHECKPOINT
    root: ToyMDPState = ToyMDPState(0, 0)

    n_actions = 2

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}.")
        if self.scale <= 0:
            raise ValueError("scale must be > 0.")
        object.__setattr__(self, "root", ToyMDPState(*self.root))

    @property
    def reward_shift(self) -> float:
        return self.shift * self.scale

    @property
    def root_state(self) -> ToyMDPState:
        return self.root

    def transition(self, state: ToyMDPState, action: int) -> ToyMDPState:
        return toy_transition(state, action)

    def true_mean(self, state: ToyMDPState, action: int) -> float:
        self.check_action(action)
        return self.scale * (toy_base_reward(state, action) + self.shift)

    def step(self, state: ToyMDPState, action: int,
             rng: np.random.Generator) -> tuple[ToyMDPState, float]:
        return toy_step(ToyMDPState(*state), action, self.noise, rng, shift=self.shift, scale=self.scale)

    def value_tail(self, gamma: float, h: int) -> float:
        # the counter grows by at most one per step, so r_t <= d0 + 2 + |shift| + t
        c = self.root.d + SWITCH_REWARD + abs(self.shift)
        return self.scale * gamma ** h * ((c + h) / (1.0 - gamma) + gamma / (1.0 - gamma) ** 2)

    def with_root(self, state: ToyMDPState) -> "ToyMDP":
        return replace(self, root=ToyMDPState(*state))

    def scaled(self, alpha: float) -> "ToyMDP":
        return replace(self, scale=self.scale * alpha, r_max=self.r_max * alpha,
                       noise=self.noise.scaled(alpha))
