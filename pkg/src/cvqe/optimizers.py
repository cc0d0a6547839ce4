"""Gradient descent and Adamax with cyclic (soft / adaptive) moment resets."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Tuple

import numpy as np


def _finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"non-finite entries in {name}")


@dataclass(frozen=True)
class AdamaxState:
    m: np.ndarray
    u: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    lr: float = 0.01
    eps: float = 1e-8

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("decay rates must lie in [0, 1)")
        if self.lr <= 0 or self.eps <= 0:
            raise ValueError("learning rate and eps must be positive")
        if np.shape(self.m) != np.shape(self.u):
            raise ValueError("m and u differ in shape")
        if np.any(np.asarray(self.u) < 0):
            raise ValueError("u must be non-negative")

    @classmethod
    def fresh(cls, dim: int, **hyper) -> "AdamaxState":
        return cls(np.zeros(dim), np.zeros(dim), 0, **hyper)

    @property
    def dim(self) -> int:
        return len(self.m)

    def extended(self, k: int) -> "AdamaxState":
        """Append ``k`` zero moments for newly added parameters."""
        return replace(self, m=np.concatenate([self.m, np.zeros(k)]), u=np.concatenate([self.u, np.zeros(k)]))

    def select(self, keep: Sequence[int]) -> "AdamaxState":
        """Keep only the moments at positions ``keep`` (in that order)."""
        idx = np.asarray(keep, dtype=int)
        return replace(self, m=self.m[idx], u=self.u[idx])


def adamax_step(state: AdamaxState, params, grad) -> Tuple[AdamaxState, np.ndarray]:
    params = np.asarray(params, dtype=float)
    g = np.asarray(grad, dtype=float)
    if params.shape != g.shape or g.shape != state.m.shape:
        raise ValueError(f"dimension mismatch: params {params.shape}, grad {g.shape}, state {state.m.shape}")
    _finite("gradient", g)
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    u = np.maximum(state.beta2 * state.u, np.abs(g))
    m_hat = m / (1.0 - state.beta1**t)
    new_params = params - state.lr * m_hat / (u + state.eps)
    return replace(state, m=m, u=u, t=t), new_params


def soft_reset(state: AdamaxState, alpha: float) -> AdamaxState:
    """Shrink both moments by ``alpha`` and restart bias correction."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    return replace(state, m=alpha * state.m, u=alpha * state.u, t=0)


def adaptive_reset_check(history: Sequence[float], tol: float, window: int = None) -> bool:
    """True when the windowed gradient norms have relative spread below ``tol``.

    ``history`` holds the most recent norms; when ``window`` is given and more
    than ``window`` values are present only the last ``window`` count, and
    fewer than ``window`` values means the window is not yet full.
    """
    vals = list(history)
    if window is not None:
        if len(vals) < window:
            return False
        vals = vals[-window:]
    if len(vals) < 2:
        return False
    hi, lo = max(vals), min(vals)
    if hi == 0.0:
        return True
    return (hi - lo) / hi < tol


def gd_step(params, grad, step_size: float) -> np.ndarray:
    if step_size <= 0:
        raise ValueError("step_size must be positive")
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    _finite("params", params)
    _finite("gradient", grad)
    return params - step_size * grad


@dataclass(frozen=True)
class RestartPolicy:
    period: int = 200
    alpha: float = 0.0
    adaptive_enabled: bool = False
    window: int = 20
    stagnation_tol: float = 1e-3

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.adaptive_enabled and self.window < 2:
            raise ValueError("adaptive resets need window >= 2")

    def scheduled(self, iteration: int) -> bool:
        """Whether a periodic reset fires after completing ``iteration`` (1-based)."""
        return iteration > 0 and iteration % self.period == 0


@dataclass
class CyclicAdamax:
    """Adamax plus the reset schedule, tracking gradient norms for adaptive resets."""

    state: AdamaxState
    policy: RestartPolicy = field(default_factory=RestartPolicy)
    iteration: int = 0
    norms: list = field(default_factory=list)

    @classmethod
    def create(cls, dim: int, policy: RestartPolicy = None, **hyper) -> "CyclicAdamax":
        return cls(AdamaxState.fresh(dim, **hyper), policy or RestartPolicy())

    def step(self, params, grad) -> Tuple[np.ndarray, bool]:
        """One update; returns new params and whether a reset fired afterwards."""
        self.state, params = adamax_step(self.state, params, grad)
        self.iteration += 1
        fired = self.policy.scheduled(self.iteration)
        if self.policy.adaptive_enabled and not fired:
            self.norms.append(float(np.linalg.norm(grad)))
            self.norms = self.norms[-self.policy.window:]
            fired = adaptive_reset_check(self.norms, self.policy.stagnation_tol, self.policy.window)
        if fired:
            self.state = soft_reset(self.state, self.policy.alpha)
            self.norms = []
        return params, fired
