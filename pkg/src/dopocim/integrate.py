"""Generic fixed-step Ito (Euler-Maruyama) trajectory driver.

This is the reference integrator: it works with any object exposing

    dim            -- state dimension
    drift(y, t)    -- deterministic increment rate, shape (dim,)
    noise(y, t, w) -- stochastic increment given the step's draws, shape (dim,)
    draw(streams, dt) -- one step's raw increments from labelled streams

The production ensembles run the same schemes through the compiled kernels;
this driver is what unit tests and small cross-checks integrate against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

__all__ = ["IntegratorConfig", "TrajectoryResult", "integrate_trajectory"]

DEFAULT_DIVERGENCE_CAP = 1e3


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    total_time: float
    sample_times: tuple[float, ...]

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.total_time > 0:
            raise ValueError(f"total_time must be positive, got {self.total_time}")
        ts = tuple(float(t) for t in self.sample_times)
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("sample_times must be strictly ascending")
        if ts and ts[-1] > self.total_time + 0.5 * self.dt:
            raise ValueError("sample_times must not exceed total_time")
        # Each sample time is taken at the nearest step; times are within half
        # a step of the multiple of dt they snap to by construction.
        steps = [int(round(t / self.dt)) for t in ts]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("sample_times collide on the integration grid")
        object.__setattr__(self, "sample_times", ts)

    @property
    def n_steps(self) -> int:
        return int(round(self.total_time / self.dt))

    def sample_steps(self) -> np.ndarray:
        """Step indices (0 = initial state) at which samples are taken."""
        return np.array([int(round(t / self.dt)) for t in self.sample_times], dtype=np.int64)

    @classmethod
    def regular(cls, dt: float, total_time: float, sample_every: float) -> "IntegratorConfig":
        n = int(round(total_time / sample_every))
        return cls(dt, total_time, tuple(k * sample_every for k in range(n + 1)))


class TrajectoryResult(NamedTuple):
    final_state: np.ndarray
    diverged_at: int | None  # step index at which divergence was detected


def _divergent(y: np.ndarray, cap: float) -> bool:
    m = np.abs(y)
    return bool(np.any(~np.isfinite(m)) or np.any(m > cap))


def integrate_trajectory(
    system,
    initial_state,
    config: IntegratorConfig,
    streams,
    observer: Callable[[int, float, np.ndarray], None] | None = None,
    divergence_cap: float = DEFAULT_DIVERGENCE_CAP,
) -> TrajectoryResult:
    """Integrate one sample path with the fixed-step Euler-Maruyama scheme.

    ``observer(sample_index, time, state)`` is invoked at every sample time.
    A non-finite state component (or one beyond ``divergence_cap``) flags the
    path divergent and halts its integration.
    """
    y = np.array(initial_state, dtype=complex)
    if y.shape != (system.dim,):
        raise ValueError(f"initial state has shape {y.shape}, system expects ({system.dim},)")
    sample_steps = config.sample_steps()
    ptr = 0
    if ptr < len(sample_steps) and sample_steps[ptr] == 0:
        if observer is not None:
            observer(ptr, 0.0, y.copy())
        ptr += 1
    dt = config.dt
    for i in range(config.n_steps):
        t = i * dt
        w = system.draw(streams, dt)
        y = y + system.drift(y, t) * dt + system.noise(y, t, w)
        if ptr < len(sample_steps) and sample_steps[ptr] == i + 1:
            if _divergent(y, divergence_cap):
                return TrajectoryResult(y, i + 1)
            if observer is not None:
                observer(ptr, (i + 1) * dt, y.copy())
            ptr += 1
    if _divergent(y, divergence_cap):
        return TrajectoryResult(y, config.n_steps)
    return TrajectoryResult(y, None)
