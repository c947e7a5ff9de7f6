"""Deterministic generators for the four benchmark series.

Function-approximation tasks (damped pendulum angular velocity, Bessel J2)
are self-prediction: the model reads a window of the series and predicts
the next sample. The NARMA tasks pair a smooth product-of-sines input with
the nonlinear autoregressive response it drives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DivergenceError(RuntimeError):
    """A recurrence produced NaN or overflow."""


@dataclass(frozen=True)
class PendulumConfig:
    g: float = 9.81
    damping: float = 0.15
    length: float = 1.0
    mass: float = 1.0
    theta0: float = 0.0
    omega0: float = 3.0
    t_end: float = 10.0
    n_points: int = 100

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("n_points must be at least 2")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")


@dataclass(frozen=True)
class BesselConfig:
    order: int = 2
    x_start: float = 0.0
    x_end: float = 20.0
    n_points: int = 100

    def __post_init__(self):
        if self.x_start >= self.x_end:
            raise ValueError("x_start must be below x_end")
        if self.n_points < 2:
            raise ValueError("n_points must be at least 2")
        if self.order < 0:
            raise ValueError("order must be nonnegative")


@dataclass(frozen=True)
class NarmaConfig:
    alpha: float = 0.3
    beta: float = 0.05
    gamma: float = 1.5
    delta: float = 0.1
    order: int = 5
    length: int = 300
    input_alpha: float = 2.11
    input_beta: float = 3.73
    input_gamma: float = 4.11
    input_period: float = 100.0
    init_value: float = 0.0  # warm-up value for the first `order` steps

    def __post_init__(self):
        if self.length <= self.order:
            raise ValueError("length must exceed the NARMA order")


def rk4_integrate(deriv, y0, t_grid) -> np.ndarray:
    """Classical fixed-step RK4 over a uniform grid; returns the state at each node."""
    t_grid = np.asarray(t_grid, dtype=float)
    y = np.asarray(y0, dtype=float)
    out = np.empty((len(t_grid), y.size))
    out[0] = y
    for i in range(len(t_grid) - 1):
        t, h = t_grid[i], t_grid[i + 1] - t_grid[i]
        k1 = deriv(t, y)
        k2 = deriv(t + h / 2, y + h / 2 * k1)
        k3 = deriv(t + h / 2, y + h / 2 * k2)
        k4 = deriv(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
    return out


def pendulum_series(cfg: PendulumConfig = PendulumConfig()) -> np.ndarray:
    """Angular velocity samples of theta'' + (b/m) theta' + (g/L) sin(theta) = 0."""

    def deriv(t, y):
        theta, omega = y
        return np.array(
            [omega, -(cfg.damping / cfg.mass) * omega - (cfg.g / cfg.length) * math.sin(theta)]
        )

    t_grid = np.linspace(0.0, cfg.t_end, cfg.n_points)
    trajectory = rk4_integrate(deriv, [cfg.theta0, cfg.omega0], t_grid)
    return trajectory[:, 1]


def bessel_series_fn(order: int, x: float) -> float:
    """J_order(x) by its power series with term recurrence, truncated near machine epsilon."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    if x < 0:
        raise ValueError("x must be nonnegative")
    half = x / 2.0
    term = half**order / math.gamma(order + 1)
    total = term
    quarter_sq = -(half * half)
    for m in range(1, 200):
        term *= quarter_sq / (m * (m + order))
        total += term
        if abs(term) < 1e-15 * (1.0 + abs(total)):
            break
    return total


def bessel_series(cfg: BesselConfig = BesselConfig()) -> np.ndarray:
    grid = np.linspace(cfg.x_start, cfg.x_end, cfg.n_points)
    return np.array([bessel_series_fn(cfg.order, x) for x in grid])


def narma_input(cfg: NarmaConfig) -> np.ndarray:
    """u_t = 0.1*(sin(2 pi a t/T) sin(2 pi b t/T) sin(2 pi c t/T) + 1) for t = 1..M."""
    t = np.arange(1, cfg.length + 1, dtype=float)
    w = 2.0 * np.pi * t / cfg.input_period
    return 0.1 * (
        np.sin(w * cfg.input_alpha) * np.sin(w * cfg.input_beta) * np.sin(w * cfg.input_gamma)
        + 1.0
    )


def narma_series(u, cfg: NarmaConfig) -> np.ndarray:
    """Drive the order-n NARMA recurrence with input u; warm-up steps hold init_value."""
    u = [float(v) for v in u]
    if len(u) != cfg.length:
        raise ValueError("input length must match the configured series length")
    n0 = cfg.order
    y = [cfg.init_value] * n0
    for t in range(n0, cfg.length):
        window_sum = sum(y[t - n0 : t])
        nxt = (
            cfg.alpha * y[t - 1]
            + cfg.beta * y[t - 1] * window_sum
            + cfg.gamma * u[t - n0] * u[t - 1]
            + cfg.delta
        )
        if not math.isfinite(nxt):
            raise DivergenceError(f"NARMA recurrence diverged at step {t}")
        y.append(nxt)
    return np.array(y)


def normalize_series(series) -> np.ndarray:
    """Affine min-max map of a series onto [-1, 1]."""
    series = np.asarray(series, dtype=float)
    lo, hi = series.min(), series.max()
    if hi <= lo:
        raise ValueError("cannot normalize a constant series")
    return 2.0 * (series - lo) / (hi - lo) - 1.0


TASK_NAMES = ("damped_shm", "bessel", "narma5", "narma10")


def task_series(task: str, **overrides) -> tuple[np.ndarray, np.ndarray]:
    """(input series, target series); function approximation is self-prediction."""
    if task == "damped_shm":
        series = pendulum_series(PendulumConfig(**overrides))
        return series, series
    if task == "bessel":
        series = bessel_series(BesselConfig(**overrides))
        return series, series
    if task in ("narma5", "narma10"):
        order = 5 if task == "narma5" else 10
        cfg = NarmaConfig(order=order, **overrides)
        u = narma_input(cfg)
        return u, narma_series(u, cfg)
    raise ValueError(f"unknown task {task!r}")
