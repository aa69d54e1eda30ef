"""Linear SDE plant model and the benchmark tracking trajectory."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalDivergence

SYM_TOL = 1e-12


def _check_psd(name, M):
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError(f"{name} must be square, got shape {M.shape}")
    if M.size and np.max(np.abs(M - M.T)) > SYM_TOL * max(1.0, np.max(np.abs(M))):
        raise ConfigError(f"{name} is not symmetric")
    if M.size and np.linalg.eigvalsh(M)[0] < -SYM_TOL * max(1.0, np.trace(M)):
        raise ConfigError(f"{name} is not positive semidefinite")


@dataclass(frozen=True)
class PlantModel:
    """``dx = A x dt + B dw`` with ``cov(dw) = W dt`` and ``x(0) ~ N(x0_mean, P0)``."""

    A: np.ndarray
    B: np.ndarray
    W: np.ndarray
    x0_mean: np.ndarray
    P0: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        x0 = np.atleast_1d(np.asarray(self.x0_mean, dtype=float))
        P0 = np.atleast_2d(np.asarray(self.P0, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ConfigError(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise ConfigError(f"B must have {n} rows, got {B.shape}")
        if W.shape != (B.shape[1], B.shape[1]):
            raise ConfigError(f"W must be {B.shape[1]}x{B.shape[1]}, got {W.shape}")
        if x0.shape != (n,) or P0.shape != (n, n):
            raise ConfigError("x0_mean / P0 dimensions do not match A")
        _check_psd("W", W)
        _check_psd("P0", P0)
        for name, val in (("A", A), ("B", B), ("W", W), ("x0_mean", x0), ("P0", P0)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def process_noise(self):
        """``B W B^T``, the state-space diffusion intensity."""
        return self.B @ self.W @ self.B.T


@dataclass(frozen=True)
class PlantState:
    t: float
    x: np.ndarray


def step_sde(state, model, h, noise_stream):
    """One Euler-Maruyama step; ``noise_stream`` is a ``numpy.random.Generator``."""
    if h <= 0:
        raise ValueError("step must be positive")
    x = state.x
    dw = _wiener_increment(model, h, noise_stream)
    x_next = x + h * (model.A @ x) + model.B @ dw
    if not np.all(np.isfinite(x_next)):
        raise NumericalDivergence(f"plant state became non-finite at t={state.t + h}")
    return PlantState(state.t + h, x_next)


def _wiener_increment(model, h, stream):
    nw = model.W.shape[0]
    L = _psd_factor(model.W)
    return np.sqrt(h) * (L @ stream.standard_normal(nw))


def _psd_factor(M):
    """Square factor ``L`` with ``L L^T = M`` that tolerates singular ``M``."""
    w, V = np.linalg.eigh(M)
    return V * np.sqrt(np.clip(w, 0.0, None))


def sde_sample_path(model, h, steps, noise_stream, init_stream=None):
    """Euler-Maruyama sample path on ``t_k = k h`` for ``k = 0..steps``.

    The initial state is drawn from ``N(x0_mean, P0)`` when ``init_stream`` is
    given, otherwise the mean is used.
    """
    n = model.n
    x = model.x0_mean.copy()
    if init_stream is not None:
        x = x + _psd_factor(model.P0) @ init_stream.standard_normal(n)
    L = _psd_factor(model.W)
    dW = np.sqrt(h) * (noise_stream.standard_normal((steps, model.W.shape[0])) @ L.T)
    F = np.eye(n) + h * model.A
    drive = dW @ model.B.T
    out = np.empty((steps + 1, n))
    out[0] = x
    for k in range(steps):
        x = F @ x + drive[k]
        out[k + 1] = x
    if not np.all(np.isfinite(out)):
        bad = int(np.argmax(~np.all(np.isfinite(out), axis=1)))
        raise NumericalDivergence("plant sample path overflowed", step=bad)
    return out


def trajectory_state(t):
    """Benchmark 2-D target: positions and velocities ``[x, y, vx, vy]``.

    Vectorised over ``t``; a scalar gives shape ``(4,)``, an array ``(len(t), 4)``.
    """
    t = np.asarray(t, dtype=float)
    out = np.stack([
        np.sin(0.5 * t),
        3.5 * np.sin(0.8 * t),
        0.5 * np.cos(0.5 * t),
        2.8 * np.cos(0.8 * t),
    ], axis=-1)
    return out
