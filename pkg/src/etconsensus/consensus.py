"""Event-triggered dynamic average consensus, one node at a time.

These functions are the readable, per-node form of the protocol. The
simulation engine runs a compiled, node-stacked version of the same
updates; the tests hold the two against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, NumericalDivergence


@dataclass(frozen=True)
class ConsensusConfig:
    kappa1: float
    kappa2: float
    delta: tuple
    tau_min: float

    def __post_init__(self):
        delta = tuple(float(d) for d in np.atleast_1d(self.delta))
        object.__setattr__(self, "delta", delta)
        if not self.kappa1 > 0 or not self.kappa2 > 0:
            raise ConfigError("kappa1 and kappa2 must be positive")
        if any(d < 0 for d in delta):
            raise ConfigError("trigger thresholds must be nonnegative")
        if not self.tau_min > 0:
            raise ConfigError("tau_min must be positive")

    def threshold(self, i):
        """Threshold of 1-based node ``i``; a single value applies to all nodes."""
        return self.delta[0] if len(self.delta) == 1 else self.delta[i - 1]


def min_gap_steps(tau_min, h):
    """Smallest step count ``m`` with ``m h >= tau_min`` (tolerant to rounding)."""
    return max(1, math.ceil(tau_min / h - 1e-9))


@dataclass
class NodeState:
    """Live protocol state of one sensor node.

    ``z_hat`` is derived as ``z_local - p``; it is stored so that trigger checks
    see exactly the value that was broadcast.
    """

    p: np.ndarray
    z_hat: np.ndarray
    Z_hat: np.ndarray
    last_broadcast_z: np.ndarray
    last_event_time: float = 0.0
    event_count: int = 0
    last_event_step: int = 0

    @classmethod
    def initial(cls, z_local0, Z_local):
        z0 = np.array(z_local0, dtype=float)
        return cls(
            p=np.zeros_like(z0),
            z_hat=z0.copy(),
            Z_hat=np.array(Z_local, dtype=float),
            last_broadcast_z=z0.copy(),
        )


@dataclass(frozen=True)
class EventRecord:
    t: float
    node: int
    broadcast_z: np.ndarray = field(repr=False)
    broadcast_Z: np.ndarray = field(repr=False)


def check_trigger(node, t, cfg, i, h=None):
    """Whether node ``i`` (1-based) fires at time ``t``.

    With ``h`` given the dwell requirement is evaluated in whole grid steps
    (``steps * h >= tau_min``), which is how the engine runs; without it the
    continuous-time strict form ``t - last_event_time > tau_min`` is used.
    """
    if h is None:
        dwell_ok = t - node.last_event_time > cfg.tau_min
    else:
        steps = round((t - node.last_event_time) / h)
        dwell_ok = steps >= min_gap_steps(cfg.tau_min, h)
    if not dwell_ok:
        return False
    drift = np.linalg.norm(node.z_hat - node.last_broadcast_z)
    return bool(drift >= cfg.threshold(i))


def step_consensus(node, z_local, z_local_next, neighbor_broadcasts, cfg, h):
    """Forward-Euler step of the auxiliary state ``p``.

    ``neighbor_broadcasts`` are the latched last-transmitted estimates of the
    neighbours. ``z_local`` is accepted for symmetry with the continuous form;
    the update itself only needs the current ``z_hat``.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    coupling = np.zeros_like(node.p)
    for zj in neighbor_broadcasts:
        coupling += node.z_hat - zj
    p_next = node.p + h * (-cfg.kappa1 * node.p + cfg.kappa2 * coupling)
    z_hat_next = np.asarray(z_local_next, dtype=float) - p_next
    if not (np.all(np.isfinite(p_next)) and np.all(np.isfinite(z_hat_next))):
        raise NumericalDivergence("consensus state became non-finite")
    return replace(node, p=p_next, z_hat=z_hat_next)


def on_event_update_Z(i, Z_i, neighbor_Zs):
    """Average own and neighbour matrices with equal weights.

    The caller assigns the returned matrix to node ``i`` and to all of its
    neighbours.
    """
    if len(neighbor_Zs) == 0:
        return np.array(Z_i, dtype=float)
    total = np.array(Z_i, dtype=float)
    for Zj in neighbor_Zs:
        total = total + Zj
    return total / (len(neighbor_Zs) + 1)


def apply_event(Z_list, i, nbrs):
    """Pull-average-push at an event of 0-based node ``i``, in place on ``Z_list``."""
    M = on_event_update_Z(i, Z_list[i], [Z_list[j] for j in nbrs])
    Z_list[i] = M
    for j in nbrs:
        Z_list[j] = M.copy()
    return M
