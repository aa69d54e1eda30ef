"""Scenario orchestration: single runs, baselines, delta sweeps and metrics."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import engine
from .errors import NumericalDivergence
from .plant import sde_sample_path, trajectory_state
from .scenario import ScenarioConfig
from .sensing import info_vector, measure_series
from .streams import stream

log = logging.getLogger(__name__)

_MODE_CODES = {
    "event-triggered": engine.MODE_EVENT,
    "every-step": engine.MODE_EVERY_STEP,
    "centralized-oracle": engine.MODE_CENTRALIZED,
}
_STATUS_TEXT = {
    1: "consensus state became non-finite",
    2: "filter state became non-finite",
    3: "filter covariance lost positive semidefiniteness",
}


@dataclass(frozen=True)
class Metrics:
    E_s: float
    F_s: float
    F_norm: float


@dataclass
class SimulationResult:
    """Recorded output of one run; node axes are 0-based, times are ``k h``.

    ``x_hat``/``trace_P``/``z_err`` (and ``z_hat`` when requested) are sampled
    every ``stride`` steps. ``z_local`` holds the full per-step information
    vectors when the run was asked to keep signals.
    """

    t: np.ndarray
    x_hat: np.ndarray
    trace_P: np.ndarray
    z_err: np.ndarray
    truth: np.ndarray
    event_steps: np.ndarray
    event_nodes: np.ndarray
    event_counts: np.ndarray
    pull_messages: np.ndarray
    sup_consensus_error: float
    h: float
    stride: int
    T_f: float
    z_hat: np.ndarray = None
    z_local: np.ndarray = None
    broadcast_z: np.ndarray = None
    broadcast_Z: np.ndarray = None
    metrics: Metrics = None

    @property
    def event_times(self):
        return self.event_steps * self.h

    def event_index(self):
        """Per-node ordinal of each logged event; the t=0 seed is ``k = 0``."""
        k = np.empty_like(self.event_nodes)
        seen = {}
        for e, node in enumerate(self.event_nodes):
            k[e] = seen.get(node, 0)
            seen[node] = k[e] + 1
        return k

    def node_event_steps(self, i):
        """Event steps of 0-based node ``i`` including the seed."""
        return self.event_steps[self.event_nodes == i]


def truth_series(cfg):
    K = cfg.steps
    if cfg.truth_mode == "sde-sample":
        return sde_sample_path(cfg.plant, cfg.h, K, stream(cfg.seed, "process"),
                               stream(cfg.seed, "initial-state"))
    return trajectory_state(np.arange(K + 1) * cfg.h)


def information_signals(cfg, truth=None):
    """Per-step information vectors ``z`` of shape ``(K+1, N, n)``."""
    if truth is None:
        truth = truth_series(cfg)
    z = np.empty((truth.shape[0], len(cfg.sensors), cfg.n))
    for i, s in enumerate(cfg.sensors, start=1):
        noise = stream(cfg.seed, "measurement", i) if cfg.measurement_noise else None
        z[:, i - 1, :] = info_vector(s, measure_series(s, truth, noise))
    return z


def _neighbor_csr(graph):
    A = graph.adjacency
    ptr = [0]
    idx = []
    for i in range(graph.node_count):
        nb = np.flatnonzero(A[i])
        idx.extend(int(j) for j in nb)
        ptr.append(len(idx))
    return np.array(ptr, dtype=np.int64), np.array(idx, dtype=np.int64)


def run_scenario(cfg, *, keep_signals=False, record_zhat=False, debug_broadcasts=False,
                 sup_from_time=None):
    """Simulate ``cfg`` once and return a :class:`SimulationResult`.

    ``sup_from_time`` (default ``T_f / 2``) sets where the running supremum of
    the worst node's consensus error starts.
    """
    K = cfg.steps
    truth = truth_series(cfg)
    z = information_signals(cfg, truth)
    Nn = z.shape[1]
    zbar = z.sum(axis=1) / Nn
    Zinit = np.stack([s.info_matrix for s in cfg.sensors])
    Zbar = Zinit.sum(axis=0) / Nn
    nb_ptr, nb_idx = _neighbor_csr(cfg.graph)
    if sup_from_time is None:
        sup_from_time = cfg.T_f / 2
    sup_from = int(np.ceil(sup_from_time / cfg.h - 1e-9))

    out = engine.integrate(
        z, zbar, Zinit, Zbar, nb_ptr, nb_idx,
        cfg.consensus.kappa1, cfg.consensus.kappa2, cfg.delta_vector(), cfg.gap_steps,
        cfg.h, np.ascontiguousarray(cfg.plant.A), np.ascontiguousarray(cfg.plant.process_noise),
        float(cfg.N), cfg.plant.x0_mean.copy(), np.ascontiguousarray(cfg.plant.P0),
        _MODE_CODES[cfg.comm_mode], cfg.output_stride, sup_from, record_zhat, debug_broadcasts,
    )
    (xh, trP, zerr, zhat, ev_step, ev_node, ev_z, ev_Z, ne,
     counts, pulls, status, sup_err) = out
    if status[0] != 0:
        raise NumericalDivergence(_STATUS_TEXT[int(status[0])], step=int(status[1]),
                                  node=int(status[2]) + 1)

    rec = np.arange(0, K + 1, cfg.output_stride)
    res = SimulationResult(
        t=rec * cfg.h,
        x_hat=xh,
        trace_P=trP,
        z_err=zerr,
        truth=truth[rec],
        event_steps=ev_step[:ne].copy(),
        event_nodes=ev_node[:ne].copy(),
        event_counts=counts,
        pull_messages=pulls,
        sup_consensus_error=float(sup_err),
        h=cfg.h,
        stride=cfg.output_stride,
        T_f=cfg.T_f,
        z_hat=zhat if record_zhat else None,
        z_local=z if keep_signals else None,
        broadcast_z=ev_z[:ne].copy() if debug_broadcasts else None,
        broadcast_Z=ev_Z[:ne].copy() if debug_broadcasts else None,
    )
    res.metrics = compute_metrics(res, cfg)
    return res


def run_baseline(cfg, **kwargs):
    """Ideal communication reference: every node broadcasts at every step."""
    return run_scenario(cfg.with_overrides(["mode=every-step"]), **kwargs)


def compute_metrics(res, cfg):
    """Time- and node-averaged estimation error and event frequency.

    The error integral uses the trapezoid rule on the recorded grid; the
    t=0 seed broadcasts are not counted as events.
    """
    Nn = res.x_hat.shape[1]
    err = np.linalg.norm(res.x_hat - res.truth[:, None, :], axis=2)
    integral = np.trapezoid(err, res.t, axis=0).sum() if res.t.size > 1 else 0.0
    E_s = float(integral / (Nn * cfg.T_f))
    F_s = float(np.sum(res.event_counts) / (Nn * cfg.T_f))
    return Metrics(E_s=E_s, F_s=F_s, F_norm=F_s * cfg.h)


@dataclass(frozen=True)
class SweepRow:
    delta: float
    E: float
    F: float
    F_norm: float


def _sweep_task(args):
    raw, delta, seed = args
    cfg = ScenarioConfig.from_dict(raw, validate=False)
    cfg = cfg.with_overrides([f"consensus.delta={delta!r}", f"sim.seed={seed}"], validate=False)
    try:
        return delta, seed, run_scenario(cfg).metrics
    except NumericalDivergence as exc:
        raise NumericalDivergence(f"{exc} [delta={delta}, seed={seed}]", exc.step, exc.node) from exc


def sweep_delta(cfg, deltas, S, jobs=1):
    """Average metrics over ``S`` seeds (``cfg.seed + s``) for each threshold."""
    if S < 1:
        raise ValueError("need at least one repetition")
    deltas = [float(d) for d in deltas]
    tasks = [(cfg.raw, d, cfg.seed + s) for d in deltas for s in range(S)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_task, tasks))
    else:
        results = [_sweep_task(t) for t in tasks]
    by_key = {(d, seed): m for d, seed, m in results}
    rows = []
    for d in deltas:
        ms = [by_key[(d, cfg.seed + s)] for s in range(S)]
        E = sum(m.E_s for m in ms) / S
        F = sum(m.F_s for m in ms) / S
        rows.append(SweepRow(delta=d, E=E, F=F, F_norm=F * cfg.h))
        log.info("delta=%g E=%.6g F=%.6g F_norm=%.4g", d, E, F, F * cfg.h)
    return rows
