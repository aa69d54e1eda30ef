"""Slow network simulator composed only of the per-node protocol functions."""
import numpy as np

from etconsensus.consensus import NodeState, apply_event, check_trigger, step_consensus
from etconsensus.estimator import FilterState, step_filter
from etconsensus.harness import information_signals


def reference_run(cfg):
    z = information_signals(cfg)
    K = z.shape[0] - 1
    Nn = z.shape[1]
    h = cfg.h
    A = cfg.graph.adjacency
    nbrs = [list(np.flatnonzero(A[i])) for i in range(Nn)]
    nodes = [NodeState.initial(z[0, i], s.info_matrix) for i, s in enumerate(cfg.sensors)]
    Zs = [nd.Z_hat for nd in nodes]
    filters = [FilterState.initial(cfg.plant) for _ in range(Nn)]
    latched = [nd.z_hat.copy() for nd in nodes]
    events = [(0, i) for i in range(Nn)]
    zhat = np.empty((K + 1, Nn, cfg.n))
    xhat = np.empty((K + 1, Nn, cfg.n))
    zhat[0] = [nd.z_hat for nd in nodes]
    xhat[0] = [f.x_hat for f in filters]
    for k in range(1, K + 1):
        filters = [step_filter(f, nd.z_hat, Zs[i], cfg.plant, cfg.N, h, check_psd=False)
                   for i, (f, nd) in enumerate(zip(filters, nodes))]
        nodes = [step_consensus(nd, z[k - 1, i], z[k, i], [latched[j] for j in nbrs[i]],
                                cfg.consensus, h)
                 for i, nd in enumerate(nodes)]
        for i, nd in enumerate(nodes):
            if cfg.comm_mode == "every-step" or check_trigger(nd, k * h, cfg.consensus, i + 1, h=h):
                nd.last_broadcast_z = nd.z_hat.copy()
                nd.last_event_time = k * h
                nd.event_count += 1
                latched[i] = nd.z_hat.copy()
                apply_event(Zs, i, nbrs[i])
                events.append((k, i))
        zhat[k] = [nd.z_hat for nd in nodes]
        xhat[k] = [f.x_hat for f in filters]
    return zhat, xhat, events, Zs


from numba import njit


@njit(cache=True)
def _kb_rhs(x, P, A, Q, z_tot, Z_tot):
    PZ = P @ Z_tot
    dx = A @ x + P @ z_tot - PZ @ x
    dP = A @ P + P @ A.T + Q - PZ @ P
    return dx, dP


@njit(cache=True)
def centralized_kb_rk4(z_tot, Z_tot, A, Q, x0, P0, h, sub, stride):
    """Total-information Kalman-Bucy filter, classical RK4 with ``sub`` substeps per
    grid step; the input is held constant over each grid interval."""
    K = z_tot.shape[0] - 1
    n = x0.shape[0]
    M = K // stride + 1
    out = np.empty((M, n))
    x = x0.copy()
    P = P0.copy()
    out[0] = x
    dt = h / sub
    for k in range(1, K + 1):
        u = z_tot[k - 1]
        for _ in range(sub):
            k1x, k1P = _kb_rhs(x, P, A, Q, u, Z_tot)
            k2x, k2P = _kb_rhs(x + 0.5 * dt * k1x, P + 0.5 * dt * k1P, A, Q, u, Z_tot)
            k3x, k3P = _kb_rhs(x + 0.5 * dt * k2x, P + 0.5 * dt * k2P, A, Q, u, Z_tot)
            k4x, k4P = _kb_rhs(x + dt * k3x, P + dt * k3P, A, Q, u, Z_tot)
            x = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            P = P + dt / 6.0 * (k1P + 2.0 * k2P + 2.0 * k3P + k4P)
            P = 0.5 * (P + P.T)
        if k % stride == 0:
            out[k // stride] = x
    return out
