"""Compiled fixed-step integration loop for a whole sensor network.

Node-stacked arrays, 0-based node indices. Per step ``k`` (``t_k = k h``):

1. every filter advances over ``[t_{k-1}, t_k)`` holding ``z_hat``/``Z_hat``
   at their ``t_{k-1}`` values;
2. the consensus auxiliaries ``p`` advance with the latched neighbour
   broadcasts and ``z_hat = z(t_k) - p``;
3. triggers are checked in ascending node order; a firing node latches its
   ``z_hat`` (visible to neighbours from step ``k+1``) and runs the
   pull-average-push update of ``Z_hat`` within step ``k``;
4. outputs are recorded every ``stride`` steps.

Status codes returned in ``status[0]``: 0 ok, 1 non-finite consensus state,
2 non-finite filter state, 3 covariance lost positive semidefiniteness.
"""
import numpy as np
from numba import njit

MODE_EVENT = 0
MODE_EVERY_STEP = 1
MODE_CENTRALIZED = 2

PSD_RTOL = 1e-6


@njit(cache=True)
def _filter_step(x, P, zh, Zh, A, Qn, Nnet, h, xo, Po, PZ):
    n = x.shape[0]
    for r in range(n):
        for c in range(n):
            s = 0.0
            for m in range(n):
                s += P[r, m] * Zh[m, c]
            PZ[r, c] = s
    for r in range(n):
        ax = 0.0
        pz = 0.0
        pzx = 0.0
        for m in range(n):
            ax += A[r, m] * x[m]
            pz += P[r, m] * zh[m]
            pzx += PZ[r, m] * x[m]
        xo[r] = x[r] + h * (ax + Nnet * pz - Nnet * pzx)
    for r in range(n):
        for c in range(n):
            ap = 0.0
            pa = 0.0
            pzp = 0.0
            for m in range(n):
                ap += A[r, m] * P[m, c]
                pa += P[r, m] * A[c, m]
                pzp += PZ[r, m] * P[m, c]
            Po[r, c] = P[r, c] + h * (ap + pa + Qn[r, c] - Nnet * pzp)
    for r in range(n):
        for c in range(r + 1, n):
            s = 0.5 * (Po[r, c] + Po[c, r])
            Po[r, c] = s
            Po[c, r] = s


@njit(cache=True)
def integrate(z, zbar, Zinit, Zbar, nb_ptr, nb_idx, kappa1, kappa2, delta, gap_steps,
              h, A, Qn, Nnet, x0, P0, mode, stride, sup_from, record_zhat, debug):
    K = z.shape[0] - 1
    Nn = z.shape[1]
    n = z.shape[2]
    M = K // stride + 1

    xh_out = np.empty((M, Nn, n))
    trP_out = np.empty((M, Nn))
    zerr_out = np.empty((M, Nn))
    zhat_out = np.empty((M if record_zhat else 0, Nn, n))

    cap = Nn * (K + 1)
    ev_step = np.empty(cap, dtype=np.int64)
    ev_node = np.empty(cap, dtype=np.int64)
    ev_z = np.empty((cap if debug else 0, n))
    ev_Z = np.empty((cap if debug else 0, n, n))
    counts = np.zeros(Nn, dtype=np.int64)
    pulls = np.zeros(Nn, dtype=np.int64)
    status = np.zeros(3, dtype=np.int64)
    sup_err = np.zeros(1)

    p = np.zeros((Nn, n))
    p_new = np.zeros((Nn, n))
    zh = z[0].copy()
    Zh = Zinit.copy()
    if mode == MODE_CENTRALIZED:
        for i in range(Nn):
            zh[i] = zbar[0]
            Zh[i] = Zbar
    last = zh.copy()
    latched = zh.copy()
    last_step = np.zeros(Nn, dtype=np.int64)
    Macc = np.zeros((n, n))

    x = np.empty((Nn, n))
    P = np.empty((Nn, n, n))
    xo = np.empty((Nn, n))
    Po = np.empty((Nn, n, n))
    PZ = np.empty((n, n))
    for i in range(Nn):
        x[i] = x0
        P[i] = P0

    ne = 0
    if mode != MODE_CENTRALIZED:
        # implicit seed broadcast at t = 0
        for i in range(Nn):
            ev_step[ne] = 0
            ev_node[ne] = i
            if debug:
                ev_z[ne] = zh[i]
                ev_Z[ne] = Zh[i]
            ne += 1

    rec = 0
    for k in range(0, K + 1):
        if k > 0:
            # 1. filters on values held from t_{k-1}
            for i in range(Nn):
                _filter_step(x[i], P[i], zh[i], Zh[i], A, Qn, Nnet, h, xo[i], Po[i], PZ)
            for i in range(Nn):
                tr = 0.0
                for r in range(n):
                    tr += Po[i, r, r]
                for r in range(n):
                    x[i, r] = xo[i, r]
                    if not np.isfinite(xo[i, r]):
                        status[0] = 2
                    for c in range(n):
                        P[i, r, c] = Po[i, r, c]
                        if not np.isfinite(Po[i, r, c]):
                            status[0] = 2
                    if Po[i, r, r] < -PSD_RTOL * abs(tr):
                        status[0] = 3
                if status[0] != 0:
                    status[1] = k
                    status[2] = i
                    break
            if status[0] != 0:
                break

            # 2. consensus
            if mode == MODE_CENTRALIZED:
                for i in range(Nn):
                    zh[i] = zbar[k]
            else:
                for i in range(Nn):
                    for c in range(n):
                        coup = 0.0
                        for q in range(nb_ptr[i], nb_ptr[i + 1]):
                            coup += zh[i, c] - latched[nb_idx[q], c]
                        p_new[i, c] = p[i, c] + h * (-kappa1 * p[i, c] + kappa2 * coup)
                for i in range(Nn):
                    for c in range(n):
                        p[i, c] = p_new[i, c]
                        zh[i, c] = z[k, i, c] - p[i, c]
                        if not np.isfinite(zh[i, c]):
                            status[0] = 1
                    if status[0] != 0:
                        status[1] = k
                        status[2] = i
                        break
                if status[0] != 0:
                    break

                # 3. triggers, ascending node index
                for i in range(Nn):
                    if mode == MODE_EVERY_STEP:
                        fire = True
                    elif k - last_step[i] < gap_steps:
                        fire = False
                    else:
                        d2 = 0.0
                        for c in range(n):
                            d = zh[i, c] - last[i, c]
                            d2 += d * d
                        fire = np.sqrt(d2) >= delta[i]
                    if not fire:
                        continue
                    for c in range(n):
                        last[i, c] = zh[i, c]
                        latched[i, c] = zh[i, c]
                    last_step[i] = k
                    counts[i] += 1
                    J = nb_ptr[i + 1] - nb_ptr[i]
                    pulls[i] += J
                    if J > 0:
                        for r in range(n):
                            for c in range(n):
                                Macc[r, c] = Zh[i, r, c]
                        for q in range(nb_ptr[i], nb_ptr[i + 1]):
                            j = nb_idx[q]
                            for r in range(n):
                                for c in range(n):
                                    Macc[r, c] = Macc[r, c] + Zh[j, r, c]
                        for r in range(n):
                            for c in range(n):
                                Macc[r, c] = Macc[r, c] / (J + 1)
                        for r in range(n):
                            for c in range(n):
                                Zh[i, r, c] = Macc[r, c]
                        for q in range(nb_ptr[i], nb_ptr[i + 1]):
                            j = nb_idx[q]
                            for r in range(n):
                                for c in range(n):
                                    Zh[j, r, c] = Macc[r, c]
                    ev_step[ne] = k
                    ev_node[ne] = i
                    if debug:
                        ev_z[ne] = zh[i]
                        ev_Z[ne] = Zh[i]
                    ne += 1

        # 4. consensus error and recording
        worst = 0.0
        for i in range(Nn):
            d2 = 0.0
            for c in range(n):
                d = zbar[k, c] - zh[i, c]
                d2 += d * d
            e = np.sqrt(d2)
            if e > worst:
                worst = e
            if k % stride == 0:
                zerr_out[rec, i] = e
        if k >= sup_from and worst > sup_err[0]:
            sup_err[0] = worst
        if k % stride == 0:
            for i in range(Nn):
                tr = 0.0
                for r in range(n):
                    xh_out[rec, i, r] = x[i, r]
                    tr += P[i, r, r]
                    if record_zhat:
                        zhat_out[rec, i, r] = zh[i, r]
                trP_out[rec, i] = tr
                lam = np.linalg.eigvalsh(P[i])
                if lam[0] < -PSD_RTOL * abs(tr):
                    status[0] = 3
                    status[1] = k
                    status[2] = i
            if status[0] != 0:
                break
            rec += 1

    return (xh_out, trP_out, zerr_out, zhat_out, ev_step, ev_node, ev_z, ev_Z, ne,
            counts, pulls, status, sup_err[0])
