"""Per-node continuous-time Kalman-Bucy filter fed by consensus estimates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalDivergence

PSD_RTOL = 1e-6


@dataclass(frozen=True)
class FilterState:
    x_hat: np.ndarray
    P: np.ndarray

    @classmethod
    def initial(cls, model):
        return cls(model.x0_mean.copy(), model.P0.copy())


def sym(M):
    return 0.5 * (M + M.T)


def step_filter(f, z_hat, Z_hat, model, N, h, check_psd=True):
    """Explicit Euler step of the information-fed Kalman-Bucy equations.

    The network-average information ``(z_hat, Z_hat)`` is scaled by the
    network size ``N`` to recover the total information.
    """
    if h <= 0 or N < 1:
        raise ValueError("need h > 0 and N >= 1")
    A = model.A
    x, P = f.x_hat, f.P
    PZ = P @ Z_hat
    x_next = x + h * (A @ x + N * (P @ z_hat) - N * (PZ @ x))
    P_next = sym(P + h * (A @ P + P @ A.T + model.process_noise - N * (PZ @ P)))
    if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(P_next))):
        raise NumericalDivergence("filter state became non-finite")
    if check_psd:
        lam_min = np.linalg.eigvalsh(P_next)[0]
        if lam_min < -PSD_RTOL * abs(np.trace(P_next)):
            raise NumericalDivergence(f"covariance lost positive semidefiniteness (min eig {lam_min:.3e})")
    return FilterState(x_next, P_next)
