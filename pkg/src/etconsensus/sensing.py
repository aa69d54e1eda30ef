"""Linear sensors and their information-form measurements."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class SensorModel:
    """Measurement ``y = C x + v`` with ``v ~ N(0, R)``.

    ``R`` is factored once by Cholesky; a non positive-definite ``R`` raises
    :class:`ConfigError`. Scalars are accepted for 1x1 ``R``.
    """

    C: np.ndarray
    R: np.ndarray
    gain: np.ndarray = field(init=False, repr=False)
    info_matrix: np.ndarray = field(init=False, repr=False)
    chol_R: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        ny = C.shape[0]
        if R.shape != (ny, ny):
            raise ConfigError(f"R must be {ny}x{ny} for C with {ny} rows, got {R.shape}")
        if np.max(np.abs(R - R.T)) > 1e-12 * max(1.0, np.max(np.abs(R))):
            raise ConfigError("R is not symmetric")
        try:
            L = np.linalg.cholesky(R)
        except np.linalg.LinAlgError as exc:
            raise ConfigError("R is not positive definite") from exc
        # C^T R^{-1} via two triangular solves on the Cholesky factor
        Linv_C = np.linalg.solve(L, C)
        gain = np.linalg.solve(L.T, Linv_C).T
        Z = gain @ C
        Z = 0.5 * (Z + Z.T)
        for name, val in (("C", C), ("R", R), ("gain", gain), ("info_matrix", Z), ("chol_R", L)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.C.shape[1]

    @property
    def ny(self):
        return self.C.shape[0]


def measure(s, x, noise_stream=None):
    """Sample ``y = C x + v``. ``noise_stream=None`` forces ``v = 0``."""
    y = s.C @ np.asarray(x, dtype=float)
    if noise_stream is not None:
        y = y + s.chol_R @ noise_stream.standard_normal(s.ny)
    return y


def measure_series(s, X, noise_stream=None):
    """Vectorised :func:`measure` over rows of ``X`` (shape ``(T, n)``).

    Draws the same normals, in the same order, as repeated ``measure`` calls.
    """
    X = np.asarray(X, dtype=float)
    Y = X @ s.C.T
    if noise_stream is not None:
        Y = Y + noise_stream.standard_normal((X.shape[0], s.ny)) @ s.chol_R.T
    return Y


def info_vector(s, y):
    """Information vector ``C^T R^{-1} y``; works row-wise on 2-D ``y``."""
    y = np.asarray(y, dtype=float)
    return y @ s.gain.T if y.ndim > 1 else s.gain @ y


def info_matrix(s):
    return s.info_matrix


def average_information(sensors, samples):
    """Network-average information vector and matrix ``(z_bar, Z_bar)``."""
    if len(sensors) == 0:
        raise ValueError("need at least one sensor")
    if len(sensors) != len(samples):
        raise ValueError("sensors and samples differ in length")
    N = len(sensors)
    z_bar = sum(np.asarray(z, dtype=float) for z in samples) / N
    Z_bar = sum(s.info_matrix for s in sensors) / N
    return z_bar, Z_bar


def observability_matrix(A, sensors):
    """Stack ``[C; C A; ...; C A^{n-1}]`` for the jointly stacked ``C``."""
    C = np.vstack([s.C for s in sensors])
    n = A.shape[0]
    blocks = [C]
    for _ in range(n - 1):
        blocks.append(blocks[-1] @ A)
    return np.vstack(blocks)


def is_jointly_observable(A, sensors, tol=1e-9):
    sv = np.linalg.svd(observability_matrix(A, sensors), compute_uv=False)
    return sv.size >= A.shape[0] and sv[A.shape[0] - 1] > tol
