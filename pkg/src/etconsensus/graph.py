"""Undirected communication graphs and their spectral quantities.

Nodes are 1-based at the public surface (constructors, ``neighbors``, logs)
and 0-based inside adjacency matrices.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


def jacobi_eigvalsh(M, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    M : array_like, shape (m, m)
        Symmetric matrix.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm falls below
        ``tol`` times the Frobenius norm of ``M``.

    Returns
    -------
    ndarray, shape (m,)
        Eigenvalues in ascending order.
    """
    a = np.array(M, dtype=float, copy=True)
    m = a.shape[0]
    if a.shape != (m, m):
        raise ValueError("matrix must be square")
    if m == 0:
        return np.zeros(0)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(m)
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.triu(a, 1) ** 2) * 2.0)
        if off <= tol * scale:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J acting on rows/cols p, q
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")
    return np.sort(np.diag(a))


def max_singular_value(M):
    """Largest singular value, via the Jacobi spectrum of ``M^T M`` or ``M M^T``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0.0
    G = M @ M.T if M.shape[0] <= M.shape[1] else M.T @ M
    return math.sqrt(max(jacobi_eigvalsh(G)[-1], 0.0))


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``1..node_count``.

    ``edges`` is normalised to a frozenset of sorted pairs; duplicates given
    in either orientation collapse, self-loops are rejected.
    """

    node_count: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not isinstance(self.node_count, (int, np.integer)) or self.node_count < 1:
            raise ConfigError(f"node_count must be a positive integer, got {self.node_count!r}")
        norm = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise ConfigError(f"self-loop on node {i}")
            for v in (i, j):
                if not 1 <= v <= self.node_count:
                    raise ConfigError(f"edge ({i}, {j}) references node outside 1..{self.node_count}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "node_count", int(self.node_count))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edge_list(cls, node_count, edges):
        return cls(node_count, frozenset(tuple(e) for e in edges))

    @property
    def adjacency(self):
        A = np.zeros((self.node_count, self.node_count))
        for i, j in self.edges:
            A[i - 1, j - 1] = A[j - 1, i - 1] = 1.0
        return A

    def degree(self, i):
        return len(neighbors(self, i))

    def edge_list(self):
        return sorted(self.edges)


def neighbors(g, i):
    """1-based neighbour set of node ``i``."""
    if not 1 <= i <= g.node_count:
        raise IndexError(f"node {i} out of range 1..{g.node_count}")
    out = set()
    for a, b in g.edges:
        if a == i:
            out.add(b)
        elif b == i:
            out.add(a)
    return out


def laplacian(g):
    A = g.adjacency
    return np.diag(A.sum(axis=1)) - A


def is_connected(g):
    """Breadth-first reachability from node 1."""
    seen = {1}
    queue = deque([1])
    while queue:
        u = queue.popleft()
        for v in neighbors(g, u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == g.node_count


def algebraic_connectivity(g):
    """Second-smallest Laplacian eigenvalue; 0 for single-node graphs."""
    if g.node_count < 2:
        return 0.0
    lam = jacobi_eigvalsh(laplacian(g))[1]
    # clamp rounding noise around the zero eigenvalue of disconnected graphs
    return float(lam) if lam > 1e-10 else 0.0


def centering_adjacency_gain(g, n=1):
    """Return ``(sigma_max(H A), sigma_max(1^T A / N))``.

    ``H = I - 11^T/N`` is the centering projector. Kronecker products with
    ``I_n`` leave singular values unchanged, so ``n`` only validates input.
    """
    if n < 1:
        raise ValueError("state dimension must be >= 1")
    N = g.node_count
    A = g.adjacency
    H = np.eye(N) - np.ones((N, N)) / N
    return max_singular_value(H @ A), max_singular_value(np.ones((1, N)) @ A / N)


# --- construction helpers -------------------------------------------------

def ring_graph(N):
    if N < 3:
        return path_graph(N)
    return Graph(N, frozenset((i, i % N + 1) for i in range(1, N + 1)))


def path_graph(N):
    return Graph(N, frozenset((i, i + 1) for i in range(1, N)))


def complete_graph(N):
    return Graph(N, frozenset((i, j) for i in range(1, N + 1) for j in range(i + 1, N + 1)))


def random_graph(N, p, seed=None):
    """Erdos-Renyi G(N, p); the stdlib RNG keeps graph tests cheap."""
    rnd = random.Random(seed)
    return Graph(N, frozenset(
        (i, j) for i in range(1, N + 1) for j in range(i + 1, N + 1) if rnd.random() < p
    ))
