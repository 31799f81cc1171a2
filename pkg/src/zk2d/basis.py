"""Dirichlet sine eigenpairs in y and the modal <-> grid transforms.

The eigenfunctions w_j(y) = sqrt(2/B) sin(j*pi*y/B) satisfy w_j'' + lam_j w_j = 0
with w_j(0) = w_j(B) = 0 and are orthonormal in L2(0,B); lam_j = (j*pi/B)^2.

Quadrature is the midpoint-shifted uniform rule y_k = (k - 1/2) B/K with
weight B/K.  It integrates cos(m*pi*y/B) exactly for all 0 <= m < 2K except
the single aliased line m = 2K, so products of sine modes are integrated
exactly as long as their total frequency stays below 2K.  With K >= 2N the
cubic product u^2 u_x of band-N fields (sine frequencies up to 3N, hence
cosine frequencies up to 4N after projection) is exact except for the lone
4N = 2K interaction at exactly K = 2N; any K >= 2N + 1 is alias-free.
"""

from __future__ import annotations

import numpy as np


def eigenvalue(j: int, B: float) -> float:
    """lam_j = (j*pi/B)^2 for the Dirichlet sine mode j >= 1 on (0,B)."""
    if not (isinstance(j, (int, np.integer)) and j >= 1):
        raise ValueError(f"mode index must be a positive integer, got {j!r}")
    if not B > 0:
        raise ValueError(f"width B must be positive, got {B!r}")
    return (j * np.pi / B) ** 2


class SineBasis:
    """Transform plan between modal coefficients and y-grid values.

    Immutable once built; transforms are pure functions of their inputs and
    may be applied concurrently from multiple workers.
    """

    def __init__(self, N: int, B: float, K: int):
        if K < 2 * N:
            raise ValueError(f"K = {K} violates the dealiasing floor K >= 2N = {2 * N}")
        self.N = int(N)
        self.B = float(B)
        self.K = int(K)
        self.y = (np.arange(1, K + 1) - 0.5) * (B / K)
        self.weight = B / K
        j = np.arange(1, N + 1)
        self.lam = (j * np.pi / B) ** 2
        # synthesis matrix W[k, j] = w_j(y_k); analysis is weight * W^T
        self.W = np.sqrt(2.0 / B) * np.sin(np.outer(self.y, j * np.pi / B))

    def synthesize(self, modal: np.ndarray) -> np.ndarray:
        """Sum_j c_j w_j(y_k); modal (N,) or (N, nx) -> (K,) or (K, nx)."""
        return self.W @ np.asarray(modal)

    def analyze(self, values: np.ndarray) -> np.ndarray:
        """Quadrature projection c_j = sum_k weight * f(y_k) w_j(y_k)."""
        return self.weight * (self.W.T @ np.asarray(values))

    def project_cubic_term(self, u_modal: np.ndarray, ux_modal: np.ndarray) -> np.ndarray:
        """Modal coefficients of u^2 u_x: synthesize, multiply pointwise, analyze.

        Both inputs must belong to the same x-location(s); the result is
        linear in ux_modal and quadratic in u_modal.
        """
        u = self.synthesize(u_modal)
        ux = self.synthesize(ux_modal)
        return self.analyze(u * u * ux)
