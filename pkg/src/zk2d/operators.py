"""Discrete x-derivative operators with the three boundary conditions
g(0) = g(L) = 0 and g_x(L) = 0 eliminated into the stencils.

Unknowns live at the interior nodes x_1 .. x_{M-2}.  The Dirichlet values
g_0 = g_M = 0 drop out directly; the Neumann-type condition g_x(L) = 0 is
imposed as a one-sided constraint that determines the node next to the right
edge: setting the five-point one-sided first derivative at x = L to zero
(with g_M = 0) gives

    g_{M-1} = 3/4 g_{M-2} - 1/3 g_{M-3} + 1/16 g_{M-4}.

The five-point (fourth-order) constraint is used rather than the minimal
three-point one because the 1/h^3 coefficients of the third-derivative rows
touching g_{M-1} would otherwise turn the constraint's O(h^3) value error
into an O(1) local truncation at the closure rows; with this constraint all
rows stay second-order or better and the assembled operator D3 - lam*D1 has
a strictly dissipative spectrum at resolved parameters.

Interior stencils are the standard centered second-order ones; the single
left closure row of D3 is the biased five-point stencil on x_0..x_4 (exact
through quartics).  Bandwidths: D3 (2,3), D1 (2,1).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import lapack

# g_{M-1} as a combination of g_{M-2}, g_{M-3}, g_{M-4}
RIGHT_CONSTRAINT = (0.75, -1.0 / 3.0, 1.0 / 16.0)

# bandwidths of D3 - lam*D1 on the reduced unknowns
BANDS = (2, 3)


def fd_weights(offsets, deriv: int) -> np.ndarray:
    """Finite-difference weights for the given node offsets (in units of h).

    Solves the Vandermonde moment system; the returned weights must still be
    divided by h**deriv.  Exact for polynomials up to degree len(offsets)-1.
    """
    offsets = np.asarray(offsets, dtype=float)
    n = offsets.size
    if deriv >= n:
        raise ValueError(f"need more than {deriv} nodes for derivative order {deriv}")
    V = np.vander(offsets, n, increasing=True).T  # V[k, i] = offsets[i]**k
    rhs = np.zeros(n)
    rhs[deriv] = float(math.factorial(deriv))
    return np.linalg.solve(V, rhs)


def reduce_state(g: np.ndarray, M: int) -> np.ndarray:
    """Full grid row(s) g[..., 0..M] -> reduced unknowns g[..., 1..M-2]."""
    return np.array(g[..., 1:M - 1])


def expand_state(v: np.ndarray, M: int) -> np.ndarray:
    """Reduced unknowns -> full grid values with the boundary conditions applied."""
    shape = v.shape[:-1] + (M + 1,)
    g = np.zeros(shape, dtype=float)
    g[..., 1:M - 1] = v
    a, b, c = RIGHT_CONSTRAINT
    g[..., M - 1] = a * v[..., -1] + b * v[..., -2] + c * v[..., -3]
    return g


def _add_entry(D: np.ndarray, row: int, node: int, coef: float, M: int) -> None:
    # move references to the eliminated nodes into the reduced columns
    if node == 0 or node == M:
        return
    if node == M - 1:
        for k, w in enumerate(RIGHT_CONSTRAINT):
            D[row, M - 2 - k - 1] += coef * w
        return
    D[row, node - 1] += coef


def build_x_operators(M: int, L: float) -> tuple[np.ndarray, np.ndarray, float]:
    """(D1, D3, h) acting on the reduced unknowns at x_1 .. x_{M-2}.

    D1 is the centered first derivative, D3 a second-order-consistent third
    derivative; both fold the boundary conditions into their stencils.
    """
    if M < 8:
        raise ValueError(f"M = {M} is too small for the widest boundary stencil (need M >= 8)")
    h = L / M
    n = M - 2
    D1 = np.zeros((n, n))
    D3 = np.zeros((n, n))
    # left closure of D3: offsets -1..3 around x_1, [-3, 10, -12, 6, -1]/(2h^3)
    left_row = fd_weights((-1, 0, 1, 2, 3), 3)
    centered3 = fd_weights((-2, -1, 0, 1, 2), 3)
    for r in range(n):
        i = r + 1
        _add_entry(D1, r, i + 1, 0.5, M)
        _add_entry(D1, r, i - 1, -0.5, M)
        if i == 1:
            for s, c in zip(range(-1, 4), left_row):
                _add_entry(D3, r, i + s, c, M)
        else:
            for s, c in zip(range(-2, 3), centered3):
                _add_entry(D3, r, i + s, c, M)
    return D1 / h, D3 / h ** 3, h


class BandedLU:
    """LU factorization of a banded matrix via LAPACK gbtrf/gbtrs."""

    def __init__(self, A: np.ndarray, kl: int, ku: int):
        n = A.shape[0]
        ab = np.zeros((2 * kl + ku + 1, n))
        for j in range(n):
            lo, hi = max(0, j - ku), min(n, j + kl + 1)
            for i in range(lo, hi):
                ab[kl + ku + i - j, j] = A[i, j]
        lu, ipiv, info = lapack.dgbtrf(ab, kl, ku)
        if info != 0:
            raise np.linalg.LinAlgError(f"banded factorization failed (info = {info})")
        self._lu, self._ipiv, self._kl, self._ku = lu, ipiv, kl, ku

    def solve(self, b: np.ndarray) -> np.ndarray:
        x, info = lapack.dgbtrs(self._lu, self._kl, self._ku, b, self._ipiv)
        if info != 0:
            raise np.linalg.LinAlgError(f"banded solve failed (info = {info})")
        return x


# --- full-grid derivatives for diagnostics --------------------------------
# These act on all M+1 nodes without boundary-condition elimination and are
# used only by the functionals module (second-order, one-sided at the edges).

def dx_full(g: np.ndarray, h: float) -> np.ndarray:
    """Second-order first derivative along the last axis."""
    out = np.empty_like(g, dtype=float)
    out[..., 1:-1] = (g[..., 2:] - g[..., :-2]) / (2 * h)
    out[..., 0] = (-3 * g[..., 0] + 4 * g[..., 1] - g[..., 2]) / (2 * h)
    out[..., -1] = (3 * g[..., -1] - 4 * g[..., -2] + g[..., -3]) / (2 * h)
    return out


_D3_EDGE0 = fd_weights((0, 1, 2, 3, 4), 3)
_D3_EDGE1 = fd_weights((-1, 0, 1, 2, 3), 3)


def d3x_full(g: np.ndarray, h: float) -> np.ndarray:
    """Second-order third derivative along the last axis."""
    out = np.empty_like(g, dtype=float)
    out[..., 2:-2] = (-g[..., :-4] + 2 * g[..., 1:-3] - 2 * g[..., 3:-1] + g[..., 4:]) / (2 * h ** 3)
    out[..., 0] = np.tensordot(g[..., 0:5], _D3_EDGE0, axes=([-1], [0])) / h ** 3
    out[..., 1] = np.tensordot(g[..., 0:5], _D3_EDGE1, axes=([-1], [0])) / h ** 3
    out[..., -1] = -np.tensordot(g[..., -5:][..., ::-1], _D3_EDGE0, axes=([-1], [0])) / h ** 3
    out[..., -2] = -np.tensordot(g[..., -5:][..., ::-1], _D3_EDGE1, axes=([-1], [0])) / h ** 3
    return out


def dx_at_left(g: np.ndarray, h: float) -> np.ndarray:
    """One-sided second-order d_x at x = 0."""
    return (-3 * g[..., 0] + 4 * g[..., 1] - g[..., 2]) / (2 * h)


def dx_at_right(g: np.ndarray, h: float) -> np.ndarray:
    """One-sided second-order d_x at x = L."""
    return (3 * g[..., -1] - 4 * g[..., -2] + g[..., -3]) / (2 * h)


def dx_at_right_constraint(g: np.ndarray, h: float) -> np.ndarray:
    """The five-point one-sided d_x at x = L that the scheme drives to zero."""
    return (25 * g[..., -1] - 48 * g[..., -2] + 36 * g[..., -3]
            - 16 * g[..., -4] + 3 * g[..., -5]) / (12 * h)
