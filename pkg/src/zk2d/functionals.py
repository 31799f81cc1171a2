"""Energy functionals of a modal state and the residuals of the two
differential energy laws the solver is supposed to honor:

    d/dt ||u||^2            + trace0                                = 0
    d/dt ((1+x), u^2) + trace0 + 3||u_x||^2 + ||u_y||^2 - 1/2 ||u||^4_L4 = 0

where trace0 = int_0^B u_x^2(0,y,t) dy.  All y-integrals are exact through
Parseval in the sine basis; x-integrals use the composite trapezoid on the
solver grid, matching its second-order accuracy.  u_t is reconstructed by
centered time differences of recorded states, deliberately independent of
the stepper so that identity residuals expose stepper bugs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import SineBasis
from .config import DomainSpec, GridSpec
from .operators import d3x_full, dx_at_left, dx_full

CSV_COLUMNS = ("t", "l2", "wl2", "ux2", "uy2", "l4_4", "uyy2", "graduy2",
               "delta_ux2", "ut2", "wut2", "trace0", "sup2_bound",
               "sup2_meas", "r_l2", "r_w")


@dataclass
class EnergyRecord:
    """All monitored functionals at one time; squared norms throughout."""

    t: float
    l2: float
    wl2: float
    ux2: float
    uy2: float
    l4_4: float
    uyy2: float
    graduy2: float
    delta_ux2: float
    ut2: float
    wut2: float
    trace0: float
    sup2_bound: float
    sup2_meas: float
    r_l2: float
    r_w: float

    def as_row(self):
        return [getattr(self, name) for name in CSV_COLUMNS]


def records_to_table(records) -> dict:
    return {name: np.array([getattr(r, name) for r in records]) for name in CSV_COLUMNS}


class Diagnostics:
    """Functional evaluation bound to one (domain, grid) pair.

    Pure functions of immutable snapshots; safe to share across workers.
    """

    def __init__(self, domain: DomainSpec, grid: GridSpec):
        self.domain = domain
        self.grid = grid
        self.basis = SineBasis(grid.N, domain.B, grid.K)
        self.x = grid.x_nodes(domain)
        self.h = domain.L / grid.M
        self.weight_x = 1.0 + self.x

    def _trapz(self, rows: np.ndarray) -> float:
        return float(np.trapezoid(rows, self.x))

    # --- individual functionals -------------------------------------------

    def l2(self, g: np.ndarray) -> float:
        return self._trapz((g ** 2).sum(axis=0))

    def weighted_l2(self, g: np.ndarray) -> float:
        """((1+x), u^2); satisfies l2 <= weighted_l2 <= (1+L) l2."""
        return self._trapz(self.weight_x * (g ** 2).sum(axis=0))

    def boundary_trace_x0(self, g: np.ndarray) -> float:
        """int_0^B u_x^2(0,y) dy = sum_j (d_x g_j(0))^2 by Parseval."""
        return float((dx_at_left(g, self.h) ** 2).sum())

    def grad_split(self, g: np.ndarray) -> tuple[float, float, float]:
        """(||u_x||^2, ||u_y||^2, ||u_xy||^2)."""
        gx = dx_full(g, self.h)
        lam = self.basis.lam[:, None]
        ux2 = self._trapz((gx ** 2).sum(axis=0))
        uy2 = self._trapz((lam * g ** 2).sum(axis=0))
        uxy2 = self._trapz((lam * gx ** 2).sum(axis=0))
        return ux2, uy2, uxy2

    def delta_ux2(self, g: np.ndarray) -> float:
        """||u_xxx + u_xyy||^2 via the full-grid operators, Parseval in y."""
        field = d3x_full(g, self.h) - self.basis.lam[:, None] * dx_full(g, self.h)
        return self._trapz((field ** 2).sum(axis=0))

    def quartic(self, g: np.ndarray, synth: np.ndarray | None = None) -> float:
        """||u||^4_{L^4}: midpoint in y, trapezoid in x."""
        U = self.basis.synthesize(g) if synth is None else synth
        return self._trapz(self.basis.weight * (U ** 4).sum(axis=0))

    def sup_bound(self, g: np.ndarray, synth: np.ndarray | None = None) -> tuple[float, float]:
        """(2[||u||^2_{H1_0} + ||u_xy||^2], measured grid sup of u^2).

        The first value bounds the second; a violation would flag a broken
        state rather than be assumed away.
        """
        ux2, uy2, uxy2 = self.grad_split(g)
        bound = 2.0 * (self.l2(g) + ux2 + uy2 + uxy2)
        U = self.basis.synthesize(g) if synth is None else synth
        return bound, float((U ** 2).max())

    def ut_functionals(self, g_before: np.ndarray, g_after: np.ndarray,
                       spacing: float) -> tuple[float, float]:
        """(||u_t||^2, ((1+x), u_t^2)) from the centered difference quotient
        of states recorded at t -+ spacing."""
        gt = (g_after - g_before) / (2.0 * spacing)
        return self.l2(gt), self.weighted_l2(gt)

    def ut_one_sided(self, g0: np.ndarray, g1: np.ndarray, g2: np.ndarray,
                     spacing: float) -> tuple[float, float]:
        """Second-order one-sided difference quotient at the series edge
        (g0 is the edge state, g1 and g2 the two neighbours inward)."""
        gt = (-3.0 * g0 + 4.0 * g1 - g2) / (2.0 * spacing)
        return self.l2(gt), self.weighted_l2(gt)

    # --- records ------------------------------------------------------------

    def record(self, state) -> EnergyRecord:
        """Instantaneous functionals; time-difference fields stay NaN until
        the surrounding records exist (see solver.run)."""
        g = state.g
        U = self.basis.synthesize(g)
        ux2, uy2, uxy2 = self.grad_split(g)
        uyy2 = self._trapz(((self.basis.lam ** 2)[:, None] * g ** 2).sum(axis=0))
        bound, meas = self.sup_bound(g, synth=U)
        return EnergyRecord(
            t=state.t,
            l2=self.l2(g),
            wl2=self.weighted_l2(g),
            ux2=ux2,
            uy2=uy2,
            l4_4=self.quartic(g, synth=U),
            uyy2=uyy2,
            graduy2=uxy2 + uyy2,
            delta_ux2=self.delta_ux2(g),
            ut2=math.nan,
            wut2=math.nan,
            trace0=self.boundary_trace_x0(g),
            sup2_bound=bound,
            sup2_meas=meas,
            r_l2=math.nan,
            r_w=math.nan,
        )


def _ddt(series: np.ndarray, spacing: float) -> np.ndarray:
    """Time derivative of a sampled series.

    Fourth-order centered differences in the interior and fourth-order
    one-sided stencils at the two records on each edge; for series shorter
    than five records, falls back to second-order differences.  The higher
    order matters: the identity residuals are compared against tolerances
    ~1e-2 of the initial energy while the series itself moves at rates of
    order chi, so a second-order quotient would dominate the residual.
    """
    n = series.size
    if n < 2:
        return np.full(n, np.nan)
    if n < 5:
        out = np.empty(n)
        out[1:-1] = (series[2:] - series[:-2]) / (2 * spacing)
        out[0] = (series[1] - series[0]) / spacing if n < 3 else \
            (-3 * series[0] + 4 * series[1] - series[2]) / (2 * spacing)
        out[-1] = (series[-1] - series[-2]) / spacing if n < 3 else \
            (3 * series[-1] - 4 * series[-2] + series[-3]) / (2 * spacing)
        return out
    out = np.empty(n)
    out[2:-2] = (series[:-4] - 8 * series[1:-3] + 8 * series[3:-1] - series[4:]) / (12 * spacing)
    c_edge = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    c_next = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
    out[0] = c_edge @ series[:5] / spacing
    out[1] = c_next @ series[:5] / spacing
    out[-1] = -(c_edge @ series[-5:][::-1]) / spacing
    out[-2] = -(c_next @ series[-5:][::-1]) / spacing
    return out


def identity_residuals(table: dict, spacing: float, window=None) -> tuple[np.ndarray, np.ndarray]:
    """Residuals (r_l2, r_w) of the two energy laws over a record table.

    r_l2 = d/dt l2 + trace0
    r_w  = d/dt wl2 + trace0 + 3 ux2 + uy2 - l4_4 / 2

    ``window = (t0, t1)`` restricts the returned arrays to records inside it
    (values outside are NaN); the surrounding entries still feed the
    difference stencils.  Requires at least 3 records at uniform cadence.
    """
    t = table["t"]
    if t.size < 3:
        raise ValueError(f"need at least 3 records to form residuals, got {t.size}")
    dl2 = _ddt(table["l2"], spacing)
    dwl2 = _ddt(table["wl2"], spacing)
    r_l2 = dl2 + table["trace0"]
    r_w = dwl2 + table["trace0"] + 3.0 * table["ux2"] + table["uy2"] - 0.5 * table["l4_4"]
    if window is not None:
        t0, t1 = window
        mask = (t < t0) | (t > t1)
        r_l2 = r_l2.copy()
        r_w = r_w.copy()
        r_l2[mask] = np.nan
        r_w[mask] = np.nan
    return r_l2, r_w
