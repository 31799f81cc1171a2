"""Exponential decay-rate fitting and envelope checks against the
theoretical rate chi.

Quantities are compared as squared norms throughout, so every envelope runs
at rate chi (the un-squared third-derivative bound at chi/2 squares to chi).
The guaranteed rate is a lower bound on the decay speed: faster observed
decay passes, slower fails.  Fits and envelope anchors use a window that by
default drops the first 10% of the horizon, where startup transients live.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .inequalities import ThresholdReport

ENVELOPE_QUANTITIES = ("wl2", "wut2", "graduy2", "delta_ux2")


@dataclass(frozen=True)
class DecayFit:
    """Least-squares decay rate of one quantity over a window, and whether
    the quantity stays under its own initial value times e^{-rate (t-t0)}."""

    quantity: str
    t0: float
    t1: float
    rate: float              # fitted rho (log-linear least squares)
    envelope_rate: float     # chi (or the applicable rate) used for the check
    envelope_satisfied: bool | None  # None when theory gives no guarantee
    first_violation: float | None
    n_samples: int


def fit_rate(t: np.ndarray, values: np.ndarray, window: tuple[float, float] | None = None) -> float:
    """Negated least-squares slope of log(values) against t.

    Requires at least 10 strictly positive samples inside the window; exact
    on exact exponentials.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, values = t[sel], values[sel]
    if t.size < 10:
        raise ValueError(f"need at least 10 samples in the fit window, got {t.size}")
    if not np.all(values > 0.0):
        raise ValueError("decay fit requires strictly positive samples")
    slope = np.polyfit(t, np.log(values), 1)[0]
    return -float(slope)


def check_envelope(t: np.ndarray, values: np.ndarray, rate: float,
                   tol: float) -> tuple[bool, float | None]:
    """value(t) <= value(t[0]) * exp(-rate (t - t[0])) * (1 + tol) pointwise.

    Returns (ok, time of first violation or None).  Monotone in tol.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    envelope = values[0] * np.exp(-rate * (t - t[0])) * (1.0 + tol)
    bad = values > envelope
    if bad.any():
        return False, float(t[np.argmax(bad)])
    return True, None


@dataclass
class RunReport:
    """Envelope verdicts, fitted rates and residual summary for one run."""

    chi: float
    threshold: ThresholdReport
    fits: list
    window: tuple[float, float]
    tol: float
    max_r_l2: float
    max_r_w: float
    no_guarantee: bool

    @property
    def n_passed(self) -> int:
        return sum(1 for f in self.fits if f.envelope_satisfied)

    @property
    def n_total(self) -> int:
        return len(self.fits)


def decay_report(table: dict, threshold: ThresholdReport, tol: float = 0.05,
                 window: tuple[float, float] | None = None) -> RunReport:
    """Envelope checks at rate chi for wl2, wut2, graduy2 and delta_ux2.

    When the threshold says the datum is inadmissible the theory guarantees
    nothing; fits are still reported as observations but no pass/fail
    verdict is asserted.
    """
    t = np.asarray(table["t"], dtype=float)
    if window is None:
        window = (t[0] + 0.1 * (t[-1] - t[0]), t[-1])
    sel = (t >= window[0]) & (t <= window[1])
    chi = threshold.chi
    fits = []
    for name in ENVELOPE_QUANTITIES:
        series = np.asarray(table[name], dtype=float)[sel]
        ts = t[sel]
        try:
            rho = fit_rate(ts, series)
        except ValueError:
            rho = math.nan
        if threshold.admissible:
            ok, first_bad = check_envelope(ts, series, chi, tol)
        else:
            ok, first_bad = None, None
        fits.append(DecayFit(quantity=name, t0=window[0], t1=window[1], rate=rho,
                             envelope_rate=chi, envelope_satisfied=ok,
                             first_violation=first_bad, n_samples=int(ts.size)))
    with np.errstate(invalid="ignore"):
        max_r_l2 = float(np.nanmax(np.abs(np.asarray(table["r_l2"])[sel]))) if sel.any() else math.nan
        max_r_w = float(np.nanmax(np.abs(np.asarray(table["r_w"])[sel]))) if sel.any() else math.nan
    return RunReport(chi=chi, threshold=threshold, fits=fits, window=window, tol=tol,
                     max_r_l2=max_r_l2, max_r_w=max_r_w,
                     no_guarantee=not threshold.admissible)


def format_report(report: RunReport) -> str:
    """Human-readable summary with a machine-readable PASS footer."""
    lines = []
    thr = report.threshold
    lines.append(f"decay rate chi = {report.chi:.6g}")
    lines.append(f"threshold: ||u0|| = {thr.u0_norm:.6g}, m = {thr.m:.6g}, "
                 f"admissible = {thr.admissible}")
    lines.append(f"fit window: [{report.window[0]:.6g}, {report.window[1]:.6g}], "
                 f"envelope tol = {report.tol:g}")
    if report.no_guarantee:
        lines.append("NO-GUARANTEE: datum is not admissible; observations only, "
                     "no envelope verdicts asserted")
    for f in report.fits:
        if f.envelope_satisfied is None:
            verdict = "observed"
        elif f.envelope_satisfied:
            verdict = "PASS"
        else:
            verdict = f"FAIL (first violation at t = {f.first_violation:.6g})"
        lines.append(f"  {f.quantity:>10s}: fitted rate = {f.rate:.6g} "
                     f"(envelope rate {f.envelope_rate:.6g}) ... {verdict}")
    lines.append(f"identity residuals over window: max|r_l2| = {report.max_r_l2:.3e}, "
                 f"max|r_w| = {report.max_r_w:.3e}")
    if report.no_guarantee:
        lines.append("PASS=NA (no-guarantee)")
    else:
        lines.append(f"PASS={report.n_passed}/{report.n_total}")
    return "\n".join(lines) + "\n"
