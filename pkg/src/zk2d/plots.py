"""Figure rendering for the report paths.

Each report-producing command drops PNG figures next to its delimited
output: decay curves with their chi-envelopes, identity residuals,
convergence ladders, and inequality margins.  Rendering is headless (Agg)
and file-based only.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .decay import ENVELOPE_QUANTITIES


def decay_figure(table: dict, report, path) -> None:
    """Semilog decay curves with the envelope anchored at the window start."""
    t = np.asarray(table["t"])
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    t0, t1 = report.window
    sel = (t >= t0) & (t <= t1)
    for name in ENVELOPE_QUANTITIES:
        series = np.asarray(table[name])
        ax.semilogy(t, np.where(series > 0, series, np.nan), label=name, lw=1.2)
        if sel.any():
            anchor = series[sel][0]
            ax.semilogy(t[sel], anchor * np.exp(-report.chi * (t[sel] - t[sel][0])) * (1 + report.tol),
                        "k--", lw=0.7, alpha=0.6)
    ax.axvspan(t[0], t0, color="0.9", zorder=0)
    ax.set_xlabel("t")
    ax.set_ylabel("squared norms")
    ax.set_title(f"decay vs envelope rate chi = {report.chi:.4g} (dashed)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def residual_figure(table: dict, path) -> None:
    t = np.asarray(table["t"])
    fig, ax = plt.subplots(figsize=(7.0, 3.5))
    for name, color in (("r_l2", "tab:blue"), ("r_w", "tab:red")):
        ax.semilogy(t, np.abs(np.asarray(table[name])), label=f"|{name}|", lw=1.0, color=color)
    ax.set_xlabel("t")
    ax.set_ylabel("identity residual")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def convergence_figure(hs, errors, residuals, path) -> None:
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.loglog(hs, errors, "o-", label="max error vs manufactured")
    if residuals is not None:
        ax.loglog(hs, residuals, "s-", label="max |r_l2|")
    guide = errors[0] * (hs / hs[0]) ** 2
    ax.loglog(hs, guide, "k--", lw=0.8, label="order 2")
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.invert_xaxis()
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def margins_figure(margins: dict, path) -> None:
    names = [k for k in ("l4", "l8", "sup", "steklov") if k in margins]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, name in enumerate(names):
        vals = np.sort(np.asarray(margins[name]))
        ax.semilogy(np.arange(vals.size), np.maximum(vals, 1e-300), label=name, lw=1.0)
    ax.set_xlabel("sample (sorted)")
    ax.set_ylabel("inequality margin (RHS - LHS)")
    ax.set_title("all margins must stay above the noise floor")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
