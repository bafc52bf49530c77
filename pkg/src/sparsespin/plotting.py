"""Figure rendering for the CLI report path.

Each sweep command can render a matplotlib figure next to its delimited
output.  The Agg backend is forced so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_evolve(curves: dict, n: int, path) -> None:
    """QFI density vs normalized time, one curve per graph label.

    ``curves`` maps label -> list of MetricsRecord.
    """
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for label, records in curves.items():
        ax.plot([r.t_norm for r in records],
                [r.qfi_opt / r.n_spins for r in records],
                label=label, lw=1.2)
    ax.axhline(n, color="0.6", ls="--", lw=0.8, label=r"$F_Q = N^2$")
    ax.set_xlabel(r"normalized time $\tilde{t}$")
    ax.set_ylabel(r"$F_Q / N$")
    ax.set_title(f"N = {n}")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_scaling(fits, path) -> None:
    """Max QFI vs N (log-log) and the peak time against the mean-field line."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.2, 3.4))
    for fit in fits:
        ax1.loglog(fit.n_values, fit.max_qfi, "o-", ms=4,
                   label=rf"{fit.kind_label}: $\beta$={fit.beta:.2f}")
        ax2.plot(fit.n_values, fit.t_star, "o", ms=4, label=fit.kind_label)
        ax2.plot(fit.n_values, fit.t_star_pred, "--", lw=0.9, color="0.5")
    ns = np.array(fits[0].n_values, dtype=float)
    ax1.loglog(ns, ns ** 2, "k:", lw=0.8, label=r"$N^2$")
    ax1.set_xlabel("N"); ax1.set_ylabel(r"max $F_Q$"); ax1.legend(fontsize=7)
    ax2.set_xlabel("N"); ax2.set_ylabel(r"$t^{*}$ [$1/\chi_0$]")
    ax2.legend(fontsize=7)
    _save(fig, path)


def plot_gap(rows, path) -> None:
    """Spectral gap vs system size per family, closed forms dashed."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    labels = []
    for r in rows:
        if r.label not in labels:
            labels.append(r.label)
    for k, label in enumerate(labels):
        sub = [r for r in rows if r.label == label]
        color = f"C{k}"
        ax.loglog([r.n_spins for r in sub], [r.gap_numeric for r in sub],
                  "o", ms=4, color=color,
                  label=rf"{label}: $\gamma$={sub[0].gamma_fit:.2f}")
        ax.loglog([r.n_spins for r in sub], [r.gap_closed for r in sub],
                  "--", lw=0.9, color=color)
    ax.set_xlabel("N")
    ax.set_ylabel(r"$\Delta / \chi_0$")
    ax.legend(fontsize=7)
    _save(fig, path)


def plot_strobe(sweep, n: int, path, continuous_qfi: float | None = None) -> None:
    """Normalized QFI vs iteration count, with J^2 and the tripartite
    mutual information in a second panel."""
    ms = [m for m, _, _ in sweep]
    recs = [r for _, r, _ in sweep]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.2, 3.4))
    ax1.plot(ms, [r.qfi_opt / n ** 2 for r in recs], "o-", ms=4)
    if continuous_qfi is not None:
        ax1.axhline(continuous_qfi / n ** 2, color="0.4", ls="--", lw=0.9,
                    label="continuous")
        ax1.legend(fontsize=8)
    ax1.set_xlabel("M"); ax1.set_ylabel(r"$F_Q / N^2$")
    ax2.plot(ms, [r.j2_norm for r in recs], "o-", ms=4, color="C3",
             label=r"$\langle J^2 \rangle / j(j{+}1)$")
    i3 = [r.i3 for r in recs]
    if any(v is not None for v in i3):
        ax2b = ax2.twinx()
        ax2b.plot(ms, i3, "s-", ms=3, color="C4", label=r"$\mathcal{I}_3$")
        ax2b.axhline(0.0, color="C4", ls=":", lw=0.8)
        ax2b.set_ylabel(r"$\mathcal{I}_3$")
    ax2.set_xlabel("M")
    ax2.set_ylabel(r"$\langle J^2 \rangle / j(j{+}1)$")
    ax1.set_title(f"N = {n}")
    _save(fig, path)
