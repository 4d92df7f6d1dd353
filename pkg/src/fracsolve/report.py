"""Figure rendering for the CLI report path (written next to the CSV)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def plot_snapshots(field, levels, path: str) -> None:
    """Solution profiles u(x, t) at the emitted snapshot levels."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for j in levels:
        ax.plot(field.grid.x, field.values[j], label=f"t = {field.grid.t[j]:.3g}")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_convergence(tasks, gimels, path: str) -> None:
    """Max error vs grid size, one line per fractional order."""
    by_nu: dict[float, list[tuple[int, float]]] = {}
    for (nu, K, J), gimel in zip(tasks, gimels):
        by_nu.setdefault(nu, []).append((K, gimel))
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for nu, pts in sorted(by_nu.items()):
        pts.sort()
        ax.loglog([K for K, _ in pts], [g for _, g in pts], "o-", label=f"nu = {nu:g}")
    ax.set_xlabel("K = J")
    ax.set_ylabel("max error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_thresholds(table, samples, path: str) -> None:
    """Positivity thresholds vs horizon; kernel curves when sampled."""
    ncols = 2 if samples else 1
    fig, axes = plt.subplots(1, ncols, figsize=(6.4 * ncols, 4.2), squeeze=False)
    ax = axes[0][0]
    ts = [row[0] for row in table]
    ax.plot(ts, [row[1] for row in table], "s-", label="nu_hat")
    for j in range(3):
        ax.plot(ts, [row[2][j] for row in table], "o-", label=f"nu*_{j+1}")
    ax.set_xlabel("t*")
    ax.set_ylabel("threshold")
    ax.legend(fontsize=8)
    if samples:
        ax2 = axes[0][1]
        tgrid = [s[0] for s in samples]
        ax2.plot(tgrid, [s[1] for s in samples], label="omega")
        for j in range(3):
            ax2.plot(tgrid, [s[2][j] for s in samples], label=f"N_{j+1}")
        ax2.axhline(0.0, color="k", lw=0.5)
        ax2.set_xlabel("t")
        ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
