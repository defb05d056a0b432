"""Figure rendering for the report path.

Every CLI report renders a PNG next to its delimited output.  Figures are
deterministic: the Agg backend, fixed sizes and no timestamps, so repeated
runs with the same configuration produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fourier import FourierTable
from .operators import GridChain, NormCurve

_FIGSIZE = (6.4, 4.0)
_DPI = 130


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def plot_coefficients(table: FourierTable, path: str | Path, title: str = "") -> Path:
    """|mu_hat(n)| against n."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ns = table.frequencies
    ax.plot(ns, np.abs(table.values), ".", markersize=2, color="#1f77b4")
    ax.axhline(1.0, color="grey", linewidth=0.8, linestyle="--")
    ax.set_xlabel("frequency n")
    ax.set_ylabel("|coefficient|")
    ax.set_ylim(-0.02, 1.05)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_conze_scan(scan: dict[int, np.ndarray], path: str | Path) -> Path:
    """Aperiodicity ratios against n, one line per exponent j."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for j in sorted(scan):
        vals = scan[j]
        finite = np.isfinite(vals)
        ax.plot(
            np.arange(1, len(vals) + 1)[finite],
            vals[finite],
            ".",
            markersize=2,
            label=f"j = {j}",
        )
    ax.set_xlabel("frequency n")
    ax.set_ylabel("|1 - w^j| / (1 - |w|^j)")
    ax.set_yscale("log")
    ax.legend()
    return _save(fig, path)


def plot_spectrum(table: FourierTable, path: str | Path, title: str = "") -> Path:
    """The coefficient point cloud inside the closed unit disk."""
    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    theta = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.cos(theta), np.sin(theta), color="grey", linewidth=0.8)
    ax.plot(table.values.real, table.values.imag, ".", markersize=3, color="#d62728")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal")
    ax.set_xlim(-1.1, 1.1)
    ax.set_ylim(-1.1, 1.1)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_norm_curves(curves: list[NormCurve], path: str | Path) -> Path:
    """Norm decay against the power n, log scale."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for curve in curves:
        positive = curve.values > 0
        if positive.any():
            ax.semilogy(curve.ns[positive], curve.values[positive],
                        marker="o", markersize=3, label=f"p = {curve.label}")
        else:
            ax.plot(curve.ns, curve.values, marker="o", markersize=3,
                    label=f"p = {curve.label}")
    ax.set_xlabel("power n")
    ax.set_ylabel("norm of P^n - E")
    ax.legend()
    return _save(fig, path)


def plot_hilbert(
    frequencies: list[int],
    partial: list[complex],
    closed: list[complex],
    path: str | Path,
) -> Path:
    """Partial-sum coefficients against the series limit, per frequency."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    idx = np.arange(len(frequencies))
    ax.plot(idx, [abs(c) for c in closed], "s", markersize=6, label="closed form", color="#2ca02c")
    ax.plot(idx, [abs(p) for p in partial], ".", markersize=4, label="partial sum", color="#1f77b4")
    ax.set_xticks(idx)
    ax.set_xticklabels([str(j) for j in frequencies])
    ax.set_xlabel("frequency j")
    ax.set_ylabel("|coefficient of the transform|")
    ax.legend()
    return _save(fig, path)


def plot_grid_chain(chain: GridChain, path: str | Path, max_eigen: int = 64) -> Path:
    """Cell masses (left) and the modulus of the kernel transform (right)."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.step(np.arange(chain.n_cells) / chain.n_cells, chain.p * chain.n_cells, where="mid",
             linewidth=0.9)
    ax1.set_xlabel("angle")
    ax1.set_ylabel("density (mass x N)")
    k = np.arange(min(max_eigen, chain.n_cells // 2))
    ax2.plot(k, np.abs(chain.kernel_hat[k]), "o", markersize=3)
    ax2.set_xlabel("frequency k")
    ax2.set_ylabel("|kernel transform|")
    ax2.set_ylim(-0.02, 1.05)
    return _save(fig, path)


def plot_simulation(record: dict, path: str | Path) -> Path:
    """Estimate with a 3-sigma band against the exact value."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    est = record["estimate"]
    err = 3.0 * record["stderr"]
    ax.errorbar([0], [est["re"]], yerr=[err], fmt="o", capsize=4, label="estimate (re)")
    ax.errorbar([1], [est["im"]], yerr=[err], fmt="o", capsize=4, label="estimate (im)")
    if record.get("exact") is not None:
        ax.plot([0], [record["exact"]["re"]], "x", markersize=9, color="black", label="exact (re)")
        ax.plot([1], [record["exact"]["im"]], "x", markersize=9, color="black")
    ax.set_xticks([0, 1])
    ax.set_xticklabels(["real part", "imag part"])
    ax.set_ylabel(f"P^{record['n_steps']} f(x0)")
    ax.legend(fontsize=8)
    return _save(fig, path)
