"""Matplotlib figures written next to the CSV outputs.

SVG output is made reproducible: no date metadata and a fixed hash salt for
element ids.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "lines.linewidth": 1.2,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "atomsg",
    "svg.fonttype": "none",
}


def _figure(width=4.5, height=3.2):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, height))
    return fig, ax


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig.tight_layout()
        fig.savefig(path, format=path.suffix.lstrip(".") or "svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_beta(Z, beta_over_k, slope, intercept, path):
    fig, ax = _figure()
    Z = np.asarray(Z, dtype=float)
    ax.plot(Z, beta_over_k, "o", color="k", label=r"$\beta/k$")
    zz = np.linspace(0, Z.max() * 1.05, 50)
    ax.plot(zz, slope * zz + intercept, "--", color="0.5", label=f"fit: {slope:.4g} Z + {intercept:.2g}")
    ax.set_xlabel("Z")
    ax.set_ylabel(r"$\beta / k$")
    ax.legend(loc="upper left")
    return _save(fig, path)


def plot_profiles(omega, series: dict, path, Z=None):
    """``series`` maps a label to V values on ``omega``."""
    fig, ax = _figure()
    styles = ["-", "--", ":", "-."]
    for i, (label, vals) in enumerate(series.items()):
        ax.plot(omega, vals, styles[i % len(styles)], label=label)
    ax.set_xlabel(r"$\Omega$ [$a_\mu$]")
    ax.set_ylabel(r"$V(\Omega)$ [$k/a_\mu$]")
    ax.set_yscale("log")
    if Z is not None:
        ax.set_title(f"Z = {Z}")
    ax.legend()
    return _save(fig, path)


def plot_deviation(omega, rel_dev, path):
    fig, ax = _figure()
    ax.semilogy(omega, np.maximum(rel_dev, 1e-18), ".", ms=3, color="k")
    ax.set_xlabel(r"$\Omega$ [$a_\mu$]")
    ax.set_ylabel("relative deviation")
    return _save(fig, path)


def plot_metrics(series, path):
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(3, 1, figsize=(4.5, 6.0), sharex=True)
    axes[0].plot(series.time, series.branch_overlap, color="k")
    axes[0].set_ylabel("branch overlap")
    axes[1].plot(series.time, series.purity, color="k")
    axes[1].set_ylabel(r"purity $\mathrm{Tr}\,\rho^2$")
    axes[2].plot(series.time, series.x_plus, label="spin +")
    axes[2].plot(series.time, series.x_minus, label="spin -")
    axes[2].set_ylabel(r"$\langle x \rangle$")
    axes[2].set_xlabel("t")
    axes[2].legend()
    return _save(fig, path)
