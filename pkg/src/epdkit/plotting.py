"""Figures written next to the CLI's CSV/JSON artifacts."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def field_map(X, Y, Z, path, title="", label="", points=None):
    """Filled contours of a real field on the (Re z, Im z) plane."""
    fig, ax = plt.subplots(figsize=(5, 4))
    cs = ax.contourf(X, Y, Z, levels=30, cmap="viridis")
    ax.contour(X, Y, Z, levels=15, colors="k", linewidths=0.4)
    fig.colorbar(cs, ax=ax, label=label)
    if points is not None:
        pts = np.atleast_1d(points)
        ax.plot(pts.real, pts.imag, "r*", ms=9)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(title)
    return _save(fig, path)


def level_families(X, Y, G, Gs, path, beta=None):
    """Level curves of Re W and Re W* overlaid (orthogonal families)."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.contour(X, Y, G, levels=20, colors="C0", linewidths=0.7)
    ax.contour(X, Y, Gs, levels=20, colors="C3", linewidths=0.7, linestyles="--")
    if beta is not None:
        ax.plot(beta.real, beta.imag, "k*", ms=9)
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title("Re W (solid), Re W* (dashed)")
    return _save(fig, path)


def grid_map(a1, a2, Z, path, xlabel, ylabel, title="", label=""):
    fig, ax = plt.subplots(figsize=(5, 4))
    m = ax.pcolormesh(a2, a1, Z, shading="nearest", cmap="magma")
    fig.colorbar(m, ax=ax, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return _save(fig, path)


def convergence(steps, errors, path, title="", xlabel="step", order=None):
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.loglog(steps, errors, "o-", label="error")
    if order is not None:
        s = np.asarray(steps, dtype=float)
        ax.loglog(s, errors[0] * (s / s[0]) ** order, "k--", lw=0.8, label=f"slope {order:g}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("max error")
    ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def filament(xs, ts, K, tau, path):
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5), sharey=True)
    for ax, Z, name in zip(axes, (K, tau), ("K", "tau")):
        m = ax.pcolormesh(xs, ts, Z, shading="nearest", cmap="coolwarm")
        fig.colorbar(m, ax=ax)
        ax.set_title(name)
        ax.set_xlabel("x")
    axes[0].set_ylabel("t")
    return _save(fig, path)
