"""Figures rendered next to the CSV reports (PNG, headless)."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis import EnhancementScan, FringeFit  # noqa: E402

# strip the version stamp so identical runs give identical files
_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)
    return path


def plot_fringe(samples, fit: FringeFit, path, title: str = "") -> Path:
    phi = np.array([s[0] for s in samples])
    y = np.array([s[1] for s in samples])
    scale = y.max() if y.max() > 0 else 1.0
    fine = np.linspace(phi.min(), phi.max(), 400)
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(phi / math.pi, y / scale, "o", ms=4, label="simulated")
    ax.plot(fine / math.pi, fit.model(fine) / scale, "-", lw=1.2,
            label=f"fit, V = {fit.visibility:.3f}")
    ax.set_xlabel(r"mask phase $\Phi$ / $\pi$")
    ax.set_ylabel("5D population (norm.)")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_enhancement(scan: EnhancementScan, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(scan.offsets / 1e12, scan.ratios, "-o", ms=3)
    ax.axhline(1.0, color="0.6", lw=0.8)
    ax.set_xlabel("mask offset from optimum (THz)")
    ax.set_ylabel("population ratio")
    ax.set_title(title or f"peak ratio {scan.peak_ratio:.3f}")
    fig.tight_layout()
    return _save(fig, path)


def plot_paths(rows, path, title: str = "") -> Path:
    """Phasor diagram of the per-intermediate resonant amplitudes."""
    fig, ax = plt.subplots(figsize=(4.0, 4.0))
    for r in rows:
        a = r["rel_amplitude"] * np.exp(1j * math.radians(r["phase_deg"]))
        ax.annotate("", xy=(a.real, a.imag), xytext=(0, 0),
                    arrowprops=dict(arrowstyle="->", lw=1.4))
        ax.text(a.real * 1.08, a.imag * 1.08, r["intermediate"], fontsize=7, ha="center")
    ax.set_xlim(-1.3, 1.3)
    ax.set_ylim(-1.3, 1.3)
    ax.set_aspect("equal")
    ax.axhline(0, color="0.8", lw=0.6)
    ax.axvline(0, color="0.8", lw=0.6)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_sweep(values, results, path, xlabel: str, ylabel: str = "population ratio") -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(values, results, "-o", ms=3)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    return _save(fig, path)
