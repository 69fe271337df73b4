"""Figure rendering for the report path; every plot is saved to a file."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_sweep_figure(result, path, title=None):
    """BRCS versus receiver angle, optionally against the plate baseline."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(result.alpha_deg, result.brcs_db, "-o", ms=3, label="optimized surface")
    if result.plate_brcs_db is not None:
        ax.plot(
            result.alpha_deg,
            result.plate_brcs_db,
            "--",
            color="0.55",
            label="plate baseline",
        )
    ax.set_xlabel(r"receiver angle $\alpha$ (deg)")
    ax.set_ylabel("BRCS (dB re 1 m$^2$)")
    beta = result.beta_deg[0] if result.beta_deg.size else 0.0
    ax.set_title(title or rf"$\beta$ = {beta:g}$^\circ$")
    ax.grid(True, linestyle=":", linewidth=0.7)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sensitivity_figure(rows, path, c_opt=None, element=None):
    """BRCS versus one element's capacitance with the optimizer's value marked."""
    rows = np.asarray(rows)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(rows[:, 0] * 1e12, rows[:, 1], "-", lw=1.4)
    if c_opt is not None:
        ax.axvline(c_opt * 1e12, color="C3", linestyle="--", label=r"$C_\mathrm{opt}$")
        ax.legend()
    ax.set_xlabel("capacitance (pF)")
    ax.set_ylabel("BRCS (dB)")
    if element is not None:
        ax.set_title(f"element {element}")
    ax.grid(True, linestyle=":", linewidth=0.7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_timegate_figure(ungated, gated, trace, gate, path):
    """Two panels: band magnitude before/after gating, and the time response."""
    fig, (ax_f, ax_t) = plt.subplots(2, 1, figsize=(7, 6.5))
    floor = 1e-300
    f_ghz = ungated.frequencies / 1e9
    ax_f.plot(f_ghz, 20 * np.log10(np.maximum(np.abs(ungated.values), floor)),
              color="C3", label="original")
    ax_f.plot(f_ghz, 20 * np.log10(np.maximum(np.abs(gated.values), floor)),
              color="C0", label="time-gated")
    ax_f.set_xlabel("frequency (GHz)")
    ax_f.set_ylabel("|S21| (dB)")
    ax_f.grid(True, linestyle=":", linewidth=0.7)
    ax_f.legend()

    t_ns = trace.times * 1e9
    mag = 20 * np.log10(np.maximum(np.abs(trace.values), floor))
    ax_t.plot(t_ns, mag, color="C3", lw=0.9)
    ax_t.axvspan(gate.start * 1e9, (gate.start + gate.width) * 1e9,
                 color="C0", alpha=0.15, label="gate")
    ax_t.set_xlim(0, min(trace.span * 1e9, 60))
    lo = np.percentile(mag, 1)
    ax_t.set_ylim(max(lo, mag.max() - 120), mag.max() + 6)
    ax_t.set_xlabel("time (ns)")
    ax_t.set_ylabel("magnitude (dB)")
    ax_t.grid(True, linestyle=":", linewidth=0.7)
    ax_t.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_montecarlo_figure(result, path):
    """Histogram of the BRCS spread under device tolerances."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.hist(result.brcs_db, bins=40, color="C0", alpha=0.8)
    for value, label, color in [
        (result.p5, "p5", "C3"),
        (result.mean, "mean", "k"),
        (result.p95, "p95", "C3"),
    ]:
        ax.axvline(value, color=color, linestyle="--", lw=1.0)
        ax.text(value, ax.get_ylim()[1] * 0.95, label, rotation=90,
                va="top", ha="right", fontsize=8)
    ax.set_xlabel("BRCS (dB)")
    ax.set_ylabel("trials")
    ax.grid(True, linestyle=":", linewidth=0.7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
