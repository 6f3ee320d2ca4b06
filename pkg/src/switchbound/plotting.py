"""Matplotlib rendering for trajectories, sweeps, overshoot profiles, and
witness envelopes. Figures complement the tabular output; nothing here is
needed for analysis."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dynamics import InstabilityWitness, Trajectory
from .robustness import SweepTable


def _finish(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_trajectory(traj: Trajectory, path: str, title: str = "trajectory") -> str:
    norms = traj.norms()
    fig, ax = plt.subplots(figsize=(7, 4))
    steps = np.arange(norms.size)
    if norms.max() > 0 and norms[norms > 0].size and norms.max() / max(norms[norms > 0].min(), 1e-300) > 100:
        ax.semilogy(steps, norms, marker=".", lw=1.2)
    else:
        ax.plot(steps, norms, marker=".", lw=1.2)
    ax.set_xlabel("step n")
    ax.set_ylabel(f"||x(n)||_{traj.norm.value}")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def plot_sweep(table: SweepTable, path: str) -> str:
    taus = [r.tau for r in table.rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    positive = [t for t in taus if t > 0]
    logx = len(positive) == len(taus) and len(taus) > 2 and max(taus) / min(positive) > 50
    plot = ax.semilogx if logx else ax.plot
    plot(taus, [r.sigma_upper for r in table.rows], marker="o", label="sigma_upper")
    plot(taus, [r.sigma_lower for r in table.rows], marker="s", label="sigma_lower")
    if any(r.chi_T is not None for r in table.rows):
        ax2 = ax.twinx()
        chi = [r.chi_T for r in table.rows]
        p2 = ax2.semilogx if logx else ax2.plot
        p2(taus, chi, marker="^", color="tab:red", label="chi_T")
        ax2.set_ylabel("chi_T")
    ax.set_xlabel("tau")
    ax.set_ylabel("sigma")
    ax.set_title(table.description)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    return _finish(fig, path)


def plot_overshoot_profile(
    level_maxima, chi_T: float, bound: float | None, path: str
) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    lengths = np.arange(len(level_maxima))
    ax.plot(lengths, level_maxima, marker="o", label="max ||product|| at length")
    ax.axhline(chi_T, color="tab:green", ls="--", label=f"chi_T = {chi_T:.4g}")
    if bound is not None and np.isfinite(bound):
        ax.axhline(bound, color="tab:red", ls=":", label=f"1/sigma_lower = {bound:.4g}")
    ax.set_xlabel("product length")
    ax.set_ylabel("induced norm")
    ax.set_title("transient overshoot profile")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    return _finish(fig, path)


def plot_witness(witness: InstabilityWitness, path: str) -> str:
    traj = witness.trajectory
    norms = traj.norms()
    steps = np.arange(norms.size)
    envelope = witness.kappa * witness.growth_rate**steps * norms[0]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(steps, norms, marker=".", lw=1.2, label="||x(n)||")
    ax.semilogy(steps, envelope, ls="--", color="tab:red", label="kappa * rate^n")
    for q in witness.boundaries:
        ax.axvline(q, color="gray", alpha=0.25, lw=0.8)
    ax.set_xlabel("step n")
    ax.set_ylabel(f"norm ({traj.norm.value})")
    ax.set_title(f"witness growth, mu = {witness.mu:.4g}")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    return _finish(fig, path)
