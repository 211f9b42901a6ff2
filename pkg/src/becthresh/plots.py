"""Figure rendering for the CLI report paths.

Every function writes a PNG next to the corresponding CSV.  The Agg backend
is forced so rendering works headless, and PNG metadata is stripped so
reruns produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection

from .ensemble import CheckRegularEnsemble
from .optimize import OptimizationResult, PermittedRegion, TrajectoryPoint
from .ppositive import build_p_polynomial
from .simulate import SimRunResult

_SAVEKW = dict(dpi=150, metadata={"Software": None})


def save_region_figure(region: PermittedRegion, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.pcolormesh(region.eps_values, region.lamL_values, region.feasible.T,
                  cmap="Greens", vmin=0.0, vmax=1.5, shading="auto")
    if len(region.boundary):
        ax.add_collection(LineCollection(region.boundary, colors="k", linewidths=0.8))
    ax.set_xlabel(r"$\epsilon$")
    ax.set_ylabel(r"$\lambda_L$")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)


def save_trajectory_figure(points: list[TrajectoryPoint], path,
                           region: PermittedRegion | None = None,
                           title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if region is not None and len(region.boundary):
        ax.add_collection(LineCollection(region.boundary, colors="0.6", linewidths=0.8,
                                         label="feasible-set boundary"))
    eps = np.array([p.epsilon for p in points])
    lamL = np.array([p.lambda_L for p in points])
    feas = np.array([p.feasible for p in points])
    ax.plot(eps[~feas], lamL[~feas], ".", ms=2, color="tab:red", label="trajectory (outside)")
    ax.plot(eps[feas], lamL[feas], ".", ms=3, color="tab:blue", label="trajectory (inside)")
    keep = np.isfinite(eps) & (np.abs(eps) < 2) & (np.abs(lamL) < 2)
    if keep.any():
        ax.set_xlim(max(-0.05, eps[keep].min() - 0.02), min(1.0, eps[keep].max() + 0.02))
        ax.set_ylim(max(-0.05, lamL[keep].min() - 0.05), min(1.05, lamL[keep].max() + 0.05))
    ax.set_xlabel(r"$\epsilon$")
    ax.set_ylabel(r"$\lambda_L$")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)


def save_p_curve_figure(ensemble: CheckRegularEnsemble, path, samples: int = 2001) -> None:
    p = build_p_polynomial(ensemble)
    xs = np.linspace(0.0, 1.0, samples)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(xs, p(xs), lw=1.5)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("p(x)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)


def save_waterfall_figure(result: SimRunResult, path,
                          threshold: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ber = np.array(result.mean_ber)
    floor = max(1.0 / (result.n * result.trials * 10), 1e-12)
    ax.semilogy(result.deltas, np.maximum(ber, floor), "o-", label="mean residual BER")
    ax.semilogy(result.deltas,
                np.maximum(np.array(result.block_failure_rate), floor),
                "s--", label="block failure rate")
    if threshold is not None:
        ax.axvline(threshold, color="k", ls=":", label=f"threshold {threshold:.4f}")
    ax.set_xlabel(r"erasure probability $\delta$")
    ax.set_ylabel("residual rate")
    ax.set_title(f"n={result.n}, {result.trials} trials per point")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)


def save_trace_figure(result: OptimizationResult, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if result.trace:
        gens = [g for g, _ in result.trace]
        vals = [v for _, v in result.trace]
        ax.plot(gens, vals, lw=1.2)
    ax.set_xlabel("generation")
    ax.set_ylabel("best threshold")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)
