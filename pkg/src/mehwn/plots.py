"""Figure rendering for the report paths.

Each CLI command drops a PNG next to its CSV/JSON output unless figures
are disabled.  Figures are presentation only: the delimited files remain
the canonical, byte-deterministic output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def bounds_figure(reports: list[dict], path: Path) -> None:
    lam = [r["lambda"] for r in reports]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.plot(lam, [r["gamma_lower"] for r in reports], "o-", label="ratio lower bound")
    ax1.plot(lam, [r["gamma_upper"] for r in reports], "s-", label="ratio upper bound")
    wang = [(l, r["wang_gamma_upper"]) for l, r in zip(lam, reports) if r["wang_gamma_upper"] is not None]
    if wang:
        ax1.plot([w[0] for w in wang], [w[1] for w in wang], "^--", label="baseline upper bound")
    ax1.set_xlabel("node density")
    ax1.set_ylabel("delay per distance (slots/length)")
    ax1.legend(fontsize=8)
    ax1.grid(True, alpha=0.3)
    ax2.plot(lam, [r["E_size_upper"] for r in reports], "o-", label="component size bound")
    ax2.plot(lam, [r["E_diam_upper"] for r in reports], "s-", label="component diameter bound")
    ax2.set_xlabel("node density")
    ax2.set_ylabel("truncated series value")
    ax2.legend(fontsize=8)
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def gamma_figure(summaries: list[dict], path: Path) -> None:
    lam = [s["lambda"] for s in summaries]
    mean = [s["mean_gamma"] for s in summaries]
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    ax.plot(lam, mean, "o-", label="simulated mean ratio")
    ax.plot(lam, [s["gamma_lower"] for s in summaries], "v--", label="lower bound")
    upper = [(l, s["gamma_upper"]) for l, s in zip(lam, summaries) if s["gamma_upper"] is not None]
    if upper:
        ax.plot([u[0] for u in upper], [u[1] for u in upper], "^--", label="upper bound")
    ax.set_xlabel("node density")
    ax.set_ylabel("delay per distance (slots/length)")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def kappa_figure(est: dict, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    ax.scatter(est["distances"], est["ratios"], s=12, alpha=0.5, label="pair samples")
    ax.axhline(est["kappa_hat"], color="C1", label=f"mean ratio = {est['kappa_hat']:.3f}")
    ax.set_xlabel("pair distance")
    ax.set_ylabel("hops per distance")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def stats_figure(rows: list[dict], path: Path) -> None:
    lam = [r["lambda"] for r in rows]
    fig, (ax1, ax2, ax3) = plt.subplots(1, 3, figsize=(12, 3.6))
    ax1.plot(lam, [r["mean_n_clusters"] for r in rows], "o-", label="clusters")
    ax1.plot(lam, [r["mean_n_components"] for r in rows], "s-", label="components")
    ax1.set_xlabel("node density")
    ax1.set_ylabel("mean count")
    ax1.legend(fontsize=8)
    ax1.grid(True, alpha=0.3)
    ax2.plot(lam, [r["mean_cluster_size_vertices"] for r in rows], "o-", label="cluster (mapped vertices)")
    ax2.plot(lam, [r["mean_component_size"] for r in rows], "s-", label="component")
    ax2.plot(lam, [r["E_size_upper"] for r in rows], "^--", label="size bound (truncated)")
    ax2.set_xlabel("node density")
    ax2.set_ylabel("mean size")
    ax2.set_yscale("log")
    ax2.legend(fontsize=8)
    ax2.grid(True, alpha=0.3)
    ax3.plot(lam, [r["mean_cluster_diameter"] for r in rows], "o-", label="cluster (mapped)")
    ax3.plot(lam, [r["mean_component_diameter"] for r in rows], "s-", label="component")
    ax3.plot(lam, [r["E_diam_upper"] for r in rows], "^--", label="diameter bound (truncated)")
    ax3.set_xlabel("node density")
    ax3.set_ylabel("mean diameter (edges)")
    ax3.legend(fontsize=8)
    ax3.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def size_pdf_figure(pdf_rows: list[dict], path: Path) -> None:
    lams = sorted({r["lambda"] for r in pdf_rows})
    fig, axes = plt.subplots(1, max(len(lams), 1), figsize=(4.6 * max(len(lams), 1), 3.6), squeeze=False)
    for ax, lam in zip(axes[0], lams):
        rows = [r for r in pdf_rows if r["lambda"] == lam]
        n = [r["n"] for r in rows]
        ax.plot(n, [r["component_pdf"] for r in rows], "s-", label="component size")
        ax.plot(n, [r["cluster_pdf"] for r in rows], "o-", label="cluster size (mapped)")
        ax.set_xlabel("size (vertices)")
        ax.set_ylabel("pdf")
        ax.set_title(f"density {lam:g}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
