"""
Visualization utilities
"""

from typing import List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402
from loguru import logger  # noqa: E402


def plot_psnr_vs_sigma(summary: pd.DataFrame, save_path: Optional[str] = None) -> plt.Figure:
    """
    Plot mean PSNR per noise level for the noisy input and each pass

    Args:
        summary: Per-sigma summary with columns sigma, noisy_psnr, pass1_psnr and optionally pass2_psnr
        save_path: Path to save figure (optional)

    Returns:
        Matplotlib figure
    """
    columns = [c for c in ("noisy_psnr", "pass1_psnr", "pass2_psnr") if c in summary and summary[c].notna().any()]
    long = summary.melt(id_vars="sigma", value_vars=columns, var_name="series", value_name="psnr")

    fig, ax = plt.subplots(figsize=(8, 6))
    sns.lineplot(data=long, x="sigma", y="psnr", hue="series", marker="o", lw=3, ax=ax)
    ax.set_xlabel("Noise standard deviation (sigma)", fontsize=12, fontweight="bold")
    ax.set_ylabel("PSNR (dB)", fontsize=12, fontweight="bold")
    ax.set_title("Average PSNR vs Noise Level", fontsize=14, fontweight="bold", pad=15)
    ax.legend(loc="upper right", fontsize=11)
    ax.grid(alpha=0.3)

    plt.tight_layout()

    if save_path:
        fig.savefig(save_path, dpi=300, bbox_inches="tight")
        logger.info(f"✓ PSNR plot saved to {save_path}")

    return fig


def plot_cluster_sizes(sizes: List[int], save_path: Optional[str] = None) -> plt.Figure:
    """
    Bar chart of member counts per learned cluster

    Args:
        sizes: Member count of each cluster
        save_path: Path to save figure (optional)

    Returns:
        Matplotlib figure
    """
    fig, ax = plt.subplots(figsize=(10, 6))
    sns.barplot(x=list(range(len(sizes))), y=list(sizes), color="#667eea", ax=ax)
    ax.set_xlabel("Cluster", fontsize=12, fontweight="bold")
    ax.set_ylabel("Patches", fontsize=12, fontweight="bold")
    ax.set_title("Cluster Sizes", fontsize=14, fontweight="bold", pad=15)
    ax.grid(alpha=0.3, axis="y")

    plt.tight_layout()

    if save_path:
        fig.savefig(save_path, dpi=300, bbox_inches="tight")
        logger.info(f"✓ Cluster size plot saved to {save_path}")

    return fig


__all__ = ["plot_psnr_vs_sigma", "plot_cluster_sizes"]
