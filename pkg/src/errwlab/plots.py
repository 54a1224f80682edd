"""Figure rendering for experiment reports.

Every renderer writes PNG files next to the delimited output and returns
the paths.  Rendering is strictly read-only over result dictionaries so
the figures can never disagree with the emitted numbers.
"""

from __future__ import annotations

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def render_experiment_figures(
    result_dict: dict, out_dir: Path, stem: str
) -> List[Path]:
    """Onset histogram, final-balance histogram, and (when present)
    parity-residual scatter for one experiment result."""
    out_dir = Path(out_dir)
    written = []
    table = result_dict["replicas"]
    onsets = np.asarray(table["onset_step"], dtype=float)
    hits = onsets[onsets >= 0]

    fig, ax = plt.subplots(figsize=(6, 4))
    if len(hits):
        ax.hist(hits, bins=min(40, max(10, len(hits) // 20 + 1)), color="#33658a")
    ax.set_xlabel("attraction onset step")
    ax.set_ylabel("replicas")
    frac = result_dict["aggregates"]["attracted_fraction"]
    ax.set_title(f"attraction onsets (attracted fraction {frac:.3f})")
    written.append(_save(fig, out_dir / f"{stem}-onsets.png"))

    balance = np.asarray(table["final_balance"], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(balance[np.isfinite(balance)], bins=40, color="#86bbd8")
    ax.set_xlabel("final alternating balance")
    ax.set_ylabel("replicas")
    ax.set_title("final balance across replicas")
    written.append(_save(fig, out_dir / f"{stem}-balance.png"))

    parity = np.asarray(table["parity_residual"], dtype=float)
    finite = np.isfinite(parity)
    if finite.any():
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy(
            np.nonzero(finite)[0],
            np.maximum(parity[finite], 1e-18),
            ".",
            color="#f6ae2d",
        )
        ax.set_xlabel("replica")
        ax.set_ylabel("parity residual")
        ax.set_title("even/odd boundary-sum residuals")
        written.append(_save(fig, out_dir / f"{stem}-parity.png"))
    return written


def render_comparison_figure(
    comparison_dict: dict, out_dir: Path, stem: str
) -> List[Path]:
    """Attracted fraction with standard-error bars, even vs odd."""
    side = comparison_dict["side_by_side"]
    frac = side["attracted_fraction"]
    se = side["attracted_fraction_se"]
    even_l = comparison_dict["even"]["config"]["cycle_length"]
    odd_l = comparison_dict["odd"]["config"]["cycle_length"]

    fig, ax = plt.subplots(figsize=(5, 4))
    xs = [0, 1]
    ax.bar(
        xs,
        [frac["even"], frac["odd"]],
        yerr=[se["even"], se["odd"]],
        color=["#33658a", "#f26419"],
        capsize=6,
        width=0.6,
    )
    ax.set_xticks(xs)
    ax.set_xticklabels([f"cycle {even_l}", f"cycle {odd_l}"])
    ax.set_ylabel("attracted fraction")
    ax.set_ylim(0, 1.05)
    ax.set_title("attraction by cycle parity")
    return [_save(fig, out_dir / f"{stem}-parity-compare.png")]


def render_oracle_figure(oracle_dict: dict, out_dir: Path, stem: str) -> List[Path]:
    """Bar pair: product oracle vs Monte Carlo trap frequency with 3 SE."""
    fig, ax = plt.subplots(figsize=(5, 4))
    mc = oracle_dict["monte_carlo"]
    ax.bar(
        [0, 1],
        [oracle_dict["oracle_probability"], mc["frequency"]],
        yerr=[0.0, 3.0 * mc["standard_error"]],
        color=["#2f4858", "#86bbd8"],
        capsize=6,
        width=0.6,
    )
    ax.set_xticks([0, 1])
    ax.set_xticklabels(["product oracle", "Monte Carlo"])
    ax.set_ylabel("trap probability")
    ax.set_title("stay-forever probability: oracle vs simulation")
    return [_save(fig, out_dir / f"{stem}-oracle.png")]
