"""Matplotlib renderings of training and evaluation artifacts."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import PRF

# strip the version stamp so identical runs produce identical bytes
_SAVE_OPTS = {"dpi": 120, "metadata": {"Software": None}}


def plot_loss_curve(curve: list[tuple[int, float]], path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    if curve:
        epochs, losses = zip(*curve)
        ax.plot(epochs, losses, color="#1f77b4", linewidth=1.5)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean joint loss")
    ax.set_title("Training loss")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def plot_per_role_f1(per_role: dict[str, PRF], path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(7, max(3, 0.35 * max(1, len(per_role)))))
    roles = sorted(per_role, key=lambda r: (r != "NONE", r))
    scores = [per_role[r].f1 for r in roles]
    ax.barh(range(len(roles)), scores, color="#2ca02c")
    ax.set_yticks(range(len(roles)))
    ax.set_yticklabels(roles, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("F1")
    ax.set_xlim(0, 1)
    ax.set_title("Argument role F1 by role")
    ax.grid(True, axis="x", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
