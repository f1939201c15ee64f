import os
from datetime import datetime
from typing import List, Optional, Sequence

import matplotlib.pyplot as plt

from roboaug.compositor.compositor import AugFrame
from roboaug.load_data.base import Frame


def save_figure(fig, save_dir: str, suffix_name: str, formats: Sequence[str]) -> List[str]:
    os.makedirs(save_dir, exist_ok=True)
    timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M")
    base_fname = f"{timestamp}_{suffix_name}"
    paths = []
    for ext in formats:
        path = os.path.join(save_dir, f"{base_fname}.{ext}")
        fig.savefig(path, format=ext, bbox_inches="tight")
        paths.append(path)
    plt.close(fig)
    return paths


def plot_augmented_vs_original(
    originals: Sequence[Frame],
    augmented: Sequence[AugFrame],
    method: str,
    n_frames: int = 4,
    suffix_name: str = "roboaug",
    title: Optional[str] = None,
    save_dir: str = "assets/plots",
    formats: Sequence[str] = ("png",),
) -> List[str]:
    """Two-row grid: source frames on top, their augmented versions below."""
    n_frames = min(n_frames, len(originals), len(augmented))
    if n_frames == 0:
        raise ValueError("Nothing to plot")

    fig, axes = plt.subplots(2, n_frames, figsize=(4 * n_frames, 7), squeeze=False)
    for i in range(n_frames):
        aug = augmented[i]
        axes[0, i].imshow(originals[i])
        axes[0, i].set_title(f"Frame {i}: original", fontsize=11, fontweight="bold")
        axes[1, i].imshow(aug.frame)
        prompt = aug.provenance.prompt
        axes[1, i].set_title(
            f"Frame {i}: {aug.provenance.method}" + (f"\n{prompt[:40]}" if prompt else ""),
            fontsize=9,
        )
        for ax in axes[:, i]:
            ax.axis("off")

    if title is None:
        title = f"{method} augmentation vs. original"
    fig.suptitle(title, fontsize=14, fontweight="bold")
    plt.tight_layout(rect=[0, 0.03, 1, 0.95])
    return save_figure(fig, save_dir, suffix_name, formats)
