from typing import Sequence

import matplotlib.pyplot as plt
import pandas as pd
import seaborn as sns

from roboaug.visualization.model_visualization import save_figure


def _style():
    sns.set_style("whitegrid")
    plt.rcParams.update(
        {
            "font.size": 12,
            "axes.titlesize": 14,
            "axes.labelsize": 12,
            "legend.fontsize": 10,
        }
    )


def plot_method_comparison(
    score_table: pd.DataFrame,
    save_dir: str = "assets/plots",
    suffix_name: str = "method_comparison",
    formats: Sequence[str] = ("png",),
) -> str:
    """
    Grouped bars of normalized behavior score: one group per task/stage cell,
    one bar per augmentation method.

    Parameters:
    - score_table: output of score_table(), methods as index, cells (and Average) as columns.
    """
    _style()
    long = (
        score_table.reset_index()
        .melt(id_vars=score_table.index.name or "index", var_name="cell", value_name="score")
        .rename(columns={score_table.index.name or "index": "method"})
    )
    fig, ax = plt.subplots(figsize=(14, 6))
    sns.barplot(data=long, x="cell", y="score", hue="method", palette="husl", ax=ax)
    ax.set_ylim(0, 1)
    ax.set_xlabel("")
    ax.set_ylabel("Normalized behavior score")
    ax.set_title("Comparison of augmentation methods", fontweight="bold")
    ax.legend(loc="upper left", ncol=3)
    plt.tight_layout()
    return save_figure(fig, save_dir, suffix_name, formats)[0]


def plot_scaling_trend(
    scaling_summary: pd.DataFrame,
    save_dir: str = "assets/plots",
    suffix_name: str = "scaling_trend",
    formats: Sequence[str] = ("png",),
) -> str:
    """Normalized finish score against data factor; the mix variant is marked separately."""
    _style()
    fig, ax = plt.subplots(figsize=(8, 5))
    plain = scaling_summary[~scaling_summary["mix"]].sort_values("factor")
    mixed = scaling_summary[scaling_summary["mix"]]
    ax.plot(plain["factor"], plain["normalized"], marker="o", linewidth=2, label="augmented")
    if not mixed.empty:
        ax.scatter(mixed["factor"], mixed["normalized"], marker="s", s=80, color="C3", label="mix")
    for row in scaling_summary.itertuples(index=False):
        ax.annotate(row.variant, (row.factor, row.normalized), textcoords="offset points", xytext=(4, 6))
    ax.set_xlabel("Data factor (0 = no augmentation)")
    ax.set_ylabel("Normalized finish score")
    ax.set_title("Scaling trend", fontweight="bold")
    ax.legend()
    plt.tight_layout()
    return save_figure(fig, save_dir, suffix_name, formats)[0]
