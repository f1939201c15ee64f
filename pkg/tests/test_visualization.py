import os

from roboaug.compositor.compositor import AugFrame, Provenance
from roboaug.experiments.process_results import RAW_SCORES, SCALING_SCORES, summarize_scaling
from roboaug.metrics.evaluation_pipeline import load_raw_scores, score_table
from roboaug.visualization import (
    plot_augmented_vs_original,
    plot_method_comparison,
    plot_scaling_trend,
)


def test_plot_augmented_vs_original(tmp_path, episode):
    augmented = [AugFrame(f[::-1].copy(), Provenance("engine", 0, prompt="a kitchen")) for f in episode.frames]
    paths = plot_augmented_vs_original(
        episode.frames, augmented, "engine", n_frames=3, save_dir=str(tmp_path), formats=("png", "pdf")
    )
    assert len(paths) == 2
    assert all(os.path.isfile(p) for p in paths)
    assert paths[0].endswith("_roboaug.png")


def test_plot_method_comparison(tmp_path):
    path = plot_method_comparison(score_table(load_raw_scores(RAW_SCORES)), save_dir=str(tmp_path))
    assert os.path.isfile(path)


def test_plot_scaling_trend(tmp_path):
    path = plot_scaling_trend(summarize_scaling(SCALING_SCORES), save_dir=str(tmp_path))
    assert os.path.isfile(path)
