import itertools
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from roboaug.errors import SchemaError, ValidationError
from roboaug.experiments.process_results import (
    RAW_SCORES,
    SCALING_SCORES,
    parse_variant,
    score_file,
    summarize_scaling,
)
from roboaug.metrics.evaluation_metrics import (
    aggregate_average,
    giou,
    mask_iou,
    normalize_cell,
    success_rate,
)
from roboaug.metrics.evaluation_pipeline import (
    BEHAVIOR_RUBRICS,
    RawScoreTable,
    ScoreRubric,
    eval_seg,
    load_raw_scores,
    mean_giou,
    score_table,
)
from roboaug.seg_pipeline.backends import parse_backend_spec

CELLS = ["Fold Towel (grasp)", "Fold Towel (finish)", "Put Mouse (grasp)", "Put Mouse (finish)"]

PUBLISHED = {
    "No aug": [0.36, 0.29, 0.15, 0.07, 0.20],
    "Inpainting": [0.36, 0.34, 0.21, 0.10, 0.24],
    "Background": [0.50, 0.54, 0.46, 0.32, 0.45],
    "ImageNet": [0.50, 0.52, 0.56, 0.39, 0.48],
    "Texture": [0.50, 0.54, 0.63, 0.44, 0.51],
    "RoboEngine": [0.56, 0.59, 0.79, 0.58, 0.62],
}


def pixel(h, w, y, x):
    m = np.zeros((h, w), dtype=bool)
    m[y, x] = True
    return m


def box_cells(m):
    ys, xs = np.nonzero(m)
    if ys.size == 0:
        return set()
    return {(y, x) for y in range(ys.min(), ys.max() + 1) for x in range(xs.min(), xs.max() + 1)}


def reference_giou(a, b):
    """Straight from the definition: pixel counts, the joint box and each mask's box, as exact fractions."""
    joint = a | b
    inter = int(np.count_nonzero(a & b))
    uni = int(np.count_nonzero(joint))
    c = len(box_cells(joint))
    covered = len(box_cells(a) | box_cells(b))
    return float(Fraction(inter, uni) - Fraction(c - covered, c))


def all_masks(h, w):
    for bits in itertools.product([False, True], repeat=h * w):
        yield np.array(bits, dtype=bool).reshape(h, w)


def test_giou_examples():
    m = np.zeros((4, 4), dtype=bool)
    m[1:3, 1:3] = True
    assert giou(m, m) == 1.0
    assert giou(pixel(1, 2, 0, 0), pixel(1, 2, 0, 1)) == pytest.approx(0.0)
    assert giou(pixel(4, 4, 0, 0), pixel(4, 4, 3, 3)) == pytest.approx(-0.875)
    diagonal = pixel(2, 2, 0, 0) | pixel(2, 2, 1, 1)
    assert giou(diagonal, diagonal) == 1.0
    # the diagonal's own box covers C, so GIoU falls back to IoU
    assert giou(diagonal, pixel(2, 2, 0, 0)) == pytest.approx(0.5)


def test_giou_self_comparison_with_disjoint_parts():
    m = np.zeros((12, 16), dtype=bool)
    m[1:5, 2:6] = True
    m[10:12, 0:3] = True
    assert giou(m, m) == 1.0
    top, bottom = np.zeros_like(m), np.zeros_like(m)
    top[1:5, 2:6] = True
    bottom[10:12, 0:3] = True
    assert giou(m, bottom) == pytest.approx(6 / 22)
    # the gap between the two parts lies in neither box
    assert giou(top, bottom) == pytest.approx(-(66 - 22) / 66)


def test_giou_one_empty():
    empty = np.zeros((3, 3), dtype=bool)
    m = pixel(3, 3, 1, 1)
    assert giou(m, empty) == pytest.approx(0.0)
    with pytest.raises(ValidationError):
        giou(empty, empty)
    with pytest.raises(ValidationError):
        mask_iou(empty, empty)


def test_giou_dims():
    with pytest.raises(ValidationError):
        giou(np.ones((2, 2), bool), np.ones((2, 3), bool))


@pytest.mark.parametrize("shape", [(h, w) for h in (1, 2, 3) for w in (1, 2, 3)])
def test_giou_exhaustive(shape):
    masks = list(all_masks(*shape))
    for i, j in itertools.combinations_with_replacement(range(len(masks)), 2):
        a, b = masks[i], masks[j]
        if not (a | b).any():
            continue
        g = giou(a, b)
        assert abs(g - reference_giou(a, b)) <= 1e-12
        assert abs(g - giou(b, a)) <= 1e-12
        assert -1.0 < g <= 1.0
        assert g <= mask_iou(a, b) + 1e-12
        if g == 1.0:
            assert np.array_equal(a, b)


def test_giou_random(rng):
    for _ in range(10_000):
        h, w = rng.integers(1, 9, size=2)
        a = rng.random((h, w)) < rng.random()
        b = rng.random((h, w)) < rng.random()
        if not (a | b).any():
            continue
        assert abs(giou(a, b) - reference_giou(a, b)) <= 1e-12


def test_mean_giou():
    m = pixel(2, 2, 0, 0)
    empty = np.zeros((2, 2), bool)
    report = mean_giou([m, pixel(2, 2, 1, 1), empty], [m, pixel(2, 2, 1, 1), empty], ids=["a", "b", "c"])
    assert report.mean == 1.0
    assert report.mean_iou == 1.0
    assert [f["id"] for f in report.failures] == ["c"]
    assert mean_giou([empty], [empty]).mean is None
    with pytest.raises(ValidationError):
        mean_giou([m], [])
    with pytest.raises(ValidationError):
        mean_giou([], [])


def test_eval_seg_passthrough(roboseg_root):
    report = eval_seg(parse_backend_spec(f"passthrough:{roboseg_root}"), roboseg_root)
    assert report.mean == 1.0
    assert [r["giou"] for r in report.per_item] == [1.0] * 5
    assert len(report.per_item) == 5
    assert not report.failures


def test_giou_self_comparison_on_annotated_robots(roboseg_records):
    for rec in roboseg_records:
        assert giou(rec.robot, rec.robot) == 1.0


def test_eval_seg_collects_failures(roboseg_root):
    backend = parse_backend_spec("chroma:1,2,3:0")
    report = eval_seg(backend, roboseg_root)
    assert len(report.per_item) + len(report.failures) == 5
    assert report.mean is not None
    assert report.mean < 1.0


def test_normalize_cell():
    assert normalize_cell([1.5, 1.5, 1.5, 1.5], 3) == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        normalize_cell([1.0], 0)
    with pytest.raises(ValidationError):
        normalize_cell([], 3)
    with pytest.raises(ValidationError):
        normalize_cell([4.0], 3)


def test_aggregate_is_max_weighted():
    cells = [(3.0, 3.0), (0.0, 6.0)]
    assert aggregate_average(cells) == pytest.approx(1 / 3)
    assert aggregate_average([{"raw_mean": 1.5, "max": 3}]) == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        aggregate_average([])


def test_success_rate():
    assert success_rate([0, 1, 2, 3, 6]) == pytest.approx(0.6)
    assert success_rate([0.5, 1], threshold=1) == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        success_rate([])


def test_rubric():
    assert BEHAVIOR_RUBRICS["Fold Towel"].finish_max == 6
    assert BEHAVIOR_RUBRICS["Put Mouse"].max_for("grasp") == 3
    with pytest.raises(SchemaError):
        BEHAVIOR_RUBRICS["Put Mouse"].max_for("fold")
    with pytest.raises(SchemaError):
        ScoreRubric(())


def test_score_table_reproduces_published_values():
    table = load_raw_scores(RAW_SCORES)
    table.check_rubric()
    scores = score_table(table)
    assert list(scores.index) == list(PUBLISHED)
    assert list(scores.columns) == CELLS + ["Average"]
    for method, expected in PUBLISHED.items():
        assert scores.loc[method].tolist() == pytest.approx(expected, abs=0.01)
    assert scores.loc["RoboEngine", "Average"] == pytest.approx(11.125 / 18)


def test_average_is_not_mean_of_cells():
    scores = score_table(load_raw_scores(RAW_SCORES))
    row = scores.loc["No aug"]
    assert row["Average"] != pytest.approx(row[CELLS].mean(), abs=1e-3)


def test_raw_table_validation(tmp_path):
    df = pd.DataFrame(
        [["A", "Fold Towel", "grasp", "s", 4.0, 3]],
        columns=["method", "task", "stage", "scene", "raw_mean", "max"],
    )
    with pytest.raises(ValidationError):
        RawScoreTable(df)
    with pytest.raises(SchemaError):
        RawScoreTable(df.drop(columns=["scene"]))
    bad_max = df.assign(raw_mean=1.0, stage="finish", max=3)
    with pytest.raises(ValidationError):
        RawScoreTable(bad_max).check_rubric()
    with pytest.raises(FileNotFoundError):
        load_raw_scores(tmp_path / "missing.csv")


def test_raw_table_rows():
    rows = load_raw_scores(RAW_SCORES).rows
    assert rows["RoboEngine"]["Put Mouse (grasp)"] == [2.5, 2.25]


@pytest.mark.parametrize(
    "variant, expected",
    [("No aug", (0, False)), ("1x", (1, False)), ("2x mix", (2, True)), ("6x", (6, False))],
)
def test_parse_variant(variant, expected):
    assert parse_variant(variant) == expected


def test_parse_variant_rejects():
    with pytest.raises(SchemaError):
        parse_variant("double")


def test_summarize_scaling():
    summary = summarize_scaling(SCALING_SCORES).set_index("variant")
    expected = {
        "2x mix": 0.66,
        "No aug": 0.27,
        "1x": 0.60,
        "2x": 0.69,
        "4x": 0.70,
        "6x": 0.73,
    }
    for variant, value in expected.items():
        assert summary.loc[variant, "normalized"] == pytest.approx(value, abs=0.01)
    assert summary.loc["2x mix", "train_epochs"] == 700
    assert summary.loc["No aug", "train_epochs"] == 1000
    assert summary.loc["6x", "train_epochs"] == 300


def test_score_file_dispatch():
    assert score_file(SCALING_SCORES).index.name == "variant"
    assert score_file(RAW_SCORES).index.name == "method"
