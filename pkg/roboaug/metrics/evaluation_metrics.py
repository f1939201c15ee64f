from typing import Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

from roboaug.errors import ValidationError
from roboaug.mask_pipeline.masks import BinaryMask, as_mask, bbox, box_support, check_same_dims


def _pair(pred: BinaryMask, gt: BinaryMask) -> Tuple[np.ndarray, np.ndarray]:
    pred, gt = as_mask(pred), as_mask(gt)
    check_same_dims(pred, gt, what="prediction and ground truth")
    return pred, gt


def mask_iou(pred: BinaryMask, gt: BinaryMask) -> float:
    """Intersection over union of two masks, pixel counts."""
    pred, gt = _pair(pred, gt)
    union_count = int(np.count_nonzero(pred | gt))
    if union_count == 0:
        raise ValidationError("IoU is undefined when both masks are empty")
    return int(np.count_nonzero(pred & gt)) / union_count


def giou(pred: BinaryMask, gt: BinaryMask) -> float:
    """
    Generalized IoU on masks: pixel-count IoU minus the share of the joint
    bounding box C left uncovered by the two masks' own boxes. Lies in
    (-1, 1], is symmetric, is exactly 1 for identical masks and equals the
    box GIoU when both masks are filled rectangles.
    """
    pred, gt = _pair(pred, gt)
    joint = pred | gt
    union_count = int(np.count_nonzero(joint))
    if union_count == 0:
        raise ValidationError("GIoU is undefined when both masks are empty")
    iou = int(np.count_nonzero(pred & gt)) / union_count
    covered = int(np.count_nonzero(box_support(pred) | box_support(gt)))
    enclosing = bbox(joint).area
    return iou - (enclosing - covered) / enclosing


def normalize_cell(raw_scene_means: Sequence[float], max_score: float) -> float:
    """Mean of the per-scene raw scores divided by the stage maximum."""
    if max_score <= 0:
        raise ValidationError(f"Score maximum must be > 0, got {max_score}")
    values = np.asarray(list(raw_scene_means), dtype=float)
    if values.size == 0:
        raise ValidationError("normalize_cell needs at least one scene score")
    if values.min() < 0 or values.max() > max_score:
        raise ValidationError(f"Raw scores must lie in [0, {max_score}], got {values.tolist()}")
    return float(values.mean() / max_score)


Cell = Union[Mapping[str, float], Tuple[float, float]]


def _cell(cell: Cell) -> Tuple[float, float]:
    if isinstance(cell, Mapping):
        return float(cell["raw_mean"]), float(cell["max"])
    raw_mean, max_score = cell
    return float(raw_mean), float(max_score)


def aggregate_average(cells: Iterable[Cell]) -> float:
    """
    Max-weighted average over cells: sum of raw means over sum of maxima,
    not the mean of the normalized cells.
    """
    pairs = [_cell(c) for c in cells]
    if not pairs:
        raise ValidationError("aggregate_average needs at least one cell")
    total_max = sum(m for _, m in pairs)
    if total_max <= 0:
        raise ValidationError("Cell maxima must be > 0")
    return sum(r for r, _ in pairs) / total_max


def success_rate(per_trial_scores: Sequence[float], threshold: float = 2) -> float:
    """Fraction of trials scoring at least ``threshold``."""
    scores = np.asarray(list(per_trial_scores), dtype=float)
    if scores.size == 0:
        raise ValidationError("success_rate needs at least one trial")
    return float(np.mean(scores >= threshold))
