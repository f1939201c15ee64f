import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from roboaug.errors import BackendError, SchemaError, ValidationError
from roboaug.load_data.config import load_data
from roboaug.mask_pipeline.masks import BinaryMask
from roboaug.metrics.evaluation_metrics import aggregate_average, giou, mask_iou, normalize_cell
from roboaug.seg_pipeline.backends import BackendDescriptor, SegRequest, segment
from roboaug.seg_pipeline.mask_store import ROBOT_PROMPT

logger = logging.getLogger(__name__)

RAW_SCORE_COLUMNS = ["method", "task", "stage", "scene", "raw_mean", "max"]
FINISH_STAGE = "finish"


@dataclass
class GIoUReport:
    """
    Per-item GIoU and IoU plus their means. Items whose score is undefined
    (both masks empty) or whose prediction failed are listed in ``failures``
    and left out of the means.
    """

    per_item: List[Dict] = field(default_factory=list)
    mean: Optional[float] = None
    mean_iou: Optional[float] = None
    failures: List[Dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _report(per_item: List[Dict], failures: List[Dict]) -> GIoUReport:
    if per_item:
        mean = float(np.mean([r["giou"] for r in per_item]))
        mean_iou = float(np.mean([r["iou"] for r in per_item]))
    else:
        mean = mean_iou = None
    return GIoUReport(per_item=per_item, mean=mean, mean_iou=mean_iou, failures=failures)


def mean_giou(
    preds: Sequence[BinaryMask],
    gts: Sequence[BinaryMask],
    ids: Optional[Sequence[str]] = None,
) -> GIoUReport:
    if len(preds) != len(gts):
        raise ValidationError(f"mean_giou got {len(preds)} predictions for {len(gts)} ground truths")
    if not preds:
        raise ValidationError("mean_giou needs at least one mask pair")
    ids = list(ids) if ids is not None else [str(i) for i in range(len(preds))]

    per_item, failures = [], []
    for item_id, pred, gt in zip(ids, preds, gts):
        try:
            per_item.append({"id": item_id, "giou": giou(pred, gt), "iou": mask_iou(pred, gt)})
        except ValidationError as e:
            failures.append({"id": item_id, "error": str(e)})
    return _report(per_item, failures)


def eval_seg(
    backend: BackendDescriptor,
    roboseg_root: Union[str, Path],
    progress: bool = False,
) -> GIoUReport:
    """
    Score a segmentation backend on an annotated corpus: prompt ``"robot"``
    against robot_main ∪ robot_aux of every image.
    """
    records = load_data(roboseg_root, "roboseg")
    per_item, failures = [], []
    for rec in tqdm(records, desc="eval-seg", disable=not progress):
        try:
            pred = segment(backend, SegRequest(rec.image, ROBOT_PROMPT))
            per_item.append({"id": rec.name, "giou": giou(pred, rec.robot), "iou": mask_iou(pred, rec.robot)})
        except (BackendError, ValidationError) as e:
            logger.warning("Scoring %s failed: %s", rec.name, e)
            failures.append({"id": rec.name, "error": str(e)})
    report = _report(per_item, failures)
    logger.info(
        "Scored %d of %d images from %s, mean GIoU %s",
        len(per_item),
        len(records),
        roboseg_root,
        report.mean,
    )
    return report


@dataclass(frozen=True)
class ScoreRubric:
    """Stage maxima of a multi-stage behavior score; finish is their sum."""

    stages: Tuple[Tuple[str, float], ...]

    def __post_init__(self):
        if not self.stages:
            raise SchemaError("A rubric needs at least one stage")
        for name, max_score in self.stages:
            if max_score <= 0:
                raise SchemaError(f"Stage '{name}' needs a positive maximum")

    @property
    def finish_max(self) -> float:
        return float(sum(m for _, m in self.stages))

    def max_for(self, stage: str) -> float:
        if stage == FINISH_STAGE:
            return self.finish_max
        for name, max_score in self.stages:
            if name == stage:
                return float(max_score)
        raise SchemaError(f"Unknown stage '{stage}'")


BEHAVIOR_RUBRICS = {
    "Fold Towel": ScoreRubric((("grasp", 3), ("fold", 3))),
    "Put Mouse": ScoreRubric((("grasp", 3), ("put", 3))),
}


class RawScoreTable:
    """Per-scene mean behavior scores in long format, one row per scene."""

    def __init__(self, df: pd.DataFrame):
        missing = [c for c in RAW_SCORE_COLUMNS if c not in df.columns]
        if missing:
            raise SchemaError(f"Raw score table lacks columns {missing}")
        df = df[RAW_SCORE_COLUMNS].copy()
        df["raw_mean"] = df["raw_mean"].astype(float)
        df["max"] = df["max"].astype(float)
        bad = df[(df["raw_mean"] < 0) | (df["raw_mean"] > df["max"]) | (df["max"] <= 0)]
        if not bad.empty:
            raise ValidationError(f"Raw scores out of range:\n{bad.to_string(index=False)}")
        self.df = df

    @property
    def rows(self) -> Dict[str, Dict[str, List[float]]]:
        """method -> "Task (Stage)" cell -> per-scene raw means."""
        out: Dict[str, Dict[str, List[float]]] = {}
        for (method, cell), group in self._cells():
            out.setdefault(method, {})[cell] = group["raw_mean"].tolist()
        return out

    def _cells(self):
        df = self.df.assign(cell=self.df["task"] + " (" + self.df["stage"] + ")")
        return df.groupby(["method", "cell"], sort=False)

    def check_rubric(self, rubrics: Dict[str, ScoreRubric] = BEHAVIOR_RUBRICS) -> None:
        for row in self.df.itertuples(index=False):
            if row.task in rubrics and rubrics[row.task].max_for(row.stage) != row.max:
                raise ValidationError(
                    f"{row.method} / {row.task} ({row.stage}) has max {row.max}, "
                    f"rubric says {rubrics[row.task].max_for(row.stage)}"
                )


def load_raw_scores(path: Union[str, Path]) -> RawScoreTable:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Raw score file {path} does not exist")
    return RawScoreTable(pd.read_csv(path))


def score_table(table: RawScoreTable) -> pd.DataFrame:
    """
    Normalized table: one row per method, one column per task/stage cell,
    plus the max-weighted ``Average``. Row and column order follow the input.
    """
    cells: Dict[str, Dict[str, float]] = {}
    weights: Dict[str, List[Tuple[float, float]]] = {}
    for (method, cell), group in table._cells():
        max_score = float(group["max"].iloc[0])
        if (group["max"] != max_score).any():
            raise ValidationError(f"{method} / {cell} mixes score maxima")
        cells.setdefault(method, {})[cell] = normalize_cell(group["raw_mean"], max_score)
        weights.setdefault(method, []).append((float(group["raw_mean"].mean()), max_score))

    out = pd.DataFrame.from_dict(cells, orient="index")
    out["Average"] = [aggregate_average(weights[m]) for m in out.index]
    out.index.name = "method"
    return out
