import json
import re
from pathlib import Path
from typing import Tuple, Union

import pandas as pd

from roboaug import ASSETS_DIR
from roboaug.errors import SchemaError
from roboaug.experiments.scale_plan import BASE_EPOCHS, SCALE_EPOCHS
from roboaug.metrics.evaluation_metrics import normalize_cell
from roboaug.metrics.evaluation_pipeline import load_raw_scores, score_table

RAW_SCORES = ASSETS_DIR / "results" / "raw_behavior_scores.csv"
SCALING_SCORES = ASSETS_DIR / "results" / "scaling_raw_scores.csv"
SCALING_COLUMNS = ["variant", "scene", "raw_mean", "max"]

_VARIANT = re.compile(r"^(\d+)x( mix)?$")


def parse_variant(variant: str) -> Tuple[int, bool]:
    """``"2x mix"`` -> (2, True); ``"No aug"`` -> (0, False)."""
    if variant.strip().lower() == "no aug":
        return 0, False
    m = _VARIANT.match(variant.strip())
    if not m:
        raise SchemaError(f"Unknown scaling variant '{variant}'")
    return int(m.group(1)), bool(m.group(2))


def summarize_scaling(path: Union[str, Path] = SCALING_SCORES) -> pd.DataFrame:
    """
    Normalized finish score per scaling variant, with the training epochs the
    variant was trained for. Row order follows the file.
    """
    df = pd.read_csv(path)
    missing = [c for c in SCALING_COLUMNS if c not in df.columns]
    if missing:
        raise SchemaError(f"Scaling score table lacks columns {missing}")
    rows = []
    for variant, group in df.groupby("variant", sort=False):
        factor, mix = parse_variant(variant)
        max_score = float(group["max"].iloc[0])
        rows.append(
            {
                "variant": variant,
                "factor": factor,
                "mix": mix,
                "raw_mean": float(group["raw_mean"].mean()),
                "normalized": normalize_cell(group["raw_mean"], max_score),
                "train_epochs": SCALE_EPOCHS.get(factor, BASE_EPOCHS),
            }
        )
    return pd.DataFrame(rows)


def is_scaling_table(path: Union[str, Path]) -> bool:
    return "variant" in pd.read_csv(path, nrows=0).columns


def score_file(path: Union[str, Path]) -> pd.DataFrame:
    """Normalized view of either a raw behavior table or a scaling table."""
    if is_scaling_table(path):
        return summarize_scaling(path).set_index("variant")
    return score_table(load_raw_scores(path))


def format_table(df: pd.DataFrame, digits: int = 2) -> str:
    """Aligned text rendering."""
    return df.round(digits).to_string()


def table_to_json(df: pd.DataFrame) -> dict:
    return json.loads(df.to_json(orient="index"))


def write_json(obj, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
    return path
