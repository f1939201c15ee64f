from pathlib import Path
from typing import Optional, Union

from roboaug.errors import SchemaError
from roboaug.load_data.demo import DemoDatasetLoader
from roboaug.load_data.roboseg import ANNOTATIONS_FILE, RoboSegLoader


DATASETS = {
    "demo": DemoDatasetLoader,
    "roboseg": RoboSegLoader,
}


def detect_dataset(root: Union[str, Path]) -> str:
    """``roboseg`` when ``root`` holds an annotations file, ``demo`` otherwise."""
    return "roboseg" if (Path(root) / ANNOTATIONS_FILE).is_file() else "demo"


def load_data(root: Union[str, Path], dataset_name: Optional[str] = None):
    name = dataset_name or detect_dataset(root)
    if name not in DATASETS:
        raise SchemaError(f"Unknown dataset '{name}', expected one of {sorted(DATASETS)}")
    return DATASETS[name].load_data(root)
