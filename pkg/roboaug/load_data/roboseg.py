import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from roboaug.errors import SchemaError, ValidationError
from roboaug.load_data.base import Frame, LoadDataset, read_frame, write_frame
from roboaug.mask_pipeline.masks import (
    BinaryMask,
    empty_mask,
    intersect,
    popcount,
    read_mask,
    union,
    write_mask,
)

logger = logging.getLogger(__name__)

MASK_CLASSES = ("robot_main", "robot_aux", "object")
ANNOTATIONS_FILE = "annotations.json"
TARGET_DESCRIPTIONS = 10
DEFAULT_OVERLAP_THRESHOLD = 0.01


@dataclass
class AnnotatedFrame:
    """One annotated robot scene: image, three mask classes and text."""

    name: str
    image: Frame
    robot_main: BinaryMask
    robot_aux: BinaryMask
    object: BinaryMask
    instruction: str
    descriptions: List[str] = field(default_factory=list)

    @property
    def robot(self) -> BinaryMask:
        """Whole-robot mask, main arm plus auxiliary parts."""
        return union([self.robot_main, self.robot_aux])

    @property
    def foreground(self) -> BinaryMask:
        return union([self.robot_main, self.robot_aux, self.object])


@dataclass
class ValidationReport:
    name: str
    violations: List[str] = field(default_factory=list)
    n_descriptions: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def _read_annotations(root: Path) -> Dict[str, dict]:
    path = root / ANNOTATIONS_FILE
    if not path.is_file():
        raise SchemaError(f"RoboSeg root {root} is missing {ANNOTATIONS_FILE}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path} is not valid JSON ({e})")
    if not isinstance(doc, dict):
        raise SchemaError(f"{path} must map image names to annotations")
    return doc


def load_roboseg(root: Union[str, Path]) -> List[AnnotatedFrame]:
    """
    Load an annotated segmentation corpus laid out as ``images/<name>.png``,
    ``masks/{robot_main,robot_aux,object}/<name>.png`` and ``annotations.json``.

    A missing ``robot_aux`` file means "no auxiliary parts visible" and
    decodes to an all-zero mask; any other missing class is an error.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"RoboSeg root {root} does not exist")
    annotations = _read_annotations(root)
    images_dir = root / "images"
    names = sorted(p.stem for p in images_dir.glob("*.png")) if images_dir.is_dir() else []
    if not names:
        raise SchemaError(f"no annotated images found in {root}")

    missing = {
        cls: [n for n in names if not (root / "masks" / cls / f"{n}.png").is_file()]
        for cls in ("robot_main", "object")
    }
    if any(missing.values()):
        listing = "; ".join(f"{cls}: {', '.join(ids)}" for cls, ids in missing.items() if ids)
        raise ValidationError(f"Missing mask files ({listing})")

    records = []
    for name in names:
        image = read_frame(images_dir / f"{name}.png")
        h, w = image.shape[:2]
        masks = {}
        for cls in MASK_CLASSES:
            path = root / "masks" / cls / f"{name}.png"
            if cls == "robot_aux" and not path.is_file():
                logger.warning("Image '%s' has no robot_aux mask; using an empty mask", name)
                masks[cls] = empty_mask(h, w)
                continue
            mask = read_mask(path)
            if mask.shape != (h, w):
                raise ValidationError(
                    f"Image '{name}': {cls} mask is {mask.shape[1]}x{mask.shape[0]}, "
                    f"image is {w}x{h}"
                )
            masks[cls] = mask

        entry = annotations.get(name)
        if entry is None:
            logger.warning("Image '%s' has no entry in annotations.json", name)
            entry = {}
        if not isinstance(entry, dict):
            raise SchemaError(
                f"{ANNOTATIONS_FILE} entry for image '{name}' must be an object, got {type(entry).__name__}"
            )
        descriptions = entry.get("descriptions", [])
        if not isinstance(descriptions, list):
            raise SchemaError(f"Image '{name}': descriptions must be a list")
        records.append(
            AnnotatedFrame(
                name=name,
                image=image,
                instruction=str(entry.get("instruction", "")),
                descriptions=[str(d) for d in descriptions],
                **masks,
            )
        )
    logger.info("Loaded %d annotated images from %s", len(records), root)
    return records


def save_roboseg(records: List[AnnotatedFrame], root: Union[str, Path]) -> Path:
    """Write records in the layout read by ``load_roboseg``."""
    root = Path(root)
    annotations = {}
    for rec in records:
        write_frame(rec.image, root / "images" / f"{rec.name}.png")
        for cls in MASK_CLASSES:
            write_mask(getattr(rec, cls), root / "masks" / cls / f"{rec.name}.png")
        annotations[rec.name] = {
            "instruction": rec.instruction,
            "descriptions": list(rec.descriptions),
        }
    (root / ANNOTATIONS_FILE).write_text(
        json.dumps(annotations, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return root


def validate_annotation(
    rec: AnnotatedFrame,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    expect_robot: bool = True,
) -> ValidationReport:
    """Quality gate for one record; never raises, lists violations instead."""
    report = ValidationReport(name=rec.name, n_descriptions=len(rec.descriptions))
    shape = np.asarray(rec.image).shape[:2]

    dims_ok = True
    for cls in MASK_CLASSES:
        mask_shape = np.asarray(getattr(rec, cls)).shape
        if mask_shape != shape:
            dims_ok = False
            report.violations.append(
                f"dimension mismatch: {cls} mask {mask_shape} vs image {shape}"
            )

    if dims_ok:
        robot_px = popcount(rec.robot_main)
        if robot_px == 0:
            if expect_robot:
                report.violations.append("empty robot_main mask")
        else:
            overlap = popcount(intersect([rec.robot_main, rec.object])) / robot_px
            if overlap > overlap_threshold:
                report.violations.append(
                    f"robot_main/object overlap {overlap:.1%} exceeds "
                    f"{overlap_threshold:.1%} of robot_main"
                )

    if not rec.instruction or not rec.instruction.strip():
        report.violations.append("missing instruction")

    if report.n_descriptions != TARGET_DESCRIPTIONS:
        logger.debug(
            "Image '%s' has %d descriptions (target %d)",
            rec.name,
            report.n_descriptions,
            TARGET_DESCRIPTIONS,
        )
    return report


class RoboSegLoader(LoadDataset):
    DATASET_NAME = "roboseg"

    @classmethod
    def load_data(cls, root):
        return load_roboseg(root)
