"""
Binary and soft mask algebra.

Masks are plain numpy arrays: a ``BinaryMask`` is a 2-D ``bool`` array of shape
``(height, width)`` and a ``SoftMask`` is a 2-D ``float64`` array of alphas in
``[0, 1]``. All functions are pure and never modify their inputs.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image
from scipy import ndimage

from roboaug.errors import ValidationError

BinaryMask = np.ndarray
SoftMask = np.ndarray

MASK_THRESHOLD = 128


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle, inclusive ``(x0, y0)`` and exclusive ``(x1, y1)``."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValidationError(f"Invalid rect {self}: corners are out of order")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def area(self) -> int:
        return self.width * self.height

    def enclose(self, other: "Rect") -> "Rect":
        """Smallest rect covering both rects."""
        return Rect(
            min(self.x0, other.x0),
            min(self.y0, other.y0),
            max(self.x1, other.x1),
            max(self.y1, other.y1),
        )


def as_mask(mask) -> BinaryMask:
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.shape[0] < 1 or mask.shape[1] < 1:
        raise ValidationError(
            f"A mask must be a 2-D array of at least 1x1, got shape {mask.shape}"
        )
    return mask.astype(bool, copy=False)


def mask_dims(mask: np.ndarray) -> Tuple[int, int]:
    """(width, height) of a mask or raster."""
    return int(mask.shape[1]), int(mask.shape[0])


def check_same_dims(*arrays: np.ndarray, what: str = "masks") -> None:
    shapes = {tuple(a.shape[:2]) for a in arrays}
    if len(shapes) > 1:
        raise ValidationError(f"Dimension mismatch between {what}: {sorted(shapes)}")


def empty_mask(height: int, width: int) -> BinaryMask:
    return np.zeros((height, width), dtype=bool)


def full_mask(height: int, width: int) -> BinaryMask:
    return np.ones((height, width), dtype=bool)


def popcount(mask: BinaryMask) -> int:
    return int(np.count_nonzero(mask))


def union(masks: Sequence[BinaryMask]) -> BinaryMask:
    """Foreground union: a pixel is set iff it is set in any input mask."""
    if len(masks) == 0:
        raise ValidationError("union() needs at least one mask")
    masks = [as_mask(m) for m in masks]
    check_same_dims(*masks)
    return np.logical_or.reduce(masks)


def intersect(masks: Sequence[BinaryMask]) -> BinaryMask:
    if len(masks) == 0:
        raise ValidationError("intersect() needs at least one mask")
    masks = [as_mask(m) for m in masks]
    check_same_dims(*masks)
    return np.logical_and.reduce(masks)


def complement(mask: BinaryMask) -> BinaryMask:
    return ~as_mask(mask)


def _square(radius: int) -> np.ndarray:
    return np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)


def _check_radius(radius: int) -> int:
    radius = int(radius)
    if radius < 0:
        raise ValidationError(f"Radius must be >= 0, got {radius}")
    return radius


def dilate(mask: BinaryMask, radius: int) -> BinaryMask:
    """
    Morphological dilation with a square structuring element of side
    ``2 * radius + 1``. Radius 0 returns an unchanged copy.
    """
    mask = as_mask(mask)
    radius = _check_radius(radius)
    if radius == 0:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=_square(radius))


def erode(mask: BinaryMask, radius: int) -> BinaryMask:
    """
    Square erosion. Pixels beyond the frame count as set, so a full mask
    erodes to itself.
    """
    mask = as_mask(mask)
    radius = _check_radius(radius)
    if radius == 0:
        return mask.copy()
    return ndimage.binary_erosion(mask, structure=_square(radius), border_value=1)


def _box_count(mask: BinaryMask, radius: int) -> np.ndarray:
    """Exact number of set pixels in every (2r+1)^2 window, edge-replicated."""
    k = 2 * radius + 1
    return ndimage.correlate(mask.astype(np.int64), np.ones((k, k), dtype=np.int64), mode="nearest")


def feather(mask: BinaryMask, radius: int) -> SoftMask:
    """
    Soft alpha map from a box blur of side ``2 * radius + 1``.

    The frame border is replicated, so only mask edges (not frame edges) get
    fractional alpha; interior pixels keep exactly 1.0.
    """
    mask = as_mask(mask)
    radius = _check_radius(radius)
    if radius == 0:
        return mask.astype(np.float64)
    window = (2 * radius + 1) ** 2
    alpha = _box_count(mask, radius) / window
    return np.clip(alpha, 0.0, 1.0)


def bbox(mask: BinaryMask) -> Optional[Rect]:
    """Tightest rect covering every set pixel, ``None`` for an empty mask."""
    mask = as_mask(mask)
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return None
    return Rect(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)


def box_support(mask: BinaryMask) -> BinaryMask:
    """Mask of the pixels inside ``bbox(mask)``; empty for an empty mask."""
    mask = as_mask(mask)
    support = np.zeros_like(mask)
    rect = bbox(mask)
    if rect is not None:
        support[rect.y0 : rect.y1, rect.x0 : rect.x1] = True
    return support


def decode_mask(raster: np.ndarray) -> BinaryMask:
    """8-bit single-channel raster to mask; values >= 128 are foreground."""
    raster = np.asarray(raster)
    if raster.ndim == 3 and raster.shape[2] == 1:
        raster = raster[:, :, 0]
    if raster.ndim != 2:
        raise ValidationError(
            f"Mask rasters must be single-channel, got shape {raster.shape}"
        )
    if raster.dtype != np.uint8:
        raise ValidationError(f"Mask rasters must be 8-bit, got dtype {raster.dtype}")
    return raster >= MASK_THRESHOLD


def encode_mask(mask: BinaryMask) -> np.ndarray:
    """Mask to 8-bit raster, foreground 255 and background 0."""
    return as_mask(mask).astype(np.uint8) * 255


def read_mask(path: Union[str, Path]) -> BinaryMask:
    with Image.open(path) as img:
        if img.mode == "1":
            img = img.convert("L")
        if img.mode != "L":
            raise ValidationError(
                f"Mask file {path} must be single-channel 8-bit, got mode {img.mode}"
            )
        return decode_mask(np.array(img))


def write_mask(mask: BinaryMask, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(encode_mask(mask)).save(path, format="PNG")
    return path
