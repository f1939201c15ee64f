import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from roboaug.errors import SchemaError, ValidationError
from roboaug.load_data.base import Frame

ASSET_KINDS = ("texture", "image")
ASSET_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")

RESAMPLE = {
    "nearest": Image.Resampling.NEAREST,
    "bilinear": Image.Resampling.BILINEAR,
}


@dataclass(frozen=True)
class AssetPool:
    """Directory-backed set of background textures or photographs."""

    kind: str
    entries: tuple

    def __post_init__(self):
        if self.kind not in ASSET_KINDS:
            raise SchemaError(f"Asset pool kind must be one of {ASSET_KINDS}, got '{self.kind}'")
        object.__setattr__(self, "entries", tuple(Path(e) for e in self.entries))
        if not self.entries:
            raise SchemaError(f"{self.kind} asset pool is empty")

    def __len__(self) -> int:
        return len(self.entries)


def load_asset_pool(root: Union[str, Path], kind: str) -> AssetPool:
    """Every image file below ``root`` (recursive), in sorted path order."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"Asset directory {root} does not exist")
    entries = sorted(p for p in root.rglob("*") if p.suffix.lower() in ASSET_SUFFIXES)
    if not entries:
        raise SchemaError(f"No images found in asset directory {root}")
    return AssetPool(kind, entries)


@functools.lru_cache(maxsize=64)
def read_asset(path: Path) -> Frame:
    try:
        with Image.open(path) as img:
            frame = np.array(img.convert("RGB"))
    except (UnidentifiedImageError, OSError) as e:
        raise ValidationError(f"Asset {path} could not be decoded ({e})")
    frame.flags.writeable = False
    return frame


def cover_crop(
    image: Frame,
    dims: Tuple[int, int],
    scale: float = 1.0,
    resample: str = "bilinear",
) -> Frame:
    """
    Scale ``image`` uniformly until it covers ``dims`` (width, height), times
    ``scale``, then take the centered crop.
    """
    width, height = dims
    h0, w0 = image.shape[:2]
    factor = max(width / w0, height / h0) * scale
    new_w = max(width, int(round(w0 * factor)))
    new_h = max(height, int(round(h0 * factor)))
    if (new_w, new_h) != (w0, h0):
        image = np.array(Image.fromarray(image).resize((new_w, new_h), RESAMPLE[resample]))
    left = (new_w - width) // 2
    top = (new_h - height) // 2
    return image[top : top + height, left : left + width].copy()


def pick_asset(pool: AssetPool, rng: np.random.Generator) -> Frame:
    return read_asset(pool.entries[int(rng.integers(len(pool)))])
