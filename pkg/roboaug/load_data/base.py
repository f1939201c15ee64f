import base64
import hashlib
from collections.abc import Sequence
from io import BytesIO
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from PIL import Image

from roboaug.errors import ValidationError

# RGB 8-bit raster of shape (height, width, 3)
Frame = np.ndarray


def as_frame(frame) -> Frame:
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValidationError(f"A frame must have shape (H, W, 3), got {frame.shape}")
    if frame.shape[0] < 1 or frame.shape[1] < 1:
        raise ValidationError(f"A frame must be at least 1x1, got {frame.shape}")
    if frame.dtype != np.uint8:
        raise ValidationError(f"A frame must be 8-bit, got dtype {frame.dtype}")
    return frame


def frame_digest(frame: Frame) -> str:
    """Content digest of a raster (shape included), used to key stored masks."""
    frame = np.ascontiguousarray(frame)
    h = hashlib.blake2b(digest_size=16)
    h.update(str(frame.shape).encode())
    h.update(frame.tobytes())
    return h.hexdigest()


def read_frame(path: Union[str, Path]) -> Frame:
    with Image.open(path) as img:
        if img.mode != "RGB":
            img = img.convert("RGB")
        return np.array(img)


def write_frame(frame: Frame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(as_frame(frame)).save(path, format="PNG")
    return path


def array_to_b64_png(raster: np.ndarray) -> str:
    """PNG-encode an RGB frame or single-channel raster as base64 text."""
    buffered = BytesIO()
    Image.fromarray(np.ascontiguousarray(raster)).save(buffered, format="PNG")
    return base64.b64encode(buffered.getvalue()).decode()


def b64_png_to_array(b64image: str) -> np.ndarray:
    buffer = BytesIO(base64.b64decode(b64image, validate=True))
    with Image.open(buffer) as img:
        img.load()
        if img.mode == "1":
            img = img.convert("L")
        elif img.mode not in ("L", "RGB"):
            img = img.convert("RGB")
        return np.array(img)


def image_size(path: Union[str, Path]) -> Tuple[int, int]:
    """(width, height) read from the file header without decoding pixels."""
    with Image.open(path) as img:
        return img.size


class LazyFrames(Sequence):
    """
    Read-only sequence of frames backed by PNG files. Pixels are decoded on
    access, so large episodes never sit in memory all at once.
    """

    def __init__(self, paths: List[Path]):
        self.paths = list(paths)

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return [read_frame(p) for p in self.paths[idx]]
        return read_frame(self.paths[idx])

    def __repr__(self) -> str:
        return f"LazyFrames(n={len(self.paths)})"


class LoadDataset:
    """
    Shared layout constants of the on-disk datasets. Subclasses implement
    ``load_data`` for one layout.
    """

    DATASET_NAME = ""
    FRAME_PATTERN = "{:06d}.png"
    META_FILE = "meta.json"

    @classmethod
    def load_data(cls, root):
        pass

    @classmethod
    def frame_name(cls, index: int) -> str:
        return cls.FRAME_PATTERN.format(index)
