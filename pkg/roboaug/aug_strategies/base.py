from __future__ import annotations

import hashlib
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Optional, Tuple

import numpy as np

from roboaug.errors import SchemaError
from roboaug.load_data.base import Frame
from roboaug.mask_pipeline.masks import BinaryMask

if TYPE_CHECKING:
    from roboaug.aug_strategies.assets import AssetPool
    from roboaug.aug_strategies.generative import GenBackendDescriptor
    from roboaug.aug_strategies.prompt_pool import PromptPool
    from roboaug.seg_pipeline.backends import BackendDescriptor

AUG_METHOD_NAMES = ("engine", "background", "imagenet", "texture", "inpainting", "none")
METHOD_ALIASES = {"robo_engine": "engine"}
BACKGROUND_SCOPES = ("per_frame", "per_episode")
RESAMPLE_MODES = ("bilinear", "nearest")


INTEGRAL = (int, np.integer)
REAL = (float, int, np.floating, np.integer)


def check_field_types(obj, expected: Dict[str, tuple]) -> None:
    """SchemaError for the first field whose value is not of the expected types; bools are not numbers."""
    for name, types in expected.items():
        value = getattr(obj, name)
        if (isinstance(value, bool) and bool not in types) or not isinstance(value, types):
            raise SchemaError(
                f"{type(obj).__name__}.{name} must be {types[0].__name__}, got {type(value).__name__} {value!r}"
            )


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from any mix of ints and strings."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, (int, np.integer)):
            token = f"i:{int(part)}"
        elif isinstance(part, str):
            token = f"s:{part}"
        else:
            token = f"r:{part!r}"
        h.update(token.encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little") >> 1


def frame_rng(seed: int, episode_id: str, frame_index: int) -> np.random.Generator:
    """
    Random stream of one frame. Only (seed, episode, index) feed it, so
    results do not depend on batching or on the order frames are processed.
    """
    return np.random.default_rng(derive_seed(seed, episode_id, frame_index))


def normalize_method(method: str) -> str:
    method = METHOD_ALIASES.get(method, method)
    if method not in AUG_METHOD_NAMES:
        raise SchemaError(f"Unknown aug method '{method}', expected one of {AUG_METHOD_NAMES}")
    return method


@dataclass
class AugConfig:
    """
    Augmentation settings. ``backends`` may hold ``generator`` and
    ``inpainter`` (GenBackendDescriptor) and ``proposals`` (BackendDescriptor);
    missing generators fall back to the procedural backend.
    """

    method: str = "engine"
    seed: int = 0
    background_scope: str = "per_frame"
    dilate_radius: int = 0
    feather_radius: int = 0
    inpaint_count: int = 5
    irrelevance_threshold: float = 0.05
    inpaint_padding: int = 0
    resample: str = "bilinear"
    scale_jitter: float = 1.0
    extract_objects: bool = False
    backends: Dict = field(default_factory=dict)

    def __post_init__(self):
        check_field_types(
            self,
            {
                "method": (str,),
                "seed": INTEGRAL,
                "background_scope": (str,),
                "dilate_radius": INTEGRAL,
                "feather_radius": INTEGRAL,
                "inpaint_count": INTEGRAL,
                "irrelevance_threshold": REAL,
                "inpaint_padding": INTEGRAL,
                "resample": (str,),
                "scale_jitter": REAL,
                "extract_objects": (bool,),
                "backends": (Mapping,),
            },
        )
        self.method = normalize_method(self.method)
        self.background_scope = self.background_scope.replace("-", "_")
        if self.background_scope not in BACKGROUND_SCOPES:
            raise SchemaError(f"background_scope must be one of {BACKGROUND_SCOPES}")
        if self.inpaint_count < 0:
            raise SchemaError("inpaint_count must be >= 0")
        if self.dilate_radius < 0 or self.feather_radius < 0 or self.inpaint_padding < 0:
            raise SchemaError("Radii must be >= 0")
        if not 0.0 <= self.irrelevance_threshold <= 1.0:
            raise SchemaError("irrelevance_threshold must be in [0, 1]")
        if self.resample not in RESAMPLE_MODES:
            raise SchemaError(f"resample must be one of {RESAMPLE_MODES}")
        if self.scale_jitter < 1.0:
            raise SchemaError("scale_jitter must be >= 1.0")


@dataclass
class StrategyResources:
    """Everything a strategy may draw on besides the frame itself."""

    config: AugConfig
    prompt_pool: Optional[PromptPool] = None
    asset_pool: Optional[AssetPool] = None
    generator: Optional[GenBackendDescriptor] = None
    inpainter: Optional[GenBackendDescriptor] = None
    proposals: Optional[BackendDescriptor] = None


class AugStrategy:
    """
    One background-synthesis method. Compositing strategies return a
    background B* through ``background``; the others return a finished frame
    through ``augment``.
    """

    METHOD_NAME = ""
    COMPOSITES = True
    USES_PROMPT = False
    USES_FOREGROUND = True

    @classmethod
    def background(
        cls,
        frame: Frame,
        fg: BinaryMask,
        prompt: Optional[str],
        resources: StrategyResources,
        rng: np.random.Generator,
    ) -> Frame:
        raise NotImplementedError(f"{cls.METHOD_NAME} does not synthesize backgrounds")

    @classmethod
    def augment(
        cls,
        frame: Frame,
        fg: BinaryMask,
        resources: StrategyResources,
        rng: np.random.Generator,
    ) -> Frame:
        raise NotImplementedError(f"{cls.METHOD_NAME} is a compositing strategy")


def frame_dims(frame: Frame) -> Tuple[int, int]:
    return int(frame.shape[1]), int(frame.shape[0])
