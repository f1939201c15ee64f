import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from roboaug.aug_strategies.assets import load_asset_pool
from roboaug.aug_strategies.base import (
    INTEGRAL,
    AugConfig,
    StrategyResources,
    check_field_types,
    frame_rng,
    normalize_method,
)
from roboaug.aug_strategies.config import ASSET_METHODS, get_strategy
from roboaug.aug_strategies.generative import GenBackendDescriptor, parse_gen_spec
from roboaug.aug_strategies.prompt_pool import DEFAULT_PROMPT_POOL, load_prompt_pool, sample_prompt
from roboaug.compositor.compositor import AugFrame, Provenance, composite
from roboaug.errors import BackendError, SchemaError, ValidationError
from roboaug.load_data.base import Frame, as_frame
from roboaug.mask_pipeline.masks import BinaryMask, dilate, feather
from roboaug.seg_pipeline.backends import (
    BackendDescriptor,
    parse_backend_spec,
    robot_foreground,
    robot_foreground_video,
)

logger = logging.getLogger(__name__)


def load_config_file(path: Union[str, Path]) -> Mapping:
    """Parse a YAML config file into a mapping; malformed files are schema errors."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise SchemaError(f"{path} is not valid YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, Mapping):
        raise SchemaError(f"{path} must hold a mapping, got {type(data).__name__}")
    return data


def _seg_descriptor(value) -> BackendDescriptor:
    if isinstance(value, BackendDescriptor):
        return value
    if isinstance(value, str):
        return parse_backend_spec(value)
    if isinstance(value, Mapping):
        return BackendDescriptor(value["kind"], value.get("endpoint"), dict(value.get("params", {})))
    raise SchemaError(f"Cannot build a segmentation backend from {value!r}")


def _gen_descriptor(value) -> GenBackendDescriptor:
    if isinstance(value, GenBackendDescriptor):
        return value
    if isinstance(value, str):
        return parse_gen_spec(value)
    if isinstance(value, Mapping):
        return GenBackendDescriptor(
            value.get("kind", "procedural"), value.get("endpoint"), dict(value.get("params", {}))
        )
    raise SchemaError(f"Cannot build a generative backend from {value!r}")


@dataclass
class EngineConfig:
    """Everything one augmentation run needs."""

    robo_seg: BackendDescriptor
    obj_seg: BackendDescriptor
    aug: AugConfig = field(default_factory=AugConfig)
    batch_size: int = 1
    prompt_pool: Optional[Path] = DEFAULT_PROMPT_POOL
    asset_pool: Optional[Path] = None
    output: Optional[Path] = None

    def __post_init__(self):
        self.robo_seg = _seg_descriptor(self.robo_seg)
        self.obj_seg = _seg_descriptor(self.obj_seg)
        if isinstance(self.aug, Mapping):
            self.aug = AugConfig(**self.aug)
        if not isinstance(self.aug, AugConfig):
            raise SchemaError(f"EngineConfig.aug must be a mapping, got {type(self.aug).__name__}")
        check_field_types(self, {"batch_size": INTEGRAL})
        for name in ("prompt_pool", "asset_pool", "output"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, (str, os.PathLike)):
                raise SchemaError(f"EngineConfig.{name} must be a path, got {type(value).__name__} {value!r}")
        if self.batch_size < 1:
            raise SchemaError(f"batch_size must be >= 1, got {self.batch_size}")
        needs_assets = self.aug.method in ASSET_METHODS
        if needs_assets and self.asset_pool is None:
            raise SchemaError(f"The {self.aug.method} method needs an asset_pool directory")
        if not needs_assets and self.asset_pool is not None:
            raise SchemaError(f"asset_pool is only used by {sorted(ASSET_METHODS)}")
        if get_strategy(self.aug.method).USES_PROMPT and self.prompt_pool is None:
            raise SchemaError(f"The {self.aug.method} method needs a prompt pool")
        for name in ("prompt_pool", "asset_pool", "output"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, Path(value))

    @classmethod
    def from_dict(cls, data: Mapping) -> "EngineConfig":
        """
        Build from plain data as found in a YAML file. Backends may be spec
        strings (``passthrough:DIR``) or ``{kind, endpoint, params}`` maps;
        ``aug.backends`` may hold ``generator``, ``inpainter`` and ``proposals``.
        """
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise SchemaError(f"Unknown engine config keys {sorted(unknown)}")
        for key in ("robo_seg", "obj_seg"):
            if key not in data:
                raise SchemaError(f"Engine config needs '{key}'")
        data = dict(data)
        aug = data.get("aug") or {}
        if not isinstance(aug, Mapping):
            raise SchemaError(f"Engine config 'aug' must be a mapping, got {type(aug).__name__}")
        aug = dict(aug)
        aug_known = {f.name for f in fields(AugConfig)}
        if set(aug) - aug_known:
            raise SchemaError(f"Unknown aug config keys {sorted(set(aug) - aug_known)}")
        backends = aug.get("backends") or {}
        if not isinstance(backends, Mapping):
            raise SchemaError(f"Engine config 'aug.backends' must be a mapping, got {type(backends).__name__}")
        backends = dict(backends)
        for key in ("generator", "inpainter"):
            if key in backends:
                backends[key] = _gen_descriptor(backends[key])
        if "proposals" in backends:
            backends["proposals"] = _seg_descriptor(backends["proposals"])
        aug["backends"] = backends
        data["aug"] = AugConfig(**aug)
        return cls(**data)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "EngineConfig":
        return cls.from_dict(load_config_file(path))

    def build_resources(self) -> StrategyResources:
        """Load the pools and backends the configured method draws on."""
        strategy = get_strategy(self.aug.method)
        backends = self.aug.backends
        prompt_pool = None
        if strategy.USES_PROMPT or (self.prompt_pool is not None and self.prompt_pool.is_file()):
            prompt_pool = load_prompt_pool(self.prompt_pool)
        asset_pool = None
        if self.aug.method in ASSET_METHODS:
            asset_pool = load_asset_pool(self.asset_pool, ASSET_METHODS[self.aug.method])
        return StrategyResources(
            config=self.aug,
            prompt_pool=prompt_pool,
            asset_pool=asset_pool,
            generator=backends.get("generator") or GenBackendDescriptor("procedural"),
            inpainter=backends.get("inpainter") or GenBackendDescriptor("procedural"),
            proposals=backends.get("proposals") or self.obj_seg,
        )


def postprocess_foreground(fg: BinaryMask, cfg: AugConfig):
    """Dilation margin, then optional feathering into an alpha map."""
    fg = dilate(fg, cfg.dilate_radius)
    if cfg.feather_radius:
        return fg, feather(fg, cfg.feather_radius)
    return fg, fg


class RoboEngine:
    """
    Augmentation engine behind a small API:

        engine = RoboEngine(robo_seg_method="passthrough:data", aug_method="robo_engine")
        aug = engine.gen_image(frame, ["mouse", "pad"])
        aug_video = engine.gen_video(frames, ["mouse", "pad"])
    """

    def __init__(
        self,
        robo_seg_method: Union[str, BackendDescriptor] = "passthrough",
        obj_seg_method: Union[str, BackendDescriptor, None] = None,
        aug_method: str = "engine",
        batch_size: int = 32,
        seed: int = 0,
        prompt_pool: Optional[Union[str, Path]] = DEFAULT_PROMPT_POOL,
        asset_pool: Optional[Union[str, Path]] = None,
        config: Optional[EngineConfig] = None,
        **aug_options,
    ):
        if config is None:
            robo = _seg_descriptor(robo_seg_method)
            config = EngineConfig(
                robo_seg=robo,
                obj_seg=_seg_descriptor(obj_seg_method) if obj_seg_method is not None else robo,
                aug=AugConfig(method=normalize_method(aug_method), seed=seed, **aug_options),
                batch_size=batch_size,
                prompt_pool=prompt_pool,
                asset_pool=asset_pool,
            )
        self.config = config
        self.strategy = get_strategy(config.aug.method)
        self.resources = config.build_resources()

    @classmethod
    def from_config(cls, config: EngineConfig) -> "RoboEngine":
        return cls(config=config)

    def _provenance(self, prompt: Optional[str]) -> Provenance:
        aug = self.config.aug
        if not self.strategy.USES_FOREGROUND:
            kind = None
        elif not self.strategy.COMPOSITES:
            kind = self.resources.inpainter.kind
        elif self.strategy.USES_PROMPT:
            kind = self.resources.generator.kind
        else:
            kind = self.resources.asset_pool.kind
        return Provenance(method=aug.method, seed=aug.seed, prompt=prompt, backend_kind=kind)

    def _augment(
        self,
        frame: Frame,
        fg: Optional[BinaryMask],
        rng: np.random.Generator,
        background: Optional[Frame] = None,
        prompt: Optional[str] = None,
    ) -> Tuple[AugFrame, Optional[Frame], Optional[str]]:
        """The augmented frame plus the background and prompt it was composited with."""
        if not self.strategy.USES_FOREGROUND:
            out = self.strategy.augment(frame, fg, self.resources, rng)
            return AugFrame(out, self._provenance(None)), None, None
        fg, alpha = postprocess_foreground(fg, self.config.aug)
        if not self.strategy.COMPOSITES:
            out = self.strategy.augment(frame, fg, self.resources, rng)
            return AugFrame(out, self._provenance(None)), None, None
        if background is None:
            if self.strategy.USES_PROMPT:
                prompt = sample_prompt(self.resources.prompt_pool, rng)
            background = self.strategy.background(frame, fg, prompt, self.resources, rng)
        return composite(frame, alpha, background, self._provenance(prompt)), background, prompt

    def gen_image(
        self,
        frame: Frame,
        object_names: Sequence[str] = (),
        episode_id: str = "",
        frame_index: int = 0,
    ) -> AugFrame:
        """Augment one frame with its own random stream (seed, episode, index)."""
        frame = as_frame(frame)
        rng = frame_rng(self.config.aug.seed, episode_id, frame_index)
        try:
            fg = None
            if self.strategy.USES_FOREGROUND:
                fg = robot_foreground(frame, self.config.robo_seg, self.config.obj_seg, object_names)
            return self._augment(frame, fg, rng)[0]
        except BackendError as e:
            raise e.at_frame(frame_index)

    def gen_video(
        self,
        frames: Sequence[Frame],
        object_names: Sequence[str] = (),
        episode_id: str = "",
    ) -> List[AugFrame]:
        """
        Augment a frame sequence. Per-frame results equal ``gen_image`` with
        the same index; with ``background_scope="per_episode"`` every frame is
        composited onto the background drawn from the first frame's stream.
        """
        if len(frames) == 0:
            return []
        frames = [as_frame(f) for f in frames]
        if len({f.shape for f in frames}) != 1:
            raise ValidationError("gen_video needs frames of identical dimensions")

        cfg = self.config
        fgs: List[Optional[BinaryMask]] = [None] * len(frames)
        if self.strategy.USES_FOREGROUND:
            fgs = robot_foreground_video(
                frames, cfg.robo_seg, cfg.obj_seg, object_names, cfg.batch_size
            )

        shared_background = shared_prompt = None
        out = []
        for index, (frame, fg) in enumerate(zip(frames, fgs)):
            rng = frame_rng(cfg.aug.seed, episode_id, index)
            try:
                result, background, prompt = self._augment(
                    frame, fg, rng, shared_background, shared_prompt
                )
            except BackendError as e:
                raise e.at_frame(index)
            if index == 0 and cfg.aug.background_scope == "per_episode":
                shared_background, shared_prompt = background, prompt
            out.append(result)
        return out


def gen_image(
    cfg: EngineConfig,
    frame: Frame,
    object_names: Sequence[str] = (),
    episode_id: str = "",
    frame_index: int = 0,
) -> AugFrame:
    return RoboEngine(config=cfg).gen_image(frame, object_names, episode_id, frame_index)


def gen_video(
    cfg: EngineConfig,
    frames: Sequence[Frame],
    object_names: Sequence[str] = (),
    episode_id: str = "",
) -> List[AugFrame]:
    return RoboEngine(config=cfg).gen_video(frames, object_names, episode_id)
