"""
Inpainting baseline: regenerate a handful of task-irrelevant objects and leave
every other pixel of the frame as it was.
"""

import logging
from typing import List, Sequence

import numpy as np

from roboaug.aug_strategies.base import AugStrategy, frame_dims
from roboaug.aug_strategies.engine import SEED_BOUND, generation_failed
from roboaug.aug_strategies.generative import GenBackendDescriptor
from roboaug.aug_strategies.prompt_pool import sample_prompt
from roboaug.errors import BackendError, SchemaError, ValidationError
from roboaug.load_data.base import Frame, as_frame
from roboaug.mask_pipeline.masks import BinaryMask, as_mask, dilate, popcount, union
from roboaug.seg_pipeline.backends import BackendDescriptor, check_mask_dims
from roboaug.seg_pipeline.mask_store import sort_proposals

logger = logging.getLogger(__name__)


def region_proposals(frame: Frame, backend: BackendDescriptor) -> List[BinaryMask]:
    """All object masks the proposal backend finds, largest first."""
    frame = as_frame(frame)
    masks = backend.client().propose(frame)
    return sort_proposals([check_mask_dims(m, frame, backend) for m in masks])


def task_irrelevant(
    proposals: Sequence[BinaryMask], fg: BinaryMask, threshold: float = 0.05
) -> List[BinaryMask]:
    """Non-empty proposals whose overlap with ``fg`` is at most ``threshold`` of their area."""
    keep = []
    for p in proposals:
        area = popcount(p)
        if area and popcount(p & fg) <= threshold * area:
            keep.append(p)
    return keep


def inpaint_augment(
    frame: Frame,
    fg: BinaryMask,
    proposals: Sequence[BinaryMask],
    backend: GenBackendDescriptor,
    count: int,
    rng: np.random.Generator,
    threshold: float = 0.05,
    padding: int = 0,
    prompt: str = "",
) -> Frame:
    frame = as_frame(frame)
    fg = as_mask(fg)
    if fg.shape != frame.shape[:2]:
        raise ValidationError(f"Foreground mask {fg.shape} does not match frame {frame.shape[:2]}")
    for k, p in enumerate(proposals):
        if np.shape(p) != frame.shape[:2]:
            raise ValidationError(f"Proposal {k} of shape {np.shape(p)} does not match frame {frame.shape[:2]}")
    if not proposals:
        logger.warning("No region proposals for this frame, leaving it unchanged")
        return frame.copy()

    selected = sort_proposals(task_irrelevant(proposals, fg, threshold))[:count]
    if not selected:
        logger.debug("No task-irrelevant proposals selected, frame unchanged")
        return frame.copy()

    region = union(selected)
    if padding:
        region = dilate(region, padding) & ~fg

    width, height = frame_dims(frame)
    seed = int(rng.integers(SEED_BOUND))
    try:
        generated = backend.client().generate(
            "inpaint", prompt, width, height, seed, image=frame, mask=region
        )
    except BackendError as e:
        raise generation_failed(e, "inpainting", prompt)
    return np.where(region[:, :, None], generated, frame)


class InpaintingStrategy(AugStrategy):
    METHOD_NAME = "inpainting"
    COMPOSITES = False

    @classmethod
    def augment(cls, frame, fg, resources, rng):
        if resources.proposals is None:
            raise SchemaError("The inpainting method needs a region proposal backend")
        cfg = resources.config
        prompt = sample_prompt(resources.prompt_pool, rng) if resources.prompt_pool else ""
        return inpaint_augment(
            frame,
            fg,
            region_proposals(frame, resources.proposals),
            resources.inpainter,
            cfg.inpaint_count,
            rng,
            threshold=cfg.irrelevance_threshold,
            padding=cfg.inpaint_padding,
            prompt=prompt,
        )
