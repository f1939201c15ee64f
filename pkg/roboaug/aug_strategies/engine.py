import numpy as np

from roboaug.aug_strategies.base import AugStrategy, frame_dims
from roboaug.aug_strategies.generative import GenBackendDescriptor
from roboaug.errors import BackendError, ValidationError
from roboaug.load_data.base import Frame, as_frame
from roboaug.mask_pipeline.masks import BinaryMask, as_mask

SEED_BOUND = 2**63 - 1


def generation_failed(e: BackendError, what: str, prompt: str) -> BackendError:
    return type(e)(f"{what} failed for prompt '{prompt}': {e.detail}", endpoint=e.endpoint)


def gen_background_engine(
    frame: Frame,
    fg: BinaryMask,
    prompt: str,
    backend: GenBackendDescriptor,
    rng: np.random.Generator,
) -> Frame:
    """
    Foreground-aware background: the generator sees the foreground mask (and
    the frame) and lays out a scene the robot and task objects fit into.
    """
    frame = as_frame(frame)
    fg = as_mask(fg)
    if fg.shape != frame.shape[:2]:
        raise ValidationError(f"Foreground mask {fg.shape} does not match frame {frame.shape[:2]}")
    width, height = frame_dims(frame)
    seed = int(rng.integers(SEED_BOUND))
    try:
        return backend.client().generate(
            "background", prompt, width, height, seed, image=frame, mask=fg
        )
    except BackendError as e:
        raise generation_failed(e, "background generation", prompt)


class EngineStrategy(AugStrategy):
    METHOD_NAME = "engine"
    USES_PROMPT = True

    @classmethod
    def background(cls, frame, fg, prompt, resources, rng):
        return gen_background_engine(frame, fg, prompt, resources.generator, rng)
