from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from roboaug.errors import ValidationError
from roboaug.load_data.base import Frame, as_frame
from roboaug.mask_pipeline.masks import BinaryMask, SoftMask


@dataclass(frozen=True)
class Provenance:
    """Which method, seed, prompt and backend produced an augmented frame."""

    method: str
    seed: int
    prompt: Optional[str] = None
    backend_kind: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AugFrame:
    frame: Frame
    provenance: Provenance


def _blend(frame: Frame, alpha: SoftMask, background: Frame) -> Frame:
    if alpha.min() < 0.0 or alpha.max() > 1.0:
        raise ValidationError("Soft mask alpha must lie in [0, 1]")
    a = alpha[:, :, None]
    mixed = a * frame.astype(np.float64) + (1.0 - a) * background.astype(np.float64)
    # half-up rounding; alpha == 1 reproduces the frame exactly
    return np.floor(mixed + 0.5).clip(0, 255).astype(np.uint8)


def composite(
    frame: Frame,
    fg: Union[BinaryMask, SoftMask],
    background: Frame,
    provenance: Optional[Provenance] = None,
) -> AugFrame:
    """
    Overlay the foreground of ``frame`` onto ``background``. A boolean ``fg``
    selects pixels; a float ``fg`` is an alpha map blended per channel.
    """
    frame = as_frame(frame)
    background = as_frame(background)
    fg = np.asarray(fg)
    if background.shape != frame.shape or fg.shape != frame.shape[:2]:
        raise ValidationError(
            f"composite needs matching dims, got frame {frame.shape[:2]}, "
            f"mask {fg.shape}, background {background.shape[:2]}"
        )
    if fg.dtype == bool:
        out = np.where(fg[:, :, None], frame, background)
    else:
        out = _blend(frame, fg.astype(np.float64), background)
    return AugFrame(out, provenance or Provenance(method="composite", seed=0))


def composite_episode(
    frames: Sequence[Frame],
    fgs: Sequence[Union[BinaryMask, SoftMask]],
    backgrounds: Sequence[Frame],
    provenance: Optional[Provenance] = None,
) -> List[AugFrame]:
    if not len(frames) == len(fgs) == len(backgrounds):
        raise ValidationError(
            f"composite_episode got {len(frames)} frames, {len(fgs)} masks "
            f"and {len(backgrounds)} backgrounds"
        )
    return [composite(f, m, b, provenance) for f, m, b in zip(frames, fgs, backgrounds)]
