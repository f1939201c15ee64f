import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from roboaug.errors import BackendError, ProtocolError, SchemaError
from roboaug.load_data.base import Frame, as_frame
from roboaug.load_data.config import detect_dataset, load_data
from roboaug.mask_pipeline.masks import BinaryMask, union
from roboaug.seg_pipeline.clients import (
    DEFAULT_TIMEOUT,
    ChromaKeyClient,
    ExternalSegClient,
    HttpClient,
    PassthroughClient,
    SegClient,
)
from roboaug.seg_pipeline.mask_store import ROBOT_PROMPT, MaskStore

logger = logging.getLogger(__name__)

SEG_KINDS = ("external", "passthrough", "chroma_key")

# fine-tuning recipe of the external robot segmentation model; informational only
SEG_FINETUNE = {"epochs": 30, "lr": 1e-5, "batch_size": 32}


@dataclass
class SegRequest:
    """A language-conditioned segmentation query."""

    image: Frame
    prompt: str
    mode: str = "semantic"

    def __post_init__(self):
        if not isinstance(self.prompt, str) or not self.prompt.strip():
            raise SchemaError("SegRequest.prompt must be non-empty")
        if self.mode != "semantic":
            raise SchemaError(f"Unsupported segmentation mode '{self.mode}'")


@dataclass
class BackendDescriptor:
    """
    Which segmentation backend to use and how to reach it.

    ``params`` by kind:
      - external: ``timeout`` (s), ``concurrent`` (bool)
      - passthrough: ``store`` (MaskStore) or ``root`` (demo dataset or RoboSeg dir)
      - chroma_key: ``key_color`` (RGB triple), ``tolerance`` (0-255)

    The runtime client is built on first use and then reused, so one
    descriptor is one backend instance.
    """

    kind: str
    endpoint: Optional[str] = None
    params: Dict = field(default_factory=dict)
    _client: Optional[SegClient] = field(default=None, init=False, repr=False, compare=False)
    _build_lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in SEG_KINDS:
            raise SchemaError(f"Unknown segmentation backend '{self.kind}', expected one of {SEG_KINDS}")
        if (self.kind == "external") != bool(self.endpoint):
            raise SchemaError("An endpoint is required for external backends and only for them")

    def client(self) -> SegClient:
        if self._client is None:
            with self._build_lock:
                if self._client is None:
                    self._client = SEG_BACKENDS[self.kind](self)
        return self._client


def _build_external(desc: BackendDescriptor) -> SegClient:
    return ExternalSegClient(
        HttpClient(
            desc.endpoint,
            timeout=float(desc.params.get("timeout", DEFAULT_TIMEOUT)),
            concurrent=bool(desc.params.get("concurrent", False)),
            session=desc.params.get("session"),
        )
    )


def _build_passthrough(desc: BackendDescriptor) -> SegClient:
    store = desc.params.get("store")
    if store is None:
        root = desc.params.get("root")
        if root is None:
            raise BackendError("passthrough backend needs a 'store' or a 'root' of ground-truth masks")
        if detect_dataset(root) == "roboseg":
            store = MaskStore.from_roboseg(load_data(root, "roboseg"))
        else:
            store = MaskStore.from_dataset(root)
    return PassthroughClient(store)


def _build_chroma(desc: BackendDescriptor) -> SegClient:
    return ChromaKeyClient(
        key_color=desc.params.get("key_color", (0, 255, 0)),
        tolerance=desc.params.get("tolerance", 0),
    )


SEG_BACKENDS = {
    "external": _build_external,
    "passthrough": _build_passthrough,
    "chroma_key": _build_chroma,
}


def parse_backend_spec(spec: str) -> BackendDescriptor:
    """
    Parse a command-line backend spec: ``external:<URI>``,
    ``passthrough[:<DIR>]`` or ``chroma[:R,G,B[:TOL]]``.
    """
    kind, _, rest = spec.partition(":")
    if kind == "external":
        if not rest:
            raise SchemaError("external backend spec needs a URI, e.g. external:http://host:8000")
        return BackendDescriptor("external", endpoint=rest)
    if kind == "passthrough":
        return BackendDescriptor("passthrough", params={"root": rest} if rest else {})
    if kind in ("chroma", "chroma_key"):
        params = {}
        if rest:
            color, _, tol = rest.partition(":")
            try:
                params["key_color"] = tuple(int(c) for c in color.split(","))
                if tol:
                    params["tolerance"] = int(tol)
            except ValueError:
                raise SchemaError(f"Bad chroma spec '{spec}', expected chroma:R,G,B[:TOL]")
            if len(params["key_color"]) != 3:
                raise SchemaError(f"Bad chroma spec '{spec}', key color needs 3 channels")
        return BackendDescriptor("chroma_key", params=params)
    raise SchemaError(f"Unknown backend spec '{spec}'")


def check_mask_dims(mask: BinaryMask, image: Frame, backend: BackendDescriptor) -> BinaryMask:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != image.shape[:2]:
        raise ProtocolError(
            f"{backend.kind} backend returned a mask of shape {mask.shape} "
            f"for an image of shape {image.shape[:2]}",
            endpoint=backend.endpoint,
        )
    return mask


def segment(backend: BackendDescriptor, req: SegRequest) -> BinaryMask:
    image = as_frame(req.image)
    return check_mask_dims(backend.client().segment(image, req.prompt), image, backend)


def segment_video(
    backend: BackendDescriptor,
    frames: Sequence[Frame],
    prompt: str,
    batch_size: int = 1,
) -> List[BinaryMask]:
    """
    Segment every frame independently. Frames are sent in batches of
    ``batch_size``; results never depend on the batch size.
    """
    if batch_size < 1:
        raise SchemaError(f"batch_size must be >= 1, got {batch_size}")
    if not isinstance(prompt, str) or not prompt.strip():
        raise SchemaError("Segmentation prompt must be non-empty")
    client = backend.client()
    masks: List[BinaryMask] = []
    for start in range(0, len(frames), batch_size):
        batch = [as_frame(f) for f in frames[start : start + batch_size]]
        if client.batched and len(batch) > 1:
            try:
                result = client.segment_batch(batch, [prompt] * len(batch))
            except BackendError as e:
                raise e.at_frame(start)
        else:
            result = []
            for offset, image in enumerate(batch):
                try:
                    result.append(client.segment(image, prompt))
                except BackendError as e:
                    raise e.at_frame(start + offset)
        for offset, (mask, image) in enumerate(zip(result, batch)):
            try:
                masks.append(check_mask_dims(mask, image, backend))
            except BackendError as e:
                raise e.at_frame(start + offset)
    return masks


def robot_foreground(
    frame: Frame,
    robo: BackendDescriptor,
    obj: BackendDescriptor,
    object_names: Sequence[str] = (),
) -> BinaryMask:
    """Foreground F: the robot mask united with one mask per task object."""
    parts = [segment(robo, SegRequest(frame, ROBOT_PROMPT))]
    for name in object_names:
        parts.append(segment(obj, SegRequest(frame, name)))
    return union(parts)


def robot_foreground_video(
    frames: Sequence[Frame],
    robo: BackendDescriptor,
    obj: BackendDescriptor,
    object_names: Sequence[str] = (),
    batch_size: int = 1,
) -> List[BinaryMask]:
    """Batched ``robot_foreground`` over a frame sequence."""
    parts = [segment_video(robo, frames, ROBOT_PROMPT, batch_size)]
    for name in object_names:
        parts.append(segment_video(obj, frames, name, batch_size))
    return [union(list(per_frame)) for per_frame in zip(*parts)]
