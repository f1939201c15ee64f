"""
Generative backends: the external diffusion-service client and the
procedural fallback that lets the whole pipeline run without model weights.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from roboaug.aug_strategies.base import derive_seed
from roboaug.errors import BackendError, ProtocolError, SchemaError
from roboaug.load_data.base import Frame, array_to_b64_png, frame_digest
from roboaug.mask_pipeline.masks import BinaryMask, bbox, dilate, encode_mask
from roboaug.seg_pipeline.clients import DEFAULT_TIMEOUT, HttpClient

logger = logging.getLogger(__name__)

GEN_KINDS = ("background_diffusion", "scene_diffusion", "inpaint_diffusion", "procedural")
REQUEST_KINDS = ("background", "scene", "inpaint")

# fine-tuning recipe of the external foreground-conditioned diffusion model; informational only
BACKGROUND_FINETUNE = {"epochs": 100, "lr": 5e-3, "batch_size": 32}


@dataclass
class GenBackendDescriptor:
    """
    Which image generator to use. ``params``: ``timeout`` (s), ``concurrent``
    (bool), ``octaves`` (procedural noise octaves).
    """

    kind: str = "procedural"
    endpoint: Optional[str] = None
    params: Dict = field(default_factory=dict)
    _client: Optional["GenClient"] = field(default=None, init=False, repr=False, compare=False)
    _build_lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in GEN_KINDS:
            raise SchemaError(f"Unknown generative backend '{self.kind}', expected one of {GEN_KINDS}")
        if self.kind != "procedural" and not self.endpoint:
            raise SchemaError(f"Generative backend '{self.kind}' needs an endpoint")

    def client(self) -> "GenClient":
        if self._client is None:
            with self._build_lock:
                if self._client is None:
                    self._client = self._build()
        return self._client

    def _build(self) -> "GenClient":
        if self.kind == "procedural":
            return ProceduralGenerator(octaves=int(self.params.get("octaves", 4)))
        return ExternalGenClient(
            HttpClient(
                self.endpoint,
                timeout=float(self.params.get("timeout", DEFAULT_TIMEOUT)),
                concurrent=bool(self.params.get("concurrent", False)),
                session=self.params.get("session"),
            )
        )


def parse_gen_spec(spec: str) -> GenBackendDescriptor:
    """``procedural`` or ``<kind>:<URI>`` for one of the diffusion kinds."""
    if spec == "procedural":
        return GenBackendDescriptor("procedural")
    kind, _, endpoint = spec.partition(":")
    if kind == "external":
        kind = "background_diffusion"
    return GenBackendDescriptor(kind, endpoint=endpoint or None)


class GenClient:
    def generate(
        self,
        kind: str,
        prompt: str,
        width: int,
        height: int,
        seed: int,
        image: Optional[Frame] = None,
        mask: Optional[BinaryMask] = None,
    ) -> Frame:
        raise NotImplementedError


class ExternalGenClient(GenClient):
    """
    Client for a diffusion service: ``POST /generate`` with
    ``{"image_b64"?, "mask_b64"?, "prompt", "width", "height", "seed", "kind"}``
    answering ``{"image_b64"}``.
    """

    def __init__(self, http: HttpClient):
        self.http = http

    def generate(self, kind, prompt, width, height, seed, image=None, mask=None):
        payload = {
            "prompt": prompt,
            "width": int(width),
            "height": int(height),
            "seed": int(seed),
            "kind": kind,
        }
        if image is not None:
            payload["image_b64"] = array_to_b64_png(image)
        if mask is not None:
            payload["mask_b64"] = array_to_b64_png(encode_mask(mask))
        body = self.http.post_json("generate", payload)
        out = self.http.decode_field(body, "image_b64", "generate")
        if out.ndim != 3 or out.shape[:2] != (height, width):
            raise ProtocolError(
                f"/generate returned an image of shape {out.shape}, expected ({height}, {width}, 3)",
                endpoint=self.http.endpoint,
            )
        return out


def value_noise(height: int, width: int, rng: np.random.Generator, octaves: int = 4) -> np.ndarray:
    """Multi-octave value noise in [0, 1], bilinearly interpolated lattices."""
    out = np.zeros((height, width))
    amplitude, total = 1.0, 0.0
    for octave in range(octaves):
        cells = 2 ** (octave + 1)
        lattice = rng.random((cells + 1, cells + 1))
        ys = np.linspace(0.0, cells, height)
        xs = np.linspace(0.0, cells, width)
        y0 = np.minimum(ys.astype(int), cells - 1)
        x0 = np.minimum(xs.astype(int), cells - 1)
        ty = (ys - y0)[:, None]
        tx = (xs - x0)[None, :]
        top = lattice[y0][:, x0] * (1 - tx) + lattice[y0][:, x0 + 1] * tx
        bottom = lattice[y0 + 1][:, x0] * (1 - tx) + lattice[y0 + 1][:, x0 + 1] * tx
        out += amplitude * (top * (1 - ty) + bottom * ty)
        total += amplitude
        amplitude *= 0.5
    return out / total


def procedural_scene(
    width: int,
    height: int,
    seed: int,
    horizon_limit: Optional[int] = None,
    octaves: int = 4,
) -> Frame:
    """
    Seeded stand-in for a generated scene: a wall above a table/floor plane,
    split at a horizon row, each textured with value noise and shaded with a
    vertical gradient. ``horizon_limit`` keeps the horizon at or above a row.
    """
    rng = np.random.default_rng(seed)
    wall, floor = rng.integers(40, 216, size=(2, 3))
    horizon = int(height * rng.uniform(0.25, 0.6))
    if horizon_limit is not None:
        horizon = max(0, min(horizon, horizon_limit))

    noise = value_noise(height, width, rng, octaves)[:, :, None]
    rows = np.arange(height, dtype=float)[:, None, None]
    wall_shade = 0.8 + 0.2 * rows / max(horizon, 1)
    floor_shade = 0.7 + 0.3 * (rows - horizon) / max(height - horizon, 1)
    base = np.where(rows < horizon, wall * wall_shade, floor * floor_shade)
    image = base * (0.75 + 0.5 * noise)
    return np.clip(np.rint(image), 0, 255).astype(np.uint8)


class ProceduralGenerator(GenClient):
    """
    Deterministic generator with no model behind it. The output depends only
    on (seed, dims, prompt) and, for foreground-conditioned backgrounds, on
    the mask: the horizon is kept above the foreground so robot and objects
    stand on the table plane.
    """

    def __init__(self, octaves: int = 4):
        self.octaves = octaves

    def generate(self, kind, prompt, width, height, seed, image=None, mask=None):
        if kind == "scene":
            return procedural_scene(
                width, height, derive_seed(seed, "scene", prompt), octaves=self.octaves
            )
        if kind == "background":
            if mask is None:
                raise BackendError("background generation needs a foreground mask")
            box = bbox(mask)
            return procedural_scene(
                width,
                height,
                derive_seed(seed, "background", prompt, frame_digest(mask.astype(np.uint8))),
                horizon_limit=box.y0 if box is not None else None,
                octaves=self.octaves,
            )
        if kind == "inpaint":
            if image is None or mask is None:
                raise BackendError("inpainting needs an image and a mask")
            return self._inpaint(image, mask, derive_seed(seed, "inpaint", prompt))
        raise BackendError(f"Unknown generation kind '{kind}'")

    def _inpaint(self, image: Frame, region: BinaryMask, seed: int) -> Frame:
        """Fill ``region`` with the mean color of its surrounding ring plus noise."""
        ring = dilate(region, 3) & ~region
        source = image[ring] if ring.any() else image.reshape(-1, 3)
        fill = source.mean(axis=0)
        rng = np.random.default_rng(seed)
        noise = value_noise(image.shape[0], image.shape[1], rng, self.octaves)[:, :, None]
        patch = np.clip(np.rint(fill * (0.9 + 0.2 * noise)), 0, 255).astype(np.uint8)
        return np.where(region[:, :, None], patch, image)
