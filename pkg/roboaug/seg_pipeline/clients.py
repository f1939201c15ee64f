import binascii
import contextlib
import logging
import threading
from typing import List, Optional, Sequence, Tuple

import numpy as np
import requests

from roboaug.errors import BackendError, ProtocolError
from roboaug.load_data.base import Frame, array_to_b64_png, b64_png_to_array
from roboaug.mask_pipeline.masks import BinaryMask, decode_mask
from roboaug.seg_pipeline.mask_store import MaskStore

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.0


class HttpClient:
    """
    JSON-over-HTTP transport shared by the external segmentation and
    generative backends. Requests through one client are serialized unless
    it was built with ``concurrent=True``.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = DEFAULT_TIMEOUT,
        concurrent: bool = False,
        session: Optional[requests.Session] = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.concurrent = concurrent
        self.session = session or requests.Session()
        self._lock = threading.Lock()

    def post_json(self, route: str, payload: dict) -> dict:
        url = f"{self.endpoint}/{route.lstrip('/')}"
        guard = contextlib.nullcontext() if self.concurrent else self._lock
        with guard:
            try:
                response = self.session.post(url, json=payload, timeout=self.timeout)
            except requests.exceptions.Timeout:
                raise BackendError(f"request to /{route} timed out", endpoint=self.endpoint)
            except requests.exceptions.RequestException as e:
                raise BackendError(f"backend unreachable: {e}", endpoint=self.endpoint)

        if response.status_code != 200:
            try:
                detail = response.json().get("error", response.text)
            except ValueError:
                detail = response.text
            raise BackendError(
                f"/{route} returned HTTP {response.status_code}: {detail}",
                endpoint=self.endpoint,
            )
        try:
            body = response.json()
        except ValueError:
            raise ProtocolError(f"/{route} returned a non-JSON body", endpoint=self.endpoint)
        if not isinstance(body, dict):
            raise ProtocolError(f"/{route} must return a JSON object", endpoint=self.endpoint)
        return body

    def decode_field(self, body: dict, key: str, route: str) -> np.ndarray:
        if key not in body:
            raise ProtocolError(f"/{route} response lacks '{key}'", endpoint=self.endpoint)
        return self.decode_png(body[key], route)

    def decode_png(self, b64image, route: str) -> np.ndarray:
        try:
            return b64_png_to_array(b64image)
        except (binascii.Error, TypeError, ValueError, OSError) as e:
            raise ProtocolError(f"/{route} returned an undecodable PNG ({e})", endpoint=self.endpoint)


class SegClient:
    """Runtime side of a segmentation backend descriptor."""

    name = ""
    batched = False

    def segment(self, image: Frame, prompt: str) -> BinaryMask:
        raise NotImplementedError

    def segment_batch(self, images: Sequence[Frame], prompts: Sequence[str]) -> List[BinaryMask]:
        return [self.segment(img, p) for img, p in zip(images, prompts)]

    def propose(self, image: Frame) -> List[BinaryMask]:
        raise BackendError(f"{self.name} backend does not produce region proposals")


class PassthroughClient(SegClient):
    """Test oracle: answers with stored ground-truth masks."""

    name = "passthrough"

    def __init__(self, store: MaskStore):
        self.store = store

    def segment(self, image, prompt):
        return self.store.lookup(image, prompt)

    def propose(self, image):
        return self.store.proposals(image)


def chroma_key_segment(
    frame: Frame, key_color: Tuple[int, int, int], tolerance: int
) -> BinaryMask:
    """
    Green-screen style oracle: a pixel is background iff its max-channel
    distance to ``key_color`` is at most ``tolerance``; returns the foreground.
    """
    frame = np.asarray(frame, dtype=np.int16)
    key = np.asarray(key_color, dtype=np.int16).reshape(1, 1, 3)
    distance = np.abs(frame - key).max(axis=2)
    return ~(distance <= int(tolerance))


class ChromaKeyClient(SegClient):
    name = "chroma_key"

    def __init__(self, key_color=(0, 255, 0), tolerance: int = 0):
        self.key_color = tuple(int(c) for c in key_color)
        self.tolerance = int(tolerance)

    def segment(self, image, prompt):
        return chroma_key_segment(image, self.key_color, self.tolerance)


class ExternalSegClient(SegClient):
    """
    Client for an out-of-process promptable segmentation model.

    Wire contract: ``POST /segment`` with ``{"image_b64", "prompt", "mode"}``
    answering ``{"mask_b64"}``; ``POST /segment_batch`` with equal-length
    ``images_b64``/``prompts`` arrays answering ``masks_b64``; ``POST /propose``
    with ``{"image_b64"}`` answering ``masks_b64`` for all objects in view.
    """

    name = "external"
    batched = True

    def __init__(self, http: HttpClient):
        self.http = http

    def _to_mask(self, raster: np.ndarray, image: Frame, route: str) -> BinaryMask:
        try:
            mask = decode_mask(raster)
        except ValueError as e:
            raise ProtocolError(f"/{route}: {e}", endpoint=self.http.endpoint)
        if mask.shape != np.asarray(image).shape[:2]:
            raise ProtocolError(
                f"/{route} returned a {mask.shape[1]}x{mask.shape[0]} mask for a "
                f"{image.shape[1]}x{image.shape[0]} image",
                endpoint=self.http.endpoint,
            )
        return mask

    def segment(self, image, prompt):
        body = self.http.post_json(
            "segment",
            {"image_b64": array_to_b64_png(image), "prompt": prompt, "mode": "semantic"},
        )
        return self._to_mask(self.http.decode_field(body, "mask_b64", "segment"), image, "segment")

    def segment_batch(self, images, prompts):
        body = self.http.post_json(
            "segment_batch",
            {
                "images_b64": [array_to_b64_png(img) for img in images],
                "prompts": list(prompts),
                "mode": "semantic",
            },
        )
        masks = body.get("masks_b64")
        if not isinstance(masks, list) or len(masks) != len(images):
            raise ProtocolError(
                f"/segment_batch returned {len(masks) if isinstance(masks, list) else 'no'} "
                f"masks for {len(images)} images",
                endpoint=self.http.endpoint,
            )
        return [
            self._to_mask(self.http.decode_png(m, "segment_batch"), img, "segment_batch")
            for m, img in zip(masks, images)
        ]

    def propose(self, image):
        body = self.http.post_json("propose", {"image_b64": array_to_b64_png(image)})
        masks = body.get("masks_b64")
        if not isinstance(masks, list):
            raise ProtocolError("/propose response lacks 'masks_b64'", endpoint=self.http.endpoint)
        return [self._to_mask(self.http.decode_png(m, "propose"), image, "propose") for m in masks]
