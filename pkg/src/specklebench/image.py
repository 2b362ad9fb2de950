"""Grayscale image values and 8-bit file I/O.

Images are immutable 2D float64 grids. Clean images live in [0, 1];
speckled images may exceed 1 and are only clamped when exported to 8-bit
PNG. Quantization at export uses round-half-away-from-zero so that emitted
files are platform-independent.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage, UnidentifiedImageError

from .errors import CorruptImageError, FileMissingError, UnsupportedImageError

# Rec. 601 luma weights used to collapse RGB inputs to grayscale.
_LUMA = np.array([0.299, 0.587, 0.114])


def _as_grid(data, *, allow_negative: bool = False) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2D grid, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("empty image")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or Inf")
    if not allow_negative and arr.min() < 0:
        raise ValueError("image contains negative intensities")
    arr = arr.copy() if arr is data or not arr.flags.owndata else arr
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Image:
    """Immutable row-major grid of non-negative finite intensities."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_grid(self.data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __eq__(self, other) -> bool:
        return isinstance(other, Image) and np.array_equal(self.data, other.data)


def load_image(path) -> Image:
    """Load an 8-bit grayscale PNG or binary PGM as intensities in [0, 1].

    8-bit RGB inputs are collapsed with the Rec. 601 luma combination
    (0.299, 0.587, 0.114). Anything else (16-bit, palette, alpha, ...) is
    rejected rather than silently converted.

    Raises
    ------
    FileMissingError, UnsupportedImageError, CorruptImageError
        Each names the offending path.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileMissingError(f"no such image file: {path}")
    try:
        with PILImage.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                raw = np.asarray(im, dtype=np.float64)
            elif mode == "RGB":
                raw = np.asarray(im, dtype=np.float64) @ _LUMA
            else:
                raise UnsupportedImageError(
                    f"unsupported bit depth or color type (mode {mode!r}): {path}"
                )
    except UnidentifiedImageError as exc:
        raise CorruptImageError(f"not a readable PNG/PGM file: {path}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"corrupt image file: {path} ({exc})") from exc
    return Image(raw / 255.0)


def save_image(img: Image, path) -> None:
    """Write an 8-bit grayscale PNG.

    Pixels are clamped to [0, 1] (speckled values may overshoot 1) and
    quantized as round(x * 255) with halves rounding away from zero.
    """
    data = quantize(img)
    PILImage.fromarray(data, mode="L").save(os.fspath(path), format="PNG")


def quantize(img: Image) -> np.ndarray:
    """8-bit view of an image: clamp to [0,1], scale by 255, round half away."""
    clamped = np.clip(img.data, 0.0, 1.0)
    # values are non-negative, so floor(x + 0.5) == round-half-away-from-zero
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8)


def patch_grid_count(extent: int, patch: int, stride: int) -> int:
    """Number of fully contained patch positions along one axis."""
    if extent < patch:
        return 0
    return (extent - patch) // stride + 1


def extract_patches(img: Image, patch: int, stride: int) -> list[Image]:
    """All fully contained patch×patch tiles, in row-major scan order.

    Count is ``(⌊(W−patch)/stride⌋+1) · (⌊(H−patch)/stride⌋+1)``.
    """
    if patch < 1:
        raise ValueError("patch side must be >= 1")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if patch > min(img.width, img.height):
        raise ValueError(
            f"patch {patch} larger than image {img.height}x{img.width}"
        )
    out = []
    for top in range(0, img.height - patch + 1, stride):
        for left in range(0, img.width - patch + 1, stride):
            out.append(Image(img.data[top:top + patch, left:left + patch]))
    return out
