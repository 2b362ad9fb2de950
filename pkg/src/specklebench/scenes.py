"""Deterministic synthetic test scenes.

Real aerial/terrain photos are not bundled with the package, so demos,
benchmarks and the test suite use generated stand-ins: a patchwork of
Voronoi cells with gentle per-cell shading, a few rectangular structures,
and a light blur. The statistics that matter to despeckling filters are
present (homogeneous regions, sharp boundaries, a spread of gray levels)
while the generator stays a pure function of its seed.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .image import Image
from .rng import SeedSpec

# fixed category tag for scene streams so they never collide with
# dataset-generation streams built from the same master seed
_SCENE_TAG = 0x5343454E45  # "SCENE"


def aerial_scene(size: int, seed: int, index: int = 0, cells: int = 40) -> Image:
    """Generate a size x size patchwork scene in [0.03, 0.97].

    Same (size, seed, index, cells) always yields the same image.
    """
    if size < 16:
        raise ValueError("scene size must be >= 16")
    if cells < 2:
        raise ValueError("need at least 2 cells")
    rng = SeedSpec(seed).stream(_SCENE_TAG, index)

    points = rng.random((cells, 2)) * size
    levels = 0.15 + 0.72 * rng.random(cells)
    grads = 0.30 * (rng.random((cells, 2)) - 0.5)

    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    # nearest-cell labels, chunked rows to bound the distance buffer
    labels = np.empty((size, size), dtype=np.intp)
    chunk = max(1, (1 << 22) // (cells * size))
    for r0 in range(0, size, chunk):
        r1 = min(size, r0 + chunk)
        dy = yy[r0:r1, :, None] - points[None, None, :, 0]
        dx = xx[r0:r1, :, None] - points[None, None, :, 1]
        labels[r0:r1] = np.argmin(dy * dy + dx * dx, axis=2)

    u = xx / size - 0.5
    v = yy / size - 0.5
    img = levels[labels] + grads[labels, 0] * u + grads[labels, 1] * v

    # a few rectangular structures with crisp edges
    n_rect = 6
    for _ in range(n_rect):
        top, left = (rng.random(2) * size * 0.85).astype(np.intp)
        h = int(size * (0.03 + 0.09 * rng.random()))
        w = int(size * (0.03 + 0.09 * rng.random()))
        level = 0.1 + 0.8 * rng.random()
        img[top:top + max(h, 2), left:left + max(w, 2)] = level

    img = gaussian_filter(img, sigma=1.0, mode="nearest")
    return Image(np.clip(img, 0.03, 0.97))
