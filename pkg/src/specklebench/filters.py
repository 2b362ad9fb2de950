"""Classical despeckling filters: Lee, Kuan, Frost, and a single-iteration
patch-based probabilistic filter (``ppb_lite``).

Shared conventions
------------------
* Local mean m(p) and variance s^2(p) are computed over the
  (2r+1) x (2r+1) window around p with mirror-reflected boundaries.
* Cy(p) = s(p)/m(p) is the observed local coefficient of variation, with
  Cy = 0 wherever m = 0.
* Cn is the coefficient of variation of the pure speckle: sqrt(v) for the
  uniform-eta model, 1/sqrt(L) for L-look gamma speckle. When the noise
  model is unknown, ``estimate_noise_cv`` falls back to the median of the
  local Cy map, which is dominated by homogeneous regions.

Gains:
    lee:   out = m + k (y - m),  k = clamp(1 - Cn^2/Cy^2, 0, 1)
    kuan:  same with            k = clamp((1 - Cn^2/Cy^2)/(1 + Cn^2), 0, 1)
    frost: out = sum w y / sum w over the window,
           w(q) = exp(-damping * Cy(p)^2 * dist(p, q))
    ppb_lite: nonlocal weighted mean over a search window; patch
           dissimilarity is the amplitude-domain likelihood ratio
           sum over the patch of log((a_p/a_q + a_q/a_p)/2) with
           a = sqrt(intensity), and w = exp(-dissimilarity / h).

``ppb_lite`` deliberately runs a single weighting pass; the iterative
refinement of the full algorithm multiplies runtime for modest gains and
adds parameters that are hard to pin down.

All filters map a constant image to itself and never rescale radiometry.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import uniform_filter

from .image import Image
from .speckle import NoiseSpec

_EPS_POS = 1e-6  # intensity floor before amplitude ratios


@dataclass(frozen=True)
class FilterParams:
    """Tuning knobs for the classical filters.

    window_radius: half-side of the local-statistics window (3 -> 7x7).
    noise_cv: speckle coefficient of variation; None means estimate it
        from the image.
    frost_damping: decay rate of the Frost kernel.
    patch_radius / search_radius / bandwidth: ppb_lite knobs. The default
    bandwidth of 10 suits single-look gamma speckle; for lighter noise see
    ``auto_bandwidth``.
    """

    window_radius: int = 3
    noise_cv: float | None = None
    frost_damping: float = 2.0
    patch_radius: int = 3
    search_radius: int = 10
    bandwidth: float = 10.0

    def __post_init__(self):
        if self.window_radius < 1:
            raise ValueError("window_radius must be >= 1")
        if self.noise_cv is not None and not self.noise_cv > 0:
            raise ValueError("noise_cv must be > 0")
        if not self.frost_damping > 0:
            raise ValueError("frost_damping must be > 0")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be > 0")
        if self.patch_radius < 1 or self.search_radius < 1:
            raise ValueError("patch_radius and search_radius must be >= 1")
        if self.patch_radius > self.search_radius:
            raise ValueError("patch_radius must not exceed search_radius")


def noise_cv_for(spec: NoiseSpec) -> float:
    """Coefficient of variation of the pure speckle under a noise model."""
    cv = spec.coefficient_of_variation
    if not cv > 0:
        raise ValueError("noise-free model has no usable coefficient of variation")
    return float(cv)


def auto_bandwidth(noise_cv: float, patch_radius: int) -> float:
    """ppb_lite bandwidth matched to the noise level.

    For weak speckle the expected same-content patch dissimilarity scales
    like n_patch_pixels * cv^2 / 4; twice that keeps same-content weights
    near exp(-1/2) while dissimilar patches decay fast.
    """
    n_px = (2 * patch_radius + 1) ** 2
    return max(0.05, 0.5 * n_px * noise_cv ** 2)


def params_for_noise(spec: NoiseSpec, **overrides) -> FilterParams:
    """FilterParams with noise_cv and ppb bandwidth derived from a model.

    Explicit keyword overrides win over the derived values.
    """
    overrides.setdefault("noise_cv", noise_cv_for(spec))
    params = FilterParams(**overrides)
    if "bandwidth" not in overrides:
        bw = auto_bandwidth(params.noise_cv, params.patch_radius)
        params = replace(params, bandwidth=bw)
    return params


def local_stats(y: np.ndarray, radius: int) -> tuple[np.ndarray, np.ndarray]:
    """Windowed mean and population variance, mirror-reflected boundaries."""
    size = 2 * radius + 1
    m = uniform_filter(y, size=size, mode="reflect")
    m2 = uniform_filter(y * y, size=size, mode="reflect")
    return m, np.maximum(m2 - m * m, 0.0)


def _cy2(y: np.ndarray, radius: int) -> tuple[np.ndarray, np.ndarray]:
    m, var = local_stats(y, radius)
    with np.errstate(divide="ignore", invalid="ignore"):
        cy2 = np.where(m > 0, var / (m * m), 0.0)
    return m, cy2


def estimate_noise_cv(img: Image, window_radius: int = 3) -> float:
    """Median local coefficient of variation, a crude speckle-level guess."""
    _, cy2 = _cy2(img.data, window_radius)
    return float(np.sqrt(np.median(cy2)))


def _resolve_cv(img: Image, params: FilterParams) -> float:
    if params.noise_cv is not None:
        return params.noise_cv
    return max(estimate_noise_cv(img, params.window_radius), 1e-12)


def lee(img: Image, params: FilterParams = FilterParams()) -> Image:
    """Lee local-statistics filter."""
    y = img.data
    cn2 = _resolve_cv(img, params) ** 2
    m, cy2 = _cy2(y, params.window_radius)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(cy2 > 0, 1.0 - cn2 / cy2, 0.0)
    k = np.clip(k, 0.0, 1.0)
    return Image(np.maximum(m + k * (y - m), 0.0))


def kuan(img: Image, params: FilterParams = FilterParams()) -> Image:
    """Kuan local-statistics filter (Lee gain shrunk by 1 + Cn^2)."""
    y = img.data
    cn2 = _resolve_cv(img, params) ** 2
    m, cy2 = _cy2(y, params.window_radius)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(cy2 > 0, (1.0 - cn2 / cy2) / (1.0 + cn2), 0.0)
    k = np.clip(k, 0.0, 1.0)
    return Image(np.maximum(m + k * (y - m), 0.0))


def frost(img: Image, params: FilterParams = FilterParams()) -> Image:
    """Frost exponentially damped kernel filter."""
    y = img.data
    r = params.window_radius
    _, cy2 = _cy2(y, r)
    alpha = params.frost_damping * cy2

    ypad = np.pad(y, r, mode="symmetric")
    h, w = y.shape
    num = np.zeros_like(y)
    den = np.zeros_like(y)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            dist = np.hypot(dy, dx)
            wgt = np.exp(alpha * (-dist)) if dist else np.ones_like(alpha)
            num += wgt * ypad[r + dy:r + dy + h, r + dx:r + dx + w]
            den += wgt
    return Image(np.maximum(num / den, 0.0))


def ppb_lite(img: Image, params: FilterParams = FilterParams()) -> Image:
    """Single-pass probabilistic patch-based filter.

    Intensities are floored at 1e-6 before the amplitude ratios so the
    similarity is defined for zero-valued pixels.
    """
    y = img.data
    pr, sr, h_bw = params.patch_radius, params.search_radius, params.bandwidth
    a = np.sqrt(np.maximum(y, _EPS_POS))

    pad = sr + pr
    apad = np.pad(a, pad, mode="symmetric")
    ypad = np.pad(y, pad, mode="symmetric")
    h, w = y.shape
    patch_size = 2 * pr + 1
    n_patch = patch_size ** 2

    # center block extended by the patch ring, so patch sums stay in-bounds
    a0 = apad[sr:sr + h + 2 * pr, sr:sr + w + 2 * pr]
    num = np.zeros_like(y)
    den = np.zeros_like(y)
    for dy in range(-sr, sr + 1):
        for dx in range(-sr, sr + 1):
            aq = apad[sr + dy:sr + dy + h + 2 * pr, sr + dx:sr + dx + w + 2 * pr]
            ratio = a0 / aq
            diss = np.log(0.5 * (ratio + 1.0 / ratio))
            # patch box-sum; interior values are exact regardless of mode
            diss = uniform_filter(diss, size=patch_size, mode="constant")
            diss = diss[pr:pr + h, pr:pr + w] * n_patch
            wgt = np.exp(-diss / h_bw)
            num += wgt * ypad[pad + dy:pad + dy + h, pad + dx:pad + dx + w]
            den += wgt
    return Image(np.maximum(num / den, 0.0))


FILTERS = {"lee": lee, "kuan": kuan, "frost": frost, "ppb": ppb_lite}
