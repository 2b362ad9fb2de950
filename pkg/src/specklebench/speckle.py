"""Multiplicative speckle models and their samplers.

Two noise fields are supported, both unit-mean so that speckling preserves
mean intensity:

* ``GammaLook(looks=L)`` — L-look intensity speckle: i.i.d. draws from
  Gamma(shape=L, scale=1/L), mean 1 and variance 1/L. Sampled exactly as
  the mean of L unit-exponential draws (-ln u), so no special-function
  sampler is involved.
* ``UniformEta(variance=v)`` — eta drawn uniformly on
  [1 - sqrt(3 v), 1 + sqrt(3 v)], mean 1 and variance v. For v > 1/3 the
  support reaches below zero; negative draws are clamped to 0 because
  intensities are physical quantities (this introduces a small positive
  mean bias, which is deliberate and documented rather than hidden by
  re-normalization).

Note on the uniform model's parameter: it is the *variance* of eta, not
its standard deviation, and the mean is fixed at 1. The CLI exposes it as
``--eta-variance`` to keep the reading explicit.

A speckled observation is the elementwise product of a clean image and a
field. Everything stays in the linear intensity domain; there is no
log-transform anywhere (zero-valued pixels would map to -inf).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import Image, _as_grid

ETA_VARIANCE_MAX = 0.9


@dataclass(frozen=True)
class GammaLook:
    """L-look gamma speckle: unit mean, variance 1/looks."""

    looks: int

    def __post_init__(self):
        if not isinstance(self.looks, (int, np.integer)) or self.looks < 1:
            raise ValueError(f"looks must be an integer >= 1, got {self.looks!r}")

    @property
    def coefficient_of_variation(self) -> float:
        return 1.0 / np.sqrt(self.looks)

    def to_json(self) -> dict:
        return {"model": "gamma", "looks": int(self.looks)}


@dataclass(frozen=True)
class UniformEta:
    """Uniform unit-mean eta with the given variance (clamped at 0)."""

    variance: float

    def __post_init__(self):
        if not 0.0 <= self.variance <= ETA_VARIANCE_MAX:
            raise ValueError(
                f"eta variance must be in [0, {ETA_VARIANCE_MAX}], got {self.variance!r}"
            )

    @property
    def coefficient_of_variation(self) -> float:
        return float(np.sqrt(self.variance))

    def to_json(self) -> dict:
        return {"model": "uniform", "variance": float(self.variance)}


NoiseSpec = GammaLook | UniformEta


def noise_spec_from_json(obj: dict) -> NoiseSpec:
    model = obj.get("model")
    if model == "gamma":
        return GammaLook(looks=int(obj["looks"]))
    if model == "uniform":
        return UniformEta(variance=float(obj["variance"]))
    raise ValueError(f"unknown noise model {model!r}")


@dataclass(frozen=True)
class NoiseField:
    """Realization of a multiplicative noise field (non-negative reals)."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_grid(self.data))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def sample_gamma_field(width: int, height: int, looks: int,
                       rng: np.random.Generator) -> NoiseField:
    """Sample an i.i.d. L-look gamma field of the given shape.

    Draws are the mean of ``looks`` unit exponentials, each obtained as
    -ln(1-u) from the stream's uniforms, which is exactly
    Gamma(shape=looks, scale=1/looks).
    """
    if not isinstance(looks, (int, np.integer)) or looks < 1:
        raise ValueError(f"looks must be an integer >= 1, got {looks!r}")
    acc = np.zeros((height, width), dtype=np.float64)
    for _ in range(int(looks)):
        u = rng.random((height, width))
        acc -= np.log1p(-u)
    return NoiseField(acc / looks)


def sample_uniform_eta_field(width: int, height: int, variance: float,
                             rng: np.random.Generator) -> NoiseField:
    """Sample an i.i.d. uniform eta field, clamped at zero from below."""
    spec = UniformEta(variance)  # validates the range
    half_width = np.sqrt(3.0 * spec.variance)
    eta = 1.0 - half_width + 2.0 * half_width * rng.random((height, width))
    return NoiseField(np.maximum(eta, 0.0))


def apply_speckle(img: Image, field: NoiseField) -> Image:
    """Elementwise product of image and field. Values above 1 are kept."""
    if img.shape != field.shape:
        raise ValueError(f"shape mismatch: image {img.shape} vs field {field.shape}")
    return Image(img.data * field.data)


def residual_field(noisy: Image, clean: Image) -> np.ndarray:
    """Signed additive residual noisy - clean (the multiplicative excess)."""
    if noisy.shape != clean.shape:
        raise ValueError(f"shape mismatch: {noisy.shape} vs {clean.shape}")
    return noisy.data - clean.data


def sample_field(spec: NoiseSpec, width: int, height: int,
                 rng: np.random.Generator) -> NoiseField:
    if isinstance(spec, GammaLook):
        return sample_gamma_field(width, height, spec.looks, rng)
    if isinstance(spec, UniformEta):
        return sample_uniform_eta_field(width, height, spec.variance, rng)
    raise TypeError(f"not a noise spec: {spec!r}")


def synthesize(img: Image, spec: NoiseSpec, rng: np.random.Generator) -> Image:
    """Speckle a clean image under the given model, deterministically.

    The same (image, spec, stream) always produces a bit-identical result.
    """
    field = sample_field(spec, img.width, img.height, rng)
    return apply_speckle(img, field)
