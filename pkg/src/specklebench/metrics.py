"""Quality metrics (PSNR, SSIM, ENL) and the timing/evaluation harness.

Definitions, fixed so results are unambiguous:

* PSNR = 10 log10(data_range^2 / MSE); +inf when the images are identical.
* SSIM uses the Gaussian-weighted formulation: local statistics under a
  normalized 11x11 Gaussian window (sigma 1.5), stabilizers
  C1 = (0.01 range)^2 and C2 = (0.03 range)^2, and the mean is taken over
  window positions fully inside the image (no padded border windows).
* ENL = mean^2 / variance with population (1/N) variance, over the whole
  image or an optional (top, left, height, width) rectangle; +inf for a
  perfectly flat region.

The timing harness measures a single denoiser call with the input already
in memory, discards one warm-up run, and reports the median wall-clock of
the remaining repeats. Benchmarks must not run concurrently with each
other or the medians stop meaning anything.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.ndimage import correlate1d

from .dataset import DatasetManifest
from .errors import UnknownAlgorithmError
from .filters import FILTERS, FilterParams, params_for_noise
from .image import Image, load_image

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5

CSV_COLUMNS = ("image_id", "algorithm", "enl", "psnr", "ssim", "elapsed_s")


def _check_pair(ref: Image, test: Image) -> None:
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")


def psnr(ref: Image, test: Image, data_range: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf iff the images are identical."""
    _check_pair(ref, test)
    if not data_range > 0:
        raise ValueError("data_range must be > 0")
    mse = float(np.mean((ref.data - test.data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(data_range * data_range / mse)


def gaussian_kernel_1d(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 1D Gaussian tap weights centered on the window."""
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _windowed(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # separable correlation; cropping the filter radius leaves exactly the
    # fully-interior windows, independent of the boundary mode
    r = len(kernel) // 2
    y = correlate1d(x, kernel, axis=0, mode="constant")
    y = correlate1d(y, kernel, axis=1, mode="constant")
    return y[r:-r, r:-r]


def ssim(ref: Image, test: Image, data_range: float = 1.0) -> float:
    """Mean structural similarity over all fully-contained 11x11 windows."""
    _check_pair(ref, test)
    if not data_range > 0:
        raise ValueError("data_range must be > 0")
    if min(ref.shape) < SSIM_WINDOW:
        raise ValueError(
            f"image too small for SSIM: need min dimension >= {SSIM_WINDOW}")
    x = ref.data
    y = test.data
    kernel = gaussian_kernel_1d()
    mu_x = _windowed(x, kernel)
    mu_y = _windowed(y, kernel)
    xx = _windowed(x * x, kernel)
    yy = _windowed(y * y, kernel)
    xy = _windowed(x * y, kernel)
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def enl(img: Image, region: tuple[int, int, int, int] | None = None) -> float:
    """Equivalent number of looks: mean^2 / population variance.

    ``region`` is (top, left, height, width); default is the whole image.
    """
    data = img.data
    if region is not None:
        top, left, height, width = region
        if height < 1 or width < 1:
            raise ValueError("empty ENL region")
        if top < 0 or left < 0 or top + height > img.height or left + width > img.width:
            raise ValueError(f"ENL region {region} outside image {img.shape}")
        data = data[top:top + height, left:left + width]
    mean = float(np.mean(data))
    var = float(np.mean((data - mean) ** 2))
    if var == 0.0:
        return math.inf
    return mean * mean / var


Denoiser = Callable[[Image], Image]


def make_denoiser(algorithm: str, params: FilterParams | None = None,
                  net=None) -> Denoiser:
    """Resolve an algorithm name to a one-argument denoiser.

    Known names: the classical filters (lee, kuan, frost, ppb) and "cnn",
    which requires a trained network.
    """
    params = params or FilterParams()
    if algorithm in FILTERS:
        fn = FILTERS[algorithm]
        return lambda img: fn(img, params)
    if algorithm == "cnn":
        if net is None:
            raise UnknownAlgorithmError("algorithm 'cnn' needs a trained model")
        from .net import denoise_cnn
        return lambda img: denoise_cnn(net, img)
    raise UnknownAlgorithmError(f"unknown algorithm {algorithm!r}")


def time_denoiser(algorithm: str, img: Image, repeats: int,
                  params: FilterParams | None = None, net=None) -> float:
    """Median wall-clock seconds of ``repeats`` runs after one warm-up.

    The input is already decoded, so file I/O is excluded from the
    measurement.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    fn = make_denoiser(algorithm, params, net)
    fn(img)  # warm-up, discarded
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(img)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


@dataclass(frozen=True)
class MetricsReport:
    image_id: str
    algorithm: str
    enl: float
    psnr: float
    ssim: float
    elapsed: float | None = None

    def to_csv_row(self) -> list[str]:
        return [
            self.image_id,
            self.algorithm,
            _fmt(self.enl),
            _fmt(self.psnr),
            _fmt(self.ssim),
            "" if self.elapsed is None else _fmt(self.elapsed),
        ]


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return f"{v:.6f}"


def evaluate_manifest(manifest: DatasetManifest, root,
                      algorithms: list[str],
                      net=None,
                      params: FilterParams | None = None) -> list[MetricsReport]:
    """Score every manifest pair under every algorithm.

    Emits one noisy-baseline report per entry followed by one report per
    algorithm. Unless explicit ``params`` are given, filter parameters are
    derived from each entry's recorded noise model. Row order is the
    manifest's entry order, so repeated runs differ only in elapsed times.
    """
    root = Path(root)
    reports: list[MetricsReport] = []
    for entry in manifest.entries:
        clean = load_image(root / entry.clean_path)
        noisy = load_image(root / entry.noisy_path)
        image_id = manifest.image_id(entry)
        reports.append(MetricsReport(
            image_id=image_id,
            algorithm="noisy",
            enl=enl(noisy),
            psnr=psnr(clean, noisy),
            ssim=ssim(clean, noisy),
        ))
        entry_params = params if params is not None \
            else params_for_noise(entry.noise)
        for name in algorithms:
            fn = make_denoiser(name, entry_params, net)
            t0 = time.perf_counter()
            restored = fn(noisy)
            elapsed = time.perf_counter() - t0
            reports.append(MetricsReport(
                image_id=image_id,
                algorithm=name,
                enl=enl(restored),
                psnr=psnr(clean, restored),
                ssim=ssim(clean, restored),
                elapsed=elapsed,
            ))
    return reports


def write_report_csv(reports: list[MetricsReport], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for report in reports:
            writer.writerow(report.to_csv_row())
