"""Paired clean/noisy dataset construction with an exactly reproducible
manifest.

Layout of a built dataset::

    out_root/
      manifest.jsonl
      <category>/<stem>_clean.png
      <category>/<stem>_noisy.png

``manifest.jsonl`` is line-oriented JSON: a header object followed by one
object per pair, so very large manifests can be streamed. Every entry
records the seed triple (master, category index, image index) that drove
its noise stream; regenerating the noisy image from the stored clean file
and that triple reproduces it exactly, which ``verify_manifest`` checks.

Noise-level stratification: within each category, images are ordered by
byte-wise filename and assigned variances linearly spaced over
[sigma_min, sigma_max], so every category spans the whole noise spectrum
and the assignment is independent of directory-listing order, thread
count, and locale.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DatasetError, ManifestError
from .image import Image, load_image, quantize, save_image
from .rng import SeedSpec
from .speckle import (ETA_VARIANCE_MAX, GammaLook, NoiseSpec, UniformEta,
                      noise_spec_from_json, synthesize)

MANIFEST_NAME = "manifest.jsonl"
MANIFEST_VERSION = 1
DEFAULT_SIGMA_MIN = 0.05
DEFAULT_SIGMA_MAX = 0.9
# default variance for the fixed-noise cross-validation set; matches the
# documented default of the common Matlab speckle routine
DEFAULT_CROSSVAL_VARIANCE = 0.05

_IMAGE_SUFFIXES = {".png", ".pgm"}


@dataclass(frozen=True)
class ManifestEntry:
    category: str
    index: int
    clean_path: str
    noisy_path: str
    noise: NoiseSpec
    seed_triple: tuple[int, int, int]
    split: str  # "train" | "val"

    def to_json(self) -> dict:
        return {
            "category": self.category,
            "index": self.index,
            "clean_path": self.clean_path,
            "noisy_path": self.noisy_path,
            "noise": self.noise.to_json(),
            "seed_triple": list(self.seed_triple),
            "split": self.split,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ManifestEntry":
        if obj.get("split") not in ("train", "val"):
            raise ManifestError(f"bad split {obj.get('split')!r}")
        return cls(
            category=obj["category"],
            index=int(obj["index"]),
            clean_path=obj["clean_path"],
            noisy_path=obj["noisy_path"],
            noise=noise_spec_from_json(obj["noise"]),
            seed_triple=tuple(int(v) for v in obj["seed_triple"]),
            split=obj["split"],
        )


@dataclass
class DatasetManifest:
    master_seed: int
    sigma_min: float
    sigma_max: float
    model: str  # "gamma" | "uniform"
    entries: list[ManifestEntry] = field(default_factory=list)
    version: int = MANIFEST_VERSION

    def image_id(self, entry: ManifestEntry) -> str:
        stem = Path(entry.clean_path).stem
        return f"{entry.category}/{stem.removesuffix('_clean')}"

    def write(self, path) -> None:
        lines = [json.dumps({
            "version": self.version,
            "master_seed": self.master_seed,
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "model": self.model,
        }, sort_keys=True)]
        lines += [json.dumps(e.to_json(), sort_keys=True) for e in self.entries]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    @classmethod
    def read(cls, path) -> "DatasetManifest":
        path = Path(path)
        if not path.is_file():
            raise ManifestError(f"manifest not found: {path}")
        with path.open("r", encoding="utf-8") as fh:
            try:
                header = json.loads(fh.readline())
            except json.JSONDecodeError as exc:
                raise ManifestError(f"bad manifest header in {path}: {exc}") from exc
            if header.get("version") != MANIFEST_VERSION:
                raise ManifestError(
                    f"unsupported manifest version {header.get('version')!r}")
            manifest = cls(
                master_seed=int(header["master_seed"]),
                sigma_min=float(header["sigma_min"]),
                sigma_max=float(header["sigma_max"]),
                model=header["model"],
            )
            seen = set()
            for line_no, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    entry = ManifestEntry.from_json(json.loads(line))
                except (KeyError, ValueError, json.JSONDecodeError) as exc:
                    raise ManifestError(
                        f"bad manifest entry at {path}:{line_no}: {exc}") from exc
                key = (entry.category, entry.index)
                if key in seen:
                    raise ManifestError(f"duplicate entry {key} in {path}")
                seen.add(key)
                manifest.entries.append(entry)
        manifest.entries.sort(key=lambda e: (e.category, e.index))
        return manifest


def assign_spectrum(n: int, sigma_min: float, sigma_max: float) -> list[float]:
    """Linearly spaced variances covering [sigma_min, sigma_max].

    For n == 1 the midpoint is used. Endpoints are hit exactly for n >= 2.
    """
    if n < 1:
        raise ValueError("need at least one image")
    if not 0.0 <= sigma_min <= sigma_max <= ETA_VARIANCE_MAX:
        raise ValueError(
            f"need 0 <= sigma_min <= sigma_max <= {ETA_VARIANCE_MAX}, "
            f"got [{sigma_min}, {sigma_max}]")
    if n == 1:
        return [(sigma_min + sigma_max) / 2.0]
    span = sigma_max - sigma_min
    return [sigma_min + span * i / (n - 1) for i in range(n)]


def _spec_for_variance(model: str, variance: float) -> NoiseSpec:
    if model == "uniform":
        return UniformEta(variance=variance)
    if model == "gamma":
        # gamma speckle has variance 1/L; nearest integer look count
        if variance <= 0:
            raise DatasetError("gamma model needs strictly positive variances; "
                               "set sigma_min > 0")
        return GammaLook(looks=max(1, round(1.0 / variance)))
    raise DatasetError(f"unknown noise model {model!r}")


def _list_images(folder: Path) -> list[Path]:
    files = [p for p in folder.iterdir()
             if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES]
    return sorted(files, key=lambda p: p.name.encode("utf-8"))


def _generate_pair(clean: Image, spec: NoiseSpec, seed: SeedSpec,
                   cat_idx: int, img_idx: int) -> Image:
    rng = seed.stream(cat_idx, img_idx)
    return synthesize(clean, spec, rng)


def _build_one(job) -> ManifestEntry:
    (src, out_root, category, cat_idx, img_idx, spec, seed, split) = job
    # canonical clean is the 8-bit export; synthesizing from it keeps the
    # stored pair regenerable from the clean file alone (matters for RGB
    # sources, where the luma floats are not representable in 8 bits)
    clean = Image(quantize(load_image(src)) / 255.0)
    noisy = _generate_pair(clean, spec, seed, cat_idx, img_idx)
    cat_dir = out_root / category
    clean_rel = f"{category}/{src.stem}_clean.png"
    noisy_rel = f"{category}/{src.stem}_noisy.png"
    cat_dir.mkdir(parents=True, exist_ok=True)
    save_image(clean, out_root / clean_rel)
    save_image(noisy, out_root / noisy_rel)
    return ManifestEntry(
        category=category,
        index=img_idx,
        clean_path=clean_rel,
        noisy_path=noisy_rel,
        noise=spec,
        seed_triple=(seed.master_seed, cat_idx, img_idx),
        split=split,
    )


def _run_jobs(jobs, threads: int, skip_unreadable: bool) -> list[ManifestEntry]:
    entries: list[ManifestEntry] = []
    failures: list[str] = []

    def attempt(job):
        try:
            return _build_one(job)
        except Exception as exc:
            if skip_unreadable:
                failures.append(f"{job[0]}: {exc}")
                return None
            raise

    if threads <= 1:
        results = [attempt(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(attempt, jobs))
    entries = [e for e in results if e is not None]
    for msg in failures:
        print(f"warning: skipped {msg}")
    return entries


def build_dataset(src_root, out_root, *, sigma_min: float = DEFAULT_SIGMA_MIN,
                  sigma_max: float = DEFAULT_SIGMA_MAX, master_seed: int = 0,
                  model: str = "uniform", threads: int = 1,
                  skip_unreadable: bool = False) -> DatasetManifest:
    """Build a stratified training dataset from a tree of category folders.

    Every immediate subfolder of ``src_root`` is one category; its images
    (sorted byte-wise by filename) are assigned variances spanning
    [sigma_min, sigma_max]. Output is a pure function of the source bytes,
    the parameters, and the master seed, regardless of ``threads``.
    """
    src_root, out_root = Path(src_root), Path(out_root)
    if not src_root.is_dir():
        raise DatasetError(f"source folder not found: {src_root}")
    categories = sorted((p for p in src_root.iterdir() if p.is_dir()),
                        key=lambda p: p.name.encode("utf-8"))
    jobs = []
    seed = SeedSpec(master_seed)
    for cat_idx, cat in enumerate(categories):
        images = _list_images(cat)
        if not images:
            continue
        variances = assign_spectrum(len(images), sigma_min, sigma_max)
        for img_idx, (src, v) in enumerate(zip(images, variances)):
            spec = _spec_for_variance(model, v)
            jobs.append((src, out_root, cat.name, cat_idx, img_idx, spec,
                         seed, "train"))
    if not jobs:
        raise DatasetError(f"no images found under {src_root}")

    out_root.mkdir(parents=True, exist_ok=True)
    entries = _run_jobs(jobs, threads, skip_unreadable)
    entries.sort(key=lambda e: (e.category, e.index))
    manifest = DatasetManifest(master_seed=master_seed, sigma_min=sigma_min,
                               sigma_max=sigma_max, model=model, entries=entries)
    manifest.write(out_root / MANIFEST_NAME)
    return manifest


def build_crossval(src_folder, out_root, *,
                   variance: float = DEFAULT_CROSSVAL_VARIANCE,
                   master_seed: int = 0, threads: int = 1,
                   skip_unreadable: bool = False) -> DatasetManifest:
    """Build a fixed-noise validation set from one folder of images.

    Every image is speckled with the uniform-eta model at a single
    variance; entries are marked split=val.
    """
    src_folder, out_root = Path(src_folder), Path(out_root)
    if not src_folder.is_dir():
        raise DatasetError(f"source folder not found: {src_folder}")
    images = _list_images(src_folder)
    if not images:
        raise DatasetError(f"no images found under {src_folder}")
    category = src_folder.name or "val"
    spec = UniformEta(variance=variance)
    seed = SeedSpec(master_seed)
    jobs = [(src, out_root, category, 0, img_idx, spec, seed, "val")
            for img_idx, src in enumerate(images)]

    out_root.mkdir(parents=True, exist_ok=True)
    entries = _run_jobs(jobs, threads, skip_unreadable)
    entries.sort(key=lambda e: (e.category, e.index))
    manifest = DatasetManifest(master_seed=master_seed, sigma_min=variance,
                               sigma_max=variance, model="uniform",
                               entries=entries)
    manifest.write(out_root / MANIFEST_NAME)
    return manifest


@dataclass
class VerifyReport:
    checked: int
    mismatches: list[str]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def verify_manifest(manifest: DatasetManifest, root) -> VerifyReport:
    """Regenerate every noisy image from its seed triple and compare.

    Comparison is on the quantized 8-bit pixel buffer, so the check is
    independent of PNG encoder details. Missing files count as mismatches.
    """
    root = Path(root)
    mismatches = []
    for entry in manifest.entries:
        eid = manifest.image_id(entry)
        clean_file = root / entry.clean_path
        noisy_file = root / entry.noisy_path
        try:
            clean = load_image(clean_file)
            stored = load_image(noisy_file)
        except Exception as exc:
            mismatches.append(f"{eid}: {exc}")
            continue
        master, cat_idx, img_idx = entry.seed_triple
        regen = _generate_pair(clean, entry.noise, SeedSpec(master),
                               cat_idx, img_idx)
        if not np.array_equal(quantize(regen), quantize(stored)):
            mismatches.append(f"{eid}: noisy pixels differ from regeneration")
    return VerifyReport(checked=len(manifest.entries), mismatches=mismatches)
