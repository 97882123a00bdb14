"""Deterministic synthetic masks: smoothed unions of disks with carved holes.

The shapes loosely imitate lesion segmentation masks: one to three sizeable
blobs, a few round holes, and now and then a hard detail (a tiny blob, a
narrow gap between blobs or a pinhole) of the kind that trips up naive
downsamplers.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..raster import BinaryImage
from ..topology import image_betti

MAX_ATTEMPTS = 300
DETAIL_PROBABILITY = 0.3


def _disk(h, w, cx, cy, r):
    yy, xx = np.mgrid[0:h, 0:w]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r


def _blob(rng, h, w, cx, cy, r0):
    mask = _disk(h, w, cx, cy, r0)
    for _ in range(int(rng.integers(0, 3))):
        ang = rng.uniform(0, 2 * np.pi)
        d = r0 * rng.uniform(0.4, 0.9)
        mask |= _disk(h, w, cx + d * np.cos(ang), cy + d * np.sin(ang), r0 * rng.uniform(0.5, 0.85))
    if r0 < 3:
        return mask
    soft = ndimage.gaussian_filter(mask.astype(float), sigma=1.0)
    return soft > 0.5


def _place(rng, canvas, radius_range, gap_range, tries=60):
    """Add one blob whose pixels stay gap_range away from the current canvas."""
    h, w = canvas.shape
    scale = min(h, w)
    away = ndimage.distance_transform_edt(~canvas) if canvas.any() else np.full(canvas.shape, np.inf)
    lo_gap, hi_gap = gap_range
    for _ in range(tries):
        r0 = rng.uniform(*radius_range) * scale
        cx = rng.uniform(r0 + 2, w - r0 - 2)
        cy = rng.uniform(r0 + 2, h - r0 - 2)
        blob = _blob(rng, h, w, cx, cy, r0)
        blob[0, :] = blob[-1, :] = blob[:, 0] = blob[:, -1] = False
        if not blob.any():
            continue
        gap = away[blob].min() - 1 if canvas.any() else np.inf
        if lo_gap <= gap <= hi_gap:
            return canvas | blob
    return None


def _carve(rng, canvas, radius_range, margin):
    h, w = canvas.shape
    depth = ndimage.distance_transform_edt(canvas)
    lo, hi = radius_range
    spots = np.argwhere(depth >= lo + margin)
    if len(spots) == 0:
        return None
    y, x = spots[int(rng.integers(len(spots)))]
    r = rng.uniform(lo, max(lo, min(hi, depth[y, x] - margin)))
    return canvas & ~_disk(h, w, x, y, r)


def _attempt(rng, w, h, blobs, holes, detail):
    canvas = np.zeros((h, w), dtype=bool)
    for k in range(blobs):
        if detail == "tiny" and k == blobs - 1 and blobs > 1:
            canvas = _place(rng, canvas, (0.025, 0.045), (2, 6))
        elif detail == "narrow" and k == blobs - 1 and blobs > 1:
            canvas = _place(rng, canvas, (0.1, 0.18), (1, 3))
        else:
            canvas = _place(rng, canvas, (0.1, 0.2), (8, np.inf))
        if canvas is None:
            return None
    for k in range(holes):
        if detail == "pinhole" and k == holes - 1:
            canvas = _carve(rng, canvas, (0.8, 1.6), 2.5)
        else:
            canvas = _carve(rng, canvas, (3.5, 6.0), 3.0)
        if canvas is None:
            return None
    return canvas


def generate_synthetic(
    seed: int,
    width: int = 64,
    height: int = 64,
    blobs: int | None = None,
    holes: int | None = None,
) -> tuple[BinaryImage, tuple[int, int]]:
    """Return ``(image, (b0, b1))``; the Betti numbers are guaranteed by rejection.

    ``blobs`` and ``holes`` default to random counts drawn from the seed
    (1-3 blobs, 0-2 holes).
    """
    rng = np.random.default_rng(seed)
    if blobs is None:
        blobs = int(rng.integers(1, 4))
    if holes is None:
        holes = int(rng.integers(0, 3)) if blobs else 0
    if blobs == 0:
        if holes:
            raise ValueError("holes need at least one blob")
        return BinaryImage.blank(width, height), (0, 0)
    detail = None
    if rng.random() < DETAIL_PROBABILITY:
        options = ["pinhole"] if holes else []
        options += ["tiny", "narrow"] if blobs > 1 else []
        if options:
            detail = options[int(rng.integers(len(options)))]
    for _ in range(MAX_ATTEMPTS):
        canvas = _attempt(rng, width, height, blobs, holes, detail)
        if canvas is None:
            continue
        img = BinaryImage(canvas)
        if image_betti(img) == (blobs, holes):
            return img, (blobs, holes)
    raise RuntimeError(f"could not generate {blobs} blobs with {holes} holes for seed {seed}")


def synthetic_corpus(n: int, seed: int = 0, width: int = 64, height: int = 64) -> list[BinaryImage]:
    """Images for seeds ``seed .. seed + n - 1``."""
    return [generate_synthetic(s, width, height)[0] for s in range(seed, seed + n)]
