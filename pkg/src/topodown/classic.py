"""Conventional downsamplers that ignore topology, used as baselines."""

from __future__ import annotations

import numpy as np

from .raster import BinaryImage, Factors

CUBIC_A = -0.75


def _blocks(img: BinaryImage, f: Factors) -> np.ndarray:
    img.check_divisible(f)
    h, w = img.shape
    return img.pixels.reshape(h // f.b, f.b, w // f.a, f.a)


def nearest(img: BinaryImage, factors: Factors) -> BinaryImage:
    img.check_divisible(factors)
    return BinaryImage(img.pixels[:: factors.b, :: factors.a])


def area_pool(img: BinaryImage, factors: Factors) -> BinaryImage:
    """Black when at least half of the block is black."""
    counts = _blocks(img, factors).sum(axis=(1, 3))
    return BinaryImage(2 * counts >= factors.a * factors.b)


def max_pool(img: BinaryImage, factors: Factors) -> BinaryImage:
    return BinaryImage(_blocks(img, factors).any(axis=(1, 3)))


def min_pool(img: BinaryImage, factors: Factors) -> BinaryImage:
    return BinaryImage(_blocks(img, factors).all(axis=(1, 3)))


def _cubic(t: np.ndarray, a: float = CUBIC_A) -> np.ndarray:
    t = np.abs(t)
    near = ((a + 2) * t - (a + 3)) * t * t + 1
    far = ((a * t - 5 * a) * t + 8 * a) * t - 4 * a
    return np.where(t <= 1, near, np.where(t < 2, far, 0.0))


def _linear(t: np.ndarray) -> np.ndarray:
    return np.clip(1 - np.abs(t), 0, None)


def _resample_matrix(n_src: int, factor: int, kernel: str) -> np.ndarray:
    """Rows are output samples, columns source pixels; sample X sits at source
    coordinate (X + 0.5) * factor - 0.5 and borders replicate."""
    n_dst = n_src // factor
    centers = (np.arange(n_dst) + 0.5) * factor - 0.5
    base = np.floor(centers).astype(int)
    frac = centers - base
    taps = (-1, 0, 1, 2) if kernel == "bicubic" else (0, 1)
    fn = _cubic if kernel == "bicubic" else _linear
    mat = np.zeros((n_dst, n_src))
    for t in taps:
        idx = np.clip(base + t, 0, n_src - 1)
        np.add.at(mat, (np.arange(n_dst), idx), fn(frac - t))
    return mat


def filter_threshold(img: BinaryImage, factors: Factors, kernel: str = "bicubic") -> BinaryImage:
    """Separable grey resample (black = 1.0) followed by a threshold at 0.5."""
    if kernel not in ("bilinear", "bicubic"):
        raise ValueError(f"unknown kernel {kernel!r}")
    img.check_divisible(factors)
    h, w = img.shape
    grey = img.pixels.astype(float)
    ry = _resample_matrix(h, factors.b, kernel)
    rx = _resample_matrix(w, factors.a, kernel)
    out = ry @ grey @ rx.T
    return BinaryImage(out >= 0.5 - 1e-9)


def bilinear(img, factors):
    return filter_threshold(img, factors, "bilinear")


def bicubic(img, factors):
    return filter_threshold(img, factors, "bicubic")


# --------------------------------------------------------------------------- ACN

_RING = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))


def crossing_numbers(px: np.ndarray) -> np.ndarray:
    """Per pixel: number of same-color runs around its 8-neighbour circle
    (half the number of same/different transitions). Outside pixels are white."""
    h, w = px.shape
    pad = np.zeros((h + 2, w + 2), dtype=bool)
    pad[1:-1, 1:-1] = px
    same = [pad[1 + dy : h + 1 + dy, 1 + dx : w + 1 + dx] == px for dx, dy in _RING]
    trans = sum((same[k] != same[(k + 1) % 8]).astype(np.int64) for k in range(8))
    return trans // 2


def _acn_level(px: np.ndarray) -> np.ndarray:
    h, w = px.shape
    cn = crossing_numbers(px)
    # block-local order 0..3 = upper-left, upper-right, lower-left, lower-right
    cand_cn = np.stack([cn[0::2, 0::2], cn[0::2, 1::2], cn[1::2, 0::2], cn[1::2, 1::2]])
    cand_px = np.stack([px[0::2, 0::2], px[0::2, 1::2], px[1::2, 0::2], px[1::2, 1::2]])
    pick = np.argmax(cand_cn, axis=0)  # first maximum wins ties
    return np.take_along_axis(cand_px, pick[None], axis=0)[0]


def acn_downsample(img: BinaryImage, factors: Factors) -> BinaryImage:
    """Repeated 2x2 reduction keeping the pixel with the highest crossing number.

    Only square power-of-two factors are supported.
    """
    if factors.a != factors.b or factors.a & (factors.a - 1):
        raise ValueError("ACN needs equal power-of-two factors")
    img.check_divisible(factors)
    px = img.pixels
    f = factors.a
    while f > 1:
        px = _acn_level(px)
        f //= 2
    return BinaryImage(px)


METHODS = {
    "nearest": nearest,
    "area": area_pool,
    "maxpool": max_pool,
    "minpool": min_pool,
    "bilinear": bilinear,
    "bicubic": bicubic,
    "acn": acn_downsample,
}


def classic_downsample(img: BinaryImage, factors: Factors, method: str) -> BinaryImage:
    try:
        fn = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    return fn(img, factors)
