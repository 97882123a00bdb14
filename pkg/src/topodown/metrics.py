"""Quality metrics for a downsampled image against its original."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict

import numpy as np

from .persistence import ph_distance
from .raster import BinaryImage, Factors
from .topology import image_betti

REPORT_FIELDS = (
    "image", "method", "factors", "status", "iou", "dice",
    "betti_error", "ph_distance", "elapsed_seconds",
)
_NUMERIC = ("iou", "dice", "betti_error", "ph_distance", "elapsed_seconds")


def upsample(img: BinaryImage, factors: Factors) -> BinaryImage:
    """Replicate every pixel into an a x b block."""
    return BinaryImage(np.kron(img.pixels, np.ones((factors.b, factors.a), dtype=bool)))


def _common_grid(a: BinaryImage, b: BinaryImage):
    if a.shape == b.shape:
        return a.pixels, b.pixels
    big, small = (a, b) if a.width >= b.width else (b, a)
    if big.width % small.width or big.height % small.height:
        raise ValueError(f"sizes {a.width}x{a.height} and {b.width}x{b.height} are not commensurate")
    f = Factors(big.width // small.width, big.height // small.height)
    return big.pixels, upsample(small, f).pixels


def iou_dice(a: BinaryImage, b: BinaryImage) -> tuple[float, float]:
    """IoU and Dice of the black sets, after replicating the smaller image up
    to the larger one's size. Two empty sets score 1."""
    pa, pb = _common_grid(a, b)
    inter = int(np.count_nonzero(pa & pb))
    union = int(np.count_nonzero(pa | pb))
    total = int(np.count_nonzero(pa)) + int(np.count_nonzero(pb))
    if union == 0:
        return 1.0, 1.0
    return inter / union, 2 * inter / total


def betti_error(a: BinaryImage, b: BinaryImage) -> int:
    (a0, a1), (b0, b1) = image_betti(a), image_betti(b)
    return abs(a0 - b0) + abs(a1 - b1)


def evaluate(original: BinaryImage, down: BinaryImage | None, *, with_ph: bool = True, **info) -> dict:
    """One report record. ``down`` may be None (no solution); the metrics are
    then NaN. Keyword arguments such as image, method, factors, status and
    elapsed_seconds are copied in. ``ph_distance`` is left out when
    ``with_ph`` is false.
    """
    row = {k: info.get(k, "") for k in REPORT_FIELDS if with_ph or k != "ph_distance"}
    row.update({k: v for k, v in info.items() if k not in row})
    if row["elapsed_seconds"] == "":
        row["elapsed_seconds"] = 0.0
    if isinstance(row["factors"], Factors):
        row["factors"] = str(row["factors"])
    if down is None:
        row.update(iou=math.nan, dice=math.nan, betti_error=math.nan)
        if with_ph:
            row["ph_distance"] = math.nan
        return row
    row["iou"], row["dice"] = iou_dice(original, down)
    row["betti_error"] = betti_error(original, down)
    if with_ph:
        row["ph_distance"] = ph_distance(original, down)
    return row


def aggregate(rows, keys=("method", "factors")) -> list[dict]:
    """Mean of the numeric columns grouped by ``keys``; NaNs are skipped and
    ``n`` counts the rows that had a value for IoU."""
    groups = defaultdict(list)
    for r in rows:
        groups[tuple(str(r[k]) for k in keys)].append(r)
    out = []
    for key, rs in groups.items():
        agg = dict(zip(keys, key))
        for col in _NUMERIC:
            vals = [float(r[col]) for r in rs if r.get(col) not in ("", None) and not math.isnan(float(r[col]))]
            agg[col] = sum(vals) / len(vals) if vals else math.nan
        agg["n"] = sum(1 for r in rs if not math.isnan(float(r["iou"])))
        out.append(agg)
    return out


def rows_to_csv(rows, fields=None) -> str:
    rows = list(rows)
    if fields is None:
        fields = list(rows[0].keys()) if rows else list(REPORT_FIELDS)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
