"""Timing persistent homology on a downsample instead of the original."""

from __future__ import annotations

import math
import time

from ..methods import run_method
from ..persistence import bottleneck_distance, image_diagram
from ..raster import BinaryImage, Factors


def _timed_diagram(img: BinaryImage):
    t0 = time.perf_counter()
    dg = image_diagram(img)
    return dg, time.perf_counter() - t0


def ph_speedup_benchmark(corpus, factors_list, method: str = "ip", time_limit: float = 60.0) -> list[dict]:
    """Per factor: mean downsampling time, mean PH time on the small image,
    mean PH time on the original and mean PH distance between the two diagrams.

    Images the method cannot downsample are left out of that factor's means.
    ``speedup`` is original PH time over (downsample + small PH) time.
    """
    corpus = list(corpus)
    originals = [_timed_diagram(img) for img in corpus]
    rows = []
    for f in factors_list:
        f = f if isinstance(f, Factors) else Factors(int(f), int(f))
        t_down = t_small = t_orig = dist = 0.0
        n = 0
        for img, (dg_orig, t_o) in zip(corpus, originals):
            if f.a == 1 and f.b == 1:
                small, took = img, 0.0
            else:
                out = run_method(img, f, method, time_limit=time_limit)
                if out.image is None:
                    continue
                small, took = out.image, out.elapsed
            dg_small, t_s = _timed_diagram(small)
            d = max(bottleneck_distance(dg_orig.dim(k), dg_small.dim(k)) for k in (0, 1))
            t_down += took
            t_small += t_s
            t_orig += t_o
            dist += d
            n += 1
        if n == 0:
            rows.append({"factors": str(f), "n": 0, "downsample_seconds": math.nan, "ph_small_seconds": math.nan,
                         "ph_original_seconds": math.nan, "ph_distance": math.nan, "speedup": math.nan})
            continue
        total = t_down + t_small
        rows.append({
            "factors": str(f),
            "n": n,
            "downsample_seconds": t_down / n,
            "ph_small_seconds": t_small / n,
            "ph_original_seconds": t_orig / n,
            "ph_distance": dist / n,
            "speedup": t_orig / total if total > 0 else math.inf,
        })
    return rows


def break_even_factor(rows) -> str | None:
    """Smallest factor whose speed-up exceeds 1, if any."""
    for r in rows:
        if r["n"] and r["speedup"] > 1 and r["factors"] != "1x1":
            return r["factors"]
    return None
