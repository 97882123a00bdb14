"""One entry point for every downsampling method."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .classic import METHODS as CLASSIC
from .classic import classic_downsample
from .dilation import SeedLayoutError, dilation_downsample
from .ipmodel import ip_downsample
from .raster import BinaryImage, Factors
from .solver import DEFAULT_TIME_LIMIT

ALL_METHODS = ("ip", "dilation", "acn", "nearest", "area", "maxpool", "minpool", "bilinear", "bicubic")
TOPOLOGY_METHODS = ("ip", "dilation")


@dataclass
class MethodOutcome:
    method: str
    image: BinaryImage | None
    component_map: np.ndarray | None
    status: str
    elapsed: float
    message: str = ""


def run_method(
    img: BinaryImage,
    factors: Factors,
    method: str,
    *,
    time_limit: float = DEFAULT_TIME_LIMIT,
    dx: int | None = None,
    dy: int | None = None,
    backend: str | None = None,
) -> MethodOutcome:
    """Downsample with ``method``. Status strings are the solver outcomes for
    ip, ``ok``/``timeout``/``error`` for dilation and ``ok`` for the rest."""
    if method not in ALL_METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(ALL_METHODS)}")
    t0 = time.perf_counter()
    if method == "ip":
        r = ip_downsample(img, factors, dx, dy, time_limit=time_limit, backend=backend)
        return MethodOutcome(method, r.image, r.component_map, str(r.status), time.perf_counter() - t0, r.message)
    if method == "dilation":
        try:
            out, comp, stats = dilation_downsample(img, factors, time_limit, dx, dy)
        except SeedLayoutError as exc:
            return MethodOutcome(method, None, None, "error", time.perf_counter() - t0, str(exc))
        status = "timeout" if stats.timed_out else "ok"
        return MethodOutcome(method, out, comp, status, time.perf_counter() - t0)
    assert method in CLASSIC
    out = classic_downsample(img, factors, method)
    return MethodOutcome(method, out, None, "ok", time.perf_counter() - t0)
