"""Shrink binary masks while keeping every component, hole and adjacency."""

from .raster import BinaryImage, Factors, load_image, save_image, pad_white_ring, crop_ring
from .topology import (
    label_components,
    build_rag,
    trace_boundaries,
    betti_numbers,
    euler_characteristic,
    topology_equivalent,
)
from .ipmodel import build_model, ip_downsample
from .solver import solve, Status

__all__ = [
    "BinaryImage",
    "Factors",
    "load_image",
    "save_image",
    "pad_white_ring",
    "crop_ring",
    "label_components",
    "build_rag",
    "trace_boundaries",
    "betti_numbers",
    "euler_characteristic",
    "topology_equivalent",
    "build_model",
    "ip_downsample",
    "solve",
    "Status",
]
