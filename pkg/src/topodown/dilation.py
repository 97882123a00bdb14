"""Baseline downsampler that keeps topology by construction.

Every component is first drawn as a tiny seed (a dot, or a ring around dots for
components with holes) and the seeds are grown one big-pixel at a time. A flip
is accepted only if the pixel is simple (its neighbourhood stays one black
8-component and one white 4-component) and all of its neighbours belong to the
two components involved, so the labeled adjacency tree never changes. Black
components grow to convergence first, then white ones.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

import numpy as np

from .ipmodel import default_coverage, score_table
from .raster import BinaryImage, Factors, crop_ring, pad_white_ring
from .topology import ComponentLabeling, label_components

_N8 = ((-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0))


class SeedLayoutError(RuntimeError):
    """The downsampled grid is too small to host the seed drawings."""


@dataclass
class DilationStats:
    black_steps: int
    white_steps: int
    sweeps: int
    elapsed: float
    timed_out: bool


# --------------------------------------------------------------------------- seeds


def _children(lab: ComponentLabeling) -> list[list[int]]:
    kids: list[list[int]] = [[] for _ in range(lab.n)]
    for i in range(lab.n):
        if lab.parent[i] >= 0:
            kids[int(lab.parent[i])].append(i)
    return kids


def _drawing(comp: int, kids, colors) -> np.ndarray:
    """Label array drawing ``comp`` with all of its descendants."""
    parts = [_drawing(c, kids, colors) for c in kids[comp]]
    if not parts:
        return np.array([[comp]])
    if colors[comp]:
        # black ring around the hole drawings, one black column between holes
        margin_w, margin_h = 1, 1
    else:
        # white box with a white margin keeping black children apart from the ring
        margin_w, margin_h = 1, 1
    height = max(p.shape[0] for p in parts) + 2 * margin_h
    width = sum(p.shape[1] for p in parts) + (len(parts) - 1) + 2 * margin_w
    out = np.full((height, width), comp)
    x = margin_w
    for p in parts:
        out[margin_h : margin_h + p.shape[0], x : x + p.shape[1]] = p
        x += p.shape[1] + 1
    return out


def seed_layout(lab: ComponentLabeling, factors: Factors) -> np.ndarray:
    """Per-big-pixel component ids of the seed image.

    ``lab`` must label an image with an all-white border (e.g. a padded one);
    the outermost grid ring is kept for the surrounding white component.
    """
    h, w = lab.shape
    gw, gh = w // factors.a, h // factors.b
    ext = lab.exterior()
    if ext is None:
        if lab.white_count == 0:
            return np.zeros((gh, gw), dtype=np.int64)
        raise ValueError("black pixel on the image border; pad the image first")
    kids = _children(lab)
    grid = np.full((gh, gw), ext, dtype=np.int64)
    taken = np.zeros((gh, gw), dtype=bool)
    ys, xs = np.nonzero(np.ones_like(lab.label_map, dtype=bool))
    flat = lab.label_map.ravel()
    cx = np.bincount(flat, weights=xs, minlength=lab.n) / np.maximum(lab.sizes, 1)
    cy = np.bincount(flat, weights=ys, minlength=lab.n) / np.maximum(lab.sizes, 1)

    tops = [(_drawing(c, kids, lab.colors), c) for c in kids[ext]]
    tops.sort(key=lambda t: (-t[0].size, t[1]))
    for draw, comp in tops:
        dh, dw = draw.shape
        tx = (cx[comp] + 0.5) / factors.a - 0.5 - (dw - 1) / 2
        ty = (cy[comp] + 0.5) / factors.b - 0.5 - (dh - 1) / 2
        best = None
        for y in range(1, gh - dh):
            for x in range(1, gw - dw):
                if taken[y - 1 : y + dh + 1, x - 1 : x + dw + 1].any():
                    continue
                key = ((x - tx) ** 2 + (y - ty) ** 2, y, x)
                if best is None or key < best:
                    best = key
        if best is None:
            raise SeedLayoutError(f"no room for the seed of component {comp} on a {gw}x{gh} grid")
        _, y, x = best
        grid[y : y + dh, x : x + dw] = draw
        taken[y : y + dh, x : x + dw] = True
    return grid


# --------------------------------------------------------------------------- growth


def _ring_components(cells, adjacent) -> list[set]:
    comps: list[set] = []
    for c in cells:
        linked = [g for g in comps if any(adjacent(c, o) for o in g)]
        merged = {c}.union(*linked) if linked else {c}
        comps = [g for g in comps if g not in linked] + [merged]
    return comps


def _simple_table() -> list[bool]:
    table = []
    for mask in range(256):
        black = [_N8[k] for k in range(8) if mask >> k & 1]
        white = [_N8[k] for k in range(8) if not mask >> k & 1]
        b8 = _ring_components(black, lambda p, q: max(abs(p[0] - q[0]), abs(p[1] - q[1])) == 1)
        w4 = _ring_components(white, lambda p, q: abs(p[0] - q[0]) + abs(p[1] - q[1]) == 1)
        w4 = [g for g in w4 if any(dx == 0 or dy == 0 for dx, dy in g)]
        table.append(len(b8) == 1 and len(w4) == 1)
    return table


_SIMPLE = _simple_table()


def is_simple(black: np.ndarray, x: int, y: int) -> bool:
    """2-D simple point test under 8-connected black and 4-connected white:
    the 8-neighbourhood holds exactly one black 8-component and exactly one
    white 4-component touching the centre. Cells outside the array are white."""
    h, w = black.shape
    mask = 0
    for k, (dx, dy) in enumerate(_N8):
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h and black[ny, nx]:
            mask |= 1 << k
    return _SIMPLE[mask]


def _neighbour_labels(comp: np.ndarray, colors, x: int, y: int):
    h, w = comp.shape
    blacks, whites_edge, whites_all = set(), set(), set()
    for dx, dy in _N8:
        nx, ny = x + dx, y + dy
        if not (0 <= nx < w and 0 <= ny < h):
            continue
        c = int(comp[ny, nx])
        if colors[c]:
            blacks.add(c)
        else:
            whites_all.add(c)
            if dx == 0 or dy == 0:
                whites_edge.add(c)
    return blacks, whites_edge, whites_all


def can_flip(comp: np.ndarray, colors, x: int, y: int, target: int) -> bool:
    """Whether relabeling cell (x, y) to ``target`` keeps the labeled RAG."""
    gh, gw = comp.shape
    if x in (0, gw - 1) or y in (0, gh - 1):
        return False
    donor = int(comp[y, x])
    if donor == target or colors[donor] == colors[target]:
        return False
    black = colors[comp]
    if not is_simple(black, x, y):
        return False
    blacks, whites_edge, whites_all = _neighbour_labels(comp, colors, x, y)
    if colors[target]:
        # white cell joins the black target: touches only target (black) and donor (white)
        return blacks == {target} and whites_all <= {donor}
    # black cell joins the white target
    return whites_edge == {target} and blacks <= {donor} and whites_all <= {target}


def _frontier(comp: np.ndarray, target: int, scores: np.ndarray, colors, overlap_only: bool = False):
    gh, gw = comp.shape
    mine = comp == target
    near = np.zeros_like(mine)
    near[1:, :] |= mine[:-1, :]
    near[:-1, :] |= mine[1:, :]
    near[:, 1:] |= mine[:, :-1]
    near[:, :-1] |= mine[:, 1:]
    cand = near & ~mine & (colors[comp] != colors[target])
    if overlap_only:
        cand &= scores > 0
    ys, xs = np.nonzero(cand)
    order = sorted(zip(xs.tolist(), ys.tolist()), key=lambda p: (-scores[p[1], p[0]], p[1], p[0]))
    return order


def dilate_once(comp: np.ndarray, colors, target: int, scores: np.ndarray, overlap_only: bool = False) -> bool:
    """Grow ``target`` by its best admissible neighbouring cell (in place).

    Cells are tried by descending overlap score, then in scan order. With
    ``overlap_only`` cells where the target has no pixels in the coverage
    window are never taken.
    """
    for x, y in _frontier(comp, target, scores, colors, overlap_only):
        if can_flip(comp, colors, x, y, target):
            comp[y, x] = target
            return True
    return False


class _Grower:
    """Incremental version of repeated ``dilate_once`` calls.

    Each target keeps a heap of cells keyed like ``_frontier`` orders them.
    A cell that fails ``can_flip`` is dropped: its admissibility depends only
    on its 3x3 neighbourhood, and any change there queues it again. So every
    step picks the same cell the full frontier scan would.
    """

    def __init__(self, comp, colors, table, overlap_only):
        self.comp = comp
        self.colors = colors
        self.table = table
        self.overlap_only = overlap_only
        self.heaps: dict[int, list] = {}
        self.queued: dict[int, set] = {}
        self.phase_black = True

    def start_phase(self, phase_black: bool, targets):
        self.phase_black = phase_black
        self.heaps = {t: [] for t in targets}
        self.queued = {t: set() for t in targets}
        for t in targets:
            for x, y in _frontier(self.comp, t, self.table[t], self.colors, self.overlap_only):
                self._push(t, x, y)

    def _push(self, t, x, y):
        score = self.table[t][y, x]
        if self.overlap_only and score <= 0:
            return
        if (x, y) in self.queued[t]:
            return
        self.queued[t].add((x, y))
        heapq.heappush(self.heaps[t], (-score, y, x))

    def _touches(self, t, x, y) -> bool:
        comp = self.comp
        gh, gw = comp.shape
        return any(
            0 <= x + ddx < gw and 0 <= y + ddy < gh and comp[y + ddy, x + ddx] == t
            for ddx, ddy in ((0, -1), (-1, 0), (1, 0), (0, 1))
        )

    def grow(self, t) -> bool:
        heap, queued, comp, colors = self.heaps[t], self.queued[t], self.comp, self.colors
        while heap:
            _, y, x = heapq.heappop(heap)
            queued.discard((x, y))
            if colors[comp[y, x]] == colors[t] or not self._touches(t, x, y):
                continue
            if can_flip(comp, colors, x, y, t):
                comp[y, x] = t
                self._changed(x, y)
                return True
        return False

    def _changed(self, cx, cy):
        comp, colors = self.comp, self.colors
        gh, gw = comp.shape
        for ny in range(max(cy - 1, 0), min(cy + 2, gh)):
            for nx in range(max(cx - 1, 0), min(cx + 2, gw)):
                if bool(colors[comp[ny, nx]]) == self.phase_black:
                    continue
                for ddx, ddy in ((0, -1), (-1, 0), (1, 0), (0, 1)):
                    mx, my = nx + ddx, ny + ddy
                    if 0 <= mx < gw and 0 <= my < gh:
                        t = int(comp[my, mx])
                        if t in self.heaps:
                            self._push(t, nx, ny)


def dilation_downsample(
    img: BinaryImage,
    factors: Factors,
    time_limit: float = 60.0,
    dx: int | None = None,
    dy: int | None = None,
    overlap_only: bool = False,
) -> tuple[BinaryImage, np.ndarray, DilationStats]:
    """Seed-and-grow downsampling; returns (image, component map, stats).

    Component ids refer to ``label_components(img, exterior=True)``. By default
    growth may enter any neighbouring cell, so after the white phase black
    regions end up thin; ``overlap_only`` keeps each component inside cells
    its original pixels reach, which tracks the shapes far more closely.
    """
    img.check_divisible(factors)
    t0 = time.monotonic()
    padded = pad_white_ring(img, factors)
    lab = label_components(padded)
    ddx, ddy = default_coverage(factors)
    table = score_table(lab, factors, ddx if dx is None else dx, ddy if dy is None else dy)
    comp = seed_layout(lab, factors)
    colors = np.asarray(lab.colors)
    steps = {True: 0, False: 0}
    sweeps = 0
    timed_out = False
    grower = _Grower(comp, colors, table, overlap_only)
    for phase_black in (True, False):
        targets = [i for i in range(lab.n) if bool(colors[i]) == phase_black]
        grower.start_phase(phase_black, targets)
        active = list(targets)
        while active and not timed_out:
            sweeps += 1
            still = []
            for t in active:
                if time.monotonic() - t0 > time_limit:
                    timed_out = True
                    break
                if grower.grow(t):
                    steps[phase_black] += 1
                    still.append(t)
            active = still
    out = crop_ring(BinaryImage(colors[comp]), Factors(1, 1))
    stats = DilationStats(steps[True], steps[False], sweeps, time.monotonic() - t0, timed_out)
    return out, comp[1:-1, 1:-1], stats
