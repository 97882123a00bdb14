"""Cubical persistent homology of 2-D images and bottleneck distances.

Pixels are the cells of the filtration. Sublevel sets connect through all 8
neighbours (like black pixels) and their complements through 4 (like white),
so 1-dimensional classes come from a dual sweep over superlevel sets with a
virtual exterior node of value +inf attached to the border.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.sparse import csr_array
from scipy.sparse.csgraph import maximum_bipartite_matching

from .raster import BinaryImage

INF = math.inf


@dataclass
class PersistenceDiagram:
    points: list = field(default_factory=list)  # (birth, death, dim)

    def dim(self, d: int) -> list[tuple[float, float]]:
        return [(b, e) for b, e, k in self.points if k == d]

    def alive_at(self, t: float, d: int) -> int:
        return sum(1 for b, e in self.dim(d) if b <= t < e)

    def scaled(self, s: float) -> "PersistenceDiagram":
        return PersistenceDiagram([(b * s, e * s, k) for b, e, k in self.points])

    def to_json(self) -> str:
        return json.dumps([[b, None if e == INF else e, k] for b, e, k in self.points])

    @classmethod
    def from_json(cls, text: str) -> "PersistenceDiagram":
        return cls([(b, INF if e is None else e, k) for b, e, k in json.loads(text)])


def signed_distance_filtration(img: BinaryImage) -> np.ndarray:
    """Negative distance to the nearest white pixel on black pixels, positive
    distance to the nearest black pixel on white ones. A missing opposite color
    is replaced by a cap of W + H."""
    px = img.pixels
    cap = float(img.width + img.height)
    out = np.empty(px.shape)
    if px.all():
        out[:] = -cap
        return out
    if not px.any():
        out[:] = cap
        return out
    to_white = ndimage.distance_transform_edt(px)
    to_black = ndimage.distance_transform_edt(~px)
    out[px] = -to_white[px]
    out[~px] = to_black[~px]
    return out


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root


_NB8 = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))
_NB4 = ((0, -1), (-1, 0), (1, 0), (0, 1))


def _sweep(values: np.ndarray, order, nbrs, exterior: bool):
    """Union-find over pixels entering in ``order``; returns (pairs, essential
    births) where values are compared in the sweep's own direction via
    ``values`` (already negated for descending sweeps)."""
    h, w = values.shape
    flat = values.ravel()
    n = h * w
    uf = _UnionFind(n + 1)
    birth = [0.0] * (n + 1)
    seen = bytearray(n + 1)
    ext = n
    if exterior:
        seen[ext] = 1
        birth[ext] = -INF
    pairs = []
    for idx in order:
        idx = int(idx)
        y, x = divmod(idx, w)
        v = float(flat[idx])
        seen[idx] = 1
        birth[idx] = v
        roots = set()
        for dx, dy in nbrs:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h:
                j = ny * w + nx
                if seen[j]:
                    roots.add(uf.find(j))
        if exterior and (x in (0, w - 1) or y in (0, h - 1)):
            roots.add(uf.find(ext))
        if not roots:
            continue
        # elder rule: the oldest root survives, every other dies now
        oldest = min(roots, key=lambda r: (birth[r], r if r != ext else -1))
        for r in roots:
            if r != oldest:
                pairs.append((birth[r], v))
                uf.parent[r] = oldest
        uf.parent[idx] = oldest
    essentials = []
    for i in range(n):
        if uf.find(i) == i:
            essentials.append(birth[i])
    return pairs, essentials


def cubical_persistence(filtration: np.ndarray) -> PersistenceDiagram:
    """Dimension 0 and 1 persistence of the sublevel filtration of a 2-D array."""
    f = np.asarray(filtration, dtype=float)
    if not np.isfinite(f).all():
        raise ValueError("filtration values must be finite")
    flat = f.ravel()
    asc = np.argsort(flat, kind="stable")
    pairs0, ess0 = _sweep(f, asc, _NB8, exterior=False)
    points = [(b, d, 0) for b, d in pairs0]
    points += [(b, INF, 0) for b in ess0]
    # superlevel sweep on -f so that "smaller is older" still holds
    neg = -f
    desc = asc[::-1]
    pairs1, _ = _sweep(neg, desc, _NB4, exterior=True)
    # a superlevel component born at -b dying at -d is a hole alive on [d, b)
    points += [(-d, -b, 1) for b, d in pairs1]
    return PersistenceDiagram(points)


def image_diagram(img: BinaryImage, normalize: bool = True) -> PersistenceDiagram:
    dg = cubical_persistence(signed_distance_filtration(img))
    return dg.scaled(1.0 / max(img.width, img.height)) if normalize else dg


# --------------------------------------------------------------------------- bottleneck


def _as_pairs(d) -> list[tuple[float, float]]:
    if isinstance(d, PersistenceDiagram):
        raise TypeError("pass d.dim(k) for a single dimension")
    return [(float(b), float(e)) for b, e in d]


def bottleneck_distance(d1, d2) -> float:
    """Bottleneck distance between two single-dimension diagrams given as
    lists of (birth, death). Points on the diagonal are ignored; essential
    points (death = inf) are matched only with each other."""
    a = [p for p in _as_pairs(d1) if p[0] != p[1]]
    b = [p for p in _as_pairs(d2) if p[0] != p[1]]
    ea = sorted(p[0] for p in a if p[1] == INF)
    eb = sorted(p[0] for p in b if p[1] == INF)
    if len(ea) != len(eb):
        return INF
    ess = max((abs(x - y) for x, y in zip(ea, eb)), default=0.0)
    fa = np.array([p for p in a if p[1] != INF], dtype=float).reshape(-1, 2)
    fb = np.array([p for p in b if p[1] != INF], dtype=float).reshape(-1, 2)
    return max(ess, _finite_bottleneck(fa, fb))


def _finite_bottleneck(fa: np.ndarray, fb: np.ndarray) -> float:
    n, m = len(fa), len(fb)
    if n == 0 and m == 0:
        return 0.0
    half_a = (fa[:, 1] - fa[:, 0]) / 2 if n else np.zeros(0)
    half_b = (fb[:, 1] - fb[:, 0]) / 2 if m else np.zeros(0)
    if n and m:
        cross = np.maximum(
            np.abs(fa[:, None, 0] - fb[None, :, 0]), np.abs(fa[:, None, 1] - fb[None, :, 1])
        )
    else:
        cross = np.zeros((n, m))
    cands = np.unique(np.concatenate([cross.ravel(), half_a, half_b, [0.0]]))

    def feasible(eps: float) -> bool:
        # left: a points then diagonal copies of b; right: b points then diagonal copies of a
        rows, cols = [], []
        ai, bj = np.nonzero(cross <= eps)
        rows.extend(ai.tolist())
        cols.extend(bj.tolist())
        for i in np.nonzero(half_a <= eps)[0]:
            rows.append(int(i))
            cols.append(m + int(i))
        for j in np.nonzero(half_b <= eps)[0]:
            rows.append(n + int(j))
            cols.append(int(j))
        dd_r, dd_c = np.meshgrid(np.arange(n, n + m), np.arange(m, m + n), indexing="ij")
        rows.extend(dd_r.ravel().tolist())
        cols.extend(dd_c.ravel().tolist())
        size = n + m
        graph = csr_array((np.ones(len(rows)), (rows, cols)), shape=(size, size))
        match = maximum_bipartite_matching(graph, perm_type="column")
        return bool((match >= 0).all())

    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


def ph_distance(a: BinaryImage, b: BinaryImage) -> float:
    """Max over dimensions 0 and 1 of the bottleneck distance between the
    normalized signed-distance diagrams of two images."""
    da, db = image_diagram(a), image_diagram(b)
    return max(bottleneck_distance(da.dim(k), db.dim(k)) for k in (0, 1))
