"""Approximate shortest paths inside black regions computed on a downsample.

Distances use 8-connected moves. At original resolution an axis step costs 1
and a diagonal step sqrt(2); on the big-pixel grid the costs are A, B and
sqrt(A^2 + B^2), so both are measured in original pixels.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_array
from scipy.sparse.csgraph import dijkstra

from ..raster import BinaryImage, Factors
from ..topology import ComponentLabeling


class MappingError(ValueError):
    """The query pixel's component has no big-pixel in the downsample."""


@dataclass
class PathQuery:
    p0: tuple[int, int]
    p1: tuple[int, int]
    reachable: bool | None = None
    distance: float = math.inf
    path: list[tuple[int, int]] = field(default_factory=list)


def grid_graph(mask: np.ndarray, wx: float = 1.0, wy: float = 1.0):
    """Sparse 8-connected graph over the True cells of ``mask``.

    Returns (graph, node index per cell with -1 off the mask).
    """
    h, w = mask.shape
    index = -np.ones((h, w), dtype=np.int64)
    ys, xs = np.nonzero(mask)
    index[ys, xs] = np.arange(len(ys))
    wd = math.hypot(wx, wy)
    rows, cols, vals = [], [], []
    for dx, dy, cost in ((1, 0, wx), (0, 1, wy), (1, 1, wd), (-1, 1, wd)):
        sy0, sy1 = 0, h - dy
        sx0, sx1 = max(0, -dx), w - max(0, dx)
        src = index[sy0:sy1, sx0:sx1]
        dst = index[sy0 + dy : sy1 + dy, sx0 + dx : sx1 + dx]
        ok = (src >= 0) & (dst >= 0)
        rows.append(src[ok])
        cols.append(dst[ok])
        vals.append(np.full(int(ok.sum()), cost))
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    n = len(ys)
    graph = coo_array((np.concatenate([v, v]), (np.concatenate([r, c]), np.concatenate([c, r]))), shape=(n, n))
    return graph.tocsr(), index


def _block_distance(x: int, y: int, bx: int, by: int, f: Factors) -> float:
    ddx = max(bx * f.a - x, 0, x - (bx * f.a + f.a - 1))
    ddy = max(by * f.b - y, 0, y - (by * f.b + f.b - 1))
    return math.hypot(ddx, ddy)


def map_pixel_to_bigpixel(
    p: tuple[int, int],
    lab_orig: ComponentLabeling,
    down: BinaryImage,
    comp_map: np.ndarray | None,
    factors: Factors,
) -> tuple[int, int]:
    """Big-pixel standing in for black pixel ``p``.

    With a component map (ids of ``lab_orig``) the big-pixel must carry p's
    component; without one (classic methods) any black big-pixel qualifies.
    The covering block wins if it qualifies, otherwise the qualifying block
    nearest to p, ties broken in scan order.
    """
    x, y = p
    comp = int(lab_orig.label_map[y, x])
    if not lab_orig.colors[comp]:
        raise ValueError(f"pixel {p} is white")
    ok = down.pixels.copy()
    if comp_map is not None:
        ok &= comp_map == comp
    bx, by = x // factors.a, y // factors.b
    if ok[by, bx]:
        return bx, by
    ys, xs = np.nonzero(ok)
    if len(ys) == 0:
        raise MappingError(f"component {comp} is missing from the downsample")
    best = min(zip(ys.tolist(), xs.tolist()), key=lambda c: (_block_distance(x, y, c[1], c[0], factors), c))
    return best[1], best[0]


def _trace(pred: np.ndarray, cells: np.ndarray, src: int, dst: int) -> list[tuple[int, int]]:
    out = [dst]
    while out[-1] != src:
        out.append(int(pred[out[-1]]))
    return [(int(cells[1][i]), int(cells[0][i])) for i in reversed(out)]


def approx_shortest_path(
    orig: BinaryImage,
    down: BinaryImage,
    q: PathQuery,
    lab_orig: ComponentLabeling,
    comp_map: np.ndarray | None,
    factors: Factors,
) -> PathQuery:
    """Answer ``q`` on the big-pixel grid; the path is returned as the
    top-left original pixels of the visited big-pixels."""
    for p in (q.p0, q.p1):
        if not orig.pixels[p[1], p[0]]:
            raise ValueError(f"query endpoint {p} is not black")
    s = map_pixel_to_bigpixel(q.p0, lab_orig, down, comp_map, factors)
    t = map_pixel_to_bigpixel(q.p1, lab_orig, down, comp_map, factors)
    graph, index = grid_graph(down.pixels, factors.a, factors.b)
    cells = np.nonzero(down.pixels)
    si, ti = int(index[s[1], s[0]]), int(index[t[1], t[0]])
    dist, pred = dijkstra(graph, indices=si, return_predecessors=True)
    res = PathQuery(q.p0, q.p1)
    if not np.isfinite(dist[ti]):
        res.reachable = False
        return res
    res.reachable = True
    res.distance = float(dist[ti])
    res.path = [(gx * factors.a, gy * factors.b) for gx, gy in _trace(pred, cells, si, ti)]
    return res


def true_distances(orig: BinaryImage, sources, targets) -> np.ndarray:
    """Exact 8-connected weighted distances between black pixel pairs."""
    graph, index = grid_graph(orig.pixels)
    src = np.array([index[y, x] for x, y in sources])
    uniq, inv = np.unique(src, return_inverse=True)
    d = dijkstra(graph, indices=uniq)
    tgt = np.array([index[y, x] for x, y in targets])
    return d[inv, tgt]


def sample_queries(img: BinaryImage, n: int, rng: np.random.Generator) -> list[PathQuery]:
    ys, xs = np.nonzero(img.pixels)
    if len(ys) == 0:
        return []
    a = rng.integers(0, len(ys), n)
    b = rng.integers(0, len(ys), n)
    return [PathQuery((int(xs[i]), int(ys[i])), (int(xs[j]), int(ys[j]))) for i, j in zip(a, b)]


@dataclass
class PathStats:
    method: str
    queries: int = 0
    compared: int = 0
    error_sum: float = 0.0
    fp: int = 0
    fn: int = 0
    seconds: float = 0.0

    @property
    def mean_error(self) -> float:
        return self.error_sum / self.compared if self.compared else math.nan

    def row(self) -> dict:
        return {
            "method": self.method, "queries": self.queries, "compared": self.compared,
            "mean_distance_error": self.mean_error, "fp": self.fp, "fn": self.fn,
            "seconds": self.seconds,
        }


def path_benchmark(corpus, factors: Factors, methods, queries_per_image: int = 200, seed: int = 0):
    """Compare approximate paths on each method's downsample with exact ones.

    ``methods`` maps a name to ``fn(img, factors) -> (down, comp_map | None)``;
    a method may return ``(None, None)`` to skip an image (e.g. no IP solution),
    in which case that image is skipped for every method so all rows share the
    same queries. Returns {method: PathStats}.
    """
    from ..topology import label_components

    stats = {m: PathStats(m) for m in methods}
    rng = np.random.default_rng(seed)
    for img in corpus:
        queries = sample_queries(img, queries_per_image, rng)
        if not queries:
            continue
        outs = {}
        for name, fn in methods.items():
            t0 = time.perf_counter()
            outs[name] = (fn(img, factors), time.perf_counter() - t0)
        if any(o[0][0] is None for o in outs.values()):
            continue
        lab = label_components(img, exterior=True)
        truth = true_distances(img, [q.p0 for q in queries], [q.p1 for q in queries])
        for name, ((down, cmap), took) in outs.items():
            st = stats[name]
            t0 = time.perf_counter()
            graph, index = grid_graph(down.pixels, factors.a, factors.b)
            mapped = []
            for q in queries:
                try:
                    s = map_pixel_to_bigpixel(q.p0, lab, down, cmap, factors)
                    t = map_pixel_to_bigpixel(q.p1, lab, down, cmap, factors)
                    mapped.append((int(index[s[1], s[0]]), int(index[t[1], t[0]])))
                except MappingError:
                    mapped.append(None)
            srcs = sorted({m[0] for m in mapped if m is not None})
            dist = dijkstra(graph, indices=srcs) if srcs else np.zeros((0, 0))
            row_of = {s: i for i, s in enumerate(srcs)}
            for q, m, true in zip(queries, mapped, truth):
                approx = math.inf if m is None else float(dist[row_of[m[0]], m[1]])
                st.queries += 1
                if math.isfinite(true) and math.isfinite(approx):
                    st.compared += 1
                    st.error_sum += abs(approx - true)
                elif math.isfinite(approx):
                    st.fp += 1
                elif math.isfinite(true):
                    st.fn += 1
            st.seconds += took + time.perf_counter() - t0
    return stats
