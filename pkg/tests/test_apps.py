import math

import numpy as np
import pytest

from conftest import img
from oracles import dijkstra_grid
from topodown.apps.paths import (
    MappingError, PathQuery, approx_shortest_path, grid_graph, map_pixel_to_bigpixel, path_benchmark,
    sample_queries, true_distances,
)
from topodown.apps.phspeed import break_even_factor, ph_speedup_benchmark
from topodown.apps.synthetic import generate_synthetic, synthetic_corpus
from topodown.classic import classic_downsample
from topodown.ipmodel import ip_downsample
from topodown.raster import BinaryImage, Factors
from topodown.topology import image_betti, label_components

F2 = Factors(2, 2)


# ---------------------------------------------------------------- generator


def test_generator_deterministic():
    a, _ = generate_synthetic(11)
    b, _ = generate_synthetic(11)
    assert a == b
    assert generate_synthetic(12)[0] != a


def test_generator_blank():
    im, betti = generate_synthetic(0, 16, 16, blobs=0)
    assert betti == (0, 0) and not im.pixels.any()
    with pytest.raises(ValueError):
        generate_synthetic(0, blobs=0, holes=1)


@pytest.mark.slow
def test_generator_betti_guaranteed():
    for s in range(1000):
        im, betti = generate_synthetic(s)
        assert image_betti(im) == betti
        assert not (im.pixels[0].any() or im.pixels[-1].any() or im.pixels[:, 0].any() or im.pixels[:, -1].any())


def test_generator_forced_counts():
    im, betti = generate_synthetic(3, blobs=2, holes=1)
    assert betti == (2, 1) == image_betti(im)


# ---------------------------------------------------------------- paths


def test_grid_graph_matches_dijkstra(rng):
    from scipy.sparse.csgraph import dijkstra

    for wx, wy in ((1, 1), (2, 3)):
        mask = rng.random((7, 9)) < 0.6
        mask[0, 0] = True
        graph, index = grid_graph(mask, wx, wy)
        d = dijkstra(graph, indices=int(index[0, 0]))
        ref = dijkstra_grid(mask, (0, 0), wx, wy)
        for y, x in zip(*np.nonzero(mask)):
            assert d[index[y, x]] == pytest.approx(ref[y, x])


def test_true_distances_straight_line():
    im = img("#####")
    assert true_distances(im, [(0, 0)], [(4, 0)])[0] == 4
    diag = BinaryImage(np.eye(4, dtype=bool))
    assert true_distances(diag, [(0, 0)], [(3, 3)])[0] == pytest.approx(3 * math.sqrt(2))


def test_mapping_inside_block():
    orig = img("....", ".#..", "....", "....")
    lab = label_components(orig, exterior=True)
    down = img("#.", "..")
    comp = np.array([[1, 0], [0, 0]])
    assert map_pixel_to_bigpixel((1, 1), lab, down, comp, F2) == (0, 0)


def test_mapping_nearest_block():
    # p's own block went white; the nearest block of its component is chosen
    orig = img("......", ".##...", "......", "......")
    lab = label_components(orig, exterior=True)
    down = img("#..", "...")
    comp = np.array([[1, 0, 0], [0, 0, 0]])
    assert map_pixel_to_bigpixel((2, 1), lab, down, comp, F2) == (0, 0)
    # exhaustive check over every black block candidate
    p = (2, 1)
    dists = {(bx, by): math.hypot(max(2 * bx - p[0], 0, p[0] - 2 * bx - 1), max(2 * by - p[1], 0, p[1] - 2 * by - 1))
             for bx in range(3) for by in range(2) if comp[by, bx] == 1}
    assert min(dists, key=dists.get) == (0, 0)


def test_mapping_missing_component():
    orig = img("....", ".#..", "....", "..#.")
    lab = label_components(orig, exterior=True)
    down = img("#.", "..")
    comp = np.array([[1, 0], [0, 0]])
    with pytest.raises(MappingError):
        map_pixel_to_bigpixel((2, 3), lab, down, comp, F2)
    with pytest.raises(ValueError):
        map_pixel_to_bigpixel((0, 0), lab, down, comp, F2)


def test_corridor_path():
    px = np.zeros((6, 12), bool)
    px[2:4, 2:10] = True
    orig = BinaryImage(px)
    r = ip_downsample(orig, F2, 0, 0)
    assert r.image.to_strings() == ["......", ".####.", "......"]
    lab = label_components(orig, exterior=True)
    q = approx_shortest_path(orig, r.image, PathQuery((2, 2), (9, 3)), lab, r.component_map, F2)
    assert q.reachable and q.distance == 6.0
    assert q.path == [(2, 2), (4, 2), (6, 2), (8, 2)]


def test_unreachable_pair():
    orig = img("........", ".#....#.", "........", "........")
    r = ip_downsample(orig, F2, 0, 0)
    assert r.image is not None
    lab = label_components(orig, exterior=True)
    q = approx_shortest_path(orig, r.image, PathQuery((1, 1), (6, 1)), lab, r.component_map, F2)
    assert q.reachable is False and q.distance == math.inf


def test_query_endpoint_must_be_black():
    orig = img("##", "..")
    lab = label_components(orig, exterior=True)
    with pytest.raises(ValueError):
        approx_shortest_path(orig, img("#"), PathQuery((0, 1), (0, 0)), lab, None, F2)


def test_sample_queries_are_black(rng):
    im = synthetic_corpus(1, seed=1)[0]
    for q in sample_queries(im, 50, rng):
        assert im.pixels[q.p0[1], q.p0[0]] and im.pixels[q.p1[1], q.p1[0]]
    assert sample_queries(BinaryImage.blank(4, 4), 5, rng) == []


def test_path_benchmark_small():
    corpus = synthetic_corpus(3, seed=20)
    f = Factors(8, 8)

    def ip(im, f):
        r = ip_downsample(im, f)
        return r.image, r.component_map

    methods = {"ip": ip, "maxpool": lambda im, f: (classic_downsample(im, f, "maxpool"), None)}
    stats = path_benchmark(corpus, f, methods, queries_per_image=50, seed=1)
    assert stats["ip"].fp == stats["ip"].fn == 0
    assert stats["ip"].queries == stats["maxpool"].queries == 150
    row = stats["ip"].row()
    assert set(row) >= {"mean_distance_error", "fp", "fn"}


# ---------------------------------------------------------------- PH speed-up


def test_ph_speedup_factor_one():
    corpus = synthetic_corpus(2, seed=30)
    rows = ph_speedup_benchmark(corpus, [1, 4], method="area")
    assert rows[0]["factors"] == "1x1" and rows[0]["ph_distance"] == 0.0
    assert rows[0]["downsample_seconds"] == 0.0
    assert rows[1]["n"] == 2 and rows[1]["ph_distance"] > 0


def test_break_even():
    rows = [{"factors": "1x1", "n": 2, "speedup": 1.5}, {"factors": "2x2", "n": 2, "speedup": 0.9},
            {"factors": "4x4", "n": 2, "speedup": 3.0}]
    assert break_even_factor(rows) == "4x4"
    assert break_even_factor(rows[:2]) is None
