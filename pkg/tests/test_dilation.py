import numpy as np
import pytest
from scipy import ndimage

from conftest import img
from topodown.apps.synthetic import synthetic_corpus
from topodown.dilation import (
    SeedLayoutError, can_flip, dilate_once, dilation_downsample, is_simple, seed_layout,
)
from topodown.ipmodel import default_coverage, score_table
from topodown.metrics import iou_dice
from topodown.raster import BinaryImage, Factors, crop_ring, pad_white_ring
from topodown.topology import image_betti, label_components, labeling_is_witness, topology_equivalent

F2 = Factors(2, 2)
N8 = ((-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0))


def simple_oracle(nb):
    """nb: 3x3 bool with the centre ignored. One black 8-component in the ring
    and one white 4-component of the ring that is 4-adjacent to the centre."""
    ring = nb.copy()
    ring[1, 1] = False
    _, nb8 = ndimage.label(ring, structure=np.ones((3, 3)))
    white = ~nb
    white[1, 1] = False
    wl, _ = ndimage.label(white)
    touching = {wl[y, x] for y, x in ((0, 1), (1, 0), (1, 2), (2, 1)) if wl[y, x]}
    return nb8 == 1 and len(touching) == 1


def test_simple_table_matches_scipy():
    for mask in range(256):
        nb = np.zeros((3, 3), bool)
        for k, (dx, dy) in enumerate(N8):
            nb[1 + dy, 1 + dx] = bool(mask >> k & 1)
        assert is_simple(nb, 1, 1) == simple_oracle(nb), mask


def test_simple_flip_keeps_topology(rng):
    # flipping a simple point never changes the topology of a padded image
    for _ in range(300):
        px = np.zeros((7, 7), bool)
        px[1:-1, 1:-1] = rng.random((5, 5)) < 0.5
        x, y = (int(v) for v in rng.integers(1, 6, 2))
        before = BinaryImage(px)
        if is_simple(px, x, y):
            px2 = px.copy()
            px2[y, x] = ~px2[y, x]
            assert topology_equivalent(before, BinaryImage(px2))[0]


def test_seed_layout_dot():
    lab = label_components(pad_white_ring(img("....", ".#..", "....", "...."), F2))
    grid = seed_layout(lab, F2)
    black = np.asarray(lab.colors)[grid]
    assert black.sum() == 1


def test_seed_layout_ring_has_hole():
    im = pad_white_ring(img(
        "........", ".######.", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".######.", "........",
    ), F2)
    lab = label_components(im)
    grid = seed_layout(lab, F2)
    assert image_betti(BinaryImage(np.asarray(lab.colors)[grid])) == (1, 1)


def test_seed_layout_too_small():
    with pytest.raises(SeedLayoutError):
        dilation_downsample(img("#.#.", "....", "#.#.", "...."), F2)


def test_constant_images():
    out, comp, _ = dilation_downsample(BinaryImage.blank(8, 8), F2)
    assert out == BinaryImage.blank(4, 4)
    out, _, _ = dilation_downsample(BinaryImage.blank(8, 8, black=True), F2)
    assert out.shape == (4, 4)


def test_can_flip_refuses_merges():
    colors = np.array([False, True, True])
    comp = np.zeros((5, 7), dtype=int)
    comp[2, 2] = 1
    comp[2, 4] = 2
    # (3, 2) touches both black components
    assert not can_flip(comp, colors, 3, 2, 1)
    assert can_flip(comp, colors, 2, 1, 1)
    # border cells stay with the surrounding white
    assert not can_flip(comp, colors, 0, 2, 1)


def naive_dilation(img, factors, overlap_only=False):
    padded = pad_white_ring(img, factors)
    lab = label_components(padded)
    table = score_table(lab, factors, *default_coverage(factors))
    comp = seed_layout(lab, factors)
    colors = np.asarray(lab.colors)
    for phase in (True, False):
        active = [i for i in range(lab.n) if bool(colors[i]) == phase]
        while active:
            active = [t for t in active if dilate_once(comp, colors, t, table[t], overlap_only)]
    return crop_ring(BinaryImage(colors[comp]), Factors(1, 1)), comp[1:-1, 1:-1]


@pytest.mark.parametrize("overlap_only", [False, True])
@pytest.mark.parametrize("seed", range(4))
def test_grower_matches_naive(seed, overlap_only):
    im = synthetic_corpus(1, seed=seed, width=64, height=64)[0]
    for f in (Factors(4, 4), Factors(8, 8)):
        out, comp, _ = dilation_downsample(im, f, overlap_only=overlap_only)
        ref, ref_comp = naive_dilation(im, f, overlap_only)
        assert out == ref and (comp == ref_comp).all()


@pytest.mark.parametrize("seed", range(10))
def test_topology_kept(seed):
    im = synthetic_corpus(1, seed=100 + seed, width=64, height=64)[0]
    for f in (Factors(2, 2), Factors(4, 4), Factors(8, 4)):
        for overlap_only in (False, True):
            out, comp, stats = dilation_downsample(im, f, overlap_only=overlap_only)
            assert not stats.timed_out
            assert topology_equivalent(out, im)[0]
            # the component map itself witnesses the isomorphism
            lab = label_components(pad_white_ring(im, Factors(1, 1)))
            assert (lab.label_map[1:-1, 1:-1] == label_components(im, exterior=True).label_map).all()
            assert labeling_is_witness(lab, pad_white_ring(out, Factors(1, 1)), np.pad(comp, 1))
            assert image_betti(out) == image_betti(im)


def test_overlap_only_tracks_shapes_better():
    corpus = synthetic_corpus(4, seed=9, width=64, height=64)
    f = Factors(4, 4)
    loose = np.mean([iou_dice(im, dilation_downsample(im, f)[0])[0] for im in corpus])
    tight = np.mean([iou_dice(im, dilation_downsample(im, f, overlap_only=True)[0])[0] for im in corpus])
    assert tight > loose


def test_deterministic():
    im = synthetic_corpus(1, seed=4, width=64, height=64)[0]
    a = dilation_downsample(im, Factors(4, 4))
    b = dilation_downsample(im, Factors(4, 4))
    assert a[0] == b[0] and (a[1] == b[1]).all()
