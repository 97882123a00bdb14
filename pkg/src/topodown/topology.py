"""Component labeling, region adjacency graph, boundary loops and topology checks.

Black pixels connect through all 8 neighbours, white pixels only through the 4
edge neighbours. Everything outside the image is treated as white when it
matters (holes, boundary loops, equivalence), so white components touching the
border are never holes.

Boundary tracing works on the pixel lattice: vertex ``(vx, vy)`` is the corner
shared by pixels ``(vx-1..vx, vy-1..vy)``. A half-edge is a start vertex plus a
direction (N, E, S, W in image coordinates, y down). Loops keep the owning black
component on their left, so an outer loop runs counter-clockwise when the image
is drawn the usual way up (y axis pointing up) and a hole loop runs clockwise.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .raster import BinaryImage

N, E, S, W = 0, 1, 2, 3
DIRS = ((0, -1), (1, 0), (0, 1), (-1, 0))
DIR_NAMES = "NESW"

_EIGHT = np.ones((3, 3), dtype=bool)
_FOUR = ndimage.generate_binary_structure(2, 1)


def right_turn(d: int) -> int:
    return (d + 1) % 4


def left_turn(d: int) -> int:
    return (d + 3) % 4


def half_edge_faces(vx: int, vy: int, d: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """(left face, right face) pixel coordinates of the half-edge leaving
    ``(vx, vy)`` in direction ``d``."""
    if d == E:
        return (vx, vy - 1), (vx, vy)
    if d == W:
        return (vx - 1, vy), (vx - 1, vy - 1)
    if d == S:
        return (vx, vy), (vx - 1, vy)
    return (vx - 1, vy - 1), (vx, vy - 1)


# --------------------------------------------------------------------------- labeling


@dataclass
class ComponentLabeling:
    """Per-pixel component ids plus per-component attributes.

    Ids are dense and ordered by the first pixel of each component in scan order.
    ``parent[i]`` is the enclosing component (-1 for components touching the
    image border), so ``holes[i]`` counts components nested directly in ``i``.
    """

    label_map: np.ndarray
    colors: np.ndarray  # True for black
    sizes: np.ndarray
    parent: np.ndarray
    holes: np.ndarray
    touches_border: np.ndarray
    edges: frozenset = field(default_factory=frozenset)

    @property
    def n(self) -> int:
        return len(self.colors)

    @property
    def black_count(self) -> int:
        return int(self.colors.sum())

    @property
    def white_count(self) -> int:
        return int(self.n - self.colors.sum())

    @property
    def shape(self):
        return self.label_map.shape

    def components(self) -> list[tuple[int, str, int, int]]:
        return [
            (i, "black" if self.colors[i] else "white", int(self.sizes[i]), int(self.holes[i]))
            for i in range(self.n)
        ]

    def black_ids(self) -> list[int]:
        return [i for i in range(self.n) if self.colors[i]]

    def white_ids(self) -> list[int]:
        return [i for i in range(self.n) if not self.colors[i]]

    def exterior(self) -> int | None:
        """The white component containing the image border, if the border is all white."""
        lm = self.label_map
        border = np.concatenate([lm[0], lm[-1], lm[:, 0], lm[:, -1]])
        ids = np.unique(border)
        if len(ids) == 1 and not self.colors[ids[0]]:
            return int(ids[0])
        return None


def _adjacent_pairs(lm: np.ndarray) -> set[tuple[int, int]]:
    pairs = set()
    h, w = lm.shape
    views = [
        (lm[:, :-1], lm[:, 1:]),
        (lm[:-1, :], lm[1:, :]),
        (lm[:-1, :-1], lm[1:, 1:]),
        (lm[:-1, 1:], lm[1:, :-1]),
    ]
    for a, b in views:
        if a.size == 0:
            continue
        mask = a != b
        if not mask.any():
            continue
        stacked = np.stack([a[mask], b[mask]], axis=1)
        stacked.sort(axis=1)
        for u, v in np.unique(stacked, axis=0):
            pairs.add((int(u), int(v)))
    return pairs


def label_components(img: BinaryImage, exterior: bool = False) -> ComponentLabeling:
    """Label black components (8-connected) and white components (4-connected).

    With ``exterior=True`` the image is labeled as if surrounded by a white ring,
    so all border-touching white pixels form one component with id 0 (which may
    then have no pixels inside the image).
    """
    if exterior:
        padded = np.zeros((img.height + 2, img.width + 2), dtype=bool)
        padded[1:-1, 1:-1] = img.pixels
        lab = label_components(BinaryImage(padded))
        lab.label_map = lab.label_map[1:-1, 1:-1].copy()
        lab.sizes = np.bincount(lab.label_map.ravel(), minlength=lab.n)
        lab.touches_border = np.zeros(lab.n, dtype=bool)
        lab.touches_border[0] = True
        return lab

    px = img.pixels
    lb, nb = ndimage.label(px, structure=_EIGHT)
    lw, nw = ndimage.label(~px, structure=_FOUR)
    combined = np.where(px, lb, lw + nb)  # 1..nb black, nb+1..nb+nw white
    flat = combined.ravel()
    uniq, first = np.unique(flat, return_index=True)
    order = uniq[np.argsort(first, kind="stable")]
    remap = np.empty(nb + nw + 1, dtype=np.int32)
    remap[order] = np.arange(len(order), dtype=np.int32)
    lm = remap[combined]
    n = len(order)
    colors = order <= nb
    sizes = np.bincount(lm.ravel(), minlength=n)

    # diagonal white-white contact is not adjacency (white is 4-connected)
    edges = {(u, v) for u, v in _adjacent_pairs(lm) if colors[u] != colors[v]}
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)

    border_ids = np.unique(np.concatenate([lm[0], lm[-1], lm[:, 0], lm[:, -1]]))
    touches = np.zeros(n, dtype=bool)
    touches[border_ids] = True

    parent = np.full(n, -2, dtype=np.int64)
    queue = deque()
    for i in border_ids:
        parent[i] = -1
        queue.append(int(i))
    while queue:
        u = queue.popleft()
        for v in sorted(adj[u]):
            if parent[v] == -2:
                parent[v] = u
                queue.append(v)
    holes = np.zeros(n, dtype=np.int64)
    for i in range(n):
        if parent[i] >= 0:
            holes[parent[i]] += 1

    return ComponentLabeling(
        label_map=lm,
        colors=colors,
        sizes=sizes,
        parent=parent,
        holes=holes,
        touches_border=touches,
        edges=frozenset(edges),
    )


# --------------------------------------------------------------------------- RAG


@dataclass(frozen=True)
class Rag:
    colors: tuple  # per node, True for black
    edges: frozenset  # of (u, v) with u < v

    def neighbors(self, u: int) -> list[int]:
        return sorted({b for a, b in self.edges if a == u} | {a for a, b in self.edges if b == u})

    def is_color_bipartite(self) -> bool:
        return all(self.colors[u] != self.colors[v] for u, v in self.edges)


def build_rag(lab: ComponentLabeling) -> Rag:
    """Nodes are components; an edge joins two components whose pixels touch
    (8-neighbourhood contact)."""
    return Rag(colors=tuple(bool(c) for c in lab.colors), edges=lab.edges)


def betti_numbers(lab: ComponentLabeling) -> tuple[int, int]:
    """(number of black components, number of holes over all black components)."""
    b0 = lab.black_count
    b1 = int(sum(lab.holes[i] for i in range(lab.n) if lab.colors[i]))
    return b0, b1


def image_betti(img: BinaryImage) -> tuple[int, int]:
    return betti_numbers(label_components(img))


# --------------------------------------------------------------------------- boundaries


@dataclass
class Boundary:
    owner: int
    neighbor: int
    kind: str  # "outer" | "inner"
    half_edges: list  # (vx, vy, d), consecutive
    across: set  # component ids found across the loop; {neighbor} when the lemma holds

    @property
    def length(self) -> int:
        return len(self.half_edges)

    def vertices(self) -> list[tuple[int, int]]:
        return [(vx, vy) for vx, vy, _ in self.half_edges]

    def signed_area(self) -> float:
        """Shoelace area with y pointing up; positive for counter-clockwise loops."""
        vs = self.vertices()
        acc = 0
        for (x0, y0), (x1, y1) in zip(vs, vs[1:] + vs[:1]):
            acc += x0 * (-y1) - x1 * (-y0)
        return acc / 2.0

    def to_json(self) -> dict:
        return {
            "owner": self.owner,
            "neighbor": self.neighbor,
            "kind": self.kind,
            "vertices": [list(v) for v in self.vertices()],
        }


def _owner_half_edges(mask: np.ndarray) -> set:
    """Half-edges with ``mask`` on the left and not-``mask`` on the right."""
    h, w = mask.shape
    p = np.zeros((h + 2, w + 2), dtype=bool)
    p[1:-1, 1:-1] = mask
    out = set()
    # horizontal lattice edges: between padded rows r and r+1 -> vy = r
    up, down = p[:-1, 1:-1], p[1:, 1:-1]
    for vy, x in zip(*np.nonzero(up & ~down)):
        out.add((int(x), int(vy), E))
    for vy, x in zip(*np.nonzero(down & ~up)):
        out.add((int(x) + 1, int(vy), W))
    # vertical lattice edges: between padded cols c and c+1 -> vx = c
    left, right = p[1:-1, :-1], p[1:-1, 1:]
    for y, vx in zip(*np.nonzero(right & ~left)):
        out.add((int(vx), int(y), S))
    for y, vx in zip(*np.nonzero(left & ~right)):
        out.add((int(vx), int(y) + 1, N))
    return out


def next_half_edge(inside, vx: int, vy: int, d: int) -> tuple[int, int, int]:
    """Successor of half-edge ``(vx, vy, d)`` along a loop around the set
    ``inside(x, y) -> bool``. At a diagonal pinch the loop crosses over to the
    other inside pixel, which is what 8-connectivity of black demands."""
    dx, dy = DIRS[d]
    hx, hy = vx + dx, vy + dy
    fl, fr = half_edge_faces(hx, hy, d)
    if inside(*fr):
        nd = right_turn(d)
    elif inside(*fl):
        nd = d
    else:
        nd = left_turn(d)
    return hx, hy, nd


def trace_boundaries(lab: ComponentLabeling) -> list[Boundary]:
    """All boundary loops of all black components, ordered by owner id and then
    by first half-edge.

    Requires that no black pixel lies on the image border (unless the image has
    no white pixels at all, in which case there are no boundaries).
    """
    lm = lab.label_map
    h, w = lm.shape
    if lab.white_count == 0 or lab.black_count == 0:
        return []
    border = np.concatenate([lm[0], lm[-1], lm[:, 0], lm[:, -1]])
    if lab.colors[border].any():
        raise ValueError("black pixel on the image border; call pad_white_ring first")

    result = []
    for owner in lab.black_ids():
        mask = lm == owner

        def inside(x, y, mask=mask):
            return 0 <= x < w and 0 <= y < h and bool(mask[y, x])

        remaining = _owner_half_edges(mask)
        while remaining:
            start = min(remaining, key=lambda t: (t[1], t[0], t[2]))
            loop = []
            cur = start
            while True:
                loop.append(cur)
                remaining.discard(cur)
                cur = next_half_edge(inside, *cur)
                if cur == start:
                    break
                if cur not in remaining:
                    raise RuntimeError(f"boundary walk left the half-edge set at {cur}")
            across = set()
            for vx, vy, d in loop:
                _, (rx, ry) = half_edge_faces(vx, vy, d)
                across.add(int(lm[ry, rx]))
            b = Boundary(owner=owner, neighbor=-1, kind="outer", half_edges=loop, across=across)
            b.kind = "outer" if b.signed_area() > 0 else "inner"
            fx, fy = half_edge_faces(*loop[0])[1]
            b.neighbor = int(lm[fy, fx])
            result.append(b)
    return result


def boundaries_json(bounds: list[Boundary]) -> str:
    return json.dumps([b.to_json() for b in bounds])


# --------------------------------------------------------------------------- Euler


def mesh_counts(img: BinaryImage, component: int | None = None, lab: ComponentLabeling | None = None):
    """(V, E, F) of the quad mesh made of black pixels, after dropping white
    quads and dangling vertices/edges. Restricted to one black component when
    ``component`` is given."""
    if component is None:
        mask = img.pixels
    else:
        lab = lab or label_components(img)
        if not (0 <= component < lab.n) or not lab.colors[component]:
            raise ValueError(f"component {component} is not a black component")
        mask = lab.label_map == component
    h, w = mask.shape
    p = np.zeros((h + 2, w + 2), dtype=bool)
    p[1:-1, 1:-1] = mask
    verts = p[:-1, :-1] | p[:-1, 1:] | p[1:, :-1] | p[1:, 1:]
    hedges = p[:-1, 1:-1] | p[1:, 1:-1]
    vedges = p[1:-1, :-1] | p[1:-1, 1:]
    return int(verts.sum()), int(hedges.sum() + vedges.sum()), int(mask.sum())


def euler_characteristic(img: BinaryImage, component: int | None = None, lab=None) -> int:
    v, e, f = mesh_counts(img, component, lab)
    return v - e + f


# --------------------------------------------------------------------------- equivalence


def _rooted_tree(lab: ComponentLabeling):
    n = lab.n
    children: list[list[int]] = [[] for _ in range(n)]
    for u, v in lab.edges:
        children[u].append(v)
        children[v].append(u)
    if len(lab.edges) != n - 1:
        raise AssertionError("region adjacency graph is not a tree")
    root = 0  # exterior labeling puts the surrounding white at id 0
    parent = [-1] * n
    order = [root]
    seen = [False] * n
    seen[root] = True
    for u in order:
        kids = []
        for v in children[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                kids.append(v)
                order.append(v)
        children[u] = kids
    if len(order) != n:
        raise AssertionError("region adjacency graph is not connected")
    return root, children, order


def _canonical(lab: ComponentLabeling, table: dict) -> tuple[int, list[int], list[list[int]]]:
    root, children, order = _rooted_tree(lab)
    code = [0] * lab.n
    for u in reversed(order):
        key = (bool(lab.colors[u]), tuple(sorted(code[c] for c in children[u])))
        code[u] = table.setdefault(key, len(table))
    return root, code, children


def topology_equivalent(a: BinaryImage, b: BinaryImage):
    """Whether the colored region adjacency graphs of ``a`` and ``b`` are
    isomorphic, with the surrounding white region mapped onto itself.

    Returns ``(True, witness)`` where ``witness`` maps component ids of
    ``label_components(a, exterior=True)`` to those of ``b``, or ``(False, None)``.
    The RAG of a planar 8/4 image is a tree, so isomorphism reduces to comparing
    canonical rooted-tree codes and matching children with equal codes.
    """
    la = label_components(a, exterior=True)
    lb = label_components(b, exterior=True)
    if la.n != lb.n or la.black_count != lb.black_count:
        return False, None
    table: dict = {}
    ra, ca, ka = _canonical(la, table)
    rb, cb, kb = _canonical(lb, table)
    if ca[ra] != cb[rb]:
        return False, None
    witness = {}
    stack = [(ra, rb)]
    while stack:
        u, v = stack.pop()
        witness[u] = v
        pool: dict[int, list[int]] = {}
        for c in sorted(kb[v]):
            pool.setdefault(cb[c], []).append(c)
        for c in sorted(ka[u]):
            stack.append((c, pool[ca[c]].pop(0)))
    return True, witness


def labeling_is_witness(orig: ComponentLabeling, down: BinaryImage, comp_map: np.ndarray) -> bool:
    """Check that ``comp_map`` (original component id per big-pixel) is itself an
    isomorphism: every original component occupies exactly one component of
    ``down`` with matching color, and adjacency is identical.

    ``orig`` must be an exterior labeling (id 0 = surrounding white) or a labeling
    of an image whose border is all white.
    """
    dl = label_components(down, exterior=True)
    ext = 0 if orig.touches_border.sum() == 1 and orig.touches_border[0] else orig.exterior()
    if ext is None:
        return False
    mapping = {0: ext}
    for did in range(dl.n):
        cells = comp_map[dl.label_map == did]
        if did == 0 and cells.size == 0:
            continue
        ids = np.unique(cells)
        if len(ids) != 1:
            return False
        if did in mapping and mapping[did] != int(ids[0]):
            return False
        mapping[did] = int(ids[0])
    if len(set(mapping.values())) != len(mapping) or len(mapping) != orig.n:
        return False
    if any(bool(dl.colors[d]) != bool(orig.colors[o]) for d, o in mapping.items()):
        return False
    mapped = {tuple(sorted((mapping[u], mapping[v]))) for u, v in dl.edges}
    return mapped == set(orig.edges)
