"""Integer program for topology-preserving downsampling.

Each grid position ``(X, Y)`` of the downsampled image is assigned to exactly one
component of the original image. A component may only take positions whose
coverage window reaches one of its pixels. Pairwise rows stop distinct
components from merging or touching where they did not touch before, and corner
variables with distance labels force every original boundary to reappear as a
single closed loop. Together these make the downsampled region adjacency graph
identical to the original one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .raster import BinaryImage, Factors, crop_ring, pad_white_ring
from .solver import DEFAULT_TIME_LIMIT, LinearModel, SolverResult, Status, solve
from .topology import (
    DIRS,
    ComponentLabeling,
    half_edge_faces,
    label_components,
    labeling_is_witness,
    left_turn,
    right_turn,
    topology_equivalent,
    trace_boundaries,
)

STRAIGHT, LEFT, RIGHT = 0, 1, 2
TURN_NAMES = ("straight", "left", "right")


def default_coverage(factors: Factors) -> tuple[int, int]:
    return factors.a // 4, factors.b // 4


def coverage_window(grid_pos, factors: Factors, dx: int, dy: int, shape=None):
    """Inclusive pixel rectangle ``(x0, x1, y0, y1)`` that big-pixel ``grid_pos``
    may cover; clipped to ``shape`` = (height, width) when given, else at 0."""
    if dx < 0 or dy < 0:
        raise ValueError("coverage extension must be non-negative")
    X, Y = grid_pos
    a, b = factors.a, factors.b
    x0, x1 = X * a - dx, (X + 1) * a - 1 + dx
    y0, y1 = Y * b - dy, (Y + 1) * b - 1 + dy
    x0, y0 = max(x0, 0), max(y0, 0)
    if shape is not None:
        x1, y1 = min(x1, shape[1] - 1), min(y1, shape[0] - 1)
    return x0, x1, y0, y1


def config_dirs(config: int) -> tuple[int, int, int]:
    """(incoming direction, outgoing direction, turn) of corner config 0..11."""
    din, turn = divmod(config, 3)
    dout = din if turn == STRAIGHT else (left_turn(din) if turn == LEFT else right_turn(din))
    return din, dout, turn


def corner_faces(vertex, config: int):
    """(inside faces, outside faces, excluded face or None) around a grid vertex.

    Inside faces carry the owner, outside faces the neighbor. A left turn also
    needs its diagonal face to not be the owner; otherwise the boundary would
    pinch through that vertex and turn right instead.
    """
    vx, vy = vertex
    din, dout, turn = config_dirs(config)
    ddx, ddy = DIRS[din]
    in_l, in_r = half_edge_faces(vx - ddx, vy - ddy, din)
    out_l, out_r = half_edge_faces(vx, vy, dout)
    inside = tuple(dict.fromkeys((in_l, out_l)))
    outside = tuple(dict.fromkeys((in_r, out_r)))
    excluded = None
    if turn == LEFT:
        around = {(vx - 1, vy - 1), (vx, vy - 1), (vx - 1, vy), (vx, vy)}
        (excluded,) = around - set(inside) - set(outside)
    return inside, outside, excluded


@dataclass(frozen=True)
class BigPixelCandidate:
    component: int
    grid_pos: tuple
    var_id: int
    score: int


@dataclass(frozen=True)
class CornerCandidate:
    boundary: int
    vertex: tuple
    config: int
    inside_faces: tuple
    outside_faces: tuple
    excluded_face: tuple | None
    corner_var: int = -1
    dist_var: int = -1
    last_var: int = -1

    @property
    def incoming(self) -> int:
        return config_dirs(self.config)[0]

    @property
    def outgoing(self) -> int:
        return config_dirs(self.config)[1]

    @property
    def turn(self) -> int:
        return config_dirs(self.config)[2]

    @property
    def target(self) -> tuple:
        dx, dy = DIRS[self.outgoing]
        return self.vertex[0] + dx, self.vertex[1] + dy


@dataclass
class DownsampleModel(LinearModel):
    labeling: ComponentLabeling | None = None
    factors: Factors | None = None
    dx: int = 0
    dy: int = 0
    grid: tuple = (0, 0)  # (width, height) in big-pixels
    candidates: list = field(default_factory=list)
    corners: list = field(default_factory=list)
    boundaries: list = field(default_factory=list)
    big: list = field(default_factory=list)
    cand_var: dict = field(default_factory=dict)  # (component, X, Y) -> var
    infeasible_reason: str | None = None

    def summary(self) -> dict:
        fams: dict[str, int] = {}
        for r in self.rows:
            fams[r.family] = fams.get(r.family, 0) + 1
        return {
            "variables": self.n_vars,
            "rows": self.n_rows,
            "candidates": len(self.candidates),
            "corners": len(self.corners),
            "boundaries": len(self.boundaries),
            "rows_by_family": fams,
        }


# --------------------------------------------------------------------------- scores


def _overlap_matrix(size: int, block: int, ext: int) -> np.ndarray:
    """M[p, J] = |[p-ext, p+ext] ∩ block J| for pixel index p."""
    n_blocks = size // block
    p = np.arange(size)[:, None]
    start = np.arange(n_blocks)[None, :] * block
    lo = np.maximum(p - ext, start)
    hi = np.minimum(p + ext, start + block - 1)
    return np.clip(hi - lo + 1, 0, None)


def score_table(lab: ComponentLabeling, factors: Factors, dx: int, dy: int) -> np.ndarray:
    """S[i, Y, X]: summed overlap between each pixel's (2dx+1)x(2dy+1) window and
    block (X, Y), over the pixels of component i."""
    h, w = lab.shape
    ox = _overlap_matrix(w, factors.a, dx)  # (W, GW)
    oy = _overlap_matrix(h, factors.b, dy)  # (H, GH)
    onehot = np.zeros((lab.n, h, w), dtype=np.int64)
    onehot[lab.label_map, np.arange(h)[:, None], np.arange(w)[None, :]] = 1
    # S_i = oy^T M_i ox
    return np.einsum("yY,iyx,xX->iYX", oy, onehot, ox, optimize=True)


def compute_scores(lab: ComponentLabeling, candidates, factors: Factors, dx: int, dy: int) -> list[int]:
    table = score_table(lab, factors, dx, dy)
    return [int(table[c.component, c.grid_pos[1], c.grid_pos[0]]) for c in candidates]


def enumerate_candidates(lab: ComponentLabeling, factors: Factors, dx: int, dy: int) -> list[BigPixelCandidate]:
    """One candidate per (component, grid position) whose coverage window meets
    the component, ordered by component then scan order."""
    h, w = lab.shape
    if w % factors.a or h % factors.b:
        raise ValueError(f"image {w}x{h} is not divisible by factors {factors}")
    table = score_table(lab, factors, dx, dy)
    out = []
    for i, Y, X in zip(*np.nonzero(table > 0)):
        out.append(BigPixelCandidate(int(i), (int(X), int(Y)), len(out), int(table[i, Y, X])))
    return out


# --------------------------------------------------------------------------- corners


def enumerate_corner_candidates(boundary_id: int, boundary, positions: dict, grid) -> list[CornerCandidate]:
    """Corner candidates at inner grid vertices for one boundary.

    ``positions`` maps component id to the set of grid positions where it has a
    candidate.
    """
    gw, gh = grid
    own = positions.get(boundary.owner, set())
    nbr = positions.get(boundary.neighbor, set())
    if not own or not nbr:
        return []
    out = []
    for vy in range(1, gh):
        for vx in range(1, gw):
            around = ((vx - 1, vy - 1), (vx, vy - 1), (vx - 1, vy), (vx, vy))
            if not any(f in own for f in around) or not any(f in nbr for f in around):
                continue
            for config in range(12):
                inside, outside, excluded = corner_faces((vx, vy), config)
                if all(f in own for f in inside) and all(f in nbr for f in outside):
                    out.append(CornerCandidate(boundary_id, (vx, vy), config, inside, outside, excluded))
    return out


# --------------------------------------------------------------------------- model


def _grid_neighbors(X, Y, gw, gh, diagonal):
    # forward half of the neighbourhood so each unordered pair is seen once
    steps = ((1, 0), (0, 1), (1, 1), (-1, 1)) if diagonal else ((1, 0), (0, 1))
    for sx, sy in steps:
        nx, ny = X + sx, Y + sy
        if 0 <= nx < gw and 0 <= ny < gh:
            yield nx, ny


def build_model(
    lab: ComponentLabeling,
    factors: Factors,
    dx: int | None = None,
    dy: int | None = None,
    forbid_new_adjacency: bool = True,
) -> DownsampleModel:
    """Build the integer program for ``lab`` (a labeling of the image to shrink).

    When the image has both colors its border must be white; the outermost
    ring of grid positions is then reserved for the surrounding white
    component so that boundary loops never leave the inner vertices.
    """
    ddx, ddy = default_coverage(factors)
    dx = ddx if dx is None else int(dx)
    dy = ddy if dy is None else int(dy)
    if dx < 0 or dy < 0:
        raise ValueError("coverage extension must be non-negative")
    h, w = lab.shape
    if w % factors.a or h % factors.b:
        raise ValueError(f"image {w}x{h} is not divisible by factors {factors}")
    gw, gh = w // factors.a, h // factors.b
    m = DownsampleModel(labeling=lab, factors=factors, dx=dx, dy=dy, grid=(gw, gh))

    two_colors = lab.black_count > 0 and lab.white_count > 0
    exterior = lab.exterior()
    if two_colors and exterior is None:
        raise ValueError("black pixel on the image border; call pad_white_ring first")
    boundaries = trace_boundaries(lab) if two_colors else []

    # candidate variables
    for cand in enumerate_candidates(lab, factors, dx, dy):
        X, Y = cand.grid_pos
        on_rim = X in (0, gw - 1) or Y in (0, gh - 1)
        if two_colors and on_rim and cand.component != exterior:
            continue
        var = m.add_var(f"P_c{cand.component}_x{X}_y{Y}", 0, 1, cand.score)
        m.candidates.append(BigPixelCandidate(cand.component, cand.grid_pos, var, cand.score))
        m.cand_var[(cand.component, X, Y)] = var

    at_pos: dict[tuple, list] = {}
    positions: dict[int, set] = {}
    for c in m.candidates:
        at_pos.setdefault(c.grid_pos, []).append(c)
        positions.setdefault(c.component, set()).add(c.grid_pos)

    # (1) exact coverage
    for Y in range(gh):
        for X in range(gw):
            cands = at_pos.get((X, Y), [])
            if not cands and m.infeasible_reason is None:
                m.infeasible_reason = f"grid position ({X}, {Y}) has no covering candidate"
            m.add_row([c.var_id for c in cands], [1] * len(cands), "=", 1, f"cover_x{X}_y{Y}", "coverage")

    # (2) every component survives
    for i in range(lab.n):
        vars_i = [m.cand_var[(i, X, Y)] for X, Y in sorted(positions.get(i, ()), key=lambda p: (p[1], p[0]))]
        if not vars_i and m.infeasible_reason is None:
            m.infeasible_reason = f"component {i} has no candidate position"
        m.add_row(vars_i, [1] * len(vars_i), ">=", 1, f"keep_c{i}", "nonempty")

    # (3) no merging of same-colored components; optionally no new contacts
    colors = lab.colors
    rag = set(lab.edges)
    for Y in range(gh):
        for X in range(gw):
            here = at_pos.get((X, Y), [])
            if not here:
                continue
            for diagonal in (False, True):
                for nx, ny in _grid_neighbors(X, Y, gw, gh, True):
                    is_diag = nx != X and ny != Y
                    if is_diag != diagonal:
                        continue
                    for p in here:
                        for q in at_pos.get((nx, ny), []):
                            if p.component == q.component:
                                continue
                            cp, cq = colors[p.component], colors[q.component]
                            if cp and cq:
                                fam = "incompatible"
                            elif not cp and not cq and not is_diag:
                                fam = "incompatible"
                            elif cp != cq and not is_diag and forbid_new_adjacency:
                                key = (min(p.component, q.component), max(p.component, q.component))
                                if key in rag:
                                    continue
                                fam = "adjacency"
                            else:
                                continue
                            m.add_row(
                                [p.var_id, q.var_id], [1, 1], "<=", 1,
                                f"pair_c{p.component}_x{X}_y{Y}_c{q.component}_x{nx}_y{ny}", fam,
                            )

    # (4) one closed loop per original boundary
    for b_id, bd in enumerate(boundaries):
        corners = enumerate_corner_candidates(b_id, bd, positions, (gw, gh))
        big = max(bd.length, len(corners))
        m.boundaries.append(bd)
        m.big.append(big)
        placed = []
        for k in corners:
            vx, vy = k.vertex
            tag = f"b{b_id}_v{vx}_{vy}_k{k.config}"
            cv = m.add_var(f"C_{tag}", 0, 1)
            dv = m.add_var(f"D_{tag}", 0, big)
            lv = m.add_var(f"L_{tag}", 0, 1, guard=cv)
            placed.append(
                CornerCandidate(b_id, k.vertex, k.config, k.inside_faces, k.outside_faces, k.excluded_face, cv, dv, lv)
            )
        by_in: dict[tuple, list] = {}
        for k in placed:
            by_in.setdefault((k.vertex, k.incoming), []).append(k)
        for k in placed:
            vx, vy = k.vertex
            tag = f"b{b_id}_v{vx}_{vy}_k{k.config}"
            pos_lits = [m.cand_var[(bd.owner, *f)] for f in k.inside_faces]
            pos_lits += [m.cand_var[(bd.neighbor, *f)] for f in k.outside_faces]
            neg_lits = []
            if k.excluded_face is not None and (bd.owner, *k.excluded_face) in m.cand_var:
                neg_lits.append(m.cand_var[(bd.owner, *k.excluded_face)])
            n_lit = len(pos_lits) + len(neg_lits)
            cols = pos_lits + neg_lits + [k.corner_var]
            coefs = [1] * len(pos_lits) + [-1] * len(neg_lits) + [-n_lit]
            # Corner = AND(literals), linearized as 0 <= sum(lits) - N*Corner <= N-1
            m.add_row(cols, coefs, ">=", -len(neg_lits), f"cand_lo_{tag}", "corner")
            m.add_row(cols, coefs, "<=", n_lit - 1 - len(neg_lits), f"cand_hi_{tag}", "corner")
            succ = by_in.get((k.target, k.outgoing), [])
            m.add_row(
                [k.corner_var, k.dist_var] + [s.dist_var for s in succ] + [k.last_var],
                [1, 1] + [-1] * len(succ) + [-big],
                "<=", 0, f"order_{tag}", "order",
            )
            m.add_row([k.dist_var, k.corner_var], [1, -big], "<=", 0, f"dist_{tag}", "dist")
        m.add_row([k.last_var for k in placed], [1] * len(placed), "=", 1, f"last_b{b_id}", "last")
        if not placed and m.infeasible_reason is None:
            m.infeasible_reason = f"boundary {b_id} has no corner candidates"
        m.corners.extend(placed)
    return m


def assemble_image(model: DownsampleModel, assignment) -> tuple[BinaryImage, np.ndarray]:
    """Color every grid position by its active candidate; returns the image and
    the per-big-pixel component map."""
    gw, gh = model.grid
    comp = np.full((gh, gw), -1, dtype=np.int64)
    for c in model.candidates:
        if int(assignment[c.var_id]) == 1:
            X, Y = c.grid_pos
            if comp[Y, X] != -1:
                raise ValueError(f"grid position {c.grid_pos} covered twice")
            comp[Y, X] = c.component
    if (comp < 0).any():
        Y, X = np.argwhere(comp < 0)[0]
        raise ValueError(f"grid position ({X}, {Y}) not covered")
    colors = np.asarray(model.labeling.colors)
    return BinaryImage(colors[comp]), comp


# --------------------------------------------------------------------------- pipeline


@dataclass
class DownsampleResult:
    status: Status
    image: BinaryImage | None
    component_map: np.ndarray | None
    objective: int | None
    elapsed: float
    nodes_explored: int
    labeling: ComponentLabeling
    model_summary: dict
    message: str = ""
    solver: SolverResult | None = None


def ip_downsample(
    img: BinaryImage,
    factors: Factors,
    dx: int | None = None,
    dy: int | None = None,
    time_limit: float = DEFAULT_TIME_LIMIT,
    backend: str | None = None,
    pad: bool = True,
) -> DownsampleResult:
    """Downsample ``img`` by ``factors`` keeping its region adjacency graph.

    With ``pad`` (the default) the image is surrounded by one white big-pixel
    before solving and the ring is cropped off again afterwards, so black
    pixels on the input border are fine. ``component_map`` ids refer to
    ``label_components`` of the image that was actually modelled (padded or not);
    for a padded run they equal ``label_components(img, exterior=True)`` ids.
    """
    img.check_divisible(factors)
    t0 = time.monotonic()
    work = pad_white_ring(img, factors) if pad else img
    lab = label_components(work)
    model = build_model(lab, factors, dx, dy)
    summary = model.summary()
    if model.infeasible_reason is not None:
        return DownsampleResult(
            Status.INFEASIBLE, None, None, None, time.monotonic() - t0, 0, lab, summary, model.infeasible_reason
        )
    remaining = max(time_limit - (time.monotonic() - t0), 0.01)
    res = solve(model, remaining, backend)
    if not res.status.has_solution:
        msg = "no topology-preserving image exists" if res.status == Status.INFEASIBLE else "time limit reached"
        return DownsampleResult(res.status, None, None, None, time.monotonic() - t0, res.nodes_explored, lab, summary, msg, res)
    out, comp = assemble_image(model, res.assignment)
    if pad:
        out = crop_ring(out, Factors(1, 1))
        comp = comp[1:-1, 1:-1]
    ok, _ = topology_equivalent(out, img)
    if not ok:
        raise RuntimeError("solver output changed the topology; model construction bug")
    return DownsampleResult(
        res.status, out, comp, res.objective, time.monotonic() - t0, res.nodes_explored, lab, summary, "", res
    )


def witness_check(result: DownsampleResult, pad: bool = True) -> bool:
    """Re-check that the component map itself is a RAG isomorphism."""
    if result.image is None:
        return False
    img, comp = result.image, result.component_map
    if pad:
        img = pad_white_ring(img, Factors(1, 1))
        ext = result.labeling.exterior()
        comp = np.pad(comp, 1, constant_values=ext)
    return labeling_is_witness(result.labeling, img, comp)
