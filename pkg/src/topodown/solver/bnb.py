"""Bundled depth-first branch-and-bound for small integer programs.

Bound propagation runs over every row using incremental min/max activities,
with a trail so that backtracking restores bounds exactly. The objective bound
treats each all-ones ``<= 1`` / ``= 1`` row over binaries as a packing group that
can contribute at most its best remaining coefficient.
"""

from __future__ import annotations

import math
import time

from .model import LinearModel

INF = math.inf


class _Timeout(Exception):
    pass


class BranchAndBound:
    def __init__(self, model: LinearModel, time_limit: float):
        self.m = model
        self.deadline = time.monotonic() + time_limit
        n = model.n_vars
        self.lb = list(model.lb)
        self.ub = list(model.ub)
        self.var_rows: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.lo, self.hi, self.span = [], [], []
        self.minact, self.maxact = [], []
        for r, row in enumerate(model.rows):
            self.lo.append(row.rhs if row.sense in (">=", "=") else -INF)
            self.hi.append(row.rhs if row.sense in ("<=", "=") else INF)
            mn = mx = 0
            span = 0
            for c, a in zip(row.cols, row.coefs):
                self.var_rows[c].append((r, a))
                if a > 0:
                    mn += a * self.lb[c]
                    mx += a * self.ub[c]
                else:
                    mn += a * self.ub[c]
                    mx += a * self.lb[c]
                span = max(span, abs(a) * (self.ub[c] - self.lb[c]))
            self.minact.append(mn)
            self.maxact.append(mx)
            self.span.append(span)
        self.trail: list[tuple[int, int, int]] = []
        self.queue: list[int] = []
        self.queued = [False] * model.n_rows
        self.nodes = 0
        self._ticks = 0

        # packing groups for the objective bound
        obj = model.obj
        self.group_of = [-1] * n
        self.groups: list[list[int]] = []
        for row in model.rows:
            if (
                row.sense in ("<=", "=")
                and row.rhs == 1
                and all(a == 1 for a in row.coefs)
                and all(model.is_binary(c) for c in row.cols)
            ):
                members = [c for c in row.cols if obj[c] > 0 and self.group_of[c] < 0]
                if members:
                    for c in members:
                        self.group_of[c] = len(self.groups)
                    self.groups.append(members)
        self.loose = [j for j in range(n) if obj[j] > 0 and self.group_of[j] < 0]

        # static branching order
        pos = sorted((j for j in range(n) if obj[j] > 0 and model.is_binary(j)), key=lambda j: (-obj[j], j))
        seen = set(pos)
        plain = [j for j in range(n) if j not in seen and model.is_binary(j) and model.guard[j] < 0]
        self.order = pos + plain
        self.guarded = [j for j in range(n) if j not in seen and model.is_binary(j) and model.guard[j] >= 0]
        self.ints = sorted((j for j in range(n) if not model.is_binary(j)), key=lambda j: (-abs(obj[j]), j))

        self.best_obj: int | None = None
        self.best_x: list[int] | None = None
        self.timed_out = False

    # ------------------------------------------------------------------ bounds

    def _set(self, j: int, nl: int, nu: int) -> bool:
        ol, ou = self.lb[j], self.ub[j]
        if nl == ol and nu == ou:
            return True
        if nl > nu:
            return False
        self.trail.append((j, ol, ou))
        self.lb[j], self.ub[j] = nl, nu
        dl, du = nl - ol, nu - ou
        for r, a in self.var_rows[j]:
            if a > 0:
                self.minact[r] += a * dl
                self.maxact[r] += a * du
            else:
                self.minact[r] += a * du
                self.maxact[r] += a * dl
            if not self.queued[r]:
                self.queued[r] = True
                self.queue.append(r)
        return True

    def _undo(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            j, ol, ou = trail.pop()
            nl, nu = self.lb[j], self.ub[j]
            dl, du = ol - nl, ou - nu
            for r, a in self.var_rows[j]:
                if a > 0:
                    self.minact[r] += a * dl
                    self.maxact[r] += a * du
                else:
                    self.minact[r] += a * du
                    self.maxact[r] += a * dl
            self.lb[j], self.ub[j] = ol, ou

    def _clear_queue(self) -> None:
        for r in self.queue:
            self.queued[r] = False
        self.queue.clear()

    def _propagate(self) -> bool:
        rows = self.m.rows
        queue = self.queue
        while queue:
            r = queue.pop()
            self.queued[r] = False
            self._ticks += 1
            if self._ticks & 4095 == 0 and time.monotonic() > self.deadline:
                raise _Timeout
            lo, hi = self.lo[r], self.hi[r]
            mn, mx = self.minact[r], self.maxact[r]
            if mn > hi or mx < lo:
                self._clear_queue()
                return False
            up_slack = hi - mn
            down_slack = mx - lo
            span = self.span[r]
            if up_slack >= span and down_slack >= span:
                continue
            row = rows[r]
            for c, a in zip(row.cols, row.coefs):
                l, u = self.lb[c], self.ub[c]
                if l == u:
                    continue
                nl, nu = l, u
                if a > 0:
                    if up_slack < INF:
                        nu = min(nu, l + int(up_slack // a))
                    if down_slack < INF:
                        nl = max(nl, u - int(down_slack // a))
                else:
                    b = -a
                    if up_slack < INF:
                        nl = max(nl, u - int(up_slack // b))
                    if down_slack < INF:
                        nu = min(nu, l + int(down_slack // b))
                if nl != l or nu != u:
                    if not self._set(c, nl, nu):
                        self._clear_queue()
                        return False
                    # activities changed; refresh slacks for the rest of the row
                    mn, mx = self.minact[r], self.maxact[r]
                    if mn > hi or mx < lo:
                        self._clear_queue()
                        return False
                    up_slack = hi - mn
                    down_slack = mx - lo
        return True

    # ------------------------------------------------------------------ search

    def _bound(self) -> float:
        obj, lb, ub = self.m.obj, self.lb, self.ub
        total = 0
        # fixed part; a negative coefficient is maximized at the lower bound too
        for j, c in enumerate(obj):
            if c:
                total += c * lb[j]
        for members in self.groups:
            best = 0
            for j in members:
                if lb[j] == 1:
                    best = 0
                    break
                if ub[j] == 1 and obj[j] > best:
                    best = obj[j]
            total += best
        for j in self.loose:
            total += obj[j] * (ub[j] - lb[j])
        return total

    def _pick(self):
        lb, ub = self.lb, self.ub
        for j in self.order:
            if lb[j] != ub[j]:
                return j
        fallback = -1
        for j in self.guarded:
            if lb[j] != ub[j]:
                g = self.m.guard[j]
                if lb[g] == 1:
                    return j
                if fallback < 0:
                    fallback = j
        if fallback >= 0:
            return fallback
        return None

    def _try_leaf(self) -> bool:
        """All binaries fixed. Return True if the lower-bound point is feasible
        (and record it); False if integer branching is still needed."""
        obj = self.m.obj
        if any(obj[j] and self.lb[j] != self.ub[j] for j in self.ints):
            return False
        x = list(self.lb)
        if self.m.violated_rows(x):
            return False
        val = self.m.objective_value(x)
        if self.best_obj is None or val > self.best_obj:
            self.best_obj, self.best_x = val, x
        return True

    def _alternatives(self, j: int):
        l, u = self.lb[j], self.ub[j]
        if self.m.is_binary(j):
            return [(j, 1, 1), (j, 0, 0)]
        if self.m.obj[j] > 0:
            return [(j, u, u), (j, l, u - 1)]
        return [(j, l, l), (j, l + 1, u)]

    def _enter(self, alt) -> bool:
        j, nl, nu = alt
        if not self._set(j, nl, nu):
            return False
        return self._propagate()

    def run(self):
        for r in range(self.m.n_rows):
            self.queued[r] = True
            self.queue.append(r)
        try:
            if not self._propagate():
                return
            stack: list[tuple[int, list]] = []
            at_node = True
            while True:
                if at_node:
                    self.nodes += 1
                    if self.nodes & 255 == 0 and time.monotonic() > self.deadline:
                        raise _Timeout
                    descend = None
                    if self.best_obj is None or self._bound() > self.best_obj:
                        j = self._pick()
                        if j is None:
                            if not self._try_leaf():
                                j = next((i for i in self.ints if self.lb[i] != self.ub[i]), None)
                        if j is not None:
                            descend = self._alternatives(j)
                    if descend is not None:
                        mark = len(self.trail)
                        stack.append((mark, descend[1:]))
                        if self._enter(descend[0]):
                            continue
                at_node = False
                # backtrack
                while stack:
                    mark, alts = stack[-1]
                    self._undo(mark)
                    if not alts:
                        stack.pop()
                        continue
                    alt = alts.pop(0)
                    if self._enter(alt):
                        at_node = True
                        break
                if not at_node:
                    return
        except _Timeout:
            self.timed_out = True
            self._clear_queue()


def solve_bnb(model: LinearModel, time_limit: float):
    """Returns (best assignment or None, objective or None, proven, nodes)."""
    bb = BranchAndBound(model, time_limit)
    bb.run()
    return bb.best_x, bb.best_obj, not bb.timed_out, bb.nodes
