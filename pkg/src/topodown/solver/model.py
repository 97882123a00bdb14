"""Minimal integer linear program container shared by all backends.

Every variable is integer with finite bounds. Rows are ``sum(coef * x) <sense> rhs``
with sense one of ``"<="``, ``">="``, ``"="``. The objective is always maximized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SENSES = ("<=", ">=", "=")


@dataclass
class Row:
    cols: tuple
    coefs: tuple
    sense: str
    rhs: int
    name: str = ""
    family: str = ""


@dataclass
class LinearModel:
    names: list = field(default_factory=list)
    lb: list = field(default_factory=list)
    ub: list = field(default_factory=list)
    obj: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    # branch-and-bound hints: variables with a guard are branched on after the
    # guard variable is fixed, preferring those whose guard took value 1
    guard: list = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_var(self, name: str, lb: int = 0, ub: int = 1, obj: int = 0, guard: int = -1) -> int:
        if lb > ub:
            raise ValueError(f"empty domain for {name}")
        self.names.append(name)
        self.lb.append(int(lb))
        self.ub.append(int(ub))
        self.obj.append(int(obj))
        self.guard.append(guard)
        return len(self.names) - 1

    def add_row(self, cols, coefs, sense: str, rhs: int, name: str = "", family: str = "") -> int:
        if sense not in SENSES:
            raise ValueError(f"bad sense {sense!r}")
        merged: dict[int, int] = {}
        for c, a in zip(cols, coefs):
            merged[int(c)] = merged.get(int(c), 0) + int(a)
        items = sorted((c, a) for c, a in merged.items() if a != 0)
        self.rows.append(
            Row(
                cols=tuple(c for c, _ in items),
                coefs=tuple(a for _, a in items),
                sense=sense,
                rhs=int(rhs),
                name=name or f"r{len(self.rows)}",
                family=family,
            )
        )
        return len(self.rows) - 1

    def is_binary(self, j: int) -> bool:
        return self.lb[j] >= 0 and self.ub[j] <= 1

    def objective_value(self, x) -> int:
        return int(sum(c * int(x[j]) for j, c in enumerate(self.obj) if c))

    def violated_rows(self, x) -> list[int]:
        bad = []
        for r, row in enumerate(self.rows):
            act = sum(a * int(x[c]) for c, a in zip(row.cols, row.coefs))
            if (
                (row.sense == "<=" and act > row.rhs)
                or (row.sense == ">=" and act < row.rhs)
                or (row.sense == "=" and act != row.rhs)
            ):
                bad.append(r)
        return bad

    def is_feasible(self, x) -> bool:
        if len(x) != self.n_vars:
            return False
        for j in range(self.n_vars):
            if not (self.lb[j] <= int(x[j]) <= self.ub[j]):
                return False
        return not self.violated_rows(x)

    def copy_without(self, families) -> "LinearModel":
        """Same variables, rows of the given families dropped."""
        families = set(families)
        out = LinearModel(
            names=list(self.names),
            lb=list(self.lb),
            ub=list(self.ub),
            obj=list(self.obj),
            rows=[r for r in self.rows if r.family not in families],
            guard=list(self.guard),
        )
        return out

    def with_fixed(self, values: dict) -> "LinearModel":
        """Copy with some variables fixed to the given values (by index)."""
        out = self.copy_without(())
        for j, v in values.items():
            out.lb[j] = out.ub[j] = int(v)
        return out

    def to_arrays(self):
        """(c, A as dense-free COO triplets, row lo, row hi) for matrix backends."""
        data, ri, ci = [], [], []
        lo = np.empty(self.n_rows)
        hi = np.empty(self.n_rows)
        for r, row in enumerate(self.rows):
            data.extend(row.coefs)
            ri.extend([r] * len(row.cols))
            ci.extend(row.cols)
            lo[r] = row.rhs if row.sense in (">=", "=") else -np.inf
            hi[r] = row.rhs if row.sense in ("<=", "=") else np.inf
        return np.asarray(self.obj, dtype=float), (data, ri, ci), lo, hi
