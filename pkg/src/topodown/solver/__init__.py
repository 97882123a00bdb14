"""Backend-agnostic integer program solving.

``solve`` picks a backend from its argument or the ``TOPODOWN_SOLVER``
environment variable: ``bnb`` (bundled branch-and-bound), ``highs`` (HiGHS via
scipy), ``auto`` (bnb for small models, HiGHS otherwise; the default) or
``external``, which runs the command in ``TOPODOWN_SOLVER_CMD``. Setting only
``TOPODOWN_SOLVER_CMD`` also selects the external backend.
"""

from __future__ import annotations

import enum
import os
import time
from dataclasses import dataclass

from .bnb import solve_bnb
from .external import ExternalSolverError, solve_external
from .highs import solve_highs
from .lpformat import read_lp, write_lp
from .model import LinearModel, Row

DEFAULT_TIME_LIMIT = 60.0
AUTO_BNB_MAX_VARS = 400


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    SUBOPTIMAL = "Suboptimal"
    INFEASIBLE = "Infeasible"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value

    @property
    def has_solution(self) -> bool:
        return self in (Status.OPTIMAL, Status.SUBOPTIMAL)


@dataclass
class SolverResult:
    status: Status
    assignment: list | None
    objective: int | None
    elapsed: float
    nodes_explored: int
    backend: str = ""


def _classify(x, proven: bool) -> Status:
    if x is not None:
        return Status.OPTIMAL if proven else Status.SUBOPTIMAL
    return Status.INFEASIBLE if proven else Status.UNKNOWN


def resolve_backend(backend: str | None, model: LinearModel) -> str:
    name = backend or os.environ.get("TOPODOWN_SOLVER") or ""
    if not name:
        name = "external" if os.environ.get("TOPODOWN_SOLVER_CMD") else "auto"
    name = name.lower()
    if name == "auto":
        return "bnb" if model.n_vars <= AUTO_BNB_MAX_VARS else "highs"
    if name not in ("bnb", "highs", "external"):
        raise ValueError(f"unknown solver backend {name!r}")
    return name


def export_model(model: LinearModel) -> str:
    """CPLEX LP text for ``model``, readable by most MILP solvers."""
    return write_lp(model)


def import_model(text: str) -> LinearModel:
    return read_lp(text)


def solve(model: LinearModel, time_limit: float = DEFAULT_TIME_LIMIT, backend: str | None = None) -> SolverResult:
    """Maximize ``model`` within ``time_limit`` seconds."""
    name = resolve_backend(backend, model)
    t0 = time.monotonic()
    if model.n_vars == 0:
        ok = not model.violated_rows([])
        return SolverResult(Status.OPTIMAL if ok else Status.INFEASIBLE, [] if ok else None, 0 if ok else None, 0.0, 0, name)
    if name == "bnb":
        x, obj, proven, nodes = solve_bnb(model, time_limit)
    elif name == "highs":
        x, obj, proven, nodes = solve_highs(model, time_limit)
    else:
        cmd = os.environ.get("TOPODOWN_SOLVER_CMD")
        if not cmd:
            raise ExternalSolverError("TOPODOWN_SOLVER_CMD is not set")
        x, obj, proven, nodes = solve_external(model, time_limit, cmd)
    elapsed = time.monotonic() - t0
    if x is not None and not model.is_feasible(x):
        raise RuntimeError(f"{name} backend returned a point violating the model")
    return SolverResult(_classify(x, proven), x, obj, elapsed, nodes, name)


__all__ = [
    "DEFAULT_TIME_LIMIT",
    "ExternalSolverError",
    "export_model",
    "import_model",
    "LinearModel",
    "Row",
    "SolverResult",
    "Status",
    "read_lp",
    "solve",
    "write_lp",
]
