"""Run an external solver executable on an LP file.

Protocol: ``<cmd> <model.lp> <solution.txt> <time_limit_seconds>``. The command
writes a solution file whose first non-blank line is one of ``optimal``,
``feasible``, ``infeasible`` or ``unknown``, followed by ``<name> <value>`` lines
for every variable when a point is reported. Lines starting with ``#`` are
ignored.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from pathlib import Path

from .lpformat import write_lp
from .model import LinearModel


class ExternalSolverError(RuntimeError):
    pass


def parse_solution(text: str, model: LinearModel):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ExternalSolverError("empty solution file")
    status = lines[0].lower()
    if status not in ("optimal", "feasible", "infeasible", "unknown"):
        raise ExternalSolverError(f"unknown status line {lines[0]!r}")
    values = {}
    for ln in lines[1:]:
        name, value = ln.split()
        values[name] = int(round(float(value)))
    x = None
    if status in ("optimal", "feasible"):
        missing = [n for n in model.names if n not in values]
        if missing:
            raise ExternalSolverError(f"solution misses {len(missing)} variables, e.g. {missing[0]}")
        x = [values[n] for n in model.names]
    return status, x


def solve_external(model: LinearModel, time_limit: float, command: str):
    with tempfile.TemporaryDirectory(prefix="topodown-") as tmp:
        lp = Path(tmp) / "model.lp"
        sol = Path(tmp) / "solution.txt"
        lp.write_text(write_lp(model))
        argv = shlex.split(command) + [str(lp), str(sol), f"{time_limit:g}"]
        try:
            subprocess.run(argv, check=True, timeout=time_limit + 30, capture_output=True)
        except (OSError, subprocess.SubprocessError) as exc:
            raise ExternalSolverError(f"external solver failed: {exc}") from exc
        if not sol.exists():
            raise ExternalSolverError("external solver wrote no solution file")
        status, x = parse_solution(sol.read_text(), model)
    if x is not None and not model.is_feasible(x):
        raise ExternalSolverError("external solver returned an infeasible point")
    obj = model.objective_value(x) if x is not None else None
    proven = status in ("optimal", "infeasible")
    return x, obj, proven, 0
