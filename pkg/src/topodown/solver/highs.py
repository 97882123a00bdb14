"""HiGHS backend through ``scipy.optimize.milp``.

Presolve stays off: on small random integer programs the bundled HiGHS presolve
sometimes reports wrong optima or points violating equality rows, while the
plain branch-and-cut agrees with exhaustive enumeration.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_array

from .model import LinearModel


def solve_highs(model: LinearModel, time_limit: float):
    """Returns (assignment or None, objective or None, proven, nodes)."""
    n = model.n_vars
    c, (data, ri, ci), lo, hi = model.to_arrays()
    constraints = []
    if model.n_rows:
        A = csr_array((np.asarray(data, float), (ri, ci)), shape=(model.n_rows, n))
        constraints.append(LinearConstraint(A, lo, hi))
    res = milp(
        -c,
        constraints=constraints,
        integrality=np.ones(n),
        bounds=Bounds(np.asarray(model.lb, float), np.asarray(model.ub, float)),
        options={"time_limit": max(float(time_limit), 0.01), "disp": False, "presolve": False, "mip_rel_gap": 0.0},
    )
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    if res.x is None:
        return None, None, res.status == 2, nodes
    x = [int(round(v)) for v in res.x]
    if not model.is_feasible(x):
        return None, None, False, nodes
    return x, model.objective_value(x), res.status == 0, nodes
