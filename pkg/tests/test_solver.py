import itertools
import os
import stat
import sys

import numpy as np
import pytest

from topodown.apps.synthetic import synthetic_corpus
from topodown.ipmodel import build_model
from topodown.raster import BinaryImage, Factors, pad_white_ring
from topodown.solver import (
    LinearModel, Status, export_model, import_model, solve,
)
from topodown.solver.external import ExternalSolverError, parse_solution
from topodown.topology import label_components


def tiny(rows, obj, n, ub=1):
    m = LinearModel()
    for j in range(n):
        m.add_var(f"x{j}", 0, ub, obj[j])
    for cols, coefs, sense, rhs in rows:
        m.add_row(cols, coefs, sense, rhs)
    return m


def enumerate_best(m):
    best = None
    for x in itertools.product(*(range(m.lb[j], m.ub[j] + 1) for j in range(m.n_vars))):
        if m.is_feasible(list(x)):
            v = m.objective_value(list(x))
            best = v if best is None else max(best, v)
    return best


@pytest.mark.parametrize("backend", ["bnb", "highs"])
def test_pick_one(backend):
    r = solve(tiny([((0, 1), (1, 1), "<=", 1)], [1, 1], 2), backend=backend)
    assert r.status == Status.OPTIMAL and r.objective == 1 and sum(r.assignment) == 1


@pytest.mark.parametrize("backend", ["bnb", "highs"])
def test_contradiction(backend):
    r = solve(tiny([((0,), (1,), ">=", 1), ((0,), (1,), "<=", 0)], [0], 1), backend=backend)
    assert r.status == Status.INFEASIBLE and r.assignment is None


def test_empty_model():
    r = solve(LinearModel())
    assert r.status == Status.OPTIMAL and r.objective == 0


@pytest.mark.parametrize("seed", range(40))
@pytest.mark.parametrize("backend", ["bnb", "highs"])
def test_random_programs_match_enumeration(seed, backend):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    ub = [1] * n
    if seed % 3 == 0:
        ub[-1] = 3
    m = LinearModel()
    for j in range(n):
        m.add_var(f"v{j}", 0, ub[j], int(rng.integers(-3, 6)))
    for _ in range(int(rng.integers(1, 5))):
        k = int(rng.integers(1, n + 1))
        cols = tuple(sorted(rng.choice(n, k, replace=False).tolist()))
        coefs = tuple(int(c) for c in rng.integers(-3, 4, k))
        m.add_row(cols, coefs, ["<=", ">=", "="][int(rng.integers(3))], int(rng.integers(-2, 4)))
    best = enumerate_best(m)
    r = solve(m, backend=backend)
    if best is None:
        assert r.status == Status.INFEASIBLE
    else:
        assert r.status == Status.OPTIMAL and r.objective == best
        assert m.is_feasible(r.assignment)


def all_black_model():
    return build_model(label_components(BinaryImage.blank(4, 4, black=True)), Factors(2, 2), 0, 0)


def test_export_all_black_has_five_rows():
    text = export_model(all_black_model())
    back = import_model(text)
    assert back.n_rows == 5
    assert "Maximize" in text or "maximize" in text.lower()


def test_round_trip_keeps_rows():
    img = pad_white_ring(synthetic_corpus(1, seed=3, width=64, height=64)[0], Factors(8, 8))
    m = build_model(label_components(img), Factors(8, 8))
    back = import_model(export_model(m))
    # variables may come back in a different order; compare by name
    assert sorted(back.names) == sorted(m.names)
    info = lambda mm: {n: (mm.lb[j], mm.ub[j], mm.obj[j]) for j, n in enumerate(mm.names)}
    assert info(back) == info(m)

    def rows(mm):
        return sorted(
            (tuple(sorted((mm.names[c], a) for c, a in zip(r.cols, r.coefs))), r.sense, r.rhs) for r in mm.rows
        )

    assert rows(back) == rows(m)


@pytest.mark.parametrize("seed", range(10))
def test_round_trip_same_solution(seed):
    rng = np.random.default_rng(seed)
    img = pad_white_ring(BinaryImage(rng.random((6, 6)) < 0.35), Factors(2, 2))
    m = build_model(label_components(img), Factors(2, 2), 0, 0)
    a, b = solve(m, backend="bnb"), solve(import_model(export_model(m)), backend="bnb")
    assert a.status == b.status and a.objective == b.objective


@pytest.mark.parametrize("seed", range(6))
def test_bnb_agrees_with_highs_on_image_models(seed):
    img = synthetic_corpus(1, seed=seed, width=64, height=64)[0]
    img = pad_white_ring(img, Factors(8, 8))
    m = build_model(label_components(img), Factors(8, 8))
    a = solve(m, time_limit=60, backend="bnb")
    b = solve(m, time_limit=60, backend="highs")
    assert a.status == b.status == Status.OPTIMAL
    assert a.objective == b.objective


def test_deterministic_bnb():
    img = pad_white_ring(synthetic_corpus(1, seed=2, width=64, height=64)[0], Factors(8, 8))
    m = build_model(label_components(img), Factors(8, 8))
    a, b = solve(m, backend="bnb"), solve(m, backend="bnb")
    assert a.assignment == b.assignment and a.nodes_explored == b.nodes_explored


def test_anytime_monotone():
    img = pad_white_ring(synthetic_corpus(1, seed=5, width=128, height=128)[0], Factors(4, 4))
    m = build_model(label_components(img), Factors(4, 4))
    last = -np.inf
    for limit in (0.05, 0.2, 1.0, 3.0):
        r = solve(m, time_limit=limit, backend="bnb")
        assert r.status in (Status.OPTIMAL, Status.SUBOPTIMAL, Status.UNKNOWN)
        if r.assignment is not None:
            assert m.is_feasible(r.assignment)
        cur = -np.inf if r.objective is None else r.objective
        assert cur >= last
        last = cur


def test_unknown_backend():
    with pytest.raises(ValueError):
        solve(LinearModel(), backend="cplex9000")


def test_parse_solution():
    m = tiny([], [1, 1], 2)
    assert parse_solution("# c\noptimal\nx0 1\nx1 0\n", m) == ("optimal", [1, 0])
    assert parse_solution("infeasible\n", m) == ("infeasible", None)
    with pytest.raises(ExternalSolverError):
        parse_solution("optimal\nx0 1\n", m)
    with pytest.raises(ExternalSolverError):
        parse_solution("maybe\n", m)


def test_external_backend(tmp_path, monkeypatch):
    # a stand-in solver that hands the model to the bundled one
    script = tmp_path / "fake_solver.py"
    script.write_text(
        "import sys\n"
        "from topodown.solver import import_model, solve\n"
        "lp, out, limit = sys.argv[1:4]\n"
        "m = import_model(open(lp).read())\n"
        "r = solve(m, float(limit), backend='bnb')\n"
        "with open(out, 'w') as f:\n"
        "    f.write(r.status.value.lower() + '\\n')\n"
        "    if r.assignment is not None:\n"
        "        f.writelines(f'{n} {v}\\n' for n, v in zip(m.names, r.assignment))\n"
    )
    monkeypatch.setenv("TOPODOWN_SOLVER_CMD", f"{sys.executable} {script}")
    m = all_black_model()
    r = solve(m, backend="external")
    assert r.status == Status.OPTIMAL and r.objective == 16
