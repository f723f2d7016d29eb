import random

import pytest

from bslsat.config import Config, find_solver
from bslsat.formula import NIL, PointsTo, Sort, Var


@pytest.fixture
def svars():
    """Sort-S variables a, b, c, d, x, y, z."""
    return {name: Var(name, Sort.SLS) for name in "abcdxyz"}


@pytest.fixture
def dvars():
    return {name: Var(name, Sort.DLS) for name in ("x", "y", "u", "v")}


@pytest.fixture
def nvars():
    return {name: Var(name, Sort.NLS) for name in ("x", "y", "w")}


@pytest.fixture
def pto():
    def make(root, target=NIL):
        return PointsTo.of(root, n=target)
    return make


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def smt_solver():
    command = find_solver()
    if not command:
        pytest.skip("no SMT solver available")
    return command


@pytest.fixture
def solver_config(smt_solver):
    return Config(solver_command=smt_solver, timeout=30, verify_model=True)
