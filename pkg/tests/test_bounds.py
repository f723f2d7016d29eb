from fractions import Fraction

import pytest

from bslsat.bounds import chunk_weight, location_bounds
from bslsat.formula import NIL, And, Eq, GuardedNot, Neq, Sls, Sort, Star, Var, star
from bslsat.semantics import enumerate_model
from bslsat.slgraph import build, saturate


def lasso_formula(v, pto):
    a, b, c, d = v["a"], v["b"], v["c"], v["d"]
    return GuardedNot(star(Sls(a, b), pto(b, c), pto(c, d), Sls(d, a)),
                      Star(Sls(a, c), Sls(c, a)))


class TestChunkWeight:
    @pytest.mark.parametrize("var, weight", [
        (NIL, Fraction(0)),
        (Var("x", Sort.SLS), Fraction(2)),
        (Var("x", Sort.DLS), Fraction(3, 2)),
        (Var("x", Sort.NLS), Fraction(2)),
    ])
    def test_plain_weights(self, var, weight):
        assert chunk_weight(var) == weight

    def test_pointer_sources_weigh_one(self, svars, pto):
        g = saturate(build(lasso_formula(svars, pto)))
        assert chunk_weight(svars["b"], g) == 1
        assert chunk_weight(svars["c"], g) == 1
        assert chunk_weight(svars["a"], g) == 2
        assert chunk_weight(NIL, g) == 0


class TestLocationBounds:
    def test_list_segment(self, svars):
        profile = location_bounds(Sls(svars["x"], svars["y"]))
        assert profile[Sort.SLS] == 4
        assert profile.total == 5

    def test_half_weights_are_floored(self):
        profile = location_bounds(Neq(Var("x", Sort.DLS), NIL))
        assert profile[Sort.DLS] == 1
        assert profile.total == 2
        assert profile.universe_size == 2

    def test_graph_tightening(self, svars, pto):
        phi = lasso_formula(svars, pto)
        assert location_bounds(phi, saturate(build(phi)))[Sort.SLS] == 6
        assert location_bounds(phi)[Sort.SLS] == 8

    def test_equal_variables_are_charged_once(self, svars):
        x, y = svars["x"], svars["y"]
        phi = And(Sls(x, NIL), Star(Eq(x, y), Sls(y, NIL)))
        assert location_bounds(phi, saturate(build(phi)))[Sort.SLS] == 2
        assert location_bounds(phi)[Sort.SLS] == 4

    def test_to_dict(self, svars):
        profile = location_bounds(Sls(svars["x"], NIL))
        assert profile.to_dict() == {"per_sort": {"S": 2, "D": 0, "N": 0}, "total": 3}


class TestSmallModels:
    @pytest.mark.parametrize("make", [
        lambda v, pto: Star(pto(v["x"], v["y"]), pto(v["y"], v["x"])),
        lambda v, pto: Star(Sls(v["x"], v["y"]), Neq(v["x"], v["y"])),
        lambda v, pto: GuardedNot(Sls(v["x"], NIL), pto(v["x"], NIL)),
    ])
    def test_tightened_budget_still_finds_models(self, svars, pto, make):
        phi = make(svars, pto)
        profile = location_bounds(phi, saturate(build(phi)))
        assert enumerate_model(phi, profile.per_sort) is not None
