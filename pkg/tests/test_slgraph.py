import itertools
import random

import pytest

from bslsat.bounds import location_bounds
from bslsat.formula import (
    NIL, And, Dls, Eq, Field, GuardedNot, Neq, Nls, Or, Sls, Sort, Star, spatial_atoms, star,
)
from bslsat.generators import random_formula
from bslsat.semantics import LOC_NIL, Location, StackHeapModel, enumerate_models, evaluate, walk
from bslsat.slgraph import (
    Contradiction, PathBound, build, initial_bounds, join, meet, path_bound, saturate,
)

MIXED = (Sort.SLS, Sort.DLS, Sort.NLS)


def lasso(v, pto):
    a, b, c, d = v["a"], v["b"], v["c"], v["d"]
    return GuardedNot(star(Sls(a, b), pto(b, c), pto(c, d), Sls(d, a)),
                      Star(Sls(a, c), Sls(c, a)))


class TestBuild:
    def test_atoms(self, svars, pto):
        x, y = svars["x"], svars["y"]
        g = build(Star(pto(x, y), Sls(y, NIL)))
        assert (Field.N, x, y) in g.pointers
        assert (Field.N, y, NIL) in g.paths
        assert g.is_pointer_source(x)
        assert not g.is_pointer_source(y)

    def test_separation_implies_disequality(self, svars, pto):
        x, y = svars["x"], svars["y"]
        g = build(Star(pto(x), pto(y)))
        assert g.must_differ(x, y)
        assert g.must_differ(x, NIL)

    def test_equalities_are_closed(self, svars):
        x, y, z = svars["x"], svars["y"], svars["z"]
        g = build(And(Star(Eq(x, y), Eq(y, z)), Neq(x, NIL)))
        assert g.must_equal(x, z)
        assert g.must_differ(z, NIL)
        assert g.eq_class(x) == {x, y, z}

    def test_disjunction_keeps_common_facts(self, svars):
        x, y, z = svars["x"], svars["y"], svars["z"]
        g = build(Or(Eq(x, y), Star(Eq(x, y), Neq(x, z))))
        assert g.must_equal(x, y)
        assert not g.must_differ(x, z)

    def test_negated_part_is_ignored(self, svars, pto):
        x, y = svars["x"], svars["y"]
        g = build(GuardedNot(Sls(x, y), pto(x, y)))
        assert not g.pointers
        assert y in g.variables

    def test_join_and_meet(self, svars):
        x, y = svars["x"], svars["y"]
        g1, g2 = build(Eq(x, y)), build(Neq(x, y))
        assert join(g1, g2).must_equal(x, y) and join(g1, g2).must_differ(x, y)
        assert not meet(g1, g2).must_equal(x, y)

    def test_dot_export(self, svars, pto):
        dot = build(pto(svars["x"], svars["y"])).to_dot()
        assert dot.startswith("digraph slgraph {")
        assert '"x" -> "y" [label="n"];' in dot


class TestSaturate:
    def test_pointer_targets_are_merged(self, svars, pto):
        x, y, z = svars["x"], svars["y"], svars["z"]
        g = saturate(build(And(pto(x, y), pto(x, z))))
        assert g.must_equal(y, z)

    def test_conflicting_pointers(self, svars, pto):
        x, y, z = svars["x"], svars["y"], svars["z"]
        result = saturate(build(And(And(pto(x, y), pto(x, z)), Star(Neq(y, z), Sls(x, NIL)))))
        assert isinstance(result, Contradiction)

    def test_double_allocation(self, svars, pto):
        x = svars["x"]
        assert isinstance(saturate(build(Star(pto(x), pto(x)))), Contradiction)

    def test_consistent_graph_is_returned(self, svars, pto):
        assert not isinstance(saturate(build(lasso(svars, pto))), Contradiction)


class TestPathBounds:
    def test_initial_bound_of_a_segment(self, svars, pto):
        phi = lasso(svars, pto)
        g = saturate(build(phi))
        bounds = initial_bounds(g, phi, Field.N)
        assert bounds[(svars["a"], svars["b"])] == PathBound(0, 2)
        assert bounds[(svars["b"], svars["c"])] == PathBound(1, 1)

    def test_path_through_pointers(self, svars, pto):
        phi = lasso(svars, pto)
        g = saturate(build(phi))
        assert path_bound(g, phi, Field.N, svars["a"], svars["c"]) == PathBound(1, 3)

    def test_pointer_chain(self, svars, pto):
        x, y = svars["x"], svars["y"]
        phi = Star(pto(x, y), pto(y, NIL))
        g = saturate(build(phi))
        assert path_bound(g, phi, Field.N, x, y) == PathBound(1, 1)
        assert path_bound(g, phi, Field.N, x, NIL) == PathBound(2, 2)

    def test_trivial_paths(self, svars, pto):
        x, y = svars["x"], svars["y"]
        phi = Star(Eq(x, y), Sls(x, NIL))
        g = saturate(build(phi))
        assert path_bound(g, phi, Field.N, x, y) == PathBound(0, 0)
        assert path_bound(g, phi, Field.N, NIL, x) == PathBound(0, 0)

    def test_bound_str(self):
        assert str(PathBound(1, 3)) == "[1,3]"
        assert PathBound(2, 1).is_empty


def small_models(phi, graph, limit=20):
    """Oracle models of ``phi`` within its tightened bounds, or none when those are too large."""
    budget = location_bounds(phi, graph).per_sort
    if sum(budget.values()) > 3:
        return []
    return list(itertools.islice(enumerate_models(phi, budget), limit))


def path_queries(phi):
    queries = set()
    for atom in spatial_atoms(phi):
        if isinstance(atom, (Sls, Dls)):
            queries.add((Field.N, atom.x, atom.y))
        elif isinstance(atom, Nls):
            queries.add((Field.T, atom.x, atom.y))
    return queries


def within(model, bounds):
    for (fld, x, y), bound in bounds.items():
        path = walk(model, fld, model.stack.get(x, LOC_NIL), model.stack.get(y, LOC_NIL), x.sort)
        if path is not None and not bound.lower <= len(path) <= bound.upper:
            return False
    return True


class TestPathBoundSoundness:
    @pytest.mark.slow
    def test_satisfiable_heaps_have_a_witness_within_bounds(self):
        rng = random.Random(5)
        checked = 0
        for _ in range(300):
            phi = random_formula(rng, num_vars=4, depth=3, sorts=MIXED, predicate_ratio=0.5,
                                 connectives=("sep",))
            g = saturate(build(phi))
            if isinstance(g, Contradiction):
                continue
            profile = location_bounds(phi, g)
            bounds = {q: path_bound(g, phi, *q, profile) for q in path_queries(phi)}
            models = small_models(phi, g, limit=None)
            if not models or not bounds:
                continue
            checked += 1
            assert any(within(m, bounds) for m in models), f"{phi}: {bounds}"
        assert checked

    def test_bound_restricts_witnesses_not_models(self, svars):
        a, b, c = svars["a"], svars["b"], svars["c"]
        phi = Star(Sls(a, NIL), Sls(b, c))
        g = saturate(build(phi))
        assert location_bounds(phi, g)[Sort.SLS] == 6
        assert path_bound(g, phi, Field.N, a, NIL) == PathBound(0, 4)
        # a possibly empty segment is charged two cells, yet may sit inside the long list
        cells = [Location(Sort.SLS, i) for i in range(1, 7)]
        heap = {loc: {Field.N: nxt} for loc, nxt in zip(cells, cells[1:] + [LOC_NIL])}
        long_model = StackHeapModel({a: cells[0], b: cells[2], c: cells[2]}, heap)
        assert evaluate(long_model, phi)
        assert len(walk(long_model, Field.N, cells[0], LOC_NIL)) == 6
        short = StackHeapModel({a: cells[0], b: cells[1], c: cells[1]},
                               {cells[0]: {Field.N: LOC_NIL}})
        assert evaluate(short, phi)


class TestGraphLaws:
    def test_saturate_is_idempotent(self):
        rng = random.Random(6)
        for _ in range(200):
            phi = random_formula(rng, num_vars=4, depth=4, sorts=MIXED)
            g = saturate(build(phi))
            if isinstance(g, Contradiction):
                assert saturate(build(phi)) == g
            else:
                assert saturate(g) == g, str(phi)

    def test_conjunction_reassociates(self):
        rng = random.Random(8)
        for _ in range(100):
            a, b, c = (random_formula(rng, num_vars=4, depth=3, sorts=MIXED) for _ in range(3))
            assert build(And(And(a, b), c)) == build(And(a, And(b, c))), f"{a} / {b} / {c}"

    def test_star_reassociates_without_pure_atoms(self):
        rng = random.Random(9)
        for _ in range(100):
            a, b, c = (random_formula(rng, num_vars=4, depth=3, sorts=MIXED, pure_ratio=0.0)
                       for _ in range(3))
            assert build(Star(Star(a, b), c)) == build(Star(a, Star(b, c))), f"{a} / {b} / {c}"

    def test_pure_atoms_can_break_star_reassociation(self, svars, pto):
        x, y = svars["x"], svars["y"]
        left = Star(Star(Sls(x, y), Neq(x, y)), pto(x))
        right = Star(Sls(x, y), Star(Neq(x, y), pto(x)))
        assert isinstance(saturate(build(left)), Contradiction)
        assert not isinstance(saturate(build(right)), Contradiction)
