from bslsat.footprint import FootprintComputer, StarStrategy, choose_strategy, compute_fp
from bslsat.formula import NIL, And, Eq, GuardedNot, Or, Sls, Star
from bslsat.semantics import LOC_NIL
from bslsat.slgraph import build
from bslsat.smt_terms import (
    EMPTY, FALSE, SET, TRUE, App, LocConst, Symbol, diff, has_quantifiers, inter, member, mk_and,
    mk_eq, mk_forall, mk_ite, mk_not, mk_or, power, select, set_of, singleton, subset, term_size,
    union,
)

x, y = Symbol("x"), Symbol("y")
p, q = Symbol("p", "Bool"), Symbol("q", "Bool")


class TestConstructors:
    def test_boolean_folding(self):
        assert mk_and(p, TRUE) == p
        assert mk_and(p, FALSE) == FALSE
        assert mk_or() == FALSE
        assert mk_and(p, mk_and(q, p)) == App("and", (p, q))
        assert mk_not(mk_not(p)) == p

    def test_equality_folding(self):
        assert mk_eq(x, x) == TRUE
        assert mk_eq(LocConst(LOC_NIL), LocConst("S1")) == FALSE
        assert str(mk_eq(x, y)) == "(= x y)"

    def test_ite_and_quantifiers(self):
        assert mk_ite(TRUE, x, y) == x
        assert mk_ite(p, x, x) == x
        assert mk_forall([x], TRUE) == TRUE
        assert has_quantifiers(mk_and(p, mk_forall([x], mk_eq(x, y))))
        assert not has_quantifiers(mk_and(p, q))

    def test_sets(self):
        sx, sy = singleton(x), singleton(y)
        assert union(sx, EMPTY) == sx
        assert union(sy, sx) == union(sx, sy)
        assert inter(sx, EMPTY) == EMPTY
        assert diff(sx, sx) == EMPTY
        assert subset(EMPTY, sx) == TRUE
        assert member(x, EMPTY) == FALSE
        assert set_of([]) == EMPTY

    def test_heap_access(self):
        h = Symbol("h_n", "Array")
        assert power(h, x, 0) == x
        assert str(power(h, x, 2)) == "(select h_n (select h_n x))"
        assert select(h, x).sort == "Loc"

    def test_size_counts_nodes(self):
        assert term_size(mk_and(p, q)) == 3
        assert term_size(x) == 1


class TestFootprints:
    def test_atoms(self, svars, pto):
        a, b = svars["x"], svars["y"]
        assert compute_fp(Eq(a, b)) == (EMPTY,)
        assert compute_fp(pto(a, b)) == (singleton(Symbol("x")),)
        assert compute_fp(Sls(a, b))[0].sort == SET

    def test_connectives(self, svars, pto):
        a, b = svars["x"], svars["y"]
        assert len(compute_fp(Or(pto(a), pto(b)))) == 2
        assert compute_fp(Or(pto(a), pto(a))) == (singleton(Symbol("x")),)
        assert compute_fp(GuardedNot(pto(a), Eq(a, b))) == compute_fp(pto(a))
        assert compute_fp(And(Or(pto(a), pto(b)), pto(a))) == compute_fp(pto(a))
        star = compute_fp(Star(pto(a), pto(b)))
        assert star == (union(singleton(Symbol("x")), singleton(Symbol("y"))),)

    def test_overlapping_singletons_are_filtered(self, svars, pto):
        a, b = svars["x"], svars["y"]
        computer = FootprintComputer()
        assert computer.compute(Star(pto(a), pto(a))) == ()
        assert computer.filtered_pairs == 1
        phi = Star(Eq(a, b), Star(pto(a), pto(b)))
        graph = build(phi)
        assert compute_fp(phi.right, graph=graph) == ()
        assert len(compute_fp(Star(pto(a), pto(b)))) == 1

    def test_strategy_choice(self, svars, pto):
        a, b, c = svars["x"], svars["y"], svars["z"]
        wide = Or(Or(pto(a), pto(b)), pto(c))
        star = Star(wide, wide)
        computer = FootprintComputer()
        assert choose_strategy(star, computer, "auto", limit=9) is StarStrategy.ENUMERATE
        assert choose_strategy(star, computer, "auto", limit=8) is StarStrategy.QUANTIFY
        assert choose_strategy(star, computer, "enum", limit=0) is StarStrategy.ENUMERATE
        assert len(computer.pairs(star)) == 6

    def test_nil_singleton(self):
        assert compute_fp(Eq(NIL, NIL)) == (EMPTY,)
