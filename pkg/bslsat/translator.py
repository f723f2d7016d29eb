"""Translation of formulas into SMT terms over a bounded location universe.

The script asserts ``axioms /\\ T(phi, D)``: the axioms fix the sorted
location sets and nil, ``T`` follows the formula structure with a set term
for the heap domain of every subformula. Inductive predicates are unrolled
up to their path bounds.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from .bounds import location_bounds
from .footprint import FootprintComputer, StarStrategy, choose_strategy
from .formula import (
    NIL, SORT_ORDER, And, Dls, Eq, Field, GuardedNot, Neq, Nls, Or, PointsTo, Sls, Sort, Star,
    variables,
)
from .semantics import LOC_NIL, universe
from .slgraph import Contradiction, PathBound, build, path_bound, saturate
from .smt_terms import (
    ARRAY, EMPTY, FALSE, LOC, SET, LocConst, Symbol, diff, disjoint, has_quantifiers, member,
    mk_and, mk_distinct, mk_eq, mk_exists, mk_forall, mk_implies, mk_ite, mk_not, mk_or,
    power, select, set_of, singleton, subset, term_size, union,
)

logger = logging.getLogger(__name__)

HEAP_ARRAYS = {fld: Symbol(f"h_{fld}", ARRAY) for fld in Field}
DOMAIN = Symbol("D", SET)
SORT_SETS = {sort: Symbol(f"D_{sort}", SET) for sort in SORT_ORDER}


def var_symbol(var):
    return Symbol(var.name, LOC)


@dataclass
class SmtScript:
    locations: list
    constants: list
    assertion: object
    profile: object
    path_bounds: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def quantified(self):
        return has_quantifiers(self.assertion)

    def __str__(self):
        return str(self.assertion)


# Path macros

def reach(h, x, y, bound):
    """``y`` is reached from ``x`` in lower..upper steps of ``h``."""
    if bound.is_empty:
        return FALSE
    return mk_or(*(mk_eq(power(h, x, i), y) for i in range(bound.lower, bound.upper + 1)))


def path_with(h, x, y, bound, cell):
    """Union of ``cell(l)`` over the locations of the h-path from x to y, else empty."""
    result = EMPTY
    for i in range(bound.upper, bound.lower - 1, -1):
        cells = union(*(cell(power(h, x, j)) for j in range(i)))
        result = mk_ite(mk_eq(power(h, x, i), y), cells, result)
    return result


def path_simple(h, x, y, bound):
    return path_with(h, x, y, bound, singleton)


def path_nested(top, inner, x, y, z, bound, inner_bound):
    return path_with(top, x, y, bound, lambda loc: path_simple(inner, loc, z, inner_bound))


def path_forall(h, x, bound, body):
    """Conjunction of ``body`` over the first ``bound.upper`` locations of the h-path from x."""
    return mk_and(*(body(power(h, x, i)) for i in range(bound.upper)))


class Translator:
    def __init__(self, phi, strategy="auto", footprint_limit=64, path_quantifier_ratio=0.5,
                 tighten_bounds=True, graph=None, profile=None):
        self.phi = phi
        self.strategy = strategy
        self.footprint_limit = footprint_limit
        self.path_quantifier_ratio = path_quantifier_ratio
        if graph is None and tighten_bounds:
            graph = saturate(build(phi))
        if isinstance(graph, Contradiction):
            graph = None
        self.graph = graph
        self.profile = profile or location_bounds(phi, graph if tighten_bounds else None)
        self.locations = universe(self.profile.per_sort)
        self.footprints = FootprintComputer(self.predicate_footprint, graph)
        self.path_bounds = {}
        self.fresh = itertools.count()
        self.stats = {"stars": [], "path_quantifiers": 0, "location_quantifiers": 0}

    # Bounds

    def sort_bound(self, var):
        return 0 if var.is_nil else self.profile[var.sort]

    def bound(self, fld, x, y):
        key = (fld, x, y)
        if key not in self.path_bounds:
            if self.graph is None:
                self.path_bounds[key] = PathBound(0, self.sort_bound(x))
            else:
                self.path_bounds[key] = path_bound(self.graph, self.phi, fld, x, y, self.profile)
        return self.path_bounds[key]

    def inner_bound(self):
        return PathBound(1, self.profile[Sort.SLS] + 1)

    def use_path_quantifier(self, bound, var):
        return bound.upper <= int(self.path_quantifier_ratio * self.sort_bound(var))

    # Footprints

    def predicate_footprint(self, atom):
        h_n = HEAP_ARRAYS[Field.N]
        if isinstance(atom, (Sls, Dls)):
            return path_simple(h_n, var_symbol(atom.x), var_symbol(atom.y),
                               self.bound(Field.N, atom.x, atom.y))
        return path_nested(HEAP_ARRAYS[Field.T], h_n, var_symbol(atom.x), var_symbol(atom.y),
                           var_symbol(atom.z), self.bound(Field.T, atom.x, atom.y),
                           self.inner_bound())

    # Translation

    def axioms(self):
        conjuncts = [mk_eq(var_symbol(NIL), LocConst(LOC_NIL)),
                     mk_not(member(var_symbol(NIL), DOMAIN))]
        for sort in SORT_ORDER:
            cells = [LOC_NIL] + [loc for loc in self.locations if loc.sort is sort]
            conjuncts.append(mk_eq(SORT_SETS[sort], set_of(cells)))
        for var in sorted(variables(self.phi)):
            if not var.is_nil:
                conjuncts.append(member(var_symbol(var), SORT_SETS[var.sort]))
        return mk_and(*conjuncts)

    def translate(self, psi, dom):
        if isinstance(psi, Eq):
            return mk_and(mk_eq(var_symbol(psi.left), var_symbol(psi.right)), mk_eq(dom, EMPTY))
        if isinstance(psi, Neq):
            return mk_and(mk_distinct(var_symbol(psi.left), var_symbol(psi.right)),
                          mk_eq(dom, EMPTY))
        if isinstance(psi, PointsTo):
            root = var_symbol(psi.root)
            return mk_and(mk_eq(dom, singleton(root)),
                          *(mk_eq(select(HEAP_ARRAYS[f], root), var_symbol(t)) for f, t in psi.fields))
        if isinstance(psi, Sls):
            return self.translate_sls(psi, dom)
        if isinstance(psi, Dls):
            return self.translate_dls(psi, dom)
        if isinstance(psi, Nls):
            return self.translate_nls(psi, dom)
        if isinstance(psi, And):
            return mk_and(self.translate(psi.left, dom), self.translate(psi.right, dom))
        if isinstance(psi, Or):
            return mk_or(self.translate(psi.left, dom), self.translate(psi.right, dom))
        if isinstance(psi, GuardedNot):
            return mk_and(self.translate(psi.guard, dom), mk_not(self.translate(psi.negated, dom)))
        if isinstance(psi, Star):
            return self.translate_star(psi, dom)
        raise TypeError(f"not a formula: {psi!r}")

    def _split(self, psi, left, right, dom):
        return mk_and(self.translate(psi.left, left), self.translate(psi.right, right),
                      disjoint(left, right), mk_eq(dom, union(left, right)))

    def translate_star(self, psi, dom):
        strategy = choose_strategy(psi, self.footprints, self.strategy, self.footprint_limit)
        if strategy is StarStrategy.ENUMERATE:
            pairs = self.footprints.pairs(psi)
            self.stats["stars"].append({"strategy": str(strategy), "pairs": len(pairs)})
            return mk_or(*(self._split(psi, left, right, dom) for left, right in pairs))
        k = next(self.fresh)
        left, right = Symbol(f"F_{k}_l", SET), Symbol(f"F_{k}_r", SET)
        self.stats["stars"].append({"strategy": str(strategy), "pairs": None})
        return mk_exists((left, right), self._split(psi, left, right, dom))

    def _forall_cells(self, h, x, bound, dom, body, root):
        """``body(l)`` for every location l of ``dom`` on the h-path from ``x``."""
        if self.use_path_quantifier(bound, root):
            self.stats["path_quantifiers"] += 1
            return path_forall(h, x, bound, lambda loc: mk_implies(member(loc, dom), body(loc)))
        self.stats["location_quantifiers"] += 1
        loc = Symbol(f"l_{next(self.fresh)}", LOC)
        return mk_forall((loc,), mk_implies(member(loc, dom), body(loc)))

    def translate_sls(self, atom, dom):
        h_n = HEAP_ARRAYS[Field.N]
        x, y = var_symbol(atom.x), var_symbol(atom.y)
        bound = self.bound(Field.N, atom.x, atom.y)
        return mk_and(reach(h_n, x, y, bound), mk_eq(dom, path_simple(h_n, x, y, bound)),
                      subset(dom, SORT_SETS[Sort.SLS]))

    def translate_dls(self, atom, dom):
        h_n, h_p = HEAP_ARRAYS[Field.N], HEAP_ARRAYS[Field.P]
        x, y, x2, y2 = (var_symbol(v) for v in (atom.x, atom.y, atom.x2, atom.y2))
        bound = self.bound(Field.N, atom.x, atom.y)
        if bound.is_empty:
            return FALSE
        empty = mk_and(mk_eq(x, y), mk_eq(x2, y2), mk_eq(dom, EMPTY))
        back_links = self._forall_cells(
            h_n, x, bound, dom,
            lambda loc: mk_implies(mk_distinct(loc, x2), mk_eq(select(h_p, select(h_n, loc)), loc)),
            atom.x)
        nonempty = mk_and(
            mk_distinct(x, y), mk_distinct(x2, y2),
            reach(h_n, x, y, bound), mk_eq(dom, path_simple(h_n, x, y, bound)),
            mk_eq(select(h_p, x), y2), mk_eq(select(h_n, x2), y),
            member(x2, dom), mk_not(member(y2, dom)),
            subset(dom, SORT_SETS[Sort.DLS]),
            back_links,
        )
        return mk_or(empty, nonempty)

    def translate_nls(self, atom, dom):
        h_n, h_t = HEAP_ARRAYS[Field.N], HEAP_ARRAYS[Field.T]
        x, y, z = var_symbol(atom.x), var_symbol(atom.y), var_symbol(atom.z)
        bound = self.bound(Field.T, atom.x, atom.y)
        inner = self.inner_bound()
        if bound.is_empty:
            return FALSE
        top = path_simple(h_t, x, y, bound)
        sublist = PathBound(0, self.profile[Sort.SLS])

        def inner_list(loc):
            start = select(h_n, loc)
            return mk_and(reach(h_n, start, z, sublist),
                          subset(path_simple(h_n, start, z, sublist), SORT_SETS[Sort.SLS]))

        if self.use_path_quantifier(bound, atom.x):
            self.stats["path_quantifiers"] += 1
            inner_lists = path_forall(h_t, x, bound, lambda loc: mk_implies(
                mk_and(member(loc, dom), member(loc, SORT_SETS[Sort.NLS])), inner_list(loc)))
            instances = {}
            for i, j in itertools.product(range(bound.upper), repeat=2):
                for a, b in itertools.product(range(inner.upper), repeat=2):
                    l1 = power(h_n, power(h_t, x, i), a)
                    l2 = power(h_n, power(h_t, x, j), b)
                    if l1 != l2:
                        instances.setdefault(frozenset((l1, l2)), (l1, l2))
            separated = mk_and(*(self._separated(l1, l2, dom) for l1, l2 in instances.values()))
        else:
            self.stats["location_quantifiers"] += 2
            loc = Symbol(f"l_{next(self.fresh)}", LOC)
            inner_lists = mk_forall((loc,), mk_implies(
                mk_and(member(loc, dom), member(loc, SORT_SETS[Sort.NLS])), inner_list(loc)))
            l1, l2 = Symbol(f"l_{next(self.fresh)}", LOC), Symbol(f"l_{next(self.fresh)}", LOC)
            separated = mk_forall((l1, l2), self._separated(l1, l2, dom))
        return mk_and(
            reach(h_t, x, y, bound),
            mk_eq(dom, path_nested(h_t, h_n, x, y, z, bound, inner)),
            subset(top, SORT_SETS[Sort.NLS]), subset(top, dom),
            subset(diff(dom, top), SORT_SETS[Sort.SLS]),
            inner_lists, separated,
        )

    @staticmethod
    def _separated(l1, l2, dom):
        h_n = HEAP_ARRAYS[Field.N]
        premise = mk_and(member(l1, dom), member(l2, dom), mk_distinct(l1, l2),
                         mk_eq(select(h_n, l1), select(h_n, l2)))
        return mk_implies(premise, mk_not(member(select(h_n, l1), dom)))

    def run(self):
        """Build the full script for ``phi``."""
        assertion = mk_and(self.axioms(), self.translate(self.phi, DOMAIN))
        consts = sorted(variables(self.phi))
        self.stats.update({
            "bounds": self.profile.to_dict(),
            "path_bounds": {f"{fld}:{x}->{y}": str(b) for (fld, x, y), b in self.path_bounds.items()},
            "term_size": term_size(assertion),
            "footprint_pairs_filtered": self.footprints.filtered_pairs,
        })
        logger.info(f"Translated formula of size {self.stats['term_size']} over "
                    f"{len(self.locations)} locations")
        return SmtScript(self.locations, consts, assertion, self.profile,
                         dict(self.path_bounds), self.stats)


def axioms(phi, profile):
    return Translator(phi, tighten_bounds=False, profile=profile).axioms()


def translate_formula(phi, strategy="auto", **options):
    """SMT script for the satisfiability of ``phi``."""
    return Translator(phi, strategy=strategy, **options).run()


def _symbolic_heap_atoms(phi):
    """Atoms of ``phi`` when it is a star of atoms, else None."""
    if isinstance(phi, Star):
        left, right = _symbolic_heap_atoms(phi.left), _symbolic_heap_atoms(phi.right)
        return None if left is None or right is None else left + right
    if isinstance(phi, (Eq, Neq, PointsTo, Sls, Dls, Nls)):
        return [phi]
    return None


def missing_roots(lhs, rhs):
    """Spatial roots of a symbolic-heap ``rhs`` that lhs never mentions and that must be allocated."""
    found = _symbolic_heap_atoms(rhs)
    if not found:
        return []
    known = variables(lhs)
    roots = []
    for atom in found:
        if isinstance(atom, PointsTo):
            root, end = atom.root, None
        elif isinstance(atom, (Sls, Dls, Nls)):
            root, end = atom.x, atom.y
        else:
            continue
        if root not in known and root != end:
            roots.append(root)
    return roots


def entailment_query(lhs, rhs, shortcut=True):
    """Formula whose unsatisfiability means ``lhs |= rhs``, and whether the shortcut applied.

    When rhs must allocate a root that lhs does not mention, any model of
    lhs extends to a countermodel, so lhs alone is checked.
    """
    if shortcut and missing_roots(lhs, rhs):
        logger.info("Entailment reduced to satisfiability of the left-hand side")
        return lhs, True
    return GuardedNot(lhs, rhs), False
