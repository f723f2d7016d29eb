"""Random well-sorted formulas and entailments for differential testing and benchmarks."""
from __future__ import annotations

import logging
import os
import random

from .formula import (
    NIL, And, Dls, Eq, GuardedNot, Neq, Nls, Or, PointsTo, Sls, Sort, Star, Var, variables,
)
from .parser import Query, print_native
from .slgraph import Contradiction, build, saturate

logger = logging.getLogger(__name__)

_PREFIX = {Sort.SLS: "x", Sort.DLS: "d", Sort.NLS: "t"}
CONNECTIVES = ("sep", "and", "or", "gneg")

# Entailment families: (depth, variables, predicate ratio, connectives)
FAMILIES = {
    "pointers": (8, 8, 0.0, CONNECTIVES),
    "lists": (6, 6, 0.2, ("sep", "and", "or")),
}


def make_variables(counts):
    """Sorted variable pools, e.g. ``{Sort.SLS: 3}`` gives x0, x1, x2."""
    return {sort: [Var(f"{_PREFIX[sort]}{i}", sort) for i in range(n)]
            for sort, n in counts.items() if n > 0}


class FormulaGenerator:
    def __init__(self, rng, pools, predicate_ratio=0.3, pure_ratio=0.2, connectives=CONNECTIVES,
                 sorts=None):
        self.rng = rng
        self.pools = pools
        self.predicate_ratio = predicate_ratio
        self.pure_ratio = pure_ratio
        self.connectives = tuple(connectives)
        self.sorts = [s for s in (sorts or pools) if pools.get(s)]
        if not self.sorts:
            raise ValueError("at least one non-empty variable pool is needed")

    def term(self, sort, allow_nil=True):
        pool = self.pools.get(sort, [])
        if not pool or (allow_nil and self.rng.random() < 0.15):
            return NIL
        return self.rng.choice(pool)

    def pointer(self, sort):
        root = self.rng.choice(self.pools[sort])
        if sort is Sort.SLS:
            return PointsTo.of(root, n=self.term(Sort.SLS))
        if sort is Sort.DLS:
            return PointsTo.of(root, n=self.term(Sort.DLS), p=self.term(Sort.DLS))
        return PointsTo.of(root, n=self.term(Sort.SLS), t=self.term(Sort.NLS))

    def predicate(self, sort):
        if sort is Sort.SLS:
            return Sls(self.term(sort), self.term(sort))
        if sort is Sort.DLS:
            return Dls(*(self.term(sort) for _ in range(4)))
        return Nls(self.term(sort), self.term(sort), self.term(Sort.SLS))

    def pure(self, sort):
        kind = Eq if self.rng.random() < 0.5 else Neq
        return kind(self.term(sort), self.term(sort))

    def atom(self):
        sort = self.rng.choice(self.sorts)
        roll = self.rng.random()
        if roll < self.pure_ratio:
            return self.pure(sort)
        if roll < self.pure_ratio + self.predicate_ratio:
            return self.predicate(sort)
        return self.pointer(sort)

    def formula(self, depth):
        if depth <= 1 or self.rng.random() < 0.2:
            return self.atom()
        left, right = self.formula(depth - 1), self.formula(depth - 1)
        kind = self.rng.choice(self.connectives)
        if kind == "sep":
            return Star(left, right)
        if kind == "and":
            return And(left, right)
        if kind == "or":
            return Or(left, right)
        return GuardedNot(left, right)


def random_formula(rng, num_vars=4, depth=4, sorts=(Sort.SLS,), predicate_ratio=0.3,
                   pure_ratio=0.2, connectives=CONNECTIVES):
    """Random well-sorted formula over ``num_vars`` variables spread across ``sorts``."""
    counts = {sort: 0 for sort in sorts}
    for i in range(num_vars):
        counts[sorts[i % len(sorts)]] += 1
    gen = FormulaGenerator(rng, make_variables(counts), predicate_ratio, pure_ratio, connectives)
    return gen.formula(depth)


def random_entailment(rng, family="pointers", max_tries=100):
    """Random entailment ``lhs |= rhs`` of one of the FAMILIES.

    Only pairs with vars(rhs) included in vars(lhs) and an lhs graph free of
    contradictions are kept.
    """
    depth, num_vars, predicate_ratio, connectives = FAMILIES[family]
    pools = make_variables({Sort.SLS: num_vars})
    gen = FormulaGenerator(rng, pools, predicate_ratio, 0.0, connectives)
    for _ in range(max_tries):
        lhs, rhs = gen.formula(depth), gen.formula(depth)
        if not variables(rhs) <= variables(lhs):
            continue
        if isinstance(saturate(build(lhs)), Contradiction):
            continue
        return Query.entailment(lhs, rhs)
    raise RuntimeError(f"no non-trivial {family} entailment found in {max_tries} tries")


def write_random_benchmarks(directory, count, seed=None, family=None, num_vars=4, depth=4):
    """Write random formulas (or entailments of ``family``) as .bsl files without a status."""
    rng = random.Random(seed)
    os.makedirs(directory, exist_ok=True)
    paths = []
    for i in range(count):
        if family:
            query = random_entailment(rng, family)
            name = f"{family}_{i:04d}.bsl"
        else:
            query = Query(random_formula(rng, num_vars=num_vars, depth=depth,
                                         sorts=(Sort.SLS, Sort.DLS, Sort.NLS)))
            name = f"random_{i:04d}.bsl"
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(print_native(query))
        paths.append(path)
    logger.info(f"Wrote {count} random benchmarks to {directory}")
    return paths
