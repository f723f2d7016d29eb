"""Over-approximated footprint terms and the star translation strategy."""
from __future__ import annotations

import logging
from enum import Enum

from .formula import (
    NIL, PURE_ATOMS, And, GuardedNot, Or, PointsTo, PREDICATES, Star, Var,
)
from .smt_terms import EMPTY, SET, App, Symbol, singleton, union

logger = logging.getLogger(__name__)


class StarStrategy(Enum):
    ENUMERATE = "enum"
    QUANTIFY = "quantif"

    def __str__(self):
        return self.value


def _opaque_path(atom):
    return Symbol(f"|FP {atom}|", SET)


def _singleton_var(term):
    if isinstance(term, App) and term.op == "singleton" and isinstance(term.args[0], Symbol):
        return Var(term.args[0].name) if term.args[0].name != "nil" else NIL
    return None


class FootprintComputer:
    """FP# with a per-run memo; ``path_term`` gives the footprint of a predicate atom."""

    def __init__(self, path_term=None, graph=None):
        self.path_term = path_term or _opaque_path
        self.graph = graph
        self.memo = {}
        self.filtered_pairs = 0

    def _overlapping(self, left, right):
        a, b = _singleton_var(left), _singleton_var(right)
        if a is None or b is None:
            return False
        if self.graph is None:
            return a == b
        return self.graph.must_equal(a, b)

    def compute(self, psi):
        cached = self.memo.get(psi)
        if cached is not None:
            return cached
        if isinstance(psi, PURE_ATOMS):
            result = (EMPTY,)
        elif isinstance(psi, PointsTo):
            result = (singleton(Symbol(psi.root.name)),)
        elif isinstance(psi, PREDICATES):
            result = (self.path_term(psi),)
        elif isinstance(psi, GuardedNot):
            result = self.compute(psi.guard)
        elif isinstance(psi, Or):
            result = _dedupe(self.compute(psi.left) + self.compute(psi.right))
        elif isinstance(psi, And):
            left, right = self.compute(psi.left), self.compute(psi.right)
            result = left if len(left) <= len(right) else right
        elif isinstance(psi, Star):
            pairs = []
            for left in self.compute(psi.left):
                for right in self.compute(psi.right):
                    if self._overlapping(left, right):
                        self.filtered_pairs += 1
                        continue
                    pairs.append(union(left, right))
            result = _dedupe(pairs)
        else:
            raise TypeError(f"not a formula: {psi!r}")
        self.memo[psi] = result
        return result

    def pairs(self, star):
        """Footprint pairs of the two operands of ``star`` that survive filtering."""
        return [(left, right)
                for left in self.compute(star.left)
                for right in self.compute(star.right)
                if not self._overlapping(left, right)]


def _dedupe(terms):
    return tuple(dict.fromkeys(terms))


def compute_fp(psi, path_term=None, graph=None):
    return FootprintComputer(path_term, graph).compute(psi)


def choose_strategy(star, computer, strategy="auto", limit=64):
    """Enumerate footprint pairs when there are at most ``limit`` of them."""
    if strategy == "enum":
        return StarStrategy.ENUMERATE
    if strategy == "quantif":
        return StarStrategy.QUANTIFY
    count = len(computer.compute(star.left)) * len(computer.compute(star.right))
    picked = StarStrategy.ENUMERATE if count <= limit else StarStrategy.QUANTIFY
    if picked is StarStrategy.QUANTIFY:
        logger.info(f"Star with {count} footprint pairs translated with set quantifiers")
    return picked
