"""Solver-independent SMT terms over locations, heap arrays and location sets.

Terms are immutable and hashed once. The ``mk_*`` constructors fold
constants and flatten connectives so that generated scripts stay small and
structurally comparable (footprint sets are deduplicated by term equality).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

LOC = "Loc"
SET = "Set"
BOOL = "Bool"
ARRAY = "Array"


class Term:
    __slots__ = ()

    def __hash__(self):
        cached = self.__dict__.get("_hash")
        if cached is None:
            cached = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_hash", cached)
        return cached


@dataclass(frozen=True, eq=True)
class Symbol(Term):
    name: str
    sort: str = LOC

    def _key(self):
        return (self.name, self.sort)

    __hash__ = Term.__hash__

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=True)
class LocConst(Term):
    location: object

    @property
    def sort(self):
        return LOC

    def _key(self):
        return (self.location,)

    __hash__ = Term.__hash__

    def __str__(self):
        return f"loc_{self.location}"


@dataclass(frozen=True, eq=True)
class BoolConst(Term):
    value: bool

    @property
    def sort(self):
        return BOOL

    def _key(self):
        return (self.value,)

    __hash__ = Term.__hash__

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True, eq=True)
class App(Term):
    op: str
    args: tuple
    sort: str = BOOL

    def _key(self):
        return (self.op, self.args, self.sort)

    __hash__ = Term.__hash__

    def __str__(self):
        if not self.args:
            return self.op
        return f"({self.op} {' '.join(str(a) for a in self.args)})"


@dataclass(frozen=True, eq=True)
class Quantifier(Term):
    kind: str
    bound: tuple
    body: Term

    @property
    def sort(self):
        return BOOL

    def _key(self):
        return (self.kind, self.bound, self.body)

    __hash__ = Term.__hash__

    def __str__(self):
        binders = " ".join(f"({v} {v.sort})" for v in self.bound)
        return f"({self.kind} ({binders}) {self.body})"


TRUE = BoolConst(True)
FALSE = BoolConst(False)
EMPTY = App("empty", (), SET)
_text = lru_cache(maxsize=65536)(str)


def _flatten(op, terms):
    for term in terms:
        if isinstance(term, App) and term.op == op:
            yield from term.args
        else:
            yield term


def _unique(terms):
    seen = {}
    for term in terms:
        seen.setdefault(term, None)
    return list(seen)


def mk_and(*terms):
    args = []
    for term in _unique(_flatten("and", terms)):
        if term == FALSE:
            return FALSE
        if term != TRUE:
            args.append(term)
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else App("and", tuple(args))


def mk_or(*terms):
    args = []
    for term in _unique(_flatten("or", terms)):
        if term == TRUE:
            return TRUE
        if term != FALSE:
            args.append(term)
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else App("or", tuple(args))


def mk_not(term):
    if isinstance(term, BoolConst):
        return FALSE if term.value else TRUE
    if isinstance(term, App) and term.op == "not":
        return term.args[0]
    return App("not", (term,))


def mk_implies(premise, conclusion):
    if premise == TRUE:
        return conclusion
    if premise == FALSE or conclusion == TRUE:
        return TRUE
    return App("=>", (premise, conclusion))


def mk_eq(left, right):
    if left == right:
        return TRUE
    if isinstance(left, LocConst) and isinstance(right, LocConst):
        return FALSE
    return App("=", (left, right))


def mk_distinct(left, right):
    return mk_not(mk_eq(left, right))


def mk_ite(cond, then, other):
    if cond == TRUE or then == other:
        return then
    if cond == FALSE:
        return other
    return App("ite", (cond, then, other), then.sort)


def mk_forall(bound, body):
    if isinstance(body, BoolConst):
        return body
    return Quantifier("forall", tuple(bound), body)


def mk_exists(bound, body):
    if isinstance(body, BoolConst):
        return body
    return Quantifier("exists", tuple(bound), body)


# Sets

def singleton(x):
    return App("singleton", (x,), SET)


def set_of(locations):
    """Literal set of location constants."""
    consts = tuple(sorted(locations))
    if not consts:
        return EMPTY
    return App("setlit", tuple(LocConst(loc) for loc in consts), SET)


def union(*sets):
    args = [s for s in _unique(_flatten("union", sets)) if s != EMPTY]
    if not args:
        return EMPTY
    if len(args) == 1:
        return args[0]
    return App("union", tuple(sorted(args, key=_text)), SET)


def inter(left, right):
    if left == EMPTY or right == EMPTY:
        return EMPTY
    if left == right:
        return left
    return App("inter", (left, right), SET)


def diff(left, right):
    if left == right:
        return EMPTY
    if left == EMPTY or right == EMPTY:
        return left
    return App("diff", (left, right), SET)


def subset(left, right):
    if left == EMPTY or left == right:
        return TRUE
    return App("subset", (left, right))


def member(x, s):
    if s == EMPTY:
        return FALSE
    return App("member", (x, s))


def disjoint(left, right):
    return mk_eq(inter(left, right), EMPTY)


# Heap arrays

def select(array, index):
    return App("select", (array, index), LOC)


def power(array, x, times):
    """``array`` applied ``times`` times to ``x``."""
    for _ in range(times):
        x = select(array, x)
    return x


def term_size(term, memo=None):
    """Node count of the term tree (shared subterms counted at every use)."""
    memo = {} if memo is None else memo
    key = id(term)
    if key in memo:
        return memo[key]
    if isinstance(term, App):
        value = 1 + sum(term_size(arg, memo) for arg in term.args)
    elif isinstance(term, Quantifier):
        value = 1 + len(term.bound) + term_size(term.body, memo)
    else:
        value = 1
    memo[key] = value
    return value


def has_quantifiers(term):
    stack, seen = [term], set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Quantifier):
            return True
        if isinstance(node, App):
            stack.extend(node.args)
    return False
