"""Sorted abstract syntax of boolean separation logic over list predicates.

Formulas are frozen dataclasses, so they hash structurally and can be shared
between threads and used as memo keys. Negation only exists in guarded form
(``GuardedNot(guard, negated)`` reads ``guard /\\ not negated``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Iterator

from .errors import SortError


class Sort(Enum):
    SLS = "S"
    DLS = "D"
    NLS = "N"

    def __str__(self):
        return self.value


class Field(Enum):
    N = "n"
    P = "p"
    T = "t"

    def __str__(self):
        return self.value


# Record shape of an allocated location, by sort.
RECORD_FIELDS = {
    Sort.SLS: (Field.N,),
    Sort.DLS: (Field.N, Field.P),
    Sort.NLS: (Field.N, Field.T),
}

SORT_ORDER = (Sort.SLS, Sort.DLS, Sort.NLS)


@dataclass(frozen=True, order=True)
class Var:
    name: str
    sort: Sort | None = field(default=None, compare=False)

    @property
    def is_nil(self):
        return self.name == "nil"

    def __str__(self):
        return self.name


NIL = Var("nil")


class Formula:
    def __str__(self):
        return to_native(self)


@dataclass(frozen=True)
class Eq(Formula):
    left: Var
    right: Var


@dataclass(frozen=True)
class Neq(Formula):
    left: Var
    right: Var


@dataclass(frozen=True)
class PointsTo(Formula):
    root: Var
    fields: tuple[tuple[Field, Var], ...]

    @classmethod
    def of(cls, root, **targets):
        """Build ``root |-> <f: target, ...>`` from keyword fields n/p/t."""
        pairs = tuple(sorted(((Field(name), var) for name, var in targets.items()),
                             key=lambda pair: pair[0].value))
        return cls(root, pairs)

    def target(self, fld):
        for name, var in self.fields:
            if name is fld:
                return var
        return None


@dataclass(frozen=True)
class Sls(Formula):
    x: Var
    y: Var


@dataclass(frozen=True)
class Dls(Formula):
    x: Var
    y: Var
    x2: Var
    y2: Var


@dataclass(frozen=True)
class Nls(Formula):
    x: Var
    y: Var
    z: Var


@dataclass(frozen=True)
class Star(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class GuardedNot(Formula):
    guard: Formula
    negated: Formula


PURE_ATOMS = (Eq, Neq)
PREDICATES = (Sls, Dls, Nls)
SPATIAL_ATOMS = (PointsTo,) + PREDICATES
ATOMS = PURE_ATOMS + SPATIAL_ATOMS
BINARY = (Star, And, Or)


def children(phi):
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    if isinstance(phi, GuardedNot):
        return (phi.guard, phi.negated)
    return ()


def atom_vars(atom):
    if isinstance(atom, PURE_ATOMS):
        return (atom.left, atom.right)
    if isinstance(atom, PointsTo):
        return (atom.root,) + tuple(var for _, var in atom.fields)
    if isinstance(atom, Sls):
        return (atom.x, atom.y)
    if isinstance(atom, Dls):
        return (atom.x, atom.y, atom.x2, atom.y2)
    if isinstance(atom, Nls):
        return (atom.x, atom.y, atom.z)
    raise TypeError(f"not an atom: {atom!r}")


def atoms(phi) -> Iterator[Formula]:
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, ATOMS):
            yield node
        else:
            stack.extend(reversed(children(node)))


def spatial_atoms(phi):
    return [atom for atom in atoms(phi) if isinstance(atom, SPATIAL_ATOMS)]


def variables(phi, sort=None):
    """All variables of ``phi`` plus nil, optionally only those of ``sort``."""
    found = {NIL}
    for atom in atoms(phi):
        found.update(atom_vars(atom))
    if sort is not None:
        found = {var for var in found if var.sort is sort or var.is_nil}
    return found


def root_of(atom):
    if isinstance(atom, PointsTo):
        return atom.root
    return atom.x


def roots_of_spatial(phi):
    return {root_of(atom) for atom in spatial_atoms(phi)}


def size(phi):
    return 1 + sum(size(child) for child in children(phi))


def depth(phi):
    kids = children(phi)
    return 1 + (max(depth(child) for child in kids) if kids else 0)


def _allowed(var, *sorts):
    return var.is_nil or var.sort in sorts


def _check_atom(atom, path):
    if isinstance(atom, (Eq, Neq)):
        left, right = atom.left, atom.right
        if not left.is_nil and not right.is_nil and left.sort is not right.sort:
            raise SortError(f"cannot compare {left} of sort {left.sort} with {right} of sort "
                            f"{right.sort}", path)
    elif isinstance(atom, PointsTo):
        root = atom.root
        if root.is_nil or root.sort is None:
            raise SortError(f"points-to root {root} must be a sorted variable", path)
        expected = RECORD_FIELDS[root.sort]
        actual = tuple(name for name, _ in atom.fields)
        if sorted(actual, key=lambda f: f.value) != sorted(expected, key=lambda f: f.value):
            shown = ",".join(str(f) for f in actual)
            raise SortError(f"root {root} of sort {root.sort} cannot carry fields <{shown}>", path)
    elif isinstance(atom, Sls):
        for var in (atom.x, atom.y):
            if not _allowed(var, Sort.SLS):
                raise SortError(f"sls argument {var} must have sort S", path)
    elif isinstance(atom, Dls):
        for var in (atom.x, atom.y, atom.x2, atom.y2):
            if not _allowed(var, Sort.DLS):
                raise SortError(f"dls argument {var} must have sort D", path)
    elif isinstance(atom, Nls):
        for var in (atom.x, atom.y):
            if not _allowed(var, Sort.NLS):
                raise SortError(f"nls argument {var} must have sort N", path)
        if not _allowed(atom.z, Sort.SLS):
            raise SortError(f"nls sink {atom.z} must have sort S", path)
    for var in atom_vars(atom):
        if not var.is_nil and var.sort is None:
            raise SortError(f"variable {var} has no sort", path)


def check_sorts(phi):
    """Raise SortError on the first ill-sorted subterm, else return None."""
    seen = {}

    def visit(node, path):
        if isinstance(node, ATOMS):
            _check_atom(node, path + (type(node).__name__,))
            for var in atom_vars(node):
                other = seen.setdefault(var.name, var.sort)
                if other is not var.sort:
                    raise SortError(f"variable {var} used with sorts {other} and {var.sort}",
                                    path + (type(node).__name__,))
            return
        if isinstance(node, BINARY):
            visit(node.left, path + (f"{type(node).__name__}.left",))
            visit(node.right, path + (f"{type(node).__name__}.right",))
        elif isinstance(node, GuardedNot):
            visit(node.guard, path + ("GuardedNot.guard",))
            visit(node.negated, path + ("GuardedNot.negated",))
        else:
            raise SortError(f"unknown formula node {node!r}", path)

    visit(phi, ())


def star(*formulas):
    return reduce(Star, formulas)


def conj(*formulas):
    return reduce(And, formulas)


def disj(*formulas):
    return reduce(Or, formulas)


def emp():
    return Eq(NIL, NIL)


# Atomic chunk shapes: every positive model splits into models of these.

def sls_ge2(x, y):
    return GuardedNot(Star(Sls(x, y), Neq(x, y)), PointsTo.of(x, n=y))


def dls_ge2(x, y, x2, y2):
    return star(Dls(x, y, x2, y2), Neq(x, y), Neq(x, x2))


def dls_ge3(x, y, x2, y2):
    return GuardedNot(dls_ge2(x, y, x2, y2),
                      Star(PointsTo.of(x, n=x2, p=y2), PointsTo.of(x2, n=y, p=x)))


def nls_ge2(x, y, z):
    return GuardedNot(Star(Nls(x, y, z), Neq(x, y)), PointsTo.of(x, n=z, t=y))


_RECORD_CTOR = {Sort.SLS: "c_sls", Sort.DLS: "c_dls", Sort.NLS: "c_nls"}
_CONNECTIVE = {Star: "sep", And: "and", Or: "or"}


def to_native(phi):
    """Render ``phi`` in the native s-expression syntax."""
    if isinstance(phi, Eq):
        return f"(= {phi.left} {phi.right})"
    if isinstance(phi, Neq):
        return f"(distinct {phi.left} {phi.right})"
    if isinstance(phi, PointsTo):
        ctor = _RECORD_CTOR.get(phi.root.sort, "c_sls")
        shape = RECORD_FIELDS.get(phi.root.sort, tuple(name for name, _ in phi.fields))
        args = " ".join(str(phi.target(name)) for name in shape)
        return f"(pto {phi.root} ({ctor} {args}))"
    if isinstance(phi, Sls):
        return f"(sls {phi.x} {phi.y})"
    if isinstance(phi, Dls):
        return f"(dls {phi.x} {phi.y} {phi.x2} {phi.y2})"
    if isinstance(phi, Nls):
        return f"(nls {phi.x} {phi.y} {phi.z})"
    if isinstance(phi, GuardedNot):
        return f"(gneg {to_native(phi.guard)} {to_native(phi.negated)})"
    return f"({_CONNECTIVE[type(phi)]} {to_native(phi.left)} {to_native(phi.right)})"
