"""Quantified boolean formulas, their reduction to BSL and a random QBF generator.

A QBF ``Q1 x1 ... Qm xm. F`` is reduced to a formula over sort-S variables
whose models encode assignments as heaps: ``x`` is true iff ``x`` is
allocated. The reduced formula is satisfiable iff the QBF is true, which
makes random QBFs a source of benchmarks with a known status.
"""
from __future__ import annotations

import logging
import os
import random
from dataclasses import dataclass

from .errors import TooManyVariables
from .formula import NIL, Eq, GuardedNot, Or, PointsTo, Sort, Star, Var, conj, emp, star
from .parser import Query, print_native

logger = logging.getLogger(__name__)

FORALL = "forall"
EXISTS = "exists"
MAX_EVAL_VARIABLES = 12


@dataclass(frozen=True)
class QVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class QNot:
    child: object

    def __str__(self):
        return f"(not {self.child})"


@dataclass(frozen=True)
class QAnd:
    left: object
    right: object

    def __str__(self):
        return f"(and {self.left} {self.right})"


@dataclass(frozen=True)
class QOr:
    left: object
    right: object

    def __str__(self):
        return f"(or {self.left} {self.right})"


@dataclass(frozen=True)
class Qbf:
    prefix: tuple
    matrix: object

    @property
    def variables(self):
        return [name for _, name in self.prefix]

    def __str__(self):
        binders = " ".join(f"{q} {name}." for q, name in self.prefix)
        return f"{binders} {self.matrix}".strip()


def matrix_variables(node):
    if isinstance(node, QVar):
        return {node.name}
    if isinstance(node, QNot):
        return matrix_variables(node.child)
    return matrix_variables(node.left) | matrix_variables(node.right)


def check_closed(q):
    names = q.variables
    if len(set(names)) != len(names):
        raise ValueError(f"variable bound twice in {q}")
    free = matrix_variables(q.matrix) - set(names)
    if free:
        raise ValueError(f"free variables {sorted(free)} in {q}")


# Evaluation

def _holds(node, assignment):
    if isinstance(node, QVar):
        return assignment[node.name]
    if isinstance(node, QNot):
        return not _holds(node.child, assignment)
    if isinstance(node, QAnd):
        return _holds(node.left, assignment) and _holds(node.right, assignment)
    return _holds(node.left, assignment) or _holds(node.right, assignment)


def eval_qbf(q):
    """Truth value of a closed QBF by expanding every quantifier."""
    check_closed(q)
    if len(q.prefix) > MAX_EVAL_VARIABLES:
        raise TooManyVariables(f"{len(q.prefix)} variables, at most {MAX_EVAL_VARIABLES} supported")

    def expand(i, assignment):
        if i == len(q.prefix):
            return _holds(q.matrix, assignment)
        quantifier, name = q.prefix[i]
        branches = (expand(i + 1, {**assignment, name: value}) for value in (False, True))
        return any(branches) if quantifier == EXISTS else all(branches)

    return expand(0, {})


# Reduction

def _bsl_var(name):
    return Var(name, Sort.SLS)


def _cell(var):
    return PointsTo.of(var, n=NIL)


def _maybe_cell(var):
    # Either x is allocated or the heap is empty.
    return Or(_cell(var), Eq(var, var))


def arbitrary(variables):
    """Any heap whose domain is a subset of ``variables``."""
    if not variables:
        return emp()
    return star(*(_maybe_cell(v) for v in variables))


class _Reducer:
    def __init__(self, q):
        self.all_vars = [_bsl_var(name) for name in q.variables]

    def everything(self):
        return arbitrary(self.all_vars)

    def matrix(self, node):
        if isinstance(node, QVar):
            return Star(self.everything(), _cell(_bsl_var(node.name)))
        if isinstance(node, QNot) and isinstance(node.child, QVar):
            return arbitrary([v for v in self.all_vars if v.name != node.child.name])
        if isinstance(node, QNot):
            return GuardedNot(self.everything(), self.matrix(node.child))
        if isinstance(node, QAnd):
            return conj(self.matrix(node.left), self.matrix(node.right))
        return Or(self.matrix(node.left), self.matrix(node.right))

    def quantified(self, prefix, matrix):
        if not prefix:
            return self.matrix(matrix)
        (quantifier, name), rest = prefix[0], prefix[1:]
        var = _bsl_var(name)
        if quantifier == EXISTS:
            return Star(_maybe_cell(var), self.quantified(rest, matrix))
        # forall x. F  is  not exists x. not F
        inner = Star(_maybe_cell(var), self.negation(rest, matrix))
        return GuardedNot(self.everything(), inner)

    def negation(self, prefix, matrix):
        """Reduction of ``not (prefix. matrix)``."""
        if not prefix:
            return self.matrix(QNot(matrix))
        return GuardedNot(self.everything(), self.quantified(prefix, matrix))


def reduce_qbf(q):
    """BSL formula satisfiable iff ``q`` is true."""
    check_closed(q)
    reducer = _Reducer(q)
    body = reducer.quantified(q.prefix, q.matrix)
    if not reducer.all_vars:
        return conj(body, emp())
    return conj(body, star(*(_cell(v) for v in reducer.all_vars)))


# Generation

def random_qbf(rng, num_vars=4, num_clauses=None, clause_size=(1, 3), exists_ratio=0.5):
    """Random prenex QBF with a CNF matrix over ``num_vars`` variables."""
    names = [f"x{i}" for i in range(num_vars)]
    prefix = tuple((EXISTS if rng.random() < exists_ratio else FORALL, name) for name in names)
    num_clauses = num_clauses or rng.randint(1, max(1, num_vars + 1))
    clauses = []
    for _ in range(num_clauses):
        width = rng.randint(clause_size[0], min(clause_size[1], num_vars))
        literals = []
        for name in rng.sample(names, width):
            literal = QVar(name)
            literals.append(QNot(literal) if rng.random() < 0.5 else literal)
        clause = literals[0]
        for literal in literals[1:]:
            clause = QOr(clause, literal)
        clauses.append(clause)
    matrix = clauses[0]
    for clause in clauses[1:]:
        matrix = QAnd(matrix, clause)
    return Qbf(prefix, matrix)


def qbf_query(q, name="<qbf>"):
    status = "sat" if eval_qbf(q) else "unsat"
    return Query(reduce_qbf(q), expected_status=status, source_name=name)


def write_qbf_benchmarks(directory, count, seed=None, num_vars=4):
    """Write ``count`` reduced random QBFs as .bsl files with their status."""
    rng = random.Random(seed)
    os.makedirs(directory, exist_ok=True)
    paths, statuses = [], {"sat": 0, "unsat": 0}
    for i in range(count):
        q = random_qbf(rng, num_vars=rng.randint(1, num_vars))
        path = os.path.join(directory, f"qbf_{i:04d}.bsl")
        query = qbf_query(q, path)
        statuses[query.expected_status] += 1
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"; {q}\n")
            handle.write(print_native(query))
        paths.append(path)
    logger.info(f"Wrote {count} QBF benchmarks to {directory} "
                f"({statuses['sat']} sat, {statuses['unsat']} unsat)")
    return paths
