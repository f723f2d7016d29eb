"""Input frontends: the native .bsl dialect and the SL-COMP singly-linked subset."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

from .errors import ParseError, UnsupportedFeature
from .formula import (
    NIL, RECORD_FIELDS, Dls, Eq, Formula, GuardedNot, Neq, Nls, PointsTo, Sls, Sort, Var,
    check_sorts, conj, disj, emp, star, atoms, PURE_ATOMS, variables,
)
from .sexpr import SAtom, SList, read_sexprs

logger = logging.getLogger(__name__)


class QueryMode(Enum):
    SAT = "sat"
    ENTAILMENT = "entailment"


STATUSES = ("sat", "unsat", "unknown")

# Entailment files may state the verdict directly.
_STATUS_ALIASES = {"valid": "unsat", "invalid": "sat"}


@dataclass(frozen=True)
class Query:
    formula: Formula
    mode: QueryMode = QueryMode.SAT
    lhs: Formula | None = None
    rhs: Formula | None = None
    expected_status: str | None = None
    source_name: str = field(default="<input>", compare=False)

    @classmethod
    def entailment(cls, lhs, rhs, expected_status=None, source_name="<input>"):
        return cls(GuardedNot(lhs, rhs), QueryMode.ENTAILMENT, lhs, rhs, expected_status, source_name)

    @property
    def is_entailment(self):
        return self.mode is QueryMode.ENTAILMENT


def _normalize_status(atom):
    text = atom.text.lower()
    text = _STATUS_ALIASES.get(text, text)
    if text not in STATUSES:
        raise ParseError(f"unknown status '{atom.text}'", atom.line, atom.column)
    return text


def _where(node):
    return node.line, node.column


def _symbol(node, what):
    if not isinstance(node, SAtom):
        raise ParseError(f"expected {what}, found a list", *_where(node))
    return node.text


class _NativeReader:
    def __init__(self, source_name):
        self.source_name = source_name
        self.vars = {"nil": NIL}
        self.status = None

    def variable(self, node):
        name = _symbol(node, "a variable")
        if name not in self.vars:
            raise ParseError(f"undeclared variable '{name}'", *_where(node))
        return self.vars[name]

    def declare(self, cmd):
        if len(cmd) != 3:
            raise ParseError("decl-var takes a name and a sort", *_where(cmd))
        name = _symbol(cmd[1], "a variable name")
        sort_text = _symbol(cmd[2], "a sort")
        if name == "nil":
            raise ParseError("nil is a builtin constant", *_where(cmd[1]))
        try:
            sort = Sort(sort_text)
        except ValueError:
            raise ParseError(f"unknown sort '{sort_text}'", *_where(cmd[2])) from None
        known = self.vars.get(name)
        if known is not None and known.sort is not sort:
            raise ParseError(f"variable '{name}' redeclared with sort {sort}", *_where(cmd[1]))
        self.vars[name] = Var(name, sort)

    def formula(self, node):
        if not isinstance(node, SList) or node.head is None:
            raise ParseError("expected a formula", *_where(node))
        head, args = node.head, node.items[1:]

        def arity(n):
            if len(args) != n:
                raise ParseError(f"'{head}' takes {n} arguments, got {len(args)}", *_where(node))

        if head == "=":
            arity(2)
            return Eq(self.variable(args[0]), self.variable(args[1]))
        if head == "distinct":
            arity(2)
            return Neq(self.variable(args[0]), self.variable(args[1]))
        if head == "pto":
            arity(2)
            return self.points_to(node, self.variable(args[0]), args[1])
        if head == "sls":
            arity(2)
            return Sls(*(self.variable(a) for a in args))
        if head == "dls":
            arity(4)
            return Dls(*(self.variable(a) for a in args))
        if head == "nls":
            arity(3)
            return Nls(*(self.variable(a) for a in args))
        if head in ("sep", "and", "or"):
            if not args:
                raise ParseError(f"'{head}' needs at least one operand", *_where(node))
            parts = [self.formula(a) for a in args]
            return {"sep": star, "and": conj, "or": disj}[head](*parts)
        if head == "gneg":
            arity(2)
            return GuardedNot(self.formula(args[0]), self.formula(args[1]))
        raise ParseError(f"unknown connective or atom '{head}'", *_where(node))

    def points_to(self, node, root, record):
        if not isinstance(record, SList) or record.head not in ("c_sls", "c_dls", "c_nls"):
            raise ParseError("points-to target must be a c_sls/c_dls/c_nls record", *_where(record))
        sort = {"c_sls": Sort.SLS, "c_dls": Sort.DLS, "c_nls": Sort.NLS}[record.head]
        shape = RECORD_FIELDS[sort]
        targets = record.items[1:]
        if len(targets) != len(shape):
            raise ParseError(f"{record.head} takes {len(shape)} fields", *_where(record))
        return PointsTo.of(root, **{str(f): self.variable(t) for f, t in zip(shape, targets)})

    def read(self, text):
        sat_parts, entails = [], None
        for cmd in read_sexprs(text):
            if not isinstance(cmd, SList) or cmd.head is None:
                raise ParseError("expected a command", *_where(cmd))
            if cmd.head == "decl-var":
                self.declare(cmd)
            elif cmd.head == "assert":
                if len(cmd) != 2:
                    raise ParseError("assert takes one formula", *_where(cmd))
                sat_parts.append(self.formula(cmd[1]))
            elif cmd.head == "entails":
                if len(cmd) != 3 or entails is not None:
                    raise ParseError("entails takes two formulas and may appear once", *_where(cmd))
                entails = (self.formula(cmd[1]), self.formula(cmd[2]))
            elif cmd.head == "set-info":
                if len(cmd) == 3 and _symbol(cmd[1], "a keyword") == ":status":
                    self.status = _normalize_status(cmd[2])
            elif cmd.head in ("check-sat", "exit"):
                continue
            else:
                raise ParseError(f"unknown command '{cmd.head}'", *_where(cmd))
        if entails is not None and sat_parts:
            raise ParseError("a file holds either assertions or one entailment", 1, 1)
        if entails is not None:
            query = Query.entailment(*entails, expected_status=self.status, source_name=self.source_name)
        elif sat_parts:
            query = Query(conj(*sat_parts), expected_status=self.status, source_name=self.source_name)
        else:
            raise ParseError("no assert or entails command", 1, 1)
        _check_query(query)
        return query


def _check_query(query):
    if query.is_entailment:
        check_sorts(query.lhs)
        check_sorts(query.rhs)
    check_sorts(query.formula)


def parse_native(text, source_name="<input>"):
    query = _NativeReader(source_name).read(text)
    logger.debug(f"Parsed native query from {source_name}: {query.mode.value}")
    return query


def print_native(query):
    """Render a query back to the native dialect (inverse of parse_native)."""
    decls = sorted((v for v in variables(query.formula) if not v.is_nil), key=lambda v: v.name)
    lines = [f"(decl-var {v.name} {v.sort})" for v in decls]
    if query.expected_status is not None:
        lines.append(f"(set-info :status {query.expected_status})")
    if query.is_entailment:
        lines.append(f"(entails {query.lhs} {query.rhs})")
    else:
        lines.append(f"(assert {query.formula})")
    return "\n".join(lines) + "\n"


_SLCOMP_IGNORED = ("set-logic", "check-sat", "get-model", "exit", "set-option", "get-info")
_SLCOMP_UNSUPPORTED = ("wand", "septraction", "exists", "forall", "true", "false")


class _SlcompReader:
    """Reader for QF_SHLS-style files over one location sort and the ls predicate."""

    def __init__(self, source_name):
        self.source_name = source_name
        self.loc_sort = None
        self.record_ctor = None
        self.predicate = None
        self.vars = {"nil": NIL}
        self.status = None

    def variable(self, node):
        if isinstance(node, SList) and node.head == "as" and len(node) == 3 and str(node[1]) == "nil":
            return NIL
        name = _symbol(node, "a variable")
        if name not in self.vars:
            raise ParseError(f"undeclared constant '{name}'", *_where(node))
        return self.vars[name]

    def declare_sort(self, cmd):
        name = _symbol(cmd[1], "a sort name")
        if self.loc_sort is not None and self.loc_sort != name:
            raise UnsupportedFeature(f"second location sort '{name}' (only singly-linked lists)")
        self.loc_sort = name

    def declare_datatypes(self, cmd):
        # (declare-datatypes ((Node 0)) (((c_Node (next Ref)))))
        if cmd.head == "declare-datatype":
            bodies = [cmd[2]]
        else:
            bodies = list(cmd[2])
        for body in bodies:
            ctors = list(body)
            if len(ctors) != 1:
                raise UnsupportedFeature("records with several constructors")
            ctor = ctors[0]
            selectors = ctor.items[1:]
            if len(selectors) != 1:
                raise UnsupportedFeature(f"record {ctor.head} with {len(selectors)} fields")
            field_sort = str(selectors[0][1])
            if field_sort != self.loc_sort:
                raise UnsupportedFeature(f"data field of sort {field_sort}")
            self.record_ctor = ctor.head

    def declare_const(self, cmd):
        name = _symbol(cmd[1], "a constant name")
        sort_node = cmd[-1]
        if str(sort_node) != self.loc_sort:
            raise UnsupportedFeature(f"constant '{name}' of data sort {sort_node}")
        if cmd.head == "declare-fun" and len(cmd[2]) != 0:
            raise UnsupportedFeature(f"uninterpreted function '{name}'")
        self.vars[name] = Var(name, Sort.SLS)

    def define_predicate(self, cmd):
        names = []
        if cmd.head == "define-fun-rec":
            names.append(_symbol(cmd[1], "a predicate name"))
        else:
            names.extend(decl.head for decl in cmd[1])
        for name in names:
            if name != "ls":
                raise UnsupportedFeature(f"user-defined predicate '{name}'")
        self.predicate = "ls"

    def formula(self, node):
        if not isinstance(node, SList):
            if isinstance(node, SAtom) and node.text in _SLCOMP_UNSUPPORTED:
                raise UnsupportedFeature(f"'{node.text}' at line {node.line}")
            raise ParseError("expected a formula", *_where(node))
        head, args = node.head, node.items[1:]
        if head == "_" and args and str(args[0]) == "emp":
            return emp()
        if head in _SLCOMP_UNSUPPORTED:
            raise UnsupportedFeature(f"'{head}' at line {node.line}")
        if head == "=":
            return Eq(self.variable(args[0]), self.variable(args[1]))
        if head == "distinct":
            vs = [self.variable(a) for a in args]
            return star(*(Neq(a, b) for i, a in enumerate(vs) for b in vs[i + 1:]))
        if head == "pto":
            record = args[1]
            if not isinstance(record, SList) or record.head != self.record_ctor or len(record) != 2:
                raise UnsupportedFeature(f"points-to target {record} at line {node.line}")
            return PointsTo.of(self.variable(args[0]), n=self.variable(record[1]))
        if head == self.predicate and head is not None:
            if len(args) != 2:
                raise ParseError("ls takes two arguments", *_where(node))
            return Sls(self.variable(args[0]), self.variable(args[1]))
        if head == "sep":
            return star(*(self.formula(a) for a in args))
        if head == "or":
            return disj(*(self.formula(a) for a in args))
        if head == "and":
            return self.conjunction(args)
        if head == "not":
            raise UnsupportedFeature(f"unguarded negation at line {node.line}")
        raise UnsupportedFeature(f"'{head}' at line {node.line}")

    def conjunction(self, args):
        positive, negated = [], []
        for arg in args:
            if isinstance(arg, SList) and arg.head == "not":
                negated.append(self.formula(arg[1]))
            else:
                positive.append(self.formula(arg))
        if not positive:
            raise UnsupportedFeature("conjunction of negations only")
        # Pure conjuncts of the benchmark format do not constrain the heap.
        pure = [f for f in positive if all(isinstance(a, PURE_ATOMS) for a in atoms(f))]
        spatial = [f for f in positive if f not in pure]
        result = star(conj(*spatial), *pure) if spatial and pure else conj(*positive)
        for neg in negated:
            result = GuardedNot(result, neg)
        return result

    def read(self, text):
        asserts = []
        for cmd in read_sexprs(text):
            if not isinstance(cmd, SList) or cmd.head is None:
                raise ParseError("expected a command", *_where(cmd))
            head = cmd.head
            if head in _SLCOMP_IGNORED:
                continue
            if head == "set-info":
                if len(cmd) == 3 and str(cmd[1]) == ":status":
                    self.status = _normalize_status(cmd[2])
            elif head == "declare-sort":
                self.declare_sort(cmd)
            elif head in ("declare-datatypes", "declare-datatype"):
                self.declare_datatypes(cmd)
            elif head == "declare-heap":
                continue
            elif head in ("declare-const", "declare-fun"):
                self.declare_const(cmd)
            elif head in ("define-fun-rec", "define-funs-rec", "define-fun"):
                self.define_predicate(cmd)
            elif head == "assert":
                asserts.append(cmd[1])
            else:
                raise UnsupportedFeature(f"command '{head}' at line {cmd.line}")
        if not asserts:
            raise ParseError("no assert command", 1, 1)
        last = asserts[-1]
        if len(asserts) >= 2 and isinstance(last, SList) and last.head == "not":
            lhs = self.conjunction(asserts[:-1])
            query = Query.entailment(lhs, self.formula(last[1]), self.status, self.source_name)
        else:
            query = Query(self.conjunction(asserts), expected_status=self.status,
                          source_name=self.source_name)
        _check_query(query)
        return query


def parse_slcomp(text, source_name="<input>"):
    query = _SlcompReader(source_name).read(text)
    logger.debug(f"Parsed SL-COMP query from {source_name}: {query.mode.value}")
    return query


def parse_file(path):
    """Dispatch on the file extension: .smt2 is SL-COMP, anything else native."""
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    name = str(path)
    if name.endswith(".smt2"):
        return parse_slcomp(text, name)
    return parse_native(text, name)
