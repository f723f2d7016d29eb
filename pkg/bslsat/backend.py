"""SMT-LIB 2 rendering of translated scripts and the external solver driver.

Two encodings are supported. ``sets`` declares locations as a datatype and
location sets in the solver's set theory (z3 array sets or cvc5 ``set.*``).
``bitvectors`` represents a location by its index and a set by a bit mask,
which only needs arrays and bitvectors from the backend.
"""
from __future__ import annotations

import itertools
import logging
import os
import re
import subprocess
import time
from dataclasses import dataclass, field
from enum import Enum

from .errors import MalformedModel, SolverCrash, SolverTimeout, UnsupportedTerm
from .formula import SORT_ORDER, Field
from .helpers import write_text
from .sexpr import SAtom, SList, read_sexprs
from .smt_terms import ARRAY, LOC, SET, App, BoolConst, LocConst, Quantifier, Symbol
from .translator import DOMAIN, HEAP_ARRAYS, SORT_SETS, var_symbol

logger = logging.getLogger(__name__)

DEFAULT_SOLVER_ARGS = {
    "z3": ["-in", "-smt2"],
    "cvc5": ["--lang", "smt2"],
    "bitwuzla": [],
}

STATUSES = ("sat", "unsat", "unknown")

_SIMPLE_SYMBOL = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
_RESERVED = {"and", "or", "not", "ite", "let", "forall", "exists", "true", "false", "select",
             "store", "as", "nil", "distinct"}


class Encoding(Enum):
    SETS = "sets"
    BITVECTORS = "bitvectors"

    def __str__(self):
        return self.value


@dataclass
class SolverVerdict:
    status: str
    model: dict | None = None
    raw: list = field(default_factory=list)
    reason: str = ""
    stderr: str = ""
    elapsed: float = 0.0


def solver_name(command):
    return os.path.basename(command or "").lower()


def default_args(command):
    name = solver_name(command)
    for known, args in DEFAULT_SOLVER_ARGS.items():
        if name.startswith(known):
            return list(args)
    return []


def resolve_dialect(command, dialect="auto"):
    if dialect != "auto":
        return dialect
    return "cvc5" if solver_name(command).startswith("cvc5") else "z3"


def _quote(name):
    if _SIMPLE_SYMBOL.fullmatch(name) and name not in _RESERVED:
        return name
    return f"|{name}|"


def model_requests(script):
    """Terms whose values rebuild the stack-heap model, in get-value order."""
    requests = [("var", var, var_symbol(var)) for var in script.constants]
    for loc in script.locations:
        for fld in Field:
            requests.append(("heap", (fld, loc), App("select", (HEAP_ARRAYS[fld], LocConst(loc)), LOC)))
    for symbol in [DOMAIN] + [SORT_SETS[sort] for sort in SORT_ORDER]:
        for loc in script.locations:
            requests.append(("set", (symbol.name, loc), App("member", (LocConst(loc), symbol))))
    return requests


class Renderer:
    def __init__(self, locations, encoding=Encoding.BITVECTORS, dialect="z3", width=None):
        self.locations = list(locations)
        self.encoding = Encoding(encoding)
        self.dialect = dialect
        self.index = {loc: i for i, loc in enumerate(self.locations)}
        self.width = max(width or len(self.locations), len(self.locations), 1)
        self.memo = {}
        self.env = {}
        self.env_key = ()

    @property
    def bitvectors(self):
        return self.encoding is Encoding.BITVECTORS

    def bv(self, value):
        return f"(_ bv{value} {self.width})"

    def sort_name(self, sort):
        if self.bitvectors:
            word = f"(_ BitVec {self.width})"
            return f"(Array {word} {word})" if sort == ARRAY else word
        if sort == LOC:
            return "Loc"
        if sort == SET:
            return "(Set Loc)" if self.dialect == "cvc5" else "(Array Loc Bool)"
        if sort == ARRAY:
            return "(Array Loc Loc)"
        return sort

    def empty_set(self):
        if self.bitvectors:
            return self.bv(0)
        if self.dialect == "cvc5":
            return "(as set.empty (Set Loc))"
        return "((as const (Array Loc Bool)) false)"

    def location(self, loc):
        if self.bitvectors:
            return self.bv(self.index[loc])
        return f"loc_{loc}"

    def _fold(self, op, args):
        result = args[0]
        for arg in args[1:]:
            result = f"({op} {result} {arg})"
        return result

    def _singleton(self, x):
        if self.bitvectors:
            return f"(bvshl {self.bv(1)} {x})"
        if self.dialect == "cvc5":
            return f"(set.singleton {x})"
        return f"(store {self.empty_set()} {x} true)"

    def _set_op(self, op, args):
        if self.bitvectors:
            table = {"union": "bvor", "inter": "bvand"}
            if op in table:
                return self._fold(table[op], args)
            if op == "diff":
                return f"(bvand {args[0]} (bvnot {args[1]}))"
            if op == "subset":
                return f"(= (bvor (bvnot {args[0]}) {args[1]}) (bvnot {self.bv(0)}))"
            if op == "member":
                return f"(not (= (bvand {self._singleton(args[0])} {args[1]}) {self.bv(0)}))"
        elif self.dialect == "cvc5":
            table = {"union": "set.union", "inter": "set.inter", "diff": "set.minus",
                     "subset": "set.subset", "member": "set.member"}
            if op in ("union", "inter"):
                return self._fold(table[op], args)
            return f"({table[op]} {args[0]} {args[1]})"
        else:
            if op == "union":
                return self._fold("(_ map or)", args)
            if op == "inter":
                return self._fold("(_ map and)", args)
            if op == "diff":
                return f"((_ map and) {args[0]} ((_ map not) {args[1]}))"
            if op == "subset":
                return f"(= ((_ map or) {args[0]} {args[1]}) {args[1]})"
            if op == "member":
                return f"(select {args[1]} {args[0]})"
        raise UnsupportedTerm(f"no rendering for set operation {op}")

    def _set_literal(self, consts):
        if self.bitvectors:
            return self.bv(sum(1 << self.index[c.location] for c in consts))
        if self.dialect == "cvc5":
            names = [self.location(c.location) for c in consts]
            if len(names) == 1:
                return f"(set.singleton {names[0]})"
            return f"(set.insert {' '.join(names[:-1])} (set.singleton {names[-1]}))"
        result = self.empty_set()
        for c in consts:
            result = f"(store {result} {self.location(c.location)} true)"
        return result

    def term(self, t):
        key = (id(t), self.env_key)
        cached = self.memo.get(key)
        if cached is not None:
            return cached[1]
        text = self._render(t)
        self.memo[key] = (t, text)
        return text

    def _bind(self, env):
        self.env = env
        self.env_key = tuple(sorted(env.items()))

    def _quantifier(self, kind, bound, body):
        if not bound:
            return body
        binders = " ".join(f"({_quote(v.name)} {self.sort_name(v.sort)})" for v in bound)
        return f"({kind} ({binders}) {body})"

    def _expand(self, t):
        """Location binders unfolded over the finite Loc datatype; set binders are kept."""
        locs = [v for v in t.bound if v.sort == LOC]
        rest = [v for v in t.bound if v.sort != LOC]
        if not locs:
            return self._quantifier(t.kind, rest, self.term(t.body))
        saved = self.env
        parts = []
        for values in itertools.product(self.locations, repeat=len(locs)):
            self._bind({**saved, **{v.name: self.location(loc) for v, loc in zip(locs, values)}})
            parts.append(self.term(t.body))
        self._bind(saved)
        body = parts[0] if len(parts) == 1 else f"({'and' if t.kind == 'forall' else 'or'} {' '.join(parts)})"
        return self._quantifier(t.kind, rest, body)

    def _render(self, t):
        if isinstance(t, Symbol):
            if t.name in self.env:
                return self.env[t.name]
            return _quote(t.name)
        if isinstance(t, LocConst):
            if t.location not in self.index:
                raise UnsupportedTerm(f"location {t.location} is outside the universe")
            return self.location(t.location)
        if isinstance(t, BoolConst):
            return str(t)
        if isinstance(t, Quantifier):
            if not self.bitvectors:
                return self._expand(t)
            return self._quantifier(t.kind, t.bound, self.term(t.body))
        if not isinstance(t, App):
            raise UnsupportedTerm(f"cannot render {t!r}")
        if t.op == "empty":
            return self.empty_set()
        if t.op == "setlit":
            return self._set_literal(t.args)
        args = [self.term(a) for a in t.args]
        if t.op == "singleton":
            return self._singleton(args[0])
        if t.op in ("union", "inter", "diff", "subset", "member"):
            return self._set_op(t.op, args)
        if t.op in ("and", "or", "not", "=>", "=", "ite", "select"):
            return f"({t.op} {' '.join(args)})"
        raise UnsupportedTerm(f"no rendering for operator {t.op}")

    def heap_axioms(self):
        """Keep variables, heap images and the domain inside the location universe."""
        limit = self.bv(len(self.locations))
        lines = []
        for loc in self.locations:
            for fld in Field:
                lines.append(f"(assert (bvult (select {HEAP_ARRAYS[fld].name} {self.location(loc)}) {limit}))")
        mask = self.bv((1 << len(self.locations)) - 1)
        lines.append(f"(assert (= (bvand {DOMAIN.name} (bvnot {mask})) {self.bv(0)}))")
        return lines


def render(script, encoding=Encoding.BITVECTORS, dialect="z3", with_model=True):
    """SMT-LIB 2 text asserting ``script``, optionally followed by model queries."""
    encoding = Encoding(encoding)
    width = script.profile.total if encoding is Encoding.BITVECTORS else None
    r = Renderer(script.locations, encoding, dialect, width)
    quantified = script.quantified
    if r.bitvectors:
        logic = "ABV" if quantified else "QF_ABV"
    else:
        logic = "ALL"
    lines = ["(set-option :produce-models true)", f"(set-logic {logic})"]
    if not r.bitvectors:
        ctors = " ".join(f"({r.location(loc)})" for loc in script.locations)
        lines.append(f"(declare-datatypes ((Loc 0)) (({ctors})))")
    for var in script.constants:
        lines.append(f"(declare-const {_quote(var_symbol(var).name)} {r.sort_name(LOC)})")
    for fld in Field:
        lines.append(f"(declare-const {HEAP_ARRAYS[fld].name} {r.sort_name(ARRAY)})")
    for symbol in [DOMAIN] + [SORT_SETS[sort] for sort in SORT_ORDER]:
        lines.append(f"(declare-const {symbol.name} {r.sort_name(SET)})")
    if r.bitvectors:
        limit = r.bv(len(script.locations))
        lines.extend(f"(assert (bvult {_quote(var_symbol(var).name)} {limit}))" for var in script.constants)
        lines.extend(r.heap_axioms())
    lines.append(f"(assert {r.term(script.assertion)})")
    lines.append("(check-sat)")
    if with_model:
        queries = " ".join(r.term(term) for _, _, term in model_requests(script))
        lines.append(f"(get-value ({queries}))")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"


def _call_process(text, command, args, timeout):
    try:
        return subprocess.run([command] + list(args), input=text, capture_output=True, text=True,
                              timeout=timeout)
    except subprocess.TimeoutExpired as e:
        raise SolverTimeout(f"{command} exceeded {timeout}s") from e
    except OSError as e:
        raise SolverCrash(f"cannot start solver {command}: {e}") from e


def _is_value_list(node):
    return isinstance(node, SList) and len(node) > 0 and all(
        isinstance(item, SList) and len(item) == 2 for item in node.items)


def run_solver(text, config):
    """Run the configured solver on ``text`` and collect its verdict and raw values."""
    command = config.solver_command
    if not command:
        raise SolverCrash("no SMT solver configured (set BSL_SOLVER or --solver)")
    args = config.solver_args if config.solver_args else default_args(command)
    start = time.time()
    try:
        proc = _call_process(text, command, args, config.timeout)
    except SolverTimeout as e:
        logger.warning(f"Solver timeout: {e}")
        return SolverVerdict("unknown", reason="timeout", elapsed=time.time() - start)
    elapsed = time.time() - start
    nodes = read_sexprs(proc.stdout)
    status = next((n.text for n in nodes if isinstance(n, SAtom) and n.text in STATUSES), None)
    if status is None:
        raise SolverCrash(f"{solver_name(command)} returned no verdict (exit {proc.returncode})",
                          proc.returncode, proc.stderr)
    for node in nodes:
        if isinstance(node, SList) and node.head == "error" and status != "unsat":
            logger.warning(f"Solver reported {node}")
    raw = []
    if status == "sat":
        for node in nodes:
            if _is_value_list(node):
                raw.extend((pair[0], pair[1]) for pair in node.items)
    if proc.stderr.strip():
        logger.warning(f"Solver stderr: {proc.stderr.strip()[:200]}")
    logger.info(f"{solver_name(command)} answered {status} in {elapsed:.3f}s")
    return SolverVerdict(status, raw=raw, stderr=proc.stderr, elapsed=elapsed)


def _bitvector_value(node):
    text = str(node)
    if text.startswith("#b"):
        return int(text[2:], 2)
    if text.startswith("#x"):
        return int(text[2:], 16)
    if isinstance(node, SList) and len(node) == 3 and str(node[0]) == "_" and str(node[1]).startswith("bv"):
        return int(str(node[1])[2:])
    raise MalformedModel(f"not a bitvector value: {text}")


def decode_model(verdict, script, encoding=Encoding.BITVECTORS):
    """Turn the raw get-value pairs of a sat verdict into a symbol map."""
    encoding = Encoding(encoding)
    requests = model_requests(script)
    if len(verdict.raw) != len(requests):
        raise MalformedModel(f"expected {len(requests)} model values, got {len(verdict.raw)}")
    by_name = {f"loc_{loc}": loc for loc in script.locations}

    def location(node):
        if encoding is Encoding.BITVECTORS:
            index = _bitvector_value(node)
            if index >= len(script.locations):
                raise MalformedModel(f"location index {index} outside the universe")
            return script.locations[index]
        text = str(node)
        if isinstance(node, SList) and node.head == "as":
            text = str(node[1])
        if text not in by_name:
            raise MalformedModel(f"unknown location value {text}")
        return by_name[text]

    model = {f"h_{fld}": {} for fld in Field}
    for name in [DOMAIN.name] + [SORT_SETS[sort].name for sort in SORT_ORDER]:
        model[name] = set()
    for (kind, key, _), (_, value) in zip(requests, verdict.raw):
        if kind == "var":
            model[key.name] = location(value)
        elif kind == "heap":
            fld, loc = key
            model[f"h_{fld}"][loc] = location(value)
        else:
            name, loc = key
            if str(value) not in ("true", "false"):
                raise MalformedModel(f"not a boolean: {value}")
            if str(value) == "true":
                model[name].add(loc)
    for name in [DOMAIN.name] + [SORT_SETS[sort].name for sort in SORT_ORDER]:
        model[name] = frozenset(model[name])
    verdict.model = model
    return model


def check_script(script, config, encoding=None, dialect=None, dump_to=None):
    """Render, run and decode in one step."""
    encoding = Encoding(encoding or config.encoding)
    dialect = dialect or resolve_dialect(config.solver_command, config.set_dialect)
    text = render(script, encoding, dialect)
    if dump_to:
        write_text(dump_to, text)
        logger.info(f"SMT script written to {dump_to}")
    verdict = run_solver(text, config)
    if verdict.status == "sat":
        decode_model(verdict, script, encoding)
    return verdict

