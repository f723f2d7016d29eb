"""Ground-truth semantics over explicit stack-heap models.

Inductive predicates are decided by their closed-form path conditions, star
by combining exact footprint sets. The module also holds the bounded model
enumerator and the chunk decomposition / reduction used to cross-check the
small-model bounds.
"""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from functools import total_ordering

from .errors import BudgetTooLarge, NotPositive, UnboundVariable
from .formula import (
    NIL, RECORD_FIELDS, SORT_ORDER, And, Dls, Eq, Field, GuardedNot, Neq, Nls, Or, PointsTo, Sls,
    Sort, Star, atom_vars, atoms, variables,
)

logger = logging.getLogger(__name__)

_SORT_RANK = {None: 0, Sort.SLS: 1, Sort.DLS: 2, Sort.NLS: 3}


@total_ordering
@dataclass(frozen=True)
class Location:
    sort: Sort | None
    index: int

    @property
    def is_nil(self):
        return self.sort is None

    def key(self):
        return (_SORT_RANK[self.sort], self.index)

    def __lt__(self, other):
        return self.key() < other.key()

    def __str__(self):
        return "nil" if self.sort is None else f"{self.sort}{self.index}"

    @classmethod
    def parse(cls, text):
        if text == "nil":
            return LOC_NIL
        return cls(Sort(text[0]), int(text[1:]))


LOC_NIL = Location(None, 0)


def universe(budget):
    """nil followed by ``budget[S]`` locations of each sort, in index order."""
    locs = [LOC_NIL]
    for sort in SORT_ORDER:
        locs.extend(Location(sort, i) for i in range(1, budget.get(sort, 0) + 1))
    return locs


@dataclass
class StackHeapModel:
    stack: dict = field(default_factory=dict)
    heap: dict = field(default_factory=dict)

    def __post_init__(self):
        self.stack.setdefault(NIL, LOC_NIL)

    @property
    def dom(self):
        return frozenset(self.heap)

    def succ(self, loc, fld):
        record = self.heap.get(loc)
        if record is None:
            return None
        return record.get(fld)

    def restrict(self, cells):
        return StackHeapModel(dict(self.stack), {loc: self.heap[loc] for loc in cells})

    def locations(self):
        locs = set(self.stack.values()) | set(self.heap)
        for record in self.heap.values():
            locs.update(record.values())
        return locs

    def to_dict(self):
        return {
            "stack": {var.name: str(loc) for var, loc in sorted(self.stack.items())},
            "heap": {str(loc): {str(f): str(t) for f, t in sorted(rec.items(), key=lambda kv: kv[0].value)}
                     for loc, rec in sorted(self.heap.items())},
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)

    def to_dot(self):
        lines = ["digraph model {", "  node [shape=box];"]
        for loc in sorted(self.locations()):
            lines.append(f'  "{loc}";')
        for var, loc in sorted(self.stack.items()):
            lines.append(f'  "var_{var.name}" [label="{var.name}", shape=plaintext];')
            lines.append(f'  "var_{var.name}" -> "{loc}" [style=dashed];')
        for loc, record in sorted(self.heap.items()):
            for fld, target in sorted(record.items(), key=lambda kv: kv[0].value):
                lines.append(f'  "{loc}" -> "{target}" [label="{fld}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _lookup(model, var):
    if var.is_nil:
        return model.stack.get(NIL, LOC_NIL)
    try:
        return model.stack[var]
    except KeyError:
        raise UnboundVariable(f"variable {var} is not in the stack") from None


def _has_shape(model, loc, sort):
    record = model.heap.get(loc)
    return record is not None and loc.sort is sort and set(record) == set(RECORD_FIELDS[sort])


def walk(model, fld, start, stop, sort=None, limit=None):
    """Cells of the acyclic ``fld``-path from ``start`` to ``stop``, or None.

    Every visited cell must be allocated (and of ``sort`` when given); ``stop``
    itself is not part of the result.
    """
    path, seen, cur = [], set(), start
    while cur != stop:
        if cur in seen or cur not in model.heap:
            return None
        if sort is not None and not _has_shape(model, cur, sort):
            return None
        if limit is not None and len(path) >= limit:
            return None
        path.append(cur)
        seen.add(cur)
        cur = model.heap[cur].get(fld)
        if cur is None:
            return None
    return path


def path_length(model, fld, src, dst):
    path = walk(model, fld, _lookup(model, src), _lookup(model, dst))
    return None if path is None else len(path)


def _sls_footprint(model, x, y):
    path = walk(model, Field.N, x, y, Sort.SLS)
    return None if path is None else frozenset(path)


def _dls_footprints(model, x, y, x2, y2):
    found = set()
    if x == y and x2 == y2:
        found.add(frozenset())
    if x == y or x2 == y2:
        return found
    path = walk(model, Field.N, x, y, Sort.DLS)
    if not path:
        return found
    cells = frozenset(path)
    if path[-1] != x2 or model.heap[x].get(Field.P) != y2 or y2 in cells:
        return found
    for loc in path[:-1]:
        nxt = model.heap[loc][Field.N]
        if model.succ(nxt, Field.P) != loc:
            return found
    found.add(cells)
    return found


def _nls_footprint(model, x, y, z):
    top = walk(model, Field.T, x, y, Sort.NLS)
    if top is None:
        return None
    cells = set(top)
    succ_of = {}
    for loc in top:
        inner = walk(model, Field.N, model.heap[loc][Field.N], z, Sort.SLS)
        if inner is None:
            return None
        cells.update(inner)
        succ_of[loc] = model.heap[loc][Field.N]
        for cell in inner:
            succ_of[cell] = model.heap[cell][Field.N]
    # Inner lists may only share their common sink.
    for a, b in itertools.combinations(sorted(succ_of), 2):
        if succ_of[a] == succ_of[b] and succ_of[a] in cells:
            return None
    return frozenset(cells)


def atom_footprints(model, atom):
    """Exact set of footprints of a single atom in ``model``."""
    if isinstance(atom, (Eq, Neq)):
        a, b = _lookup(model, atom.left), _lookup(model, atom.right)
        holds = (a == b) if isinstance(atom, Eq) else (a != b)
        return {frozenset()} if holds else set()
    if isinstance(atom, PointsTo):
        root = _lookup(model, atom.root)
        record = model.heap.get(root)
        if record is None or set(record) != {f for f, _ in atom.fields}:
            return set()
        if all(record[f] == _lookup(model, v) for f, v in atom.fields):
            return {frozenset([root])}
        return set()
    args = [_lookup(model, v) for v in atom_vars(atom)]
    if isinstance(atom, Sls):
        cells = _sls_footprint(model, *args)
    elif isinstance(atom, Dls):
        return _dls_footprints(model, *args)
    elif isinstance(atom, Nls):
        cells = _nls_footprint(model, *args)
    else:
        raise TypeError(f"not an atom: {atom!r}")
    return set() if cells is None else {cells}


def footprints(model, phi):
    """All F subset of dom(h) with (s, h|F) |= phi, computed structurally."""
    if isinstance(phi, Star):
        left, right = footprints(model, phi.left), footprints(model, phi.right)
        return {a | b for a in left for b in right if not a & b}
    if isinstance(phi, And):
        return footprints(model, phi.left) & footprints(model, phi.right)
    if isinstance(phi, Or):
        return footprints(model, phi.left) | footprints(model, phi.right)
    if isinstance(phi, GuardedNot):
        return footprints(model, phi.guard) - footprints(model, phi.negated)
    return atom_footprints(model, phi)


def _check_bound(model, phi):
    for atom in atoms(phi):
        for var in atom_vars(atom):
            _lookup(model, var)


def evaluate(model, phi):
    _check_bound(model, phi)
    return model.dom in footprints(model, phi)


def footprints_bruteforce(model, phi):
    _check_bound(model, phi)
    cells = sorted(model.heap)
    found = set()
    for k in range(len(cells) + 1):
        for subset in itertools.combinations(cells, k):
            if evaluate(model.restrict(subset), phi):
                found.add(frozenset(subset))
    return found


def evaluate_naive(model, phi):
    """Direct semantics: star tries every split of the heap."""
    if isinstance(phi, Star):
        cells = sorted(model.heap)
        for k in range(len(cells) + 1):
            for part in itertools.combinations(cells, k):
                rest = [c for c in cells if c not in part]
                if evaluate_naive(model.restrict(part), phi.left) and \
                        evaluate_naive(model.restrict(rest), phi.right):
                    return True
        return False
    if isinstance(phi, And):
        return evaluate_naive(model, phi.left) and evaluate_naive(model, phi.right)
    if isinstance(phi, Or):
        return evaluate_naive(model, phi.left) or evaluate_naive(model, phi.right)
    if isinstance(phi, GuardedNot):
        return evaluate_naive(model, phi.guard) and not evaluate_naive(model, phi.negated)
    return model.dom in atom_footprints(model, phi)


# Enumeration

def _canonical_stacks(var_list, budget):
    """Stacks up to renaming of locations within a sort, in enumeration order."""
    def extend(i, stack, used):
        if i == len(var_list):
            yield dict(stack)
            return
        var = var_list[i]
        options = [LOC_NIL] + [Location(var.sort, k) for k in range(1, used[var.sort] + 1)]
        if used[var.sort] < budget.get(var.sort, 0):
            options.append(Location(var.sort, used[var.sort] + 1))
        for loc in options:
            stack[var] = loc
            fresh = loc.index > used[var.sort]
            if fresh:
                used[var.sort] += 1
            yield from extend(i + 1, stack, used)
            if fresh:
                used[var.sort] -= 1
        del stack[var]

    yield from extend(0, {NIL: LOC_NIL}, {s: 0 for s in SORT_ORDER})


def _fill(domain, fresh_needed, spare, anchors):
    """Records for ``domain`` plus exactly ``fresh_needed`` unlabelled cells.

    Unlabelled cells are only introduced when a field first points to them,
    in index order per sort, so each heap is produced once up to renaming.
    """
    heap = {loc: {} for loc in domain}
    order = list(domain)
    introduced = []
    used = {sort: 0 for sort in SORT_ORDER}

    def go(ci, fi):
        if ci == len(order):
            if len(introduced) == fresh_needed:
                yield {loc: dict(rec) for loc, rec in heap.items()}
            return
        cell = order[ci]
        fields = RECORD_FIELDS[cell.sort]
        if fi == len(fields):
            yield from go(ci + 1, 0)
            return
        fld = fields[fi]
        for target in anchors + introduced:
            heap[cell][fld] = target
            yield from go(ci, fi + 1)
        if len(introduced) < fresh_needed:
            for sort in SORT_ORDER:
                if used[sort] >= len(spare[sort]):
                    continue
                new = spare[sort][used[sort]]
                used[sort] += 1
                introduced.append(new)
                order.append(new)
                heap[new] = {}
                heap[cell][fld] = new
                yield from go(ci, fi + 1)
                del heap[new]
                order.pop()
                introduced.pop()
                used[sort] -= 1
        heap[cell].pop(fld, None)

    yield from go(0, 0)


def _heaps(stack, budget):
    """Heaps over the budget whose unlabelled cells hang off labelled ones, smallest first."""
    labelled = sorted({loc for loc in stack.values() if not loc.is_nil})
    spare = {}
    for sort in SORT_ORDER:
        taken = {loc.index for loc in labelled if loc.sort is sort}
        spare[sort] = [Location(sort, i) for i in range(1, budget.get(sort, 0) + 1) if i not in taken]
    anchors = sorted(set(stack.values()))
    max_fresh = sum(len(cells) for cells in spare.values())
    for size in range(len(labelled) + max_fresh + 1):
        for k in range(min(size, len(labelled)), 0 if size else -1, -1):
            fresh = size - k
            if fresh > max_fresh:
                continue
            for chosen in itertools.combinations(labelled, k):
                yield from _fill(list(chosen), fresh, spare, anchors)


def enumerate_models(phi, budget=None, max_universe=7):
    """Yield every model of phi over the budgeted universe (up to renaming)."""
    if budget is None:
        from .bounds import location_bounds
        budget = location_bounds(phi).per_sort
    size = 1 + sum(budget.values())
    if size > max_universe:
        raise BudgetTooLarge(f"universe of {size} locations exceeds the cap of {max_universe}")
    var_list = sorted((v for v in variables(phi) if not v.is_nil), key=lambda v: v.name)
    for stack in _canonical_stacks(var_list, budget):
        for heap in _heaps(stack, budget):
            model = StackHeapModel(dict(stack), heap)
            if evaluate(model, phi):
                yield model


def enumerate_model(phi, budget=None, max_universe=7):
    """First model of phi in enumeration order, or None when none exists."""
    for model in enumerate_models(phi, budget, max_universe):
        logger.debug(f"Oracle witness for {phi}: {model.to_dict()}")
        return model
    return None


# Chunks and reduction

@dataclass(frozen=True)
class Chunk:
    kind: str
    cells: frozenset
    params: tuple


def _prefixes(model, root, fld, sort, labelled):
    """Proper prefixes of the ``fld``-walk from root that end before a labelled location."""
    path, cur = [], root
    while cur in model.heap and _has_shape(model, cur, sort) and cur not in path:
        path.append(cur)
        cur = model.heap[cur][fld]
        if cur in labelled:
            yield list(path), cur


def _atom_candidates(model, labelled):
    found = []
    for root in sorted(labelled & model.dom):
        record = model.heap[root]
        if all(t in labelled for t in record.values()):
            found.append(Chunk("pointer", frozenset([root]), (root,) + tuple(
                record[f] for f in sorted(record, key=lambda f: f.value))))
        sort = root.sort
        if sort is Sort.SLS:
            for path, sink in _prefixes(model, root, Field.N, sort, labelled):
                if len(path) >= 2 and sink not in path:
                    found.append(Chunk("sls", frozenset(path), (root, sink)))
        elif sort is Sort.DLS:
            for path, sink in _prefixes(model, root, Field.N, sort, labelled):
                cells = frozenset(path)
                back = record[Field.P]
                if len(path) < 3 or sink in cells or path[-1] not in labelled:
                    continue
                if back not in labelled or back in cells:
                    continue
                if all(model.heap[path[i + 1]][Field.P] == path[i] for i in range(len(path) - 1)):
                    found.append(Chunk("dls", cells, (root, sink, path[-1], back)))
        elif sort is Sort.NLS:
            for top, sink in _prefixes(model, root, Field.T, sort, labelled):
                if sink in top:
                    continue
                for z in sorted(labelled):
                    cells = _nls_footprint(model, root, sink, z)
                    if cells is None or (len(cells) == 1 and model.heap[root][Field.N] == z):
                        continue
                    found.append(Chunk("nls", cells, (root, sink, z)))
    return found


def chunks(model):
    """Decompose a positive model into its maximal atomic sub-heaps."""
    if len(model.heap) > 12:
        raise BudgetTooLarge(f"chunk decomposition limited to 12 cells, got {len(model.heap)}")
    labelled = frozenset(model.stack.values())
    for loc, record in model.heap.items():
        if loc.is_nil or set(record) != set(RECORD_FIELDS[loc.sort]):
            raise NotPositive(f"location {loc} carries a record of the wrong shape")
        for target in record.values():
            if target not in model.heap and target not in labelled:
                raise NotPositive(f"dangling pointer {loc} -> {target} to an unlabelled location")
    candidates = _atom_candidates(model, labelled)
    order = sorted(model.heap)
    bit = {loc: 1 << i for i, loc in enumerate(order)}

    def mask(cells):
        return sum(bit[c] for c in cells)

    masks = {}
    for cand in candidates:
        masks.setdefault(mask(cand.cells), cand)
    memo = {0: True}

    def positive(m):
        """Whether the cells in m split into atom models."""
        if m not in memo:
            low = m & -m
            memo[m] = any(am & low and am & m == am and positive(m ^ am) for am in masks)
        return memo[m]

    def splittable(m):
        low = m & -m
        return any(am != m and am & low and am & m == am and positive(m ^ am) for am in masks)

    full = mask(order)
    if not positive(full):
        raise NotPositive("heap does not split into atomic models over this stack")
    atomic = [m for m in masks if not splittable(m)]
    maximal = [m for m in atomic if not any(o != m and o & m == m for o in atomic)]
    result = sorted((masks[m] for m in maximal), key=lambda c: sorted(c.cells))
    covered = 0
    for m in maximal:
        if covered & m:
            raise NotPositive("overlapping chunks")
        covered |= m
    if covered != full:
        raise NotPositive("chunks do not cover the heap")
    return result


def reduce_model(model, keep):
    """Shrink every predicate chunk to its canonical minimal shape.

    Only the variables of ``keep`` (and nil) stay on the stack. An sls
    chunk becomes two cells, a dls chunk three. An nls chunk with two or more
    top cells becomes two top cells whose inner lists are empty. A chunk with a
    single top cell cannot lose its inner list: ``x |-> <z, y>`` alone is a
    pointer chunk, not an nls one, so it keeps one inner cell reaching z.
    """
    stack = {var: loc for var, loc in model.stack.items() if var in keep or var.is_nil}
    restricted = StackHeapModel(stack, dict(model.heap))
    heap = {}
    for chunk in chunks(restricted):
        if chunk.kind == "pointer":
            root = chunk.params[0]
            heap[root] = dict(model.heap[root])
        elif chunk.kind == "sls":
            x, y = chunk.params
            mid = model.heap[x][Field.N]
            heap[x] = {Field.N: mid}
            heap[mid] = {Field.N: y}
        elif chunk.kind == "dls":
            x, y, x2, y2 = chunk.params
            mid = model.heap[x][Field.N]
            heap[x] = {Field.N: mid, Field.P: y2}
            heap[mid] = {Field.N: x2, Field.P: x}
            heap[x2] = {Field.N: y, Field.P: mid}
        else:
            x, y, z = chunk.params
            nxt = model.heap[x][Field.T]
            if nxt in chunk.cells:
                heap[x] = {Field.N: z, Field.T: nxt}
                heap[nxt] = {Field.N: z, Field.T: y}
            else:
                # one top cell: keep one inner cell
                inner = model.heap[x][Field.N]
                heap[x] = {Field.N: inner, Field.T: y}
                heap[inner] = {Field.N: z}
    return StackHeapModel(stack, heap)
