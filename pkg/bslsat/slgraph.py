"""SL-graphs: relations that hold in every model of a formula.

A graph records must-equality, must-disequality, must-pointers, must-paths
and path disjointness. All relations are stored closed under must-equality,
so membership tests never have to consult the equivalence classes. The
graph of a formula feeds the tightened location bounds and the per-path
length intervals used by the translation.
"""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property

import networkx as nx
from networkx.utils import UnionFind

from .bounds import chunk_weight, location_bounds
from .formula import (
    NIL, And, Dls, Eq, Field, GuardedNot, Neq, Nls, Or, PointsTo, Sls, Sort, Star, atom_vars,
    variables,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Contradiction:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} is both equal and distinct to {self.right}"


@dataclass(frozen=True)
class PathBound:
    lower: int
    upper: int

    @property
    def is_empty(self):
        return self.lower > self.upper

    def __str__(self):
        return f"[{self.lower},{self.upper}]"


def _nested(fld, source):
    # n-edge of an nls root towards the common sink; may be empty
    return fld is Field.N and source.sort is Sort.NLS


@dataclass(frozen=True)
class SLGraph:
    variables: frozenset = frozenset([NIL])
    eq: frozenset = frozenset()
    diseq: frozenset = frozenset()
    pointers: frozenset = frozenset()
    paths: frozenset = frozenset()
    disjoint: frozenset = frozenset()

    @cached_property
    def _classes(self):
        found = defaultdict(set)
        for a, b in self.eq:
            found[a].add(b)
        return {var: frozenset(found[var] | {var}) for var in self.variables}

    def eq_class(self, var):
        return self._classes.get(var, frozenset([var]))

    def rep(self, var):
        return min(self.eq_class(var))

    def classes(self, among=None):
        among = self.variables if among is None else set(among)
        seen = {}
        for var in sorted(among):
            members = self.eq_class(var)
            seen.setdefault(min(members), members)
        return list(seen.values())

    def must_equal(self, a, b):
        return a == b or (a, b) in self.eq

    def must_differ(self, a, b):
        return (a, b) in self.diseq

    @cached_property
    def _pointer_sources(self):
        return frozenset(x for _, x, _ in self.pointers)

    def is_pointer_source(self, var):
        return var in self._pointer_sources

    def pointer_edges(self, fld):
        return {(a, b) for f, a, b in self.pointers if f is fld}

    def path_edges(self, fld, nested=False):
        return {(a, b) for f, a, b in self.paths if f is fld and (nested or not _nested(f, a))}

    def edges(self, fld, nested=False):
        return self.pointer_edges(fld) | self.path_edges(fld, nested)

    def alloc(self):
        found = {NIL} | set(self._pointer_sources)
        found.update(a for f, a, b in self.paths if not _nested(f, a) and self.must_differ(a, b))
        return found

    @cached_property
    def _disjoint_index(self):
        index = defaultdict(set)
        for f, e1, e2 in self.disjoint:
            index[(f, e2)].add(e1)
        return index

    def disjoint_with(self, fld, edge):
        return self._disjoint_index.get((fld, edge), set())

    def nonempty(self, fld, a, b):
        if (fld, a, b) in self.pointers:
            return True
        return (fld, a, b) in self.paths and self.must_differ(a, b)

    def to_dot(self):
        lines = ["digraph slgraph {"]
        for members in self.classes():
            label = " = ".join(str(v) for v in sorted(members))
            lines.append(f'  "{min(members)}" [label="{label}"];')
        for a, b in sorted({(self.rep(a), self.rep(b)) for a, b in self.diseq}):
            if a < b:
                lines.append(f'  "{a}" -> "{b}" [dir=none, style=dotted, label="!="];')
        for f, a, b in sorted({(f.value, self.rep(a), self.rep(b)) for f, a, b in self.pointers}):
            lines.append(f'  "{a}" -> "{b}" [label="{f}"];')
        for f, a, b in sorted({(f.value, self.rep(a), self.rep(b)) for f, a, b in self.paths}):
            lines.append(f'  "{a}" -> "{b}" [style=dashed, label="{f}*"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _closed(variables, eq=(), diseq=(), pointers=(), paths=(), disjoint=()):
    """Smallest graph containing the given edges with every closure applied."""
    universe = set(variables) | {NIL}
    for a, b in list(eq) + list(diseq):
        universe.update((a, b))
    for _, a, b in list(pointers) + list(paths):
        universe.update((a, b))
    uf = UnionFind(sorted(universe))
    for a, b in eq:
        uf.union(a, b)
    cls = {}
    for group in uf.to_sets():
        members = frozenset(group)
        for var in members:
            cls[var] = members
    return SLGraph(
        variables=frozenset(universe),
        eq=frozenset((a, b) for members in set(cls.values()) for a in members for b in members),
        diseq=frozenset(p for a, b in diseq for a2 in cls[a] for b2 in cls[b]
                        for p in ((a2, b2), (b2, a2))),
        pointers=frozenset((f, a2, b2) for f, a, b in pointers for a2 in cls[a] for b2 in cls[b]),
        paths=frozenset((f, a2, b2) for f, a, b in paths if cls[a] is not cls[b]
                        for a2 in cls[a] for b2 in cls[b]),
        disjoint=frozenset(
            entry
            for f, (a, b), (c, d) in disjoint
            for a2 in cls.get(a, (a,)) for b2 in cls.get(b, (b,))
            for c2 in cls.get(c, (c,)) for d2 in cls.get(d, (d,))
            for entry in ((f, (a2, b2), (c2, d2)), (f, (c2, d2), (a2, b2)))
        ),
    )


def _atom_graph(atom):
    vars_ = atom_vars(atom)
    if isinstance(atom, Eq):
        return _closed(vars_, eq=[(atom.left, atom.right)])
    if isinstance(atom, Neq):
        return _closed(vars_, diseq=[(atom.left, atom.right)])
    if isinstance(atom, PointsTo):
        return _closed(vars_, pointers=[(f, atom.root, t) for f, t in atom.fields])
    if isinstance(atom, Sls):
        return _closed(vars_, paths=[(Field.N, atom.x, atom.y)])
    if isinstance(atom, Dls):
        return _closed(vars_, paths=[(Field.N, atom.x, atom.y), (Field.P, atom.x2, atom.y2)])
    if isinstance(atom, Nls):
        return _closed(vars_, paths=[(Field.N, atom.x, atom.z), (Field.T, atom.x, atom.y)])
    raise TypeError(f"not an atom: {atom!r}")


def join(g1, g2):
    """Component-wise union."""
    return _closed(g1.variables | g2.variables, g1.eq | g2.eq, g1.diseq | g2.diseq,
                   g1.pointers | g2.pointers, g1.paths | g2.paths, g1.disjoint | g2.disjoint)


def meet(g1, g2):
    """Component-wise intersection."""
    return _closed(g1.variables | g2.variables, g1.eq & g2.eq, g1.diseq & g2.diseq,
                   g1.pointers & g2.pointers, g1.paths & g2.paths, g1.disjoint & g2.disjoint)


def disjoint_union(g1, g2):
    diseq = {(x, y) for x in g1.alloc() for y in g2.alloc() if not (x.is_nil and y.is_nil)}
    disjoint = {(f, e1, e2) for f in Field
                for e1 in g1.edges(f, nested=True) for e2 in g2.edges(f, nested=True)}
    return _closed(g1.variables | g2.variables, g1.eq | g2.eq, g1.diseq | g2.diseq | diseq,
                   g1.pointers | g2.pointers, g1.paths | g2.paths,
                   g1.disjoint | g2.disjoint | disjoint)


def _build(phi):
    if isinstance(phi, Star):
        return disjoint_union(_build(phi.left), _build(phi.right))
    if isinstance(phi, And):
        return join(_build(phi.left), _build(phi.right))
    if isinstance(phi, Or):
        return meet(_build(phi.left), _build(phi.right))
    if isinstance(phi, GuardedNot):
        return _build(phi.guard)
    return _atom_graph(phi)


def build(phi):
    g = _build(phi)
    missing = variables(phi) - g.variables
    if missing:
        g = join(g, _closed(missing))
    return g


def saturate(g):
    """Close ``g`` under pointer matching; a Contradiction when unsatisfiable."""
    while True:
        targets = defaultdict(set)
        for f, a, b in g.pointers:
            targets[(f, g.rep(a))].add(b)
        merges = []
        for found in targets.values():
            first = min(found)
            merges.extend((first, other) for other in found if not g.must_equal(first, other))
        if not merges:
            break
        logger.debug(f"Pointer matching merges {len(merges)} pairs")
        g = _closed(g.variables, g.eq | set(merges), g.diseq, g.pointers, g.paths, g.disjoint)
    for a, b in sorted(g.diseq):
        if g.must_equal(a, b):
            return Contradiction(a, b)
    return g


# Path bounds

def initial_bounds(g, phi, fld, profile=None):
    """Bounds on every pointer and path edge of field ``fld`` in isolation."""
    if profile is None:
        profile = location_bounds(phi, g)
    found = {}

    def put(edge, bound):
        old = found.get(edge)
        if old is not None:
            bound = PathBound(max(old.lower, bound.lower), min(old.upper, bound.upper))
        found[edge] = bound

    for edge in g.pointer_edges(fld):
        put(edge, PathBound(1, 1))
    edge_set = g.edges(fld)
    for a, b in g.path_edges(fld):
        if any(v.is_nil for v in g.eq_class(a)):
            put((a, b), PathBound(0, 0))
            continue
        lower = 1 if g.must_differ(a, b) else 0
        charged = {}
        for v, u in g.disjoint_with(fld, (a, b)):
            rep = g.rep(v)
            if v.sort is a.sort and rep != g.rep(a) and (v, u) in edge_set:
                charged[rep] = chunk_weight(rep, g)
        upper = max(0, math.ceil(profile[a.sort] - sum(charged.values())))
        put((a, b), PathBound(lower, upper))
    return found


def _longest_from(graph, source, cap):
    if source not in graph:
        return 0
    sub = graph.subgraph(nx.descendants(graph, source) | {source})
    cond = nx.condensation(sub)
    mapping = cond.graph["mapping"]
    cross = defaultdict(int)
    for u, v, w in sub.edges(data="weight"):
        cu, cv = mapping[u], mapping[v]
        if cu == cv:
            if w > 0:
                # a positive cycle: the sink is never reached
                return cap
        else:
            cross[(cu, cv)] = max(cross[(cu, cv)], w)
    best = {}
    for comp in reversed(list(nx.topological_sort(cond))):
        best[comp] = max((w + best[cv] for (cu, cv), w in cross.items() if cu == comp), default=0)
    return min(best[mapping[source]], cap)


def path_bound(g, phi, fld, x, y, profile=None):
    """Interval containing the length of every ``fld``-path from x to y."""
    if profile is None:
        profile = location_bounds(phi, g)
    if x.is_nil or any(v.is_nil for v in g.eq_class(x)) or g.must_equal(x, y):
        return PathBound(0, 0)
    cap = profile[x.sort]
    initial = initial_bounds(g, phi, fld, profile)
    upper_graph, lower_graph = nx.DiGraph(), nx.DiGraph()
    pointers = g.pointer_edges(fld)
    for (a, b), bound in initial.items():
        ra, rb = g.rep(a), g.rep(b)
        if upper_graph.has_edge(ra, rb):
            upper_graph[ra][rb]["weight"] = min(upper_graph[ra][rb]["weight"], bound.upper)
        else:
            upper_graph.add_edge(ra, rb, weight=bound.upper)
        if (a, b) in pointers:
            if not g.must_differ(a, y):
                continue
        elif not any(g.nonempty(fld, v, w) for v, w in g.disjoint_with(fld, (a, b))
                     if g.must_equal(v, y)):
            continue
        weight = max(bound.lower, lower_graph[ra][rb]["weight"]) if lower_graph.has_edge(ra, rb) \
            else bound.lower
        lower_graph.add_edge(ra, rb, weight=weight)
    try:
        upper = nx.shortest_path_length(upper_graph, g.rep(x), g.rep(y), weight="weight")
    except (nx.NetworkXNoPath, nx.NodeNotFound):
        upper = cap
    result = PathBound(min(_longest_from(lower_graph, g.rep(x), cap), cap), min(upper, cap))
    logger.debug(f"Path bound {fld}:{x}->{y} = {result}")
    return result
