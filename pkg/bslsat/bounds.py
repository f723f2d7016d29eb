"""Small-model location bounds.

Each variable contributes the size of the largest reduced chunk it can root:
two cells for sls/nls roots, one and a half for dls roots (a reduced dls
chunk of three cells needs two labelled locations), nothing for nil. With
an SL-graph the contribution is charged once per must-equality class and
drops to one cell for must-pointer sources.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .formula import SORT_ORDER, Sort, variables

logger = logging.getLogger(__name__)

SORT_WEIGHTS = {
    Sort.SLS: Fraction(2),
    Sort.DLS: Fraction(3, 2),
    Sort.NLS: Fraction(2),
}


@dataclass(frozen=True)
class BoundProfile:
    per_sort: dict = field(default_factory=dict)
    total: int = 1

    def __getitem__(self, sort):
        return self.per_sort.get(sort, 0)

    @property
    def universe_size(self):
        return 1 + sum(self.per_sort.values())

    def to_dict(self):
        return {"per_sort": {str(s): self[s] for s in SORT_ORDER}, "total": self.total}


def _class_sort(members):
    sorts = {v.sort for v in members if not v.is_nil}
    if any(v.is_nil for v in members) or len(sorts) != 1:
        return None
    return sorts.pop()


def chunk_weight(x, graph=None):
    """Contribution of ``x`` (or of its must-equality class) to the bound."""
    if graph is None:
        return Fraction(0) if x.is_nil else SORT_WEIGHTS[x.sort]
    members = graph.eq_class(x)
    sort = _class_sort(members)
    if sort is None:
        return Fraction(0)
    if any(graph.is_pointer_source(v) for v in members):
        return Fraction(1)
    return SORT_WEIGHTS[sort]


def location_bounds(phi, graph=None):
    """Per-sort bounds and the total bound (nil included) of ``phi``."""
    sums = {sort: Fraction(0) for sort in SORT_ORDER}
    if graph is None:
        for var in variables(phi):
            if not var.is_nil:
                sums[var.sort] += chunk_weight(var)
    else:
        for members in graph.classes(variables(phi)):
            sort = _class_sort(members)
            if sort is not None:
                sums[sort] += chunk_weight(min(members), graph)
    per_sort = {sort: math.floor(value) for sort, value in sums.items()}
    profile = BoundProfile(per_sort, 1 + math.floor(sum(sums.values())))
    logger.debug(f"Location bounds {profile.to_dict()}")
    return profile
