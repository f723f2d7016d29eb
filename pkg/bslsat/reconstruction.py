"""Rebuilding stack-heap models from solver models."""
from __future__ import annotations

import logging

from .errors import MalformedModel
from .formula import NIL, RECORD_FIELDS, SORT_ORDER, variables
from .semantics import LOC_NIL, Location, StackHeapModel, evaluate

logger = logging.getLogger(__name__)


def inverse_translate(model, phi):
    """Stack from the variable constants, heap on D with records shaped by the sort sets.

    ``model`` is a decoded symbol map (or a verdict carrying one).
    """
    model = getattr(model, "model", model)
    if model is None:
        raise MalformedModel("verdict carries no model")
    stack = {NIL: LOC_NIL}
    for var in variables(phi):
        if var.is_nil:
            continue
        try:
            stack[var] = model[var.name]
        except KeyError:
            raise MalformedModel(f"no value for variable {var}") from None
    heap = {}
    for loc in sorted(model["D"]):
        sorts = [sort for sort in SORT_ORDER if loc in model[f"D_{sort}"]]
        if len(sorts) != 1:
            raise MalformedModel(f"allocated location {loc} belongs to {len(sorts)} sort sets")
        heap[loc] = {fld: model[f"h_{fld}"].get(loc, LOC_NIL) for fld in RECORD_FIELDS[sorts[0]]}
    return StackHeapModel(stack, heap)


def verify_model(m, phi):
    holds = evaluate(m, phi)
    if not holds:
        logger.error(f"Reconstructed model does not satisfy {phi}: {m.to_dict()}")
    return holds


def extend_countermodel(m, lhs, rhs):
    """Map the rhs-only variables of an lhs model to fresh unallocated locations."""
    stack = dict(m.stack)
    used = m.locations()
    known = variables(lhs)
    for var in sorted(variables(rhs) - known):
        index = 1 + max((loc.index for loc in used if loc.sort is var.sort), default=0)
        loc = Location(var.sort, index)
        stack[var] = loc
        used.add(loc)
    return StackHeapModel(stack, {loc: dict(rec) for loc, rec in m.heap.items()})
