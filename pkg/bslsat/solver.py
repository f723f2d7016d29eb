"""Satisfiability and entailment checking, from formula to verified witness."""
from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field

from .backend import check_script
from .bounds import location_bounds
from .config import Config
from .helpers import write_text
from .reconstruction import extend_countermodel, inverse_translate, verify_model
from .semantics import enumerate_model, evaluate
from .slgraph import Contradiction, build, saturate
from .translator import Translator, entailment_query

logger = logging.getLogger(__name__)

ENTAILMENT_ANSWERS = {"sat": "invalid", "unsat": "valid", "unknown": "unknown"}


@dataclass
class SolveResult:
    status: str
    model: object = None
    stats: dict = field(default_factory=dict)
    reason: str = ""
    verified: bool | None = None
    entailment: bool = False

    @property
    def answer(self):
        """Status as reported to the user: valid/invalid for entailments."""
        return ENTAILMENT_ANSWERS[self.status] if self.entailment else self.status


class BslSolver:
    def __init__(self, config=None):
        self.config = config or Config()
        self.lock = threading.Lock()
        self.counters = {
            "queries": 0,
            "sat": 0,
            "unsat": 0,
            "unknown": 0,
            "graph_refutations": 0,
            "entailment_shortcuts": 0,
            "oracle_runs": 0,
            "verification_failures": 0,
            "solver_time": 0.0,
        }

    def _count(self, result, solver_time=0.0):
        with self.lock:
            self.counters["queries"] += 1
            self.counters[result.status] += 1
            self.counters["solver_time"] += solver_time
            if result.verified is False:
                self.counters["verification_failures"] += 1

    def _bump(self, key):
        with self.lock:
            self.counters[key] += 1

    def _graph(self, phi, dump_slgraph=None):
        graph = saturate(build(phi))
        if dump_slgraph:
            text = graph.to_dot() if not isinstance(graph, Contradiction) else f"// contradiction: {graph}\n"
            write_text(dump_slgraph, text)
            logger.info(f"SL-graph written to {dump_slgraph}")
        return graph

    def _oracle(self, phi, graph, stats):
        self._bump("oracle_runs")
        profile = location_bounds(phi, graph if self.config.tighten_bounds else None)
        stats["bounds"] = profile.to_dict()
        model = enumerate_model(phi, profile.per_sort, self.config.oracle_max_universe)
        return SolveResult("sat" if model is not None else "unsat", model, stats,
                           reason="oracle")

    def check_sat(self, phi, oracle=False, dump_smt=None, dump_slgraph=None):
        """Decide satisfiability of ``phi``; sat results carry a stack-heap model."""
        start = time.time()
        stats = {}
        logger.debug(f"Checking satisfiability of {phi}")
        graph = self._graph(phi, dump_slgraph)
        if isinstance(graph, Contradiction):
            logger.info(f"SL-graph contradiction {graph}, unsat without the SMT solver")
            self._bump("graph_refutations")
            result = SolveResult("unsat", stats=stats, reason=f"contradiction {graph}")
        elif oracle:
            result = self._oracle(phi, graph, stats)
        else:
            result = self._smt(phi, graph, stats, dump_smt)
        stats["time"] = round(time.time() - start, 6)
        self._count(result, stats.get("solver_time", 0.0))
        return result

    def _smt(self, phi, graph, stats, dump_smt):
        config = self.config
        translator = Translator(
            phi, strategy=config.strategy, footprint_limit=config.footprint_limit,
            path_quantifier_ratio=config.path_quantifier_ratio,
            tighten_bounds=config.tighten_bounds,
            graph=graph if config.tighten_bounds else None,
        )
        script = translator.run()
        stats.update(script.stats)
        verdict = check_script(script, config, dump_to=dump_smt)
        stats["solver_time"] = round(verdict.elapsed, 6)
        if verdict.status != "sat":
            if verdict.status == "unknown":
                logger.warning(f"Solver gave up on the query ({verdict.reason or 'unknown'})")
            return SolveResult(verdict.status, stats=stats, reason=verdict.reason)
        model = inverse_translate(verdict, phi)
        verified = verify_model(model, phi) if config.verify_model else None
        return SolveResult("sat", model, stats, verified=verified)

    def check_entailment(self, lhs, rhs, oracle=False, dump_smt=None, dump_slgraph=None):
        """Decide ``lhs |= rhs``; status unsat means valid, sat results carry a countermodel."""
        phi, shortcut = entailment_query(lhs, rhs, self.config.entailment_shortcut)
        if shortcut:
            self._bump("entailment_shortcuts")
        result = self.check_sat(phi, oracle, dump_smt, dump_slgraph)
        result.entailment = True
        result.stats["entailment_shortcut"] = shortcut
        if shortcut and result.model is not None:
            result.model = extend_countermodel(result.model, lhs, rhs)
            if self.config.verify_model:
                result.verified = evaluate(result.model, lhs) and not evaluate(result.model, rhs)
                if not result.verified:
                    self._bump("verification_failures")
                    logger.error(f"Extended countermodel fails for {lhs} |= {rhs}")
        return result

    def solve_query(self, query, oracle=False, dump_smt=None, dump_slgraph=None):
        logger.info(f"Solving {query.source_name} ({query.mode.value})")
        if query.is_entailment:
            return self.check_entailment(query.lhs, query.rhs, oracle, dump_smt, dump_slgraph)
        return self.check_sat(query.formula, oracle, dump_smt, dump_slgraph)

    def get_stats(self):
        with self.lock:
            return dict(self.counters)
