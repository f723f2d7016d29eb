"""Benchmark harness: solve every query of a directory and report one CSV row per file."""
from __future__ import annotations

import csv
import io
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

from .errors import BslError
from .parser import parse_file
from .solver import BslSolver

logger = logging.getLogger(__name__)

BENCH_SUFFIXES = (".bsl", ".smt2")
CSV_COLUMNS = ("name", "expected", "got", "time", "encoding", "strategy")


@dataclass
class BenchRow:
    name: str
    expected: str
    got: str
    time: float
    encoding: str
    strategy: str
    error: str = ""

    @property
    def mismatch(self):
        return self.expected in ("sat", "unsat") and self.got in ("sat", "unsat") \
            and self.expected != self.got

    @property
    def ok(self):
        return self.got in ("sat", "unsat") and not self.mismatch


def collect_benchmarks(directory):
    """Benchmark files under ``directory``, ordered by file name."""
    found = []
    for root, _, files in os.walk(directory):
        found.extend(os.path.join(root, name) for name in files if name.endswith(BENCH_SUFFIXES))
    return sorted(found, key=lambda path: (os.path.basename(path), path))


def run_one(solver, path, oracle=False):
    config = solver.config
    start = time.time()
    expected = ""
    try:
        query = parse_file(path)
        expected = query.expected_status or ""
        result = solver.solve_query(query, oracle=oracle)
        got, error = result.status, ""
    except BslError as e:
        logger.error(f"{path}: {e}")
        got, error = "error", str(e)
    except Exception as e:
        logger.error(f"Error running {path}: {e}", exc_info=True)
        got, error = "error", f"{type(e).__name__}: {e}"
    row = BenchRow(os.path.basename(path), expected, got, round(time.time() - start, 3),
                   config.encoding, config.strategy, error)
    level = logging.WARNING if row.mismatch else logging.INFO
    logger.log(level, f"{row.name}: expected {row.expected or '-'}, got {row.got} in {row.time}s")
    return row


def run_bench(directory, config=None, jobs=1, oracle=False):
    """Rows for every benchmark file of ``directory``, in file name order."""
    solver = BslSolver(config)
    paths = collect_benchmarks(directory)
    logger.info(f"Running {len(paths)} benchmarks from {directory} with {jobs} job(s)")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda p: run_one(solver, p, oracle), paths))
    else:
        rows = [run_one(solver, p, oracle) for p in paths]
    return rows


def summarize(rows):
    """``k/n OK`` followed by the unknown, error and mismatch counts when nonzero."""
    ok = sum(row.ok for row in rows)
    parts = [f"{ok}/{len(rows)} OK"]
    for label, count in (
        ("unknown", sum(row.got == "unknown" for row in rows)),
        ("error", sum(row.got == "error" for row in rows)),
        ("mismatch", sum(row.mismatch for row in rows)),
    ):
        if count:
            parts.append(f"{count} {label}")
    return ", ".join(parts)


def write_csv(rows, out=None):
    """CSV report of ``rows``; returned as text when ``out`` is None."""
    handle = out or io.StringIO()
    writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(asdict(row))
    return None if out else handle.getvalue()


def has_mismatch(rows):
    return any(row.mismatch for row in rows)
