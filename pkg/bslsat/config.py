from __future__ import annotations

import json
import logging
import os
import shutil
from dataclasses import asdict, dataclass, field, fields

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "data/config/bslsat.json"
KNOWN_SOLVERS = ("z3", "cvc5", "bitwuzla")
ENCODINGS = ("bitvectors", "sets")
SET_DIALECTS = ("auto", "z3", "cvc5")
STRATEGIES = ("auto", "enum", "quantif")


def find_solver():
    """Solver from BSL_SOLVER, else the first known solver on PATH."""
    command = os.environ.get("BSL_SOLVER")
    if command:
        return command
    for name in KNOWN_SOLVERS:
        path = shutil.which(name)
        if path:
            return path
    return None


@dataclass
class Config:
    solver_command: str | None = field(default_factory=find_solver)
    solver_args: list = field(default_factory=list)
    timeout: float = 60
    encoding: str = "bitvectors"
    set_dialect: str = "auto"
    strategy: str = "auto"
    footprint_limit: int = 64
    path_quantifier_ratio: float = 0.5
    tighten_bounds: bool = True
    entailment_shortcut: bool = True
    oracle_max_universe: int = 7
    verify_model: bool = False
    log_level: str = "WARNING"
    log_file: str | None = None

    def __post_init__(self):
        if self.encoding not in ENCODINGS:
            raise ValueError(f"unknown encoding '{self.encoding}'")
        if self.set_dialect not in SET_DIALECTS:
            raise ValueError(f"unknown set dialect '{self.set_dialect}'")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy '{self.strategy}'")

    @classmethod
    def load_config(cls, path=DEFAULT_CONFIG_PATH):
        """Config from a JSON file; a missing file gives the defaults."""
        if not os.path.exists(path):
            logger.debug(f"No config file at {path}, using defaults")
            return cls()
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        known = {f.name for f in fields(cls)}
        for key in sorted(set(data) - known):
            logger.warning(f"Ignoring unknown config key '{key}' in {path}")
        config = cls(**{k: v for k, v in data.items() if k in known})
        logger.info(f"Loaded config from {path}")
        return config

    def save_config(self, path=DEFAULT_CONFIG_PATH):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2)
        logger.info(f"Saved config to {path}")

    @classmethod
    def from_args(cls, args, base=None):
        """Overlay the CLI flags that were given on ``base`` (by default the --config file)."""
        if base is None:
            path = getattr(args, "config", None)
            base = cls.load_config(path or DEFAULT_CONFIG_PATH)
        values = asdict(base)
        overrides = {
            "solver_command": getattr(args, "solver", None),
            "solver_args": getattr(args, "solver_arg", None) or None,
            "timeout": getattr(args, "timeout", None),
            "encoding": getattr(args, "encoding", None),
            "set_dialect": getattr(args, "set_dialect", None),
            "strategy": getattr(args, "strategy", None),
            "log_file": getattr(args, "log_file", None),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        if getattr(args, "verify_model", False):
            values["verify_model"] = True
        if getattr(args, "no_tighten", False):
            values["tighten_bounds"] = False
        return cls(**values)
