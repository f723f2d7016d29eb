"""Satisfiability and entailment checking for boolean separation logic over list predicates."""
from .config import Config
from .logger import setup_logging
from .parser import Query, parse_file, parse_native, parse_slcomp
from .solver import BslSolver, SolveResult

__version__ = "0.1.0"

__all__ = ['BslSolver', 'Config', 'Query', 'SolveResult', 'parse_file', 'parse_native', 'parse_slcomp',
           'setup_logging']
