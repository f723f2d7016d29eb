import argparse
import json
import logging

import pytest

from bslsat.config import Config, find_solver
from bslsat.formula import Sort
from bslsat.helpers import to_json, write_text
from bslsat.logger import setup_logging, verbosity_level
from bslsat.semantics import Location


def namespace(**values):
    defaults = {"config": None, "solver": None, "solver_arg": [], "timeout": None,
                "encoding": None, "set_dialect": None, "strategy": None, "log_file": None,
                "verify_model": False, "no_tighten": False}
    defaults.update(values)
    return argparse.Namespace(**defaults)


class TestConfig:
    def test_defaults(self):
        config = Config(solver_command="z3")
        assert config.encoding == "bitvectors"
        assert config.strategy == "auto"
        assert config.tighten_bounds and config.entailment_shortcut

    @pytest.mark.parametrize("field, value", [
        ("encoding", "bdd"),
        ("set_dialect", "yices"),
        ("strategy", "guess"),
    ])
    def test_invalid_choices(self, field, value):
        with pytest.raises(ValueError):
            Config(solver_command="z3", **{field: value})

    def test_save_and_load(self, tmp_path):
        path = tmp_path / "config" / "bslsat.json"
        Config(solver_command="cvc5", timeout=5, encoding="sets").save_config(str(path))
        loaded = Config.load_config(str(path))
        assert (loaded.solver_command, loaded.timeout, loaded.encoding) == ("cvc5", 5, "sets")

    def test_missing_file_gives_defaults(self, tmp_path):
        assert Config.load_config(str(tmp_path / "absent.json")).timeout == 60

    def test_unknown_keys_are_ignored(self, tmp_path, caplog):
        path = tmp_path / "bslsat.json"
        path.write_text(json.dumps({"solver_command": "z3", "colour": "blue"}))
        with caplog.at_level(logging.WARNING):
            config = Config.load_config(str(path))
        assert config.solver_command == "z3"
        assert "colour" in caplog.text

    def test_cli_overlay(self, tmp_path):
        path = tmp_path / "bslsat.json"
        Config(solver_command="z3", timeout=5).save_config(str(path))
        args = namespace(config=str(path), encoding="sets", solver_arg=["-v:0"], no_tighten=True,
                         verify_model=True)
        config = Config.from_args(args)
        assert config.timeout == 5
        assert config.encoding == "sets"
        assert config.solver_args == ["-v:0"]
        assert config.tighten_bounds is False
        assert config.verify_model is True

    def test_overlay_keeps_base_values(self):
        base = Config(solver_command="cvc5", strategy="enum")
        config = Config.from_args(namespace(timeout=2.5), base=base)
        assert (config.solver_command, config.strategy, config.timeout) == ("cvc5", "enum", 2.5)

    def test_solver_discovery(self, monkeypatch):
        monkeypatch.setenv("BSL_SOLVER", "/opt/bin/z3")
        assert find_solver() == "/opt/bin/z3"
        monkeypatch.delenv("BSL_SOLVER")
        monkeypatch.setattr("shutil.which", lambda name: "/usr/bin/cvc5" if name == "cvc5" else None)
        assert find_solver() == "/usr/bin/cvc5"


class TestLoggingAndHelpers:
    def test_verbosity(self):
        assert verbosity_level(0) == logging.WARNING
        assert verbosity_level(1) == logging.INFO
        assert verbosity_level(3) == logging.DEBUG

    def test_log_file(self, tmp_path):
        path = tmp_path / "logs" / "bslsat.log"
        logger = setup_logging(str(path), logging.INFO)
        logger.info("hello from the test")
        for handler in logging.getLogger().handlers:
            handler.flush()
        assert "bslsat - INFO - hello from the test" in path.read_text()
        setup_logging()

    def test_write_text_creates_directories(self, tmp_path):
        target = tmp_path / "a" / "b.txt"
        write_text(str(target), "x")
        assert target.read_text() == "x"

    def test_to_json(self):
        text = to_json({"b": 1, "a": Location(Sort.SLS, 1)})
        assert text == '{\n  "a": "S1",\n  "b": 1\n}'
