import json
import os

import pytest

from bslsat.main import EXIT_ERROR, EXIT_MISMATCH, EXIT_OK, build_parser, main

LIST = "(decl-var x S) (decl-var y S) (set-info :status {status})\n" \
       "(assert (sep (pto x (c_sls y)) (sls y nil)))\n"


@pytest.fixture
def query_file(tmp_path):
    def make(status="sat", text=LIST):
        path = tmp_path / f"query_{status}.bsl"
        path.write_text(text.format(status=status))
        return str(path)
    return make


class TestSolveCommand:
    def test_sat_with_model(self, query_file, capsys):
        assert main(["solve", query_file(), "--oracle", "--model"]) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "sat"
        model = json.loads("\n".join(out[1:]))
        assert set(model) == {"stack", "heap"}

    def test_entailment_answer(self, query_file, capsys):
        text = "(decl-var x S) (decl-var y S)\n(entails (sls x y) (pto x (c_sls y)))\n"
        assert main(["solve", query_file("none", text), "--oracle"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "invalid"

    def test_mismatch_exit_code(self, query_file, capsys):
        assert main(["solve", query_file("unsat"), "--oracle"]) == EXIT_MISMATCH
        assert capsys.readouterr().out.strip() == "sat"

    def test_stats_and_dumps(self, query_file, tmp_path, capsys):
        graph = tmp_path / "dump" / "graph.dot"
        assert main(["solve", query_file(), "--oracle", "--stats",
                     "--dump-slgraph", str(graph)]) == EXIT_OK
        out = capsys.readouterr().out
        stats = json.loads(out[out.index("{"):])
        assert stats["status"] == "sat"
        assert stats["solver"]["oracle_runs"] == 1
        assert graph.exists()

    def test_missing_file(self, tmp_path, capsys):
        assert main(["solve", str(tmp_path / "absent.bsl"), "--oracle"]) == EXIT_ERROR
        assert "error:" in capsys.readouterr().err

    def test_parse_error(self, query_file, capsys):
        assert main(["solve", query_file("sat", "(assert (sls x"), "--oracle"]) == EXIT_ERROR
        assert "malformed" in capsys.readouterr().err

    def test_bad_choice_is_rejected(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["solve", "q.bsl", "--encoding", "bdd"])


class TestOtherCommands:
    def test_bench_writes_csv(self, query_file, tmp_path, capsys):
        query_file("sat")
        report = tmp_path / "report.csv"
        assert main(["bench", str(tmp_path), "--oracle", "--csv", str(report)]) == EXIT_OK
        assert report.read_text().startswith("name,expected,got")
        assert capsys.readouterr().out.strip() == "1/1 OK"

    def test_bench_mismatch(self, query_file, tmp_path, capsys):
        query_file("unsat")
        assert main(["bench", str(tmp_path), "--oracle"]) == EXIT_MISMATCH
        assert "1 mismatch" in capsys.readouterr().out

    def test_gen_qbf_then_bench(self, tmp_path, capsys):
        target = tmp_path / "qbf"
        assert main(["gen-qbf", str(target), "--count", "3", "--seed", "1", "--max-vars", "2"]) == EXIT_OK
        assert len(os.listdir(target)) == 3
        assert main(["bench", str(target), "--oracle"]) == EXIT_OK
        assert capsys.readouterr().out.strip().endswith("3/3 OK")

    def test_gen_random(self, tmp_path, capsys):
        target = tmp_path / "random"
        assert main(["gen-random", str(target), "--count", "2", "--seed", "4"]) == EXIT_OK
        assert "2 files written" in capsys.readouterr().out
        assert sorted(os.listdir(target)) == ["random_0000.bsl", "random_0001.bsl"]
