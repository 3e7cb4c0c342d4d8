"""Tests for the command-line interface.

Most tests call ``main`` in-process and inspect stdout/stderr and the exit
code; a few run the module in a subprocess to check byte-level determinism
and stdin handling end to end.
"""

import json
import subprocess
import sys

import pytest

import pottspart.cli as cli_mod
import pottspart.oracle as oracle_mod
import pottspart.polymers as polymers_mod
import pottspart.potts as potts_mod
from pottspart.cli import main
from pottspart.generate import generate_graph
from pottspart.graphs import parse_graph, serialize_graph
from pottspart.oracle import exact_log_z


@pytest.fixture(autouse=True)
def _budgets_restored(monkeypatch):
    # budget flags mutate module constants; pin the defaults around each test
    monkeypatch.setattr(oracle_mod, "STATE_BUDGET", oracle_mod.STATE_BUDGET)
    monkeypatch.setattr(potts_mod, "GROUND_STATE_CAP", potts_mod.GROUND_STATE_CAP)
    monkeypatch.setattr(
        polymers_mod, "POLYMER_COUNT_BUDGET", polymers_mod.POLYMER_COUNT_BUDGET
    )
    monkeypatch.setattr(polymers_mod, "CLUSTER_BUDGET", polymers_mod.CLUSTER_BUDGET)


@pytest.fixture
def bridged_triangles_file(tmp_path):
    path = tmp_path / "triangles.el"
    path.write_text(serialize_graph(generate_graph("clique-chain(2,3,1)")))
    return str(path)


@pytest.fixture
def two_cliques_file(tmp_path):
    path = tmp_path / "twocliques.el"
    path.write_text(serialize_graph(generate_graph("clique-chain(2,5,1)")))
    return str(path)


GOOD_PARTS_ARGS = [
    "--q", "2", "--beta", "40", "--eps", "0.05",
    "--mode", "good-parts", "--parts", "0,1,2/3,4,5",
]


class TestGenerateCommand:
    def test_writes_edge_list_to_stdout(self, capsys):
        assert main(["generate", "cycle(6)"]) == 0
        out = capsys.readouterr().out
        g = parse_graph(out)
        assert g.n == 6 and g.m == 6

    def test_writes_file_and_parses_back(self, tmp_path, capsys):
        target = tmp_path / "g.el"
        assert main(["generate", "random-regular(10,3)", "--seed", "1",
                     "-o", str(target)]) == 0
        assert capsys.readouterr().out == ""
        g = parse_graph(target.read_text())
        assert all(d == 3 for d in g.degrees)

    def test_seed_determinism(self, capsys):
        main(["generate", "random-regular(12,4)", "--seed", "9"])
        first = capsys.readouterr().out
        main(["generate", "random-regular(12,4)", "--seed", "9"])
        assert capsys.readouterr().out == first

    def test_bad_spec_exits_1(self, capsys):
        assert main(["generate", "torus(3,3)"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_infeasible_spec_exits_1(self, capsys):
        assert main(["generate", "random-regular(5,3)"]) == 1
        assert "odd" in capsys.readouterr().err


class TestPartitionCommand:
    def test_two_cliques_kept_whole_and_verified(self, two_cliques_file, capsys):
        assert main(["partition", "--k", "2", two_cliques_file]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["schemaVersion"] == 1
        assert payload["ell"] == 1
        assert payload["verified"] is True
        assert payload["parts"] == [list(range(10))]
        cert = payload["certificates"][0]
        assert cert["sweepConductance"] == "1/21"
        assert cert["phiInnerLowerBound"] == "1/1764"

    def test_disconnected_graph_exits_1(self, tmp_path, capsys):
        path = tmp_path / "disc.el"
        path.write_text(serialize_graph(generate_graph("clique-chain(2,5,0)")))
        assert main(["partition", "--k", "2", str(path)]) == 1
        assert "eigenvalue" in capsys.readouterr().err

    def test_text_format(self, two_cliques_file, capsys):
        assert main(["partition", "--k", "2", "--format", "text",
                     two_cliques_file]) == 0
        out = capsys.readouterr().out
        assert out.startswith("ell = 1\nverified = True\n")
        assert "part 0: 10 vertices" in out

    def test_missing_file_exits_1(self, capsys):
        assert main(["partition", "--k", "2", "/nonexistent/g.el"]) == 1
        assert "cannot read" in capsys.readouterr().err


class TestPottsCommand:
    def test_good_parts_json_schema_and_value(self, bridged_triangles_file, capsys):
        assert main(["potts", *GOOD_PARTS_ARGS, bridged_triangles_file]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert set(payload) == {
            "schemaVersion", "logZ", "epsBound", "mode", "groundStates",
            "truncationDepth", "clustersEvaluated", "perPsi",
        }
        g = generate_graph("clique-chain(2,3,1)")
        assert abs(payload["logZ"] - exact_log_z(g, 2, 40.0)) <= payload["epsBound"]
        assert payload["mode"] == "partition"
        assert payload["groundStates"] == 4
        assert len(payload["perPsi"]) == 4

    def test_text_format(self, bridged_triangles_file, capsys):
        assert main(["potts", *GOOD_PARTS_ARGS, "--format", "text",
                     bridged_triangles_file]) == 0
        out = capsys.readouterr().out
        assert out.startswith("logZ = ")
        assert "mode = partition\n" in out

    def test_sse_requires_k(self, bridged_triangles_file, capsys):
        assert main(["potts", "--q", "2", "--beta", "40", "--eps", "0.05",
                     bridged_triangles_file]) == 1
        assert "requires --k" in capsys.readouterr().err

    def test_below_threshold_reports_required_beta(
        self, bridged_triangles_file, capsys
    ):
        assert main(["potts", "--q", "2", "--beta", "0.01", "--eps", "0.05",
                     "--mode", "good-parts", "--parts", "0,1,2/3,4,5",
                     bridged_triangles_file]) == 1
        assert "required threshold" in capsys.readouterr().err

    def test_bad_parts_value_exits_1(self, bridged_triangles_file, capsys):
        assert main(["potts", "--q", "2", "--beta", "40", "--eps", "0.05",
                     "--mode", "good-parts", "--parts", "0,1;2",
                     bridged_triangles_file]) == 1
        assert "--parts" in capsys.readouterr().err

    def test_expander_mode_requires_alpha(self, bridged_triangles_file, capsys):
        assert main(["potts", "--q", "2", "--beta", "40", "--eps", "0.05",
                     "--mode", "expander", bridged_triangles_file]) == 1
        assert "requires --alpha" in capsys.readouterr().err

    def test_with_partition_mode(self, tmp_path, capsys):
        # triangle + K_8 joined by an edge; the triangle is the bad part
        path = tmp_path / "mixed.el"
        g = parse_graph(
            serialize_graph(generate_graph("complete(3)"))
            + "".join(f"{u + 3} {v + 3}\n" for u, v in generate_graph("complete(8)").edges)
            + "0 3\n"
        )
        path.write_text(serialize_graph(g))
        assert main(["potts", "--q", "2", "--beta", "55", "--eps", "0.01",
                     "--mode", "with-partition", "--eta", "0.5",
                     "--parts", "0,1,2/3,4,5,6,7,8,9,10", str(path)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["mode"] == "partition"
        assert payload["epsBound"] == pytest.approx(2 * 0.01 + 55.0 / 2)


class TestOracleCommand:
    def test_exact_value(self, bridged_triangles_file, capsys):
        assert main(["oracle", "--q", "2", "--beta", "1.5",
                     bridged_triangles_file]) == 0
        payload = json.loads(capsys.readouterr().out)
        g = generate_graph("clique-chain(2,3,1)")
        assert payload["logZ"] == exact_log_z(g, 2, 1.5)
        assert payload["epsBound"] == 0.0
        assert payload["mode"] == "oracle"
        assert payload["schemaVersion"] == 1

    def test_budget_override_warns_and_exits_3(self, two_cliques_file, capsys):
        assert main(["oracle", "--q", "2", "--beta", "1", "--budget-states", "10",
                     two_cliques_file]) == 3
        err = capsys.readouterr().err
        assert "warning:" in err and "overridden to 10" in err
        assert "over budget 10" in err


class TestVerifyCommand:
    def test_pass_exits_0(self, bridged_triangles_file, capsys):
        assert main(["verify", *GOOD_PARTS_ARGS, bridged_triangles_file]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["pass"] is True
        assert payload["difference"] <= payload["epsBound"]
        assert payload["logZApprox"] == pytest.approx(payload["logZExact"])

    def test_text_verdict(self, bridged_triangles_file, capsys):
        assert main(["verify", *GOOD_PARTS_ARGS, "--format", "text",
                     bridged_triangles_file]) == 0
        assert capsys.readouterr().out.startswith("PASS:")

    def test_disagreement_exits_2(
        self, bridged_triangles_file, capsys, monkeypatch
    ):
        real = cli_mod.exact_log_z
        monkeypatch.setattr(
            cli_mod, "exact_log_z", lambda g, q, b: real(g, q, b) + 1.0
        )
        assert main(["verify", *GOOD_PARTS_ARGS, bridged_triangles_file]) == 2
        payload = json.loads(capsys.readouterr().out)
        assert payload["pass"] is False

    def test_fail_text_verdict(self, bridged_triangles_file, capsys, monkeypatch):
        real = cli_mod.exact_log_z
        monkeypatch.setattr(
            cli_mod, "exact_log_z", lambda g, q, b: real(g, q, b) + 1.0
        )
        assert main(["verify", *GOOD_PARTS_ARGS, "--format", "text",
                     bridged_triangles_file]) == 2
        assert capsys.readouterr().out.startswith("FAIL:")


class TestUsageErrors:
    def test_missing_subcommand_exits_1(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 1

    def test_unknown_flag_exits_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["oracle", "--frobnicate", "g.el"])
        assert exc.value.code == 1

    def test_missing_required_flag_exits_1(self, bridged_triangles_file):
        with pytest.raises(SystemExit) as exc:
            main(["oracle", bridged_triangles_file])
        assert exc.value.code == 1


class TestEndToEnd:
    def _run(self, argv, stdin_text=None):
        return subprocess.run(
            [sys.executable, "-m", "pottspart.cli", *argv],
            capture_output=True,
            text=True,
            input=stdin_text,
            timeout=300,
        )

    def test_stdin_input(self):
        edge_text = serialize_graph(generate_graph("clique-chain(2,3,1)"))
        proc = self._run(
            ["oracle", "--q", "2", "--beta", "1.5", "-"], stdin_text=edge_text
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["mode"] == "oracle"

    def test_repeated_runs_byte_identical(self, bridged_triangles_file):
        argv = ["potts", *GOOD_PARTS_ARGS, bridged_triangles_file]
        first = self._run(argv)
        second = self._run(argv)
        assert first.returncode == second.returncode == 0
        assert first.stdout == second.stdout

    def test_threads_do_not_change_output(self, bridged_triangles_file):
        argv = ["potts", *GOOD_PARTS_ARGS, bridged_triangles_file]
        serial = self._run([*argv, "--threads", "1"])
        parallel = self._run([*argv, "--threads", "4"])
        assert serial.returncode == parallel.returncode == 0
        assert serial.stdout == parallel.stdout
