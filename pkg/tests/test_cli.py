import json

import pytest

from ansatz_lab.circuit import AnsatzSpec, Circuit, build_ansatz, load_circuit, save_circuit
from ansatz_lab.cli import main


@pytest.fixture
def circuit_file(tmp_path):
    def make(family, n, layers):
        path = tmp_path / f"{family}_{n}_{layers}.json"
        save_circuit(build_ansatz(AnsatzSpec(family, n, layers)), path)
        return str(path)

    return make


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestBuild:
    def test_prints_resources(self, capsys):
        code, out, _ = run(capsys, "build", "--family", "rx-cx-l", "--n", "4", "--layers", "4")
        assert code == 0
        assert "params=20 cx=12" in out

    def test_zero_layers(self, capsys):
        code, out, _ = run(capsys, "build", "--family", "rx-rz-cx-a", "--n", "3", "--layers", "0")
        assert code == 0 and "params=6 cx=0" in out

    def test_writes_circuit_that_round_trips(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        code, out, _ = run(capsys, "build", "--family", "rx-rz-cx-a", "--n", "4", "--layers", "4",
                           "-o", str(path))
        assert code == 0
        assert load_circuit(path) == build_ansatz(AnsatzSpec("rx-rz-cx-a", 4, 4))
        code, again, _ = run(capsys, "reduce", str(path))
        assert out.split()[:3] == again.split()[:3]

    def test_invalid_family(self, capsys):
        code, _, err = run(capsys, "build", "--family", "bogus", "--n", "4", "--layers", "1")
        assert code == 2 and "error" in err

    def test_quiet(self, capsys):
        code, out, _ = run(capsys, "build", "--family", "rx-cx-l", "--n", "2", "--layers", "1", "--quiet")
        assert code == 0 and out == ""


class TestReduce:
    def test_linear_deep(self, capsys, circuit_file):
        code, out, _ = run(capsys, "reduce", circuit_file("rx-cx-l", 4, 8), "--check")
        assert code == 0
        assert "effective=11" in out
        assert "per-qubit classes: 1 2 4 4" in out

    def test_zero_parameter_circuit(self, capsys, tmp_path):
        path = tmp_path / "empty.json"
        save_circuit(Circuit(2), path)
        code, out, _ = run(capsys, "reduce", str(path))
        assert code == 0 and "effective=0" in out

    @pytest.mark.parametrize("family", ["rx-cx-l", "rx-cx-a", "ry-cx-a", "rx-rz-cx-a", "rx-ry-cx-a"])
    def test_check_passes_for_all_families(self, capsys, circuit_file, family):
        code, _, _ = run(capsys, "reduce", circuit_file(family, 4, 3), "--check", "--quiet")
        assert code == 0

    def test_failed_check_exits_three(self, capsys, circuit_file):
        code, out, _ = run(capsys, "reduce", circuit_file("rx-cx-l", 3, 3), "--check", "--tolerance", "0")
        assert code == 3 and "FAIL" in out

    def test_json_report(self, capsys, circuit_file, tmp_path):
        report = tmp_path / "r.json"
        code, out, _ = run(capsys, "reduce", circuit_file("rx-cx-l", 3, 2), "--json", "-o", str(report),
                           "--seed", "5")
        data = json.loads(out)
        assert data == json.loads(report.read_text())
        assert data["tool"] == "ansatz-lab" and data["command"] == "reduce"
        assert data["config"]["seed"] == 5
        assert data["result"]["effective_count"] == 1 + 2 + 3

    def test_parse_error(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run(capsys, "reduce", str(path))
        assert code == 2 and "error" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "reduce", str(tmp_path / "missing.json"))
        assert code == 4


class TestRank:
    def test_two_qubit_bound(self, capsys, circuit_file):
        code, out, _ = run(capsys, "rank", circuit_file("rx-cx-l", 2, 6), "--mode", "state")
        rank = int(out.split()[0].split("=")[1])
        assert code == 0 and rank <= 3

    def test_no_parameters(self, capsys, tmp_path):
        path = tmp_path / "empty.json"
        save_circuit(Circuit(2), path)
        code, out, _ = run(capsys, "rank", str(path))
        assert code == 0 and out.startswith("rank=0")

    def test_against_linear(self, capsys, circuit_file):
        code, out, _ = run(capsys, "rank", circuit_file("rx-cx-a", 4, 8), "--against-linear")
        assert code == 0 and "EQUAL: 11 vs 11" in out

    def test_compare_different(self, capsys, circuit_file):
        code, out, _ = run(capsys, "rank", circuit_file("rx-cx-l", 3, 1), "--compare",
                           circuit_file("rx-rz-cx-a", 3, 1))
        assert code == 3 and "DIFFERENT" in out

    def test_validation(self, capsys, circuit_file):
        code, _, _ = run(capsys, "rank", circuit_file("rx-cx-l", 2, 1), "--seeds", "0")
        assert code == 2


class TestEntangle:
    def test_order(self, capsys):
        code, out, _ = run(capsys, "entangle", "order", "--layer", "linear", "--n", "3")
        assert code == 0
        assert "k=4" in out and "E^k=I: true" in out

    def test_order_from_file(self, capsys, tmp_path):
        path = tmp_path / "layer.txt"
        path.write_text("1 0\n2 1\n")
        code, out, _ = run(capsys, "entangle", "order", "--layer", str(path), "--n", "3")
        assert code == 0 and "k=4" in out

    def test_order_cap(self, capsys):
        code, _, _ = run(capsys, "entangle", "order", "--n", "6", "--cap", "2")
        assert code == 2

    def test_move(self, capsys):
        code, out, _ = run(capsys, "entangle", "move", "--n", "2", "--from", "2", "--to", "3")
        assert code == 0 and "verified: true" in out
        assert out.startswith("CX ")

    def test_move_invalid_column(self, capsys):
        code, _, _ = run(capsys, "entangle", "move", "--n", "2", "--from", "1", "--to", "3")
        assert code == 2

    def test_swap_is_not_linear(self, capsys):
        code, out, _ = run(capsys, "entangle", "linearity", "--perm", "swap:5,6", "--n", "3")
        assert code == 0 and out.startswith("NOT LINEAR, witness:")

    def test_layer_is_linear(self, capsys):
        code, out, _ = run(capsys, "entangle", "linearity", "--perm", "layer:linear", "--n", "3", "--json")
        data = json.loads(out)
        assert data["result"]["linear"] is True
        assert data["result"]["matrix"] == [[1, 1, 0], [0, 1, 1], [0, 0, 1]]

    def test_bad_perm(self, capsys):
        code, _, _ = run(capsys, "entangle", "linearity", "--perm", "rotate:1", "--n", "2")
        assert code == 2


class TestVqa:
    def test_maxcut(self, capsys):
        code, out, _ = run(capsys, "vqa", "--problem", "maxcut_4", "--family", "rx-rz-cx-a",
                           "--target-epsilon", "1e-4")
        assert code == 0 and "< 1e-4" in out

    def test_constant_observable(self, capsys, tmp_path):
        path = tmp_path / "const.pauli"
        path.write_text("offset 2.5\n0 ZZ\n")
        code, _, _ = run(capsys, "vqa", "--hamiltonian", str(path), "--layers", "1", "--restarts", "2",
                         "-o", str(tmp_path / "r.json"))
        data = json.loads((tmp_path / "r.json").read_text())
        assert code == 0
        assert data["result"]["rows"][0]["epsilon_best"] == pytest.approx(0.0, abs=1e-12)

    def test_compare_table(self, capsys):
        code, out, _ = run(capsys, "vqa", "--problem", "maxcut_4", "--compare", "rx-cx-l,rx-rz-cx-a",
                           "--layers", "2", "--restarts", "2")
        lines = out.splitlines()
        assert code == 0
        assert "ansatz" in lines[1] and "epsilon" in lines[1]
        assert lines[2].startswith("rx-cx-l") and lines[3].startswith("rx-rz-cx-a")

    def test_graph_file(self, capsys, tmp_path):
        path = tmp_path / "g.graph"
        path.write_text("3 2\n0 1\n1 2\n")
        code, _, _ = run(capsys, "vqa", "--graph", str(path), "--kind", "vertex-cover", "--layers", "1",
                         "--restarts", "2", "--quiet")
        assert code == 0

    def test_seed_from_environment(self, capsys, monkeypatch):
        argv = ["vqa", "--problem", "maxcut_4", "--layers", "1", "--restarts", "1", "--json"]
        monkeypatch.setenv("ANSATZ_LAB_SEED", "17")
        _, out, _ = run(capsys, *argv)
        first = json.loads(out)
        _, out, _ = run(capsys, *argv)
        second = json.loads(out)
        assert first["config"]["seed"] == 17
        assert first["result"]["rows"][0]["runs"][0]["theta"] == second["result"]["rows"][0]["runs"][0]["theta"]
        monkeypatch.setenv("ANSATZ_LAB_SEED", "x")
        assert main(argv) == 2

    def test_errors(self, capsys, tmp_path):
        assert run(capsys, "vqa", "--problem", "nope")[0] == 2
        assert run(capsys, "vqa", "--distances", str(tmp_path / "missing.csv"))[0] == 4
        assert run(capsys, "vqa", "--problem", "maxcut_4", "--layers", "-1")[0] == 2


class TestRepro:
    def test_single_criterion(self, capsys, tmp_path):
        path = tmp_path / "summary.json"
        code, out, _ = run(capsys, "repro", "--only", "2", "-o", str(path))
        data = json.loads(path.read_text())
        assert code == 0 and "[PASS]" in out
        assert data["result"]["passed"] is True
        assert [c["criterion"] for c in data["result"]["criteria"]] == [2]

    def test_help_exits_cleanly(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["entangle", "move", "--help"])
        assert info.value.code == 0
