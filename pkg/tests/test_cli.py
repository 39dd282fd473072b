import csv
import io
import json

import pytest

from densecode import cli
from densecode.fixtures import fixture_path


def run_cli(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, argv):
    code, out, err = run_cli(capsys, argv)
    return code, (json.loads(out) if out.strip().startswith("{") else out), err


class TestEntropyCommand:
    def test_bell_fixture(self, capsys):
        code, doc, _ = run_json(capsys, ["entropy", str(fixture_path("bell.json"))])
        assert code == 0
        assert doc["H"] == pytest.approx(0.0, abs=1e-10)
        assert doc["H_B"] == pytest.approx(1.0, abs=1e-10)
        assert doc["coherent"] == pytest.approx(1.0, abs=1e-10)

    def test_maximally_mixed_fixture(self, capsys):
        code, doc, _ = run_json(
            capsys, ["entropy", str(fixture_path("maximally-mixed-2q.json"))]
        )
        assert code == 0
        assert doc["H"] == pytest.approx(2.0, abs=1e-10)
        assert doc["coherent"] == pytest.approx(-1.0, abs=1e-10)

    def test_malformed_dims_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"dims": [2, 3], "matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]}')
        code, _, err = run_cli(capsys, ["entropy", str(bad)])
        assert code == 2
        assert "error" in err

    def test_invariant_violation_exits_3(self, capsys, tmp_path):
        bad = tmp_path / "npsd.json"
        bad.write_text('{"dims": [2], "matrix": [[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]}')
        code, _, err = run_cli(capsys, ["entropy", str(bad)])
        assert code == 3


class TestDcCommand:
    def test_bell_capacity(self, capsys):
        code, doc, _ = run_json(
            capsys,
            ["dc", str(fixture_path("bell.json")), "--d", "2", "--restarts", "6"],
        )
        assert code == 0
        assert doc["value"] == pytest.approx(2.0, abs=1e-3)
        assert doc["lower_bound"] is True
        assert doc["manifest"]["version"]

    def test_product_capacity(self, capsys):
        code, doc, _ = run_json(
            capsys,
            ["dc", str(fixture_path("product.json")), "--d", "2", "--restarts", "4"],
        )
        assert code == 0
        assert doc["value"] == pytest.approx(1.0, abs=1e-3)

    def test_constant_channel_capacity(self, capsys):
        code, doc, _ = run_json(
            capsys,
            [
                "dc", str(fixture_path("bell.json")), "--d", "2",
                "--channel", str(fixture_path("constant-qubit.json")),
                "--ensemble-size", "4", "--restarts", "2",
            ],
        )
        assert code == 0
        assert doc["value"] == pytest.approx(0.0, abs=1e-9)

    def test_multicopy_flag(self, capsys):
        code, doc, _ = run_json(
            capsys,
            ["dc", str(fixture_path("bell.json")), "--d", "2", "--copies", "2",
             "--restarts", "4"],
        )
        assert code == 0
        assert doc["quantity"] == "dc_capacity_multicopy"
        assert doc["value"] == pytest.approx(2.0, abs=1e-3)

    def test_strict_nonconvergence_exits_5(self, capsys, tmp_path):
        # A zero gradient tolerance makes first-order convergence impossible
        # on a full-rank state, so --strict must abort with code 5.
        from densecode import channels as ch
        from densecode import serialize as ser

        rho = ch.random_state((2, 2), 4, seed=99)
        path = tmp_path / "mixed.json"
        ser.dump(ser.state_to_json(rho), path)
        code, _, err = run_cli(
            capsys,
            ["dc", str(path), "--d", "2", "--restarts", "1",
             "--grad-tol", "0", "--strict"],
        )
        assert code == 5


def csv_rows(text):
    return [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]


class TestScanCommand:
    def test_count_zero_writes_header_only(self, capsys):
        code, out, _ = run_cli(capsys, ["scan-additivity", "--count", "0"])
        assert code == 0
        rows = csv_rows(out)
        assert rows[0][:8] == ["label", "seed", "d1", "d2", "part1", "part2", "joint", "gap"]
        assert len(rows) == 1

    def test_showcase_pair_gap(self, capsys):
        code, out, _ = run_cli(
            capsys,
            [
                "scan-additivity",
                "--rho", str(fixture_path("product.json")),
                "--sigma", str(fixture_path("double-singlet.json")),
                "--sigma-a", "0,2", "--restarts", "6",
            ],
        )
        assert code == 0
        instance = csv_rows(out)[1]
        assert instance[0] == "instance"
        assert float(instance[7]) == pytest.approx(1.0, abs=5e-3)

    def test_random_scan_gaps_never_negative(self, capsys, tmp_path):
        out_file = tmp_path / "scan.csv"
        code, doc, _ = run_json(
            capsys,
            ["scan-additivity", "--count", "3", "--restarts", "4", "--seed", "11",
             "--out", str(out_file)],
        )
        assert code == 0
        rows = csv_rows(out_file.read_text())
        gaps = [float(r[7]) for r in rows[1:] if r[0] == "instance"]
        assert len(gaps) == 3
        assert all(g >= -5e-3 for g in gaps)
        summary = rows[-1]
        assert summary[0] == "summary"
        assert float(summary[8]) == pytest.approx(min(gaps), abs=1e-9)

    def test_scan_replay_is_bit_identical(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys, ["scan-additivity", "--count", "1", "--restarts", "2", "--seed", "9"]
        )
        assert code == 0
        record = tmp_path / "scan.csv"
        record.write_text(out)
        code2, out2, _ = run_cli(capsys, ["replay", str(record)])
        assert code2 == 0
        assert out2 == out


class TestPqgCommands:
    def test_check_orthogonality_basis_programs(self, capsys):
        code, doc, _ = run_json(
            capsys,
            ["pqg", "check-orthogonality", "--units", "I,X",
             "--program1", "0", "--program2", "1"],
        )
        assert code == 0
        assert doc["consistent"] is True

    def test_check_orthogonality_rejects_non_program(self, capsys):
        code, _, err = run_cli(
            capsys,
            ["pqg", "check-orthogonality", "--units", "I,X",
             "--program1", "0.7071,0.7071", "--program2", "0"],
        )
        assert code == 6

    def test_witness_cnot_on_pauli(self, capsys):
        code, doc, _ = run_json(
            capsys,
            ["pqg", "witness", "--target", "cnot", "--gates", "pauli", "pauli"],
        )
        assert code == 0
        assert doc["best_error"] > 0.1

    def test_witness_product_target(self, capsys):
        code, doc, _ = run_json(
            capsys,
            ["pqg", "witness", "--target", "X@Z", "--gates", "pauli", "pauli"],
        )
        assert code == 0
        assert doc["best_error"] <= 1e-9

    def test_build_net_guard_exits_4(self, capsys):
        code, _, err = run_cli(
            capsys, ["pqg", "build-net", "--epsilon", "0.005", "--d", "2"]
        )
        assert code == 4

    def test_emulate_depolarizing(self, capsys):
        code, doc, _ = run_json(
            capsys,
            ["pqg", "emulate", "--channel", str(fixture_path("depolarizing-qubit.json")),
             "--epsilon", "0.1", "--samples", "60"],
        )
        assert code == 0
        assert doc["measured_error"] <= 0.1


class TestConfigSurface:
    def test_environment_variable_sets_default_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("DENSECODE_SEED", "7")
        code, doc, _ = run_json(
            capsys, ["dc", str(fixture_path("bell.json")), "--d", "2", "--restarts", "2"]
        )
        assert code == 0
        assert doc["manifest"]["config"]["seed"] == 7

    def test_config_block_overrides(self, capsys, tmp_path):
        block = tmp_path / "cfg.json"
        block.write_text('{"restarts": 3, "seed": 5}')
        code, doc, _ = run_json(
            capsys,
            ["dc", str(fixture_path("bell.json")), "--d", "2", "--config", str(block),
             "--emit-report"],
        )
        assert code == 0
        assert doc["report"]["value"] == pytest.approx(0.0, abs=1e-6)
        assert doc["report"]["isometry"]["d_in"] == 2

    def test_config_block_rejects_unknown_fields(self, capsys, tmp_path):
        block = tmp_path / "cfg.json"
        block.write_text('{"bogus": 1}')
        code, _, err = run_cli(
            capsys,
            ["dc", str(fixture_path("bell.json")), "--d", "2", "--config", str(block)],
        )
        assert code == 2


class TestReplay:
    def test_replay_is_bit_identical(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys,
            ["dc", str(fixture_path("bell.json")), "--d", "2", "--restarts", "4"],
        )
        assert code == 0
        record = tmp_path / "record.json"
        record.write_text(out)
        code2, out2, _ = run_cli(capsys, ["replay", str(record)])
        assert code2 == 0
        assert out2 == out

    def test_replay_without_manifest_exits_2(self, capsys, tmp_path):
        record = tmp_path / "junk.json"
        record.write_text("{}")
        code, _, err = run_cli(capsys, ["replay", str(record)])
        assert code == 2
