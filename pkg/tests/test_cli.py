import json
import math
import subprocess
import sys

import pytest

from multitime.cli import SWEEP_HEADER, main

SQ2 = 1.0 / math.sqrt(2.0)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestRunCommand:
    def test_simple_single_round(self, capsys):
        report = run_json(capsys, "run", "--protocol", "simple", "--lambda", "1", "--rounds", "1")
        assert abs(report["costs"]["Q"] - 1.0) <= 1e-12
        (a1, _), (a2, _) = report["final_state"]["amplitudes"]["A"]
        assert a1 == pytest.approx(SQ2, abs=1e-12)
        assert a2 == pytest.approx(-SQ2, abs=1e-12)

    def test_slaz_minimal_warns_and_empties_source(self, capsys):
        report = run_json(capsys, "run", "--protocol", "slaz", "--lambda", "0",
                          "--outer", "1", "--rounds", "1")
        assert report["warnings"]
        assert abs(report["final_state"]["amplitudes"]["A1"][0][0]) <= 1e-12

    def test_bad_schedule_exits_2_naming_constraint(self, capsys, tmp_path):
        path = tmp_path / "sched.json"
        path.write_text("[0.4, 0.3]")
        code, out, err = run_cli(capsys, "run", "--protocol", "simple", "--lambda", "0",
                                 "--schedule", str(path))
        assert code == 2
        assert "sum" in err

    def test_missing_schedule_file_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "run", "--protocol", "simple", "--lambda", "0",
                               "--schedule", "/nope/missing.json")
        assert code == 2 and "schedule" in err

    def test_schedule_file_drives_run(self, capsys, tmp_path):
        path = tmp_path / "sched.json"
        path.write_text("[0.25, 0.25]")
        report = run_json(capsys, "run", "--protocol", "simple", "--lambda", "0",
                          "--schedule", str(path))
        assert report["config"]["schedule"] == [0.25, 0.25]
        assert report["config"]["rounds"] == 2

    def test_unknown_protocol_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--protocol", "carrier-pigeon", "--lambda", "0"])
        capsys.readouterr()
        assert exc.value.code == 2

    def test_trace_flag(self, capsys):
        report = run_json(capsys, "run", "--protocol", "simple", "--lambda", "0",
                          "--rounds", "2", "--trace")
        tags = [row["tag"] for row in report["trace"]]
        assert tags == ["initial", "round 1", "round 2"]

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(capsys, "run", "--protocol", "polarization",
                               "--lambda", "1", "--format", "csv")
        assert code == 0
        rows = dict(line.split(",", 1) for line in out.strip().splitlines())
        assert float(rows["costs.Q"]) == pytest.approx(2.0, abs=1e-12)

    def test_report_round_trips_through_json(self, capsys):
        report = run_json(capsys, "run", "--protocol", "simple", "--lambda", "1",
                          "--rounds", "3")
        assert json.loads(json.dumps(report)) == report


class TestPairCommand:
    def test_simple_pair(self, capsys):
        report = run_json(capsys, "pair", "--protocol", "simple", "--rounds", "4")
        d_states = report["delta_g01"]["states"]
        d_ledger = report["delta_g01"]["ledger"]
        assert d_states[0] == pytest.approx(-1.0, abs=1e-10)
        assert d_ledger[0] == pytest.approx(-1.0, abs=1e-10)
        assert report["bound"]["ok"]
        slacks = {c["name"]: c["slack"] for c in report["bound"]["checks"]}
        assert abs(slacks["overlap_vs_total"]) <= 1e-9

    def test_polarization_pair(self, capsys):
        report = run_json(capsys, "pair", "--protocol", "polarization")
        assert [run["costs"]["Q"] for run in report["runs"]] == pytest.approx([2.0, 2.0], abs=1e-12)

    def test_slaz_pair_product_band(self, capsys):
        report = run_json(capsys, "pair", "--protocol", "slaz",
                          "--outer", "32", "--rounds", "4096")
        q0, q1 = (run["costs"]["Q"] for run in report["runs"])
        assert 2.74 <= q0 * q1 <= 3.35

    def test_pair_round_trips_through_json(self, capsys):
        report = run_json(capsys, "pair", "--protocol", "simple", "--rounds", "2")
        assert json.loads(json.dumps(report)) == report


class TestSweepCommand:
    def test_zip_grid_csv(self, capsys, tmp_path):
        out_path = tmp_path / "sweep.csv"
        code, _, _ = run_cli(capsys, "sweep", "--outer-list", "2,4",
                             "--rounds-list", "8,16", "--grid", "zip",
                             "--out", str(out_path))
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert lines[0] == SWEEP_HEADER
        assert len(lines) == 1 + 2 * 2
        first = lines[1].split(",")
        assert first[0] == "slaz" and first[1] == "2" and first[3] == "0"
        assert first[-1] in ("true", "false")

    def test_cross_grid_row_count(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--outer-list", "2,4",
                               "--rounds-list", "8,16", "--grid", "cross")
        assert code == 0
        assert len(out.strip().splitlines()) == 1 + 2 * 4

    def test_empty_list_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "sweep", "--outer-list", "",
                               "--rounds-list", "8")
        assert code == 2 and "--outer-list" in err

    def test_malformed_list_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, "sweep", "--outer-list", "2;4",
                             "--rounds-list", "8")
        assert code == 2

    def test_zip_length_mismatch_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "sweep", "--outer-list", "2,4",
                               "--rounds-list", "8")
        assert code == 2 and "equal length" in err

    def test_unwritable_path_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "sweep", "--outer-list", "2",
                               "--rounds-list", "8", "--out", "/nope/dir/out.csv")
        assert code == 2 and "cannot write" in err


class TestVerifyCommand:
    def test_passes_and_is_deterministic(self, capsys):
        code1, out1, _ = run_cli(capsys, "verify", "--seed", "7")
        code2, out2, _ = run_cli(capsys, "verify", "--seed", "7")
        assert code1 == code2 == 0
        assert out1 == out2
        assert "checks passed" in out1

    def test_different_seed_still_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--seed", "99")
        assert code == 0

    def test_injected_fault_caught_and_named(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--seed", "7",
                               "--inject-fault", "nonunitary-bob")
        assert code == 1
        failing = [line for line in out.splitlines() if line.startswith("FAIL")]
        assert failing and "gram_conservation" in failing[0]


def test_console_entry_point_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "multitime", "run", "--protocol", "oneway",
         "--lambda", "0", "--rounds", "2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    report = json.loads(proc.stdout)
    assert abs(report["costs"]["Khat"] - 1.0) <= 1e-12
    assert report["costs"]["K"] == 0.0
