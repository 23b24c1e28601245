"""Config resolution, run artifacts, report generation, and exit codes."""

import json
import math
import pathlib

import pytest

from gsee.cli import InputError, SCHEMA_VERSION, main, resolve_config
from gsee.pauli import PauliString, PauliSum

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "src" / "gsee" / "fixtures"
H2_FCIDUMP = FIXTURES / "h2_eq.fcidump"
H2_CI = FIXTURES / "h2_eq_ci.json"
TOY_3Q = FIXTURES / "toy_3q.json"


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def ingest_h2(tmp_path, taper=False):
    out = tmp_path / "ingested"
    argv = ["ingest", str(H2_FCIDUMP), "--out", str(out)]
    if taper:
        argv.append("--taper")
    assert main(argv) == 0
    return out


def h2_config(tmp_path, algorithm, **extra):
    operator = ingest_h2(tmp_path) / "operator.json"
    payload = {
        "algorithm": algorithm,
        "operator": str(operator),
        "state": {"determinants": str(H2_CI), "threshold": 0.0},
        "seed": 3,
    }
    payload.update(extra)
    return write_config(tmp_path, payload)


def run_results(out_dir):
    return json.loads((out_dir / "results.json").read_text())


def dense_ground(path):
    return float(PauliSum.from_json(path.read_text()).eig()[0][0])


class TestResolveConfig:
    def test_defaults_filled(self, tmp_path):
        path = write_config(tmp_path, {
            "algorithm": "qcm4",
            "operator": "op.json",
            "state": {"basis": 0},
        })
        resolved = resolve_config(path, "qcm4")
        assert resolved["seed"] == 0
        assert resolved["mode"] == "exact"
        assert resolved["spc"] is None
        assert resolved["qcm4"] == {
            "threshold": 0.0,
            "filter": False,
            "grouping": "full",
            "resamples": 500,
            "allocation": "uniform",
        }

    def test_flag_overrides_beat_file_values(self, tmp_path):
        path = write_config(tmp_path, {
            "algorithm": "qcm4",
            "operator": "op.json",
            "state": {"basis": 0},
            "seed": 5,
            "mode": "exact",
        })
        resolved = resolve_config(path, "qcm4", seed=11, spc=200, mode="shots")
        assert resolved["seed"] == 11
        assert resolved["spc"] == 200
        assert resolved["mode"] == "shots"

    def test_unknown_top_level_key_rejected(self, tmp_path):
        path = write_config(tmp_path, {
            "algorithm": "qcm4",
            "operator": "op.json",
            "state": {"basis": 0},
            "shots": 100,
        })
        with pytest.raises(InputError, match="shots"):
            resolve_config(path, "qcm4")

    def test_unknown_nested_keys_rejected(self, tmp_path):
        path = write_config(tmp_path, {
            "algorithm": "qcm4",
            "operator": "op.json",
            "state": {"basis": 0, "extra": 1},
        })
        with pytest.raises(InputError, match="state"):
            resolve_config(path, "qcm4")
        path = write_config(tmp_path, {
            "algorithm": "qcm4",
            "operator": "op.json",
            "state": {"basis": 0},
            "qcm4": {"filtering": True},
        })
        with pytest.raises(InputError, match="filtering"):
            resolve_config(path, "qcm4")

    def test_algorithm_mismatch_rejected(self, tmp_path):
        path = write_config(tmp_path, {
            "algorithm": "qcels",
            "operator": "op.json",
            "state": {"basis": 0},
        })
        with pytest.raises(InputError, match="does not match"):
            resolve_config(path, "qcm4")

    def test_mode_spc_consistency(self, tmp_path):
        base = {"algorithm": "qcm4", "operator": "op.json", "state": {"basis": 0}}
        path = write_config(tmp_path, dict(base, mode="shots"))
        with pytest.raises(InputError, match="spc"):
            resolve_config(path, "qcm4")
        path = write_config(tmp_path, dict(base, mode="exact", spc=100))
        with pytest.raises(InputError, match="exact"):
            resolve_config(path, "qcm4")
        path = write_config(tmp_path, dict(base, mode="recompiled"))
        with pytest.raises(InputError, match="mode"):
            resolve_config(path, "qcm4")

    def test_recompile_takes_no_mode_or_spc(self, tmp_path):
        base = {
            "algorithm": "recompile",
            "operator": "op.json",
            "state": {"basis": 0},
        }
        path = write_config(tmp_path, base)
        resolved = resolve_config(path, "recompile")
        assert resolved["recompile"]["layers"] == 6
        assert "mode" not in resolved
        with pytest.raises(InputError, match="mode"):
            resolve_config(path, "recompile", mode="exact")
        path = write_config(tmp_path, dict(base, spc=10))
        with pytest.raises(InputError, match="spc"):
            resolve_config(path, "recompile")

    def test_compile_section_requires_recompiled_mode(self, tmp_path):
        path = write_config(tmp_path, {
            "algorithm": "qcels",
            "operator": "op.json",
            "state": {"basis": 0},
            "qcels": {"compile": {"layers": 2}},
        })
        with pytest.raises(InputError, match="recompiled"):
            resolve_config(path, "qcels")
        resolved = resolve_config(path, "qcels", mode="recompiled")
        assert resolved["qcels"]["compile"]["layers"] == 2
        assert resolved["qcels"]["compile"]["restarts"] == 3

    def test_state_needs_basis_or_determinants(self, tmp_path):
        path = write_config(tmp_path, {
            "algorithm": "qcm4",
            "operator": "op.json",
            "state": {},
        })
        with pytest.raises(InputError, match="basis"):
            resolve_config(path, "qcm4")

    def test_type_errors_rejected(self, tmp_path):
        base = {"algorithm": "qcm4", "operator": "op.json", "state": {"basis": 0}}
        path = write_config(tmp_path, dict(base, seed=True))
        with pytest.raises(InputError, match="integer"):
            resolve_config(path, "qcm4")
        path = write_config(tmp_path, dict(base, spc=0, mode="shots"))
        with pytest.raises(InputError, match="at least 1"):
            resolve_config(path, "qcm4")


class TestIngest:
    def test_h2_operator(self, tmp_path, capsys):
        out = ingest_h2(tmp_path)
        assert "qubits: 4" in capsys.readouterr().out
        h = PauliSum.from_json((out / "operator.json").read_text())
        assert h.n_qubits == 4
        assert len(h) == 15
        report = json.loads((out / "ingest_report.json").read_text())
        assert report["qubits"] == 4
        assert report["taper"] is None
        assert report["ground_energy"] == pytest.approx(-1.137270, abs=1e-6)

    def test_taper_preserves_ground_energy(self, tmp_path, capsys):
        out = ingest_h2(tmp_path, taper=True)
        printed = capsys.readouterr().out
        assert "qubits before tapering: 4" in printed
        assert "qubits after tapering:" in printed
        report = json.loads((out / "ingest_report.json").read_text())
        taper = report["taper"]
        assert taper["qubits"] < 4
        assert taper["ground_energy"] == pytest.approx(
            report["ground_energy"], abs=1e-9
        )
        reduced = PauliSum.from_json((out / "operator_tapered.json").read_text())
        assert reduced.n_qubits == taper["qubits"]

    def test_reingest_is_byte_identical(self, tmp_path):
        first = ingest_h2(tmp_path / "a")
        second = ingest_h2(tmp_path / "b")
        assert (first / "operator.json").read_bytes() == (
            second / "operator.json"
        ).read_bytes()

    def test_missing_file_exits_2(self, tmp_path, capsys):
        code = main(["ingest", str(tmp_path / "nope.fcidump"), "--out",
                     str(tmp_path / "out")])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_malformed_body_reports_line_number(self, tmp_path, capsys):
        bad = tmp_path / "bad.fcidump"
        bad.write_text(
            "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n0.5 1 1 0 0\nbogus line here\n"
        )
        code = main(["ingest", str(bad), "--out", str(tmp_path / "out")])
        assert code == 2
        assert "line 4" in capsys.readouterr().err


class TestQcelsRun:
    def test_exact_run_recovers_dense_ground(self, tmp_path):
        config = h2_config(tmp_path, "qcels")
        out = tmp_path / "run"
        assert main(["qcels", "--config", str(config), "--out", str(out)]) == 0
        payload = run_results(out)
        assert payload["schema_version"] == SCHEMA_VERSION
        results = payload["results"]
        exact = dense_ground(tmp_path / "ingested" / "operator.json")
        assert abs(results["energy"] - exact) <= 1e-6 * max(1.0, results["h1"])
        assert results["mode"] == "exact"
        assert results["spc"] is None
        assert (out / "overlap.csv").exists()
        assert (out / "objective.csv").exists()

    def test_identical_config_reproduces_bytes(self, tmp_path):
        config = h2_config(tmp_path, "qcels")
        argv = ["qcels", "--config", str(config), "--mode", "shots",
                "--spc", "100"]
        assert main(argv + ["--out", str(tmp_path / "r1")]) == 0
        assert main(argv + ["--out", str(tmp_path / "r2")]) == 0
        assert main(argv + ["--out", str(tmp_path / "r3"), "--threads", "3"]) == 0
        reference = (tmp_path / "r1" / "results.json").read_bytes()
        assert (tmp_path / "r2" / "results.json").read_bytes() == reference
        assert (tmp_path / "r3" / "results.json").read_bytes() == reference
        overlap = (tmp_path / "r1" / "overlap.csv").read_bytes()
        assert (tmp_path / "r3" / "overlap.csv").read_bytes() == overlap

    def test_shot_run_stderr_columns_obey_formula(self, tmp_path):
        config = h2_config(tmp_path, "qcels")
        out = tmp_path / "run"
        assert main(["qcels", "--config", str(config), "--out", str(out),
                     "--mode", "shots", "--spc", "100"]) == 0
        lines = (out / "overlap.csv").read_text().splitlines()
        assert lines[1] == "n,t,re,im,stderr_re,stderr_im"
        for row in lines[2:]:
            _, _, re, im, err_re, err_im = (float(x) for x in row.split(","))
            assert err_re == math.sqrt((1.0 - re * re) / 100)
            assert err_im == math.sqrt((1.0 - im * im) / 100)

    def test_embedded_config_carries_overrides(self, tmp_path):
        config = h2_config(tmp_path, "qcels")
        out = tmp_path / "run"
        assert main(["qcels", "--config", str(config), "--out", str(out),
                     "--mode", "shots", "--spc", "250", "--seed", "9"]) == 0
        embedded = run_results(out)["config"]
        assert embedded["spc"] == 250
        assert embedded["seed"] == 9
        assert embedded["mode"] == "shots"
        assert json.loads((out / "config.json").read_text()) == embedded

    def test_identity_operator_exits_1(self, tmp_path, capsys):
        operator = tmp_path / "identity.json"
        operator.write_text(PauliSum(1, {PauliString(): 2.0}).to_json())
        config = write_config(tmp_path, {
            "algorithm": "qcels",
            "operator": str(operator),
            "state": {"basis": 0},
        })
        code = main(["qcels", "--config", str(config),
                     "--out", str(tmp_path / "run")])
        assert code == 1
        assert "identity" in capsys.readouterr().err


class TestQcm4Run:
    def test_exact_run_matches_dense_ground(self, tmp_path):
        config = h2_config(tmp_path, "qcm4", qcm4={"filter": True})
        out = tmp_path / "run"
        assert main(["qcm4", "--config", str(config), "--out", str(out)]) == 0
        results = run_results(out)["results"]
        exact = dense_ground(tmp_path / "ingested" / "operator.json")
        assert results["energy"] == pytest.approx(exact, abs=1e-10)
        assert results["term_counts"] == [15, 24, 24, 24]
        assert results["bootstrap"] is None
        assert results["n_circuits"] >= 1

    def test_shot_run_writes_bootstrap(self, tmp_path):
        config = h2_config(tmp_path, "qcm4", qcm4={"resamples": 50})
        out = tmp_path / "run"
        assert main(["qcm4", "--config", str(config), "--out", str(out),
                     "--mode", "shots", "--spc", "2000"]) == 0
        results = run_results(out)["results"]
        assert results["bootstrap"]["resamples"] == 50
        assert results["bootstrap"]["std"] > 0
        rows = (out / "bootstrap.csv").read_text().splitlines()
        assert rows[0] == "resample,energy"
        assert len(rows) == 51

    def test_moment_report_written(self, tmp_path):
        config = h2_config(tmp_path, "qcm4", qcm4={"filter": True})
        out = tmp_path / "run"
        assert main(["qcm4", "--config", str(config), "--out", str(out)]) == 0
        report = json.loads((out / "moment_report.json").read_text())
        assert report["term_counts"] == [15, 24, 24, 24]
        assert report["n_circuits"] == run_results(out)["results"]["n_circuits"]
        assert "filter" in report

    def test_width_mismatch_exits_2(self, tmp_path, capsys):
        config = write_config(tmp_path, {
            "algorithm": "qcm4",
            "operator": str(TOY_3Q),
            "state": {"determinants": str(H2_CI)},
        })
        code = main(["qcm4", "--config", str(config),
                     "--out", str(tmp_path / "run")])
        assert code == 2
        assert "qubits" in capsys.readouterr().err

    def test_basis_index_out_of_range_exits_2(self, tmp_path):
        config = write_config(tmp_path, {
            "algorithm": "qcm4",
            "operator": str(TOY_3Q),
            "state": {"basis": 8},
        })
        assert main(["qcm4", "--config", str(config),
                     "--out", str(tmp_path / "run")]) == 2


class TestRecompileRun:
    def test_artifacts_and_determinism(self, tmp_path):
        config = write_config(tmp_path, {
            "algorithm": "recompile",
            "operator": str(TOY_3Q),
            "state": {"basis": 1},
            "recompile": {"n_points": 3, "layers": 1,
                          "max_iterations": 40, "restarts": 1},
        })
        argv = ["recompile", "--config", str(config)]
        assert main(argv + ["--out", str(tmp_path / "r1")]) == 0
        assert main(argv + ["--out", str(tmp_path / "r2")]) == 0
        reference = (tmp_path / "r1" / "results.json").read_bytes()
        assert (tmp_path / "r2" / "results.json").read_bytes() == reference
        results = run_results(tmp_path / "r1")["results"]
        assert 0.0 < results["mean_fidelity"] <= 1.0
        assert results["min_fidelity"] <= results["max_fidelity"]
        compilation = json.loads(
            (tmp_path / "r1" / "series_compilation.json").read_text()
        )
        assert len(compilation["results"]) == 3
        rows = (tmp_path / "r1" / "fidelity.csv").read_text().splitlines()
        assert rows[0] == "step,fidelity,objective,iterations"
        assert len(rows) == 4


class TestQcelsRecompiledRun:
    def test_inline_compilation_artifact(self, tmp_path):
        config = write_config(tmp_path, {
            "algorithm": "qcels",
            "operator": str(TOY_3Q),
            "state": {"basis": 1},
            "mode": "recompiled",
            "qcels": {
                "n_points": 3,
                "compile": {"layers": 1, "max_iterations": 40, "restarts": 1},
            },
        })
        out = tmp_path / "run"
        assert main(["qcels", "--config", str(config), "--out", str(out)]) == 0
        results = run_results(out)["results"]
        assert results["mode"] == "recompiled"
        assert results["mean_fidelity"] is not None
        assert results["two_qubit_depth"] > 0
        assert (out / "series_compilation.json").exists()


class TestReport:
    def run_pair(self, tmp_path):
        config = h2_config(tmp_path, "qcm4")
        exact_dir = tmp_path / "exact"
        shots_dir = tmp_path / "shots"
        assert main(["qcm4", "--config", str(config),
                     "--out", str(exact_dir)]) == 0
        assert main(["qcm4", "--config", str(config), "--out", str(shots_dir),
                     "--mode", "shots", "--spc", "100"]) == 0
        return exact_dir, shots_dir

    def test_empty_input_gives_header_only(self, tmp_path, capsys):
        out = tmp_path / "rep"
        assert main(["report", "--out", str(out)]) == 0
        table = capsys.readouterr().out.splitlines()
        assert len(table) == 2
        assert table[0].startswith("| run ")
        csv_rows = (out / "report.csv").read_text().splitlines()
        assert len(csv_rows) == 1

    def test_delta_equals_energy_difference(self, tmp_path, capsys):
        exact_dir, shots_dir = self.run_pair(tmp_path)
        capsys.readouterr()
        out = tmp_path / "rep"
        assert main(["report", str(exact_dir), str(shots_dir),
                     "--out", str(out)]) == 0
        exact_e = run_results(exact_dir)["results"]["energy"]
        shots_e = run_results(shots_dir)["results"]["energy"]
        rows = (out / "report.csv").read_text().splitlines()
        header = rows[0].split(",")
        exact_row = dict(zip(header, rows[1].split(",")))
        shots_row = dict(zip(header, rows[2].split(",")))
        assert float(exact_row["delta_vs_exact"]) == 0.0
        assert float(shots_row["delta_vs_exact"]) == shots_e - exact_e
        assert shots_row["spc"] == "100"
        assert exact_row["spc"] == ""

    def test_regeneration_is_deterministic(self, tmp_path, capsys):
        exact_dir, shots_dir = self.run_pair(tmp_path)
        capsys.readouterr()
        assert main(["report", str(exact_dir), str(shots_dir)]) == 0
        first = capsys.readouterr().out
        assert main(["report", str(exact_dir), str(shots_dir)]) == 0
        assert capsys.readouterr().out == first

    def test_missing_results_exits_2(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["report", str(empty)]) == 2

    def test_schema_mismatch_exits_2(self, tmp_path, capsys):
        rogue = tmp_path / "rogue"
        rogue.mkdir()
        (rogue / "results.json").write_text(
            json.dumps({"schema_version": 99, "results": {}})
        )
        assert main(["report", str(rogue)]) == 2
        assert "schema" in capsys.readouterr().err
