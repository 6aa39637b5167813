"""CLI behavior: outputs, spec files, exit codes, round-trips."""

import json
import math
import subprocess

import pytest

from ecomp import EComPoisson, parse_phi
from ecomp.cli import main
from ecomp.phi import catalog_entries


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv, "--format", "json")
    assert code == 0, err
    return json.loads(out)


class TestPmf:
    def test_csv_negative_binomial_closed_form(self, capsys):
        code, out, _ = run_cli(
            capsys, "pmf", "--phi", "ratio:1.0", "--rho", "0.5",
            "--n", "0..5", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "n,pmf"
        for line in lines[1:]:
            n_s, p_s = line.split(",")
            n = int(n_s)
            want = (n + 1) * 0.5**n * 0.25
            assert float(p_s) == pytest.approx(want, rel=1e-5)  # 6 sig digits

    def test_json_full_precision(self, capsys):
        payload = run_json(
            capsys, "pmf", "--phi", "id", "--rho", "1.5", "--n", "0..8",
        )
        d = EComPoisson(1.5, parse_phi("id"))
        assert payload["n"] == list(range(9))
        for n, p in zip(payload["n"], payload["pmf"]):
            assert p == d.pmf(n)      # 17g JSON floats round-trip exactly
        assert payload["z"] == d.z_value
        assert payload["spec"]["phi"] == "id"

    def test_index_list_grammar(self, capsys):
        payload = run_json(
            capsys, "pmf", "--phi", "id", "--rho", "1.0", "--n", "1,3,5..7",
        )
        assert payload["n"] == [1, 3, 5, 6, 7]

    def test_table_format(self, capsys):
        code, out, _ = run_cli(
            capsys, "pmf", "--phi", "id", "--rho", "1.0", "--n", "0..3",
        )
        assert code == 0
        assert out.splitlines()[0].split() == ["n", "pmf"]


class TestMoments:
    def test_poisson_values(self, capsys):
        payload = run_json(
            capsys, "moments", "--phi", "id", "--rho", "2.0",
            "--orders", "1,2",
        )
        assert payload["moments"][0] == pytest.approx(2.0, rel=1e-12)
        assert payload["moments"][1] == pytest.approx(6.0, rel=1e-12)
        assert payload["factorial_moments"] == pytest.approx([2.0, 4.0],
                                                             rel=1e-10)
        assert payload["dispersion_index"] == pytest.approx(1.0, abs=1e-10)

    def test_extended_spec_file(self, capsys, tmp_path):
        spec = {"phi": "id", "rho": 1.0, "alpha": 1.0, "beta": 2.0,
                "gamma": 1.0}
        path = tmp_path / "ext.json"
        path.write_text(json.dumps(spec))
        payload = run_json(capsys, "moments", "--spec", str(path))
        assert payload["spec"]["beta"] == 2.0
        assert payload["mean"] == pytest.approx(
            payload["moments"][0], rel=1e-12
        )


class TestDispersion:
    def test_com_poisson_under(self, capsys):
        payload = run_json(
            capsys, "dispersion", "--phi", "power:2.0", "--rho", "2.0",
        )
        assert payload["by_d"]["classification"] == "under"
        assert payload["numeric"]["classification"] == "under"
        assert payload["numeric"]["numeric_index"] < 1.0

    def test_table_lines(self, capsys):
        code, out, _ = run_cli(
            capsys, "dispersion", "--phi", "ratioquadratic", "--format",
            "table",
        )
        assert code == 0
        assert "by_derivative: n/a" in out
        assert "by_flags: indeterminate" in out


class TestGamma:
    def test_identity_reduces_to_gamma(self, capsys):
        payload = run_json(
            capsys, "gamma", "--phi", "id", "--x", "0.5,1.5", "--quantity", "w",
        )
        assert payload["values"][0] == pytest.approx(math.gamma(0.5), rel=1e-9)
        assert payload["values"][1] == pytest.approx(math.gamma(1.5), rel=1e-9)

    def test_psi_digamma(self, capsys):
        payload = run_json(
            capsys, "gamma", "--phi", "id", "--x", "1.0,2.0",
            "--quantity", "psi",
        )
        assert payload["values"][0] == pytest.approx(-0.5772156649015329,
                                                     abs=1e-5)
        assert payload["values"][1] == pytest.approx(0.4227843350984671,
                                                     abs=1e-5)


class TestSample:
    def test_deterministic(self, capsys):
        a = run_json(capsys, "sample", "--phi", "id", "--rho", "1.0",
                     "--count", "25", "--seed", "7")
        b = run_json(capsys, "sample", "--phi", "id", "--rho", "1.0",
                     "--count", "25", "--seed", "7")
        assert a["samples"] == b["samples"]
        assert len(a["samples"]) == 25
        assert all(isinstance(v, int) and v >= 0 for v in a["samples"])

    def test_extended_spec_rejected(self, capsys, tmp_path):
        path = tmp_path / "ext.json"
        path.write_text(json.dumps({"phi": "id", "rho": 1.0, "beta": 2.0}))
        code, _, err = run_cli(capsys, "sample", "--spec", str(path))
        assert code == 2
        assert "two-parameter" in json.loads(err)["message"]


class TestSimulate:
    def test_compare_block(self, capsys):
        payload = run_json(
            capsys, "simulate", "--phi", "id", "--lambda", "0.5", "--mu",
            "1.0", "--horizon", "20000", "--seed", "42", "--compare",
        )
        assert payload["comparison"]["tv_distance"] <= 0.05
        assert payload["result"]["kernel"] in ("compiled", "python")
        assert payload["scenario"]["lambda"] == 0.5

    def test_csv_histogram(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--phi", "id", "--lambda", "0.5", "--mu",
            "1.0", "--horizon", "5000", "--seed", "1", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "state,fraction"
        fractions = [float(line.split(",")[1]) for line in lines[1:]]
        assert sum(fractions) == pytest.approx(1.0, abs=1e-5)  # 6 sig digits

    def test_scenario_spec_file_with_seed_override(self, capsys, tmp_path):
        spec = {"phi": "id", "lambda": 0.5, "mu": 1.0, "horizon": 5000.0,
                "seed": 3}
        path = tmp_path / "queue.json"
        path.write_text(json.dumps(spec))
        a = run_json(capsys, "simulate", "--spec", str(path))
        b = run_json(capsys, "simulate", "--spec", str(path), "--seed", "4")
        assert a["scenario"]["seed"] == 3
        assert b["scenario"]["seed"] == 4
        assert a["result"]["jumps"] != b["result"]["jumps"]

    def test_python_kernel_flag(self, capsys):
        payload = run_json(
            capsys, "simulate", "--phi", "id", "--lambda", "0.5", "--mu",
            "1.0", "--horizon", "2000", "--kernel", "python",
        )
        assert payload["result"]["kernel"] == "python"

    def test_missing_rates(self, capsys):
        code, _, err = run_cli(capsys, "simulate", "--phi", "id")
        assert code == 2
        assert json.loads(err)["error"] == "ConfigError"


class TestCatalog:
    def test_matches_catalog_module(self, capsys):
        payload = run_json(capsys, "catalog")
        entries = catalog_entries()
        assert len(payload["catalog"]) == len(entries)
        by_kind = {r["kind"]: r for r in payload["catalog"]}
        for entry in entries:
            row = by_kind[entry.kind]
            phi = parse_phi(entry.example)
            assert row["flags"] == sorted(phi.flags)
            assert row["nondecreasing"] == phi.nondecreasing
            lim = row["limit"]
            if lim == "inf":
                assert math.isinf(phi.limit)
            else:
                assert lim == phi.limit

    def test_table_lists_ids(self, capsys):
        code, out, _ = run_cli(capsys, "catalog", "--format", "table")
        assert code == 0
        assert "ratio:a" in out or "ratio" in out


class TestSpecRoundTrip:
    def test_emitted_spec_reproduces_run(self, capsys, tmp_path):
        first = run_json(
            capsys, "pmf", "--phi", "lambert", "--rho", "1.2", "--n", "0..12",
        )
        path = tmp_path / "dist.json"
        path.write_text(json.dumps(first["spec"]))
        second = run_json(capsys, "pmf", "--spec", str(path), "--n", "0..12")
        assert second["pmf"] == first["pmf"]
        assert second["z"] == first["z"]
        assert second["spec"] == first["spec"]


class TestExitCodes:
    def test_numeric_failure_is_one(self, capsys):
        code, _, err = run_cli(
            capsys, "pmf", "--phi", "ratio:1.0", "--rho", "1.0",
        )
        assert code == 1
        assert json.loads(err)["error"] == "DivergenceError"

    def test_malformed_spec_is_two(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run_cli(capsys, "pmf", "--spec", str(path))
        assert code == 2
        assert json.loads(err)["error"] == "ConfigError"

    def test_unknown_phi_is_two(self, capsys):
        code, _, err = run_cli(capsys, "pmf", "--phi", "cubic", "--rho", "1.0")
        assert code == 2

    def test_usage_error_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["pmf", "--phi", "id", "--rho", "1.0", "--format", "yaml"])
        assert exc.value.code == 2

    def test_missing_distribution_flags(self, capsys):
        code, _, err = run_cli(capsys, "pmf")
        assert code == 2
        assert "required" in json.loads(err)["message"]


class TestOutFlag:
    def test_writes_file(self, capsys, tmp_path):
        path = tmp_path / "out.json"
        code, out, _ = run_cli(
            capsys, "moments", "--phi", "id", "--rho", "1.0",
            "--format", "json", "--out", str(path),
        )
        assert code == 0
        assert out == ""
        payload = json.loads(path.read_text())
        assert payload["mean"] == pytest.approx(1.0, rel=1e-12)


def test_console_script_installed():
    out = subprocess.run(
        ["ecomp", "moments", "--phi", "id", "--rho", "2.0", "--format",
         "json"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["moments"][0] == pytest.approx(2.0,
                                                                 rel=1e-12)
