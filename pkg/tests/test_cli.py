import csv
import json
import textwrap

import pytest

from prscope import cli


def run_json(tmp_path, *argv, name="report.json"):
    out = tmp_path / name
    code = cli.run([*argv, "--out", str(out), "--quiet"])
    return code, json.loads(out.read_text()) if out.exists() else None


def test_usage_errors_exit_with_two(capsys):
    assert cli.run(["purity-check", "--bogus"]) == cli.EXIT_USAGE
    assert cli.run([]) == cli.EXIT_USAGE
    assert cli.run(["no-such-check"]) == cli.EXIT_USAGE
    capsys.readouterr()


def test_version():
    assert cli.run(["--version"]) == 0


def test_every_subcommand_documents_its_check(capsys):
    for name in cli.Command.registry:
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args([name, "--help"])
        out = capsys.readouterr().out
        assert "checks:" in out
        assert "reference:" in out
        assert cli.Command.registry[name].reference.split()[0] in out


def test_purity_check_report(tmp_path):
    code, report = run_json(tmp_path, "purity-check", "--n", "8", "--k", "2", "--samples", "500")
    assert code == cli.EXIT_PASS
    assert report["subcommand"] == "purity-check"
    assert report["params"]["n"] == 8
    assert report["report"]["target"] == pytest.approx(0.264591, abs=1e-6)
    assert report["report"]["pass"] is True
    assert {"timestamp", "params", "report", "subcommand"} == set(report)


def test_failing_check_exits_with_one(tmp_path):
    zero = '{"variant": "fixed_list", "states": [[[1, 0], [0, 0], [0, 0], [0, 0]]]}'
    code, report = run_json(tmp_path, "purity-check", "--n", "2", "--ensemble", zero, "--samples", "50")
    assert code == cli.EXIT_FAIL
    assert report["report"]["pass"] is False


def test_domain_errors_exit_with_two(tmp_path, capsys):
    code, report = run_json(tmp_path, "lindep", "--n", "4", "--d", "4", "--trials", "10")
    assert code == cli.EXIT_USAGE
    assert report is None
    assert capsys.readouterr().err.startswith("prscope lindep: error:")


def test_missing_parameter(tmp_path, capsys):
    code, _ = run_json(tmp_path, "schmidt-audit")
    assert code == cli.EXIT_USAGE
    assert "schmidt-audit needs --n" in capsys.readouterr().err


def test_lindep_report(tmp_path):
    code, report = run_json(tmp_path, "lindep", "--n", "6", "--d", "2", "--trials", "200")
    assert code == cli.EXIT_PASS
    assert report["report"]["accept_prob_ensemble"] == 1.0
    assert report["params"]["ensemble"]["variant"] == "phased_subspace"


def test_schmidt_audit_report(tmp_path):
    code, report = run_json(tmp_path, "schmidt-audit", "--n", "6", "--depth", "2", "--circuits", "3")
    assert code == cli.EXIT_PASS
    assert report["report"]["max_rank"] <= 16


def test_kwise_verify_report(tmp_path):
    code, report = run_json(tmp_path, "kwise-verify", "--m", "3", "--k", "3", "--subsets", "5")
    assert code == cli.EXIT_PASS
    assert report["report"]["expected"] == 64
    assert len(report["report"]["subsets"]) == 5


def test_same_seed_gives_identical_reports(tmp_path):
    argv = ["pseudoentanglement", "--n", "5", "--d", "2", "--samples", "20", "--seed", "11", "--shards", "3"]
    _, first = run_json(tmp_path, *argv, name="first.json")
    _, second = run_json(tmp_path, *argv, "--threads", "3", name="second.json")
    first.pop("timestamp")
    second.pop("timestamp")
    assert first == second
    _, other = run_json(tmp_path, *argv[:-4], "--seed", "12", name="other.json")
    assert other["report"] != first["report"]


def test_csv_records(tmp_path):
    records = tmp_path / "trials.csv"
    code, _ = run_json(tmp_path, "lindep", "--n", "5", "--d", "1", "--trials", "30", "--csv", str(records))
    assert code == cli.EXIT_PASS
    with records.open() as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["trial_index", "arm", "statistic", "value"]
    assert len(rows) == 1 + 2 * 30
    assert {row[1] for row in rows[1:]} == {"ensemble", "haar"}
    assert {row[2] for row in rows[1:]} == {"accept"}


def test_dump_is_a_readable_ensemble(tmp_path):
    dump = tmp_path / "state.json"
    code, _ = run_json(tmp_path, "purity-check", "--n", "3", "--samples", "20", "--dump", str(dump))
    assert code == cli.EXIT_PASS
    assert json.loads(dump.read_text())["variant"] == "fixed_list"
    code, report = run_json(tmp_path, "frame-potential", "--ensemble", dump.read_text(), name="fixed.json")
    assert code == cli.EXIT_PASS
    assert report["report"]["mean"] == pytest.approx(1.0)


def test_config_file_and_flag_override(tmp_path):
    config_file = tmp_path / "run.yml"
    config_file.write_text(
        textwrap.dedent(
            """
            subcommand: purity-check
            n: 3
            samples: 40
            seed: 3
            """
        )
    )
    code, report = run_json(tmp_path, "purity-check", "--config", str(config_file), "--samples", "60")
    assert code == cli.EXIT_PASS
    assert report["params"]["samples"] == 60
    assert report["params"]["seed"] == 3
    assert report["report"]["details"]["samples"] == 60


def test_config_file_for_another_subcommand(tmp_path, capsys):
    config_file = tmp_path / "run.yml"
    config_file.write_text("subcommand: lindep\nn: 3\nd: 1\n")
    code, _ = run_json(tmp_path, "purity-check", "--config", str(config_file))
    assert code == cli.EXIT_USAGE
    assert "not 'purity-check'" in capsys.readouterr().err


def test_summary_on_standard_output(tmp_path, capsys):
    code = cli.run(["kwise-verify", "--m", "2", "--k", "2", "--out", str(tmp_path / "k.json")])
    assert code == cli.EXIT_PASS
    assert "IndependenceReport [PASS]" in capsys.readouterr().out
