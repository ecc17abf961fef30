"""Command line interface: subcommands, formats, exit codes."""

import json
import subprocess
import sys

import pytest

from odeident.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_list_systems(capsys):
    code, out, err = _run(capsys, "list-systems")
    assert code == 0
    names = {entry["name"] for entry in json.loads(out)}
    assert "simple-zero" in names


def test_list_systems_csv(capsys):
    code, out, _ = _run(capsys, "list-systems", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "name,description"


def test_theta_json(capsys):
    code, out, _ = _run(capsys, "theta", "--system", "simple-zero",
                        "--grid", "401")
    assert code == 0
    payload = json.loads(out)
    assert payload["orders"] == [0, 1, 0]
    assert payload["points"][1] == pytest.approx(0.5, abs=1e-6)


def test_theta_csv_header(capsys):
    code, out, _ = _run(capsys, "theta", "--system", "simple-zero",
                        "--grid", "401", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "point,order,coefficient,residual,window"


def test_analyze_json_deterministic(tmp_path, capsys):
    args = ("analyze", "--system", "simple-zero", "--grid", "401",
            "--eps", "1e-1")
    code1, out1, _ = _run(capsys, *args)
    code2, out2, _ = _run(capsys, *args)
    assert code1 == code2 == 0
    a, b = json.loads(out1), json.loads(out2)
    a.pop("timings")
    b.pop("timings")
    assert a == b


def test_analyze_csv(capsys):
    code, out, _ = _run(capsys, "analyze", "--system", "simple-zero",
                        "--grid", "401", "--eps", "1e-1",
                        "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,det,muA"
    assert len(lines) == 402


def test_analyze_writes_file(tmp_path, capsys):
    out_file = tmp_path / "report.json"
    code, out, _ = _run(capsys, "analyze", "--system", "no-zero",
                        "--grid", "401", "--eps", "1e-1",
                        "--out", str(out_file))
    assert code == 0
    assert out == ""
    payload = json.loads(out_file.read_text())
    assert payload["system"]["name"] == "no-zero"


def test_analyze_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "system": "simple-zero", "grid": 401, "eps": [0.1],
        "directions": [["1"]],
    }))
    code, out, _ = _run(capsys, "analyze", "--config", str(cfg))
    assert code == 0
    payload = json.loads(out)
    assert len(payload["experiment"]["rows"]) == 1


def test_check_class(capsys):
    code, out, _ = _run(capsys, "check-class", "--system", "simple-zero",
                        "--grid", "401", "--direction", "1",
                        "--eps", "1e-1")
    assert code == 0
    certs = json.loads(out)["certificates"]
    assert len(certs) == 2
    assert all(c["passed"] for c in certs)


def test_check_class_csv(capsys):
    code, out, _ = _run(capsys, "check-class", "--system", "simple-zero",
                        "--grid", "401", "--direction", "1",
                        "--eps", "1e-1", "--format", "csv")
    assert code == 0
    header = out.splitlines()[0]
    assert header.startswith("direction,eps,interval,tau,theta,variant")


def test_distinguish(capsys):
    code, out, _ = _run(capsys, "distinguish", "--system", "simple-zero",
                        "--grid", "401", "--p1", "1",
                        "--p2", "1 + 0.1 * t")
    assert code == 0
    verdict = json.loads(out)
    assert verdict["distinguishable"] is True


def test_distinguish_csv(capsys):
    code, out, _ = _run(capsys, "distinguish", "--system", "simple-zero",
                        "--grid", "401", "--p1", "1", "--p2", "2",
                        "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "theta,separation"


def test_sweep(capsys):
    code, out, _ = _run(capsys, "sweep", "--system", "no-zero",
                        "--grid", "401", "--eps", "1e-1,1e-2",
                        "--direction", "1", "--direction", "t",
                        "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "direction,eps,certified,distinguished,separation,witness"
    assert len(lines) == 5   # 2 directions x 2 eps


def test_mininorm_path(capsys):
    code, out, _ = _run(capsys, "mininorm-path", "--system",
                        "tall-rank-drop", "--grid", "401")
    assert code == 0
    payload = json.loads(out)
    assert len(payload["rank_drops"]) == 1


def test_mininorm_path_csv(capsys):
    code, out, _ = _run(capsys, "mininorm-path", "--system",
                        "tall-rank-drop", "--grid", "401",
                        "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "t,muA"


class TestExitCodes:
    def test_unknown_system_is_2(self, capsys):
        code, _, err = _run(capsys, "analyze", "--system", "nope")
        assert code == 2
        assert "unknown system" in err

    def test_bad_expression_is_2(self, capsys):
        code, _, err = _run(capsys, "check-class", "--system",
                            "simple-zero", "--direction", "1 +")
        assert code == 2
        assert "error" in err

    def test_missing_config_file_is_2(self, capsys):
        code, _, err = _run(capsys, "analyze", "--config",
                            "/nonexistent/cfg.json")
        assert code == 2

    def test_invalid_json_config_is_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        code, _, err = _run(capsys, "analyze", "--config", str(cfg))
        assert code == 2

    def test_analysis_failure_is_1(self, capsys):
        # double-zero cannot be treated as a tall-mode system
        code, _, err = _run(capsys, "analyze", "--system", "double-zero",
                            "--mode", "h", "--grid", "401")
        assert code == 1
        assert "stage 'observation'" in err

    def test_missing_direction_is_2(self, capsys):
        code, _, err = _run(capsys, "check-class", "--system",
                            "simple-zero")
        assert code == 2

    def test_broken_pipe_exits_quietly(self):
        # a head-style consumer closing stdout early must not traceback
        code = ("from odeident.cli import main; import sys; "
                "sys.exit(main(['mininorm-path', '--system', "
                "'tall-rank-drop', '--format', 'csv']))")
        proc = subprocess.Popen([sys.executable, "-c", code],
                                stdout=subprocess.PIPE,
                                stderr=subprocess.PIPE)
        proc.stdout.close()
        assert proc.wait() == 1
        assert proc.stderr.read() == b""
