"""Command-line front end: listing, describing, running campaigns, reports and errors."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from rescat.cli import main
from rescat.suites import REGISTRY


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "rescat", *args], capture_output=True, text=True, cwd=cwd)


def test_list_names_every_check(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(cid in out for cid in REGISTRY)
    assert "moebius" in out


def test_describe(capsys):
    assert main(["describe", "moebius"]) == 0
    assert "16-point" in capsys.readouterr().out


def test_describe_unknown_check_exits_2(capsys):
    assert main(["describe", "no-such-check"]) == 2
    assert "UNKNOWN_CHECK" in capsys.readouterr().err


def test_run_bundled_campaign_passes(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert main(["run", "moebius", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["campaign"] == "moebius"
    assert "PASS: 5/5" in capsys.readouterr().out  # spec load plus four checks


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run("run", "restriction-laws", "--model", "finset", "--report", str(path)).returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_json_format_on_stdout(capsys):
    assert main(["run", "heisenberg-lie", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["config"]["prime"] == 5


def test_unsupported_model_is_skipped_and_fails(tmp_path, capsys):
    camp = tmp_path / "c.json"
    camp.write_text(json.dumps({"campaign": "c", "config": {"model": "poly"}, "checks": ["moebius"]}))
    assert main(["run", str(camp)]) == 1
    assert "SKIPPED" in capsys.readouterr().out


def test_parse_error_reports_line_and_column(tmp_path):
    camp = tmp_path / "bad.json"
    camp.write_text('{\n  "campaign": "x",\n  "checks": ["moebius",, ]\n}\n')
    res = run("run", str(camp))
    assert res.returncode == 2
    assert "bad.json:3:" in res.stderr


def test_unknown_check_in_campaign_reports_position(tmp_path):
    camp = tmp_path / "c.json"
    camp.write_text('{\n  "campaign": "x",\n  "checks": ["moebius", "nope"]\n}\n')
    res = run("run", str(camp))
    assert res.returncode == 2
    assert "c.json:3:" in res.stderr and "nope" in res.stderr


@pytest.mark.parametrize("campaign", ["restriction-laws", "principal-bundles"])
def test_bundled_campaigns_exit_zero(campaign):
    assert run("run", campaign).returncode == 0
