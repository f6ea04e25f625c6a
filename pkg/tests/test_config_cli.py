import csv
import io
import json
import os
import subprocess
import sys

import pytest

from qcdma.cli import TABLE_COLUMNS, main
from qcdma.config import ConfigFileError, ExperimentSpec, load_config


def run_cli(*args, env=None, cwd=None):
    return subprocess.run([sys.executable, "-m", "qcdma.cli", *args], capture_output=True,
                          text=True, env={**os.environ, **(env or {})}, cwd=cwd)


def data_lines(text):
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.yaml"
    p.write_text("")
    spec = load_config(p)
    assert spec == ExperimentSpec()
    assert (spec.n, spec.users, spec.trials, spec.samples_per_chip, spec.seed) == \
           ((10,), (5,), 200, 2, 0)


def test_flag_beats_file(tmp_path, capsys):
    p = tmp_path / "c.yaml"
    p.write_text("experiment: code-check\nn: 14\nusers: 3\nformat: json\n")
    assert load_config(p).n == (14,)
    assert main(["code-check", "--config", str(p), "--n", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["n"] == 3 and out["spec"]["users"] == [3]


def test_bad_value_names_key(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("users: fifty\n")
    with pytest.raises(ConfigFileError, match="^users:"):
        load_config(p)
    r = run_cli("loss-table", "--config", str(p))
    assert r.returncode == 2 and "users" in r.stderr


@pytest.mark.parametrize("text,key", [("colour: red\n", "colour"), ("trials: 1.5\n", "trials"),
                                      ("in_phase: maybe\n", "in_phase"),
                                      ("bits: [101, 2]\n", "bits")])
def test_other_config_errors(tmp_path, text, key):
    p = tmp_path / "bad.yaml"
    p.write_text(text)
    with pytest.raises(ConfigFileError, match=key):
        load_config(p)


def test_list_valued_keys(tmp_path):
    p = tmp_path / "grid.yaml"
    p.write_text("n: [8, 10]\nusers: 5\nbits: ['1011', '0110']\nfilter: brickwall\n")
    spec = load_config(p)
    assert spec.n == (8, 10) and spec.bits == 4 and spec.patterns == ("1011", "0110")
    assert spec.filter_rule == "brickwall"


def test_large_guardrail():
    with pytest.raises(ConfigFileError, match="allow_large"):
        ExperimentSpec(n=(16,))
    assert ExperimentSpec(n=(16,), allow_large=True).n == (16,)
    r = run_cli("code-check", "--n", "16")
    assert r.returncode == 2 and "allow_large" in r.stderr


def test_usage_errors():
    assert run_cli().returncode == 2
    assert run_cli("loss-table", "--filter-rule", "fuzzy").returncode == 2
    assert run_cli("loss-table", "--users", "300", "--n", "8").returncode == 2


def test_unwritable_output(tmp_path):
    r = run_cli("code-check", "--n", "3", "--out", str(tmp_path / "no" / "such" / "f.txt"))
    assert r.returncode == 1 and "cannot write" in r.stderr


def test_code_check_n3(capsys):
    assert main(["code-check", "--n", "3"]) == 0
    out = capsys.readouterr().out
    rows = [ln.split() for ln in data_lines(out) if ln.strip() and ":" not in ln]
    assert len(rows) == 7
    for i, row in enumerate(rows):
        assert [int(v) for v in row] == [7 if j == i else -1 for j in range(7)]
    assert "# experiment=code-check" in out


def test_code_export(tmp_path):
    out = tmp_path / "code.txt"
    assert main(["code-check", "--n", "4", "--code-out", str(out),
                 "--out", str(tmp_path / "m.txt")]) == 0
    assert len(out.read_text().split()) == 15


def test_loss_table_csv(capsys):
    assert main(["loss-table", "--n", "6", "--users", "2,3", "--trials", "10"]) == 0
    text = capsys.readouterr().out
    assert "# trials=10" in text and "# topology=ring" in text
    rows = list(csv.DictReader(io.StringIO("\n".join(data_lines(text)))))
    assert list(rows[0]) == TABLE_COLUMNS
    assert [int(r["N"]) for r in rows] == [2, 3]
    assert all(r["metric"] == "loss" and r["S"] == "63" for r in rows)


def test_text_and_json_tables(capsys):
    assert main(["fidelity-table", "--n", "6", "--users", "2", "--format", "text-table"]) == 0
    text = capsys.readouterr().out
    assert "infidelity[plus]" in text and "2^6-1 = 63" in text
    assert main(["crosstalk-table", "--n", "6", "--users", "2", "--runs", "5",
                 "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["spec"]["runs"] == 5 and payload["results"][0]["metric"] == "crosstalk"


def test_density_trace_files(tmp_path):
    out = tmp_path / "trace.csv"
    assert main(["density-trace", "--n", "5,6", "--users", "2", "--bits", "101,011",
                 "--out", str(out)]) == 0
    for n in (5, 6):
        text = (tmp_path / f"trace_n{n}.csv").read_text()
        assert f"# trace_n={n}" in text
        assert data_lines(text)[0] == "t,rx1,rx2"


def test_byte_identical_across_threads(tmp_path):
    outs = []
    for threads in ("1", "8"):
        (tmp_path / threads).mkdir()
        path = tmp_path / threads / "x.csv"
        r = run_cli("crosstalk-table", "--n", "7", "--users", "3", "--runs", "20", "--seed", "5",
                    "--out", "x.csv", env={"QCDMA_THREADS": threads}, cwd=path.parent)
        assert r.returncode == 0, r.stderr
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
