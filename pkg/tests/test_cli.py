import csv
import io
import json
import subprocess
import sys

import pytest

from bernoulli_lpp.cli import main
from bernoulli_lpp.env import format_env, gen_bernoulli_env, parse_env
from bernoulli_lpp.lpp import passage_G
from bernoulli_lpp.seeds import SeedSpec


@pytest.fixture
def fig1_file(tmp_path, fig1):
    path = tmp_path / "fig1.env"
    path.write_text(format_env(fig1))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_regions_on_figure(capsys, fig1_file):
    code, out, _ = run(capsys, "regions", "--env", fig1_file)
    data = json.loads(out)
    assert code == 0 and data["breakpoints"] == ["1/2"] and data["regions"] == 2


def test_regions_csv(capsys, fig1_file):
    code, out, _ = run(capsys, "regions", "--env", fig1_file, "--format", "csv")
    assert code == 0 and out.splitlines()[2] == "1,1,2,2,0,4"


def test_passage_on_figure(capsys, fig1_file):
    code, out, _ = run(capsys, "passage", "--env", fig1_file, "--alpha", "0", "--beta", "1")
    assert code == 0 and out.strip() == "4"
    _, out, _ = run(capsys, "passage", "--env", fig1_file, "--beta", "1/3")
    assert json.loads(out) == "13/3"


def test_passage_json_and_csv_agree(capsys, fig1_file):
    _, j, _ = run(capsys, "passage", "--env", fig1_file, "--alpha", "1/2", "--beta", "1/3")
    _, c, _ = run(capsys, "passage", "--env", fig1_file, "--alpha", "1/2", "--beta", "1/3",
                  "--format", "csv")
    row = next(csv.DictReader(io.StringIO(c)))
    assert row["G"] == json.loads(j)


def test_bounds(capsys, fig1_file):
    code, out, _ = run(capsys, "bounds", "--env", fig1_file)
    data = json.loads(out)
    assert code == 0 and data["naive_bound"] == 1 and data["totient_bound"] >= 1


def test_gen_env_roundtrip(capsys):
    code, out, _ = run(capsys, "gen-env", "--m", "9", "--n", "7", "--p", "0.3", "--seed", "5")
    env = parse_env(out)
    assert code == 0 and env == gen_bernoulli_env(9, 7, 0.3, SeedSpec(5, "gen-env"))
    _, j, _ = run(capsys, "gen-env", "--m", "9", "--n", "7", "--p", "0.3", "--seed", "5", "--format", "json")
    assert parse_env(json.loads(j)["env"]) == env


def test_gen_env_pipe_into_passage():
    gen = subprocess.run([sys.executable, "-m", "bernoulli_lpp.cli", "gen-env", "--m", "12", "--n", "10",
                          "--seed", "2"], capture_output=True, text=True, check=True)
    got = subprocess.run([sys.executable, "-m", "bernoulli_lpp.cli", "passage", "--beta", "1/2"],
                         input=gen.stdout, capture_output=True, text=True, check=True)
    env = gen_bernoulli_env(12, 10, 0.5, SeedSpec(2, "gen-env"))
    expect = passage_G(env, (0, "1/2"))
    assert json.loads(got.stdout) == (int(expect) if expect.denominator == 1 else f"{expect.numerator}/{expect.denominator}")


def test_gen_env_alignment(capsys):
    code, out, _ = run(capsys, "gen-env", "--model", "alignment", "--alphabet", "3", "--m", "5", "--n", "4")
    assert code == 0 and parse_env(out).provenance.wx.alphabet_size == 3


@pytest.mark.slow
def test_mc_regions_is_deterministic(capsys):
    argv = ["mc-regions", "--model", "independent", "--p", "0.5", "--a", "0.4", "--x", "1",
            "--n", "100:1000:10", "--reps", "25", "--seed", "7"]
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0 and out1 == out2
    assert len(json.loads(out1)["records"]) == 91


def test_mc_json_and_csv_agree(capsys):
    argv = ["mc-edge", "--a", "0.4", "--n", "50:70:10", "--reps", "15", "--seed", "1"]
    _, j, _ = run(capsys, *argv)
    _, c, _ = run(capsys, *argv, "--format", "csv")
    recs = json.loads(j)["records"]
    rows = list(csv.DictReader(io.StringIO(c)))
    for r, row in zip(recs, rows):
        for k in ("n", "min", "mean", "max", "se", "reps"):
            assert float(row[k]) == r[k]


def test_mc_workers_do_not_change_output(capsys):
    argv = ["mc-edge", "--a", "0.4", "--n", "50:70:10", "--reps", "15", "--seed", "1"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--workers", "2")
    assert a == b


def test_mc_tw_and_align(capsys):
    code, out, _ = run(capsys, "mc-tw", "--a", "0.6", "--n", "100", "--reps", "10", "--s=-1,0")
    assert code == 0 and len(json.loads(out)["records"]) == 2
    code, out, _ = run(capsys, "mc-align", "--model", "alignment", "--alphabet", "2", "--a", "0.8",
                       "--n", "100", "--reps", "5")
    assert code == 0


def test_gnuplot(capsys, tmp_path):
    data = tmp_path / "d.csv"
    code, out, _ = run(capsys, "mc-regions", "--n", "50:60:10", "--reps", "2", "--a", "0.4",
                       "--out", str(data), "--gnuplot")
    assert code == 0 and "plot" in out and data.read_text().startswith("n,min,mean")
    code, _, err = run(capsys, "mc-regions", "--n", "50", "--reps", "2", "--gnuplot")
    assert code == 2


def test_out_file(capsys, tmp_path, fig1_file):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "regions", "--env", fig1_file, "--out", str(target))
    assert code == 0 and out == "" and json.loads(target.read_text())["regions"] == 2


def test_dtasep_check(capsys):
    code, out, _ = run(capsys, "dtasep-check", "--reps", "200", "--seed", "4")
    data = json.loads(out)
    assert code == 0 and data["trials"] == 200 and data["mismatches"] == 0


def test_edge_couple(capsys):
    code, out, _ = run(capsys, "edge-couple", "--m", "12", "--n", "8", "--N", "6", "--reps", "5000",
                       "--check")
    data = json.loads(out)
    assert code == 0 and data["within_3se"]


def test_edge_couple_check_failure(capsys, monkeypatch):
    from bernoulli_lpp import cli
    from bernoulli_lpp.dtasep import EdgeProbe
    monkeypatch.setattr(cli, "edge_coupling_probe", lambda *a: EdgeProbe(0.9, 0.1, 0.01, 0.01, 100))
    code, _, err = run(capsys, "edge-couple", "--m", "12", "--n", "8", "--N", "6", "--check")
    assert code == 3 and err.startswith("error: check:") and err.count("\n") == 1


@pytest.mark.parametrize("argv", [
    ["nope"], ["passage", "--bogus"], ["mc-edge"], ["edge-couple", "--n", "5"],
    ["mc-regions", "--n", "1:x"], ["passage", "--beta", "abc"], ["gen-env", "--n", "3"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error: usage:") and err.count("\n") == 1


@pytest.mark.parametrize("argv", [
    ["passage", "--env", "/nonexistent/file.env"],
    ["mc-align", "--model", "alignment", "--alphabet", "1", "--n", "10"],
    ["mc-tw", "--a", "0.8", "--n", "100"],
    ["gen-env", "--m", "3", "--n", "3", "--p", "1.5"],
])
def test_runtime_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and err.startswith("error: ") and err.count("\n") == 1
