import json
import os

import numpy as np
import pytest

from filtered_azema import __version__, cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_writes_csvs_and_manifest(tmp_path, capsys):
    out = tmp_path / "sim"
    code, msg, _ = run(capsys, "simulate", "--kind", "second", "--alpha", "0.5", "--t-max", "1",
                       "--dt", "1e-2", "--paths", "4", "--seed", "7", "-o", str(out))
    assert code == 0
    files = sorted(p.name for p in out.iterdir())
    assert files == ["manifest.json"] + [f"second_{k:06d}.csv" for k in range(4)]
    man = json.loads((out / "manifest.json").read_text())
    assert man["seed"] == 7 and man["n_paths"] == 4 and man["version"] == __version__
    assert man["config"]["alpha"] == 0.5 and len(man["files"]) == 4
    text = (out / "second_000002.csv").read_text().splitlines()
    assert text[0].startswith("# version=") and "seed=7" in text[0] and "dt=0.01" in text[0]
    assert text[1] == "t,W,B,Y,X,sign_state"


def test_simulate_is_byte_identical(tmp_path, capsys):
    args = ["simulate", "--kind", "first-euler", "--alpha", "1", "--dt", "0.01", "--paths", "3",
            "-o", str(tmp_path / "a")]
    run(capsys, *args)
    first = {p.name: p.read_bytes() for p in (tmp_path / "a").iterdir()}
    run(capsys, *args)
    assert first == {p.name: p.read_bytes() for p in (tmp_path / "a").iterdir()}
    assert not [p for p in (tmp_path / "a").iterdir() if p.name.endswith(".tmp")]


@pytest.mark.parametrize("kind", ["bm", "skew", "z", "first-exact"])
def test_simulate_kinds(tmp_path, capsys, kind):
    code, _, _ = run(capsys, "simulate", "--kind", kind, "--alpha", "0.3", "--dt", "0.1",
                     "--paths", "2", "-o", str(tmp_path))
    assert code == 0
    assert (tmp_path / f"{kind}_000001.csv").exists()


@pytest.mark.parametrize("kind", ["skew", "second"])
def test_alpha_above_one_is_usage_error(tmp_path, capsys, kind):
    code, _, err = run(capsys, "simulate", "--kind", kind, "--alpha", "1.5", "-o", str(tmp_path))
    assert code == 2
    assert "|alpha| <= 1" in err


def test_usage_errors(tmp_path, capsys):
    assert run(capsys, "simulate", "--kind", "nope")[0] == 2
    assert run(capsys, "verify", "--experiment", "nope")[0] == 2
    assert run(capsys, "table", "density", "--x", "1:2")[0] == 2
    assert run(capsys, "simulate", "--kind", "bm", "--dt", "0.3")[0] == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(capsys, "simulate", "--kind", "bm", "-o", str(blocker / "sub"))[0] == 2
    assert run(capsys, "table", "moments", "-o", str(tmp_path / "missing" / "x.csv"))[0] == 2
    assert run(capsys)[0] == 2


def test_config_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# defaults for this run\nkind = bm\ndt = 0.1\npaths = 2\nseed = 3\n")
    out = tmp_path / "o"
    code, _, _ = run(capsys, "simulate", "--config", str(conf), "--seed", "5", "-o", str(out))
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["seed"] == 5 and man["dt"] == 0.1 and man["n_paths"] == 2
    conf.write_text("bogus_key = 1\n")
    assert run(capsys, "simulate", "--config", str(conf))[0] == 2
    conf.write_text("no equals sign\n")
    assert run(capsys, "simulate", "--config", str(conf))[0] == 2


def test_table_moments(capsys):
    code, out, _ = run(capsys, "table", "moments", "--t", "1", "--g", "0.4", "--y", "0.7",
                       "--alpha", "1.3", "--n", "0:4:5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("#") and lines[1] == "n,density_exact,paper_verbatim"
    exact = [float(r.split(",")[1]) for r in lines[2:]]
    np.testing.assert_allclose(exact[:3], [1.0, 0.3639024485877253, 1.0], atol=1e-12)


def test_table_density_alpha_zero(capsys):
    code, out, _ = run(capsys, "table", "density", "--alpha", "0", "--x", "-1,0,2")
    rows = [r.split(",") for r in out.splitlines()[2:]]
    x = np.array([float(r[0]) for r in rows])
    d = np.array([float(r[1]) for r in rows])
    np.testing.assert_allclose(d, np.exp(-x * x / 2) / np.sqrt(2 * np.pi), atol=1e-12)


def test_table_filter_constant_between_zeros(tmp_path, capsys):
    f = tmp_path / "f.csv"
    code, _, _ = run(capsys, "table", "filter", "--kind", "second", "--alpha", "0.5",
                     "--dt", "0.01", "-o", str(f))
    assert code == 0
    lines = f.read_text().splitlines()
    assert lines[1] == "t,g,value"
    g = np.array([float(r.split(",")[1]) for r in lines[2:]])
    v = np.array([float(r.split(",")[2]) for r in lines[2:]])
    change = np.diff(v) != 0
    assert np.all(np.diff(g)[change] > 0)


def test_verify_density_exit_zero(tmp_path, capsys):
    rep = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--experiment", "density", "-o", str(rep))
    assert code == 0
    assert out.strip().splitlines()[-1].startswith("PASS ")
    doc = json.loads(rep.read_text())
    assert isinstance(doc, list) and all(r["pass"] for r in doc)
    assert doc[0]["config"]["experiment"] == "density" and doc[0]["version"] == __version__


def test_verify_reports_failure_with_exit_one(tmp_path, capsys):
    # too few paths for the corrupted-filter twin to reach |z| > 10
    code, out, _ = run(capsys, "verify", "--experiment", "first-kind-filter", "--paths", "50",
                       "--dt", "0.01", "-o", str(tmp_path / "r.json"))
    assert code == 1
    doc = json.loads((tmp_path / "r.json").read_text())
    assert any(r["params"].get("insufficient_n") for r in doc)


def test_verify_set_overrides_and_threads(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("AZEMA_THREADS", raising=False)
    code, out, _ = run(capsys, "verify", "--experiment", "moments", "--set", "n_max=2",
                       "--threads", "2", "-o", "-")
    assert code == 0
    assert os.environ["AZEMA_THREADS"] == "2"
