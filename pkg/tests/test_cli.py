import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from phaseflow.cli import main, parse_u0
from phaseflow.graph import read_edge_list


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_parse_u0_forms():
    np.testing.assert_array_equal(parse_u0("indicator:0,2", 4, 0), [1, 0, 1, 0])
    np.testing.assert_array_equal(parse_u0("const:0.25", 3, 0), [0.25] * 3)
    np.testing.assert_array_equal(parse_u0("values:0.1,0.2", 2, 0), [0.1, 0.2])
    u = parse_u0("random:0.4:0.6", 5, 3)
    assert np.all((u >= 0.4) & (u <= 0.6))
    np.testing.assert_array_equal(u, parse_u0("random:0.4:0.6", 5, 3))
    assert set(parse_u0("binary-random", 10, 1)) <= {0.0, 1.0}


def test_graph_command(capsys, tmp_path):
    code, out, _ = run(["graph", "--generator", "cycle", "--n", "4"], capsys)
    assert code == 0 and len(out.splitlines()) == 4
    path = tmp_path / "g.tsv"
    assert main(["graph", "--generator", "two-cluster", "--n", "8", "--inter", "0.05", "--header",
                 "--out", str(path)]) == 0
    g = read_edge_list(path)
    assert g.n_vertices == 8 and g.weights[0, 7] == 0.05
    code, out, _ = run(["graph", "--generator", "complete", "--n", "5", "--weight", "2"], capsys)
    assert len(out.splitlines()) == 10 and all(line.endswith(" 2.0") for line in out.splitlines())


def test_evolve_mbo_pins_star(capsys):
    code, out, err = run(["evolve", "--generator", "star", "--n", "4", "--r", "0", "--scheme", "mbo",
                          "--eps", "0.1", "--tau", "0.1", "--steps", "50", "--u0", "indicator:0"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["fixed_point"] is True
    assert doc["trajectory"][-1]["u"] == [1.0, 0.0, 0.0, 0.0]
    prov = doc["provenance"]
    assert {"graph_hash", "r", "epsilon", "tau", "scheme", "seed", "version"} <= set(prov)
    assert json.loads(err)["fixed_point"] is True


def test_evolve_reference_freeze(capsys):
    code, out, err = run(["evolve", "--generator", "path", "--n", "2", "--scheme", "ac-reference", "--eps", "1",
                          "--t-end", "2", "--u0", "const:0.25"], capsys)
    assert code == 0
    hit = json.loads(err)["obstacle_hit_time"]
    assert abs(hit - 0.6931) < 0.01


def test_evolve_semidiscrete_from_file_is_reproducible(capsys, tmp_path):
    gpath = tmp_path / "g.tsv"
    main(["graph", "--generator", "random", "--n", "7", "--seed", "2", "--out", str(gpath)])
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        code = main(["evolve", "--graph", str(gpath), "--scheme", "semidiscrete", "--eps", "1", "--tau", "0.5",
                     "--steps", "100", "--seed", "7", "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["provenance"]["lambda"] == 0.5


@pytest.mark.parametrize("scheme,extra", [
    ("splitting", ["--tau", "0.1", "--steps", "5"]),
    ("regularized", ["--t-end", "0.2", "--nu", "0.1"]),
    ("vggob", ["--tau", "1.0", "--u0", "indicator:0,1", "--steps", "5"]),
    ("new-mcf", ["--tau", "0.2", "--u0", "indicator:0,1", "--steps", "5"]),
    ("elmo", ["--dt", "0.01", "--steps", "20"]),
])
def test_evolve_other_schemes(scheme, extra, capsys):
    code, out, _ = run(["evolve", "--generator", "cycle", "--n", "5", "--scheme", scheme] + extra, capsys)
    assert code == 0
    assert json.loads(out)["scheme_tag"]


def test_evolve_csv(capsys):
    code, out, _ = run(["evolve", "--generator", "path", "--n", "3", "--scheme", "semidiscrete", "--tau", "0.2",
                        "--steps", "3", "--u0", "const:0.3", "--format", "csv"], capsys)
    assert code == 0
    assert out.splitlines()[0].startswith("n,t,vertex,u,beta")


def test_experiments(capsys):
    code, out, _ = run(["experiment", "pinning-map", "--generator", "star", "--n", "6",
                        "--lambdas", "0.25,0.5,1.0"], capsys)
    assert code == 0 and len(table(out)) == 18
    code, out, _ = run(["experiment", "gamma", "--generator", "path", "--n", "3",
                        "--eps-list", "1,0.5,0.25,0.125", "--grid", "20"], capsys)
    assert code == 0 and "# bound_holds=True" in out and len(table(out)) == 4
    code, out, _ = run(["experiment", "convergence", "--generator", "cycle", "--n", "6", "--eps", "1",
                        "--t", "0.4", "--taus", "0.2,0.1,0.05,0.025"], capsys)
    assert code == 0
    slope = float([x for x in out.splitlines() if x.startswith("# slope=")][0].split("=")[1])
    assert 0.8 <= slope <= 1.2
    code, out, _ = run(["experiment", "mcf-agreement", "--generator", "cycle", "--n", "6", "--samples", "3"],
                       capsys)
    assert code == 0 and len(table(out)) == 4


def test_sampling_experiments_respect_jobs(capsys, monkeypatch):
    base = ["--generator", "cycle", "--n", "5", "--eps", "0.5", "--t-end", "0.3", "--samples", "4"]
    code, serial, _ = run(["experiment", "cp2"] + base + ["--jobs", "1"], capsys)
    assert code == 0 and all(r["pass"] == "True" for r in table(serial))
    monkeypatch.setenv("PHASEFLOW_JOBS", "2")
    code, pooled, _ = run(["experiment", "cp2"] + base, capsys)
    assert pooled == serial
    code, out, _ = run(["experiment", "cp1"] + base, capsys)
    assert code == 0 and "# discard_rate=" in out
    assert all(r["pass"] in ("True", "") for r in table(out))


def test_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["evolve", "--generator", "path", "--scheme", "bogus"])
    assert exc.value.code == 2
    code, _, err = run(["evolve", "--generator", "path", "--scheme", "semidiscrete"], capsys)
    assert code == 2 and "--tau" in err
    code, _, _ = run(["evolve", "--generator", "path", "--scheme", "mbo", "--tau", "0.1", "--u0", "const:0.3"],
                     capsys)
    assert code == 2
    code, _, _ = run(["evolve", "--graph", str(tmp_path / "missing.tsv"), "--scheme", "mbo", "--tau", "0.1"],
                     capsys)
    assert code == 2
    bad = tmp_path / "bad.tsv"
    bad.write_text("0 1 1\n2 3 1\n")
    code, _, err = run(["graph", "--graph", str(bad)], capsys)
    assert code == 2 and "connected" in err


def test_numeric_failure_exit_code(capsys):
    code, _, err = run(["evolve", "--generator", "cycle", "--n", "6", "--scheme", "regularized", "--t-end", "1", "--eps", "0.05",
                        "--nu", "0.05", "--dt", "0.5", "--samples-per-unit", "1", "--u0", "random"], capsys)
    assert code == 3 and "numerical failure" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "phaseflow", "graph", "--generator", "path", "--n", "3"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines() == ["0 1 1.0", "1 2 1.0"]
