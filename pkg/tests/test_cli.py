import json
import logging
import subprocess
import sys

import numpy as np
import pytest

from dcmrank.cli import main
from dcmrank.degree_model import BiDegreeSequence
from dcmrank.graph import MultiDigraph


def read_json(path):
    return json.loads(path.read_text())


def test_generate_byte_identical(tmp_path):
    args = ["generate", "--n", "1000", "--alpha", "2", "--beta", "2.5", "--lambda1", "1", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("bidegree.csv", "bidegree.json", "edges.csv", "edges.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_generate_roundtrip_conserves_degrees(tmp_path):
    assert main(["generate", "--n", "500", "--seed", "1", "--out", str(tmp_path)]) == 0
    b = BiDegreeSequence.from_csv(tmp_path / "bidegree.csv")
    g = MultiDigraph.from_csv(tmp_path / "edges.csv")
    assert g.check_conservation()
    assert np.array_equal(g.in_degrees, b.in_degrees) and np.array_equal(g.out_degrees, b.out_degrees)
    side = read_json(tmp_path / "edges.json")
    assert side["n"] == 500 and side["seed"] == 1 and side["L_n"] == b.total_stubs


def test_generate_bad_n(tmp_path, capsys):
    assert main(["generate", "--n", "0", "--seed", "1", "--out", str(tmp_path)]) == 2
    assert "n must be" in capsys.readouterr().err


def test_usage_error(capsys):
    assert main(["generate", "--bogus"]) == 2
    assert "UsageError" in capsys.readouterr().err


def test_model_error_exit_3(tmp_path, capsys):
    rc = main(["generate", "--n", "1000", "--lambda2", "0.01", "--max-resamples", "5", "--seed", "1", "--out", str(tmp_path)])
    assert rc == 3
    assert "ResampleLimitExceeded" in capsys.readouterr().err


def test_entropy_seed_recorded(tmp_path):
    assert main(["generate", "--n", "50", "--out", str(tmp_path)]) == 0
    assert isinstance(read_json(tmp_path / "edges.json")["seed"], int)


def write_two_cycle(path):
    MultiDigraph.from_pairs(2, [0, 1], [1, 0]).to_csv(path)


def test_pagerank_two_cycle(tmp_path):
    write_two_cycle(tmp_path / "e.csv")
    for extra in ([], ["--k", "3"], ["--exact"]):
        assert main(["pagerank", "--edges", str(tmp_path / "e.csv"), "--out", str(tmp_path / "r.csv"), *extra]) == 0
        vals = [float(x.split(",")[1]) for x in (tmp_path / "r.csv").read_text().splitlines()[1:]]
        assert vals == pytest.approx([1.0, 1.0], abs=1e-15)


def test_pagerank_exact_vs_converged(tmp_path):
    main(["generate", "--n", "300", "--seed", "4", "--out", str(tmp_path)])
    e = str(tmp_path / "edges.csv")
    assert main(["pagerank", "--edges", e, "--exact", "--out", str(tmp_path / "x.csv")]) == 0
    assert main(["pagerank", "--edges", e, "--eps0", "1e-10", "--out", str(tmp_path / "y.csv")]) == 0
    x = np.loadtxt(tmp_path / "x.csv", delimiter=",", skiprows=1)[:, 1]
    y = np.loadtxt(tmp_path / "y.csv", delimiter=",", skiprows=1)[:, 1]
    assert np.max(np.abs(x - y)) <= 1e-8
    assert read_json(tmp_path / "y.json")["eps0"] == 1e-10


def test_pagerank_missing_file(tmp_path, capsys):
    assert main(["pagerank", "--edges", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "r.csv")]) == 2
    assert "not found" in capsys.readouterr().err


def test_inputs_not_mutated(tmp_path):
    main(["generate", "--n", "200", "--seed", "2", "--out", str(tmp_path)])
    before = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    main(["pagerank", "--edges", str(tmp_path / "edges.csv"), "--out", str(tmp_path / "r" / "rank.csv")])
    main(["couple", "--bidegree", str(tmp_path / "bidegree.csv"), "--k", "3", "--seed", "1", "--out", str(tmp_path / "c")])
    assert {p.name: p.read_bytes() for p in tmp_path.iterdir() if p.is_file()} == before


def test_couple_outputs(tmp_path):
    main(["generate", "--n", "300", "--seed", "3", "--out", str(tmp_path)])
    assert main(["couple", "--bidegree", str(tmp_path / "bidegree.csv"), "--k", "4", "--seed", "9", "--out", str(tmp_path / "c")]) == 0
    stats = read_json(tmp_path / "c" / "stats.json")
    tree = read_json(tmp_path / "c" / "tree.json")
    assert stats["k"] == 4 and len(stats["Z"]) == 5
    assert stats["tau"] == "gt_k" or isinstance(stats["tau"], int)
    assert tree["root"] == stats["root"] and tree["depth"] == 4
    assert MultiDigraph.from_csv(tmp_path / "c" / "edges.csv").check_conservation()


def test_experiment_table1_rows(tmp_path):
    rc = main(["experiment", "table1", "--replications", "3", "--seed", "1", "--threads", "1", "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "table1.csv").read_text().splitlines()
    assert len(lines) == 5
    assert [int(line.split(",")[0]) for line in lines[1:]] == [10, 100, 1000, 10000]


def test_replications_one_warns(tmp_path, caplog):
    with caplog.at_level(logging.WARNING, logger="dcmrank"):
        rc = main(["experiment", "table3", "--sizes", "50", "--replications", "1", "--seed", "0", "--threads", "1", "--out", str(tmp_path)])
    assert rc == 0
    assert any("undefined" in r.message for r in caplog.records)
    assert "nan" in (tmp_path / "table3.csv").read_text()


def test_preset_sidecar_echoes_table_parameters(tmp_path):
    main(["experiment", "table3", "--sizes", "30", "--replications", "2", "--seed", "0", "--threads", "1", "--out", str(tmp_path)])
    cfg = read_json(tmp_path / "table3.json")["config"]
    assert (cfg["alpha"], cfg["beta"], cfg["lambda1"], cfg["k"]) == (2.0, 2.5, 1.0, 9)
    assert cfg["c_values"] == [0.1, 0.3, 0.5, 0.7, 0.9]
    assert cfg["master_seed"] == 0


def test_config_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# overrides\nreplications = 3\nseed = 11\nsizes = 20, 40\n")
    base = ["experiment", "table1", "--threads", "1", "--config", str(conf)]
    main(base + ["--out", str(tmp_path / "a")])
    cfg = read_json(tmp_path / "a" / "table1.json")["config"]
    assert (cfg["replications"], cfg["master_seed"], cfg["sizes"], cfg["h"]) == (3, 11, [20, 40], 1.0)
    main(base + ["--replications", "2", "--seed", "5", "--out", str(tmp_path / "b")])
    cfg = read_json(tmp_path / "b" / "table1.json")["config"]
    assert (cfg["replications"], cfg["master_seed"]) == (2, 5)


def test_unknown_config_key(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n")
    assert main(["experiment", "cdf", "--config", str(conf), "--out", str(tmp_path)]) == 2


def test_cdf_and_coupling_presets(tmp_path):
    assert main(["experiment", "cdf", "--tbt-root-samples", "20", "--repetitions", "2", "--seed", "3", "--out", str(tmp_path)]) == 0
    bundle = read_json(tmp_path / "cdf.json")
    assert len(bundle["true"]) == 100 and len(bundle["tbt"]) == 20 and len(bundle["repetitions"]) == 2
    rc = main(["experiment", "coupling", "--sizes", "100,200", "--replications", "10", "--seed", "3", "--threads", "1", "--out", str(tmp_path)])
    assert rc == 0
    assert len((tmp_path / "coupling.csv").read_text().splitlines()) == 3


def test_console_script_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "dcmrank.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
