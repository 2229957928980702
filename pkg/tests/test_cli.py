import json

import numpy as np

from sparse_recover import io
from sparse_recover.cli import main


def test_gen_recover_verify(tmp_path, capsys):
    out = tmp_path / "prob"
    assert main(["gen", "--d", "40", "--s", "3", "--m", "30", "--seed", "5", "--out", str(out)]) == 0
    desc = io.read_json(out / "ensemble.json")
    assert desc["d"] == 40 and len(desc["support"]) == 3
    U = io.read_matrix(out / "matrix.csv")
    assert U.shape == (30, 40)
    trace = tmp_path / "trace.csv"
    capsys.readouterr()
    rc = main(["recover", "--matrix", str(out / "matrix.csv"), "--y", str(out / "y.csv"),
               "--truth", str(out / "signal.csv"), "--s", "3", "--R", str(desc["R"]),
               "--T", "80", "--gamma", "0.2", "--out", str(trace)])
    assert rc == 0
    final = json.loads(capsys.readouterr().out)
    assert final["final_err2"] < 1e-4 * desc["R"]
    rc = main(["verify", "--trace", str(trace), "--truth", str(out / "signal.csv"),
               "--matrix", str(out / "matrix.csv"), "--gamma", "0.2", "--s", "3",
               "--R", str(desc["R"]), "--out", str(tmp_path / "report.json")])
    assert rc == 0
    assert io.read_json(tmp_path / "report.json")["all_ok"]


def test_recover_from_descriptor(tmp_path, capsys):
    out = tmp_path / "prob"
    main(["gen", "--d", "30", "--s", "2", "--m", "20", "--seed", "1", "--out", str(out)])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["recover", "--ensemble", str(out / "ensemble.json"), "--T", "10",
                 "--gamma", "0.2", "--out", str(a)]) == 0
    assert main(["recover", "--matrix", str(out / "matrix.csv"), "--y", str(out / "y.csv"),
                 "--s", "2", "--R", str(io.read_json(out / "ensemble.json")["R"]),
                 "--T", "10", "--gamma", "0.2", "--out", str(b)]) == 0
    assert np.array_equal(io.read_trace(a)[0], io.read_trace(b)[0])


def test_verify_flags_violation(tmp_path):
    U = np.eye(4)
    truth = np.array([1.0, 0, 0, 0])
    io.write_matrix(tmp_path / "U.csv", U)
    io.write_vector(tmp_path / "x.csv", truth)
    (tmp_path / "trace.csv").write_text(
        "t,tau_t,support_size,x_0,x_1,x_2,x_3\n1,0.1,0,0,0,0,0\n2,,3,1,1,1,0\n")
    rc = main(["verify", "--trace", str(tmp_path / "trace.csv"), "--truth", str(tmp_path / "x.csv"),
               "--matrix", str(tmp_path / "U.csv"), "--gamma", "0.1", "--s", "1", "--R", "1",
               "--oracle", "--out", str(tmp_path / "r.json")])
    assert rc == 1
    rep = io.read_json(tmp_path / "r.json")
    assert ["2", "support2"] in [[str(t), k] for t, k in rep["failures"]]


def test_rip_subcommand(tmp_path):
    U = np.random.default_rng(0).standard_normal((6, 8)) / np.sqrt(6)
    io.write_matrix(tmp_path / "U.csv", U)
    assert main(["rip", "--matrix", str(tmp_path / "U.csv"), "--s", "2",
                 "--out", str(tmp_path / "e.json")]) == 0
    exact = io.read_json(tmp_path / "e.json")
    assert exact["method"] == "exact"
    assert main(["rip", "--matrix", str(tmp_path / "U.csv"), "--s", "2", "--mode", "sampled",
                 "--trials", "5", "--out", str(tmp_path / "m.json")]) == 0
    mc = io.read_json(tmp_path / "m.json")
    assert mc["delta"] <= exact["delta"] + 1e-12


def test_sweep_subcommand(tmp_path, capsys):
    plan = {"d": [20], "s": [2], "m": [12, 16], "seeds_per_cell": 2, "solver": {"gamma": 0.2, "T": 30}}
    io.write_json(tmp_path / "plan.json", plan)
    rc = main(["sweep", "--plan", str(tmp_path / "plan.json"), "--out", str(tmp_path / "out"),
               "--seed-base", "3", "--workers", "1"])
    assert rc == 0
    assert (tmp_path / "out" / "sweep.csv").exists()
    assert "d20_s2_m12_gaussian" in capsys.readouterr().out


def test_invalid_arguments_exit_two(tmp_path):
    assert main(["gen", "--d", "5", "--s", "9", "--m", "3", "--out", str(tmp_path)]) == 2
    io.write_json(tmp_path / "plan.json", {"d": [5], "s": [1], "m": [0]})
    assert main(["sweep", "--plan", str(tmp_path / "plan.json"), "--out", str(tmp_path / "o")]) == 2
