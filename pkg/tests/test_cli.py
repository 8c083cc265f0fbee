import json

import numpy as np
import pytest

from momentropy.cli import main as cli_main
from momentropy.mixtures import (
    GaussianMixture1D,
    entropy_mm,
    entropy_quad,
    save_mixture,
)
from momentropy.operators import SymmetricOperator, save_matrix_market


def run_cli(argv):
    """Invoke the CLI in-process; normalize SystemExit into an exit code."""
    try:
        rc = cli_main(argv)
    except SystemExit as exc:
        if isinstance(exc.code, int) or exc.code is None:
            return exc.code or 0
        return 1  # exited with an error message
    return rc or 0


@pytest.fixture
def diag_mtx(tmp_path):
    path = tmp_path / "diag.mtx"
    save_matrix_market(path, SymmetricOperator(np.diag(np.linspace(0.5, 2.0,
                                                                   120))))
    return str(path)


@pytest.fixture
def mix_json(tmp_path):
    path = tmp_path / "mix.json"
    save_mixture(GaussianMixture1D(np.array([0.4, 0.6]),
                                   np.array([-1.0, 1.5]),
                                   np.array([0.6, 0.9])), path)
    return str(path)


# ----------------------------------------------------------------- logdet

def test_logdet_file_record(diag_mtx, capsys):
    rc = run_cli(["logdet", diag_mtx, "--exact", "--probes", "4",
                  "--distribution", "rademacher"])
    assert rc == 0
    record = json.loads(capsys.readouterr().out)
    truth = float(np.log(np.linspace(0.5, 2.0, 120)).sum())
    assert record["converged"] is True
    assert record["n"] == 120
    assert abs(record["logdet_exact"] - truth) < 1e-9
    assert record["rel_err"] < 1e-2
    assert record["lambda_u"] >= 2.0
    assert record["config"]["probes"] == 4
    assert record["seconds"] == 0.0


def test_logdet_identity_near_zero(tmp_path, capsys):
    path = tmp_path / "identity.mtx"
    save_matrix_market(path, SymmetricOperator(np.eye(100)))
    rc = run_cli(["logdet", str(path), "--distribution", "rademacher",
                  "--probes", "8"])
    assert rc == 0
    record = json.loads(capsys.readouterr().out)
    assert abs(record["logdet_est"]) < 1e-3


def test_logdet_kernel_spec_and_determinism(tmp_path):
    args = ["logdet", "--kernel", "n=80", "l=0.65", "--probes", "10",
            "--distribution", "rademacher", "--exact"]
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    assert run_cli(args + ["--output", str(out1)]) == 0
    assert run_cli(args + ["--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    record = json.loads(out1.read_text())
    assert record["n"] == 80
    assert "rel_err" in record


def test_logdet_timings_flag(diag_mtx, capsys):
    run_cli(["logdet", diag_mtx, "--probes", "4",
             "--distribution", "rademacher", "--timings"])
    record = json.loads(capsys.readouterr().out)
    assert record["seconds"] > 0.0


def test_logdet_sweep_sorted(tmp_path, capsys):
    rc = run_cli(["logdet", "--kernel", "n=60", "l=0.5",
                  "--sweep-l", "0.85,0.45,0.65", "--probes", "10",
                  "--distribution", "rademacher", "--exact"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    records = [json.loads(line) for line in lines]
    assert [r["l"] for r in records] == [0.45, 0.65, 0.85]
    for r in records:
        assert {"meme_est", "taylor_est", "chebyshev_est", "meme_rel_err",
                "taylor_rel_err", "chebyshev_rel_err"} <= set(r)


def test_logdet_sweep_threads_do_not_change_output(tmp_path, monkeypatch):
    args = ["logdet", "--kernel", "n=60", "l=0.5", "--sweep-l", "0.45,0.85",
            "--probes", "8", "--distribution", "rademacher"]
    serial = tmp_path / "serial.jsonl"
    pooled = tmp_path / "pooled.jsonl"
    monkeypatch.setenv("MEME_THREADS", "1")
    run_cli(args + ["--output", str(serial)])
    monkeypatch.setenv("MEME_THREADS", "4")
    run_cli(args + ["--output", str(pooled)])
    assert serial.read_bytes() == pooled.read_bytes()


def test_logdet_argument_errors(diag_mtx):
    assert run_cli(["logdet"]) == 1                        # no input
    assert run_cli(["logdet", diag_mtx, "--kernel", "n=10", "l=0.5"]) == 1
    assert run_cli(["logdet", "--kernel", "n=10"]) == 1    # missing l=
    assert run_cli(["logdet", "--kernel", "n=x", "l=0.5"]) == 1
    assert run_cli(["logdet", "--kernel", "n=10", "l=0.5", "z=2"]) == 1
    assert run_cli(["logdet", "/no/such/file.mtx"]) == 1
    assert run_cli(["logdet", diag_mtx, "--sweep-l", "0.5"]) == 1


def test_logdet_nonconvergence_exit_code(capsys):
    rc = run_cli(["logdet", "--kernel", "n=50", "l=0.65", "--probes", "5",
                  "--distribution", "rademacher", "--tol", "1e-15"])
    assert rc == 2
    record = json.loads(capsys.readouterr().out)
    assert record["converged"] is False


# ------------------------------------------------------------- gmm-entropy

def test_gmm_entropy_values(mix_json, capsys):
    rc = run_cli(["gmm-entropy", mix_json, "--methods", "quad,mm,meme,mc",
                  "--mc-samples", "200"])
    assert rc == 0
    record = json.loads(capsys.readouterr().out)
    gmm = GaussianMixture1D(np.array([0.4, 0.6]), np.array([-1.0, 1.5]),
                            np.array([0.6, 0.9]))
    res = record["methods"]
    assert abs(res["quad"]["value"] - entropy_quad(gmm)) < 1e-12
    assert abs(res["mm"]["value"] - entropy_mm(gmm)) < 1e-12
    assert res["meme"]["value"] >= res["quad"]["value"] - 1e-3
    assert np.isfinite(res["mc"]["value"])
    assert record["config"]["mc-samples"] == 200


def test_gmm_entropy_config_precedence(mix_json, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"moments": 12, "mc-samples": 64}))
    rc = run_cli(["gmm-entropy", mix_json, "--config", str(cfg),
                  "--moments", "14", "--methods", "mm"])
    assert rc == 0
    record = json.loads(capsys.readouterr().out)
    assert record["config"]["moments"] == 14      # flag beats file
    assert record["config"]["mc-samples"] == 64   # file beats default


def test_gmm_entropy_rejects_unknown_config_keys(mix_json, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"momments": 12}))
    assert run_cli(["gmm-entropy", mix_json, "--config", str(cfg)]) == 1


def test_gmm_entropy_batch_sorted(mix_json, tmp_path, capsys):
    other = tmp_path / "a_first.json"
    save_mixture(GaussianMixture1D(np.array([1.0]), np.array([0.0]),
                                   np.array([1.0])), other)
    rc = run_cli(["gmm-entropy", mix_json, str(other), "--methods", "mm"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    files = [json.loads(line)["file"] for line in lines]
    assert files == sorted(files)


def test_gmm_entropy_errors(mix_json):
    assert run_cli(["gmm-entropy", "/no/such.json"]) == 1
    assert run_cli(["gmm-entropy", mix_json, "--methods", "vub"]) == 1
    assert run_cli(["gmm-entropy", mix_json, "--methods", ""]) == 1


# ----------------------------------------------------------------- bo-demo

def test_bo_demo_constant_trace(capsys):
    rc = run_cli(["bo-demo", "constant", "--iterations", "3"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("# config:")
    assert lines[1] == "iter,x,y,ir,seconds"
    rows = [line.split(",") for line in lines[2:]]
    assert len(rows) == 5  # 2 seeding queries + 3 iterations
    assert [int(r[0]) for r in rows] == [-1, 0, 1, 2, 3]
    assert all(float(r[3]) == 0.0 for r in rows)   # constant: zero regret
    assert all(r[4] == "0.000000" for r in rows)   # timings off by default


def test_bo_demo_rerun_is_byte_identical(tmp_path):
    args = ["bo-demo", "sine-mix", "--iterations", "2", "--method", "mm"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert run_cli(args + ["--output", str(a)]) == 0
    assert run_cli(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_bo_demo_meme_method(capsys):
    rc = run_cli(["bo-demo", "sine-mix", "--iterations", "1",
                  "--method", "meme-legendre-6", "--grid-size", "21"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 + 2 + 1


def test_bo_demo_two_dim_x_column(capsys):
    rc = run_cli(["bo-demo", "branin", "--iterations", "1", "--method", "mm",
                  "--grid-size", "5"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    x_cell = lines[2].split(",")[1]
    assert len(x_cell.split(";")) == 2


def test_bo_demo_unknown_objective():
    assert run_cli(["bo-demo", "rosenbrock"]) == 1


def test_version_and_dispatch(capsys):
    assert run_cli(["--version"]) == 0
    assert capsys.readouterr().out.strip()
    assert run_cli([]) == 1  # a command is required
