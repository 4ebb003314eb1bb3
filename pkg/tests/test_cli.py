"""Config validation and end-to-end experiment runs through the CLI."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from rbclab.config import ConfigError, resolve_config, validate_config
from rbclab.experiments import run_experiment

REPO = Path(__file__).resolve().parents[1]


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "rbclab.cli", *args],
                          capture_output=True, text=True)


def _write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload, indent=2) + "\n")
    return str(p)


GAUGE_CFG = {"experiment": "gauge-check", "size": 5, "kernel": "nn",
             "n_seeds": 12, "master_seed": 3}


# ---------------------------------------------------------------------------
# validate


def test_shipped_configs_validate():
    for cfg in sorted((REPO / "configs").glob("*.json")):
        res = _cli("validate", str(cfg))
        assert res.returncode == 0, res.stderr
        assert "ok" in res.stdout


@pytest.mark.parametrize("payload,needle", [
    ({"experiment": "annealing"}, "experiment"),
    ({"experiment": "scaling", "family": "dyson", "alpha": 2.5}, "alpha"),
    ({"experiment": "scaling", "family": "dyson", "alpha": 1.25,
      "sizes": [100, 50]}, "sizes"),
    ({"experiment": "scaling", "family": "dyson", "alpha": 1.25,
      "frobnicate": 1}, "frobnicate"),
    ({"experiment": "window", "family": "dyson", "alpha": 1.25,
      "threshold": 1.0, "delta": 0.25}, "threshold"),
    ({"experiment": "oracle-vs-mc", "size": 30}, "size"),
    ({"experiment": "metastate", "alpha": 1.25, "mode": "exact_gibbs_fit",
      "size": 30}, "size"),
], ids=["experiment", "alpha-range", "sizes-order", "unknown-key",
        "threshold-and-delta", "oracle-size", "exact-fit-size"])
def test_validate_rejects_bad_configs(tmp_path, payload, needle):
    path = _write(tmp_path, "bad.json", payload)
    res = _cli("validate", path)
    assert res.returncode == 2
    assert needle in res.stderr


def test_validate_reports_line_numbers(tmp_path):
    path = _write(tmp_path, "bad.json",
                  {"experiment": "scaling", "family": "dyson", "alpha": 2.5})
    res = _cli("validate", path)
    lines = Path(path).read_text().splitlines()
    alpha_line = next(i + 1 for i, l in enumerate(lines) if '"alpha"' in l)
    assert f"bad.json:{alpha_line}:" in res.stderr


def test_missing_and_malformed_files(tmp_path):
    assert _cli("validate", str(tmp_path / "nope.json")).returncode == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert _cli("validate", str(broken)).returncode == 2


def test_validate_config_api_collects_all_diagnostics():
    diags = validate_config({"experiment": "scaling", "family": "dyson",
                             "alpha": 3.0, "n_seeds": -1})
    assert len(diags) >= 2
    with pytest.raises(ConfigError):
        resolve_config({"experiment": "scaling", "family": "dyson", "alpha": 3.0})


def test_resolve_fills_defaults():
    data = resolve_config({"experiment": "scaling", "family": "dyson",
                           "alpha": 1.25})
    assert data["sizes"] == [100, 1000, 10000, 100000]
    assert data["n_seeds"] == 2000
    assert data["master_seed"] == 0


# ---------------------------------------------------------------------------
# run (small workloads; CSV and JSON contracts)


def test_run_writes_csv_and_summary(tmp_path):
    cfg = _write(tmp_path, "gauge.json", GAUGE_CFG)
    res = _cli("run", cfg, "--output", str(tmp_path / "out"))
    assert res.returncode == 0, res.stderr
    csv_path = tmp_path / "out" / "gauge-check.csv"
    summary_path = tmp_path / "out" / "gauge-check_summary.json"
    assert csv_path.exists() and summary_path.exists()
    lines = csv_path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("# ")]
    header = next(l for l in lines if not l.startswith("#"))
    # every column is documented in the comment block
    for col in header.split(","):
        assert any(col in c for c in comments), col
    summary = json.loads(summary_path.read_text())
    assert summary["experiment"] == "gauge-check"
    assert summary["results"]["n_pass"] == 12
    assert summary["n_rows"] == 12
    assert summary["data_file"] == "gauge-check.csv"
    assert "versions" in summary and "wall_time_s" in summary


def test_rerun_and_worker_count_are_byte_identical(tmp_path):
    # 600 seeds spill across several scheduler chunks, so the 4-worker run
    # really partitions the work before the byte comparison
    base = {"experiment": "metastate", "alpha": 1.5, "beta": 1.0, "size": 32,
            "n_seeds": 600, "master_seed": 9}
    outs = []
    for tag, workers in (("a", 1), ("b", 1), ("c", 4)):
        out = tmp_path / tag
        run_experiment(dict(base), output_dir=str(out), workers=workers)
        outs.append((out / "metastate.csv").read_bytes())
    assert outs[0] == outs[1]  # rerun
    assert outs[0] == outs[2]  # worker-count invariance
    summaries = [json.loads((tmp_path / t / "metastate_summary.json").read_text())
                 for t in ("a", "c")]
    for s in summaries:
        s.pop("wall_time_s")
        s["config"].pop("workers", None)
        s["config"].pop("output_dir", None)
    assert summaries[0] == summaries[1]


def test_master_seed_changes_the_data(tmp_path):
    cfg = dict(GAUGE_CFG)
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_experiment(dict(cfg), output_dir=str(a))
    run_experiment(dict(cfg, master_seed=4), output_dir=str(b))
    assert (a / "gauge-check.csv").read_bytes() != (b / "gauge-check.csv").read_bytes()


def test_cli_master_seed_override(tmp_path):
    cfg = _write(tmp_path, "gauge.json", GAUGE_CFG)
    r1 = _cli("run", cfg, "--output", str(tmp_path / "o1"), "--master-seed", "5")
    r2 = _cli("run", cfg, "--output", str(tmp_path / "o2"), "--master-seed", "5")
    r3 = _cli("run", cfg, "--output", str(tmp_path / "o3"))
    assert r1.returncode == r2.returncode == r3.returncode == 0
    b1 = (tmp_path / "o1" / "gauge-check.csv").read_bytes()
    b2 = (tmp_path / "o2" / "gauge-check.csv").read_bytes()
    b3 = (tmp_path / "o3" / "gauge-check.csv").read_bytes()
    assert b1 == b2
    assert b1 != b3
    summary = json.loads((tmp_path / "o1" / "gauge-check_summary.json").read_text())
    assert summary["config"]["master_seed"] == 5


def test_run_scaling_emits_fit_results(tmp_path):
    payload = {"experiment": "scaling", "family": "dyson", "alpha": 1.25,
               "sizes": [10, 100, 200, 1000], "n_seeds": 1000,
               "master_seed": 1, "workers": 2}
    summary = run_experiment(payload, output_dir=str(tmp_path / "s"))
    res = summary["results"]
    assert abs(res["sampled_exponent"] - res["exact_exponent"]) < 0.1
    assert res["tail_vs_zeta_max_rel_diff"] < 1e-6
    rows = [l for l in (tmp_path / "s" / "scaling.csv").read_text().splitlines()
            if l and not l.startswith("#")]
    assert len(rows) - 1 == 4 * 1000  # header + (size, seed) pairs


def test_run_rejects_invalid_config(tmp_path):
    cfg = _write(tmp_path, "bad.json", {"experiment": "scaling",
                                        "family": "dyson", "alpha": 9.0})
    res = _cli("run", cfg, "--output", str(tmp_path / "x"))
    assert res.returncode == 2
    assert "alpha" in res.stderr
